"""Command-line surface: computation dispatch, persistence and caching.

Exit codes: 0 success, 2 validation error, 3 numerical route disagreement,
4 insufficient series order.  Results are emitted as deterministic JSON
(sorted keys, decimal-string numbers) or flat CSV for coefficient tables.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import tempfile
import time

import click
import mpmath

import gwp1
from gwp1 import analytic, asymptotics, correlators, resolvent
from gwp1.analytic import PrecisionContext, RouteDisagreement
from gwp1.correlators import CorrelatorKey, InsufficientOrderError

EXIT_VALIDATION = 2
EXIT_ROUTE_DISAGREEMENT = 3
EXIT_INSUFFICIENT_ORDER = 4

CACHE_ENV = "GWP1_CACHE_DIR"


def _default_cache_dir() -> str:
    env = os.environ.get(CACHE_ENV)
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "gwp1")


def _cache_key(command: str, params: dict) -> str:
    canon = json.dumps({"command": command, "params": params, "version": gwp1.__version__},
                       sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _cache_read(cache_dir: str, key: str):
    path = os.path.join(cache_dir, key + ".json")
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        entry = json.load(fh)
    return entry.get("payload")


def _cache_write(cache_dir: str, key: str, payload: str):
    os.makedirs(cache_dir, exist_ok=True)
    entry = {"key": key, "created_at": time.time(), "payload": payload}
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(entry, fh)
        os.replace(tmp, os.path.join(cache_dir, key + ".json"))
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _emit(ctx_obj, payload: str):
    out = ctx_obj.get("output")
    if out:
        with open(out, "w") as fh:
            fh.write(payload)
    else:
        click.echo(payload, nl=False)
        if not payload.endswith("\n"):
            click.echo()


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


def _run_cached(ctx, command: str, params: dict, compute):
    """Dispatch with content-addressed caching and the verify mode."""
    obj = ctx.obj
    key = _cache_key(command, params)
    cache_dir = obj["cache_dir"]
    use_cache = not obj["no_cache"]
    cached = _cache_read(cache_dir, key) if (use_cache or obj["verify_cache"]) else None
    if cached is not None and use_cache and not obj["verify_cache"]:
        _emit(obj, cached)
        return
    payload = compute()
    if obj["verify_cache"] and cached is not None and cached != payload:
        click.echo("cache verification failed: stored payload differs", err=True)
        sys.exit(EXIT_ROUTE_DISAGREEMENT)
    if use_cache:
        _cache_write(cache_dir, key, payload)
    _emit(obj, payload)


def _csv_from_series(series_json: dict) -> str:
    lines = ["index,coeff"]
    for t in series_json["terms"]:
        powers = " ".join(str(p) for p in t["powers"])
        coeff = t["coeff"] if isinstance(t["coeff"], str) else json.dumps(t["coeff"])
        lines.append(f'"{powers}","{coeff}"')
    return "\n".join(lines) + "\n"


@click.group()
@click.option("--precision-bits", type=int, default=128, show_default=True,
              help="working precision for numeric commands (>= 53)")
@click.option("--cache-dir", type=click.Path(), default=None,
              help=f"cache directory (default ~/.cache/gwp1, or ${CACHE_ENV})")
@click.option("--no-cache", is_flag=True, help="bypass the result cache")
@click.option("--verify-cache", is_flag=True,
              help="recompute and compare against any cached payload")
@click.option("--output", type=click.Path(), default=None, help="write result to a file")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.pass_context
def main(ctx, precision_bits, cache_dir, no_cache, verify_cache, output, fmt):
    """Exact and arbitrary-precision computation of stationary sphere
    invariants and their analytic counterparts."""
    if precision_bits < 53:
        click.echo("precision must be at least 53 bits", err=True)
        sys.exit(EXIT_VALIDATION)
    ctx.ensure_object(dict)
    ctx.obj.update(
        precision_bits=precision_bits,
        cache_dir=cache_dir or _default_cache_dir(),
        no_cache=no_cache,
        verify_cache=verify_cache,
        output=output,
        fmt=fmt,
    )


@main.command("resolvent")
@click.option("--route", type=click.Choice(["recursion", "closed-form", "both"]),
              default="closed-form", show_default=True)
@click.option("--order", type=int, required=True)
@click.pass_context
def resolvent_cmd(ctx, route, order):
    """Matrix resolvent series by either exact route (or their comparison)."""
    if order < 1:
        click.echo("order must be >= 1", err=True)
        sys.exit(EXIT_VALIDATION)

    def compute():
        if route == "both":
            report = resolvent.cross_check_routes(order)
            if not report.ok:
                click.echo(f"route disagreement: {report.detail}", err=True)
                sys.exit(EXIT_ROUTE_DISAGREEMENT)
            return _dumps(report.to_json())
        if route == "recursion":
            data = resolvent.recursion_resolvent(order).to_json("recursion")
        else:
            data = resolvent.closed_form_M(order).to_json("closed-form")
        return _dumps(data)

    _run_cached(ctx, "resolvent", {"route": route, "order": order}, compute)


@main.command("correlator")
@click.option("--k", type=int, required=True)
@click.option("--orders", required=True, help="comma-separated per-variable orders")
@click.option("--region", default=None, help="comma-separated variable ordering")
@click.pass_context
def correlator_cmd(ctx, k, orders, region):
    """Multi-point generating series through the given inverse orders."""
    try:
        orders_t = tuple(int(x) for x in orders.split(","))
        region_t = tuple(int(x) for x in region.split(",")) if region else None
        if k < 2:
            raise ValueError("k must be >= 2")
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_VALIDATION)

    def compute():
        try:
            fk = correlators.f_k_series(k, orders_t, region_t)
        except InsufficientOrderError as exc:
            click.echo(str(exc), err=True)
            sys.exit(EXIT_INSUFFICIENT_ORDER)
        except ValueError as exc:
            click.echo(str(exc), err=True)
            sys.exit(EXIT_VALIDATION)
        data = fk.to_json()
        if ctx.obj["fmt"] == "csv":
            return _csv_from_series(data["series"])
        return _dumps(data)

    _run_cached(ctx, "correlator",
                {"k": k, "orders": list(orders_t), "region": list(region_t) if region_t else None,
                 "fmt": ctx.obj["fmt"]},
                compute)


@main.command("invariant")
@click.option("--k", type=int, required=True)
@click.option("--i", "insertions", required=True, help="comma-separated descendant ladders")
@click.option("--g", type=int, required=True)
@click.option("--m", type=int, default=0, show_default=True)
@click.option("--d", type=int, default=None, help="expected degree (validated if given)")
@click.pass_context
def invariant_cmd(ctx, k, insertions, g, m, d):
    """One stationary invariant, exact."""
    try:
        ins = tuple(int(x) for x in insertions.split(","))
        key = CorrelatorKey(k=k, insertions=ins, g=g, m=m, d=d)
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_VALIDATION)

    def compute():
        try:
            result = correlators.extract_invariant(key)
        except InsufficientOrderError as exc:
            click.echo(str(exc), err=True)
            sys.exit(EXIT_INSUFFICIENT_ORDER)
        return _dumps(result.to_json())

    _run_cached(ctx, "invariant",
                {"k": k, "insertions": list(ins), "g": g, "m": m, "d": d}, compute)


@main.command("one-point")
@click.option("--order", type=int, required=True)
@click.option("--route", type=click.Choice(["production", "oracle", "both"]),
              default="production", show_default=True)
@click.pass_context
def one_point_cmd(ctx, order, route):
    """One-point series by the production formula or its oracle."""
    if order < 2:
        click.echo("order must be >= 2", err=True)
        sys.exit(EXIT_VALIDATION)

    def compute():
        if route == "both":
            a = correlators.one_point_series(order)
            b = correlators.one_point_series_oracle(order)
            if a != b:
                click.echo("one-point routes disagree", err=True)
                sys.exit(EXIT_ROUTE_DISAGREEMENT)
            data = {"routes_agree": True, "series": a.to_json()}
        elif route == "oracle":
            data = {"series": correlators.one_point_series_oracle(order).to_json()}
        else:
            data = {"series": correlators.one_point_series(order).to_json()}
        if ctx.obj["fmt"] == "csv":
            return _csv_from_series(data["series"])
        return _dumps(data)

    _run_cached(ctx, "one-point", {"order": order, "route": route, "fmt": ctx.obj["fmt"]},
                compute)


def _parse_complex(txt: str) -> complex:
    return complex(txt.replace(" ", "").replace("i", "j"))


@main.command("eval")
@click.option("--op", type=click.Choice(
    ["G", "Gt", "j", "J", "B", "D", "Dstar", "H1", "H1star", "Hk"]), required=True)
@click.option("--args", "args_", required=True,
              help="semicolon-separated complex arguments, e.g. '0.3;1.1'")
@click.option("--route", default=None, help="trace|factorized (Hk), series|product|both (D)")
@click.pass_context
def eval_cmd(ctx, op, args_, route):
    """Numeric evaluation of the analytic objects at the chosen precision."""
    try:
        vals = [_parse_complex(v) for v in args_.split(";") if v.strip()]
    except ValueError as exc:
        click.echo(f"bad arguments: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)

    def compute():
        pc = PrecisionContext(ctx.obj["precision_bits"])
        cx = pc.ctx
        digits = int(pc.bits * 0.301) + 2
        diagnostics = {}
        err_bound = None
        try:
            if op in ("G", "Gt", "j", "H1"):
                fn = {"G": analytic.hyper_G, "Gt": analytic.hyper_Gt,
                      "j": analytic.bessel_j_mod, "H1": analytic.h_1}[op]
                value, err_bound = fn(pc, *vals)
            elif op == "J":
                value, err_bound = analytic.bessel_J(pc, *vals)
            elif op == "B":
                B = analytic.matrix_B(pc, *vals)
                diagnostics["det"] = cx.nstr(abs(B.det()), 8)
                diagnostics["entries"] = [
                    {"re": cx.nstr(e.real, digits), "im": cx.nstr(e.imag, digits)}
                    for e in B.entries()
                ]
                value = B.trace()
            elif op == "D":
                value = analytic.kernel_D(pc, *vals, route=route or "both")
            elif op == "Dstar":
                value = analytic.kernel_Dstar(pc, *vals)
            elif op == "H1star":
                value = analytic.h_1_star(pc, *vals)
            else:  # Hk
                value = analytic.h_k(pc, vals[:-1], vals[-1], route=route or "trace")
        except RouteDisagreement as exc:
            click.echo(str(exc), err=True)
            sys.exit(EXIT_ROUTE_DISAGREEMENT)
        except (ValueError, analytic.SeriesDivergenceError) as exc:
            click.echo(str(exc), err=True)
            sys.exit(EXIT_VALIDATION)
        value = cx.mpc(value)
        return _dumps({
            "op": op,
            "args": [{"re": repr(v.real), "im": repr(v.imag)} for v in vals],
            "precision_bits": pc.bits,
            "route": route,
            "value": {"re": cx.nstr(value.real, digits), "im": cx.nstr(value.imag, digits)},
            "err_bound": cx.nstr(err_bound, 8) if err_bound is not None else None,
            "diagnostics": diagnostics,
        })

    _run_cached(ctx, "eval",
                {"op": op, "args": args_, "route": route,
                 "precision_bits": ctx.obj["precision_bits"]},
                compute)


@main.command("regime")
@click.option("--name", type=click.Choice(["q0", "einf", "eps0", "qinf", "debye"]),
              required=True)
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--dmax", type=int, default=2, show_default=True)
@click.option("--gmax", type=int, default=1, show_default=True)
@click.pass_context
def regime_cmd(ctx, name, k, dmax, gmax):
    """Asymptotic-regime coefficients (exact regimes) or verification
    reports (numeric regimes), checked against the table files."""
    if k < 1 or dmax < 0 or gmax < 0:
        click.echo("k >= 1, dmax >= 0, gmax >= 0 required", err=True)
        sys.exit(EXIT_VALIDATION)

    def compute():
        if name == "q0":
            data = asymptotics.expand_q0(k, dmax)
            payload = data.to_json()
            matches = {}
            for d in range(1, dmax + 1):
                try:
                    matches[str(d)] = bool(
                        data.coefficient(d) == asymptotics.q0_table_entry(k, d)
                    )
                except KeyError:
                    continue
            payload["table_match"] = matches
            if matches and not all(matches.values()):
                click.echo("derived coefficients disagree with the table", err=True)
                sys.exit(EXIT_ROUTE_DISAGREEMENT)
            payload["pass"] = True
            return _dumps(payload)
        if name == "einf":
            data = asymptotics.expand_eps_inf(k, gmax)
            payload = data.to_json()
            matches = {}
            for g in range(0, gmax + 1):
                try:
                    matches[str(g)] = bool(
                        data.coefficient(g) == asymptotics.einf_table_entry(k, g)
                    )
                except KeyError:
                    continue
            payload["table_match"] = matches
            if matches and not all(matches.values()):
                click.echo("derived coefficients disagree with the table", err=True)
                sys.exit(EXIT_ROUTE_DISAGREEMENT)
            payload["pass"] = True
            return _dumps(payload)
        if name == "eps0":
            lams = [5, 7, 9][:k]
            F = mpmath.mpf
            rep = asymptotics.verify_eps0(k, gmax, lams, 1, [F(1) / 8, F(1) / 16, F(1) / 32])
        elif name == "qinf":
            lams = [5, 7, 9][:k]
            rep = asymptotics.verify_q_inf(k, dmax, lams, 400 / (6 * mpmath.pi),
                                           [10**4, 4 * 10**4])
        else:
            rep = asymptotics.debye_check([40, 80], 0.6)
        if not rep.passed:
            click.echo(f"regime verification failed: {rep.to_json()}", err=True)
            sys.exit(EXIT_ROUTE_DISAGREEMENT)
        return _dumps(rep.to_json())

    _run_cached(ctx, "regime", {"name": name, "k": k, "dmax": dmax, "gmax": gmax}, compute)


@main.command("selftest")
@click.option("--level", type=click.Choice(["quick", "full"]), default="quick",
              show_default=True)
@click.pass_context
def selftest_cmd(ctx, level):
    """Run the acceptance suite (quick tier < 30 s, full tier is the whole
    criteria list) and emit a JSON report."""
    from gwp1 import acceptance
    from gwp1.exprtree import TableEntryError

    try:
        results = acceptance.run_all(level, echo=lambda line: click.echo(line, err=True))
    except TableEntryError as exc:
        click.echo(f"table data error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    report = _dumps({"level": level, "results": [r.to_json() for r in results]})
    _emit(ctx.obj, report)
    if not all(r.passed for r in results):
        sys.exit(EXIT_ROUTE_DISAGREEMENT)


if __name__ == "__main__":
    main()
