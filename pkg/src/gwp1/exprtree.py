"""Small expression-tree schema for the regime coefficient tables.

Nodes are dicts: {"op": ..., "args": [...]} plus per-op payload:

    {"op": "num",  "value": "p/q"}
    {"op": "var",  "name": "lam1" | "q" | "eps" | "zeta" | "pi" | "S1" | ...}
    {"op": "add" | "mul", "args": [...]}            (n-ary)
    {"op": "neg" | "sqrt" | "log" | "sin" | "cos", "args": [x]}
    {"op": "div", "args": [num, den]}
    {"op": "pow", "args": [x], "value": "p" or "p/2"}   (rational exponent)

Two evaluators: a numeric one over an mpmath context, and an exact one over
truncated multi-variable series (used to q-expand closed forms for the
cross-regime bridges).  Both are total on the schema above.
"""

from __future__ import annotations

from fractions import Fraction

from gwp1.ring.numbers import rat_from_str
from gwp1.ring.series import MultiSeries


class TableEntryError(ValueError):
    """A table entry failed schema validation or evaluation."""


VALID_OPS = {"num", "var", "add", "mul", "neg", "sqrt", "log", "sin", "cos", "div", "pow"}


def validate_tree(tree, allowed_vars, path="root"):
    if not isinstance(tree, dict) or "op" not in tree:
        raise TableEntryError(f"{path}: node is not an op dict")
    op = tree["op"]
    if op not in VALID_OPS:
        raise TableEntryError(f"{path}: unknown op {op!r}")
    if op == "num":
        try:
            rat_from_str(tree["value"])
        except Exception as exc:
            raise TableEntryError(f"{path}: bad numeric value") from exc
        return
    if op == "var":
        if tree.get("name") not in allowed_vars:
            raise TableEntryError(f"{path}: unknown variable {tree.get('name')!r}")
        return
    args = tree.get("args", [])
    arity = {"neg": 1, "sqrt": 1, "log": 1, "sin": 1, "cos": 1, "div": 2, "pow": 1}
    if op in arity and len(args) != arity[op]:
        raise TableEntryError(f"{path}: op {op} expects {arity[op]} args")
    if op in ("add", "mul") and len(args) < 2:
        raise TableEntryError(f"{path}: op {op} expects >= 2 args")
    if op == "pow":
        ex = rat_from_str(tree["value"])
        if ex.denominator not in (1, 2):
            raise TableEntryError(f"{path}: pow exponent must be integer or half-integer")
    for i, a in enumerate(args):
        validate_tree(a, allowed_vars, f"{path}.{op}[{i}]")


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------


def eval_numeric(tree, ctx, env):
    """Evaluate over an mpmath context; env maps variable names to values
    ("pi" is supplied automatically)."""
    op = tree["op"]
    if op == "num":
        r = rat_from_str(tree["value"])
        return ctx.mpf(r.numerator) / ctx.mpf(r.denominator)
    if op == "var":
        name = tree["name"]
        if name == "pi":
            return +ctx.pi
        return env[name]
    if op == "add":
        total = ctx.mpf(0)
        for a in tree["args"]:
            total += eval_numeric(a, ctx, env)
        return total
    if op == "mul":
        total = ctx.mpf(1)
        for a in tree["args"]:
            total *= eval_numeric(a, ctx, env)
        return total
    if op == "neg":
        return -eval_numeric(tree["args"][0], ctx, env)
    if op == "div":
        return eval_numeric(tree["args"][0], ctx, env) / eval_numeric(tree["args"][1], ctx, env)
    if op == "sqrt":
        return ctx.sqrt(eval_numeric(tree["args"][0], ctx, env))
    if op == "log":
        return ctx.log(eval_numeric(tree["args"][0], ctx, env))
    if op == "sin":
        return ctx.sin(eval_numeric(tree["args"][0], ctx, env))
    if op == "cos":
        return ctx.cos(eval_numeric(tree["args"][0], ctx, env))
    if op == "pow":
        ex = rat_from_str(tree["value"])
        base = eval_numeric(tree["args"][0], ctx, env)
        if ex.denominator == 1:
            return base ** int(ex)
        return ctx.sqrt(base) ** ex.numerator
    raise TableEntryError(f"unhandled op {op}")


# ---------------------------------------------------------------------------
# exact series evaluation
# ---------------------------------------------------------------------------


def _lead_monomial(series: MultiSeries):
    """Componentwise-minimal index of a series; must be unique, and every
    other term must dominate it componentwise (so the series factors as
    c * X^m0 * (1 + higher))."""
    if series.is_zero():
        raise TableEntryError("lead of the zero series")
    lead = None
    for idx in series.terms:
        if lead is None:
            lead = idx
        else:
            lead = tuple(min(a, b) for a, b in zip(lead, idx))
    if lead not in series.terms:
        raise TableEntryError("series has no componentwise-minimal lead term")
    return lead


def _unit_split(series: MultiSeries):
    """Split as (c0, m0, one_plus_v) with one_plus_v = 1 + strictly-higher
    terms and c0 rational."""
    m0 = _lead_monomial(series)
    c0 = series.terms[m0]
    if not isinstance(c0, (int, Fraction)):
        raise TableEntryError("exact evaluation requires rational coefficients")
    c0 = Fraction(c0)
    shifted = {}
    for idx, c in series.terms.items():
        nidx = tuple(a - b for a, b in zip(idx, m0))
        shifted[nidx] = Fraction(c) / c0
    orders = tuple(o - m for o, m in zip(series.orders, m0))
    floors = tuple(f - m for f, m in zip(series.floors, m0))
    unit = MultiSeries(series.vars, orders, shifted, floors, series.ring)
    return c0, m0, unit


def _monomial_series(template: MultiSeries, m0, coeff) -> MultiSeries:
    """Single exact monomial coeff * X^m0, with a box wide enough to hold it
    and orders high enough that products only charge the index shift."""
    floors = tuple(min(f, m) for f, m in zip(template.floors, m0))
    orders = tuple(o + abs(m) + 1 for o, m in zip(template.orders, m0))
    return MultiSeries(template.vars, orders, {tuple(m0): coeff}, floors, template.ring)


def _series_inverse(series: MultiSeries) -> MultiSeries:
    c0, m0, unit = _unit_split(series)
    inv_unit = unit.inverse()
    neg_m0 = tuple(-m for m in m0)
    return _monomial_series(inv_unit, neg_m0, Fraction(1) / c0) * inv_unit


def _series_sqrt(series: MultiSeries) -> MultiSeries:
    c0, m0, unit = _unit_split(series)
    if any(m % 2 for m in m0):
        raise TableEntryError("sqrt of a series with odd lead exponents")
    num_r = _isqrt_exact(c0.numerator)
    den_r = _isqrt_exact(c0.denominator)
    if num_r is None or den_r is None:
        raise TableEntryError(f"sqrt of non-square lead coefficient {c0}")
    half_m0 = tuple(m // 2 for m in m0)
    # (1 + v)^(1/2) = sum_j C(1/2, j) v^j
    v = unit - MultiSeries.const(unit.vars, unit.orders, Fraction(1), unit.floors, unit.ring)
    total_order = sum(unit.orders) + 1
    acc = MultiSeries.const(unit.vars, unit.orders, Fraction(1), unit.floors, unit.ring)
    term = acc
    coeff = Fraction(1)
    for j in range(1, total_order + 1):
        coeff = coeff * (Fraction(1, 2) - (j - 1)) / j
        term = term * v
        if term.is_zero():
            break
        acc = acc + term.scale(coeff)
    return _monomial_series(acc, half_m0, Fraction(num_r, den_r)) * acc


def _isqrt_exact(n: int):
    if n < 0:
        return None
    r = int(n**0.5)
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand * cand == n:
            return cand
    return None


def _series_log1p(series: MultiSeries) -> MultiSeries:
    zero_idx = (0,) * len(series.vars)
    if series.terms.get(zero_idx) != 1:
        raise TableEntryError("log requires a series with constant term 1")
    v = series - MultiSeries.const(
        series.vars, series.orders, Fraction(1), series.floors, series.ring
    )
    total_order = sum(series.orders) + 1
    acc = MultiSeries.zero(series.vars, series.orders, series.floors, series.ring)
    term = MultiSeries.const(series.vars, series.orders, Fraction(1), series.floors, series.ring)
    for j in range(1, total_order + 1):
        term = term * v
        if term.is_zero():
            break
        acc = acc + term.scale(Fraction((-1) ** (j + 1), j))
    return acc


def eval_series(tree, env: dict) -> MultiSeries:
    """Exact evaluation into truncated series.  ``env`` maps variable names
    to MultiSeries over one shared box (no "pi" in exact mode)."""
    op = tree["op"]
    if op == "num":
        template = next(iter(env.values()))
        return MultiSeries.const(
            template.vars, template.orders, rat_from_str(tree["value"]),
            template.floors, template.ring,
        )
    if op == "var":
        name = tree["name"]
        if name not in env:
            raise TableEntryError(f"variable {name!r} not available in exact mode")
        return env[name]
    if op == "add":
        args = [eval_series(a, env) for a in tree["args"]]
        total = args[0]
        for a in args[1:]:
            total = total + a
        return total
    if op == "mul":
        args = [eval_series(a, env) for a in tree["args"]]
        total = args[0]
        for a in args[1:]:
            total = total * a
        return total
    if op == "neg":
        return -eval_series(tree["args"][0], env)
    if op == "div":
        return eval_series(tree["args"][0], env) * _series_inverse(
            eval_series(tree["args"][1], env)
        )
    if op == "sqrt":
        return _series_sqrt(eval_series(tree["args"][0], env))
    if op == "log":
        return _series_log1p(eval_series(tree["args"][0], env))
    if op == "pow":
        ex = rat_from_str(tree["value"])
        base = eval_series(tree["args"][0], env)
        if ex.denominator == 2:
            base = _series_sqrt(base)
            ex = Fraction(ex.numerator)
        n = int(ex)
        if n < 0:
            base = _series_inverse(base)
            n = -n
        result = MultiSeries.const(
            base.vars, base.orders, Fraction(1), base.floors, base.ring
        )
        for _ in range(n):
            result = result * base
        return result
    raise TableEntryError(f"op {op} not supported in exact mode")


# ---------------------------------------------------------------------------
# windowed exact evaluation in a region-ordered Laurent box
# ---------------------------------------------------------------------------


class BoxSeries:
    """Exact truncated expansion of a closed form in a declared region.

    Index convention: slot order is the region order (largest variable
    first); at a spectral slot index +m means var^-m, at the "q" slot it
    means q^+m.  Terms live in the window [lo, hi] per slot.  Leads are
    taken lexicographically in the slot order, which is the iterated-Laurent
    expansion for |v_1| > |v_2| > ... .

    Window soundness: dropped below-window terms could only return to a kept
    index through multiplication by positive variable powers, and those come
    solely from polynomial numerators of bounded degree; callers must make
    the window deeper than the total positive degree occurring in the tree.
    """

    __slots__ = ("vars", "lo", "hi", "terms")

    def __init__(self, vars_, lo, hi, terms=None):
        self.vars = tuple(vars_)
        self.lo = tuple(lo)
        self.hi = tuple(hi)
        clean = {}
        if terms:
            for idx, c in terms.items():
                c = Fraction(c)
                if c and self._inside(idx):
                    clean[tuple(idx)] = c
        self.terms = clean

    def _inside(self, idx):
        return all(l <= m <= h for m, l, h in zip(idx, self.lo, self.hi))

    @classmethod
    def constant(cls, value, vars_, lo, hi):
        z = (0,) * len(vars_)
        return cls(vars_, lo, hi, {z: Fraction(value)})

    @classmethod
    def variable(cls, name, vars_, lo, hi):
        e = [0] * len(vars_)
        i = list(vars_).index(name)
        e[i] = 1 if name == "q" else -1  # q^+1 vs var^+1 == (1/var)^-1
        return cls(vars_, lo, hi, {tuple(e): Fraction(1)})

    def is_zero(self):
        return not self.terms

    def __neg__(self):
        return BoxSeries(self.vars, self.lo, self.hi, {i: -c for i, c in self.terms.items()})

    def __add__(self, other):
        terms = dict(self.terms)
        for i, c in other.terms.items():
            v = terms.get(i, Fraction(0)) + c
            if v:
                terms[i] = v
            else:
                terms.pop(i, None)
        return BoxSeries(self.vars, self.lo, self.hi, terms)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = {}
        for ia, ca in self.terms.items():
            for ib, cb in other.terms.items():
                idx = tuple(x + y for x, y in zip(ia, ib))
                if not self._inside(idx):
                    continue
                v = out.get(idx, Fraction(0)) + ca * cb
                if v:
                    out[idx] = v
                else:
                    del out[idx]
        return BoxSeries(self.vars, self.lo, self.hi, out)

    def _lead(self):
        if not self.terms:
            raise TableEntryError("lead of the zero expansion")
        return min(self.terms)

    def _unit_split(self):
        """Split as c0 * X^m0 * (1 + v) with every v-term lex-positive."""
        m0 = self._lead()
        c0 = self.terms[m0]
        shifted = {}
        for idx, c in self.terms.items():
            nidx = tuple(a - b for a, b in zip(idx, m0))
            if self._inside(nidx):
                shifted[nidx] = c / c0
        unit = BoxSeries(self.vars, self.lo, self.hi, shifted)
        return c0, m0, unit

    def _iter_bound(self):
        # each multiplication by a lex-positive v strictly raises the least
        # lex index, so the box volume bounds the iteration count
        vol = 1
        for h, l in zip(self.hi, self.lo):
            vol *= h - l + 1
        return vol

    def _series_from_unit(self, unit_terms, coeffs_fn):
        """sum_j coeffs_fn(j) * v^j over the lex-positive part v."""
        z = (0,) * len(self.vars)
        v = BoxSeries(self.vars, self.lo, self.hi,
                      {i: c for i, c in unit_terms.items() if i != z})
        acc = BoxSeries.constant(coeffs_fn(0), self.vars, self.lo, self.hi)
        term = BoxSeries.constant(1, self.vars, self.lo, self.hi)
        for j in range(1, self._iter_bound() + 1):
            term = term * v
            if term.is_zero():
                break
            cj = coeffs_fn(j)
            if cj:
                acc = acc + BoxSeries(self.vars, self.lo, self.hi,
                                      {i: c * cj for i, c in term.terms.items()})
        return acc

    def inverse(self):
        c0, m0, unit = self._unit_split()
        inv_unit = unit._series_from_unit(unit.terms, lambda j: Fraction((-1) ** j))
        neg = BoxSeries(self.vars, self.lo, self.hi,
                        {tuple(-m for m in m0): Fraction(1) / c0})
        return neg * inv_unit

    def sqrt(self):
        if self.is_zero():
            return self
        c0, m0, unit = self._unit_split()
        if any(m % 2 for m in m0):
            raise TableEntryError("sqrt of an expansion with odd lead exponents")
        num_r = _isqrt_exact(c0.numerator)
        den_r = _isqrt_exact(c0.denominator)
        if num_r is None or den_r is None:
            raise TableEntryError(f"sqrt of non-square lead coefficient {c0}")

        binom = [Fraction(1)]

        def coeffs(j):
            while len(binom) <= j:
                jj = len(binom)
                binom.append(binom[-1] * (Fraction(1, 2) - (jj - 1)) / jj)
            return binom[j]

        root_unit = unit._series_from_unit(unit.terms, coeffs)
        mono = BoxSeries(self.vars, self.lo, self.hi,
                         {tuple(m // 2 for m in m0): Fraction(num_r, den_r)})
        return mono * root_unit

    def log(self):
        c0, m0, unit = self._unit_split()
        if c0 != 1 or any(m0):
            raise TableEntryError("log requires a unit lead monomial")
        return unit._series_from_unit(unit.terms, lambda j: Fraction((-1) ** (j + 1), j) if j else Fraction(0))

    def coefficient(self, idx):
        return self.terms.get(tuple(idx), Fraction(0))


def eval_box_series(tree, vars_, lo, hi) -> BoxSeries:
    """Exact windowed expansion of a tree in the region given by the slot
    order of ``vars_`` (descending magnitudes, "q" small)."""
    op = tree["op"]
    if op == "num":
        return BoxSeries.constant(rat_from_str(tree["value"]), vars_, lo, hi)
    if op == "var":
        if tree["name"] not in vars_:
            raise TableEntryError(f"variable {tree['name']!r} not present in exact mode")
        return BoxSeries.variable(tree["name"], vars_, lo, hi)
    if op == "add":
        args = [eval_box_series(a, vars_, lo, hi) for a in tree["args"]]
        total = args[0]
        for a in args[1:]:
            total = total + a
        return total
    if op == "mul":
        args = [eval_box_series(a, vars_, lo, hi) for a in tree["args"]]
        total = args[0]
        for a in args[1:]:
            total = total * a
        return total
    if op == "neg":
        return -eval_box_series(tree["args"][0], vars_, lo, hi)
    if op == "div":
        return eval_box_series(tree["args"][0], vars_, lo, hi) * eval_box_series(
            tree["args"][1], vars_, lo, hi
        ).inverse()
    if op == "sqrt":
        return eval_box_series(tree["args"][0], vars_, lo, hi).sqrt()
    if op == "log":
        return eval_box_series(tree["args"][0], vars_, lo, hi).log()
    if op == "pow":
        ex = rat_from_str(tree["value"])
        base = eval_box_series(tree["args"][0], vars_, lo, hi)
        if ex.denominator == 2:
            base = base.sqrt()
            ex = Fraction(ex.numerator)
        n = int(ex)
        inv = n < 0
        result = BoxSeries.constant(1, vars_, lo, hi)
        for _ in range(abs(n)):
            result = result * base
        return result.inverse() if inv else result
    raise TableEntryError(f"op {op} not supported in windowed exact mode")


# ---------------------------------------------------------------------------
# grading (Euler scaling) check
# ---------------------------------------------------------------------------

GRADING_WEIGHTS = {"lam1": 1, "lam2": 1, "lam3": 1, "lam4": 1, "eps": 1, "q": 2}


def grading_scaling_check(tree, ctx, env, expected_eigenvalue: int, rel_tol=1e-20):
    """Numeric Euler-operator test: scaling (lam, sqrt(q), eps) by t = 2
    must multiply the value by 2**eigenvalue.  The trig arguments pi lam/eps
    are scale-invariant, so S/C variables are left alone."""
    t = ctx.mpf(2)
    scaled = {}
    for name, val in env.items():
        w = GRADING_WEIGHTS.get(name, 0)
        scaled[name] = val * t**w
    v1 = eval_numeric(tree, ctx, env)
    v2 = eval_numeric(tree, ctx, scaled)
    if v1 == 0 and v2 == 0:
        return True
    return abs(v2 - v1 * t**expected_eigenvalue) <= ctx.mpf(rel_tol) * max(
        abs(v2), ctx.mpf(1e-290)
    )
