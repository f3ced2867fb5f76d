"""Exact k-point generating series and individual stationary invariants.

The k-point series is assembled from cyclic-coset sums of traces of the
bispectrally substituted resolvent, with every pairwise pole expanded
geometrically in a declared region of the spectral variables.  Extraction of
a single invariant never materializes the full multivariate series: a pruned
enumeration walks the cycle of matrix factors and geometric expansions and
accumulates exactly the finitely many contributions to one target monomial.

The one-point series has its own production formula (Bernoulli-difference
form) plus two independently organized routes used as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from math import comb, factorial

from gwp1.resolvent import closed_form_M
from gwp1.ring.numbers import bernoulli_number, bernoulli_poly
from gwp1.ring.poly import MultiPoly
from gwp1.ring.series import MultiSeries

XE_VARS = ("x", "eps")
XE_LAURENT = frozenset({"eps"})
RING_XE = "QQ[x,eps~]"


class InsufficientOrderError(ValueError):
    """A requested coefficient lies beyond the computed truncation order."""


def _xe_zero() -> MultiPoly:
    return MultiPoly.zero(XE_VARS, XE_LAURENT)


def _xe_const(v) -> MultiPoly:
    return MultiPoly.const(XE_VARS, v, XE_LAURENT)


def _xe_mono(xp: int, ep: int, c=Fraction(1)) -> MultiPoly:
    return MultiPoly(XE_VARS, {(xp, ep): Fraction(c)}, XE_LAURENT)


def _neg_binom(r: int, m: int) -> int:
    # coefficient of x^m in (1-x)^-r, i.e. C(r+m-1, m); handles r = 0
    if m == 0:
        return 1
    if r <= 0:
        return 0
    return comb(r + m - 1, m)


def substitute_shifted(series_in_z: MultiSeries, target: str = "lam", N: int | None = None) -> MultiSeries:
    """Substitute z = (lam - x)/eps and s = 1/eps, re-expanding in 1/lam.

    z**-r maps to eps^r sum_m C(r+m-1, m) x^m lam^-(r+m); each s-degree d of
    a coefficient becomes eps^(r-d) (Laurent when d exceeds r).  The output
    is exact through lam**-N, which cannot exceed the input order.
    """
    if series_in_z.vars != ("z",):
        raise ValueError("input must be a single-variable series in z")
    n_in = series_in_z.orders[0]
    if N is None:
        N = n_in
    if N > n_in:
        raise InsufficientOrderError(
            f"requested order {N} exceeds input validity {n_in}"
        )
    out: dict[tuple, MultiPoly] = {}
    for (r,), coeff in series_in_z.terms.items():
        # coeff is a polynomial in s
        base_terms = {}
        for (d,), c in coeff.terms.items():
            base_terms[(0, r - d)] = base_terms.get((0, r - d), Fraction(0)) + c
        base = MultiPoly(XE_VARS, base_terms, XE_LAURENT)
        for m in range(0, N - r + 1):
            cb = _neg_binom(r, m)
            if not cb:
                continue
            contrib = base * _xe_mono(m, 0, cb)
            if contrib.is_zero():
                continue
            idx = (r + m,)
            if idx in out:
                out[idx] = out[idx] + contrib
            else:
                out[idx] = contrib
    out = {i: p for i, p in out.items() if not p.is_zero()}
    return MultiSeries((target,), (N,), out, ring=RING_XE)


@lru_cache(maxsize=8)
def _m_entries_in_lambda(N: int):
    """Entries of the substituted resolvent as sparse index -> poly maps.

    Returns ({(row, col): {j: MultiPoly}}, N).  Entry (0,0) carries the
    identity contribution at index 0.
    """
    R = closed_form_M(N)
    one = MultiSeries.const(("z",), (N,), MultiPoly.const(("s",), 1), ring="QQ[s]")
    entries = {
        (0, 0): one + R.alpha,
        (0, 1): R.beta,
        (1, 0): R.gamma,
        (1, 1): -R.alpha,
    }
    out = {}
    for key, series in entries.items():
        sub = substitute_shifted(series, "lam", N)
        out[key] = {idx[0]: poly for idx, poly in sub.terms.items()}
    return out, N


def _truncate_x(poly: MultiPoly, cap: int) -> MultiPoly:
    xi = poly.vars.index("x")
    return MultiPoly(
        poly.vars,
        {e: c for e, c in poly.terms.items() if e[xi] <= cap},
        poly.laurent,
    )


@lru_cache(maxsize=16)
def _m_entries_x_capped(N: int, x_cap: int):
    """Entry maps with terms above a given x-degree dropped (extraction of a
    single x power never needs them).  Indices with no surviving terms are
    removed so the enumeration prunes on them."""
    full, avail = _m_entries_in_lambda(N)
    out = {}
    for key, mp in full.items():
        capped = {}
        for j, poly in mp.items():
            p = _truncate_x(poly, x_cap)
            if not p.is_zero():
                capped[j] = p
        out[key] = capped
    return out, avail


def _coset_reps(k: int):
    """One representative per cyclic coset: permutations fixing the first slot."""
    for rest in permutations(range(2, k + 1)):
        yield (1,) + rest


@dataclass(frozen=True)
class FkSeries:
    k: int
    region: tuple
    orders: tuple
    series: MultiSeries

    def coefficient(self, target) -> MultiPoly:
        return self.series.coefficient_or(tuple(target), _xe_zero())

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "region": list(self.region),
            "orders": list(self.orders),
            "series": self.series.to_json(),
        }


def _fk_coefficient(
    k: int, targets: dict, region: tuple, resolvent_order: int, x_cap: int | None = None
) -> MultiPoly:
    """Coefficient of prod_v lam_v^-targets[v] in the k-point assembly.

    Matrix indices around any cycle sum to (sum targets) - k exactly, which
    bounds the enumeration and guarantees the conservative resolvent order
    policy is sufficient.  With ``x_cap`` set, terms of higher x-degree are
    dropped throughout (sound when only that Taylor coefficient is read).
    """
    if x_cap is None:
        entries, avail = _m_entries_in_lambda(resolvent_order)
    else:
        entries, avail = _m_entries_x_capped(resolvent_order, x_cap)
    T = sum(targets.values())
    j_max = T - k
    if j_max > avail:
        raise InsufficientOrderError(
            f"need resolvent order {j_max}, computed only {avail}"
        )
    rank = {v: i for i, v in enumerate(region)}
    total = _xe_zero()
    one_poly = _xe_const(1)
    # geometric powers chain at most once through each rank level, so no
    # feasible edge power exceeds the total budget plus slack
    m_cap = T + k + 2

    for sigma in _coset_reps(k):
        # edge i joins position i and i+1 (mod k); sign flips when the edge
        # is expanded on the swapped ordering
        edges = []
        sign = 1
        for i in range(k):
            a, b = sigma[i], sigma[(i + 1) % k]
            hi, lo = (a, b) if rank[a] < rank[b] else (b, a)
            if hi == b:
                sign = -sign
            edges.append((hi, lo))

        def idx_at(pos: int, m_prev: int, m_here: int) -> int:
            # lam-index consumed by the matrix factor at this position
            v = sigma[pos]
            j = targets[v]
            for e_i, m in ((pos - 1, m_prev), (pos, m_here)):
                hi, lo = edges[e_i % k]
                if v == hi:
                    j -= m + 1
                else:
                    j += m
            return j

        for chain in product((0, 1), repeat=k):
            ent = [entries[(chain[i], chain[(i + 1) % k])] for i in range(k)]
            acc = _xe_zero()

            def walk(pos: int, m0: int, m_prev: int, partial: MultiPoly):
                nonlocal acc
                if pos == k:
                    j0 = idx_at(0, m_prev, m0)
                    if 0 <= j0 <= j_max:
                        c = ent[0].get(j0)
                        if c is not None:
                            acc = acc + partial * c
                    return
                for m in range(0, m_cap + 1):
                    j = idx_at(pos, m_prev, m)
                    v = sigma[pos]
                    hi = edges[pos][0]
                    if v == hi and j < 0:
                        break  # j decreases with m
                    if v != hi and j > j_max:
                        break  # j increases with m
                    if 0 <= j <= j_max:
                        c = ent[pos].get(j)
                        if c is not None:
                            p = partial * c
                            if x_cap is not None:
                                p = _truncate_x(p, x_cap)
                            if not p.is_zero():
                                walk(pos + 1, m0, m, p)

            # choose m for edge 0 (between positions 0 and 1), then walk
            for m0 in range(0, m_cap + 1):
                walk(1, m0, m0, one_poly)
            total = total + acc * Fraction(sign)

    result = -total
    if k == 2:
        # delta-term 1/(lam_1 - lam_2)^2 expanded in the declared region:
        # sum_m (m+1) hi^-(m+2) lo^m; touches only polar targets
        hi, lo = region[0], region[1]
        if targets[lo] <= 0 and targets[hi] == -targets[lo] + 2:
            result = result - _xe_const(-targets[lo] + 1)
    return result


def resolvent_order_policy(k: int, orders) -> int:
    """Conservative order for the substituted resolvent: T + 2k for total
    extraction budget T (cycle indices actually sum to T - k).  Rounded up
    to a multiple of 4 so repeated extractions share the cached resolvent."""
    n = sum(max(o, 0) for o in orders) + 2 * k
    return (n + 3) // 4 * 4


def f_k_series(k: int, orders, region: tuple | None = None) -> FkSeries:
    """K-point series (k >= 2) exact through the per-variable orders.

    The region is the ordering of the variables by decreasing magnitude;
    coefficients are independent of it (verified in tests), the canonical
    ordering (1, ..., k) is the production default.
    """
    if k < 2:
        raise ValueError("f_k_series requires k >= 2 (one-point has its own route)")
    orders = tuple(int(o) for o in orders)
    if len(orders) != k:
        raise ValueError("one order per variable required")
    if region is None:
        region = tuple(range(1, k + 1))
    if sorted(region) != list(range(1, k + 1)):
        raise ValueError("region must order the variables 1..k")
    n_res = resolvent_order_policy(k, orders)
    terms = {}
    for tgt in product(*(range(0, o + 1) for o in orders)):
        targets = {v: tgt[v - 1] for v in range(1, k + 1)}
        c = _fk_coefficient(k, targets, region, n_res)
        if not c.is_zero():
            terms[tgt] = c
    lam_vars = tuple(f"lam{v}" for v in range(1, k + 1))
    series = MultiSeries(lam_vars, orders, terms, ring=RING_XE)
    return FkSeries(k=k, region=region, orders=orders, series=series)


def f_k_polar_coefficient(
    k: int, targets, region: tuple | None = None, x_cap: int | None = None
) -> MultiPoly:
    """Single coefficient at an arbitrary (possibly polar) multi-index."""
    if region is None:
        region = tuple(range(1, k + 1))
    tmap = {v: int(t) for v, t in zip(range(1, k + 1), targets)}
    n_res = resolvent_order_policy(k, [max(t, 0) for t in tmap.values()])
    return _fk_coefficient(k, tmap, region, n_res, x_cap)


# ---------------------------------------------------------------------------
# one-point series: production formula and oracle routes
# ---------------------------------------------------------------------------


def _u_shift_poly(c: Fraction) -> MultiPoly:
    """The substitution value x/eps + c."""
    return MultiPoly(XE_VARS, {(1, -1): Fraction(1), (0, 0): Fraction(c)}, XE_LAURENT)


def one_point_series(N: int) -> MultiSeries:
    """One-point series through lam**-N by the Bernoulli-difference formula:

        sum_{j>=2} eps^j/(j lam^j) sum_{i=0}^{[j/2]} eps^(-1-2i)/i!^2
            sum_{l=0}^{2i} (-1)^l C(2i, l) B_j(x/eps + i - l + 1/2)

    The inner sum is a (2i)-th backward difference of a degree-j polynomial,
    so it vanishes for 2i > j and the i-sum is legitimately truncated.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    out: dict[tuple, MultiPoly] = {}
    for j in range(2, N + 1):
        bj = bernoulli_poly(j)
        coeff = _xe_zero()
        for i in range(0, j // 2 + 1):
            inner = _xe_zero()
            for ell in range(0, 2 * i + 1):
                val = bj.subs_poly("u", _u_shift_poly(Fraction(2 * (i - ell) + 1, 2)))
                inner = inner + val * Fraction((-1) ** ell * comb(2 * i, ell))
            scale = Fraction(1, factorial(i) ** 2)
            coeff = coeff + inner * _xe_mono(0, j - 1 - 2 * i, scale)
        coeff = coeff * Fraction(1, j)
        if not coeff.is_zero():
            out[(j,)] = coeff
    return MultiSeries(("lam",), (N,), out, ring=RING_XE)


def one_point_digamma_form(N: int) -> MultiSeries:
    """Independently organized one-point series (digamma-term form):

        sum_{g>=1} eps^(2g-1) (1 - 2^(2g-1)) B_2g / (2^2g g) (lam - x)^-2g
        + (1/eps) sum_{j>=2} x^j/(j lam^j)
        + sum_{j>=2} eps^j (lam - x)^-j sum_{i=1}^{[j/2]} eps^(-1-2i)/i!^2
              sum_{l=0}^{2i-1} (-1)^l C(2i-1, l) (i - l - 1/2)^(j-1)

    Used as a cross-check of :func:`one_point_series`.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    acc = MultiSeries.zero(("lam",), (N,), ring=RING_XE)
    for g in range(1, N // 2 + 1):
        c = Fraction(1 - 2 ** (2 * g - 1)) * bernoulli_number(2 * g) / (2 ** (2 * g) * g)
        term = _inv_lam_minus_x_pow(2 * g, N).scale(_xe_mono(0, 2 * g - 1, c))
        acc = acc + term
    xonly = {
        (j,): _xe_mono(j, -1, Fraction(1, j)) for j in range(2, N + 1)
    }
    acc = acc + MultiSeries(("lam",), (N,), xonly, ring=RING_XE)
    for j in range(2, N + 1):
        inner_total = _xe_zero()
        for i in range(1, j // 2 + 1):
            s = Fraction(0)
            for ell in range(0, 2 * i):
                s += (-1) ** ell * comb(2 * i - 1, ell) * Fraction(2 * (i - ell) - 1, 2) ** (
                    j - 1
                )
            inner_total = inner_total + _xe_mono(0, j - 1 - 2 * i, s / factorial(i) ** 2)
        if not inner_total.is_zero():
            acc = acc + _inv_lam_minus_x_pow(j, N).scale(inner_total)
    return acc


def _inv_lam_minus_x_pow(t: int, N: int) -> MultiSeries:
    """(lam - x)^-t as a series in 1/lam with polynomial x-coefficients."""
    terms = {}
    for m in range(0, N - t + 1):
        terms[(t + m,)] = _xe_mono(m, 0, comb(t + m - 1, m))
    return MultiSeries(("lam",), (N,), terms, ring=RING_XE)


QE_VARS = ("q", "eps")
RING_QE = "QQ[q,eps]"


def one_point_qseries_oracle(D: int, N: int) -> MultiSeries:
    """Small-q expansion of the analytic one-point function, exact:

        sum_{d=1..D} q^d (2d-1)! / ( d!^2 prod_{j=1..d} (lam^2 - (2j-1)^2 eps^2/4) )

    expanded through lam**-N with coefficients polynomial in (q, eps).  The
    d-th term is the independent oracle for degree-d one-point invariants.
    """
    acc = MultiSeries.zero(("lam",), (N,), ring=RING_QE)
    for d in range(1, D + 1):
        if 2 * d > N:
            break
        term = MultiSeries.const(
            ("lam",),
            (N,),
            MultiPoly(QE_VARS, {(d, 0): Fraction(factorial(2 * d - 1), factorial(d) ** 2)}),
            ring=RING_QE,
        )
        for jj in range(1, d + 1):
            c2 = Fraction(2 * jj - 1, 2) ** 2
            inv_terms = {}
            for m in range(0, (N - 2) // 2 + 1):
                inv_terms[(2 + 2 * m,)] = MultiPoly(
                    QE_VARS, {(0, 2 * m): c2**m}
                )
            term = term * MultiSeries(("lam",), (N,), inv_terms, ring=RING_QE)
        acc = acc + term
    return acc


def one_point_series_oracle(N: int) -> MultiSeries:
    """One-point series rebuilt from the small-q oracle plus the asymptotic
    digamma series (Bernoulli-number form) and the exact logarithm bookkeeping:

        (1/eps) [ H1q(lam - x; eps)|_{q=1}
                  - sum_{g>=1} (1 - 2^(1-2g)) B_2g/(2g) eps^2g (lam-x)^-2g
                  + sum_{m>=2} x^m/(m lam^m) ]

    This route shares no code with the Bernoulli-difference production
    formula; exact agreement is an acceptance criterion.
    """
    acc = MultiSeries.zero(("lam",), (N,), ring=RING_XE)
    # H1 small-q part at q = 1, argument lam - x
    for d in range(1, N // 2 + 1):
        term = MultiSeries.const(
            ("lam",), (N,), _xe_const(Fraction(factorial(2 * d - 1), factorial(d) ** 2)),
            ring=RING_XE,
        )
        for jj in range(1, d + 1):
            c2 = Fraction(2 * jj - 1, 2) ** 2
            # 1/((lam-x)^2 - c2 eps^2) = sum_m c2^m eps^(2m) (lam-x)^-(2m+2)
            factor = MultiSeries.zero(("lam",), (N,), ring=RING_XE)
            for m in range(0, (N - 2) // 2 + 1):
                factor = factor + _inv_lam_minus_x_pow(2 + 2 * m, N).scale(
                    _xe_mono(0, 2 * m, c2**m)
                )
            term = term * factor
        acc = acc + term
    for g in range(1, N // 2 + 1):
        c = (1 - Fraction(2) ** (1 - 2 * g)) * bernoulli_number(2 * g) / (2 * g)
        acc = acc - _inv_lam_minus_x_pow(2 * g, N).scale(_xe_mono(0, 2 * g, c))
    xonly = {(m,): _xe_mono(m, 0, Fraction(1, m)) for m in range(2, N + 1)}
    acc = acc + MultiSeries(("lam",), (N,), xonly, ring=RING_XE)
    return acc.scale(_xe_mono(0, -1))


# ---------------------------------------------------------------------------
# invariant extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelatorKey:
    """Index of one stationary invariant: k descendent insertions of the
    point class with ladders ``insertions``, genus ``g``, ``m`` extra
    dilaton-free insertions of the unit class, and the forced degree ``d``.

    Nonzero values require the degree-dimension relation

        2g - 2 + 2d + m = sum(insertions).
    """

    k: int
    insertions: tuple
    g: int
    m: int = 0
    d: int | None = None

    def __post_init__(self):
        if self.k < 1 or self.k != len(self.insertions):
            raise ValueError("k must equal the number of insertions and be >= 1")
        if any(i < 0 for i in self.insertions) or self.g < 0 or self.m < 0:
            raise ValueError("insertions, genus and m must be non-negative")

    def forced_degree(self) -> int | None:
        """Degree forced by dimension matching, or None when no degree exists."""
        num = sum(self.insertions) + 2 - 2 * self.g - self.m
        if num < 0 or num % 2:
            return None
        return num // 2

    def is_structural_zero(self) -> bool:
        fd = self.forced_degree()
        if fd is None:
            return True
        return self.d is not None and self.d != fd


@dataclass(frozen=True)
class InvariantResult:
    key: CorrelatorKey
    value: Fraction
    d: int | None
    structural_zero: bool

    def to_json(self) -> dict:
        from gwp1.ring.numbers import rat_to_str

        return {
            "k": self.key.k,
            "insertions": list(self.key.insertions),
            "m": self.key.m,
            "g": self.key.g,
            "d": self.d,
            "value": rat_to_str(self.value),
            "structural_zero": self.structural_zero,
        }


def _select_eps_power(poly: MultiPoly, x_power: int, eps_power: int) -> Fraction:
    return poly.terms.get((x_power, eps_power), Fraction(0))


def extract_invariant(key: CorrelatorKey, region: tuple | None = None) -> InvariantResult:
    """Read one stationary invariant off the exact generating series.

    The x**m Taylor coefficient carries the unit-class insertions; the value
    sits at the eps**(2g-2+k) coefficient after removing the ladder
    factorials.  Keys failing the dimension relation report a flagged zero.
    """
    fd = key.forced_degree()
    if key.is_structural_zero():
        return InvariantResult(key=key, value=Fraction(0), d=fd, structural_zero=True)
    norm = Fraction(factorial(key.m))
    for i in key.insertions:
        norm /= factorial(i + 1)
    eps_target = 2 * key.g - 2 + key.k
    if key.k == 1:
        n = key.insertions[0] + 2
        series = one_point_series(n)
        coeff = series.coefficient_or((n,), _xe_zero())
    else:
        targets = [i + 2 for i in key.insertions]
        coeff = f_k_polar_coefficient(key.k, targets, region, x_cap=key.m)
    value = _select_eps_power(coeff, key.m, eps_target) * norm
    return InvariantResult(key=key, value=value, d=fd, structural_zero=False)
