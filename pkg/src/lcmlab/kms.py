"""Fixed and absorbing sets, regularity, partition functions and KMS-state
evaluation on spanning monomials.

Rational arithmetic (``Fraction``) is used whenever the inputs allow it:
integer inverse temperatures and rational-valued traces.  Otherwise values
are floats and every truncated quantity reports a tail bound.
"""
from __future__ import annotations

import cmath
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .core import (ZERO, ClassId, DivergenceError, NoScale, NonPrincipal, NotRightLcm, Pair,
                   ScaledMonoid, UsageError, compress, elements_up_to, expectation,
                   normalize_pair)


def _power(n: int, e):
    """n**e, exact when e is an integer."""
    if isinstance(e, Fraction) and e.denominator == 1:
        e = int(e)
    if isinstance(e, int):
        return Fraction(n) ** e
    return float(n) ** float(e)


def _up(x) -> float:
    """float(x) rounded towards +inf, so exact bounds stay bounds."""
    f = float(x)
    if isinstance(x, Fraction) and Fraction(f) < x:
        f = math.nextafter(f, math.inf)
    return f


def _require_core(M: ScaledMonoid, *elems) -> None:
    for a in elems:
        if not M.is_core(a):
            raise UsageError(f"{M.format(a)} is not a core element")


# -- fixed and absorbing sets -----------------------------------------------

def fixed_set(M: ScaledMonoid, a, b, n: int) -> frozenset:
    """Level-n classes [s] with [a s] = [b s]."""
    _require_core(M, a, b)
    classes = M.classes_at_level(n)
    if a == b:
        return frozenset(classes)
    return frozenset(c for c in classes if M.alpha_act(a, c) == M.alpha_act(b, c))


def absorbing_set(M: ScaledMonoid, a, b, n: int, search_depth: int = 2):
    """Level-n classes [s] with a s c = b s c for some core c.

    Returns (set, method) where method is "exact" or "lower-bound" (bounded
    search over core words of length <= search_depth).
    """
    _require_core(M, a, b)
    classes = M.classes_at_level(n)
    if a == b:
        return frozenset(classes), "exact"
    probe = M.closed_form_absorbing(a, b, classes[0]) if classes else None
    if probe is not None:
        return frozenset(c for c in classes if M.closed_form_absorbing(a, b, c)), "exact"
    if M.right_cancellative:
        return frozenset(), "exact"
    core = [c for c in elements_up_to(M, search_depth, M.core_samples())]
    out = set()
    for c in classes:
        s = M.class_rep(c)
        as_, bs_ = M.mul(a, s), M.mul(b, s)
        if any(M.mul(as_, d) == M.mul(bs_, d) for d in core):
            out.add(c)
    return frozenset(out), "lower-bound"


@dataclass
class FASets:
    a: object
    b: object
    n: int
    F: frozenset
    A: frozenset
    method: str = "exact"


def fa_sets(M: ScaledMonoid, a, b, n: int) -> FASets:
    A, method = absorbing_set(M, a, b, n)
    return FASets(a, b, n, fixed_set(M, a, b, n), A, method)


def hereditary_check(M: ScaledMonoid, a, b, m: int, n: int) -> list:
    """Violations of: [r] in F_{mn} => ancestor in F_m, and [s] in A_m => descendants in A_{mn}."""
    bad = []
    Fm, Fmn = fixed_set(M, a, b, m), fixed_set(M, a, b, m * n)
    Am, Amn = absorbing_set(M, a, b, m)[0], absorbing_set(M, a, b, m * n)[0]
    for r in Fmn:
        if M.ancestor(r, m) not in Fm:
            bad.append(("fixed", M.format_class(r)))
    for c in M.classes_at_level(m * n):
        if M.ancestor(c, m) in Am and c not in Amn:
            bad.append(("absorbing", M.format_class(c)))
    return bad


@dataclass
class RegularityReport:
    backend: str
    params: dict
    pair: tuple
    levels: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "backend": self.backend,
            "params": self.params,
            "pair": list(self.pair),
            "levels": [{"n": r["n"], "F": r["F"], "A": r["A"], "ratio": float(r["ratio"]),
                        "ratio_exact": str(r["ratio"]), "method": r["method"]} for r in self.levels],
            "verdicts": self.verdicts,
            "tolerances": self.tolerances,
        }


def regularity_series(M: ScaledMonoid, a, b, levels: list, tol: float = 1e-2,
                      beta=None, I=None, max_level: Optional[int] = None) -> RegularityReport:
    """|F_n|, |A_n| and |F_n \\ A_n| / n along ``levels`` with trend verdicts."""
    rows = []
    for n in levels:
        fa = fa_sets(M, a, b, n)
        diff = len(fa.F - fa.A)
        rows.append({"n": n, "F": len(fa.F), "A": len(fa.A), "ratio": Fraction(diff, n),
                     "method": fa.method})
    ratios = [r["ratio"] for r in rows]
    chain = [(x, y) for x, y in zip(rows, rows[1:]) if y["n"] % x["n"] == 0]
    verdicts = {
        "last_ratio": float(ratios[-1]) if ratios else None,
        "trend_to_zero": bool(ratios) and ratios[-1] <= tol,
        "non_increasing_on_chain": all(y["ratio"] <= x["ratio"] for x, y in chain),
    }
    if beta is not None and I is not None:
        sr = summable_regularity(M, a, b, beta, I, max_level or max(levels))
        verdicts["summable_value"] = sr["value"]
        verdicts["summable_tail_bound"] = sr["tail_bound"]
        verdicts["beta"] = float(beta)
    return RegularityReport(M.prefix, M.params(), (M.format(a), M.format(b)), rows, verdicts,
                            {"trend": tol})


# -- partition functions ----------------------------------------------------

@dataclass
class ZetaValue:
    value: object
    tail_bound: float
    mode: str
    terms: int = 0

    def as_dict(self) -> dict:
        return {"value": float(self.value), "exact": str(self.value) if isinstance(self.value, Fraction)
                else None, "tail_bound": float(self.tail_bound), "mode": self.mode, "terms": self.terms}


def monoid_levels(I, bound: int) -> list:
    """Elements of the multiplicative monoid generated by I, up to ``bound``, ascending."""
    out = {1}
    frontier = [1]
    while frontier:
        nxt = []
        for n in frontier:
            for p in I:
                v = n * p
                if v <= bound and v not in out:
                    out.add(v)
                    nxt.append(v)
        frontier = nxt
    return sorted(out)


def zeta_product(I, beta):
    """prod_{p in I} (1 - p^{1-beta})^{-1}; exact for integer beta."""
    out = Fraction(1) if not isinstance(_power(2, 1 - beta), float) else 1.0
    for p in I:
        x = _power(p, 1 - beta)
        if x >= 1:
            raise DivergenceError(f"zeta_I diverges at beta={beta} (need beta > 1)")
        out = out / (1 - x)
    return out


def zeta_partial(I, beta, bound: int):
    """sum of n^{1-beta} over n in <I>, n <= bound."""
    return sum((_power(n, 1 - beta) for n in monoid_levels(I, bound)), Fraction(0))


def zeta(I, beta, mode: str = "product", tol: float = 1e-6, max_level: Optional[int] = None) -> ZetaValue:
    """The restricted partition function zeta_I(beta) = sum_{n in <I>} n^{1-beta}.

    ``product``: the Euler product.  ``sum``: an explicit finite sum with a
    tail bound.  With ``max_level`` the sum runs over n <= max_level and the
    bound is the exact remainder against the product; without it the sum runs
    over the box v_p(n) <= K_p and the bound is assembled from per-prime
    geometric tails, with K_p raised until it is <= tol.
    """
    I = sorted(set(int(p) for p in I))
    if any(p < 2 for p in I):
        raise UsageError("irreducible scale values must be >= 2")
    if not I:
        return ZetaValue(Fraction(1), 0.0, mode)
    if float(beta) <= 1:
        raise DivergenceError(f"zeta_I diverges at beta={beta} (need beta > 1)")
    if mode == "product":
        return ZetaValue(zeta_product(I, beta), 0.0, mode, len(I))
    if mode not in ("sum", "truncated-sum"):
        raise UsageError(f"unknown zeta mode {mode!r}")
    if max_level is not None:
        part = zeta_partial(I, beta, max_level)
        full = zeta_product(I, beta)
        return ZetaValue(part, _up(full - part), "sum", len(monoid_levels(I, max_level)))
    xs = {p: float(p) ** (1 - float(beta)) for p in I}
    K = {p: 0 for p in I}

    def bound():
        # the complement of the box lies in the union over p of {v_p(n) > K_p}
        geo = {p: xs[p] ** (K[p] + 1) / (1 - xs[p]) for p in I}
        full = math.prod(1 / (1 - xs[p]) for p in I)
        return sum(geo[p] * full * (1 - xs[p]) for p in I), geo

    b, geo = bound()
    while b > tol:
        worst = max(I, key=lambda p: geo[p])
        K[worst] += 1
        b, geo = bound()
    total = 1.0
    terms = 1
    for p in I:
        s, x = 0.0, 1.0
        for _ in range(K[p] + 1):
            s += x
            x *= xs[p]
        total *= s
        terms *= K[p] + 1
    # float rounding of the finite sums and products, counted into the bound
    rounding = 4 * sys.float_info.epsilon * total * (sum(K.values()) + 2 * len(I))
    return ZetaValue(total, b + rounding, "sum", terms)


def beta_critical(M: ScaledMonoid) -> float:
    if not M.has_scale:
        raise NoScale(f"{M.prefix} has no generalised scale")
    return 2.0 if M.irreducible_kind == "all-primes" else 1.0


# -- traces on the core ------------------------------------------------------

class TraceSpec:
    """A normalised trace on the core subalgebra, evaluated on v_a v_b^* (a, b core)."""

    name = "trace"

    def __call__(self, M: ScaledMonoid, x):
        if x is ZERO:
            return Fraction(0)
        return self.evaluate(M, x.left, x.right)

    def evaluate(self, M: ScaledMonoid, a, b):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"trace": self.name}


class Dirac(TraceSpec):
    """tau_0(v_a v_b^*) = delta_{a,b}."""
    name = "dirac"

    def evaluate(self, M, a, b):
        x = normalize_pair(M, a, b)
        return Fraction(1) if x.left == x.right else Fraction(0)


class ConstantOne(TraceSpec):
    name = "one"

    def evaluate(self, M, a, b):
        return Fraction(1)


class CharacterZ(TraceSpec):
    """Traces through u^k for a singly generated core: tau(v_a v_b^*) = f(deg a - deg b).

    ``period=m`` gives f(k) = 1 if m | k else 0 (the average of the m-th roots
    of unity); ``angle=t`` gives f(k) = exp(i k t).
    """

    def __init__(self, period: Optional[int] = None, angle: Optional[float] = None):
        if (period is None) == (angle is None):
            raise UsageError("give exactly one of period, angle")
        self.period, self.angle = period, angle
        self.name = f"period({period})" if period is not None else f"angle({angle})"

    def of_power(self, k: int):
        if self.period is not None:
            return Fraction(1) if k % self.period == 0 else Fraction(0)
        return cmath.exp(1j * k * self.angle)

    def evaluate(self, M, a, b):
        return self.of_power(M.core_degree(a) - M.core_degree(b))

    def describe(self) -> dict:
        return {"trace": "character", "period": self.period, "angle": self.angle}


class TableTrace(TraceSpec):
    """f(deg a - deg b) looked up in a table (missing powers map to 0)."""
    name = "table"

    def __init__(self, table: dict):
        self.table = {int(k): v for k, v in table.items()}

    def evaluate(self, M, a, b):
        return self.table.get(M.core_degree(a) - M.core_degree(b), 0)


def trace_from_text(text: str) -> TraceSpec:
    text = text.strip()
    if text in ("dirac", "tau0", "haar"):
        return Dirac()
    if text in ("one", "constant"):
        return ConstantOne()
    if text.startswith("period:"):
        return CharacterZ(period=int(text.split(":")[1]))
    if text.startswith("angle:"):
        val = text.split(":")[1]
        if "/" in val:
            num, den = val.split("/")
            ang = eval_angle(num) / float(den)
        else:
            ang = eval_angle(val)
        return CharacterZ(angle=ang)
    raise UsageError(f"unknown trace {text!r} (dirac | one | period:m | angle:x)")


def eval_angle(text: str) -> float:
    text = text.strip().replace("pi", "*pi").lstrip("*")
    if text.startswith("*"):
        text = text[1:]
    total = 1.0
    for tok in filter(None, text.split("*")):
        total *= math.pi if tok == "pi" else float(tok)
    return total


# -- states ------------------------------------------------------------------

def ground_state_eval(M: ScaledMonoid, rho: TraceSpec, x):
    """psi_rho(x) = rho(E(x))."""
    return rho(M, expectation(M, x))


def chi(M: ScaledMonoid, tau: TraceSpec, r, x):
    """chi_{tau, r}(x) = tau(E(v_r^* x v_r))."""
    return tau(M, expectation(M, compress(M, r, x)))


def psi_level(M: ScaledMonoid, tau: TraceSpec, n: int, x):
    """psi_{tau, n}(x): the average of chi_{tau, s} over the level-n classes."""
    total = 0
    for c in M.classes_at_level(n):
        total = total + chi(M, tau, M.class_rep(c), x)
    return total / n if not isinstance(total, int) else Fraction(total, n)


@dataclass
class StateValue:
    value: object
    tail_bound: float
    levels: list
    mode: str

    def as_dict(self) -> dict:
        v = self.value
        out = {"tail_bound": float(self.tail_bound), "levels": self.levels, "mode": self.mode}
        if isinstance(v, complex):
            out["value"] = [v.real, v.imag]
        else:
            out["value"] = float(v)
            if isinstance(v, Fraction):
                out["exact"] = str(v)
        return out


def finite_type_state_eval(M: ScaledMonoid, tau: TraceSpec, beta, x, I=None,
                           max_level: int = 64, normalize: str = "partial",
                           chain: Optional[list] = None) -> StateValue:
    """psi_{beta, tau, I}(x) = zeta_I(beta)^{-1} sum_n n^{1-beta} psi_{tau, n}(x), truncated at max_level.

    normalize="partial" divides by the truncated sum of the weights, so the
    result is itself a convex combination of states; the reported tail bound
    is twice the omitted weight.  normalize="zeta" divides by the Euler
    product.  For beta = 1 the level-limit psi_{tau, n} is evaluated at the
    last level of ``chain`` (default: the largest attained level <= max_level
    along powers of the least irreducible).
    """
    if I is None:
        I = M.irreducibles(max_level)
    if float(beta) == 1:
        if chain is None:
            p = min(I)
            chain = [p ** k for k in range(0, int(math.log(max_level, p) + 1e-9) + 1)]
        n = chain[-1]
        return StateValue(psi_level(M, tau, n, x), float("nan"), [n], "level-limit")
    if float(beta) < 1:
        raise DivergenceError("finite-type states need beta >= 1")
    levels = monoid_levels(I, max_level)
    num, den = 0, 0
    for n in levels:
        w = _power(n, -beta)
        s = 0
        for c in M.classes_at_level(n):
            s = s + chi(M, tau, M.class_rep(c), x)
        num = num + w * s
        den = den + w * n
    full = zeta_product(I, beta)
    omitted = _up(1 - den / full)
    if normalize == "partial":
        return StateValue(num / den, 2 * omitted, levels, "partial")
    return StateValue(num / full, omitted, levels, "zeta")


def psi1_value(M: ScaledMonoid, a, b, chain: list) -> dict:
    """|A_n^{a,b}| / n along a divisibility chain; the last value approximates psi_1(v_a v_b^*)."""
    vals = [Fraction(len(absorbing_set(M, a, b, n)[0]), n) for n in chain]
    deltas = [y - x for x, y in zip(vals, vals[1:])]
    return {"value": vals[-1], "values": vals, "deltas": deltas,
            "monotone": all(d >= 0 for d in deltas), "level": chain[-1]}


def psi_beta_value(M: ScaledMonoid, a, b, beta, I, max_level: int) -> dict:
    """zeta_I(beta)^{-1} sum_{n in <I>, n <= max_level} n^{-beta} |A_n^{a,b}|, with tail bound."""
    if float(beta) <= 1:
        raise DivergenceError("psi_beta_value needs beta > 1; use psi1_value at beta = 1")
    full = zeta_product(I, beta)
    num, part = 0, 0
    for n in monoid_levels(I, max_level):
        A = absorbing_set(M, a, b, n)[0]
        num = num + _power(n, -beta) * len(A)
        part = part + _power(n, 1 - beta)
    return {"value": num / full if num else Fraction(0), "tail_bound": _up((full - part) / full),
            "zeta": full}


def summable_regularity(M: ScaledMonoid, a, b, beta, I, max_level: int) -> dict:
    """zeta_I(beta)^{-1} sum_{n in <I>, n <= max_level} n^{-beta} |F_n \\ A_n|.

    When |F_n \\ A_n| <= C on every computed level, also reports the bound
    C zeta_I(beta + 1) / zeta_I(beta) that a uniform bound would give.
    """
    full = zeta_product(I, beta)
    num, part, worst = 0, 0, 0
    for n in monoid_levels(I, max_level):
        fa = fa_sets(M, a, b, n)
        d = len(fa.F - fa.A)
        worst = max(worst, d)
        num = num + _power(n, -beta) * d
        part = part + _power(n, 1 - beta)
    out = {"value": float(num / full), "tail_bound": _up((full - part) / full),
           "max_defect": worst, "zeta": float(full)}
    out["uniform_bound"] = float(worst * zeta_product(I, beta + 1) / full)
    return out


# -- residual suites ---------------------------------------------------------

def core_witness(M: ScaledMonoid, s, t):
    """Core a, b with s a = t b, or None when s and t are not core equivalent."""
    if M.class_of(s) != M.class_of(t):
        return None
    res = M.right_lcm(s, t)
    if isinstance(res, NonPrincipal):
        for g in res.generators:
            if M.scale(g) == M.scale(s):
                return M.left_divide(s, g), M.left_divide(t, g)
        return None
    if not res.is_meet:
        return None
    return res.s_comp, res.t_comp


def kms_residual(M: ScaledMonoid, phi: Callable, beta, samples, pads=None,
                 stats: Optional[dict] = None) -> float:
    """max |phi(v_s v_t^*) - N_s^{-beta} phi(v_b v_a^*)| over samples (s, t), where s a = t b.

    Each witness (a, b) is also padded on the right by the core elements in
    ``pads`` ((a c, b c) is again a witness), which exercises independence of
    the witness.  For s not equivalent to t the residual is |phi(v_s v_t^*)|.
    With ``stats`` given, samples whose evaluation needs a product the
    monomial calculus does not define are skipped and counted there.
    """
    pads = [M.identity] + list(pads or [])
    worst = 0.0
    for s, t in samples:
        try:
            val = phi(normalize_pair(M, s, t))
            w = core_witness(M, s, t)
            if w is None:
                worst = max(worst, abs(val))
                continue
            a, b = w
            for c in pads:
                exp = _power(M.scale(s), -beta) * phi(normalize_pair(M, M.mul(b, c), M.mul(a, c)))
                worst = max(worst, abs(val - exp))
        except NotRightLcm:
            if stats is None:
                raise
            stats["skipped"] = stats.get("skipped", 0) + 1
    return float(worst)


def reconstruction_residual(M: ScaledMonoid, phi: Callable, n: int, samples,
                            stats: Optional[dict] = None) -> float:
    """max |phi(y) - n^{-1} sum_{[s] at level n} phi(v_s^* y v_s)| over monomials y."""
    reps = [M.class_rep(c) for c in M.classes_at_level(n)]
    worst = 0.0
    for y in samples:
        try:
            rhs = sum((phi(compress(M, s, y)) for s in reps), Fraction(0)) / n
            worst = max(worst, abs(phi(y) - rhs))
        except NotRightLcm:
            if stats is None:
                raise
            stats["skipped"] = stats.get("skipped", 0) + 1
    return float(worst)


def trace_fixed_point_residual(M: ScaledMonoid, tau: TraceSpec, beta, samples, I=None,
                               max_level: int = 256) -> dict:
    """max |psi_{beta, tau}(x) - tau(x)| over core monomials x."""
    worst, tail = 0.0, 0.0
    for x in samples:
        sv = finite_type_state_eval(M, tau, beta, x, I, max_level)
        tail = sv.tail_bound
        worst = max(worst, abs(sv.value - tau(M, x)))
    return {"residual": float(worst), "tail_bound": tail}


def state_evaluator(M: ScaledMonoid, tau: TraceSpec, beta, I=None, max_level: int = 64,
                    chain: Optional[list] = None) -> Callable:
    """x -> finite_type_state_eval(...).value, cached."""
    cache: dict = {}

    def phi(x):
        if x is ZERO:
            return Fraction(0)
        if x not in cache:
            cache[x] = finite_type_state_eval(M, tau, beta, x, I, max_level, chain=chain).value
        return cache[x]

    return phi


def derived_evaluator(M: ScaledMonoid, core_value: Callable, beta) -> Callable:
    """Extend values on core monomials to all monomials by the algebraic KMS relation.

    ``core_value(b, a)`` should return phi(v_b v_a^*) for core b, a.
    """
    def phi(x):
        if x is ZERO:
            return Fraction(0)
        w = core_witness(M, x.left, x.right)
        if w is None:
            return Fraction(0)
        a, b = w
        return _power(M.scale(x.left), -beta) * core_value(b, a)

    return phi
