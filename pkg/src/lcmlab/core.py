"""Scaled right LCM monoids: the backend interface, the monomial calculus of
the semigroup C*-algebra, the conditional expectation onto the core, and a
brute-force right-LCM oracle used to validate backends.

A backend is an instance of :class:`ScaledMonoid`.  Elements are immutable,
hashable values owned by the backend; all generic algorithms go through the
backend's methods.

>>> from lcmlab.zoo import AffineMonoid
>>> M = AffineMonoid()
>>> M.right_lcm(M.elem(0, 2), M.elem(1, 3)).r
(4, 6)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Hashable, Iterable, Iterator, Optional


class LcmlabError(Exception):
    """Base class for errors raised by this package."""


class UsageError(LcmlabError):
    pass


class UnknownWithBound(LcmlabError):
    """A bounded search ran out before deciding; carries the bound used."""

    def __init__(self, what: str, bound: int):
        super().__init__(f"{what}: undecided after {bound} steps")
        self.bound = bound


class LevelNotAttained(LcmlabError):
    pass


class NoScale(LcmlabError):
    pass


class DivergenceError(LcmlabError):
    pass


class InvalidSpec(LcmlabError):
    pass


class NotRightLcm(LcmlabError):
    """sS and tS meet in a union of several principal right ideals."""

    def __init__(self, generators):
        super().__init__(f"intersection is not principal; minimal generators {generators}")
        self.generators = generators


@dataclass(frozen=True, order=True)
class ClassId:
    """A core-equivalence class at scale level ``level``; ``key`` is canonical."""
    level: int
    key: Any


@dataclass(frozen=True)
class Disjoint:
    """No common right multiple (or none found, when ``depth`` is set)."""
    depth: Optional[int] = None

    @property
    def is_meet(self) -> bool:
        return False

    @property
    def has_common(self) -> bool:
        return False


@dataclass(frozen=True)
class NonPrincipal:
    """Common right multiples exist but have no least one: sS and tS meet in
    the union of the principal ideals of ``generators`` (pairwise incomparable)."""
    generators: tuple
    depth: Optional[int] = None

    @property
    def is_meet(self) -> bool:
        return False

    @property
    def has_common(self) -> bool:
        return True


@dataclass(frozen=True)
class Meet:
    r: Any
    s_comp: Any
    t_comp: Any

    @property
    def is_meet(self) -> bool:
        return True

    @property
    def has_common(self) -> bool:
        return True


@dataclass(frozen=True)
class Pair:
    """The spanning monomial v_left v_right^*."""
    left: Any
    right: Any


class _Zero:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "ZERO"

    def __reduce__(self):
        return (_Zero, ())


ZERO = _Zero()


@dataclass
class Report:
    """Outcome of a check suite: ``ok`` plus witnesses for every failure."""
    name: str
    ok: bool = True
    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def fail(self, check: str, **witness) -> None:
        self.ok = False
        self.failures.append({"check": check, **{k: str(v) for k, v in witness.items()}})

    def count(self, check: str, n: int = 1) -> None:
        self.checks[check] = self.checks.get(check, 0) + n

    def merge(self, other: "Report") -> None:
        self.ok = self.ok and other.ok
        for k, v in other.checks.items():
            self.count(f"{other.name}.{k}", v)
        self.failures.extend({"suite": other.name, **f} for f in other.failures)

    def as_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "checks": dict(sorted(self.checks.items())),
                "failures": self.failures}


class ScaledMonoid:
    """Interface for a right LCM monoid with a generalised scale.

    Subclasses provide the arithmetic; the defaults here derive the rest.
    ``irreducible_kind`` is "finite" when N(S) is generated by finitely many
    integers and "all-primes" when it is all of the positive integers.
    ``absorbing_rule`` is one of "cancellative", "closed-form", "restriction"
    or "bounded-search".
    """

    prefix = "?"
    right_cancellative = False
    absorbing_rule = "bounded-search"
    irreducible_kind = "finite"
    has_units = False
    has_scale = True

    identity: Hashable

    # -- arithmetic ---------------------------------------------------------
    def mul(self, s, t):
        raise NotImplementedError

    def left_divide(self, s, r):
        """The unique t with s*t = r, or None."""
        raise NotImplementedError

    def divides(self, s, r) -> bool:
        """Whether s left-divides r."""
        return self.left_divide(s, r) is not None

    def right_lcm(self, s, t):
        raise NotImplementedError

    def is_core(self, s) -> bool:
        return self.scale(s) == 1

    def scale(self, s) -> int:
        raise NotImplementedError

    def unit_canonical(self, s):
        """Canonical representative of s*S^x (s itself when S has no units)."""
        return s

    def inverse_unit(self, u):
        raise UsageError("backend has no units")

    # -- classes ------------------------------------------------------------
    def class_of(self, s) -> ClassId:
        raise NotImplementedError

    def class_keys(self, n: int) -> Iterable:
        raise NotImplementedError

    def classes_at_level(self, n: int) -> list:
        self.check_level(n)
        return sorted(ClassId(n, k) for k in self.class_keys(n))

    def class_rep(self, c: ClassId):
        raise NotImplementedError

    def ancestor(self, c: ClassId, m: int) -> ClassId:
        """The level-m class [s] with [s] <= c, for m dividing c.level."""
        raise NotImplementedError

    def alpha_act(self, a, c: ClassId) -> ClassId:
        if not self.is_core(a):
            raise UsageError(f"{self.format(a)} is not a core element")
        return self.class_of(self.mul(a, self.class_rep(c)))

    def closed_form_absorbing(self, a, b, c: ClassId) -> Optional[bool]:
        """Exact absorption test where the backend has one, else None."""
        return None

    # -- levels -------------------------------------------------------------
    def irreducibles(self, bound: int) -> list:
        """Irreducible scale values up to ``bound``."""
        raise NotImplementedError

    def is_level(self, n: int) -> bool:
        if n < 1:
            return False
        for p in self.irreducibles(n):
            while n % p == 0:
                n //= p
        return n == 1

    def check_level(self, n: int) -> None:
        if not self.has_scale:
            raise NoScale(f"{self.prefix} has no generalised scale")
        if not isinstance(n, int) or not self.is_level(n):
            raise LevelNotAttained(f"level {n} is not attained by {self.prefix}")

    def levels(self, bound: int) -> list:
        """All attained levels n <= bound, ascending."""
        out = {1}
        irr = self.irreducibles(bound)
        frontier = [1]
        while frontier:
            nxt = []
            for n in frontier:
                for p in irr:
                    v = n * p
                    if v <= bound and v not in out:
                        out.add(v)
                        nxt.append(v)
            frontier = nxt
        return sorted(out)

    # -- sampling and serialisation ----------------------------------------
    def generators(self) -> list:
        raise NotImplementedError

    def core_samples(self) -> list:
        """A few core elements used by the bounded-search fallbacks and tests."""
        return [g for g in self.generators() if self.is_core(g)]

    def sort_key(self, s):
        return (self.scale(s), self.format(s))

    def format(self, s) -> str:
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    def format_class(self, c: ClassId) -> str:
        return f"{self.prefix}#{c.level}:{_key_text(c.key)}"

    def parse_class(self, text: str) -> ClassId:
        head, _, body = text.partition("#")
        if head != self.prefix:
            raise UsageError(f"class {text!r} does not belong to {self.prefix}")
        lvl, _, key = body.partition(":")
        return ClassId(int(lvl), _parse_key(key))

    def params(self) -> dict:
        return {}

    def core_degree(self, a) -> int:
        """Degree of a core element when the core is a copy of N (for character traces)."""
        raise UsageError(f"{self.prefix}: core is not singly generated")

    def check(self, *elems) -> None:
        return None


def _key_text(key) -> str:
    import json
    return json.dumps(key, separators=(",", ":"))


def _parse_key(text: str):
    import json

    def tup(x):
        return tuple(tup(y) for y in x) if isinstance(x, list) else x

    return tup(json.loads(text))


# -- monomial calculus ------------------------------------------------------

def normalize_pair(M: ScaledMonoid, s, t) -> Pair:
    """Canonical form of v_s v_t^*, absorbing units: (s u, t u) ~ (s, t)."""
    if M.has_units:
        s2 = M.unit_canonical(s)
        if s2 != s:
            u = M.left_divide(s, s2)
            t = M.mul(t, u)
            s = s2
    return Pair(s, t)


def monomial(M: ScaledMonoid, s, t=None):
    return normalize_pair(M, s, M.identity if t is None else t)


def adjoint(M: ScaledMonoid, x):
    if x is ZERO:
        return ZERO
    return normalize_pair(M, x.right, x.left)


def monomial_mul(M: ScaledMonoid, x, y):
    """(v_s v_t^*)(v_u v_w^*) = v_{s t'} v_{w u'}^* where t t' = u u' is the right LCM."""
    if x is ZERO or y is ZERO:
        return ZERO
    res = M.right_lcm(x.right, y.left)
    if isinstance(res, NonPrincipal):
        raise NotRightLcm(res.generators)
    if not res.is_meet:
        return ZERO
    return normalize_pair(M, M.mul(x.left, res.s_comp), M.mul(y.right, res.t_comp))


def monomial_prod(M: ScaledMonoid, *xs):
    out = Pair(M.identity, M.identity)
    for x in xs:
        out = monomial_mul(M, out, x)
    return out


def is_core_monomial(M: ScaledMonoid, x) -> bool:
    return x is not ZERO and M.is_core(x.left) and M.is_core(x.right)


def expectation(M: ScaledMonoid, x):
    """Conditional expectation onto the core subalgebra."""
    return x if is_core_monomial(M, x) else ZERO


def compress(M: ScaledMonoid, r, x):
    """v_r^* x v_r."""
    return monomial_prod(M, Pair(M.identity, r), x, Pair(r, M.identity))


# -- brute-force oracle -----------------------------------------------------

def words(gens: list, max_len: int) -> Iterator[tuple]:
    for n in range(max_len + 1):
        yield from product(range(len(gens)), repeat=n)


def elements_up_to(M: ScaledMonoid, depth: int, gens: Optional[list] = None) -> list:
    """Distinct elements given by generator words of length <= depth (BFS order)."""
    gens = M.generators() if gens is None else gens
    seen = {M.identity: 0}
    frontier = [M.identity]
    for d in range(1, depth + 1):
        nxt = []
        for s in frontier:
            for g in gens:
                v = M.mul(s, g)
                if v not in seen:
                    seen[v] = d
                    nxt.append(v)
        frontier = nxt
    return list(seen)


def right_multiples(M: ScaledMonoid, s, depth: int, gens: Optional[list] = None) -> set:
    gens = M.generators() if gens is None else gens
    seen = {s}
    frontier = [s]
    for _ in range(depth):
        nxt = []
        for x in frontier:
            for g in gens:
                v = M.mul(x, g)
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return seen


def minimal_elements(M: ScaledMonoid, common: set) -> list:
    """Elements of ``common`` (up to units) with no proper left divisor in ``common``."""
    order = sorted({M.unit_canonical(x) for x in common}, key=M.sort_key)
    out = []
    for c in order:
        if not any(M.divides(x, c) for x in out):
            out.append(c)
    return out


def oracle_right_lcm(M: ScaledMonoid, s, t, depth: int, gens: Optional[list] = None,
                     _cache: Optional[dict] = None):
    """Right LCM by intersecting {s w} and {t w} over generator words w, |w| <= depth.

    The result is depth-qualified: Disjoint(depth) when nothing was found, and
    NonPrincipal(..., depth) when the found common multiples have several
    minimal elements.
    """
    if depth < 1:
        raise UsageError("oracle depth must be >= 1")

    def mults(x):
        if _cache is None:
            return right_multiples(M, x, depth, gens)
        if x not in _cache:
            _cache[x] = right_multiples(M, x, depth, gens)
        return _cache[x]

    common = mults(s) & mults(t)
    if not common:
        return Disjoint(depth)
    mins = minimal_elements(M, common)
    if len(mins) > 1:
        return NonPrincipal(tuple(mins), depth)
    r = mins[0]
    return Meet(r, M.left_divide(s, r), M.left_divide(t, r))


def check_meet(M: ScaledMonoid, s, t, res) -> bool:
    if isinstance(res, NonPrincipal):
        return all(M.divides(s, g) and M.divides(t, g) for g in res.generators)
    return (not res.is_meet) or (M.mul(s, res.s_comp) == res.r and M.mul(t, res.t_comp) == res.r)


def compare_lcm_with_oracle(M: ScaledMonoid, s, t, depth: int, gens=None, cache=None,
                            report: Optional[Report] = None) -> Report:
    """Backend right_lcm against the oracle at ``depth``.

    Disjoint must match Disjoint-at-depth.  A Meet must verify by
    multiplication, left-divide every common multiple the oracle found, and is
    then the oracle's minimum whenever the oracle reached it.  A NonPrincipal
    answer must cover every common multiple found, and its generators must be
    exactly the oracle's minimal elements once the oracle has reached them all.
    """
    rep = report if report is not None else Report("lcm-oracle")
    ours = M.right_lcm(s, t)
    rep.count("pairs")
    if not check_meet(M, s, t, ours):
        rep.fail("meet-verification", s=M.format(s), t=M.format(t))
        return rep
    if cache is None:
        cache = {}
    for x in (s, t):
        if x not in cache:
            cache[x] = right_multiples(M, x, depth, gens)
    common = cache[s] & cache[t]
    if not ours.has_common:
        if common:
            rep.fail("disjoint-but-oracle-meets", s=M.format(s), t=M.format(t))
        return rep
    if not common:
        rep.count("meet-beyond-depth")
        return rep
    gens_ = (ours.r,) if ours.is_meet else ours.generators
    bad = [x for x in common if not any(M.divides(g, x) for g in gens_)]
    if bad:
        rep.fail("not-minimal", s=M.format(s), t=M.format(t),
                 r=" ".join(M.format(g) for g in gens_), witness=M.format(bad[0]))
        return rep
    if all(any(M.divides(x, g) for x in common) for g in gens_):
        rep.count("exact-agreement" if ours.is_meet else "non-principal-agreement")
    return rep


def verify_scale_axioms(M: ScaledMonoid, n: int, sample_depth: int) -> Report:
    """Class count, pairwise disjoint transversal, and the foundation-set cover."""
    rep = Report(f"scale-axioms@{n}")
    classes = M.classes_at_level(n)
    if len(classes) != n:
        rep.fail("class-count", level=n, found=len(classes))
    reps = [M.class_rep(c) for c in classes]
    for c, r in zip(classes, reps):
        if M.class_of(r) != c or M.scale(r) != n:
            rep.fail("representative", cls=M.format_class(c), rep=M.format(r))
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            rep.count("disjoint-pairs")
            if M.right_lcm(reps[i], reps[j]).has_common:
                rep.fail("not-disjoint", s=M.format(reps[i]), t=M.format(reps[j]))
    for s in elements_up_to(M, sample_depth):
        rep.count("cover-samples")
        if not any(M.right_lcm(s, r).has_common for r in reps):
            rep.fail("not-covered", s=M.format(s))
    return rep
