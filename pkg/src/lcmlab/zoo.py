"""Further scaled right LCM monoids: Z x| Z^x, N x| N^x, the shadowed naturals
S_m, the shift-space monoid, and the Zappa-Szep product X* |><| G of a
self-similar action.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import gcd

from sympy import factorint, primerange

from .core import (ClassId, Disjoint, Meet, NonPrincipal, Report, ScaledMonoid, UsageError,
                   compare_lcm_with_oracle, elements_up_to, verify_scale_axioms)
from .selfsim import SelfSimilarAction, act_word


def _crt(h1: int, p1: int, h2: int, p2: int):
    """Smallest h >= 0 with h = h1 mod p1 and h = h2 mod p2, and lcm(p1, p2); None if unsolvable."""
    g = gcd(p1, p2)
    if (h2 - h1) % g:
        return None
    L = p1 // g * p2
    # h = h1 + p1 * x with p1 x = h2 - h1 (mod p2)
    x = ((h2 - h1) // g) * pow(p1 // g, -1, p2 // g) % (p2 // g) if p2 // g > 1 else 0
    return (h1 + p1 * x) % L, L


def _pair(text: str):
    m = re.fullmatch(r"\s*\(?\s*(-?\d+)\s*,\s*(-?\d+)\s*\)?\s*", text)
    if not m:
        raise UsageError(f"expected (h,p), got {text!r}")
    return int(m.group(1)), int(m.group(2))


# -- Z x| Z^x and N x| N^x ---------------------------------------------------

class AffineMonoid(ScaledMonoid):
    """Pairs (h, p) with (h1, p1)(h2, p2) = (h1 + p1 h2, p1 p2).

    ``natural=False`` gives Z x| Z^x (h in Z, p nonzero), ``natural=True``
    gives N x| N^x (h >= 0, p >= 1).  Classes are (|p|, h mod |p|).
    """

    right_cancellative = True
    absorbing_rule = "cancellative"
    irreducible_kind = "all-primes"

    def __init__(self, natural: bool = False):
        self.natural = natural
        self.has_units = not natural
        self.prefix = "nn" if natural else "zz"
        self.identity = (0, 1)

    def elem(self, h: int, p: int):
        h, p = int(h), int(p)
        if p == 0 or (self.natural and (h < 0 or p < 1)):
            raise UsageError(f"({h},{p}) is not an element of {self.prefix}")
        return (h, p)

    def check(self, *elems):
        for e in elems:
            if not (isinstance(e, tuple) and len(e) == 2 and e[1] != 0):
                raise UsageError(f"{e!r} is not an element of {self.prefix}")

    def mul(self, s, t):
        return (s[0] + s[1] * t[0], s[1] * t[1])

    def left_divide(self, s, r):
        h, p = r
        if p % s[1] or (h - s[0]) % s[1]:
            return None
        t = ((h - s[0]) // s[1], p // s[1])
        if self.natural and (t[0] < 0 or t[1] < 1):
            return None
        return t

    def right_lcm(self, s, t):
        p1, p2 = abs(s[1]), abs(t[1])
        sol = _crt(s[0] % p1, p1, t[0] % p2, p2)
        if sol is None:
            return Disjoint()
        h, L = sol
        if self.natural:
            lo = max(s[0], t[0])
            if h < lo:
                h += -(-(lo - h) // L) * L
        r = (h, L)
        return Meet(r, self.left_divide(s, r), self.left_divide(t, r))

    def is_core(self, s) -> bool:
        return abs(s[1]) == 1

    def scale(self, s) -> int:
        return abs(s[1])

    def unit_canonical(self, s):
        if self.natural:
            return s
        p = abs(s[1])
        return (s[0] % p, p)

    def inverse_unit(self, u):
        if abs(u[1]) != 1 or self.natural:
            raise UsageError(f"{u} is not a unit")
        return (-u[0] * u[1], u[1])

    def class_of(self, s) -> ClassId:
        p = abs(s[1])
        return ClassId(p, s[0] % p)

    def class_keys(self, n: int):
        return range(n)

    def class_rep(self, c: ClassId):
        return (c.key, c.level)

    def ancestor(self, c: ClassId, m: int) -> ClassId:
        return ClassId(m, c.key % m)

    def irreducibles(self, bound: int) -> list:
        return list(primerange(2, bound + 1))

    def is_level(self, n: int) -> bool:
        return n >= 1

    def levels(self, bound: int) -> list:
        return list(range(1, bound + 1))

    def generators(self) -> list:
        if self.natural:
            return [(1, 1), (0, 2), (0, 3)]
        return [(1, 1), (0, -1), (0, 2), (0, 3)]

    def core_samples(self) -> list:
        if self.natural:
            return [(1, 1), (2, 1), (3, 1)]
        return [(1, 1), (-1, 1), (0, -1), (1, -1), (2, -1)]

    def core_degree(self, a) -> int:
        if not self.natural or a[1] != 1:
            raise UsageError("character traces need the core N of N x| N^x")
        return a[0]

    def sort_key(self, s):
        return (abs(s[1]), s[1] < 0, abs(s[0]), s[0] < 0)

    def format(self, s) -> str:
        return f"{self.prefix}:({s[0]},{s[1]})"

    def parse(self, text: str):
        text = text.strip()
        if text in ("id", "1"):
            return self.identity
        if text.startswith(self.prefix + ":"):
            text = text[len(self.prefix) + 1:]
        elif ":" in text:
            raise UsageError(f"{text!r} is not an element of {self.prefix}")
        return self.elem(*_pair(text))


# -- shadowed naturals ------------------------------------------------------

@dataclass(frozen=True)
class ShadowedElem:
    m: int
    i: int
    j: int
    k: int


class ShadowedMonoid(ScaledMonoid):
    """S_m = <a, b, c | ab = b^2, ca = a^m c, cb = b^m c>+ with normal form b^i a^j c^k."""

    right_cancellative = False
    absorbing_rule = "closed-form"
    irreducible_kind = "finite"

    def __init__(self, m: int = 2):
        if m < 2:
            raise UsageError("shadowed naturals need m > 1")
        self.m = m
        self.prefix = f"sh({m})"
        self.identity = ShadowedElem(m, 0, 0, 0)
        self.a = ShadowedElem(m, 0, 1, 0)
        self.b = ShadowedElem(m, 1, 0, 0)
        self.c = ShadowedElem(m, 0, 0, 1)

    def params(self) -> dict:
        return {"m": self.m}

    def elem(self, i: int, j: int, k: int) -> ShadowedElem:
        if min(i, j, k) < 0:
            raise UsageError("shadowed exponents are non-negative")
        return ShadowedElem(self.m, int(i), int(j), int(k))

    def check(self, *elems):
        for e in elems:
            if not isinstance(e, ShadowedElem) or e.m != self.m:
                raise UsageError(f"{e!r} is not an element of {self.prefix}")

    def mul(self, s, t):
        self.check(s, t)
        M = self.m ** s.k
        if t.i > 0:
            return ShadowedElem(self.m, s.i + s.j + t.i * M, t.j * M, s.k + t.k)
        return ShadowedElem(self.m, s.i, s.j + t.j * M, s.k + t.k)

    def left_divide(self, s, r):
        self.check(s, r)
        if r.k < s.k:
            return None
        M = self.m ** s.k
        if r.i == s.i and r.j >= s.j and (r.j - s.j) % M == 0:
            return ShadowedElem(self.m, 0, (r.j - s.j) // M, r.k - s.k)
        if r.i > s.i + s.j and (r.i - s.i - s.j) % M == 0 and r.j % M == 0:
            return ShadowedElem(self.m, (r.i - s.i - s.j) // M, r.j // M, r.k - s.k)
        return None

    def right_lcm(self, s, t):
        """At c-power max(k_s, k_t) the core parts of sS and tS are unions of
        'columns' (a fixed power of b).  Their intersection is the union of at
        most four pieces, each the principal ideal of its least point.  The
        union is principal exactly when one least point divides the others;
        otherwise the incomparable generators come back as NonPrincipal.

        For example a S and c S meet in a^2 c S and b^2 c S.
        """
        self.check(s, t)
        x, y = (s, t) if s.k <= t.k else (t, s)
        M, N = self.m ** x.k, self.m ** y.k
        i1, j1, i2, j2 = x.i, x.j, y.i, y.j
        cands = []
        if i1 == i2 and (j1 - j2) % M == 0:
            cands.append((i1, j2 + N * max(0, -(-(j1 - j2) // N))))
        if i2 > i1 + j1 and (i2 - i1 - j1) % M == 0 and j2 % M == 0:
            cands.append((i2, j2))
        if i1 > i2 + j2 and (i1 - i2 - j2) % N == 0 and j1 % M == 0:
            cands.append((i1, -(-j1 // N) * N))
        if (i1 + j1 - i2 - j2) % M == 0:
            base = i2 + j2
            v = max(1, (i1 + j1 - base) // N + 1)
            cands.append((base + N * v, 0))
        if not cands:
            return Disjoint()
        pts = sorted({ShadowedElem(self.m, p, q, y.k) for p, q in cands}, key=self.sort_key)
        mins = [r for r in pts
                if not any(o != r and self.left_divide(o, r) is not None for o in pts)]
        if len(mins) > 1:
            return NonPrincipal(tuple(mins))
        r = mins[0]
        return Meet(r, self.left_divide(s, r), self.left_divide(t, r))

    def is_core(self, s) -> bool:
        self.check(s)
        return s.k == 0

    def scale(self, s) -> int:
        self.check(s)
        return self.m ** s.k

    def total(self, s) -> int:
        return s.i + s.j

    def class_of(self, s) -> ClassId:
        n = self.scale(s)
        return ClassId(n, (s.k, (s.i + s.j) % n))

    def _k(self, n: int) -> int:
        self.check_level(n)
        k = 0
        while n > 1:
            n //= self.m
            k += 1
        return k

    def class_keys(self, n: int):
        k = self._k(n)
        return ((k, r) for r in range(n))

    def class_rep(self, c: ClassId):
        k, r = c.key
        return ShadowedElem(self.m, r, 0, k)

    def ancestor(self, c: ClassId, m: int) -> ClassId:
        return ClassId(m, (self._k(m), c.key[1] % m))

    def closed_form_absorbing(self, a, b, c: ClassId):
        # a s b depends only on the total of a, and totals are additive, so
        # absorption happens iff the totals agree (witness: multiply by b).
        return a == b or self.total(a) == self.total(b)

    def irreducibles(self, bound: int) -> list:
        return [self.m] if self.m <= bound else []

    def generators(self) -> list:
        return [self.a, self.b, self.c]

    def core_samples(self) -> list:
        return [self.a, self.b, self.elem(1, 1, 0), self.elem(0, 2, 0), self.elem(2, 0, 0)]

    def sort_key(self, s):
        return (s.k, s.i, s.j)

    def format(self, s) -> str:
        return f"{self.prefix}:{s.i}.{s.j}.{s.k}"

    def parse(self, text: str):
        text = text.strip()
        if text in ("id", "1"):
            return self.identity
        if text.startswith(self.prefix + ":"):
            i, j, k = (int(v) for v in text[len(self.prefix) + 1:].split("."))
            return self.elem(i, j, k)
        out = self.identity
        for tok in re.findall(r"([abc])(?:\^(\d+))?", text):
            g = {"a": self.a, "b": self.b, "c": self.c}[tok[0]]
            for _ in range(int(tok[1] or 1)):
                out = self.mul(out, g)
        return out


# -- shift space ------------------------------------------------------------

@lru_cache(maxsize=4096)
def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class ShiftElem:
    """(g, (n, z)); g is a sorted tuple of ((p, index), value) with nonzero values."""
    g: tuple
    n: int
    z: int


class ShiftSpaceMonoid(ScaledMonoid):
    """G x| (N^x x Z) for G the direct sum over primes p <= pmax of copies of Z/p.

    N^x shifts each p-block by v_p(n) places; Z acts by the Frobenius f_q,
    read additively as multiplication by q on Z/p for p != q and the identity
    on the q-block.
    """

    right_cancellative = True
    absorbing_rule = "cancellative"
    irreducible_kind = "all-primes"
    has_units = True

    def __init__(self, q: int = 2, pmax: int = 7):
        self.q = q
        self.pmax = pmax
        self.primes = list(primerange(2, pmax + 1))
        if q not in self.primes:
            raise UsageError("q must be a prime <= pmax")
        self.prefix = f"ss({q},{pmax})"
        self.identity = ShiftElem((), 1, 0)

    def _gmap(self, g) -> dict:
        return dict(g)

    def _freeze(self, d: dict) -> tuple:
        return tuple(sorted((k, v) for k, v in d.items() if v))

    def group_elem(self, mapping: dict) -> tuple:
        out = {}
        for (p, idx), v in mapping.items():
            if p not in self.primes:
                raise UsageError(f"prime {p} exceeds pmax={self.pmax}")
            if idx < 1:
                raise UsageError("coordinates are indexed from 1")
            out[(p, idx)] = v % p
        return self._freeze(out)

    def params(self) -> dict:
        return {"q": self.q, "pmax": self.pmax}

    def elem(self, mapping=None, n: int = 1, z: int = 0) -> ShiftElem:
        if n < 1 or any(f > self.pmax for f in factorint(n)):
            raise UsageError(f"n={n} must factor over primes <= {self.pmax}")
        return ShiftElem(self.group_elem(mapping or {}), int(n), int(z))

    def theta(self, n: int, z: int, g) -> tuple:
        """Shift each p-block by v_p(n) and multiply the p != q blocks by q^z."""
        out = {}
        for (p, idx), v in (g.items() if isinstance(g, dict) else g):
            if p not in self.primes:
                raise UsageError(f"support prime {p} exceeds pmax={self.pmax}")
            f = 1 if p == self.q else pow(self.q, z, p)
            out[(p, idx + _vp(n, p))] = v * f % p
        return self._freeze(out)

    def theta_inverse(self, n: int, z: int, g) -> tuple:
        out = {}
        for (p, idx), v in g:
            j = idx - _vp(n, p)
            if j < 1:
                raise UsageError("not in the image of the shift")
            f = 1 if p == self.q else pow(self.q, -z, p)
            out[(p, j)] = v * f % p
        return self._freeze(out)

    def _add(self, g, h) -> tuple:
        out = dict(g)
        for k, v in h:
            out[k] = (out.get(k, 0) + v) % k[0]
        return self._freeze(out)

    def _neg(self, g) -> tuple:
        return self._freeze({k: (-v) % k[0] for k, v in g})

    def _trunc(self, g, n: int) -> tuple:
        return tuple((k, v) for k, v in g if k[1] <= _vp(n, k[0]))

    def check(self, *elems):
        for e in elems:
            if not isinstance(e, ShiftElem):
                raise UsageError(f"{e!r} is not an element of {self.prefix}")

    def mul(self, s, t):
        self.check(s, t)
        return ShiftElem(self._add(s.g, self.theta(s.n, s.z, t.g)), s.n * t.n, s.z + t.z)

    def divides(self, s, r) -> bool:
        return r.n % s.n == 0 and self._trunc(r.g, s.n) == self._trunc(s.g, s.n)

    def left_divide(self, s, r):
        self.check(s, r)
        if r.n % s.n:
            return None
        diff = self._add(r.g, self._neg(s.g))
        if self._trunc(diff, s.n):
            return None
        return ShiftElem(self.theta_inverse(s.n, s.z, diff), r.n // s.n, r.z - s.z)

    def right_lcm(self, s, t):
        self.check(s, t)
        ts, tt = dict(self._trunc(s.g, s.n)), dict(self._trunc(t.g, t.n))
        for p in self.primes:
            lim = min(_vp(s.n, p), _vp(t.n, p))
            for idx in range(1, lim + 1):
                if ts.get((p, idx), 0) != tt.get((p, idx), 0):
                    return Disjoint()
        L = s.n // gcd(s.n, t.n) * t.n
        r = ShiftElem(self._freeze({**ts, **tt}), L, 0)
        return Meet(r, self.left_divide(s, r), self.left_divide(t, r))

    def is_core(self, s) -> bool:
        return s.n == 1

    def scale(self, s) -> int:
        return s.n

    def unit_canonical(self, s):
        return ShiftElem(self._trunc(s.g, s.n), s.n, 0)

    def class_of(self, s) -> ClassId:
        return ClassId(s.n, self._trunc(s.g, s.n))

    def class_keys(self, n: int):
        self.check_level(n)
        slots = [((p, idx), p) for p in self.primes for idx in range(1, _vp(n, p) + 1)]
        for vals in product(*(range(p) for _, p in slots)):
            yield self._freeze({k: v for (k, _), v in zip(slots, vals)})

    def class_rep(self, c: ClassId):
        return ShiftElem(tuple(c.key), c.level, 0)

    def ancestor(self, c: ClassId, m: int) -> ClassId:
        return ClassId(m, self._trunc(c.key, m))

    def irreducibles(self, bound: int) -> list:
        return [p for p in self.primes if p <= bound]

    def generators(self) -> list:
        gens = [ShiftElem((((p, 1), 1),), 1, 0) for p in self.primes if p <= 3]
        gens.append(ShiftElem((), 1, 1))
        gens += [ShiftElem((), p, 0) for p in self.primes if p <= 3]
        return gens

    def core_samples(self) -> list:
        out = []
        for z in (1, -1):
            out.append(ShiftElem((), 1, z))
            for p in self.primes:
                out.append(ShiftElem((((p, 1), 1),), 1, z))
            out.append(self.elem({(3, 1): 2, (5, 1): 1, (5, 2): 3, (7, 1): 4}
                                 if self.pmax >= 7 else {(2, 1): 1}, 1, z))
        return out

    def sort_key(self, s):
        return (s.n, s.g, abs(s.z), s.z < 0)

    def format(self, s) -> str:
        body = ",".join(f"{p}:{i}:{v}" for (p, i), v in s.g)
        return f"{self.prefix}:{{{body}}};{s.n};{s.z}"

    def format_class(self, c: ClassId) -> str:
        body = ",".join(f"{p}:{i}:{v}" for (p, i), v in c.key)
        return f"{self.prefix}#{c.level}:{{{body}}}"

    def parse_class(self, text: str) -> ClassId:
        head, _, rest = text.partition("#")
        if head != self.prefix:
            raise UsageError(f"class {text!r} does not belong to {self.prefix}")
        lvl, _, body = rest.partition(":")
        return ClassId(int(lvl), self._parse_map(body))

    def _parse_map(self, body: str) -> tuple:
        body = body.strip().strip("{}")
        mp = {}
        for item in filter(None, body.split(",")):
            p, i, v = (int(x) for x in item.split(":"))
            mp[(p, i)] = v
        return self.group_elem(mp)

    def parse(self, text: str):
        text = text.strip()
        if text in ("id", "1"):
            return self.identity
        if text.startswith(self.prefix + ":"):
            text = text[len(self.prefix) + 1:]
        elif text.startswith("ss("):
            raise UsageError(f"{text!r} is not an element of {self.prefix}")
        g, n, z = text.split(";")
        return self.elem(dict(self._parse_map(g)), int(n), int(z))


# -- Zappa-Szep product X* |><| G ------------------------------------------

class ZappaSzepMonoid(ScaledMonoid):
    """Pairs (w, g) with (w, g)(v, h) = (w g(v), g|_v h); scale |X|^len(w), classes keyed by w."""

    absorbing_rule = "restriction"
    irreducible_kind = "finite"
    has_units = True
    right_cancellative = False

    def __init__(self, action: SelfSimilarAction):
        self.action = action
        self.size = len(action.alphabet)
        self.prefix = "zs"
        self.identity = ((), action.identity)

    def params(self) -> dict:
        return {"action": getattr(self.action, "name", type(self.action).__name__)}

    def check(self, *elems):
        for e in elems:
            if not (isinstance(e, tuple) and len(e) == 2 and isinstance(e[0], tuple)):
                raise UsageError(f"{e!r} is not an element of {self.prefix}")

    def mul(self, s, t):
        w, g = s
        v, h = t
        gv, gr = act_word(self.action, g, v)
        return (w + gv, self.action.mul(gr, h))

    def left_divide(self, s, r):
        w, g = s
        u, h = r
        if u[:len(w)] != w:
            return None
        ginv = self.action.inverse(g)
        v, _ = act_word(self.action, ginv, u[len(w):])
        gr = act_word(self.action, g, v)[1]
        return (v, self.action.mul(self.action.inverse(gr), h))

    def right_lcm(self, s, t):
        (w1, _), (w2, _) = s, t
        short, long_ = (w1, w2) if len(w1) <= len(w2) else (w2, w1)
        if long_[:len(short)] != short:
            return Disjoint()
        r = (long_, self.action.identity)
        return Meet(r, self.left_divide(s, r), self.left_divide(t, r))

    def is_core(self, s) -> bool:
        return len(s[0]) == 0

    def scale(self, s) -> int:
        return self.size ** len(s[0])

    def unit_canonical(self, s):
        return (s[0], self.action.identity)

    def core(self, g):
        return ((), g)

    def letter(self, x):
        return ((x,), self.action.identity)

    def class_of(self, s) -> ClassId:
        return ClassId(self.scale(s), s[0])

    def _depth(self, n: int) -> int:
        self.check_level(n)
        d = 0
        while n > 1:
            n //= self.size
            d += 1
        return d

    def class_keys(self, n: int):
        return product(self.action.alphabet, repeat=self._depth(n))

    def class_rep(self, c: ClassId):
        return (tuple(c.key), self.action.identity)

    def ancestor(self, c: ClassId, m: int) -> ClassId:
        return ClassId(m, tuple(c.key[:self._depth(m)]))

    def closed_form_absorbing(self, a, b, c: ClassId):
        w = tuple(c.key)
        ga, ra = act_word(self.action, a[1], w)
        gb, rb = act_word(self.action, b[1], w)
        return ga == gb and ra == rb

    def irreducibles(self, bound: int) -> list:
        return [self.size] if self.size <= bound else []

    def generators(self) -> list:
        return ([self.letter(x) for x in self.action.alphabet]
                + [self.core(g) for g in self.action.generators()])

    def core_samples(self) -> list:
        return [self.core(g) for g in self.action.generators()]

    def sort_key(self, s):
        return (len(s[0]), s[0], self.action.format(s[1]))

    def format(self, s) -> str:
        return f"zs:{''.join(map(str, s[0]))}|{self.action.format(s[1])}"

    def parse(self, text: str):
        text = text.strip()
        if text in ("id", "1"):
            return self.identity
        if text.startswith("zs:"):
            text = text[3:]
        w, sep, g = text.partition("|")
        if not sep:
            raise UsageError(f"expected w|g, got {text!r}")
        letters = {str(x): x for x in self.action.alphabet}
        try:
            word = tuple(letters[ch] for ch in w)
        except KeyError as exc:
            raise UsageError(f"unknown letter in {w!r}") from exc
        return (word, self.action.parse(g) if g else self.action.identity)


def shiftspace_theta(n: int, z: int, g: dict, q: int = 2, pmax: int = 7) -> dict:
    return dict(ShiftSpaceMonoid(q, pmax).theta(n, z, g))


# -- registry and conformance suite -------------------------------------------

BACKENDS = ("bs", "zz", "nn", "sh", "ss", "zs")


def make_backend(name: str, **params) -> ScaledMonoid:
    """Backend by selector name; unknown keys in ``params`` are ignored."""
    from .bs import BsMonoid
    from .selfsim import action_from_config

    def get(key, default):
        v = params.get(key)
        return default if v is None else v

    if name == "bs":
        return BsMonoid(int(get("c", 3)), int(get("d", 2)))
    if name == "zz":
        return AffineMonoid()
    if name == "nn":
        return AffineMonoid(natural=True)
    if name == "sh":
        return ShadowedMonoid(int(get("m", 2)))
    if name == "ss":
        return ShiftSpaceMonoid(int(get("q", 2)), int(get("pmax", 7)))
    if name == "zs":
        cfg = {"group": get("action", "odometer"), "k": get("k", 2), "m": get("m", 1),
               "n": get("n", 2), "digits": get("digits", "D1")}
        return ZappaSzepMonoid(action_from_config(cfg))
    raise UsageError(f"unknown backend {name!r} (choose from {', '.join(BACKENDS)})")


def instance_selftest(M: ScaledMonoid, depth: int = 3, level_bound: int = 16,
                      max_elements: int = 150, max_oracle: int = 2 * 10 ** 4) -> Report:
    """Conformance suite for a backend.

    Oracle right-LCM agreement on all pairs of elements of word length
    <= depth (oracle depth 2*depth; both reduced for wide generating sets
    so that at most ``max_elements`` elements and about ``max_oracle`` words
    per oracle call are used), class counts and transversals at every
    attained level <= level_bound, bijectivity of the core action on classes,
    multiplicativity of the scale, class invariance under right core
    multiplication, and consistency of left division.
    """
    rep = Report(f"selftest:{M.prefix}")
    # wide generating sets shrink the sample and the oracle depth; both are recorded
    ngens = len(M.generators())
    d = depth
    els = elements_up_to(M, d)
    while d > 1 and len(els) > max_elements:
        d -= 1
        els = elements_up_to(M, d)
    oracle_depth = 2 * depth
    while oracle_depth > d + 1 and ngens ** oracle_depth > max_oracle:
        oracle_depth -= 1
    rep.checks["sample_depth"] = d
    rep.checks["oracle_depth"] = oracle_depth
    cache: dict = {}
    lcm = Report("lcm-oracle")
    for s in els:
        for t in els:
            compare_lcm_with_oracle(M, s, t, oracle_depth, cache=cache, report=lcm)
    rep.merge(lcm)
    for s in els:
        for t in els:
            st = M.mul(s, t)
            rep.count("products")
            if M.scale(st) != M.scale(s) * M.scale(t):
                rep.fail("scale-multiplicative", s=M.format(s), t=M.format(t))
            if M.mul(s, M.left_divide(s, st)) != st:
                rep.fail("left-divide", s=M.format(s), r=M.format(st))
    core = M.core_samples()
    for s in els:
        for c in core:
            rep.count("class-invariance")
            if M.class_of(M.mul(s, c)) != M.class_of(s):
                rep.fail("class-invariance", s=M.format(s), c=M.format(c))
    for n in M.levels(level_bound):
        rep.merge(verify_scale_axioms(M, n, min(depth, 2)))
        classes = M.classes_at_level(n)
        for a in core:
            rep.count("alpha-bijective")
            if len({M.alpha_act(a, c) for c in classes}) != len(classes):
                rep.fail("alpha-bijective", a=M.format(a), level=n)
    return rep
