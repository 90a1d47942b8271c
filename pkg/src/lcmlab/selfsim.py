"""Self-similar group actions on words over a finite alphabet.

An action is given by its wreath recursion ``act(g, x) = (y, g|_x)`` meaning
g(xw) = y g|_x(w).  Three engines are provided: actions built from a virtual
endomorphism and a digit set (the odometer and the Heisenberg examples), and
actions read off an explicit automaton table.

>>> odo = odometer()
>>> act_word(odo, 1, (1, 1))
((0, 0), 1)
>>> act_word(odo, 1, (0, 1))
((1, 1), 0)
"""
from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .core import InvalidSpec, UsageError


# -- groups -----------------------------------------------------------------

class IntegerGroup:
    identity = 0

    def mul(self, g, h):
        return g + h

    def inverse(self, g):
        return -g

    def format(self, g) -> str:
        return str(g)

    def parse(self, text: str):
        return int(text)


class HeisenbergGroup:
    """Integer upper unitriangular matrices as triples with (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy')."""
    identity = (0, 0, 0)

    def mul(self, g, h):
        return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])

    def inverse(self, g):
        return (-g[0], -g[1], -g[2] + g[0] * g[1])

    def format(self, g) -> str:
        return "(%d,%d,%d)" % g

    def parse(self, text: str):
        vals = tuple(int(v) for v in text.strip().strip("()").split(","))
        if len(vals) != 3:
            raise UsageError(f"not a Heisenberg triple: {text!r}")
        return vals


# -- actions ----------------------------------------------------------------

class SelfSimilarAction:
    """Interface: ``alphabet``, group operations and ``act``."""

    alphabet: tuple
    identity = None

    def mul(self, g, h):
        raise NotImplementedError

    def inverse(self, g):
        raise NotImplementedError

    def act(self, g, x):
        raise NotImplementedError

    def generators(self) -> list:
        raise NotImplementedError

    def format(self, g) -> str:
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError


class VirtualEndoAction(SelfSimilarAction):
    """The action determined by phi: H -> G and digits q_x: g q_x in q_y H, g|_x = phi(q_y^-1 g q_x)."""

    def __init__(self, group, in_subgroup, phi, digits, gens, name="virtual-endo",
                 subgroup_samples=()):
        self.group = group
        self.in_subgroup = in_subgroup
        self.phi = phi
        self.digits = tuple(digits)
        self.alphabet = tuple(range(len(self.digits)))
        self.identity = group.identity
        self._gens = list(gens)
        self.name = name
        self._inv = [group.inverse(q) for q in self.digits]
        for i, qi in enumerate(self.digits):
            for j in range(i):
                if in_subgroup(group.mul(self._inv[j], qi)):
                    raise InvalidSpec(f"digits {j} and {i} lie in the same coset")
        for h in subgroup_samples:
            for k in subgroup_samples:
                hk = group.mul(h, k)
                if not in_subgroup(hk) or phi(hk) != group.mul(phi(h), phi(k)):
                    raise InvalidSpec("phi is not a homomorphism on the sampled subgroup elements")
        self._cache: dict = {}

    def mul(self, g, h):
        return self.group.mul(g, h)

    def inverse(self, g):
        return self.group.inverse(g)

    def act(self, g, x):
        key = (g, x)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        gq = self.group.mul(g, self.digits[x])
        for y, qinv in enumerate(self._inv):
            h = self.group.mul(qinv, gq)
            if self.in_subgroup(h):
                out = (y, self.phi(h))
                if len(self._cache) < 500_000:
                    self._cache[key] = out
                return out
        raise InvalidSpec(f"digit set is not a transversal: no coset contains g q_{x}")

    def generators(self) -> list:
        return list(self._gens)

    def format(self, g) -> str:
        return self.group.format(g)

    def parse(self, text: str):
        return self.group.parse(text)


def odometer(k: int = 2) -> VirtualEndoAction:
    """The k-adic adding machine on Z from kZ < Z, phi(kx) = x, digits 0..k-1."""
    return VirtualEndoAction(IntegerGroup(), lambda h: h % k == 0, lambda h: h // k,
                             range(k), [1], name=f"odometer({k})")


E1, E2, E3 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
DIGIT_SETS = {
    "D1": [(0, 0, 0), E2, E3, (0, 1, 1)],
    "D2": [E1, E2, E3, (0, 1, 1)],
}


def heisenberg_action(m: int = 1, n: int = 2, digits="D1") -> VirtualEndoAction:
    """Heisenberg group with H = {x in mZ, y in nZ, z in mnZ} and phi(mx, ny, mnz) = (x, y, z)."""
    if isinstance(digits, str):
        if (m, n) != (1, 2):
            raise UsageError("named digit sets are defined for (m, n) = (1, 2)")
        label, digits = digits, DIGIT_SETS[digits]
    else:
        label = "custom"
    digits = [tuple(q) for q in digits]
    if len(digits) != (m * n) ** 2:
        raise InvalidSpec(f"need {(m * n) ** 2} digits, got {len(digits)}")
    mn = m * n
    G = HeisenbergGroup()
    gens = [E1, E2, E3]
    gens += [G.inverse(g) for g in gens]
    return VirtualEndoAction(
        G,
        lambda h: h[0] % m == 0 and h[1] % n == 0 and h[2] % mn == 0,
        lambda h: (h[0] // m, h[1] // n, h[2] // mn),
        digits, gens, name=f"heisenberg({m},{n},{label})",
        subgroup_samples=[(m, 0, 0), (0, n, 0), (0, 0, mn), (m, n, 0), (-m, 2 * n, mn)])


class TableAction(SelfSimilarAction):
    """Action of the group generated by an invertible automaton.

    ``table[state][x] = (y, next_state)``.  Group elements are freely reduced
    tuples of (state, +1 | -1), applied right to left.  Distinct tuples may
    act identically, so closures computed here are closures of state words.
    """

    def __init__(self, table: dict, trivial=(), name="automaton"):
        self.table = table
        self.trivial = set(trivial)
        self.alphabet = tuple(sorted(next(iter(table.values())).keys()))
        self.identity = ()
        self.name = name
        self.inv_table = {}
        for s, row in table.items():
            outs = sorted(y for y, _ in row.values())
            if outs != list(self.alphabet):
                raise InvalidSpec(f"state {s!r} does not permute the alphabet")
            self.inv_table[s] = {y: (x, nxt) for x, (y, nxt) in row.items()}

    def _reduce(self, word):
        out = []
        for s, e in word:
            if s in self.trivial:
                continue
            if out and out[-1] == (s, -e):
                out.pop()
            else:
                out.append((s, e))
        return tuple(out)

    def mul(self, g, h):
        return self._reduce(g + h)

    def inverse(self, g):
        return tuple((s, -e) for s, e in reversed(g))

    def act(self, g, x):
        rest = []
        for s, e in reversed(g):
            if e > 0:
                x, nxt = self.table[s][x]
                rest.append((nxt, 1))
            else:
                x, nxt = self.inv_table[s][x]
                rest.append((nxt, -1))
        return x, self._reduce(tuple(reversed(rest)))

    def generators(self) -> list:
        return [((s, 1),) for s in self.table if s not in self.trivial]

    def format(self, g) -> str:
        return ".".join(f"{s}" if e > 0 else f"{s}^-1" for s, e in g) or "1"

    def parse(self, text: str):
        if text in ("1", ""):
            return ()
        out = []
        for tok in text.split("."):
            if tok.endswith("^-1"):
                out.append((tok[:-3], -1))
            else:
                out.append((tok, 1))
        return self._reduce(tuple(out))


def odometer_table() -> TableAction:
    return TableAction({"a": {0: (1, "e"), 1: (0, "a")}, "e": {0: (0, "e"), 1: (1, "e")}},
                       trivial=("e",), name="odometer-table")


def action_from_config(cfg: dict) -> SelfSimilarAction:
    """Build an action from a declarative config dict."""
    kind = cfg.get("group", cfg.get("action", "odometer"))
    if kind in ("odometer", "z"):
        return odometer(int(cfg.get("k", 2)))
    if kind == "heisenberg":
        digits = cfg.get("digits", "D1")
        if not isinstance(digits, str):
            digits = [tuple(q) for q in digits]
        return heisenberg_action(int(cfg.get("m", 1)), int(cfg.get("n", 2)), digits)
    if kind == "table":
        table = {s: {int(x): (int(y), nxt) for x, (y, nxt) in row.items()}
                 for s, row in cfg["table"].items()}
        return TableAction(table, cfg.get("trivial", ()))
    raise UsageError(f"unknown action kind {kind!r}")


# -- operations -------------------------------------------------------------

def act_word(A: SelfSimilarAction, g, w):
    """(g(w), g|_w)."""
    out = []
    for x in w:
        y, g = A.act(g, x)
        out.append(y)
    return tuple(out), g


@dataclass
class Finite:
    states: frozenset

    @property
    def size(self) -> int:
        return len(self.states)


@dataclass
class ExceededCap:
    cap: int
    profile: list = field(default_factory=list)


def finite_state_check(A: SelfSimilarAction, g, cap: int = 10_000):
    """Closure of {g} under restrictions: Finite(states) or ExceededCap(frontier sizes)."""
    if cap < 1:
        raise UsageError("cap must be >= 1")
    seen = {g}
    frontier = [g]
    profile = [1]
    while frontier:
        nxt = []
        for h in frontier:
            for x in A.alphabet:
                r = A.act(h, x)[1]
                if r not in seen:
                    seen.add(r)
                    nxt.append(r)
                    if len(seen) > cap:
                        profile.append(len(nxt))
                        return ExceededCap(cap, profile)
        frontier = nxt
        if nxt:
            profile.append(len(nxt))
    return Finite(frozenset(seen))


def pair_fixed_and_absorbing(A: SelfSimilarAction, g, h, depth: int):
    """Words w of length ``depth`` with g(w) = h(w), and those also having g|_w = h|_w."""
    if depth < 0:
        raise UsageError("depth must be >= 0")
    F, Ab = set(), set()
    for w in product(A.alphabet, repeat=depth):
        gw, gr = act_word(A, g, w)
        hw, hr = act_word(A, h, w)
        if gw == hw:
            F.add(w)
            if gr == hr:
                Ab.add(w)
    return F, Ab


def fa_counts(A: SelfSimilarAction, g, h, depth: int):
    """(|F|, |A|) at every depth 0..depth for the pair (g, h), by aggregating restrictions.

    g(w) = h(w) iff k = h^-1 g fixes w, and then g|_w = h|_w iff k|_w = 1.
    """
    k = A.mul(A.inverse(h), g)
    states = Counter({k: 1})
    out = []
    for d in range(depth + 1):
        if d:
            nxt = Counter()
            for st, cnt in states.items():
                for x in A.alphabet:
                    y, r = A.act(st, x)
                    if y == x:
                        nxt[r] += cnt
            states = nxt
        out.append((sum(states.values()), states.get(A.identity, 0)))
    return out


def singular_ratio(A: SelfSimilarAction, g, depth: int, h=None) -> Fraction:
    """|F \\ A| / |X|^depth for g against h (default the identity)."""
    if depth < 1:
        raise UsageError("depth must be >= 1")
    h = A.identity if h is None else h
    f, a = fa_counts(A, g, h, depth)[-1]
    return Fraction(f - a, len(A.alphabet) ** depth)


def singular_ratios(A: SelfSimilarAction, g, depth: int, h=None) -> list:
    h = A.identity if h is None else h
    size = len(A.alphabet)
    return [{"depth": d, "F": f, "A": a, "ratio": Fraction(f - a, size ** d)}
            for d, (f, a) in enumerate(fa_counts(A, g, h, depth)) if d >= 1]


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, centre - half), min(1.0, centre + half))


def singular_ratio_mc(A: SelfSimilarAction, g, depth: int, samples: int, seed: int = 0, h=None) -> dict:
    """Monte-Carlo estimate of the singular ratio with a Wilson 95% interval."""
    rng = random.Random(seed)
    h = A.identity if h is None else h
    k = A.mul(A.inverse(h), g)
    hits = 0
    letters = A.alphabet
    for _ in range(samples):
        st = k
        fixed = True
        for _ in range(depth):
            x = letters[rng.randrange(len(letters))]
            y, st = A.act(st, x)
            if y != x:
                fixed = False
                break
            if st == A.identity:
                break
        if fixed and st != A.identity:
            hits += 1
    lo, hi = wilson_interval(hits, samples)
    return {"depth": depth, "samples": samples, "seed": seed, "singular": hits,
            "estimate": hits / samples if samples else 0.0, "wilson95": [lo, hi]}
