"""Baumslag-Solitar monoids BS(c,d)+ = <a, b | a b^c = b^d a>+.

Every element has a unique normal form b^{i1} a b^{i2} a ... b^{ik} a b^m with
digits 0 <= i < |d|; the tail m is >= 0 unless cd < 0 and k > 0, in which case
it ranges over all integers.  All arithmetic uses the single signed identity
b^{qd} a = a b^{qc} (q any integer), valid in the ambient group, to push
excess powers of b rightwards.

>>> M = BsMonoid(3, 2)
>>> M.format(M.normalize("b^5 a"))
'bs(3,2):1|6'
>>> M.format(BsMonoid(1, -2).normalize("b^2 a"))
'bs(1,-2):0|-1'
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product

from .core import (ClassId, Disjoint, Meet, NoScale, ScaledMonoid, UnknownWithBound,
                   UsageError)


@dataclass(frozen=True)
class BsElem:
    c: int
    d: int
    digits: tuple
    tail: int

    @property
    def height(self) -> int:
        return len(self.digits)


def reduce_exponents(c: int, d: int, exps, tail: int):
    """Normal form of the group word b^{e1} a ... b^{ek} a b^tail (any integer e's).

    Returns (digits, tail); carries only ever move to the right.
    """
    ad = abs(d)
    digits = []
    carry = 0
    for e in exps:
        e += carry
        r = e % ad
        digits.append(r)
        carry = ((e - r) // d) * c
    return tuple(digits), tail + carry


_TOKEN = re.compile(r"\s*([ab])(?:\^\{?(-?\d+)\}?)?\s*")


class BsMonoid(ScaledMonoid):
    """BS(c,d)+ for nonzero c, d.  Scale, classes and KMS data need |d| > 1."""

    right_cancellative = True
    absorbing_rule = "cancellative"
    irreducible_kind = "finite"

    def __init__(self, c: int, d: int, scan_bound: int | None = None):
        if c == 0 or d == 0:
            raise UsageError("BS parameters must be nonzero")
        self.c, self.d = int(c), int(d)
        self.has_scale = abs(self.d) > 1
        self.scan_bound = scan_bound
        self.prefix = f"bs({self.c},{self.d})"
        self.identity = BsElem(self.c, self.d, (), 0)
        self.a = BsElem(self.c, self.d, (0,), 0)
        self.b = BsElem(self.c, self.d, (), 1)

    def params(self) -> dict:
        return {"c": self.c, "d": self.d}

    def elem(self, digits=(), tail: int = 0) -> BsElem:
        e = BsElem(self.c, self.d, tuple(digits), int(tail))
        if not self.in_monoid(e.digits, e.tail) or any(not 0 <= i < abs(self.d) for i in e.digits):
            raise UsageError(f"not a normal form of {self.prefix}: {digits}|{tail}")
        return e

    def b_pow(self, k: int) -> BsElem:
        if k < 0:
            raise UsageError("b^k needs k >= 0 in the monoid")
        return BsElem(self.c, self.d, (), k)

    def in_monoid(self, digits, tail) -> bool:
        if not digits or self.c * self.d > 0:
            return tail >= 0
        return True

    def check(self, *elems) -> None:
        for e in elems:
            if not isinstance(e, BsElem) or e.c != self.c or e.d != self.d:
                raise UsageError(f"element {e!r} does not belong to {self.prefix}")

    # -- arithmetic ---------------------------------------------------------
    def normalize(self, word: str) -> BsElem:
        """Normal form of a word such as "b^5 a", "abab" or "b^{2} a b"."""
        exps, cur = [], 0
        pos = 0
        text = word.replace("*", " ").strip()
        if text in ("", "1", "id", "e"):
            return self.identity
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise UsageError(f"cannot parse BS word {word!r}")
            gen, k = m.group(1), int(m.group(2) or 1)
            if k < 0:
                raise UsageError("words use non-negative generator powers")
            if gen == "b":
                cur += k
            else:
                for _ in range(k):
                    exps.append(cur)
                    cur = 0
            pos = m.end()
        digits, tail = reduce_exponents(self.c, self.d, exps, cur)
        return BsElem(self.c, self.d, digits, tail)

    def mul(self, s: BsElem, t: BsElem) -> BsElem:
        self.check(s, t)
        if not t.digits:
            return BsElem(self.c, self.d, s.digits, s.tail + t.tail)
        head, tail = reduce_exponents(self.c, self.d, (t.digits[0] + s.tail,) + t.digits[1:], t.tail)
        return BsElem(self.c, self.d, s.digits + head, tail)

    def left_divide(self, s: BsElem, r: BsElem):
        self.check(s, r)
        k = s.height
        if r.height < k or r.digits[:k] != s.digits:
            return None
        rest = r.digits[k:]
        if rest:
            digits, tail = reduce_exponents(self.c, self.d, (rest[0] - s.tail,) + rest[1:], r.tail)
        else:
            digits, tail = (), r.tail - s.tail
        if not self.in_monoid(digits, tail):
            return None
        return BsElem(self.c, self.d, digits, tail)

    def height(self, s: BsElem) -> int:
        return s.height

    def caps(self, s: BsElem, t: BsElem) -> bool:
        k = min(s.height, t.height)
        return s.digits[:k] == t.digits[:k]

    def _lcm_exponent(self, x: BsElem, y: BsElem) -> int:
        """Least k >= 0 with y b^k in xS, given that the digits of x prefix those of y."""
        if self.scan_bound is not None:
            for k in range(self.scan_bound + 1):
                if self.left_divide(x, BsElem(self.c, self.d, y.digits, y.tail + k)) is not None:
                    return k
            raise UnknownWithBound("BS right-LCM scan", self.scan_bound)
        # The quotient x^{-1} y b^k has tail affine in k with slope 1, so the
        # first k passing the membership test is read off from k = 0.
        rest = y.digits[x.height:]
        if not rest:
            return max(0, x.tail - y.tail)
        _, tail0 = reduce_exponents(self.c, self.d, (rest[0] - x.tail,) + rest[1:], y.tail)
        if self.c * self.d < 0:
            return 0
        return max(0, -tail0)

    def right_lcm(self, s: BsElem, t: BsElem):
        self.check(s, t)
        if not self.caps(s, t):
            return Disjoint()
        swap = s.height > t.height
        x, y = (t, s) if swap else (s, t)
        k = self._lcm_exponent(x, y)
        r = BsElem(self.c, self.d, y.digits, y.tail + k)
        x_comp = self.left_divide(x, r)
        y_comp = self.b_pow(k)
        return Meet(r, y_comp, x_comp) if swap else Meet(r, x_comp, y_comp)

    def is_core(self, s: BsElem) -> bool:
        self.check(s)
        if not self.has_scale:
            raise NoScale(f"{self.prefix}: the core is only described for |d| > 1")
        return s.height == 0

    def scale(self, s: BsElem) -> int:
        self.check(s)
        if not self.has_scale:
            raise NoScale(f"{self.prefix} has no generalised scale (|d| = 1)")
        return abs(self.d) ** s.height

    # -- classes ------------------------------------------------------------
    def class_of(self, s: BsElem) -> ClassId:
        return ClassId(self.scale(s), s.digits)

    def _height_of_level(self, n: int) -> int:
        self.check_level(n)
        k, ad = 0, abs(self.d)
        while n > 1:
            n //= ad
            k += 1
        return k

    def class_keys(self, n: int):
        return product(range(abs(self.d)), repeat=self._height_of_level(n))

    def class_rep(self, c: ClassId) -> BsElem:
        return BsElem(self.c, self.d, tuple(c.key), 0)

    def ancestor(self, c: ClassId, m: int) -> ClassId:
        return ClassId(m, tuple(c.key[:self._height_of_level(m)]))

    def irreducibles(self, bound: int) -> list:
        if not self.has_scale:
            raise NoScale(f"{self.prefix} has no generalised scale (|d| = 1)")
        return [abs(self.d)] if abs(self.d) <= bound else []

    def core_degree(self, a: BsElem) -> int:
        if a.height:
            raise UsageError("not a core element")
        return a.tail

    # -- sampling / text ----------------------------------------------------
    def generators(self) -> list:
        return [self.a, self.b]

    def core_samples(self) -> list:
        return [self.b_pow(k) for k in range(1, 4)]

    def sort_key(self, s: BsElem):
        return (s.height, s.digits, s.tail)

    def format(self, s: BsElem) -> str:
        return f"{self.prefix}:{'.'.join(map(str, s.digits))}|{s.tail}"

    def parse(self, text: str) -> BsElem:
        text = text.strip()
        if text.startswith(self.prefix + ":"):
            body = text[len(self.prefix) + 1:]
            digits, _, tail = body.partition("|")
            ds = tuple(int(x) for x in digits.split(".")) if digits else ()
            return self.elem(ds, int(tail))
        if "|" in text or ":" in text:
            raise UsageError(f"{text!r} is not an element of {self.prefix}")
        return self.normalize(text)


# Functional forms mirroring the operations list.

def bs_normalize(word: str, c: int, d: int) -> BsElem:
    return BsMonoid(c, d).normalize(word)


def bs_height(s: BsElem) -> int:
    return s.height


def bs_caps(s: BsElem, t: BsElem) -> bool:
    return BsMonoid(s.c, s.d).caps(s, t)


def bs_right_lcm(s: BsElem, t: BsElem):
    return BsMonoid(s.c, s.d).right_lcm(s, t)


def bs_class_of(s: BsElem) -> ClassId:
    return BsMonoid(s.c, s.d).class_of(s)


def bs_scale(s: BsElem) -> int:
    return BsMonoid(s.c, s.d).scale(s)
