"""Scaled right LCM monoids, their core-equivalence classes, and numerical
KMS-state analysis of the associated semigroup C*-algebras."""
from .core import (ClassId, Disjoint, Meet, NonPrincipal, Pair, ZERO, LcmlabError, UsageError,
                   UnknownWithBound, LevelNotAttained, NoScale, DivergenceError, InvalidSpec,
                   NotRightLcm, ScaledMonoid, monomial, monomial_mul, expectation,
                   oracle_right_lcm, verify_scale_axioms)
from .bs import BsMonoid
from .zoo import (AffineMonoid, ShadowedMonoid, ShiftSpaceMonoid, ZappaSzepMonoid, make_backend,
                  instance_selftest)

__version__ = "0.1.0"
