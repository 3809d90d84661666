"""Convergence of the reduced monomial integral near a normal-crossing point.

After polar coordinates and ``t_i = s_i^{1/m_i}`` the local integral of
``(|z_1|^{m_1} + ... + |z_k|^{m_k})^{-2 lam}`` becomes, up to constants::

    int_{[0,1]^k} prod s_i^{2/m_i - 1} / (s_1 + ... + s_k)^{2 lam} ds

The integrand is singular only at the corner ``s = 0``.  The cube is cut into
dyadic shells ``2^{-j-1} < max s_i <= 2^{-j}``; on each shell the sum in the
denominator is bounded below, and the remaining power weights are integrated
exactly by Gauss-Jacobi rules.  Divergence shows up as geometric growth of the
accumulated shell sums.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .criteria import CoverDescriptor, CoverSystem, check_with_exponent
from .divisor_algebra import Rational, as_fraction

MAX_K = 4
MAX_LEVELS = 12
MIN_LEVELS = 4
DEFAULT_LEVELS = 12
# dyadic shells per refinement level: one level shrinks the mesh corner by 2^-8
SHELLS_PER_LEVEL = 8
NODES = 12
CONVERGED_RTOL = 0.02
DIVERGENT_RATIO = 1.1


class BudgetExceeded(ValueError):
    pass


class Classification(str, enum.Enum):
    CONVERGENT = "Convergent"
    DIVERGENT = "Divergent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class MonomialSum:
    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        exps = tuple(self.exponents)
        if not exps:
            raise ValueError("need at least one exponent")
        if any(not isinstance(m, int) or m < 1 for m in exps):
            raise ValueError(f"exponents must be positive integers, got {exps}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def parse(cls, text: str) -> MonomialSum:
        return cls(tuple(int(x) for x in text.split(",") if x.strip()))

    @property
    def k(self) -> int:
        return len(self.exponents)

    @property
    def weights(self) -> tuple[float, ...]:
        """Power ``2/m - 1`` carried by each ``s_i``."""
        return tuple(2.0 / m - 1.0 for m in self.exponents)


@dataclass(frozen=True)
class QuadratureResult:
    lam: float
    estimates: tuple[float, ...]
    classification: Classification
    growth_ratios: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "estimates": list(self.estimates),
            "classification": self.classification.value,
            "growth_ratios": list(self.growth_ratios),
        }


def _as_monomial(m) -> MonomialSum:
    return m if isinstance(m, MonomialSum) else MonomialSum(tuple(m))


def threshold(m) -> Fraction:
    return sum((Fraction(1, e) for e in _as_monomial(m).exponents), Fraction(0))


def ord_bound(order: int) -> Fraction:
    if not isinstance(order, int) or order < 1:
        raise ValueError(f"order must be a positive integer, got {order!r}")
    return Fraction(1, order)


def exponent_to_criterion(m, beta: Rational | str) -> bool:
    beta = as_fraction(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    return 1 / threshold(m) < beta


def exponent_to_criterion_via_criteria(m, beta: Rational | str) -> bool:
    """Same decision routed through :func:`criteria.check_with_exponent`."""
    system = CoverSystem((CoverDescriptor(d=2, beta=as_fraction(beta)),))
    return check_with_exponent(system, threshold(m)).ke_proven


# --- quadrature ------------------------------------------------------------------


@lru_cache(maxsize=None)
def _jacobi_rule(a: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule for ``int_0^1 s^a g(s) ds``."""
    x, w = roots_jacobi(nodes, 0.0, a)
    return 0.5 * (x + 1.0), w * 0.5 ** (a + 1.0)


@lru_cache(maxsize=None)
def _legendre_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def _axis_rule(kind: str, a: float, lo: float, hi: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``int_lo^hi s^a g(s) ds``; Jacobi rules need ``lo = 0``."""
    if kind == "jacobi":
        x, w = _jacobi_rule(a, nodes)
        return hi * x, w * hi ** (a + 1.0)
    x, w = _legendre_rule(nodes)
    s = lo + (hi - lo) * x
    return s, w * (hi - lo) * s**a


def shell_integral(m, lam: float, j: int, nodes: int = NODES) -> float:
    """Integral over the shell ``2^{-j-1} < max s_i <= 2^{-j}``.

    The shell is the disjoint union over ``i`` of the boxes where ``s_i`` is
    the first coordinate reaching ``delta/2``: earlier coordinates lie in
    ``[0, delta/2)``, ``s_i`` in ``[delta/2, delta]``, later ones in
    ``[0, delta]``.
    """
    m = _as_monomial(m)
    weights = m.weights
    delta = 0.5**j
    total = 0.0
    for i in range(m.k):
        rules = []
        for axis, a in enumerate(weights):
            if axis < i:
                rules.append(_axis_rule("jacobi", a, 0.0, 0.5 * delta, nodes))
            elif axis == i:
                rules.append(_axis_rule("legendre", a, 0.5 * delta, delta, nodes))
            else:
                rules.append(_axis_rule("jacobi", a, 0.0, delta, nodes))
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        wts = np.ones_like(grids[0])
        for axis, r in enumerate(rules):
            shape = [1] * m.k
            shape[axis] = nodes
            wts = wts * r[1].reshape(shape)
        denom = sum(grids)
        total += float(np.sum(wts * denom ** (-2.0 * lam)))
    return total


def _classify(ratios: list[float]) -> Classification:
    if len(ratios) >= 2 and all(abs(r - 1.0) <= CONVERGED_RTOL for r in ratios[-2:]):
        return Classification.CONVERGENT
    last = ratios[-3:]
    if len(last) == 3 and all(r >= DIVERGENT_RATIO for r in last):
        return Classification.DIVERGENT
    return Classification.INCONCLUSIVE


def reduced_integral(
    m, lam: float, levels: int = DEFAULT_LEVELS, *, shells_per_level: int = SHELLS_PER_LEVEL, nodes: int = NODES
) -> QuadratureResult:
    """Accumulate shells level by level; level ``l`` resolves the cube down to ``2^{-l * shells_per_level}``."""
    m = _as_monomial(m)
    if m.k > MAX_K:
        raise BudgetExceeded(f"k = {m.k} exceeds the tensor-quadrature budget of {MAX_K}")
    if levels > MAX_LEVELS:
        raise BudgetExceeded(f"levels = {levels} exceeds {MAX_LEVELS}")
    if levels < MIN_LEVELS:
        raise ValueError(f"need at least {MIN_LEVELS} levels to classify")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    estimates = []
    running = 0.0
    shells = iter(itertools.count())
    for _ in range(levels):
        for _ in range(shells_per_level):
            running += shell_integral(m, lam, next(shells), nodes)
        estimates.append(running)
    ratios = [b / a for a, b in zip(estimates, estimates[1:])]
    return QuadratureResult(float(lam), tuple(estimates), _classify(ratios), tuple(ratios))


def classify_at_threshold(m, epsilon: float, levels: int = DEFAULT_LEVELS) -> dict[str, Classification]:
    if not 0 < epsilon <= 0.2:
        raise ValueError("epsilon must lie in (0, 0.2]")
    c = float(threshold(m))
    below = reduced_integral(m, c * (1 - epsilon), levels).classification
    above = reduced_integral(m, c * (1 + epsilon), levels).classification
    return {"below": below, "above": above}
