"""Exact divisor-class bookkeeping on Picard-rank-one Fano models.

Every class is a single rational multiple of a fixed ample generator: the
hyperplane class ``O(1)`` of the ambient model (pulled back along the
structure map for double covers), or the degree of a divisor on ``P^1`` for
the Fermat cover ``z -> z^d``.  All arithmetic is done with
:class:`fractions.Fraction`, so strict inequalities are decidable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Union

Rational = Union[int, Fraction]


class NotFano(ValueError):
    """The anticanonical class of the model is not positive."""


class NotEffective(ValueError):
    """A ramification class that should be effective is not positive."""


def as_fraction(value: Rational | str) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact rationals; pass a str or Fraction")
    return Fraction(value)


@dataclass(frozen=True, order=True)
class QClass:
    """Rational multiple of the generator of the Picard group."""

    coeff: Fraction
    anticanonical_units: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff", as_fraction(self.coeff))

    def _check(self, other: QClass) -> None:
        if self.anticanonical_units != other.anticanonical_units:
            raise ValueError("classes are expressed in different units")

    def __add__(self, other: QClass) -> QClass:
        self._check(other)
        return QClass(self.coeff + other.coeff, self.anticanonical_units)

    def __sub__(self, other: QClass) -> QClass:
        self._check(other)
        return QClass(self.coeff - other.coeff, self.anticanonical_units)

    def __neg__(self) -> QClass:
        return QClass(-self.coeff, self.anticanonical_units)

    def scale(self, factor: Rational) -> QClass:
        return QClass(self.coeff * as_fraction(factor), self.anticanonical_units)

    def __str__(self) -> str:
        unit = "(-K)" if self.anticanonical_units else "O(1)"
        return f"{self.coeff}*{unit}"


# --- Fano models -------------------------------------------------------------


@dataclass(frozen=True)
class HypersurfaceInP:
    """Degree ``d`` hypersurface of dimension ``n`` in ``P^{n+1}``."""

    n: int
    d: int


@dataclass(frozen=True)
class CompleteIntersectionInP:
    """Complete intersection of ``m`` degree-``d`` hypersurfaces, dimension ``n``, in ``P^{n+m}``."""

    n: int
    m: int
    d: int


@dataclass(frozen=True)
class DoubleCoverOfP:
    """Double cover of ``P^n`` branched along a smooth hypersurface of degree ``2d``."""

    n: int
    d: int


@dataclass(frozen=True)
class DoubleCoverOfQuadric:
    """Double cover of the quadric ``Q_n`` branched along a section of ``O(2d)``."""

    n: int
    d: int


@dataclass(frozen=True)
class FermatCoverP1:
    """The cyclic cover ``z -> z^d`` of ``P^1`` by itself (units: degree of divisors)."""

    d: int

    @property
    def n(self) -> int:
        return 1


@dataclass(frozen=True)
class Custom:
    """Model known only through its anticanonical degree."""

    n: int
    anticanonical_degree: Fraction


FanoModel = Union[
    HypersurfaceInP, CompleteIntersectionInP, DoubleCoverOfP, DoubleCoverOfQuadric, FermatCoverP1, Custom
]


def _check_params(model: FanoModel) -> None:
    for name in ("n", "m", "d"):
        value = getattr(model, name, None)
        if value is not None and (not isinstance(value, int) or value < 1):
            raise ValueError(f"{type(model).__name__}: {name} must be a positive integer, got {value!r}")


def anticanonical_degree(model: FanoModel) -> QClass:
    """Return ``-K_M`` in generator units; raise :class:`NotFano` if it is not positive."""
    _check_params(model)
    if isinstance(model, HypersurfaceInP):
        deg = Fraction(model.n + 2 - model.d)
    elif isinstance(model, CompleteIntersectionInP):
        deg = Fraction(model.n + model.m + 1 - model.m * model.d)
    elif isinstance(model, DoubleCoverOfP):
        deg = Fraction(model.n + 1 - model.d)
    elif isinstance(model, DoubleCoverOfQuadric):
        deg = Fraction(model.n - model.d)
    elif isinstance(model, FermatCoverP1):
        deg = Fraction(2)
    elif isinstance(model, Custom):
        deg = as_fraction(model.anticanonical_degree)
    else:
        raise TypeError(f"unknown model {model!r}")
    if deg <= 0:
        raise NotFano(f"{model}: -K_M = {deg} is not ample")
    return QClass(deg)


def ramification_class(model: FanoModel) -> QClass:
    """Ramification divisor of the natural Galois cover attached to the model.

    Hypersurfaces and complete intersections: projection from one diagonal
    coordinate, ``R = {x_i^(d-1) = 0}``.  Double covers: ``R = pi^* O(d)``.
    Fermat cover of ``P^1``: ``(d-1)([0] + [oo])``.
    """
    _check_params(model)
    if isinstance(model, (HypersurfaceInP, CompleteIntersectionInP)):
        return QClass(model.d - 1)
    if isinstance(model, (DoubleCoverOfP, DoubleCoverOfQuadric)):
        return QClass(model.d)
    if isinstance(model, FermatCoverP1):
        return QClass(2 * (model.d - 1))
    raise TypeError(f"no natural covering recorded for {model!r}")


def pullback_anticanonical_base(model: FanoModel) -> QClass:
    """``pi^*(-K_N)`` for the natural cover ``pi: M -> N`` of the model."""
    _check_params(model)
    if isinstance(model, HypersurfaceInP):
        # base P^n
        return QClass(model.n + 1)
    if isinstance(model, CompleteIntersectionInP):
        # base: intersection of m-1 degree-d hypersurfaces in P^{n+m-1}
        return QClass(model.n + model.m - (model.m - 1) * model.d)
    if isinstance(model, DoubleCoverOfP):
        return QClass(model.n + 1)
    if isinstance(model, DoubleCoverOfQuadric):
        return QClass(model.n)
    if isinstance(model, FermatCoverP1):
        return QClass(2 * model.d)
    raise TypeError(f"no natural covering recorded for {model!r}")


def covering_degree(model: FanoModel) -> int:
    """Order of the Galois group of the natural cover."""
    if isinstance(model, (HypersurfaceInP, CompleteIntersectionInP, FermatCoverP1)):
        return model.d
    if isinstance(model, (DoubleCoverOfP, DoubleCoverOfQuadric)):
        return 2
    raise TypeError(f"no natural covering recorded for {model!r}")


# --- beta and Hurwitz ----------------------------------------------------------


def beta_of_cover(ramification: QClass, anticanonical: QClass) -> Fraction:
    """The rational ``beta`` with ``R(pi) = beta * (-K_M)``."""
    ramification._check(anticanonical)
    if anticanonical.coeff <= 0:
        raise NotFano(f"-K_M = {anticanonical} is not positive")
    if ramification.coeff <= 0:
        raise NotEffective(f"ramification {ramification} is not effective")
    return ramification.coeff / anticanonical.coeff


def model_beta(model: FanoModel) -> Fraction:
    return beta_of_cover(ramification_class(model), anticanonical_degree(model))


def hurwitz_check(pullback_anticanonical_base: QClass, anticanonical_total: QClass, ramification: QClass) -> bool:
    """Check ``pi^* K_N = K_M - R(pi)``, i.e. ``pi^*(-K_N) = -K_M + R``, exactly."""
    pullback_anticanonical_base._check(anticanonical_total)
    anticanonical_total._check(ramification)
    return pullback_anticanonical_base.coeff == anticanonical_total.coeff + ramification.coeff


def class_scaling_factor(beta: Rational) -> Fraction:
    """``1 + beta``, the factor relating the pulled-back base class to ``[omega]``."""
    beta = as_fraction(beta)
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return 1 + beta


# --- combinatorial identities ----------------------------------------------------


def beta_integral(p: int, k: int) -> Fraction:
    """Exact ``int_0^1 s^(p+1) (1-s)^k ds``.

    Computed by binomial expansion of ``(1-s)^k`` and termwise integration,
    independently of the factorial closed form.
    """
    if p < 0 or k < 0:
        raise ValueError("p and k must be non-negative")
    return sum(
        (Fraction((-1) ** j * comb(k, j), p + j + 2) for j in range(k + 1)),
        Fraction(0),
    )


def beta_integral_closed_form(p: int, k: int) -> Fraction:
    return Fraction(factorial(p + 1) * factorial(k), factorial(p + k + 2))


def cp_sum(n: int, p: int) -> Fraction:
    """``sum_{k=0}^{n-p-1} (p+1) / ((p+k+1)(p+k+2))`` summed exactly."""
    if n < 1 or not 0 <= p <= n - 1:
        raise ValueError(f"need n >= 1 and 0 <= p <= n-1, got n={n}, p={p}")
    return sum((Fraction(p + 1, (p + k + 1) * (p + k + 2)) for k in range(n - p)), Fraction(0))


def mixed_term_coefficient(n: int, p: int) -> Fraction:
    """``C_p = sum_{q=p}^{n-1} binom(q, p) int_0^1 s^(p+1) (1-s)^(q-p) ds``.

    This is the coefficient that turns the ``s``-integral of ``I(s phi)/s``
    into the mixed-volume form of ``J``; it equals ``cp_sum(n, p)``.
    """
    if n < 1 or not 0 <= p <= n - 1:
        raise ValueError(f"need n >= 1 and 0 <= p <= n-1, got n={n}, p={p}")
    return sum((comb(q, p) * beta_integral(p, q - p) for q in range(p, n)), Fraction(0))
