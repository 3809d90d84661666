"""Decision procedures for Kahler-Einstein existence on Galois covers.

The procedures are sufficient conditions only: a failed check yields an
*unknown* verdict (``ke_proven=False``), never a proof of non-existence.
Geometry facts (disjointness, transversality, smoothness of the reduced
ramification, a common compact group) are taken as caller-asserted flags.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .divisor_algebra import Rational, as_fraction


class NonPositiveExponent(ValueError):
    pass


class DomainError(ValueError):
    pass


class Criterion(str, enum.Enum):
    DISJOINT = "Disjoint"
    SINGLE_COVER = "SingleCover"
    TRANSVERSE_SYSTEM = "TransverseSystem"
    EXPLICIT_EXPONENT = "ExplicitExponent"
    NONE = "None"


@dataclass(frozen=True)
class CoverDescriptor:
    d: int
    beta: Fraction
    base_has_KE: bool = True
    is_galois: bool = True
    group_in_common_compact: bool = True
    reduced_ramification_smooth: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", as_fraction(self.beta))
        if not isinstance(self.d, int) or self.d < 2:
            raise ValueError(f"group order must be an integer >= 2, got {self.d!r}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class CoverSystem:
    covers: tuple[CoverDescriptor, ...]
    ramifications_disjoint: bool = False
    ramifications_transverse_smooth: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "covers", tuple(self.covers))
        if not self.covers:
            raise ValueError("a cover system needs at least one cover")

    @property
    def k(self) -> int:
        return len(self.covers)

    @property
    def min_beta(self) -> Fraction:
        return min(c.beta for c in self.covers)


@dataclass
class Verdict:
    ke_proven: bool
    criterion_used: Criterion
    witness: dict[str, Fraction] = field(default_factory=dict)
    reason: str | None = None

    def __post_init__(self) -> None:
        if self.ke_proven and self.criterion_used is Criterion.NONE:
            raise ValueError("a proven verdict must name its criterion")

    def to_dict(self) -> dict:
        return {
            "ke_proven": self.ke_proven,
            "criterion_used": self.criterion_used.value,
            "witness": {k: str(v) for k, v in sorted(self.witness.items())},
            "reason": self.reason,
        }


def _failed(reason: str, witness: dict[str, Fraction] | None = None) -> Verdict:
    return Verdict(False, Criterion.NONE, witness or {}, reason)


def _common_hypotheses(covers: Sequence[CoverDescriptor]) -> str | None:
    """First failed hypothesis among (1) KE base, (2) Galois, (3) common compact group."""
    checks = (
        ("hypothesis(1)", "base_has_KE"),
        ("hypothesis(2)", "is_galois"),
        ("hypothesis(3)", "group_in_common_compact"),
    )
    for label, attr in checks:
        for i, cover in enumerate(covers):
            if not getattr(cover, attr):
                return f"{label}: cover {i} has {attr}=False"
    return None


def check_disjoint_system(system: CoverSystem) -> Verdict:
    """Covers over KE bases whose ramification divisors have empty common intersection."""
    witness = {"min_beta": system.min_beta}
    reason = _common_hypotheses(system.covers)
    if reason:
        return _failed(reason, witness)
    if not system.ramifications_disjoint:
        return _failed("hypothesis(4): ramification divisors have a common point", witness)
    # hypothesis (5) is carried by CoverDescriptor: every beta is a positive rational
    return Verdict(True, Criterion.DISJOINT, witness)


def check_single_cover(cover: CoverDescriptor) -> Verdict:
    """One Galois cover of degree ``d`` over a KE base with ``d - 1 < beta``."""
    lhs = Fraction(cover.d - 1)
    witness = {"beta": cover.beta, "d_minus_1": lhs}
    reason = _common_hypotheses([cover])
    if reason:
        return _failed(reason, witness)
    if not lhs < cover.beta:
        return _failed(f"d-1 = {lhs} is not < beta = {cover.beta}", witness)
    return Verdict(True, Criterion.SINGLE_COVER, witness)


def harmonic_sum(system: CoverSystem) -> Fraction:
    return sum((Fraction(1, c.d - 1) for c in system.covers), Fraction(0))


def check_transverse_system(system: CoverSystem) -> Verdict:
    """Smooth, transversally meeting reduced ramifications and ``sum 1/(d_i-1) > 1/min beta``."""
    total = harmonic_sum(system)
    inverse_beta = 1 / system.min_beta
    witness = {"min_beta": system.min_beta, "harmonic_sum": total, "inverse_min_beta": inverse_beta}
    reason = _common_hypotheses(system.covers)
    if reason:
        return _failed(reason, witness)
    if not all(c.reduced_ramification_smooth for c in system.covers):
        return _failed("hypothesis(4): a reduced ramification divisor is singular", witness)
    if not system.ramifications_transverse_smooth:
        return _failed("hypothesis(4): reduced ramifications do not meet transversally", witness)
    if not total > inverse_beta:
        return _failed(f"hypothesis(5): {total} is not > {inverse_beta}", witness)
    return Verdict(True, Criterion.TRANSVERSE_SYSTEM, witness)


ExponentLike = Union[Rational, str, float]


def check_with_exponent(system: CoverSystem, c: ExponentLike) -> Verdict:
    """Use a lower bound ``c`` for the integrability exponent: KE if ``1/c < min beta``.

    ``c`` may be ``math.inf`` for a system whose pulled-back volume density
    never vanishes.
    """
    if isinstance(c, float) and math.isinf(c) and c > 0:
        inverse_c = Fraction(0)
        witness = {"min_beta": system.min_beta, "inverse_c": inverse_c}
    else:
        c = as_fraction(c)
        if c <= 0:
            raise NonPositiveExponent(f"exponent must be positive, got {c}")
        inverse_c = 1 / c
        witness = {"min_beta": system.min_beta, "c": c, "inverse_c": inverse_c}
    reason = _common_hypotheses(system.covers)
    if reason:
        return _failed(reason, witness)
    if not inverse_c < system.min_beta:
        return _failed(f"1/c = {inverse_c} is not < min beta = {system.min_beta}", witness)
    return Verdict(True, Criterion.EXPLICIT_EXPONENT, witness)


def exponent_lower_bound(system: CoverSystem) -> Fraction:
    """Proven lower bound for the singularity exponent of the ramification ideal.

    Local ramification equations have order at most ``d_i - 1``.  A single
    cover gives ``1/(d-1)``; smooth transverse reduced ramifications give
    ``sum 1/(d_i - 1)``; otherwise the conservative ``1/(max d_i - 1)``.
    """
    if system.k == 1:
        return Fraction(1, system.covers[0].d - 1)
    if system.ramifications_transverse_smooth and all(c.reduced_ramification_smooth for c in system.covers):
        return harmonic_sum(system)
    return Fraction(1, max(c.d for c in system.covers) - 1)


def alpha_constants(alpha: Rational | str, beta: Rational | str) -> dict[str, Fraction]:
    """Hoelder exponent ``p`` and slope ``C1`` turning an alpha-invariant bound into a sup bound."""
    alpha = as_fraction(alpha)
    beta = as_fraction(beta)
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    p = 1 + (1 - alpha) / beta
    q = p / (p - 1)
    c1 = q * alpha / p
    assert c1 == alpha * beta / (1 - alpha)
    return {"p": p, "C1": c1}


def decide(system: CoverSystem) -> Verdict:
    """Try every criterion in turn and return the first that proves existence."""
    attempts = [check_disjoint_system(system)]
    if system.k == 1:
        attempts.append(check_single_cover(system.covers[0]))
    attempts.append(check_transverse_system(system))
    attempts.append(check_with_exponent(system, exponent_lower_bound(system)))
    for verdict in attempts:
        if verdict.ke_proven:
            return verdict
    reasons = "; ".join(v.reason for v in attempts if v.reason)
    return _failed(reasons, attempts[-1].witness)


# --- wire format ---------------------------------------------------------------


def system_from_json(payload: dict) -> CoverSystem:
    """Parse the CoverSystem JSON schema (rationals travel as ``"p/q"`` strings)."""
    covers = []
    for entry in payload["covers"]:
        beta = entry["beta"]
        if isinstance(beta, float):
            raise ValueError("beta must be an exact rational string such as '3/2'")
        covers.append(
            CoverDescriptor(
                d=int(entry["d"]),
                beta=Fraction(beta),
                base_has_KE=bool(entry.get("base_ke", True)),
                is_galois=bool(entry.get("galois", True)),
                group_in_common_compact=bool(entry.get("compact_group", True)),
                reduced_ramification_smooth=bool(entry.get("smooth_reduced", True)),
            )
        )
    return CoverSystem(
        tuple(covers),
        ramifications_disjoint=bool(payload.get("disjoint", False)),
        ramifications_transverse_smooth=bool(payload.get("transverse", False)),
    )


def system_to_json(system: CoverSystem) -> dict:
    return {
        "covers": [
            {
                "d": c.d,
                "beta": str(c.beta),
                "base_ke": c.base_has_KE,
                "galois": c.is_galois,
                "compact_group": c.group_in_common_compact,
                "smooth_reduced": c.reduced_ramification_smooth,
            }
            for c in system.covers
        ],
        "disjoint": system.ramifications_disjoint,
        "transverse": system.ramifications_transverse_smooth,
    }
