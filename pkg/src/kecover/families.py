"""Catalog of Fano families that carry Galois covers over KE bases.

Each builder assembles the :class:`CoverSystem` for the family with the
geometry flags fixed per family, runs the matching criterion and records
what the literature asserts for the same parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .criteria import (
    CoverDescriptor,
    CoverSystem,
    Criterion,
    Verdict,
    check_single_cover,
    check_transverse_system,
)
from .divisor_algebra import (
    CompleteIntersectionInP,
    Custom,
    DoubleCoverOfP,
    DoubleCoverOfQuadric,
    FanoModel,
    HypersurfaceInP,
    anticanonical_degree,
    hurwitz_check,
    model_beta,
    pullback_anticanonical_base,
    ramification_class,
)

SYMMETRY_TOL = 1e-12
COLLISION_RTOL = 1e-8
CONDITION_LIMIT = 1e10


class OutOfRange(ValueError):
    pass


class SingularPencil(ValueError):
    """Two generalized eigenvalues collide: the base locus is not smooth."""


class NoInvertibleMember(ValueError):
    pass


@dataclass
class FamilyVerdict:
    family: FanoModel
    system: CoverSystem | None
    verdict: Verdict
    paper_claim: bool
    in_claimed_range: bool = True
    note: str = ""

    @property
    def agrees(self) -> bool:
        return not self.in_claimed_range or self.verdict.ke_proven == self.paper_claim

    def to_dict(self) -> dict:
        fam = {"type": type(self.family).__name__, **{k: str(v) for k, v in vars(self.family).items()}}
        return {
            "family": fam,
            "verdict": self.verdict.to_dict(),
            "paper_claim": self.paper_claim,
            "in_claimed_range": self.in_claimed_range,
            "agrees": self.agrees,
            "note": self.note,
        }


def _hurwitz_ok(model: FanoModel, perturb: int = 0) -> bool:
    r = ramification_class(model)
    if perturb:
        r = r + type(r)(perturb)
    return hurwitz_check(pullback_anticanonical_base(model), anticanonical_degree(model), r)


def _hurwitz_guard(model: FanoModel, perturb: int, verdict: Verdict) -> Verdict:
    """Replace the verdict by a failure when the Hurwitz relation does not hold."""
    if _hurwitz_ok(model, perturb):
        return verdict
    return Verdict(False, Criterion.NONE, {}, f"Hurwitz relation fails for {model} (ramification shifted by {perturb})")


def _fano_beta(model: FanoModel) -> Fraction:
    # NotFano propagates: the parameters describe a non-Fano model
    return model_beta(model)


def diagonal_hypersurface(n: int, d: int, k: int, perturb_hurwitz: int = 0) -> FamilyVerdict:
    """``x_0^d + ... + x_{k-1}^d + f(x_k, ..., x_{n+1}) = 0`` in ``P^{n+1}``.

    Deleting one of the first ``k`` coordinates gives ``k`` cyclic degree-``d``
    covers of ``P^n``, ramified along smooth hyperplane sections that meet
    transversally.
    """
    if n < 1 or d < 2 or not 1 <= k <= n + 2:
        raise OutOfRange(f"need n >= 1, d >= 2, 1 <= k <= n+2; got n={n}, d={d}, k={k}")
    model = HypersurfaceInP(n, d)
    beta = _fano_beta(model)
    cover = CoverDescriptor(d=d, beta=beta, base_has_KE=True)
    system = CoverSystem(
        (cover,) * k,
        # V = M cap {x_0 = ... = x_{k-1} = 0} is empty once at most one coordinate is left
        ramifications_disjoint=k >= n + 1,
        ramifications_transverse_smooth=True,
    )
    verdict = _hurwitz_guard(model, perturb_hurwitz, check_transverse_system(system))
    index = n + 2 - d
    # k/(d-1) > index/(d-1)  <=>  k > index
    assert (Fraction(k, d - 1) > Fraction(index, d - 1)) == (k > index)
    return FamilyVerdict(model, system, verdict, paper_claim=k > index)


def _ci_base_has_ke(n: int, m: int, d: int, k: int) -> bool:
    if m == 1:
        return True  # P^n
    if d == 2 and m <= 3:
        return True  # smooth quadric (homogeneous) or intersection of two quadrics
    # flattened induction: the base is asserted KE under the family's own hypothesis
    return k > n + 2 - d


def diagonal_complete_intersection(n: int, m: int, d: int, k: int, perturb_hurwitz: int = 0) -> FamilyVerdict:
    """``m`` degree-``d`` equations diagonal in the first ``k`` coordinates of ``P^{n+m}``."""
    if n < 1 or m < 1 or d < 2 or not 1 <= k <= n + m + 1:
        raise OutOfRange(f"need n, m >= 1, d >= 2, 1 <= k <= n+m+1; got n={n}, m={m}, d={d}, k={k}")
    model = CompleteIntersectionInP(n, m, d)
    beta = _fano_beta(model)
    base_ke = _ci_base_has_ke(n, m, d, k)
    system = CoverSystem(
        (CoverDescriptor(d=d, beta=beta, base_has_KE=base_ke),) * k,
        ramifications_disjoint=k == n + m + 1,
        ramifications_transverse_smooth=True,
    )
    verdict = _hurwitz_guard(model, perturb_hurwitz, check_transverse_system(system))
    claim = k > n + 2 - d
    if claim:
        # n + 1 + m(1-d) <= n + 2 - d < k  gives  beta > (d-1)/k
        assert n + 1 + m * (1 - d) <= n + 2 - d < k
        assert beta > Fraction(d - 1, k)
    note = "" if base_ke or m == 1 else "base KE not available from the flattened induction"
    return FamilyVerdict(model, system, verdict, paper_claim=claim, in_claimed_range=claim, note=note)


def double_cover_pn(n: int, d: int, perturb_hurwitz: int = 0) -> FamilyVerdict:
    """Double cover of ``P^n`` branched along a smooth hypersurface of degree ``2d``."""
    if not 1 <= d <= n:
        raise OutOfRange(f"need 1 <= d <= n for a Fano double cover; got n={n}, d={d}")
    model = DoubleCoverOfP(n, d)
    beta = _fano_beta(model)
    cover = CoverDescriptor(d=2, beta=beta, base_has_KE=True)
    verdict = _hurwitz_guard(model, perturb_hurwitz, check_single_cover(cover))
    return FamilyVerdict(model, CoverSystem((cover,)), verdict, paper_claim=2 * d > n + 1)


def double_cover_quadric(n: int, d: int, perturb_hurwitz: int = 0) -> FamilyVerdict:
    """Double cover of ``Q_n`` branched along a smooth section of ``O(2d)``."""
    if n < 2 or not 1 <= d < n:
        raise OutOfRange(f"need n >= 2 and 1 <= d < n; got n={n}, d={d}")
    model = DoubleCoverOfQuadric(n, d)
    beta = _fano_beta(model)
    # smooth quadrics are homogeneous, hence KE
    cover = CoverDescriptor(d=2, beta=beta, base_has_KE=True)
    verdict = _hurwitz_guard(model, perturb_hurwitz, check_single_cover(cover))
    return FamilyVerdict(model, CoverSystem((cover,)), verdict, paper_claim=2 * d > n)


def two_quadrics(n: int, pencil: PencilOfQuadrics | None = None, perturb_hurwitz: int = 0) -> FamilyVerdict:
    """Smooth ``n``-dimensional intersection of two quadrics in ``P^{n+2}``.

    If a pencil is supplied it is first brought to simultaneous diagonal
    form; a collision of eigenvalues raises :class:`SingularPencil`.
    """
    if n < 2:
        raise OutOfRange("an intersection of two quadrics is Fano only for n >= 2")
    note = ""
    if pencil is not None:
        if pencil.size != n + 3:
            raise OutOfRange(f"pencil must be {(n + 3)}x{(n + 3)}")
        lambdas = two_quadrics_normal_form(pencil)
        note = "normal form eigenvalues: " + ", ".join(f"{z:.6g}" for z in lambdas)
    fv = diagonal_complete_intersection(n, 2, 2, n + 3, perturb_hurwitz)
    return FamilyVerdict(fv.family, fv.system, fv.verdict, paper_claim=True, note=note)


def hyperelliptic_catalog() -> list[FamilyVerdict]:
    """Hyperelliptic Fano threefolds: double covers of P^3, Q^3 and the Veronese cone."""
    a = double_cover_pn(3, 3)
    a.note = "(a) double cover of P^3 branched in a sextic"
    b = double_cover_quadric(3, 2)
    b.note = "(b) double cover of Q^3 branched in a quartic section"
    c = FamilyVerdict(
        Custom(3, Fraction(1)),
        None,
        Verdict(False, Criterion.NONE, {}, "cone over the Veronese surface: not covered by these criteria"),
        paper_claim=False,
        in_claimed_range=False,
        note="(c) double cover of the Veronese cone branched in a cubic section: open",
    )
    return [a, b, c]


def catalog_sweep(max_n: int = 8) -> Iterator[FamilyVerdict]:
    """Every admissible parameter set of the catalog families with ``n <= max_n``."""
    for n in range(1, max_n + 1):
        for d in range(2, n + 2):
            for k in range(1, n + 3):
                yield diagonal_hypersurface(n, d, k)
        for m in range(2, max_n + 1):
            for d in range(2, n + m + 1):
                if n + m + 1 - m * d <= 0:
                    continue
                for k in range(1, n + m + 2):
                    yield diagonal_complete_intersection(n, m, d, k)
        for d in range(1, n + 1):
            yield double_cover_pn(n, d)
        if n >= 2:
            for d in range(1, n):
                yield double_cover_quadric(n, d)
            yield two_quadrics(n)


# --- pencils of quadrics ---------------------------------------------------------


@dataclass
class PencilOfQuadrics:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self) -> None:
        self.A = np.asarray(self.A, dtype=complex)
        self.B = np.asarray(self.B, dtype=complex)
        if self.A.shape != self.B.shape or self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise ValueError("A and B must be square matrices of the same size")
        for name, mat in (("A", self.A), ("B", self.B)):
            if np.max(np.abs(mat - mat.T), initial=0.0) > SYMMETRY_TOL:
                raise ValueError(f"{name} is not symmetric")

    @property
    def size(self) -> int:
        return self.A.shape[0]

    def congruent(self, S: np.ndarray) -> PencilOfQuadrics:
        S = np.asarray(S)
        A = S.T @ self.A @ S
        B = S.T @ self.B @ S
        return PencilOfQuadrics((A + A.T) / 2, (B + B.T) / 2)


_T_GRID = (0.0, 1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 3.0, -3.0)


def two_quadrics_normal_form(
    pencil: PencilOfQuadrics, rng: np.random.Generator | None = None, n_random: int = 16
) -> np.ndarray:
    """Eigenvalues ``lambda_i`` of ``Q^{-1} B`` for an invertible member ``Q = A + tB``.

    In the eigenbasis both quadrics are diagonal, ``Q = sum x_i^2`` and
    ``B = sum lambda_i x_i^2``.  Returned sorted by (real, imag).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    candidates = list(_T_GRID) + list(rng.normal(size=n_random) + 1j * rng.normal(size=n_random))
    for t in candidates:
        member = pencil.A + t * pencil.B
        if np.linalg.cond(member) < CONDITION_LIMIT:
            break
    else:
        raise NoInvertibleMember("every sampled member of the pencil is numerically singular")
    lambdas = np.linalg.eigvals(np.linalg.solve(member, pencil.B))
    lambdas = np.array(sorted(lambdas, key=lambda z: (round(z.real, 12), round(z.imag, 12))))
    for i in range(len(lambdas)):
        for j in range(i + 1, len(lambdas)):
            scale = max(1.0, abs(lambdas[i]), abs(lambdas[j]))
            if abs(lambdas[i] - lambdas[j]) <= COLLISION_RTOL * scale:
                raise SingularPencil(f"eigenvalues {lambdas[i]:.6g} and {lambdas[j]:.6g} collide")
    return lambdas
