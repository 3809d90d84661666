"""The cyclic cover ``z -> z^d`` of P^1 in log-radial coordinates.

On ``t = log|z|^2`` the cover acts as ``t -> d t`` and each circle downstairs
is covered ``d`` times.  A radial density ``rho_N`` on the base pulls back to
``d^2 rho_N(d t)``.  Both spheres carry the class ``2 pi c_1`` (mass ``4 pi``),
the pulled-back base class has mass ``4 pi d`` and ``1 + beta = d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .divisor_algebra import FermatCoverP1, model_beta
from .kahler1d import (
    TWO_PI,
    Grid,
    IdentityCheck,
    RadialPotential,
    ReducedForm,
    derivative,
    fubini_study_form,
    functional_F0,
)


@dataclass(frozen=True)
class FermatCover:
    d: int

    def __post_init__(self) -> None:
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"cover degree must be a positive integer, got {self.d!r}")

    @property
    def beta(self) -> Fraction:
        # d = 1 is the identity map, kept for testing; it is unramified
        return Fraction(0) if self.d == 1 else model_beta(FermatCoverP1(self.d))

    @property
    def scaling(self) -> Fraction:
        return 1 + self.beta


def pullback_form(cover: FermatCover, base_form: ReducedForm, grid: Grid | None = None) -> ReducedForm:
    """``pi^* base_form`` as a reduced density on the cover.

    Without ``grid`` the result lives on the base grid compressed by ``d``
    (no interpolation).  With ``grid`` the base form must be known in closed
    form and is resampled.
    """
    d = cover.d
    if grid is None:
        grid = base_form.grid.scaled(1.0 / d)
        density = d * d * base_form.density
        tails = (d * base_form.tails[0], d * base_form.tails[1])
    else:
        if base_form.profile is None or base_form.cumulative is None:
            raise ValueError("resampling a pulled-back form needs a closed-form base")
        density = d * d * base_form.profile(d * grid.t)
        tails = (
            d * float(base_form.cumulative(np.array([-d * grid.T]))[0]),
            d * float(base_form.mass - base_form.cumulative(np.array([d * grid.T]))[0]),
        )
    profile = cumulative = None
    if base_form.profile is not None and base_form.cumulative is not None:
        p, c = base_form.profile, base_form.cumulative
        profile = lambda t: d * d * p(d * np.asarray(t))  # noqa: E731
        cumulative = lambda t: d * c(d * np.asarray(t))  # noqa: E731
    return ReducedForm(grid, density, d * base_form.mass, tails, profile, cumulative)


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def u_potential(cover: FermatCover, grid: Grid | None = None, base_form: ReducedForm | None = None) -> RadialPotential:
    """``u`` with ``pi^* omega_N = (1 + beta) omega + i ddbar u`` for round ``omega``, ``omega_N``.

    A round form of mass ``2 pi s`` has potential ``s log(1 + e^t)``, hence
    ``u = s [log(1 + e^{d t}) - d log(1 + e^t)]``; ``u -> 0`` as ``t -> -oo``
    and ``u -> 0`` as ``t -> +oo``.
    """
    grid = grid or Grid()
    s = (base_form.mass if base_form is not None else 4.0 * np.pi) / TWO_PI
    d = cover.d
    t = grid.t
    values = s * (_softplus(d * t) - d * _softplus(t))
    # slopes of u at the window edges (decay like e^{-|t|})
    du = s * d * (1.0 / (1.0 + np.exp(-d * t[[0, -1]])) - 1.0 / (1.0 + np.exp(-t[[0, -1]])))
    return RadialPotential(grid, values, (float(du[0]), float(du[1])))


def calibrate_kappa(cover: FermatCover, grid: Grid | None = None, order: int = 4) -> float:
    """Least-squares constant ``k`` with ``pi^* rho_N - (1 + beta) rho = k u''`` on the grid.

    Uses only the closed forms and a finite-difference ``u''``; the answer is
    the coordinate constant of ``i ddbar`` and should equal ``KAPPA``.
    """
    grid = grid or Grid()
    base = fubini_study_form()
    omega = fubini_study_form(grid)
    pulled = pullback_form(cover, base, grid)
    u = u_potential(cover, grid)
    residual = pulled.density - float(cover.scaling) * omega.density
    u2 = derivative(u.values, grid.h, 2, order)
    return float(residual @ u2 / (u2 @ u2))


def pullback_potential(cover: FermatCover, psi: RadialPotential) -> RadialPotential:
    """``psi o pi`` on the base grid compressed by ``d``."""
    d = cover.d
    return RadialPotential(psi.grid.scaled(1.0 / d), psi.values, (d * psi.slopes[0], d * psi.slopes[1]))


def descend_potential(cover: FermatCover, phi: RadialPotential, base_form: ReducedForm | None = None) -> RadialPotential:
    """``psi`` on the base with ``(1 + beta) phi - u = pi^* psi``; lives on ``phi``'s grid stretched by ``d``."""
    d = cover.d
    u = u_potential(cover, phi.grid, base_form)
    lifted = float(cover.scaling) * phi - u
    return RadialPotential(phi.grid.scaled(d), lifted.values, (lifted.slopes[0] / d, lifted.slopes[1] / d))


def lift_potential(cover: FermatCover, psi: RadialPotential, base_form: ReducedForm | None = None) -> RadialPotential:
    """``(u + pi^* psi) / (1 + beta)``, the inverse of :func:`descend_potential`."""
    pulled = pullback_potential(cover, psi)
    return (u_potential(cover, pulled.grid, base_form) + pulled) / float(cover.scaling)


def pullback_F0_check(
    cover: FermatCover,
    psi: RadialPotential,
    base_form: ReducedForm | None = None,
    grid: Grid | None = None,
) -> IdentityCheck:
    """``F0_{pi^* omega_N}(pi^* psi)`` against ``F0_{omega_N}(psi)``.

    The cover side is evaluated on its own grid, by default the preimage
    window ``[-T/d, T/d]`` with ``N + 2`` intervals so that no node maps onto
    a base node.  ``psi o pi`` is interpolated and ``pi^* omega_N`` is
    resampled from its closed form, so the two sides share no samples.  The
    pulled-back form is degenerate at the ramification points; no
    admissibility check is made.
    """
    base_form = base_form if base_form is not None else fubini_study_form(psi.grid)
    base_form = base_form.resample(psi.grid)
    d = cover.d
    grid = grid or Grid(psi.grid.T / d, psi.grid.N + 2)
    pulled_form = pullback_form(cover, base_form, grid)
    pulled_psi = RadialPotential(grid, psi.at(d * grid.t), (d * psi.slopes[0], d * psi.slopes[1]))
    lhs = functional_F0(pulled_form, pulled_psi).definition
    rhs = functional_F0(base_form, psi).definition
    return IdentityCheck(lhs, rhs)


@dataclass(frozen=True)
class LiftingProbe:
    margins: tuple[float, ...]

    @property
    def empirical_constant(self) -> float:
        return -min(self.margins)

    def to_dict(self) -> dict:
        return {"margins": list(self.margins), "empirical_constant": self.empirical_constant}


def lifting_margin(cover: FermatCover, phi: RadialPotential, omega: ReducedForm, pulled: ReducedForm) -> float:
    scale = float(cover.scaling)
    V = omega.mass
    lhs = functional_F0(omega, phi).definition
    integral = pulled.pair(np.exp(-scale * phi.values))
    return lhs - float(np.log(integral / V)) / scale


def lifting_inequality_probe(
    cover: FermatCover, phis: list[RadialPotential], base_form: ReducedForm | None = None
) -> LiftingProbe:
    """Per-potential margin ``F0_omega(phi) - (1/(1+beta)) log[(1/V) int e^{-(1+beta) phi} pi^* omega_N]``.

    A constant potential has margin ``-log(d)/d``.  Only boundedness below
    over the sample is meaningful; the constant of the lifting bound itself
    is not computable here.
    """
    if not phis:
        raise ValueError("need at least one potential")
    grid = phis[0].grid
    base_form = base_form if base_form is not None else fubini_study_form()
    omega = fubini_study_form(grid)
    pulled = pullback_form(cover, base_form, grid)
    return LiftingProbe(tuple(lifting_margin(cover, phi, omega, pulled) for phi in phis))


def beta_from_masses(pulled: ReducedForm, omega: ReducedForm, max_denominator: int = 1000) -> Fraction:
    """``beta`` read off ``d V_N = (1 + beta) V`` from numerically integrated masses."""
    ratio = Fraction(pulled.total_mass() / omega.total_mass()).limit_denominator(max_denominator)
    return ratio - 1
