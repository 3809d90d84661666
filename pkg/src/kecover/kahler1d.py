"""Circle-invariant Kahler calculus on P^1 in the log-radial coordinate.

A point ``z`` of ``C^*`` is described by ``t = log|z|^2`` and the angle
``theta``.  For a radial function ``u(t)``::

    i ddbar u = u''(t) dt ^ dtheta,        i du ^ dbar u = u'(t)^2 dt ^ dtheta,

so a circle-invariant closed (1,1)-form is a density ``rho(t)`` against
``dt dtheta`` and integrals pick up a flat factor ``2 pi``.  The round form
``i dz ^ dzbar / (1 + |z|^2)^2 = i ddbar log(1 + |z|^2)`` has density
``e^t / (1 + e^t)^2`` and mass ``2 pi``.

Potentials and densities are sampled on a uniform window ``[-T, T]``.  Mass
outside the window is carried as two tail masses; potentials are continued
linearly past the window using their asymptotic slopes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * np.pi
# i ddbar u = KAPPA * u''(t) dt ^ dtheta for t = log|z|^2
KAPPA = 1.0
# total mass of a Kahler form in 2 pi c_1(P^1)
KE_MASS = 4.0 * np.pi
DEFAULT_T = 12.0
DEFAULT_N = 4096
FD_ORDER = 4


class GridMismatch(ValueError):
    pass


class NotAdmissible(ValueError):
    pass


class NonPositiveForm(ValueError):
    pass


class ClassMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    j_agreement: float = 1e-6
    f0_agreement: float = 1e-6
    f0_absolute: float = 1e-9
    cocycle: float = 1e-6
    scaling: float = 1e-8
    constant_invariance: float = 1e-8
    mass: float = 1e-8


@dataclass(frozen=True)
class Grid:
    """``N + 1`` equispaced nodes on ``[-T, T]`` (``N`` even, for Simpson's rule)."""

    T: float = DEFAULT_T
    N: int = DEFAULT_N

    def __post_init__(self) -> None:
        if self.N < 64 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 64, got {self.N}")
        if not self.T > 0:
            raise ValueError("T must be positive")

    @property
    def t(self) -> np.ndarray:
        return _nodes(self.T, self.N)

    @property
    def h(self) -> float:
        return 2.0 * self.T / self.N

    def scaled(self, factor: float) -> Grid:
        return Grid(self.T * factor, self.N)

    def refined(self) -> Grid:
        return Grid(self.T, 2 * self.N)


@lru_cache(maxsize=64)
def _nodes(T: float, N: int) -> np.ndarray:
    t = np.linspace(-T, T, N + 1)
    t.flags.writeable = False
    return t


def integrate(values: np.ndarray, grid: Grid) -> float:
    """Composite Simpson rule over the window."""
    return float(simpson(values, dx=grid.h))


# --- finite differences --------------------------------------------------------


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple[int, ...], deriv: int) -> np.ndarray:
    """Weights ``w`` with ``f^(deriv)(0) ~ sum w_j f(offsets[j])`` for unit spacing."""
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    V = np.vander(x, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    w = np.linalg.solve(V, rhs)
    w.flags.writeable = False
    return w


def derivative(values: np.ndarray, h: float, deriv: int = 1, order: int = FD_ORDER) -> np.ndarray:
    """Centered finite-difference derivative, one-sided stencils at the window edges."""
    if deriv not in (1, 2) or order not in (2, 4):
        raise ValueError("supported: first/second derivative at order 2 or 4")
    values = np.asarray(values, dtype=float)
    n = values.size
    half = order // 2
    out = np.empty(n)
    centered = fd_weights(tuple(range(-half, half + 1)), deriv)
    interior = np.zeros(n - 2 * half)
    for j, w in enumerate(centered):
        interior += w * values[j : n - 2 * half + j]
    out[half : n - half] = interior
    width = order + deriv  # points needed for a one-sided stencil of this accuracy
    for i in range(half):
        w = fd_weights(tuple(range(-i, width - i)), deriv)
        out[i] = w @ values[:width]
        out[n - 1 - i] = (-1) ** deriv * w @ values[::-1][:width]
    return out / h**deriv


# --- potentials ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialPotential:
    """Sampled circle-invariant potential ``u(t)`` with linear continuation past the window."""

    grid: Grid
    values: np.ndarray
    slopes: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.N + 1,):
            raise GridMismatch(f"expected {self.grid.N + 1} samples, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("potential samples must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray], slopes=(0.0, 0.0)) -> RadialPotential:
        return cls(grid, fn(grid.t), slopes)

    @classmethod
    def constant(cls, grid: Grid, c: float) -> RadialPotential:
        return cls(grid, np.full(grid.N + 1, float(c)))

    def derivative(self, deriv: int = 1, order: int = FD_ORDER) -> np.ndarray:
        return derivative(self.values, self.grid.h, deriv, order)

    def at(self, t) -> np.ndarray:
        """Evaluate anywhere: cubic spline inside the window, linear continuation outside."""
        t = np.asarray(t, dtype=float)
        spline = CubicSpline(self.grid.t, self.values)
        T = self.grid.T
        inside = np.clip(t, -T, T)
        out = spline(inside)
        out = np.where(t < -T, self.values[0] + self.slopes[0] * (t + T), out)
        out = np.where(t > T, self.values[-1] + self.slopes[1] * (t - T), out)
        return out

    def _combine(self, other, op) -> RadialPotential:
        if isinstance(other, RadialPotential):
            if other.grid != self.grid:
                raise GridMismatch("potentials live on different grids")
            return RadialPotential(
                self.grid,
                op(self.values, other.values),
                (op(self.slopes[0], other.slopes[0]), op(self.slopes[1], other.slopes[1])),
            )
        return RadialPotential(self.grid, op(self.values, float(other)), self.slopes)

    def __add__(self, other) -> RadialPotential:
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other) -> RadialPotential:
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self) -> RadialPotential:
        return self * -1.0

    def __mul__(self, c: float) -> RadialPotential:
        c = float(c)
        return RadialPotential(self.grid, self.values * c, (self.slopes[0] * c, self.slopes[1] * c))

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> RadialPotential:
        return self * (1.0 / float(c))

    def to_csv(self) -> str:
        lines = ["t,u"] + [f"{t:.17g},{u:.17g}" for t, u in zip(self.grid.t, self.values)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> RadialPotential:
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        t = np.array([float(r[0]) for r in rows])
        u = np.array([float(r[1]) for r in rows])
        grid = Grid(float(t[-1]), len(t) - 1)
        if not np.allclose(t, grid.t, rtol=0, atol=1e-12 * grid.T):
            raise GridMismatch("CSV nodes are not a symmetric uniform grid")
        return cls(grid, u)


# --- forms -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReducedForm:
    """Density ``rho(t)`` of a circle-invariant closed (1,1)-form against ``dt dtheta``.

    ``mass`` is the total mass ``V`` of the class; ``tails`` hold the mass
    beyond ``-T`` and beyond ``+T``.  Forms known in closed form also carry
    ``profile`` (density on the whole line) and ``cumulative`` (mass of
    ``(-oo, t]``) so they can be resampled.
    """

    grid: Grid
    density: np.ndarray
    mass: float
    tails: tuple[float, float]
    profile: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    cumulative: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        density = np.array(self.density, dtype=float)
        if density.shape != (self.grid.N + 1,):
            raise GridMismatch(f"expected {self.grid.N + 1} samples, got {density.shape}")
        density.flags.writeable = False
        object.__setattr__(self, "density", density)

    def total_mass(self) -> float:
        """Window quadrature plus tail masses (should reproduce ``mass``)."""
        return TWO_PI * integrate(self.density, self.grid) + self.tails[0] + self.tails[1]

    def pair(self, u) -> float:
        """``int u * form`` over P^1, ``u`` constant past the window."""
        values = u.values if isinstance(u, RadialPotential) else np.asarray(u, dtype=float)
        return TWO_PI * integrate(values * self.density, self.grid) + values[0] * self.tails[0] + values[-1] * self.tails[1]

    def resample(self, grid: Grid) -> ReducedForm:
        if grid == self.grid:
            return self
        if self.profile is None or self.cumulative is None:
            raise GridMismatch("only closed-form forms can be resampled")
        return _from_profile(grid, self.profile, self.cumulative, self.mass)

    def scaled(self, lam: float) -> ReducedForm:
        lam = float(lam)
        profile = cumulative = None
        if self.profile is not None and self.cumulative is not None:
            p, c = self.profile, self.cumulative
            profile = lambda t: lam * p(t)  # noqa: E731
            cumulative = lambda t: lam * c(t)  # noqa: E731
        return ReducedForm(
            self.grid, lam * self.density, lam * self.mass, (lam * self.tails[0], lam * self.tails[1]), profile, cumulative
        )


def _from_profile(grid: Grid, profile, cumulative, mass: float) -> ReducedForm:
    T = grid.T
    lo = float(cumulative(np.array([-T]))[0])
    hi = float(mass - cumulative(np.array([T]))[0])
    return ReducedForm(grid, profile(grid.t), mass, (lo, hi), profile, cumulative)


def _logistic(t: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(t, dtype=float)))


def _logistic_tail(t: np.ndarray) -> np.ndarray:
    """``1 - logistic(t)`` without cancellation."""
    return 0.5 * (1.0 - np.tanh(0.5 * np.asarray(t, dtype=float)))


def fubini_study_form(grid: Grid | None = None, scale: float = 2.0) -> ReducedForm:
    """``scale`` times the round form; the default ``scale=2`` has mass ``4 pi`` (class ``2 pi c_1``)."""
    grid = grid or Grid()
    scale = float(scale)
    profile = lambda t: scale * 0.25 / np.cosh(0.5 * np.asarray(t, dtype=float)) ** 2  # noqa: E731
    cumulative = lambda t: TWO_PI * scale * _logistic(t)  # noqa: E731
    form = _from_profile(grid, profile, cumulative, TWO_PI * scale)
    # the upper tail from (mass - cumulative) loses digits; use the complementary logistic
    upper = float(TWO_PI * scale * _logistic_tail(np.array([grid.T]))[0])
    return replace(form, tails=(form.tails[0], upper))


def ma_density(form: ReducedForm, phi: RadialPotential, kappa: float = KAPPA, order: int = FD_ORDER) -> ReducedForm:
    """The form ``omega + i ddbar phi``: density ``rho + kappa u''`` and shifted tail masses."""
    if phi.grid != form.grid:
        raise GridMismatch(f"potential grid {phi.grid} differs from form grid {form.grid}")
    d1 = phi.derivative(1, order)
    d2 = phi.derivative(2, order)
    tails = (form.tails[0] + TWO_PI * kappa * d1[0], form.tails[1] - TWO_PI * kappa * d1[-1])
    return ReducedForm(form.grid, form.density + kappa * d2, form.mass, tails)


def _ddbar_pair(phi: RadialPotential, u: RadialPotential, kappa: float, order: int) -> float:
    """``int u * i ddbar phi`` with the same boundary bookkeeping as :func:`ma_density`."""
    d1 = phi.derivative(1, order)
    d2 = phi.derivative(2, order)
    grid = phi.grid
    return TWO_PI * kappa * (
        integrate(u.values * d2, grid) + u.values[0] * d1[0] - u.values[-1] * d1[-1]
    )


def is_admissible(form: ReducedForm, phi: RadialPotential, kappa: float = KAPPA) -> bool:
    return bool(np.all(ma_density(form, phi, kappa).density > 0))


def _require_admissible(form: ReducedForm, phi: RadialPotential, kappa: float) -> None:
    if not is_admissible(form, phi, kappa):
        raise NotAdmissible("omega + i ddbar phi is not positive on the grid")


# --- functionals -------------------------------------------------------------------


def functional_I(form: ReducedForm, phi: RadialPotential, *, check: bool = True, kappa: float = KAPPA) -> float:
    """``(1/V) int phi (omega - omega_phi)``."""
    if check:
        _require_admissible(form, phi, kappa)
    omega_phi = ma_density(form, phi, kappa)
    return (form.pair(phi) - omega_phi.pair(phi)) / form.mass


@dataclass(frozen=True)
class JValues:
    quadrature: float
    donaldson: float
    parts: float

    def spread(self) -> float:
        vals = (self.quadrature, self.donaldson, self.parts)
        return max(vals) - min(vals)


@lru_cache(maxsize=8)
def _gauss01(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def functional_J(
    form: ReducedForm, phi: RadialPotential, *, nodes: int = 32, check: bool = True, kappa: float = KAPPA
) -> JValues:
    """``J`` three ways: s-quadrature of ``I(s phi)/s``, the mixed-volume sum, and by parts."""
    if nodes < 32:
        raise ValueError("use at least 32 Gauss nodes")
    if check:
        _require_admissible(form, phi, kappa)
    s, w = _gauss01(nodes)
    quad = sum(wi * functional_I(form, si * phi, check=False, kappa=kappa) / si for si, wi in zip(s, w))
    V = form.mass
    donaldson = -0.5 * _ddbar_pair(phi, phi, kappa, FD_ORDER) / V
    # i du ^ dbar u = u'^2 dt dtheta, independent of kappa
    du = phi.derivative(1)
    parts = 0.5 * TWO_PI * integrate(du * du, phi.grid) / V
    return JValues(float(quad), float(donaldson), float(parts))


@dataclass(frozen=True)
class F0Values:
    definition: float
    donaldson: float


def functional_F0(form: ReducedForm, phi: RadialPotential, *, check: bool = False, kappa: float = KAPPA) -> F0Values:
    """``J(phi) - (1/V) int phi omega`` and its mixed-volume form."""
    if check:
        _require_admissible(form, phi, kappa)
    V = form.mass
    mean = form.pair(phi) / V
    J = functional_J(form, phi, check=False, kappa=kappa)
    definition = J.quadrature - mean
    donaldson = -(form.pair(phi) + 0.5 * _ddbar_pair(phi, phi, kappa, FD_ORDER)) / V
    return F0Values(float(definition), float(donaldson))


def ricci_potential(form: ReducedForm, *, class_rtol: float = 1e-9) -> RadialPotential:
    """``f`` with ``Ric(omega) = omega + i ddbar f`` and ``int e^f omega = V``.

    With ``omega = rho dt dtheta = g i dz ^ dzbar``, ``g = rho e^{-t}`` and
    ``Ric = -i ddbar log g``, so ``f = -log rho + t - Phi + const`` where
    ``Phi'' = rho``.  ``Phi`` is obtained by integrating the cumulative mass
    twice; the constant is fixed by the normalization.
    """
    if not np.all(form.density > 0):
        raise NonPositiveForm("the form must be strictly positive to define its Ricci form")
    if abs(form.mass - KE_MASS) > class_rtol * KE_MASS:
        raise ClassMismatch(f"form has mass {form.mass:.12g}, not 4 pi: it is not in 2 pi c_1")
    grid = form.grid
    mu = form.tails[0] + TWO_PI * cumulative_simpson(form.density, dx=grid.h, initial=0.0)
    phi_big = cumulative_simpson(mu / TWO_PI, dx=grid.h, initial=0.0)
    f = -np.log(form.density) + grid.t - phi_big
    f -= f[grid.N // 2]
    norm = form.pair(np.exp(f))
    f += np.log(form.mass / norm)
    return RadialPotential(grid, f)


def functional_A(
    form: ReducedForm,
    phi: RadialPotential,
    f: RadialPotential | None = None,
    *,
    check: bool = True,
    kappa: float = KAPPA,
) -> float:
    """``log[(1/V) int e^{f - phi} omega]``."""
    if check:
        _require_admissible(form, phi, kappa)
    f = f if f is not None else ricci_potential(form)
    return float(np.log(form.pair(np.exp(f.values - phi.values)) / form.mass))


@dataclass(frozen=True)
class FunctionalReport:
    I: float
    J_quadrature: float
    J_donaldson: float
    J_parts: float
    F0_donaldson: float
    F0_definition: float
    A: float
    F: float

    def to_dict(self) -> dict[str, float]:
        return dict(vars(self))


def functional_F(
    form: ReducedForm,
    phi: RadialPotential,
    f: RadialPotential | None = None,
    *,
    check: bool = True,
    kappa: float = KAPPA,
) -> FunctionalReport:
    """All functionals at once; ``F = F0 - A``."""
    if check:
        _require_admissible(form, phi, kappa)
    f = f if f is not None else ricci_potential(form)
    I = functional_I(form, phi, check=False, kappa=kappa)
    J = functional_J(form, phi, check=False, kappa=kappa)
    F0 = functional_F0(form, phi, kappa=kappa)
    A = functional_A(form, phi, f, check=False, kappa=kappa)
    return FunctionalReport(I, J.quadrature, J.donaldson, J.parts, F0.donaldson, F0.definition, A, F0.definition - A)


def q_normalize(form: ReducedForm, phi: RadialPotential, f: RadialPotential | None = None) -> RadialPotential:
    """Shift ``phi`` by ``A(phi)`` so that the shifted potential has ``A = 0``."""
    return phi + functional_A(form, phi, f)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative(self) -> float:
        return self.residual / max(1.0, abs(self.lhs), abs(self.rhs))


def cocycle_check(
    form0: ReducedForm, phi01: RadialPotential, phi12: RadialPotential, *, kappa: float = KAPPA
) -> IdentityCheck:
    """``F0_{w0}(phi01 + phi12)`` against ``F0_{w0}(phi01) + F0_{w1}(phi12)``, ``w1 = w0 + i ddbar phi01``."""
    form1 = ma_density(form0, phi01, kappa)
    lhs = functional_F0(form0, phi01 + phi12, kappa=kappa).definition
    rhs = functional_F0(form0, phi01, kappa=kappa).definition + functional_F0(form1, phi12, kappa=kappa).definition
    return IdentityCheck(lhs, rhs)


def scaling_check(lam: float, form: ReducedForm, phi: RadialPotential, *, kappa: float = KAPPA) -> IdentityCheck:
    """``F0_{lam w}(lam phi)`` against ``lam F0_w(phi)``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    lhs = functional_F0(form.scaled(lam), lam * phi, kappa=kappa).definition
    rhs = lam * functional_F0(form, phi, kappa=kappa).definition
    return IdentityCheck(lhs, rhs)


# --- sample potentials ---------------------------------------------------------------


def bump_potential(grid: Grid, center: float = 0.0, width: float = 1.0, amplitude: float = 1.0) -> RadialPotential:
    """Smooth bump ``amplitude * exp(1 - 1/(1 - y^2))``, ``y = (t - center)/width``, support ``|y| < 1``.

    The bump varies on a scale much shorter than ``width`` near the ends of
    its support; at the default grid use ``width >= 2``.
    """
    y = (grid.t - center) / width
    inside = np.abs(y) < 1.0
    vals = np.zeros_like(y)
    vals[inside] = np.exp(1.0 - 1.0 / (1.0 - y[inside] ** 2))
    return RadialPotential(grid, amplitude * vals)


def moment_polynomial_potential(grid: Grid, coeffs, constant: float = 0.0) -> RadialPotential:
    """``u(t) = g(x) + constant`` with ``x = e^t / (1 + e^t)`` and ``g`` the power series ``coeffs``.

    Polynomials in the moment coordinate are smooth on all of P^1.  Against
    the round form of mass ``4 pi``, ``omega_u > 0`` exactly when
    ``2 + (x (1 - x) g')' > 0`` on ``[0, 1]``.
    """
    g = np.polynomial.Polynomial(coeffs)
    x = _logistic(grid.t)
    return RadialPotential(grid, g(x) + constant)


def positivity_defect(coeffs) -> float:
    """``max_{[0,1]} |(x(1-x) g')'|`` for the polynomial ``g``."""
    g = np.polynomial.Polynomial(coeffs)
    h = (np.polynomial.Polynomial([0, 1, -1]) * g.deriv()).deriv()
    critical = [r.real for r in h.deriv().roots() if abs(r.imag) < 1e-12 and 0 <= r.real <= 1] if h.degree() > 1 else []
    xs = np.array([0.0, 1.0, *critical])
    return float(np.max(np.abs(h(xs))))


def random_admissible_potential(
    grid: Grid,
    rng: np.random.Generator,
    amplitude: float | None = None,
    form_scale: float = 2.0,
    degree: int | None = None,
    with_constant: bool = True,
) -> RadialPotential:
    """Random moment-polynomial potential admissible for ``form_scale`` times the round form.

    The polynomial is normalized so ``max |(x(1-x) g')'| = 1``; positivity then
    holds for any ``amplitude < form_scale``.  Default amplitude is drawn from
    ``[0.05, 0.9] * form_scale``.
    """
    degree = degree or int(rng.integers(2, 7))
    coeffs = np.concatenate([[0.0], rng.normal(size=degree)])
    defect = positivity_defect(coeffs)
    if amplitude is None:
        amplitude = float(rng.uniform(0.05, 0.9)) * form_scale
    if amplitude >= form_scale:
        raise ValueError("amplitude must stay below the form scale to remain admissible")
    constant = float(rng.uniform(-1.0, 1.0)) if with_constant else 0.0
    return moment_polynomial_potential(grid, coeffs * (amplitude / defect), constant)
