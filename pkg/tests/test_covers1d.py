from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kecover.covers1d import (
    FermatCover,
    beta_from_masses,
    calibrate_kappa,
    descend_potential,
    lift_potential,
    lifting_inequality_probe,
    pullback_F0_check,
    pullback_form,
    pullback_potential,
    u_potential,
)
from kecover.divisor_algebra import class_scaling_factor, ramification_class, FermatCoverP1
from kecover.kahler1d import (
    KAPPA,
    Grid,
    RadialPotential,
    bump_potential,
    fubini_study_form,
    is_admissible,
    ma_density,
    random_admissible_potential,
)

GRID = Grid()
OMEGA = fubini_study_form(GRID)


def test_cover_invariants():
    for d in range(2, 8):
        cover = FermatCover(d)
        assert cover.beta == d - 1
        assert class_scaling_factor(cover.beta) == d
        assert ramification_class(FermatCoverP1(d)).coeff == 2 * (d - 1)
    assert FermatCover(1).beta == 0
    with pytest.raises(ValueError):
        FermatCover(0)


def test_identity_cover_leaves_form_unchanged():
    pulled = pullback_form(FermatCover(1), OMEGA)
    assert np.array_equal(pulled.density, OMEGA.density)
    assert pulled.grid == OMEGA.grid and pulled.tails == OMEGA.tails
    assert np.max(np.abs(u_potential(FermatCover(1), GRID).values)) == 0.0


@pytest.mark.parametrize("d", range(1, 8))
def test_pullback_mass(d):
    cover = FermatCover(d)
    for pulled in (pullback_form(cover, OMEGA), pullback_form(cover, OMEGA, GRID)):
        assert pulled.total_mass() == pytest.approx(4 * np.pi * d, rel=1e-9)
        assert pulled.mass == pytest.approx(4 * np.pi * d, rel=1e-15)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_beta_from_mass_arithmetic_is_exact(d):
    cover = FermatCover(d)
    assert beta_from_masses(pullback_form(cover, OMEGA, GRID), OMEGA) == cover.beta


def test_pulled_density_is_compressed_profile():
    cover = FermatCover(3)
    pulled = pullback_form(cover, OMEGA, GRID)
    t = GRID.t
    assert np.allclose(pulled.density, 9 * 0.5 / np.cosh(1.5 * t) ** 2, rtol=1e-13, atol=0)


def test_u_potential_values():
    u = u_potential(FermatCover(2), GRID)
    # with the 2 pi c_1 normalization the closed form carries the factor 2 of the round form
    assert u.at(np.array([0.0]))[0] == pytest.approx(2 * (np.log(2) - 2 * np.log(2)), abs=1e-12)
    assert abs(u.values[0]) < 1e-4 and abs(u.values[-1]) < 1e-4
    for d in (3, 5):
        v = u_potential(FermatCover(d), GRID).values
        assert np.all(v <= 0) and np.isfinite(v).all()


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_u_potential_matches_pullback(d):
    cover = FermatCover(d)
    u = u_potential(cover, GRID)
    predicted = ma_density(OMEGA.scaled(float(cover.scaling)), u)
    exact = pullback_form(cover, OMEGA, GRID)
    assert np.max(np.abs(predicted.density - exact.density)) / np.max(exact.density) < 1e-7
    assert predicted.tails == pytest.approx(exact.tails, abs=1e-8)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_calibrated_kappa(d):
    assert calibrate_kappa(FermatCover(d)) == pytest.approx(KAPPA, rel=1e-7)


def test_descend_definitional_cases():
    cover = FermatCover(3)
    u = u_potential(cover, GRID)
    psi = descend_potential(cover, u / 3.0)
    assert np.max(np.abs(psi.values)) < 1e-14
    c = RadialPotential.constant(GRID, 0.5)
    psi = descend_potential(cover, c)
    assert np.allclose(psi.values, 1.5 - u.values, atol=1e-14)
    assert np.ptp(psi.values) > 0.1


@pytest.mark.parametrize("d", [2, 3, 5])
def test_descend_round_trip(d):
    cover = FermatCover(d)
    rng = np.random.default_rng(d)
    for _ in range(100):
        phi = random_admissible_potential(GRID, rng)
        psi = descend_potential(cover, phi)
        assert psi.grid == GRID.scaled(d)
        back = lift_potential(cover, psi)
        assert np.max(np.abs(back.values - phi.values)) < 1e-8


def test_descent_off_grid_uses_interpolation():
    cover = FermatCover(2)
    phi = random_admissible_potential(GRID, np.random.default_rng(1))
    psi = descend_potential(cover, phi)
    u = u_potential(cover, GRID)
    t = np.linspace(-5, 5, 37) + 1e-3
    assert np.max(np.abs(psi.at(2 * t) - (2 * phi.at(t) - u.at(t)))) < 1e-8


def test_descended_potential_is_admissible_on_base():
    cover = FermatCover(2)
    phi = random_admissible_potential(GRID, np.random.default_rng(3))
    psi = descend_potential(cover, phi)
    assert is_admissible(fubini_study_form(psi.grid), psi)


def test_pullback_potential_rescales_grid():
    psi = random_admissible_potential(GRID, np.random.default_rng(9))
    pulled = pullback_potential(FermatCover(4), psi)
    assert pulled.grid == GRID.scaled(0.25)
    assert np.array_equal(pulled.values, psi.values)


@pytest.mark.parametrize("c", [0.0, 1.3])
def test_pullback_F0_on_constants(c):
    psi = RadialPotential.constant(GRID, c)
    check = pullback_F0_check(FermatCover(3), psi)
    assert check.lhs == pytest.approx(-c, abs=1e-10)
    assert check.rhs == pytest.approx(-c, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.floats(-3, 3), st.floats(2, 5), st.floats(0.01, 0.2))
def test_pullback_F0_on_bumps(d, centre, width, amplitude):
    psi = bump_potential(GRID, centre, width, amplitude)
    assert pullback_F0_check(FermatCover(d), psi).relative < 1e-6


def test_lifting_margin_of_constants():
    for d in (2, 3, 5):
        probe = lifting_inequality_probe(FermatCover(d), [RadialPotential.constant(GRID, c) for c in (-2.0, 0.0, 4.0)])
        expected = -np.log(d) / d
        assert np.allclose(probe.margins, expected, atol=1e-9)
        assert probe.empirical_constant == pytest.approx(-expected, abs=1e-9)


def test_lifting_margins_continuous_in_scale():
    cover = FermatCover(2)
    phi = random_admissible_potential(GRID, np.random.default_rng(4), amplitude=1.5, with_constant=False)
    scales = np.linspace(0.05, 1.0, 20)
    margins = np.array(lifting_inequality_probe(cover, [s * phi for s in scales]).margins)
    assert np.all(np.isfinite(margins))
    assert np.max(np.abs(np.diff(margins))) < 0.05


def test_lifting_probe_stable_under_refinement():
    cover = FermatCover(2)
    constants = []
    for grid in (GRID, GRID.refined()):
        rng = np.random.default_rng(7)
        phis = [random_admissible_potential(grid, rng) for _ in range(10)]
        phis += [bump_potential(grid, 0.0, 3.0, a) for a in (0.1, 0.05)]
        constants.append(lifting_inequality_probe(cover, phis).empirical_constant)
    assert abs(constants[1] - constants[0]) < 0.01 * abs(constants[0])


def test_probe_needs_potentials():
    with pytest.raises(ValueError):
        lifting_inequality_probe(FermatCover(2), [])
