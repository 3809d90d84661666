import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from kecover.criteria import (
    CoverDescriptor,
    CoverSystem,
    Criterion,
    DomainError,
    NonPositiveExponent,
    alpha_constants,
    check_disjoint_system,
    check_single_cover,
    check_transverse_system,
    check_with_exponent,
    decide,
    exponent_lower_bound,
    system_from_json,
    system_to_json,
)
from kecover.divisor_algebra import HypersurfaceInP, model_beta


def cover(d=2, beta=Fraction(1), **flags):
    return CoverDescriptor(d=d, beta=Fraction(beta), **flags)


def test_disjoint_system_accepts_when_all_flags_hold():
    system = CoverSystem((cover(), cover(3, 2)), ramifications_disjoint=True)
    verdict = check_disjoint_system(system)
    assert verdict.ke_proven and verdict.criterion_used is Criterion.DISJOINT


def test_disjoint_system_reports_first_failed_hypothesis():
    system = CoverSystem((cover(), cover(base_has_KE=False)), ramifications_disjoint=True)
    verdict = check_disjoint_system(system)
    assert not verdict.ke_proven
    assert verdict.reason.startswith("hypothesis(1)")
    system = CoverSystem((cover(is_galois=False),), ramifications_disjoint=True)
    assert check_disjoint_system(system).reason.startswith("hypothesis(2)")


def test_disjoint_cubic_surface_with_four_covers():
    # cubic surface x0^3 + ... + x3^3 = 0: the four ramification sections have no common point
    beta = model_beta(HypersurfaceInP(2, 3))
    system = CoverSystem((cover(3, beta),) * 4, ramifications_disjoint=True)
    assert check_disjoint_system(system).ke_proven


@pytest.mark.parametrize(
    "d, beta, expected",
    [(2, 3, True), (2, 1, False), (5, 4, False), (5, Fraction(9, 2), True)],
)
def test_single_cover(d, beta, expected):
    assert check_single_cover(cover(d, beta)).ke_proven is expected


def test_transverse_cubic_threefold():
    system = CoverSystem((cover(3, 1),) * 3, ramifications_transverse_smooth=True)
    verdict = check_transverse_system(system)
    assert verdict.ke_proven
    assert verdict.witness["harmonic_sum"] == Fraction(3, 2)


def test_transverse_two_quadrics_and_boundary():
    system = CoverSystem((cover(2, Fraction(1, 2)),) * 6, ramifications_transverse_smooth=True)
    assert check_transverse_system(system).ke_proven
    single = CoverSystem((cover(2, Fraction(1, 2)),), ramifications_transverse_smooth=True)
    assert not check_transverse_system(single).ke_proven


def test_transverse_requires_geometry_flags():
    system = CoverSystem((cover(3, 1),) * 3, ramifications_transverse_smooth=False)
    assert check_transverse_system(system).reason.startswith("hypothesis(4)")
    system = CoverSystem((cover(3, 1, reduced_ramification_smooth=False),) * 3, ramifications_transverse_smooth=True)
    assert "singular" in check_transverse_system(system).reason


def test_explicit_exponent():
    system = CoverSystem((cover(2, 3),))
    assert check_with_exponent(system, Fraction(1)).ke_proven
    assert not check_with_exponent(system, Fraction(1, 3)).ke_proven
    assert check_with_exponent(system, math.inf).ke_proven
    assert check_with_exponent(system, "1000000").ke_proven
    with pytest.raises(NonPositiveExponent):
        check_with_exponent(system, 0)
    with pytest.raises(TypeError):
        check_with_exponent(system, 0.5)


def test_exponent_lower_bounds():
    assert exponent_lower_bound(CoverSystem((cover(2, 1),))) == 1
    assert exponent_lower_bound(CoverSystem((cover(3, 1),) * 2, ramifications_transverse_smooth=True)) == 1
    assert exponent_lower_bound(CoverSystem((cover(2, 1),) * 3, ramifications_transverse_smooth=True)) == 3
    # without transversality only the worst single order is usable
    assert exponent_lower_bound(CoverSystem((cover(2, 1), cover(4, 1)))) == Fraction(1, 3)


@pytest.mark.parametrize("alpha, beta, p, c1", [("1/2", 1, "3/2", 1), ("1/2", 3, "7/6", 3)])
def test_alpha_constants(alpha, beta, p, c1):
    out = alpha_constants(alpha, beta)
    assert out == {"p": Fraction(p), "C1": Fraction(c1)}


def test_alpha_domain():
    with pytest.raises(DomainError):
        alpha_constants(1, 1)
    with pytest.raises(DomainError):
        alpha_constants("1/2", 0)


@given(
    st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100)),
    st.fractions(min_value=Fraction(1, 100), max_value=100),
)
def test_alpha_constants_identity(alpha, beta):
    out = alpha_constants(alpha, beta)
    p = out["p"]
    # (p - alpha)/(p - 1) = 1 + beta
    assert (p - alpha) / (p - 1) == 1 + beta
    assert out["C1"] == alpha * beta / (1 - alpha)


def test_decide_falls_through_criteria():
    single = CoverSystem((cover(2, 3),))
    assert decide(single).criterion_used is Criterion.SINGLE_COVER
    transverse = CoverSystem((cover(3, 1),) * 3, ramifications_transverse_smooth=True)
    assert decide(transverse).criterion_used is Criterion.TRANSVERSE_SYSTEM
    hopeless = CoverSystem((cover(2, Fraction(1, 5)),) * 2)
    verdict = decide(hopeless)
    assert not verdict.ke_proven and verdict.criterion_used is Criterion.NONE


def test_verdict_never_proven_without_criterion():
    from kecover.criteria import Verdict

    with pytest.raises(ValueError):
        Verdict(True, Criterion.NONE)


def test_json_round_trip():
    payload = {
        "covers": [
            {"d": 3, "beta": "1/2", "base_ke": True, "galois": True, "compact_group": True, "smooth_reduced": True},
            {"d": 2, "beta": "3", "base_ke": False, "galois": True, "compact_group": True, "smooth_reduced": False},
        ],
        "disjoint": False,
        "transverse": True,
    }
    system = system_from_json(json.loads(json.dumps(payload)))
    assert system.covers[0].beta == Fraction(1, 2)
    assert system_to_json(system) == payload


def test_json_rejects_float_beta():
    with pytest.raises(ValueError):
        system_from_json({"covers": [{"d": 2, "beta": 0.5}]})


def test_descriptor_validation():
    with pytest.raises(ValueError):
        CoverDescriptor(d=1, beta=Fraction(1))
    with pytest.raises(ValueError):
        CoverDescriptor(d=2, beta=Fraction(0))
