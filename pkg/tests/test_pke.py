import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pketwistor.catalog import MetricSpec, accepted_samples, build_coframe
from pketwistor.curvature import decompose, riemann, solve_levi_civita
from pketwistor.forms import CoframeSample
from pketwistor.jetcalc import Jet
from pketwistor.petrov import WeylQuartic, classify, transform
from pketwistor.pke import (NotAdaptedError, analyze, bianchi_consistency, bianchi_residual_A, closed_form_curvature_A,
                            connection_A, curvature_A, curvature_B, extract_J, semibasic_residual, torsion_part_A,
                            transform_coframe, typeD_bianchi_residuals, verify_pke, yang_mills_A)

from helpers import PKE_FAMILIES, samples

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("family", PKE_FAMILIES)
@pytest.mark.parametrize("psi2p", [1.0, -0.6, 2.3])
def test_pke_axioms_hold(family, psi2p):
    for _, cof in samples(family, 4, seed=5, psi2p=psi2p):
        rep = verify_pke(cof)
        assert rep.passed(1e-8), rep.failures(1e-8)
        assert rep.psi2p == pytest.approx(psi2p, abs=1e-9)


def test_perturbed_coframe_fails_with_d_rho():
    _, cof = samples("homogeneous-D", 1, seed=2)[0]
    e = cof.e.data.copy()
    xs = cof.e.space.index
    # add y3 * dy1 to theta^2 so that d(rho) picks up a dtheta^2 contribution
    e[1, 0, xs[(0, 0, 1, 0)]] += 0.3
    bad = CoframeSample(Jet(cof.e.space, e), cof.g, cof.point)
    rep = verify_pke(bad)
    assert "d_rho" in rep.failures(1e-8)


@given(seeds, st.sampled_from(["typeD-generic", "typeN", "typeII-YM", "potential"]))
@settings(max_examples=25)
def test_curvature_scalars_transform_under_gauge(s, family):
    rng = np.random.default_rng(s)
    _, cof = samples(family, 2, seed=1)[s % 2]
    while True:
        A = rng.uniform(-2, 2, (2, 2))
        if abs(np.linalg.det(A)) > 0.3 and np.linalg.cond(A) < 8:
            break
    before = analyze(cof).decomp
    after = analyze(transform_coframe(cof, A)).decomp
    predicted = transform(WeylQuartic(before.psi), A).psi
    scale = 1.0 + np.abs(predicted).max()
    assert np.abs(after.psi - predicted).max() < 1e-9 * scale
    assert after.psi_prime[2] == pytest.approx(before.psi_prime[2], abs=1e-10)
    assert classify(WeylQuartic(after.psi), scale=scale, noise=1e-12).name == \
        classify(WeylQuartic(before.psi), scale=scale, noise=1e-12).name


def test_flat_model_has_vanishing_curvature_A():
    for _, cof in samples("typeO", 5, seed=4):
        assert curvature_A(cof).norm() < 1e-9
    for _, cof in samples("typeO", 5, seed=4, psi2p=2.0):
        assert curvature_A(cof).norm() > 0.1


@pytest.mark.parametrize("family", PKE_FAMILIES)
def test_curvature_A_structure(family):
    for _, cof in samples(family, 3, seed=8, order=4, psi2p=1.4):
        curv = curvature_A(cof)
        scale = 1.0 + np.abs(curv.closed_form).max()
        assert curv.cross_check < 1e-8 * scale
        assert connection_A(cof).trace_residual() < 1e-12
        assert torsion_part_A(curv) < 1e-9 * scale
        assert semibasic_residual(curv) < 1e-8 * scale
        assert bianchi_residual_A(curv) < 1e-7 * scale


def test_closed_form_curvature_A_vanishes_only_for_flat_data():
    assert np.abs(closed_form_curvature_A(np.zeros(5), 1.0)).max() == 0.0
    assert np.abs(closed_form_curvature_A(np.zeros(5), 1.5)).max() > 0
    assert np.abs(closed_form_curvature_A([0, 0, 0, 0, 1.0], 1.0)).max() > 0


@pytest.mark.parametrize("family", PKE_FAMILIES)
@pytest.mark.parametrize("psi2p", [1.0, 1.0 + 1e-6, 0.5, -1.0])
def test_yang_mills_A_iff_unit_psi2p(family, psi2p):
    for _, cof in samples(family, 2, seed=9, psi2p=psi2p):
        ym = yang_mills_A(cof)
        assert ym.holds == (abs(psi2p - 1.0) < 1e-9)
        assert ym.psi2p_deviation == pytest.approx(abs(psi2p - 1.0), abs=1e-10)


def test_generic_type_d_invariants_closed_form():
    spec = MetricSpec("typeD-generic")
    P = spec.params
    q, k1, k2, k3, k4 = P["Psi2p"], P["k1"], P["k2"], P["k3"], P["k4"]
    for p, cof in samples("typeD-generic", 5, seed=12):
        y3, y4 = p[2], p[3]
        prof = extract_J(cof, "typeD")
        J1 = -q * y3**3 + k1 / y4 * y3**2 - k2 / y4**2 * y3 - (2 * k3 + k4) / (2 * y4**3)
        J3 = (-q * y3**3 + (3 * q + k1 / y4) * y3**2 - (3 * q + 2 * k1 / y4 + k2 / y4**2) * y3
              + q + k1 / y4 + k2 / y4**2 - k3 / y4**3)
        J41 = (2 * q * y3**3 - (3 * q + 2 * k1 / y4) * y3**2 + (2 * k1 / y4 + 2 * k2 / y4**2) * y3
               - k2 / y4**2 + (2 * k3 + k4) / y4**3)
        assert prof["J1"] == pytest.approx(J1, abs=1e-8)
        assert prof["J3"] == pytest.approx(J3, abs=1e-8)
        assert prof["J41"] == pytest.approx(J41, abs=1e-8)
        assert prof["J2"] == pytest.approx(1.0, abs=1e-8) and prof["J4"] == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("family", ["typeD-generic", "typeD-branch2", "typeD-branch3", "homogeneous-D"])
def test_type_d_bianchi_system(family):
    for _, cof in samples(family, 3, seed=6, order=4):
        res = typeD_bianchi_residuals(cof)
        assert max(res.values()) < 1e-8, res


@pytest.mark.parametrize("family", PKE_FAMILIES)
def test_bianchi_cross_relations(family):
    for _, cof in samples(family, 3, seed=6, order=4):
        rep = bianchi_consistency(cof)
        assert rep.max_cross < 1e-8
        assert rep.psi2p_gradient < 1e-8


def test_J_extraction_requires_adapted_coframe():
    _, cof = samples("typeN", 1, seed=0)[0]
    with pytest.raises(NotAdaptedError):
        extract_J(transform_coframe(cof, [[1.0, 0.7], [0.2, 1.0]]), "typeD")
    with pytest.raises(ValueError):
        extract_J(cof, "other")


def test_type_two_yang_mills_example():
    spec = MetricSpec("typeII-YM", functions={"f2": "b^2", "f4": "a"})
    for psi2p in (1.0, 0.7):
        for p, cof in accepted_samples(spec.with_params(Psi2p=psi2p), 5, seed=3):
            a, b = p[0], p[1]
            f2p, f4p = 2 * b, 1.0
            curv = curvature_B(cof)
            prof = curv.J
            assert prof["J5"] == pytest.approx(-1.5 * psi2p * f2p, abs=1e-8)
            assert prof["J6"] == pytest.approx(1.5 * psi2p * f4p, abs=1e-8)
            assert curv.off_pattern(allowed=(4,)) < 1e-8
            c = 1.5 * np.sqrt(1.5) * abs(psi2p) ** 1.5
            assert curv.sigma[0, 1, 4] == pytest.approx(c * f2p, abs=1e-8)
            assert curv.sigma[3, 2, 4] == pytest.approx(-c * f4p, abs=1e-8)
            assert curv.yang_mills_criterion()
            assert curv.anti_self_dual()


@pytest.mark.parametrize("psi2p", [1.0, -0.8])
def test_curvature_B_matches_closed_form_on_homogeneous_type_d(psi2p):
    for _, cof in samples("homogeneous-D", 3, seed=1, psi2p=psi2p):
        curv = curvature_B(cof)
        assert curv.cross_check < 1e-8
