from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pketwistor.petrov import (TYPE_NAMES, PetrovType, SingularTransformError, WeylQuartic, chordal, classify,
                               float_quartic, oracle_classify, planted_quartic, root_translation, transform)

seeds = st.integers(0, 2**32 - 1)
kinds = st.sampled_from(TYPE_NAMES)


def random_gl2(rng, exact=False):
    while True:
        if exact:
            A = [[Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) for _ in range(2)] for _ in range(2)]
            det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
        else:
            A = rng.uniform(-2, 2, (2, 2))
            det = np.linalg.det(A)
        if abs(float(det)) > 0.3 and np.linalg.cond(np.array(A, dtype=float)) < 8:
            return A


@pytest.mark.parametrize("kind", TYPE_NAMES)
def test_oracle_recovers_planted_type(kind):
    rng = np.random.default_rng(hash(kind) % 2**32)
    for _ in range(20):
        pq = planted_quartic(kind, rng)
        assert oracle_classify(pq.quartic).name == kind


@given(seeds, kinds)
def test_classifier_agrees_with_oracle(s, kind):
    rng = np.random.default_rng(s)
    pq = planted_quartic(kind, rng, min_sep=1e-2)
    got = classify(float_quartic(pq.quartic), tol=1e-3)
    assert not got.uncertain
    assert got.name == oracle_classify(pq.quartic).name == kind


def test_classifier_on_1000_planted_quartics():
    rng = np.random.default_rng(2024)
    bad = []
    for i in range(1000):
        kind = TYPE_NAMES[i % len(TYPE_NAMES)]
        pq = planted_quartic(kind, rng, min_sep=1e-2)
        want = oracle_classify(pq.quartic).name
        got = classify(float_quartic(pq.quartic), tol=1e-3)
        if got.uncertain or got.name != want:
            bad.append((i, kind, str(got), want))
    assert bad == []


@given(seeds, kinds)
def test_classification_is_gl2_invariant(s, kind):
    rng = np.random.default_rng(s)
    pq = planted_quartic(kind, rng, min_sep=0.05)
    A = random_gl2(rng, exact=True)
    moved = transform(pq.quartic, A)
    assert oracle_classify(moved).name == kind
    got = classify(float_quartic(moved), tol=1e-3)
    assert got.name == kind


@given(seeds)
def test_transform_composes(s):
    rng = np.random.default_rng(s)
    q = planted_quartic("Gr", rng).quartic
    A, B = random_gl2(rng, exact=True), random_gl2(rng, exact=True)
    BA = (np.array(B, dtype=object) @ np.array(A, dtype=object)).tolist()
    for side in ("asd", "sd"):
        qs = WeylQuartic(q.psi, side)
        assert transform(transform(qs, A), B).psi == transform(qs, BA).psi


def test_identity_and_singular_transforms():
    q = WeylQuartic((1.0, 2.0, 3.0, 4.0, 5.0))
    assert transform(q, np.eye(2)).psi == q.psi
    with pytest.raises(SingularTransformError):
        transform(q, [[1.0, 2.0], [2.0, 4.0]])


def test_root_translation_moves_root_to_zero():
    # W = (lam - 1/2)^2 (lam + 2)(lam - 3)
    q = WeylQuartic(tuple(c / b for c, b in zip(np.polynomial.polynomial.polyfromroots([0.5, 0.5, -2, 3]),
                                                 (1, 4, 6, 4, 1))))
    moved = transform(q, root_translation(0.5))
    assert abs(moved.psi[0]) < 1e-12 and abs(moved.psi[1]) < 1e-12
    assert classify(moved).name == classify(q).name == "IIr"


def test_type_o_and_scale_threshold():
    assert classify(WeylQuartic((0.0,) * 5)).name == "O"
    tiny = WeylQuartic((1e-9, 0.0, 0.0, 0.0, 0.0))
    assert classify(tiny, scale=1.0).name == "O"
    assert classify(tiny).name == "N"


def test_examples():
    # Psi2 only: W = 6 Psi2 lam^2, double roots at 0 and infinity
    assert classify(WeylQuartic((0.0, 0.0, 1.0, 0.0, 0.0))).name == "Dr"
    # lam^4 + 1 has two complex-conjugate pairs
    assert classify(WeylQuartic((1.0, 0.0, 0.0, 0.0, 1.0))).name == "Gcc"
    # lam^2 + 1 squared
    assert classify(WeylQuartic((1.0, 0.0, 2 / 6, 0.0, 1.0))).name == "Dc"
    assert classify(WeylQuartic((0.0, 0.0, 0.0, 1.0, 0.0))).name == "III"


def test_near_coincident_roots_are_flagged():
    # two simple roots at chordal distance comparable to the radius
    eps = 1.5e-3
    c = np.polynomial.polynomial.polyfromroots([0.0, eps, 1.0, -1.0])
    q = WeylQuartic(tuple(c[k] / b for k, b in enumerate((1, 4, 6, 4, 1))))
    t = classify(q, tol=1e-3)
    assert t.uncertain and set(t.candidates) >= {"Gr", "IIr"}
    assert not t.matches("Gr")


def test_tolerance_domain():
    q = WeylQuartic((1.0, 0.0, 0.0, 0.0, 1.0))
    for bad in (0.0, -1e-3, 0.5):
        with pytest.raises(ValueError):
            classify(q, tol=bad)


def test_type_metadata():
    t = PetrovType("IIr")
    assert t.group == "II" and t.matches("II") and t.matches("IIr") and not t.matches("D")
    assert PetrovType("Dr").symbol == "Dʳ"
    with pytest.raises(ValueError):
        PetrovType("X")
    with pytest.raises(ValueError):
        WeylQuartic((1.0, 2.0))


def test_chordal_distance():
    assert chordal(complex("inf"), complex("inf")) == 0.0
    assert chordal(0j, complex("inf")) == pytest.approx(1.0)
    assert chordal(1 + 0j, -1 + 0j) == pytest.approx(1.0)
