import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from multclt.core import InvalidParameterError
from multclt.lattice import (
    EnumerationBudgetError, FlowExponent, FlowRangeError, UnimodularLattice, apply_flow,
    count_in_box, enumerate_in_box, height_of_flowed_torus_lattice, heights_flowed,
    lattice_from_alpha, successive_minima,
)
from multclt.sampling import torus_samples


def _random_unimodular(rng, spread=3):
    while True:
        M = rng.integers(-spread, spread + 1, (3, 3))
        if abs(round(np.linalg.det(M))) == 1:
            return M.astype(float)


def test_rejects_non_unimodular():
    with pytest.raises(InvalidParameterError):
        UnimodularLattice(2 * np.eye(3))
    with pytest.raises(InvalidParameterError):
        UnimodularLattice(np.eye(2))
    with pytest.raises(InvalidParameterError):
        lattice_from_alpha(math.nan, 0.1)


def test_basis_is_read_only_and_hashable():
    L = lattice_from_alpha(0.25, 0.5)
    with pytest.raises(ValueError):
        L.basis[0, 0] = 3.0
    assert L == lattice_from_alpha(0.25, 0.5)
    assert hash(L) == hash(lattice_from_alpha(0.25, 0.5))
    assert L.det == 1.0 and L.is_upper_triangular()


def test_flow_round_trip_and_range():
    L = lattice_from_alpha(0.3, 0.7)
    t = FlowExponent(1.5, -0.25)
    back = apply_flow(-t, apply_flow(t, L))
    assert np.allclose(back.basis, L.basis, rtol=0, atol=1e-14)
    assert apply_flow(t, L).det == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(FlowRangeError):
        apply_flow((800.0, 0.0), L)
    with pytest.raises(FlowRangeError):
        FlowExponent(math.inf, 0).scales()


def test_enumeration_matches_brute_force_torus():
    rng = np.random.default_rng(4)
    for _ in range(15):
        x = rng.random(2)
        n = rng.uniform(0, 2, 2)
        B = oracles.flowed_torus_basis(*x, n)
        lo = rng.uniform(-3, 0, 3)
        hi = lo + rng.uniform(0.5, 3, 3)
        got = sorted(map(tuple, enumerate_in_box(UnimodularLattice(B), lo, hi)))
        want = sorted(map(tuple, oracles.ball_points(B, float(np.max(np.abs(np.r_[lo, hi]))))))
        want = [v for v in want if all(lo[i] <= v[i] <= hi[i] for i in range(3))]
        assert got == want
        assert count_in_box(UnimodularLattice(B), lo, hi) == len(want)


def _canonical(pts):
    pts = np.asarray(pts).reshape(-1, 3)
    return pts[np.lexsort(np.round(pts, 9).T[::-1])]


def test_enumeration_matches_brute_force_generic():
    rng = np.random.default_rng(5)
    for _ in range(15):
        B = np.diag([1.7, 1 / 1.7, 1.0]) @ _random_unimodular(rng)
        lo = rng.uniform(-3, 0, 3)
        hi = lo + rng.uniform(0.5, 3, 3)
        got = _canonical(enumerate_in_box(UnimodularLattice(B), lo, hi))
        pts = oracles.ball_points(B, float(np.max(np.abs(np.r_[lo, hi]))))
        want = _canonical(pts[np.all((pts >= lo) & (pts <= hi), axis=1)])
        # the library scans an LLL-reduced basis, so coordinates may differ in the last bits
        assert got.shape == want.shape
        assert np.allclose(got, want, rtol=0, atol=1e-12)


def test_origin_excluded():
    L = lattice_from_alpha(0.1, 0.2)
    assert count_in_box(L, (-0.01, -0.01, -0.01), (0.01, 0.01, 0.01)) == 0
    assert len(enumerate_in_box(L, (0, 0, 0), (0, 0, 0))) == 0


def test_budget_error():
    L = UnimodularLattice(np.diag([1.7, 1 / 1.7, 1.0]) @ np.array([[1.0, 1, 0], [0, 1, 0], [0, 0, 1]]))
    with pytest.raises(EnumerationBudgetError):
        count_in_box(L, (-50, -50, -50), (50, 50, 50), budget=1000)


def test_box_validation():
    L = lattice_from_alpha(0.1, 0.2)
    with pytest.raises(InvalidParameterError):
        count_in_box(L, (1, 0, 0), (0, 1, 1))
    with pytest.raises(InvalidParameterError):
        count_in_box(L, (0, 0), (1, 1))


def test_minima_match_oracle():
    rng = np.random.default_rng(6)
    for _ in range(25):
        x = rng.random(2)
        n = rng.uniform(0, 4, 2)
        B = oracles.flowed_torus_basis(*x, n)
        r = successive_minima(UnimodularLattice(B))
        s1, s1s = oracles.minima_brute(B)
        assert r.s1 == pytest.approx(s1, rel=1e-9)
        assert r.s1_star == pytest.approx(s1s, rel=1e-9)
        assert r.d == 1.0
        assert r.height == pytest.approx(1 / min(s1, s1s, 1.0), rel=1e-9)


def test_minima_generic_lattices():
    rng = np.random.default_rng(7)
    for _ in range(10):
        B = np.diag([1.3, 1 / 1.3, 1.0]) @ _random_unimodular(rng)
        r = successive_minima(UnimodularLattice(B))
        s1, s1s = oracles.minima_brute(B)
        assert r.s1 == pytest.approx(s1, rel=1e-9)
        assert r.s1_star == pytest.approx(s1s, rel=1e-9)


def test_height_at_identity_flow_is_one():
    for x1, x2 in torus_samples(50, seed=8):
        assert height_of_flowed_torus_lattice(x1, x2, (0, 0)) == 1.0


def test_height_worked_value():
    # exhaustive-enumeration oracle: 3.535232432508...
    x = (math.sqrt(2) - 1, math.sqrt(3) - 1)
    h = height_of_flowed_torus_lattice(*x, (2, 3))
    assert h == pytest.approx(3.535232432508, rel=1e-9)
    assert h == pytest.approx(oracles.height_brute(oracles.flowed_torus_basis(*x, (2, 3))), rel=1e-9)


def test_heights_flowed_vectorised():
    xs = torus_samples(40, seed=9)
    h = heights_flowed(xs, (1.5, 2.0))
    assert np.allclose(h, [height_of_flowed_torus_lattice(x1, x2, (1.5, 2.0)) for x1, x2 in xs], rtol=1e-12)
    assert np.all(h >= 1.0)
    with pytest.raises(InvalidParameterError):
        heights_flowed(xs, (-1, 0))


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True),
       st.floats(0, 3), st.floats(0, 3))
def test_height_properties(x1, x2, n1, n2):
    r = successive_minima(apply_flow((n1, n2), lattice_from_alpha(x1, x2)))
    # Minkowski: the unit cube has volume 8 = 2^3 covol, so s1 <= 1
    assert 0 < r.s1 <= 1 + 1e-12
    assert r.height >= 1.0
    assert r.height == pytest.approx(1 / min(r.s1, r.s1_star, 1.0))
