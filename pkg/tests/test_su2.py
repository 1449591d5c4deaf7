import numpy as np
import pytest

from su2kam.su2 import (
    AlgebraVector,
    CutLocusError,
    GroupElement,
    TorusElement,
    adjoint,
    diagonalize,
    exp_map,
    group_distance,
    log_map,
    root_value,
    torus_quat,
    weyl_element,
)


def random_group(rng):
    return GroupElement.projected(rng.standard_normal(4))


def random_vector(rng, scale=1.0):
    return AlgebraVector(scale * rng.standard_normal(3))


def test_exp_zero_and_e():
    assert np.allclose(exp_map(AlgebraVector.zero()).q, [1, 0, 0, 0])
    minus = exp_map(AlgebraVector.e())
    assert group_distance(minus, GroupElement.minus_identity()) < 1e-15


def test_exp_log_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(100):
        v = random_vector(rng)
        n = v.norm()
        if n >= 0.9:
            v = (0.85 / n) * v
        w = log_map(exp_map(v))
        assert np.max(np.abs(w.coords - v.coords)) < 1e-12


def test_log_examples():
    assert log_map(GroupElement.identity()).norm() == 0.0
    v = log_map(exp_map(AlgebraVector(np.array([0.3, 0.0, 0.0]))))
    assert np.allclose(v.coords, [0.3, 0, 0], atol=1e-14)
    with pytest.raises(CutLocusError):
        log_map(GroupElement.minus_identity())


def test_exp_homomorphism_on_torus():
    rng = np.random.default_rng(1)
    for _ in range(50):
        s, t = rng.uniform(-3, 3, size=2)
        lhs = GroupElement(torus_quat(s + t))
        rhs = GroupElement(torus_quat(s)) * GroupElement(torus_quat(t))
        assert group_distance(lhs, rhs) < 1e-12


def test_center_lattice():
    for n in range(-4, 5):
        q = torus_quat(float(n))
        assert abs(abs(q[0]) - 1.0) < 1e-12  # exp(n e) is central
        even = torus_quat(2.0 * n)
        assert group_distance(GroupElement(even), GroupElement.identity()) < 1e-12


def test_adjoint_identity_and_quarter_turn():
    rng = np.random.default_rng(2)
    v = random_vector(rng)
    assert np.allclose(adjoint(GroupElement.identity(), v).coords, v.coords)
    quarter = exp_map(AlgebraVector(np.array([0.25, 0.0, 0.0])))
    out = adjoint(quarter, AlgebraVector(np.array([0.0, 1.0, 0.0])))
    assert np.allclose(out.coords, [0.0, 0.0, 1.0], atol=1e-12)


def test_adjoint_homomorphism_and_orthogonality():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b = random_group(rng), random_group(rng)
        v = random_vector(rng)
        lhs = adjoint(a * b, v)
        rhs = adjoint(a, adjoint(b, v))
        assert np.max(np.abs(lhs.coords - rhs.coords)) < 1e-12
        assert abs(adjoint(a, v).norm() - v.norm()) < 1e-12


def test_group_distance_properties():
    rng = np.random.default_rng(4)
    assert group_distance(GroupElement.identity(), GroupElement.minus_identity()) == 1.0
    for _ in range(50):
        a, b, p = random_group(rng), random_group(rng), random_group(rng)
        assert group_distance(a, a) < 1e-12
        lhs = group_distance(p * a * p.inverse(), p * b * p.inverse())
        assert abs(lhs - group_distance(a, b)) < 1e-12


def test_diagonalize_examples():
    p, theta = diagonalize(GroupElement.identity())
    assert theta == 0.0 and np.allclose(p.q, [1, 0, 0, 0])
    p, theta = diagonalize(GroupElement(torus_quat(0.2)))
    assert theta == pytest.approx(0.2, abs=1e-14)
    assert group_distance(p * GroupElement(torus_quat(0.2)) * p.inverse(),
                          GroupElement(torus_quat(theta))) < 1e-12


def test_diagonalize_construct_and_recover():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p0 = random_group(rng)
        a = p0 * GroupElement(torus_quat(0.2)) * p0.inverse()
        p, theta = diagonalize(a)
        assert theta == pytest.approx(0.2, abs=1e-12)
        assert group_distance(p * a * p.inverse(), GroupElement(torus_quat(theta))) < 1e-12


def test_diagonalize_range_and_centers():
    rng = np.random.default_rng(6)
    for _ in range(50):
        a = random_group(rng)
        p, theta = diagonalize(a)
        assert 0.0 <= theta <= 1.0
        assert group_distance(p * a * p.inverse(), GroupElement(torus_quat(theta))) < 1e-12
    p, theta = diagonalize(GroupElement.minus_identity())
    assert theta == 1.0 and np.allclose(p.q, [1, 0, 0, 0])


def test_weyl_reverses_torus():
    w = weyl_element()
    for t in (0.1, 0.37, 0.9):
        lhs = w * GroupElement(torus_quat(t)) * w.inverse()
        assert group_distance(lhs, GroupElement(torus_quat(-t))) < 1e-14


def test_root_value_and_torus_element():
    t = TorusElement(0.3)
    assert root_value(t) == 0.3
    assert group_distance(t.element(), GroupElement(torus_quat(0.3))) < 1e-15
    assert root_value(TorusElement(0.0)) == 0.0


def test_root_value_consistent_with_adjoint():
    # Ad(exp(theta e)) rotates the (jx, jy) plane by exactly 2 pi theta
    rng = np.random.default_rng(7)
    for theta in rng.uniform(-2, 2, size=20):
        t = TorusElement(float(theta))
        out = adjoint(t.element(), AlgebraVector(np.array([0.0, 1.0, 0.0])))
        expected = np.array([0.0, np.cos(2 * np.pi * theta), np.sin(2 * np.pi * theta)])
        assert np.max(np.abs(out.coords - expected)) < 1e-12


def test_group_element_validation():
    with pytest.raises(ValueError):
        GroupElement(np.array([2.0, 0.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        GroupElement(np.zeros(3))
