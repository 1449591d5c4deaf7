import math

import numpy as np
import pytest

from su2kam.arithmetic import Frequency
from su2kam.fourier import (
    AlgebraMap,
    ConjugationChain,
    ConstantFactor,
    ExpFactor,
    TorusMorphism,
    UndersampledGridError,
    analyze,
    chain_evaluate,
    chain_sobolev_partial,
    random_map,
    sobolev_norm,
    synthesize,
    synthesize_complex,
    translate,
    truncate,
)
from su2kam.su2 import GroupElement, group_distance, quat_mul, torus_quat

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def test_synthesize_zero_and_single_mode():
    zero = AlgebraMap.zeros(1, 4)
    assert np.all(synthesize(zero, 16) == 0.0)
    amap = AlgebraMap.zeros(1, 4)
    amap.set_mode_pair((2,), np.array([0.5, 0.0, 0.0]))
    vals = synthesize(amap, 32)
    xs = np.arange(32) / 32
    assert np.allclose(vals[:, 0], np.cos(2 * np.pi * 2 * xs), atol=1e-12)


def test_analyze_synthesize_roundtrip():
    rng = np.random.default_rng(0)
    for d, band, m in ((1, 8, 24), (2, 3, 10)):
        f = random_map(d, band, 0.7, rng)
        g = analyze(synthesize(f, m), band)
        assert np.max(np.abs(g.coeffs - f.coeffs)) < 1e-12


def test_synthesize_reality_residue():
    rng = np.random.default_rng(1)
    f = random_map(1, 10, 1.0, rng)
    vals = synthesize_complex(f, 40)
    assert np.max(np.abs(vals.imag)) < 1e-12


def test_undersampled_grid_rejected():
    f = AlgebraMap.zeros(1, 8)
    with pytest.raises(UndersampledGridError):
        synthesize(f, 17)
    with pytest.raises(UndersampledGridError):
        analyze(np.zeros((10, 3)), 8)


def test_translate_phases_and_isometry():
    rng = np.random.default_rng(2)
    alpha = Frequency((GOLDEN,))
    const = AlgebraMap.zeros(1, 2)
    const.set_mode((0,), np.array([0.3, 0.0, 0.1]))
    assert np.allclose(translate(const, alpha).coeffs, const.coeffs)

    f = AlgebraMap.zeros(1, 5)
    f.set_mode_pair((3,), np.array([0.2 + 0.1j, 0.0, 0.0]))
    g = translate(f, alpha)
    expected = f.mode((3,)) * np.exp(2j * np.pi * 3 * GOLDEN)
    assert np.allclose(g.mode((3,)), expected)

    h = random_map(1, 6, 1.0, rng)
    twice = translate(translate(h, alpha), alpha)
    once = translate(h, np.array([2 * GOLDEN]))
    assert np.max(np.abs(twice.coeffs - once.coeffs)) < 1e-12
    for s in (-4.0, -1.0, 0.0, 1.5, 3.0):
        assert abs(sobolev_norm(translate(h, alpha), s) - sobolev_norm(h, s)) < 1e-12


def test_sobolev_norm_examples():
    const = AlgebraMap.zeros(2, 3)
    const.set_mode((0, 0), np.array([0.3, 0.4, 0.0]))
    for s in (-2.0, 0.0, 2.0):
        assert sobolev_norm(const, s) == pytest.approx(0.5)
    single = AlgebraMap.zeros(1, 4)
    single.set_mode((3,), np.array([1.0, 0.0, 0.0]))
    assert sobolev_norm(single, 2.0) == pytest.approx((1 + 9.0) ** 1.0)


def test_sobolev_parseval_at_zero():
    rng = np.random.default_rng(3)
    f = random_map(1, 8, 0.9, rng)
    m = 64
    vals = synthesize(f, m)
    grid_l2 = np.sqrt(np.sum(vals**2) / m)
    assert abs(sobolev_norm(f, 0.0) - grid_l2) < 1e-10


def test_truncate_exact_split_and_tail_bound():
    rng = np.random.default_rng(4)
    f = random_map(1, 12, 1.3, rng)
    low, high = truncate(f, 12)
    assert np.array_equal(low.coeffs, f.coeffs)
    assert np.all(high.coeffs == 0)
    low, high = truncate(f, 0)
    assert np.all(low.coeffs[:12] == 0) and np.all(low.coeffs[13:] == 0)
    for nprime in (3, 7):
        low, high = truncate(f, nprime)
        assert np.array_equal(low.coeffs + high.coeffs, f.coeffs)
        for s in (0.5, 1.0, 2.5):
            bound = (1.0 + nprime**2) ** (-s / 2.0) * sobolev_norm(f, s)
            assert sobolev_norm(high, 0.0) <= bound + 1e-12


def test_algebra_map_serialization_roundtrip():
    rng = np.random.default_rng(5)
    for d, band in ((1, 6), (2, 2)):
        f = random_map(d, band, 1.1, rng)
        g = AlgebraMap.from_dict(f.to_dict())
        assert np.array_equal(g.coeffs, f.coeffs)


def test_evaluate_at_matches_synthesize():
    rng = np.random.default_rng(6)
    f = random_map(2, 3, 0.8, rng)
    m = 12
    vals = synthesize(f, m)
    for idx in ((0, 0), (3, 7), (11, 5)):
        x = np.array(idx) / m
        assert np.max(np.abs(f.evaluate_at(x) - vals[idx])) < 1e-12


def test_torus_morphism_cocycle_compatibility():
    # B(x+alpha) exp(theta e) B(x)^-1 = exp((theta + k.alpha) e), frame = Id
    alpha = GOLDEN
    b = TorusMorphism((3,))
    theta = 0.21
    rng = np.random.default_rng(7)
    for x in rng.uniform(0, 1, size=10):
        lhs = quat_mul(b.evaluate_at(np.array([x + alpha])),
                       quat_mul(torus_quat(theta), b.inverse().evaluate_at(np.array([x]))))
        rhs = torus_quat(theta + 3 * alpha)
        assert group_distance(GroupElement(lhs), GroupElement(rhs)) < 1e-12


def test_torus_morphism_center_ambiguity_cancels():
    b = TorusMorphism((3,))  # odd winding: B(x+1) = -B(x)
    theta = 0.37
    x = np.array([0.123])
    def conj_at(y):
        return quat_mul(b.evaluate_at(y + GOLDEN),
                        quat_mul(torus_quat(theta), b.inverse().evaluate_at(y)))
    assert np.max(np.abs(conj_at(x) - conj_at(x + 1.0))) < 1e-12


def test_torus_morphism_lattice_to_center():
    b = TorusMorphism((5, 2))
    for point in ((0, 0), (1, 0), (2, 1)):
        q = b.evaluate_at(np.array(point, dtype=float))
        assert abs(abs(q[0]) - 1.0) < 1e-12


def test_chain_evaluate_and_inverse():
    rng = np.random.default_rng(8)
    y = random_map(1, 3, 0.05, rng)
    p = GroupElement.projected(rng.standard_normal(4))
    chain = ConjugationChain((ConstantFactor(p), ExpFactor(y), TorusMorphism((2,))), 1)
    assert np.allclose(ConjugationChain((), 1).evaluate_at(np.array([0.3])), [1, 0, 0, 0])
    assert group_distance(chain_evaluate(ConjugationChain((ConstantFactor(p),), 1),
                                         np.array([0.9])), p) < 1e-14
    inv = chain.inverse()
    for x in rng.uniform(0, 1, size=5):
        prod = quat_mul(chain.evaluate_at(np.array([x])), inv.evaluate_at(np.array([x])))
        assert group_distance(GroupElement(prod), GroupElement.identity()) < 1e-12


def test_chain_grid_matches_pointwise():
    rng = np.random.default_rng(9)
    y = random_map(1, 2, 0.1, rng)
    chain = ConjugationChain((TorusMorphism((2,)), ExpFactor(y)), 1)
    m = 16
    grid = chain.grid(m)
    for j in (0, 5, 11):
        assert np.max(np.abs(grid[j] - chain.evaluate_at(np.array([j / m])))) < 1e-12
    shifted = chain.grid(m, offset=np.array([GOLDEN]))
    assert np.max(np.abs(shifted[3] - chain.evaluate_at(np.array([3 / m + GOLDEN])))) < 1e-12


def test_chain_sobolev_constants_constant():
    p = GroupElement(np.array([0.0, 1.0, 0.0, 0.0]))
    chain = ConjugationChain((ConstantFactor(p), ConstantFactor(p), ConstantFactor(p)), 1)
    norms = chain_sobolev_partial(chain, -2.0, 32)
    assert np.allclose(norms, norms[0])


def test_chain_sobolev_single_morphism_monotone():
    prev = None
    for k in (4, 8, 16, 32):
        chain = ConjugationChain((TorusMorphism((k,)),), 1)
        norm = chain_sobolev_partial(chain, -2.0, 256)[0]
        if prev is not None:
            assert norm < prev
        prev = norm


def test_chain_sobolev_undersampled_raises():
    chain = ConjugationChain((TorusMorphism((64,)),), 1)
    with pytest.raises(UndersampledGridError):
        chain_sobolev_partial(chain, -2.0, 64)


def test_chain_serialization_roundtrip():
    rng = np.random.default_rng(10)
    y = random_map(1, 2, 0.05, rng)
    p = GroupElement.projected(rng.standard_normal(4))
    chain = ConjugationChain((ConstantFactor(p), ExpFactor(y), TorusMorphism((3,))), 1)
    back = ConjugationChain.from_dict(chain.to_dict())
    for x in (0.0, 0.31, 0.77):
        assert np.max(np.abs(back.evaluate_at(np.array([x])) -
                             chain.evaluate_at(np.array([x])))) < 1e-15


def test_random_map_scaling_and_reality():
    rng = np.random.default_rng(11)
    f = random_map(1, 5, 2.5e-3, rng)
    assert sobolev_norm(f, 0.0) == pytest.approx(2.5e-3)
    sym = f.symmetrized()
    assert np.max(np.abs(sym.coeffs - f.coeffs)) < 1e-15
    assert np.all(f.mode((0,)) == 0)
