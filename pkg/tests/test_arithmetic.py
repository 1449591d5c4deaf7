import math

import numpy as np
import pytest

from su2kam.arithmetic import (
    DiophParams,
    Frequency,
    ResonanceRecord,
    continued_fraction,
    diophantine_witness,
    dist_to_Z,
    gauss_map,
    rdc_horizon_check,
    relative_defect_minimum,
    relative_resonance,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def test_dist_to_Z_examples():
    assert dist_to_Z(0.3) == pytest.approx(0.3, abs=1e-15)
    assert dist_to_Z(0.7) == pytest.approx(0.3, abs=1e-15)
    assert dist_to_Z(2.5) == 0.5


def test_dist_to_Z_rejects_nonfinite():
    with pytest.raises(ValueError):
        dist_to_Z(float("nan"))
    with pytest.raises(ValueError):
        dist_to_Z(float("inf"))


def test_dist_to_Z_periodic_and_even():
    rng = np.random.default_rng(0)
    for x in rng.uniform(-20, 20, size=200):
        assert dist_to_Z(x) == dist_to_Z(-x)
        assert dist_to_Z(x) == dist_to_Z(x + 1.0)
        assert 0.0 <= dist_to_Z(x) <= 0.5


def test_witness_rational_half():
    alpha = Frequency((0.5,))
    for gamma in (2.5, 3.0, 10.0):
        rec = diophantine_witness(alpha, DiophParams(gamma, 2.0, 50))
        assert rec.k == (2,)
        assert rec.defect == 0.0
        assert rec.near_rational


def test_witness_golden_none():
    alpha = Frequency((GOLDEN,))
    assert diophantine_witness(alpha, DiophParams(3.0, 2.0, 10**4)) is None


def test_witness_tiny_frequency():
    rec = diophantine_witness(Frequency((1e-6,)), DiophParams(1.0, 1.1, 10))
    assert rec.k == (1,)
    assert rec.defect == pytest.approx(1e-6, rel=1e-12)


def test_witness_requires_tau_above_dimension():
    with pytest.raises(ValueError):
        diophantine_witness(Frequency((GOLDEN,)), DiophParams(1.0, 0.5, 10))


def test_witness_monotone_in_horizon():
    rng = np.random.default_rng(1)
    for _ in range(20):
        alpha = Frequency((float(rng.uniform(0, 1)),))
        p1 = DiophParams(2.0, 1.5, 300)
        p2 = DiophParams(2.0, 1.5, 1500)
        r1 = diophantine_witness(alpha, p1)
        if r1 is not None:
            r2 = diophantine_witness(alpha, p2)
            assert r2.k == r1.k
            assert r2.defect == r1.defect


def test_witness_agrees_with_exhaustive_scan():
    # independent oracle: plain python loop in scan order
    rng = np.random.default_rng(2)
    p = DiophParams(3.0, 2.0, 2000)
    for _ in range(10):
        a = float(rng.uniform(0, 1))
        expected = None
        for k in range(1, p.horizon + 1):
            d = abs(k * a - round(k * a))
            if d < (1.0 / p.gamma) / k**p.tau:
                expected = (k, d)
                break
        rec = diophantine_witness(Frequency((a,)), p)
        if expected is None:
            assert rec is None
        else:
            assert rec.k == (expected[0],)
            assert rec.defect == expected[1]


def test_witness_two_dimensional():
    # worst defect*|k|^3 over this horizon is ~0.0322 (at k = +-(1,1)),
    # so gamma = 32 passes and gamma = 20 yields that witness
    alpha = Frequency((GOLDEN, math.sqrt(2.0) - 1.0))
    assert diophantine_witness(alpha, DiophParams(32.0, 3.0, 60)) is None
    rec = diophantine_witness(alpha, DiophParams(20.0, 3.0, 60))
    assert rec is not None
    assert tuple(abs(c) for c in rec.k) == (1, 1)
    # a frequency with an exact low-order relation: k = (2, -1)
    bad = Frequency((0.3, 0.6))
    rec = diophantine_witness(bad, DiophParams(10.0, 3.0, 20))
    assert rec is not None
    assert rec.k == (2, -1)
    assert rec.defect == 0.0


def test_relative_exact_construction():
    alpha = Frequency((GOLDEN,))
    beta = (3 * GOLDEN) % 1.0
    rec = relative_resonance(beta, alpha, 10, 3.0)
    assert rec is not None
    assert rec.k == (3,)
    assert rec.defect < 1e-15


def test_relative_zero_beta_golden():
    alpha = Frequency((GOLDEN,))
    assert relative_resonance(0.0, alpha, 10, 3.0) is None
    rec = relative_defect_minimum(0.0, alpha, 10)
    assert abs(rec.k[0]) == 8
    assert rec.defect == pytest.approx(0.05572809000084078, abs=1e-15)
    assert rec.defect > 1e-3


def test_relative_constructed_just_below_threshold():
    alpha = Frequency((GOLDEN,))
    n, nu = 12, 3.0
    thr = float(n) ** -nu
    beta = 5 * GOLDEN + 0.5 * thr
    rec = relative_resonance(beta, alpha, n, nu)
    assert rec is not None
    assert rec.k == (5,)
    assert rec.defect == pytest.approx(0.5 * thr, rel=1e-9)


def test_relative_closed_threshold_boundary():
    # alpha = 1/2 makes every defect exactly representable
    alpha = Frequency((0.5,))
    beta = 3 * 0.5 + 0.25
    rec = relative_resonance(beta, alpha, 4, 1.0)  # threshold 4^-1 = 0.25
    assert rec is not None
    assert rec.defect == rec.threshold == 0.25


def test_relative_defect_positive_for_irrational():
    alpha = Frequency((GOLDEN,))
    for n in (5, 20, 100):
        assert relative_defect_minimum(0.0, alpha, n).defect > 0.0


def test_dc_iff_relative_dc_at_zero():
    # alpha in DC(gamma, tau, K) iff beta = 0 obeys the same relative bounds
    rng = np.random.default_rng(3)
    p = DiophParams(2.5, 1.8, 500)
    for _ in range(12):
        a = float(rng.uniform(0, 1))
        alpha = Frequency((a,))
        absolute = diophantine_witness(alpha, p) is None
        relative = True
        for k in range(1, p.horizon + 1):
            for kk in (k, -k):
                if dist_to_Z(0.0 - kk * a) < p.bound(abs(kk)):
                    relative = False
        assert absolute == relative


def test_gauss_map_examples():
    assert gauss_map(GOLDEN) == pytest.approx(GOLDEN, abs=1e-14)
    assert gauss_map(2.0 / 7.0) == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(ValueError):
        gauss_map(0.0)
    with pytest.raises(ValueError):
        gauss_map(1.5)


def test_continued_fraction_digits():
    assert continued_fraction(math.pi - 3.0, 5) == [7, 15, 1, 292, 1]
    assert continued_fraction(math.sqrt(2.0) - 1.0, 10) == [2] * 10
    with pytest.raises(ValueError):
        continued_fraction(0.25, 5)  # terminates after [4]


def test_rdc_golden_fixed_point():
    passing = rdc_horizon_check(GOLDEN, DiophParams(3.0, 2.0, 2000), 10)
    assert passing == list(range(11))


def test_rdc_sqrt2():
    passing = rdc_horizon_check(math.sqrt(2.0) - 1.0, DiophParams(3.0, 2.0, 2000), 5)
    assert passing == list(range(6))


def test_rdc_rational_rejected():
    with pytest.raises(ValueError):
        rdc_horizon_check(2.0 / 7.0, DiophParams(3.0, 2.0, 100), 5)


def test_resonance_record_validation():
    with pytest.raises(ValueError):
        ResonanceRecord((0,), 0.1, 10, 0.5)
    rec = ResonanceRecord((3, -2), 1e-15, 10, 0.5)
    assert rec.knorm == 3
    assert rec.near_rational


def test_frequency_validation():
    with pytest.raises(ValueError):
        Frequency((1.2,))
    with pytest.raises(ValueError):
        Frequency(())
    f = Frequency((0.25, 0.75))
    assert f.dimension == 2
    assert f.dot((2, 2)) == pytest.approx(2.0)
