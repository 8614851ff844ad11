import math

import pytest

import spherebispec as sb


def test_wigner_values():
    assert sb.wigner_3j(2, 2, 2, 0, 0, 0) == pytest.approx(-math.sqrt(2 / 35), rel=1e-12)
    assert sb.wigner_3j(2, 3, 6, 0, 0, 0) == 0.0
    assert sb.wigner_6j(1, 1, 1, 1, 1, 1) == pytest.approx(1 / 6, rel=1e-12)


def test_transform_round_trip():
    C = sb.model_spectrum("power_law", amplitude=1.0, alpha=2.0, l_min=1, L=16)
    alm = sb.sample_gaussian_alm(C, 16, seed=12345)
    grid = sb.synthesize(alm, oversample=1)
    back = sb.analyze(grid, 16, 1)
    worst = max(
        abs(back.get(l, m) - alm.get(l, m))
        for l in range(1, 17)
        for m in range(0, l + 1)
    )
    assert worst < 1e-11


def test_spectrum_and_bispectrum():
    C = sb.model_spectrum("power_law", amplitude=1.0, alpha=2.0, l_min=1, L=12)
    alm = sb.sample_gaussian_alm(C, 12, seed=99)
    cl = sb.estimate_cl(alm, 6)
    assert cl > 0
    b = sb.estimate_bispectrum(alm, 4, 6, 8)
    assert b == sb.estimate_bispectrum(alm, 8, 6, 4)
    with pytest.raises(ValueError):
        sb.estimate_bispectrum(alm, 2, 3, 9)


def test_moments():
    assert sb.moment_I2(2, 3, 5) == 1.0
    assert sb.moment_I2(4, 4, 4) == 6.0
    assert sb.moment_Ihat(3, 3, 4) == pytest.approx(14 / 9, rel=1e-12)
    assert sb.moment_bruteforce(1, 2, 3, 5) == pytest.approx(1.0, rel=1e-10)
    with pytest.raises(sb.GuardError):
        sb.moment_bruteforce(2, 10, 12, 14)


def test_sup_test():
    C = sb.model_spectrum("sw", l_min=1, L=40)
    alm = sb.sample_gaussian_alm(C, 40, seed=7)
    sup, p = sb.sup_test(alm, "J3", 40, l0=2, K=0)
    assert sup >= 0.0
    assert 0.0 <= p <= 1.0
