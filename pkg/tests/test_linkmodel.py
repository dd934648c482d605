import math

import mpmath as mp
import numpy as np
import pytest

from leoroute.linkmodel import (
    BOLTZMANN,
    LIGHT_SPEED,
    GslParams,
    IslParams,
    RateModel,
    fspl,
    gsl_rate,
    isl_rate,
    propagation_delay,
    queuing_delay,
    rate_gsl,
    rate_isl,
    snr_gsl,
    transmission_delay,
)

mp.mp.dps = 50


def test_propagation_delay_light_second():
    assert propagation_delay(299_792_458.0) == 1.0


def test_propagation_delay_zero():
    assert propagation_delay(0.0) == 0.0


def test_propagation_delay_oracle_1000km():
    want = float(mp.mpf(1_000_000) / mp.mpf(299_792_458))
    assert propagation_delay(1_000_000.0) == pytest.approx(want, rel=1e-15)


def test_fspl_unit_loss_distance():
    f = 20e9
    d = LIGHT_SPEED / (4 * math.pi * f)
    assert fspl(d, f) == pytest.approx(1.0, rel=1e-12)


def test_fspl_quadratic_scaling():
    assert fspl(1200e3, 20e9) == pytest.approx(4 * fspl(600e3, 20e9), rel=1e-12)


def test_fspl_oracle_600km():
    want = float((4 * mp.pi * mp.mpf(600e3) * mp.mpf(20e9) / mp.mpf(299_792_458)) ** 2)
    assert fspl(600e3, 20e9) == pytest.approx(want, rel=1e-12)


def test_fspl_zero_distance_rejected():
    with pytest.raises(ValueError):
        fspl(0.0, 20e9)


def test_snr_unit_construction():
    # pick power so numerator equals denominator at d = 1000 km
    d = 1000e3
    p0 = GslParams()
    loss = fspl(d, p0.carrier_freq_hz)
    denom = loss * p0.boltzmann * p0.noise_temp_k * p0.bandwidth_hz
    p = GslParams(tx_power_w=denom, tx_gain=1.0, rx_gain=1.0)
    assert snr_gsl(p, d) == pytest.approx(1.0, rel=1e-12)


def test_snr_inverse_square():
    p = GslParams()
    assert snr_gsl(p, 2000e3) == pytest.approx(snr_gsl(p, 1000e3) / 4, rel=1e-12)


def test_snr_oracle_defaults():
    p = GslParams()
    loss = (4 * mp.pi * mp.mpf(800e3) * mp.mpf(p.carrier_freq_hz) / mp.mpf(p.light_speed)) ** 2
    want = float(mp.mpf(p.tx_power_w) * p.tx_gain * p.rx_gain
                 / (loss * mp.mpf(p.boltzmann) * p.noise_temp_k * mp.mpf(p.bandwidth_hz)))
    assert snr_gsl(p, 800e3) == pytest.approx(want, rel=1e-12)


def test_rate_gsl_endpoints():
    assert rate_gsl(10e6, 0.0) == 0.0
    assert rate_gsl(10e6, 1.0) == pytest.approx(10e6, rel=1e-12)
    assert rate_gsl(10e6, 3.0) == pytest.approx(20e6, rel=1e-12)  # log2(4) = 2


def test_rate_isl_zero_distance():
    p = IslParams(optical_bandwidth_hz=10e9, kappa1=3.0, kappa2=1e-6)
    assert rate_isl(p, 0.0) == pytest.approx(5e9 * math.log2(4.0), rel=1e-12)


def test_rate_isl_far_limit():
    p = IslParams()
    assert rate_isl(p, 1e9) < 1e-3


def test_rate_isl_ln3_case():
    # kappa1 * exp(-kappa2 d) == 1 when kappa2*d = ln(kappa1); rate = B/2
    p = IslParams(optical_bandwidth_hz=8e9, kappa1=3.0, kappa2=2e-6)
    d = math.log(3.0) / p.kappa2
    assert rate_isl(p, d) == pytest.approx(4e9, rel=1e-12)


def test_rate_isl_monotone_non_increasing():
    p = IslParams()
    ds = np.linspace(0, 8000e3, 200)
    rates = [rate_isl(p, float(d)) for d in ds]
    assert all(a >= b for a, b in zip(rates, rates[1:]))


def test_transmission_delay_normal_packet():
    # 64.8 Kbit at 50 Mbps
    assert transmission_delay(64_800, 50e6) == pytest.approx(1.296e-3, rel=1e-12)


def test_transmission_delay_small_packet():
    assert transmission_delay(16_200, 50e6) == pytest.approx(0.324e-3, rel=1e-12)


def test_transmission_delay_zero_bits():
    assert transmission_delay(0, 50e6) == 0.0


def test_transmission_delay_additive():
    a, b, r = 12_345.0, 67_891.0, 50e6
    lhs = transmission_delay(a + b, r)
    rhs = transmission_delay(a, r) + transmission_delay(b, r)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_queuing_delay_empty():
    assert queuing_delay(0, 50e6) == 0.0


def test_queuing_delay_two_normal_packets():
    assert queuing_delay(2 * 64_800, 50e6) == pytest.approx(2.592e-3, rel=1e-12)


def test_rates_reject_bad_inputs():
    with pytest.raises(ValueError):
        transmission_delay(100, 0.0)
    with pytest.raises(ValueError):
        queuing_delay(100, -1.0)
    with pytest.raises(ValueError):
        rate_gsl(0.0, 1.0)


def test_fixed_mode_ignores_distance():
    gm = RateModel(mode="fixed", fixed_rate_bps=1000e6)
    im = RateModel(mode="fixed", fixed_rate_bps=50e6)
    for d in (1.0, 600e3, 5000e3):
        assert gsl_rate(gm, GslParams(), d) == 1000e6
        assert isl_rate(im, IslParams(), d) == 50e6


def test_physical_mode_dispatch():
    gm = RateModel(mode="physical")
    p = GslParams()
    d = 900e3
    assert gsl_rate(gm, p, d) == rate_gsl(p.bandwidth_hz, snr_gsl(p, d))


def test_formula_oracle_suite_random_inputs():
    """Every formula against an extended-precision oracle on random inputs."""
    rng = np.random.default_rng(42)
    c = mp.mpf(299_792_458)
    for _ in range(1000):
        d = mp.mpf(float(rng.uniform(1.0, 9e6)))
        f = mp.mpf(float(rng.uniform(1e9, 40e9)))
        bits = mp.mpf(float(rng.uniform(1.0, 1e6)))
        rate = mp.mpf(float(rng.uniform(1e4, 1e10)))
        b = mp.mpf(float(rng.uniform(1e6, 1e10)))
        snr = mp.mpf(float(rng.uniform(0.0, 1e6)))
        k1 = mp.mpf(float(rng.uniform(0.1, 500.0)))
        k2 = mp.mpf(float(rng.uniform(1e-8, 1e-5)))

        assert propagation_delay(float(d)) == pytest.approx(float(d / c), rel=1e-12)
        assert fspl(float(d), float(f)) == pytest.approx(
            float((4 * mp.pi * d * f / c) ** 2), rel=1e-12)
        assert transmission_delay(float(bits), float(rate)) == pytest.approx(
            float(bits / rate), rel=1e-12)
        assert queuing_delay(float(bits), float(rate)) == pytest.approx(
            float(bits / rate), rel=1e-12)
        assert rate_gsl(float(b), float(snr)) == pytest.approx(
            float(b * mp.log(1 + snr, 2)), rel=1e-12)
        got = rate_isl(IslParams(float(b), float(k1), float(k2)), float(d))
        want = float(b / 2 * mp.log(1 + k1 * mp.e ** (-k2 * d), 2))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-15)
