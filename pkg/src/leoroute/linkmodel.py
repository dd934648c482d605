"""Link rate and delay formulas.

GSLs are Shannon-rate RF links (free-space path loss, thermal noise); ISLs
are optical laser links with an exponentially attenuated SNR term. A fixed
rate override replaces the physical model when experiments call for stable
link rates. All functions are pure and stateless; SI units throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError

LIGHT_SPEED = 299_792_458.0      # m/s
BOLTZMANN = 1.380649e-23         # J/K


@dataclass(frozen=True)
class GslParams:
    bandwidth_hz: float = 250e6
    tx_power_w: float = 40.0
    tx_gain: float = 1000.0
    rx_gain: float = 1000.0
    noise_temp_k: float = 290.0
    carrier_freq_hz: float = 20e9
    boltzmann: float = BOLTZMANN
    light_speed: float = LIGHT_SPEED

    def __post_init__(self):
        for name in ("bandwidth_hz", "tx_power_w", "tx_gain", "rx_gain",
                     "noise_temp_k", "carrier_freq_hz", "boltzmann", "light_speed"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"GslParams.{name} must be positive")


@dataclass(frozen=True)
class IslParams:
    optical_bandwidth_hz: float = 10e9
    kappa1: float = 80.0         # mean optical SNR scale
    kappa2: float = 1.2e-6       # attenuation, 1/m

    def __post_init__(self):
        for name in ("optical_bandwidth_hz", "kappa1", "kappa2"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"IslParams.{name} must be positive")


@dataclass(frozen=True)
class RateModel:
    """Either the physical rate formulas or a constant rate per link class."""

    mode: str = "fixed"          # "physical" | "fixed"
    fixed_rate_bps: float = 50e6

    def __post_init__(self):
        if self.mode not in ("physical", "fixed"):
            raise ConfigurationError("RateModel.mode must be 'physical' or 'fixed'")
        if self.mode == "fixed" and self.fixed_rate_bps <= 0:
            raise ConfigurationError("fixed_rate_bps must be positive")


def propagation_delay(distance_m: float, light_speed: float = LIGHT_SPEED) -> float:
    """Signal travel time d / c in seconds."""
    if distance_m < 0:
        raise ValueError("distance must be >= 0")
    return distance_m / light_speed


def fspl(distance_m: float, carrier_freq_hz: float,
         light_speed: float = LIGHT_SPEED) -> float:
    """Free-space path loss (4*pi*d*f/c)^2 as a linear ratio."""
    if distance_m <= 0:
        raise ValueError("fspl undefined at zero distance")
    x = 4.0 * math.pi * distance_m * carrier_freq_hz / light_speed
    return x * x


def snr_gsl(p: GslParams, distance_m: float) -> float:
    """Linear SNR of an RF ground link at the given distance."""
    loss = fspl(distance_m, p.carrier_freq_hz, p.light_speed)
    return (p.tx_power_w * p.tx_gain * p.rx_gain
            / (loss * p.boltzmann * p.noise_temp_k * p.bandwidth_hz))


_LN2 = math.log(2.0)


def rate_gsl(bandwidth_hz: float, snr: float) -> float:
    """Shannon rate B * log2(1 + SNR) in bits/s."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    if snr < 0:
        raise ValueError("snr must be >= 0")
    # log1p keeps precision when snr is far below one ulp of 1.0
    return bandwidth_hz * math.log1p(snr) / _LN2


def rate_isl(p: IslParams, distance_m: float) -> float:
    """Optical ISL rate (B/2) * log2(1 + k1 * exp(-k2 * d)) in bits/s,
    non-increasing in distance."""
    if distance_m < 0:
        raise ValueError("distance must be >= 0")
    return 0.5 * p.optical_bandwidth_hz * math.log1p(
        p.kappa1 * math.exp(-p.kappa2 * distance_m)) / _LN2


def transmission_delay(bits: float, rate_bps: float) -> float:
    """Serialization time L / R in seconds."""
    if rate_bps <= 0:
        raise ValueError("rate must be positive")
    return bits / rate_bps


def queuing_delay(queued_bits_ahead: float, rate_bps: float) -> float:
    """FIFO wait contributed by bits already queued ahead on the link."""
    if rate_bps <= 0:
        raise ValueError("rate must be positive")
    return queued_bits_ahead / rate_bps


def gsl_rate(model: RateModel, params: GslParams, distance_m: float) -> float:
    """Rate of a ground link under the configured model."""
    if model.mode == "fixed":
        return model.fixed_rate_bps
    return rate_gsl(params.bandwidth_hz, snr_gsl(params, distance_m))


def isl_rate(model: RateModel, params: IslParams, distance_m: float) -> float:
    """Rate of an inter-satellite link under the configured model."""
    if model.mode == "fixed":
        return model.fixed_rate_bps
    return rate_isl(params, distance_m)
