"""Link budget walkthrough: the physical rate/delay formulas for RF ground
links and optical inter-satellite links, and the fixed-rate override used by
the routing experiments.

Run:  python3 demos/02_link_budget.py
"""

import numpy as np

from leoroute.linkmodel import (
    GslParams,
    IslParams,
    RateModel,
    gsl_rate,
    isl_rate,
    propagation_delay,
    queuing_delay,
    rate_gsl,
    snr_gsl,
    transmission_delay,
)

gsl = GslParams()
isl = IslParams()

print("physical GSL (Shannon over free-space path loss):")
for d_km in (600, 1000, 1500, 2500):
    snr = snr_gsl(gsl, d_km * 1e3)
    rate = rate_gsl(gsl.bandwidth_hz, snr)
    print(f"  d={d_km:5d} km  SNR={10 * np.log10(snr):6.1f} dB  "
          f"rate={rate / 1e6:8.1f} Mbps  prop={1e3 * propagation_delay(d_km * 1e3):6.2f} ms")

print("\nphysical optical ISL (exponential attenuation):")
for d_km in (1000, 3000, 5000, 8000):
    rate = isl_rate(RateModel("physical"), isl, d_km * 1e3)
    print(f"  d={d_km:5d} km  rate={rate / 1e6:9.1f} Mbps")

print("\nfixed-rate override (the experiments' configuration):")
gm = RateModel("fixed", 1000e6)
im = RateModel("fixed", 50e6)
print(f"  GSL at any distance: {gsl_rate(gm, gsl, 1.0) / 1e6:.0f} Mbps")
print(f"  ISL at any distance: {isl_rate(im, isl, 5e6) / 1e6:.0f} Mbps")

print("\nserialization and FIFO waits for the two packet classes at 50 Mbps:")
for bits in (64_800, 16_200):
    print(f"  {bits:6d} bits: tx={1e3 * transmission_delay(bits, 50e6):6.3f} ms")
print(f"  two normal packets queued ahead: "
      f"{1e3 * queuing_delay(2 * 64_800, 50e6):.3f} ms wait")
