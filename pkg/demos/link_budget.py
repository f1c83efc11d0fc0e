"""
Acoustic link budget
====================

How far does a packet get at each power level? Absorption grows with
frequency, spreading with distance, and the SNR maps onto a delivery
probability through a logistic curve.
"""

import numpy as np

from uwasn_sim import PowerLevel, ScenarioConfig
from uwasn_sim.channel import link_delivery_probability, path_loss, thorp_absorption

config = ScenarioConfig()

# absorption in dB/km across the usual modem band
freqs = np.array([5.0, 10.0, 20.0, 30.0, 50.0])
for f, a in zip(freqs, [thorp_absorption(f) for f in freqs]):
    print(f"{f:5.0f} kHz  {a:6.2f} dB/km")

# delivery probability against distance, both power levels
distances = np.arange(0, 181, 20)
print("\n  dist   loss dB   p(low)  p(high)")
for d in distances:
    loss = path_loss(float(d), config.frequency, config.spreading_exponent)
    lo = link_delivery_probability(float(d), PowerLevel.LOW, config)
    hi = link_delivery_probability(float(d), PowerLevel.HIGH, config)
    print(f"{d:6.0f} {loss:9.2f} {lo:8.3f} {hi:8.3f}")

# beyond each nominal range the link is cut regardless of SNR
