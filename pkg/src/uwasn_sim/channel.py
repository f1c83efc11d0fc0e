"""Acoustic link model: Thorp absorption, practical spreading, a logistic
SNR-to-delivery curve, and per-packet energy costs."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .config import ChannelMode, PowerLevel, ScenarioConfig

SOUND_SPEED = 1500.0  # m/s


@dataclass(frozen=True)
class LinkBudget:
    distance: float
    attenuation: float
    snr: float
    delivery_prob: float
    prop_delay: float
    tx_duration: float


def thorp_absorption(frequency: float) -> float:
    """Absorption coefficient in dB/km for a frequency in kHz."""
    if not frequency > 0:
        raise ValueError(f"frequency must be positive, got {frequency}")
    f2 = frequency * frequency
    return 0.11 * f2 / (1 + f2) + 44 * f2 / (4100 + f2) + 2.75e-4 * f2 + 0.003


def path_loss(distance: float, frequency: float, spreading_exponent: float) -> float:
    """Transmission loss in dB. Distances under 1 m are treated as 1 m."""
    d = max(distance, 1.0)
    return spreading_exponent * 10 * math.log10(d) + thorp_absorption(frequency) * d / 1000


def propagation_delay(distance: float) -> float:
    return distance / SOUND_SPEED


def link_snr(distance: float, level: PowerLevel, config: ScenarioConfig) -> float:
    loss = path_loss(distance, config.frequency, config.spreading_exponent)
    return config.source_level_for(level) - loss - config.noise_level


def snr_to_probability(snr: float, config: ScenarioConfig) -> float:
    if config.channel_mode is ChannelMode.DETERMINISTIC:
        return 1.0 if snr >= config.snr_midpoint else 0.0
    z = (snr - config.snr_midpoint) / config.snr_slope
    # numerically stable logistic
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def link_delivery_probability(distance: float, level: PowerLevel, config: ScenarioConfig) -> float:
    """Delivery probability for a sender at ``level`` over ``distance`` metres."""
    if distance > config.range_for(level):
        return 0.0
    return snr_to_probability(link_snr(distance, level, config), config)


def _distance(a, b) -> float:
    return math.dist((a.pos.x, a.pos.y, a.pos.z), (b.pos.x, b.pos.y, b.pos.z))


def delivery_probability(sender, receiver, config: ScenarioConfig) -> float:
    """Probability that ``receiver`` decodes a packet sent by ``sender`` at
    the sender's current power level."""
    return link_delivery_probability(_distance(sender, receiver), sender.power_level, config)


def link_energy(level: PowerLevel, config: ScenarioConfig) -> tuple[float, float]:
    """(transmit, receive) energy in joules for one packet."""
    duration = config.tx_duration
    return config.power_for(level) * duration, config.power_watts_rx * duration


def link_budget(sender, receiver, config: ScenarioConfig) -> LinkBudget:
    d = _distance(sender, receiver)
    return LinkBudget(
        distance=d,
        attenuation=path_loss(d, config.frequency, config.spreading_exponent),
        snr=link_snr(d, sender.power_level, config),
        delivery_prob=link_delivery_probability(d, sender.power_level, config),
        prop_delay=propagation_delay(d),
        tx_duration=config.tx_duration,
    )


def lowest_sufficient_level(distance: float, config: ScenarioConfig) -> PowerLevel | None:
    """Cheapest power level whose range covers ``distance``; None when out of reach."""
    if distance <= config.transmission_range_low:
        return PowerLevel.LOW
    if distance <= config.transmission_range_high:
        return PowerLevel.HIGH
    return None
