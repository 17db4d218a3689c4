"""Closed-form loss and compensation formulas."""

from __future__ import annotations

import math


def joule_loss(resistance_r: float, current: float) -> float:
    """Active power dissipated in a resistance: ``r * I**2``."""
    if resistance_r < 0:
        raise ValueError(f"resistance must be >= 0, got {resistance_r}")
    return resistance_r * current * current


def reactive_loss(voltage_u: float, reactance_x: float) -> float:
    """Reactive power absorbed by a reactance at voltage ``U``: ``U**2 / X``."""
    if reactance_x == 0:
        raise ZeroDivisionError("reactive_loss: reactance must be nonzero")
    return voltage_u * voltage_u / reactance_x


def compensation_capacitance(q: float, voltage_u: float, omega: float = 100 * math.pi) -> float:
    """Capacitance [F] supplying ``q`` VAr at ``voltage_u`` volts and angular frequency ``omega``."""
    if voltage_u <= 0:
        raise ValueError(f"voltage must be positive, got {voltage_u}")
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    return q / (voltage_u * voltage_u * omega)


def loss_rate(p_supplied: float, p_sold: float) -> float:
    """Percentage of supplied power (or energy) that is not sold."""
    if p_supplied <= 0:
        raise ValueError(f"supplied power must be positive, got {p_supplied}")
    if p_sold > p_supplied:
        raise ValueError(f"sold ({p_sold}) exceeds supplied ({p_supplied})")
    return 100.0 * (p_supplied - p_sold) / p_supplied
