"""Data preparation: turn national tabular statistics into nodal model inputs.

These transforms run upstream of the optimizer: distributing national
capacity projections over regions by remaining potential, splitting demand
into a flat industrial part allocated by employment and a profiled
remainder, correcting wind speeds between hub heights, evaluating turbine
power curves, and expanding annual or weekly totals into flat step series.
All allocation operations conserve the national totals they distribute.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence


class AllocationError(ValueError):
    """Inputs cannot be distributed (zero potential, negative residual, ...)."""


def allocate_nuts_capacity(potential_region: float, capacity2023_region: float,
                           potential_national: float, capacity2030_national: float,
                           capacity2023_national: float) -> float:
    """Regional 2030 capacity from remaining potential share of national growth.

    cap2030_R = (P_R - C2023_R) / P_N * (C2030_N - C2023_N) + C2023_R
    """
    if potential_national <= 0:
        raise AllocationError("national potential must be positive")
    if potential_region < capacity2023_region:
        raise AllocationError("regional potential below regional 2023 capacity")
    if capacity2030_national < capacity2023_national:
        raise AllocationError("national capacity cannot shrink in this scheme")
    growth = capacity2030_national - capacity2023_national
    headroom = potential_region - capacity2023_region
    return headroom / potential_national * growth + capacity2023_region


def split_industrial_demand(total_series: Sequence[float], industrial_share: float,
                            node_keys: Mapping[str, float],
                            employment_keys: Mapping[str, float]
                            ) -> dict[str, list[float]]:
    """Split a national series into flat industrial and profiled other demand.

    The industrial fraction of annual demand is distributed as a flat profile
    using employment keys; the remainder follows the national profile shape
    using the node keys. Per step, the node series sum back to the national
    series.
    """
    if not 0.0 <= industrial_share <= 1.0:
        raise AllocationError("industrial share outside [0, 1]")
    for name, keys in (("node", node_keys), ("employment", employment_keys)):
        if any(v < 0 for v in keys.values()):
            raise AllocationError(f"negative {name} key")
        if abs(sum(keys.values()) - 1.0) > 1e-9:
            raise AllocationError(f"{name} keys must sum to 1")
    if set(node_keys) != set(employment_keys):
        raise AllocationError("node and employment keys cover different nodes")

    steps = len(total_series)
    annual_total = math.fsum(total_series)
    industrial_annual = industrial_share * annual_total
    flat_per_step = industrial_annual / steps if steps else 0.0

    out: dict[str, list[float]] = {}
    for node in sorted(node_keys):
        series = []
        for t in range(steps):
            other_national = total_series[t] - flat_per_step
            value = (employment_keys[node] * flat_per_step
                     + node_keys[node] * other_national)
            if value < -1e-9:
                raise AllocationError(
                    f"negative residual demand at node {node}, step {t}")
            series.append(value)
        out[node] = series
    return out


def wind_height_correction(ws_reference: float, reference_height: float,
                           target_height: float, exponent: float) -> float:
    """Power-law extrapolation of wind speed between heights.

    Onshore profiles use exponent 1/7; offshore hub heights use 0.11.
    """
    if reference_height <= 0 or target_height <= 0:
        raise AllocationError("heights must be positive")
    if ws_reference < 0:
        raise AllocationError("wind speed must be nonnegative")
    return ws_reference * (target_height / reference_height) ** exponent


# reference curve for a 1.5 MW turbine: cut-in 3 m/s, rated at 12 m/s,
# cut-out 25 m/s; breakpoints are data and can be replaced per fleet
REFERENCE_TURBINE_CURVE: tuple[tuple[float, float], ...] = (
    (3.0, 0.0),
    (5.0, 0.15),
    (7.0, 0.45),
    (9.0, 0.9),
    (11.0, 1.35),
    (12.0, 1.5),
    (25.0, 1.5),
)


def turbine_power_output(wind_speed: float,
                         power_curve: Iterable[tuple[float, float]]
                         = REFERENCE_TURBINE_CURVE) -> float:
    """Piecewise-linear power curve: zero below cut-in and beyond cut-out."""
    curve = list(power_curve)
    if len(curve) < 2:
        raise AllocationError("power curve needs at least two breakpoints")
    speeds = [s for s, _ in curve]
    if any(b <= a for a, b in zip(speeds, speeds[1:])):
        raise AllocationError("power curve breakpoints must increase strictly")
    if any(p < 0 for _, p in curve):
        raise AllocationError("power curve output must be nonnegative")
    if wind_speed < speeds[0] or wind_speed > speeds[-1]:
        return 0.0
    for (s0, p0), (s1, p1) in zip(curve, curve[1:]):
        if wind_speed <= s1:
            return p0 + (p1 - p0) * (wind_speed - s0) / (s1 - s0)
    return curve[-1][1]


def flat_profiles(annual_total: float, step_count: int,
                  weekly_totals: Sequence[float] | None = None) -> list[float]:
    """Distribute totals evenly over steps; the last step absorbs rounding.

    With ``weekly_totals`` the horizon is split into equal consecutive weeks
    (``step_count`` must be divisible by the number of weeks) and each week's
    total is spread uniformly within that week.
    """
    if step_count < 1:
        raise AllocationError("step_count must be at least 1")
    if weekly_totals is None:
        if annual_total < 0:
            raise AllocationError("totals must be nonnegative")
        base = annual_total / step_count
        series = [base] * step_count
        series[-1] = annual_total - base * (step_count - 1)
        return series
    weeks = len(weekly_totals)
    if weeks == 0 or step_count % weeks != 0:
        raise AllocationError("step_count must split evenly into weeks")
    if any(w < 0 for w in weekly_totals):
        raise AllocationError("totals must be nonnegative")
    per_week = step_count // weeks
    series: list[float] = []
    for total in weekly_totals:
        base = total / per_week
        chunk = [base] * per_week
        chunk[-1] = total - base * (per_week - 1)
        series.extend(chunk)
    return series


def interpolate_faulty_values(series: Sequence[float],
                              threshold: float = 0.1) -> list[float]:
    """Replace values below ``threshold`` by neighbour interpolation.

    Interior faulty runs are bridged linearly between the nearest valid
    values; faulty values at either boundary copy the nearest valid value.
    An all-faulty series is rejected.
    """
    values = list(series)
    valid = [i for i, v in enumerate(values) if v >= threshold]
    if not valid:
        raise AllocationError("every value is below the validity threshold")
    out = list(values)
    for i, v in enumerate(values):
        if v >= threshold:
            continue
        left = max((j for j in valid if j < i), default=None)
        right = min((j for j in valid if j > i), default=None)
        if left is None:
            out[i] = values[right]
        elif right is None:
            out[i] = values[left]
        else:
            weight = (i - left) / (right - left)
            out[i] = values[left] * (1 - weight) + values[right] * weight
    return out
