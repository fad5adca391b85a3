"""Objective assembly and emission accounting for the three optimization modes.

Cost model (all EUR per year): annualized capex on size additions plus a
fixed-opex share of that annualized capex, variable opex per MWh of output,
import costs at bare prices, and a carbon charge on all accounted emissions;
the carbon charge covers both technology throughput and imports, so import
prices must not embed it again. Existing assets never carry investment cost.

Emissions (t CO2): per-technology input/output factors plus per-carrier
import factors (e.g. 0.8 t/MWh for electricity from outside the system and
0.108 t/MWh for hydrogen backstopped by methane reforming).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lp import LE, Row
from .system import (
    CARRIERS,
    Carrier,
    EnergySystem,
    NetworkBranch,
    TechnologyInstance,
    TechnologyKind,
    VariableIndex,
)

EMISSION_CAP_LABEL = "emission_cap"


@dataclass(frozen=True)
class ObjectiveMode:
    kind: str  # "min_emissions" | "min_cost" | "min_cost_with_cap"
    emission_cap: float | None = None

    def __post_init__(self):
        if self.kind not in ("min_emissions", "min_cost", "min_cost_with_cap"):
            raise ValueError(f"unknown objective mode {self.kind!r}")
        if self.kind == "min_cost_with_cap":
            if self.emission_cap is None or self.emission_cap < 0:
                raise ValueError("emission cap must be a nonnegative number")

    @classmethod
    def min_emissions(cls) -> "ObjectiveMode":
        return cls("min_emissions")

    @classmethod
    def min_cost(cls) -> "ObjectiveMode":
        return cls("min_cost")

    @classmethod
    def min_cost_with_cap(cls, cap: float) -> "ObjectiveMode":
        return cls("min_cost_with_cap", emission_cap=cap)

    def label(self) -> str:
        if self.kind == "min_cost_with_cap":
            return f"cap={self.emission_cap!r}"
        return self.kind


def annualize(capex: float, lifetime: float, discount_rate: float) -> float:
    """Capital-recovery annuity: capex * r(1+r)^L / ((1+r)^L - 1); capex/L at r=0."""
    if lifetime <= 0:
        raise ValueError("lifetime must be positive")
    if discount_rate < 0:
        raise ValueError("discount rate must be nonnegative")
    if discount_rate < 1e-12:  # annuity limit; avoids denormal-range noise
        return capex / lifetime
    # expm1/log1p keep the denominator exact for very small rates
    growth_minus_one = math.expm1(lifetime * math.log1p(discount_rate))
    return capex * discount_rate * (growth_minus_one + 1.0) / growth_minus_one


def _tech_size_coefficient(tech: TechnologyInstance) -> float:
    """EUR per unit of new size per year."""
    if tech.cost.capex_per_size == 0:
        return 0.0
    annual = annualize(tech.cost.capex_per_size, tech.cost.lifetime,
                       tech.cost.discount_rate)
    return annual * (1.0 + tech.cost.fixed_opex_share) * 1000.0


def _branch_size_coefficient(branch: NetworkBranch, prorate_fixed: bool) -> float:
    """EUR per MW of new capacity per year, fixed terms prorated if requested."""
    g1, g2, g3, g4 = branch.cost_poly
    marginal = g2 + g4 * branch.length_km
    if prorate_fixed:
        fixed = g1 + g3 * branch.length_km
        headroom = branch.max_capacity - branch.existing_capacity
        if fixed > 0 and headroom > 0:
            marginal += fixed / headroom
    annual = annualize(marginal, branch.lifetime, branch.discount_rate) \
        if marginal != 0 else 0.0
    # economies of scale can push the polynomial negative at short distances;
    # free capacity would be unbounded, so the coefficient floors at zero
    return max(0.0, annual * (1.0 + branch.fixed_opex_share) * 1000.0)


def _branch_build_coefficient(branch: NetworkBranch) -> float:
    g1, _, g3, _ = branch.cost_poly
    fixed = g1 + g3 * branch.length_km
    if fixed <= 0:
        return 0.0
    annual = annualize(fixed, branch.lifetime, branch.discount_rate)
    return annual * (1.0 + branch.fixed_opex_share) * 1000.0


def network_branch_capex(branch: NetworkBranch, size_mw: float) -> float:
    """Overnight investment (kEUR) for ``size_mw`` of new capacity on ``branch``.

    Zero at zero size; otherwise the full polynomial including fixed terms,
    clamped at zero against pathological negative-cost regions.
    """
    if size_mw < 0:
        raise ValueError("size must be nonnegative")
    if size_mw == 0:
        return 0.0
    g1, g2, g3, g4 = branch.cost_poly
    value = g1 + g2 * size_mw + g3 * branch.length_km + g4 * branch.length_km * size_mw
    return max(0.0, value)


def technology_cost_terms(system: EnergySystem, index: VariableIndex) -> dict[int, float]:
    """Objective coefficients (EUR) from technology investment and variable opex."""
    coeffs: dict[int, float] = {}
    steps = system.horizon.step_count
    for tech in system.technologies:
        if tech.expandable:
            value = _tech_size_coefficient(tech)
            if value:
                coeffs[index.column(tech.id, "size")] = value
        opex = tech.cost.variable_opex
        if opex:
            role = "discharge" if tech.kind in (TechnologyKind.STORAGE1,
                                                TechnologyKind.STORAGE2_1,
                                                TechnologyKind.STORAGE2_2) else "out"
            for t in range(steps):
                coeffs[index.column(tech.id, role, t)] = opex
    return coeffs


def network_cost_terms(system: EnergySystem, index: VariableIndex) -> dict[int, float]:
    """Objective coefficients (EUR) from branch expansion and flow opex.

    Bidirectional branches are one physical line: the forward size variable
    carries the whole investment and the reverse size is tied by the equality
    row at zero cost. Pipeline pairs are separate branches, each paying.
    """
    coeffs: dict[int, float] = {}
    steps = system.horizon.step_count
    for branch in system.branches:
        if branch.expandable:
            if branch.integer_block_mw is not None:
                per_mw = _branch_size_coefficient(branch, prorate_fixed=False)
                coeffs[index.column(branch.id, "blocks")] = per_mw * branch.integer_block_mw
                if index.has(branch.id, "build"):
                    coeffs[index.column(branch.id, "build")] = _branch_build_coefficient(branch)
            else:
                per_mw = _branch_size_coefficient(branch, prorate_fixed=True)
                if per_mw:
                    coeffs[index.column(branch.id, "size")] = per_mw
        if branch.variable_opex:
            roles = ("sent[fwd]", "sent[rev]") if branch.bidirectional else ("sent",)
            for role in roles:
                for t in range(steps):
                    coeffs[index.column(branch.id, role, t)] = branch.variable_opex
    return coeffs


def _tech_emission_columns(tech: TechnologyInstance, index: VariableIndex,
                           steps: int):
    """Yield (column, t CO2 per MWh) for a technology's emitting variables."""
    for (direction, carrier), factor in sorted(
            tech.emission_factors.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        if factor == 0:
            continue
        if tech.kind == TechnologyKind.CONVERSION2:
            if direction == "in" and carrier in tech.performance.input_carriers:
                role = f"in[{carrier.value}]"
            elif direction == "out" and carrier == tech.performance.output_carrier:
                role = "out"
            else:
                continue
        elif tech.kind in (TechnologyKind.RENEWABLE, TechnologyKind.CONVERSION1):
            if direction != "out" or carrier != Carrier.ELECTRICITY:
                continue
            role = "out"
        else:
            if carrier != tech.performance.carrier:
                continue
            role = "charge" if direction == "in" else "discharge"
        for t in range(steps):
            yield index.column(tech.id, role, t), factor


def emission_vector(system: EnergySystem, index: VariableIndex) -> np.ndarray:
    """t CO2 per unit of each column: technology factors plus import factors."""
    steps = system.horizon.step_count
    vec = np.zeros(len(index))
    for tech in system.technologies:
        for col, factor in _tech_emission_columns(tech, index, steps):
            vec[col] += factor
    for node in system.nodes:
        for carrier in CARRIERS:
            factor = node.import_emission_factor.get(carrier, 0.0)
            if factor and index.has(node.id, f"imp[{carrier.value}]", 0):
                for t in range(steps):
                    vec[index.column(node.id, f"imp[{carrier.value}]", t)] += factor
    return vec


def import_and_carbon_terms(system: EnergySystem, index: VariableIndex) -> dict[int, float]:
    """Objective coefficients (EUR): import prices plus carbon on all emissions."""
    coeffs: dict[int, float] = {}
    steps = system.horizon.step_count
    price_co2 = system.carbon_price
    for node in system.nodes:
        for carrier in CARRIERS:
            if not index.has(node.id, f"imp[{carrier.value}]", 0):
                continue
            price = node.import_price.get(carrier, 0.0)
            if price:
                for t in range(steps):
                    col = index.column(node.id, f"imp[{carrier.value}]", t)
                    coeffs[col] = coeffs.get(col, 0.0) + price
    if price_co2:
        for col, factor in enumerate(emission_vector(system, index)):
            if factor:
                coeffs[col] = coeffs.get(col, 0.0) + price_co2 * factor
    return coeffs


def cost_vector(system: EnergySystem, index: VariableIndex) -> np.ndarray:
    vec = np.zeros(len(index))
    for terms in (technology_cost_terms(system, index),
                  network_cost_terms(system, index),
                  import_and_carbon_terms(system, index)):
        for col, value in terms.items():
            vec[col] += value
    return vec


def assemble_objective(system: EnergySystem, index: VariableIndex,
                       mode: ObjectiveMode) -> tuple[np.ndarray, Row | None]:
    """Objective vector for ``mode`` plus the emission-cap row when applicable."""
    emissions = emission_vector(system, index)
    if mode.kind == "min_emissions":
        return emissions, None
    costs = cost_vector(system, index)
    if mode.kind == "min_cost":
        return costs, None
    cap = mode.emission_cap
    if math.isinf(cap):
        return costs, None
    coeffs = [(col, float(v)) for col, v in enumerate(emissions) if v != 0.0]
    return costs, Row(coeffs, LE, cap, EMISSION_CAP_LABEL)


@dataclass(frozen=True)
class EmissionsReport:
    technologies: float
    imports: float

    @property
    def total(self) -> float:
        return self.technologies + self.imports


def total_emissions(system: EnergySystem, index: VariableIndex,
                    x: np.ndarray) -> EmissionsReport:
    """Recompute emission totals from raw variable values."""
    steps = system.horizon.step_count
    tec = 0.0
    for tech in system.technologies:
        for col, factor in _tech_emission_columns(tech, index, steps):
            tec += factor * float(x[col])
    imp = 0.0
    for node in system.nodes:
        for carrier in CARRIERS:
            factor = node.import_emission_factor.get(carrier, 0.0)
            if factor and index.has(node.id, f"imp[{carrier.value}]", 0):
                for t in range(steps):
                    imp += factor * float(x[index.column(node.id, f"imp[{carrier.value}]", t)])
    return EmissionsReport(technologies=tec, imports=imp)


@dataclass(frozen=True)
class CostBreakdown:
    technologies: float
    networks: float
    imports: float
    carbon: float

    @property
    def total(self) -> float:
        return self.technologies + self.networks + self.imports + self.carbon


def cost_breakdown(system: EnergySystem, index: VariableIndex,
                   x: np.ndarray) -> CostBreakdown:
    """Recompute the cost split from raw variable values, entity by entity."""
    tech = sum(v * float(x[c]) for c, v in technology_cost_terms(system, index).items())
    netw = sum(v * float(x[c]) for c, v in network_cost_terms(system, index).items())
    steps = system.horizon.step_count
    imports = 0.0
    for node in system.nodes:
        for carrier in CARRIERS:
            price = node.import_price.get(carrier, 0.0)
            if price and index.has(node.id, f"imp[{carrier.value}]", 0):
                for t in range(steps):
                    imports += price * float(x[index.column(node.id, f"imp[{carrier.value}]", t)])
    emissions = total_emissions(system, index, x)
    carbon = system.carbon_price * emissions.total
    return CostBreakdown(technologies=tech, networks=netw, imports=imports, carbon=carbon)
