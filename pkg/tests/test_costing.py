"""Costing and emissions: annuities, polynomial capex, objective coefficients."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from carrieropt.costing import (
    ObjectiveMode,
    annualize,
    assemble_objective,
    cost_vector,
    emission_vector,
    network_branch_capex,
    total_emissions,
)
from carrieropt.system import (
    Carrier,
    NetworkBranch,
    assemble_variable_index,
    build_miniature_system,
)


@pytest.fixture(scope="module")
def mini():
    return build_miniature_system(seed=0)


@pytest.fixture(scope="module")
def index(mini):
    return assemble_variable_index(mini)


class TestAnnualize:
    def test_zero_rate_is_straight_line(self):
        assert annualize(100.0, 10.0, 0.0) == 10.0

    def test_battery_example(self):
        assert_allclose(annualize(622.0, 25.0, 0.04), 39.81544085317475, rtol=1e-12)

    def test_long_lifetime_tends_to_interest(self):
        assert_allclose(annualize(100.0, 5000.0, 0.05), 5.0, rtol=1e-9)

    def test_nonpositive_lifetime_rejected(self):
        with pytest.raises(ValueError):
            annualize(10.0, 0.0, 0.04)

    @given(st.floats(1.0, 1e4), st.floats(1.0, 100.0), st.floats(0.0, 0.2))
    def test_annuity_repays_capex(self, capex, lifetime, rate):
        """Discounted sum of the annuity over the lifetime returns the capex."""
        a = annualize(capex, lifetime, rate)
        if rate < 1e-12:
            total = a * lifetime
        else:
            total = a * -math.expm1(-lifetime * math.log1p(rate)) / rate
        assert total == pytest.approx(capex, rel=1e-9)


class TestBranchCapex:
    def _ac(self, existing=0.0):
        return NetworkBranch(
            "x", "electricity_ac", Carrier.ELECTRICITY, "a", "b", length_km=100.0,
            existing_capacity=existing, expandable=True, max_capacity=600.0,
            loss_factor_per_km=7e-5, bidirectional=True,
            cost_poly=(0.0, 43.7, 0.0, 0.4), lifetime=40.0)

    def test_ac_polynomial_example(self):
        assert network_branch_capex(self._ac(), 500.0) == pytest.approx(41850.0)

    def test_zero_size_costs_nothing(self):
        assert network_branch_capex(self._ac(), 0.0) == 0.0

    def test_offshore_pipeline_polynomial(self):
        pipe = NetworkBranch(
            "p", "pipeline_offshore", Carrier.HYDROGEN, "a", "b", length_km=300.0,
            existing_capacity=0.0, expandable=True, max_capacity=2000.0,
            loss_factor_per_km=4e-5, bidirectional=False,
            cost_poly=(337045.7, -33.1, 0.0, 0.5), lifetime=50.0)
        assert network_branch_capex(pipe, 1000.0) == pytest.approx(453945.7)

    def test_negative_region_clamped(self):
        cheap = NetworkBranch(
            "p", "pipeline_onshore_repurposed", Carrier.HYDROGEN, "a", "b",
            length_km=1.0, existing_capacity=0.0, expandable=True,
            max_capacity=2000.0, loss_factor_per_km=4e-5, bidirectional=False,
            cost_poly=(0.0, -3.9, 0.0, 0.1), lifetime=50.0)
        assert network_branch_capex(cheap, 100.0) == 0.0


class TestObjectiveCoefficients:
    def test_electricity_import_effective_price(self, mini, index):
        # 1 MWh imported costs the bare price plus the carbon charge:
        # 1000 + 80 * 0.8 = 1064 EUR
        vec = cost_vector(mini, index)
        col = index.column("n1", "imp[electricity]", 0)
        assert vec[col] == pytest.approx(1064.0)

    def test_gas_variable_opex(self, mini, index):
        vec = cost_vector(mini, index)
        col = index.column("gas1", "out", 5)
        assert vec[col] == pytest.approx(4.2)

    def test_electrolyzer_size_coefficient_structure(self, mini, index):
        vec = cost_vector(mini, index)
        col = index.column("elz1", "size")
        tech = mini.technology("elz1")
        expected = annualize(tech.cost.capex_per_size, 30.0, 0.04) * 1.04 * 1000.0
        assert vec[col] == pytest.approx(expected, rel=1e-12)

    def test_zero_size_zero_output_contributes_nothing(self, mini, index):
        vec = cost_vector(mini, index)
        x = np.zeros(len(index))
        assert float(vec @ x) == 0.0

    def test_min_cost_equals_cap_infinity(self, mini, index):
        costs, cap = assemble_objective(mini, index, ObjectiveMode.min_cost())
        capped, row = assemble_objective(
            mini, index, ObjectiveMode.min_cost_with_cap(math.inf))
        assert row is None and cap is None
        assert (costs == capped).all()


class TestEmissionAccounting:
    def test_gas_output_bookkeeping(self, mini, index):
        # 100 MWh of gas input at 61% efficiency: 61 MWh out, 18.422 t CO2
        x = np.zeros(len(index))
        x[index.column("gas1", "in[natural_gas]", 0)] = 100.0
        x[index.column("gas1", "out", 0)] = 61.0
        report = total_emissions(mini, index, x)
        assert report.technologies == pytest.approx(18.4220, rel=1e-12)
        assert report.imports == 0.0

    def test_import_emission_factor(self, mini, index):
        x = np.zeros(len(index))
        x[index.column("n2", "imp[electricity]", 3)] = 10.0
        report = total_emissions(mini, index, x)
        assert report.imports == pytest.approx(8.0)

    def test_all_renewable_dispatch_is_zero(self, mini, index):
        x = np.zeros(len(index))
        for t in range(mini.horizon.step_count):
            x[index.column("wind1", "out", t)] = 100.0
            x[index.column("hydro1", "discharge", t)] = 5.0
        assert total_emissions(mini, index, x).total == 0.0

    def test_min_emissions_objective_is_emission_vector(self, mini, index):
        objective, cap = assemble_objective(mini, index, ObjectiveMode.min_emissions())
        assert cap is None
        assert (objective == emission_vector(mini, index)).all()


class TestCapDual:
    def test_binding_cap_has_nonnegative_dual(self, mini):
        from carrieropt.scenarios import ScenarioRunner, standard_scenario
        runner = ScenarioRunner(mini)
        base = runner.run(standard_scenario("s-all"), ObjectiveMode.min_cost())
        cap = base.emissions.total * 0.995
        capped = runner.run(standard_scenario("s-all"),
                            ObjectiveMode.min_cost_with_cap(cap))
        built, res = capped.built, capped.result
        assert built.cap_row is not None
        activity = float(built.emissions @ res.x)
        assert activity == pytest.approx(cap, rel=1e-6)  # binding
        dual = res.duals[built.cap_row]
        assert dual >= -1e-9  # shadow carbon price
        assert dual > 1.0     # strictly positive when the cap really binds
