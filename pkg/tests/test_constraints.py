"""Technology and network constraint emitters: structure and arithmetic."""

import dataclasses

import pytest
from numpy.testing import assert_allclose

from carrieropt.builder import build_problem
from carrieropt.costing import ObjectiveMode
from carrieropt.lp import OPTIMAL, solve_lp, verify_solution
from carrieropt.network import pipeline_compression_factor
from carrieropt.system import (
    Carrier,
    CompressionParams,
    StorageParams,
    assemble_variable_index,
    build_miniature_system,
)
from carrieropt.technologies import (
    DataError,
    emit_conversion1,
    emit_conversion2,
    emit_renewable,
    emit_storage1,
    simulate_state_of_charge,
)


@pytest.fixture(scope="module")
def mini():
    return build_miniature_system(seed=0)


@pytest.fixture(scope="module")
def index(mini):
    return assemble_variable_index(mini)


def rows_by_label(rows, prefix):
    return [r for r in rows if r.label.startswith(prefix)]


class TestRenewable:
    def test_fixed_size_becomes_bounds(self, mini, index):
        wind = dataclasses.replace(mini.technology("wind1"), expandable=False,
                                   cost=dataclasses.replace(
                                       mini.technology("wind1").cost, capex_per_size=0.0))
        fixed = dataclasses.replace(
            mini,
            technologies=tuple(wind if t.id == "wind1" else t for t in mini.technologies),
            renewable_profiles={"wind1": (10.0, 0.0) + (5.0,) * 22},
        )
        idx = assemble_variable_index(fixed)
        rows, bounds = emit_renewable(wind, idx, fixed)
        assert rows == []
        assert bounds[0] == (idx.column("wind1", "out", 0), 0.0, 10.0)
        assert bounds[1] == (idx.column("wind1", "out", 1), 0.0, 0.0)

    def test_expandable_scales_with_size(self, mini, index):
        wind = mini.technology("wind1")
        rows, bounds = emit_renewable(wind, index, mini)
        assert bounds == []
        profile = mini.renewable_profiles["wind1"]
        row = rows[0]
        coefs = dict(row.coeffs)
        assert row.rhs == pytest.approx(profile[0])
        assert coefs[index.column("wind1", "size")] == pytest.approx(
            -profile[0] / wind.existing_size)

    def test_missing_profile_is_data_error(self, mini, index):
        broken = dataclasses.replace(mini, renewable_profiles={})
        with pytest.raises(DataError, match="wind1"):
            emit_renewable(mini.technology("wind1"), index, broken)


class TestConversion:
    def test_conversion1_fixed_bounds(self, mini, index):
        nuc = mini.technology("nuc1")
        rows, bounds = emit_conversion1(nuc, index, mini)
        assert rows == []
        h = mini.horizon.hours_per_step
        assert all(b[2] == pytest.approx(nuc.existing_size * h) for b in bounds)
        assert len(bounds) == mini.horizon.step_count

    def test_conversion2_inout_arithmetic(self, mini, index):
        gas = mini.technology("gas1")
        rows, _ = emit_conversion2(gas, index, mini)
        inout = rows_by_label(rows, "gas1.inout")[0]
        coefs = dict(inout.coeffs)
        # 100 MWh of natural gas in -> 61 MWh electricity out satisfies the row
        x = {index.column("gas1", "out", 0): 61.0,
             index.column("gas1", "in[natural_gas]", 0): 100.0,
             index.column("gas1", "in[hydrogen]", 0): 0.0}
        residual = sum(coefs[c] * x.get(c, 0.0) for c in coefs)
        assert residual == pytest.approx(0.0, abs=1e-12)

    def test_admix_limits_hydrogen_share(self, mini, index):
        gas = mini.technology("gas1")
        rows, _ = emit_conversion2(gas, index, mini)
        admix = rows_by_label(rows, "gas1.admix[hydrogen]")[0]
        coefs = dict(admix.coeffs)
        h2 = index.column("gas1", "in[hydrogen]", 0)
        ng = index.column("gas1", "in[natural_gas]", 0)
        # total input 100 with hydrogen at exactly 5 sits on the limit
        assert coefs[h2] * 5.0 + coefs[ng] * 95.0 == pytest.approx(0.0, abs=1e-12)
        assert coefs[h2] * 6.0 + coefs[ng] * 94.0 > 0.0


class TestStorageRows:
    def _battery(self, rate=0.333, size=3.0):
        return StorageParams(Carrier.ELECTRICITY, rate, rate,
                             self_discharge=4.168e-5,
                             charge_efficiency=0.985, discharge_efficiency=0.975), size

    def test_rate_limits_from_performance_table(self, mini):
        batt = dataclasses.replace(
            mini.technology("batt1"), existing_size=3.0, expandable=False, max_size=3.0,
            cost=dataclasses.replace(mini.technology("batt1").cost, capex_per_size=0.0))
        one_hour = dataclasses.replace(
            mini,
            horizon=dataclasses.replace(mini.horizon, hours_per_step=1.0),
            technologies=tuple(batt if t.id == "batt1" else t for t in mini.technologies),
            demands=tuple(dataclasses.replace(d, values=tuple(v / 365.0 for v in d.values))
                          for d in mini.demands),
            renewable_profiles={k: tuple(x / 365.0 for x in v)
                                for k, v in mini.renewable_profiles.items()},
            hydro_inflows={k: tuple(x / 365.0 for x in v)
                           for k, v in mini.hydro_inflows.items()},
        )
        idx = assemble_variable_index(one_hour)
        rows, bounds = emit_storage1(batt, idx, one_hour)
        charge_bounds = [b for b in bounds if b[0] == idx.column("batt1", "charge", 0)]
        assert charge_bounds[0][2] == pytest.approx(0.999)  # 0.333 * 3 MWh

    def test_soc_recursion_matches_reference_simulation(self):
        params, _ = self._battery()
        charges = [1.0, 0.0, 0.5, 0.0]
        discharges = [0.0, 0.4, 0.0, 0.6]
        soc = simulate_state_of_charge(params, 10.0, charges, discharges)
        manual = 10.0
        for t in range(4):
            manual = ((1 - 4.168e-5) * manual + 0.985 * charges[t]
                      - discharges[t] / 0.975)
            assert soc[t] == pytest.approx(manual, rel=1e-15)

    def test_geometric_decay_closed_form(self):
        params, _ = self._battery()
        soc = simulate_state_of_charge(params, 100.0, [0.0] * 24, [0.0] * 24)
        assert soc[-1] == pytest.approx(100.0 * (1 - 4.168e-5) ** 24, rel=1e-12)


class TestCompressionFactor:
    def test_reference_pressure_gives_zero(self):
        params = CompressionParams(outlet_pressure_bar=30.0)
        assert pipeline_compression_factor(params) == 0.0

    def test_si_parameter_row_value(self):
        # independent evaluation via exp/log at high precision froze this value
        k = pipeline_compression_factor(CompressionParams())
        assert_allclose(k, 0.030817379739964508, rtol=1e-9)

    def test_doubling_efficiency_halves_k(self):
        base = pipeline_compression_factor(CompressionParams())
        double = pipeline_compression_factor(CompressionParams(efficiency=1.30))
        assert_allclose(base, 2.0 * double, rtol=1e-12)

    def test_pressure_below_reference_rejected(self):
        with pytest.raises(DataError):
            pipeline_compression_factor(CompressionParams(outlet_pressure_bar=10.0))


@pytest.fixture(scope="module")
def solved(mini):
    built = build_problem(mini, ObjectiveMode.min_cost())
    res = solve_lp(built.problem)
    assert res.status == OPTIMAL
    return built, res


class TestMiniatureSolve:
    """Ungated miniature system solves cleanly and satisfies all physics."""

    def test_residual_contract(self, solved):
        built, res = solved
        report = verify_solution(built.problem, res)
        assert report.ok(1e-7), vars(report)

    def test_balance_residuals_tiny(self, solved):
        built, res = solved
        ax = built.problem.a @ res.x
        for i, name in enumerate(built.problem.row_names):
            if name.startswith("balance["):
                rel = abs(ax[i] - built.problem.rhs[i]) / max(1.0, abs(built.problem.rhs[i]))
                assert rel <= 1e-9, name

    def test_branch_loss_conservation(self, solved, mini, index):
        built, res = solved
        for b in mini.branches:
            transfer = 1.0 - b.loss_factor_per_km * b.length_km
            roles = [("sent[fwd]", "recv[fwd]"), ("sent[rev]", "recv[rev]")] \
                if b.bidirectional else [("sent", "recv")]
            for sent_role, recv_role in roles:
                for t in range(mini.horizon.step_count):
                    sent = res.x[built.index.column(b.id, sent_role, t)]
                    recv = res.x[built.index.column(b.id, recv_role, t)]
                    assert recv == pytest.approx(transfer * sent, abs=1e-7)

    def test_storage_telescoping_identity(self, solved, mini):
        built, res = solved
        h = mini.horizon.hours_per_step
        for tech in mini.technologies:
            if tech.id not in ("batt1", "batt2", "cav1", "hydro1"):
                continue
            p = tech.performance
            decay = (1.0 - p.self_discharge) ** h
            steps = mini.horizon.step_count
            total = 0.0
            for t in range(steps):
                soc_prev = res.x[built.index.column(tech.id, "soc", (t - 1) % steps)]
                charge = res.x[built.index.column(tech.id, "charge", t)]
                discharge = res.x[built.index.column(tech.id, "discharge", t)]
                inflow = mini.hydro_inflows.get(tech.id, [0.0] * steps)[t]
                spill = (res.x[built.index.column(tech.id, "spill", t)]
                         if built.index.has(tech.id, "spill", t) else 0.0)
                total += (p.charge_efficiency * charge - discharge / p.discharge_efficiency
                          + inflow - spill - (1.0 - decay) * soc_prev)
            scale = max(1.0, sum(mini.hydro_inflows.get(tech.id, [1.0] * steps)))
            assert abs(total) / scale <= 1e-9, tech.id

    def test_conversion_ratio_exact(self, solved, mini):
        built, res = solved
        for tech_id in ("gas1", "elz1", "elz2", "fc1"):
            tech = mini.technology(tech_id)
            alpha = tech.performance.efficiency
            for t in range(mini.horizon.step_count):
                total_in = sum(
                    res.x[built.index.column(tech_id, f"in[{c.value}]", t)]
                    for c in tech.performance.input_carriers)
                out = res.x[built.index.column(tech_id, "out", t)]
                if total_in > 1e-9:
                    assert out / total_in == pytest.approx(alpha, rel=1e-9)

    def test_compression_electricity_proportional(self, solved, mini):
        built, res = solved
        gamma = mini.technology("cav1").performance.compression_electricity
        total_charge = sum(res.x[built.index.column("cav1", "charge", t)]
                           for t in range(mini.horizon.step_count))
        total_el = sum(res.x[built.index.column("cav1", "compress_el", t)]
                       for t in range(mini.horizon.step_count))
        assert total_el == pytest.approx(gamma * total_charge, abs=1e-9)
