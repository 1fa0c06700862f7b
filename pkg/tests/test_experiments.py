"""Tests for sweeps, step-count search and scaling fits."""
import csv
import math
import os

import numpy as np
import pytest

from src.errors import DomainError, UnreachableTargetError
from src.experiments import (
    CSV_COLUMNS,
    SweepConfig,
    SweepRecord,
    calibrate_constant,
    compare,
    error_scaling,
    fit_power_law,
    fit_records,
    minimal_R,
    read_sweep_csv,
    run_sweep,
    write_sweep_csv,
)
from src.schedule import ScheduleSpec, SearchInstance, Variant, schedule_discrete
from src.trotter import evolution_error, required_R


def _record(n, R, order=2, eps1=0.1):
    return SweepRecord(n=n, N=2 ** n, R=R, order=order, variant="exact", eps1=eps1,
                       trotter_err=1e-3, adiabatic_fidelity=0.99, success_prob=0.99,
                       wall_ms=1.0)


def _rows_without_wall_time(path):
    with open(path, newline="") as f:
        return [row[:-1] for row in csv.reader(f)]


class TestPowerLawFit:
    """Test log-log least squares."""

    def test_exact_power_law(self):
        points = [(N, 7.0 * N ** 0.75) for N in (16, 64, 256, 1024, 4096)]
        result = fit_power_law(points)
        assert result.exponent == pytest.approx(0.75, abs=1e-9)
        assert result.intercept == pytest.approx(math.log(7.0), abs=1e-9)
        assert result.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_constant(self):
        result = fit_power_law([(N, 12.0) for N in (4, 16, 64)])
        assert result.exponent == pytest.approx(0.0, abs=1e-12)
        assert result.r_squared == 1.0

    def test_too_few_points(self):
        with pytest.raises(DomainError):
            fit_power_law([(4, 1.0), (16, 2.0)])

    def test_non_positive_points(self):
        with pytest.raises(DomainError):
            fit_power_law([(4, 1.0), (16, 0.0), (64, 3.0)])


class TestMinimalR:
    """Test the doubling-then-bisection search."""

    def test_smallest_passing_R(self):
        """The returned R meets the target and R - 1 does not."""
        instance = SearchInstance(n_qubits=6)

        def err(R):
            sched = schedule_discrete(ScheduleSpec(R=R), instance.N)
            return evolution_error(sched, 2).trotter_err

        R = minimal_R(instance, 2, target_err=1e-3)
        assert err(R) <= 1e-3 < err(R - 1)

    def test_unreachable_target(self):
        with pytest.raises(UnreachableTargetError, match="target unreachable"):
            minimal_R(SearchInstance(n_qubits=6), 2, target_err=1e-12, cap=8)

    def test_invalid_target(self):
        with pytest.raises(DomainError):
            minimal_R(SearchInstance(n_qubits=4), 2, target_err=0.0)

    def test_growth_with_N(self):
        """Measured step counts grow like sqrt(N).

        ||[H0, Hf]|| = sqrt(N-1)/N shrinks like N^(-1/2) and offsets part of the
        growth of T, so the fitted exponent sits near 1/2. The N^(3/4) law of
        required_R is the worst-case envelope (see TestRequiredSteps).
        """
        points = [(2 ** n, minimal_R(SearchInstance(n_qubits=n), 2, target_err=1e-3))
                  for n in range(8, 19, 2)]
        result = fit_power_law(points)
        assert 0.45 <= result.exponent <= 0.55
        assert result.r_squared >= 0.98

    @pytest.mark.parametrize("marked", [0, 17, 63])
    def test_marked_index_invariance(self, marked):
        assert minimal_R(SearchInstance(n_qubits=6, marked=marked), 2) == \
            minimal_R(SearchInstance(n_qubits=6), 2)

    def test_synthesized_circuit_tracks_reference(self):
        """At the minimal R the circuit is within 0.02 of the refined evolution."""
        from src.schedule import synth_qaoa_params
        from src.simulator import run_qaoa, run_reference_adiabatic

        instance = SearchInstance(n_qubits=10)
        R = minimal_R(instance, 2, target_err=1e-3)
        sched = schedule_discrete(ScheduleSpec(R=R), instance.N)
        reference = run_reference_adiabatic(instance, sched, refine=64)
        circuit = run_qaoa(instance, synth_qaoa_params(sched))
        assert reference.success_prob >= 1 - 0.1 ** 2 - 0.02
        assert abs(circuit.success_prob - reference.success_prob) <= 0.02

    def test_success_settles_past_minimal_R(self):
        """Beyond the first R meeting 1e-3, success_prob does not fall by more than 0.01."""
        from src.schedule import synth_qaoa_params
        from src.simulator import run_qaoa

        instance = SearchInstance(n_qubits=8)
        start = minimal_R(instance, 2, target_err=1e-3)
        probs = [run_qaoa(instance, synth_qaoa_params(
                     schedule_discrete(ScheduleSpec(R=start * 2 ** k), instance.N))).success_prob
                 for k in range(4)]
        assert all(b >= a - 0.01 for a, b in zip(probs, probs[1:]))


class TestErrorScaling:
    """Test the error-versus-R helper."""

    def test_second_order_exponent(self):
        steps = [16, 32, 64, 128, 256]
        points, result = error_scaling(SearchInstance(n_qubits=6), 2, steps)
        assert [R for R, _ in points] == steps
        assert -2.3 <= result.exponent <= -1.7


class TestCalibration:
    """Test fitting the bound's constant."""

    def test_recovers_factor(self):
        budget = 1e-3
        records = [_record(n, 2 * required_R(2 ** n, 0.1 + budget, 0.1)) for n in (4, 6, 8)]
        assert calibrate_constant(records, budget) == pytest.approx(2.0)

    def test_no_records(self):
        with pytest.raises(DomainError):
            calibrate_constant([], 1e-3)


class TestSweepConfig:
    """Test sweep configuration."""

    def test_from_dict(self):
        config = SweepConfig.from_dict({"n-min": 3, "n-max": 5, "orders": [2, 4],
                                        "variant": "paper", "steps": 8, "out": "x.csv"})
        assert config.n_range == (3, 5)
        assert config.orders == (2, 4)
        assert config.variant is Variant.PAPER_LITERAL
        assert config.steps == (8,)
        assert config.out_path == "x.csv"

    def test_from_dict_single_order(self):
        """`order` is accepted next to `orders`, as on the command line."""
        config = SweepConfig.from_dict({"order": 4, "out_path": "y.csv"})
        assert config.orders == (4,)
        assert config.out_path == "y.csv"

    @pytest.mark.parametrize("kwargs", [
        {"n_range": (5, 3)},
        {"orders": (3,)},
        {"target_err": 0.0},
        {"steps": (0,)},
        {"workers": 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            SweepConfig(**kwargs)


class TestSweep:
    """Test sweep execution and CSV persistence."""

    def test_fixed_step_grid(self, tmp_path):
        out = tmp_path / "sweep.csv"
        config = SweepConfig(n_range=(2, 3), orders=(4, 2), steps=(16, 8), refine=4,
                             out_path=str(out))
        records = run_sweep(config)
        assert len(records) == 8
        assert [r.sort_key for r in records] == sorted(r.sort_key for r in records)
        assert [r.R for r in records[:2]] == [8, 16]

        with open(out, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == CSV_COLUMNS
        assert len(rows) == 9

    def test_rerun_is_identical(self, tmp_path):
        """Reruns match except for wall-clock time."""
        config = dict(n_range=(2, 3), orders=(2,), steps=(8,), refine=4)
        run_sweep(SweepConfig(out_path=str(tmp_path / "a.csv"), **config))
        run_sweep(SweepConfig(out_path=str(tmp_path / "b.csv"), **config))
        assert _rows_without_wall_time(tmp_path / "a.csv") == \
            _rows_without_wall_time(tmp_path / "b.csv")

    def test_workers_do_not_change_results(self, tmp_path):
        config = dict(n_range=(2, 4), orders=(2, 4), steps=(8,), refine=4)
        run_sweep(SweepConfig(out_path=str(tmp_path / "one.csv"), workers=1, **config))
        run_sweep(SweepConfig(out_path=str(tmp_path / "two.csv"), workers=2, **config))
        assert _rows_without_wall_time(tmp_path / "one.csv") == \
            _rows_without_wall_time(tmp_path / "two.csv")

    def test_searched_step_counts(self):
        records = run_sweep(SweepConfig(n_range=(4, 4), target_err=1e-2, refine=2))
        assert len(records) == 1
        assert records[0].trotter_err <= 1e-2

    def test_empty_order_set(self, tmp_path):
        """No orders still writes the header."""
        out = tmp_path / "empty.csv"
        assert run_sweep(SweepConfig(orders=(), out_path=str(out))) == []
        assert out.read_text() == ",".join(CSV_COLUMNS) + "\n"

    def test_unwritable_destination(self, tmp_path):
        """A missing output directory fails before any computation."""
        config = SweepConfig(n_range=(18, 20), out_path=str(tmp_path / "missing" / "s.csv"))
        with pytest.raises(OSError):
            run_sweep(config)

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        write_sweep_csv(tmp_path / "s.csv", [_record(3, 8), _record(2, 8)])
        assert os.listdir(tmp_path) == ["s.csv"]
        assert [r.n for r in read_sweep_csv(tmp_path / "s.csv")] == [2, 3]

    def test_read_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DomainError):
            read_sweep_csv(path)

    def test_record_rejects_non_finite(self):
        with pytest.raises(DomainError):
            SweepRecord(n=2, N=4, R=4, order=2, variant="exact", eps1=0.1,
                        trotter_err=float("nan"), adiabatic_fidelity=1.0,
                        success_prob=1.0, wall_ms=0.0)


class TestFitRecords:
    """Test per-order fitting of sweep records."""

    def test_fits_each_order(self):
        records = [_record(n, 3 * 2 ** (n // 2), order=2) for n in (2, 4, 6, 8)]
        records += [_record(n, 5 * 2 ** n, order=4) for n in (2, 4, 6)]
        fits = fit_records(records)
        assert sorted(fits) == [2, 4]
        assert fits[2].exponent == pytest.approx(0.5, abs=1e-9)
        assert fits[4].exponent == pytest.approx(1.0, abs=1e-9)


class TestCompare:
    """Test the closed-form versus optimizer comparison."""

    def test_optimizer_starts_from_closed_form(self):
        result = compare(SearchInstance(n_qubits=3), p=2, max_evals=100)
        assert result.p == 2
        assert result.optimized_objective >= result.closed_form_objective - 1e-12
        assert result.evaluations <= 100
        assert np.isfinite(result.to_dict()["closed_form_objective"])
