"""Tests for the Nelder-Mead baseline."""
import math

import pytest

from src.baseline import (
    InitStrategy,
    OptimizerConfig,
    OptimizerTrace,
    closed_form_start,
    grid_search,
    objective,
    optimize,
)
from src.errors import DomainError
from src.schedule import QaoaParams, SearchInstance


class TestObjective:
    """Test the success-probability objective."""

    def test_grover_angles(self):
        params = QaoaParams(gamma=(math.pi,), beta=(math.pi,))
        assert objective(SearchInstance(n_qubits=2), params) == pytest.approx(1.0, abs=1e-12)

    def test_zero_angles(self):
        params = QaoaParams(gamma=(0.0,), beta=(0.0,))
        assert objective(SearchInstance(n_qubits=2), params) == pytest.approx(0.25)

    def test_marked_index_invariance(self):
        params = QaoaParams(gamma=(0.7, 1.9), beta=(2.3, 0.4))
        values = [objective(SearchInstance(n_qubits=6, marked=m), params) for m in (0, 17, 63)]
        assert max(values) - min(values) <= 1e-12


class TestOptimizerConfig:
    """Test config validation."""

    @pytest.mark.parametrize("kwargs", [{"p": 0}, {"max_evals": 0}, {"tol": 0.0}, {"restarts": 0}])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            OptimizerConfig(**kwargs)


class TestOptimize:
    """Test the seeded optimization loop."""

    def setup_method(self):
        """Set up test fixtures."""
        self.instance = SearchInstance(n_qubits=2)
        self.config = OptimizerConfig(p=1, max_evals=500, seed=7)

    def test_finds_grover_angles(self):
        best, trace = optimize(self.instance, self.config)
        assert objective(self.instance, best) >= 0.99
        assert trace.best_objective >= 0.99
        assert len(trace) <= 500

    def test_trace_is_monotone(self):
        _, trace = optimize(self.instance, self.config)
        values = [entry.best_objective for entry in trace.entries]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_rerun_is_identical(self):
        """Identical seeds give byte-identical traces."""
        best_a, trace_a = optimize(self.instance, self.config)
        best_b, trace_b = optimize(self.instance, self.config)
        assert best_a == best_b
        assert trace_a.to_csv() == trace_b.to_csv()

    def test_returned_angles_are_wrapped(self):
        best, _ = optimize(self.instance, self.config)
        assert all(0.0 <= a < 2 * math.pi for a in best.gamma + best.beta)

    def test_budget_exhaustion(self):
        """Running out of evaluations returns best-so-far flagged 'budget'."""
        config = OptimizerConfig(p=2, max_evals=10, seed=1)
        best, trace = optimize(SearchInstance(n_qubits=6), config)
        assert trace.status == "budget"
        assert len(trace) == 10
        assert best.p == 2

    def test_closed_form_start_never_loses(self):
        """Starting from the synthesized angles can only improve on them."""
        instance = SearchInstance(n_qubits=4)
        start = objective(instance, closed_form_start(instance, 3))
        config = OptimizerConfig(p=3, max_evals=200, seed=5, init=InitStrategy.CLOSED_FORM)
        best, trace = optimize(instance, config)
        assert trace.entries[0].best_objective == pytest.approx(start, abs=1e-12)
        assert objective(instance, best) >= start - 1e-12


class TestOptimizerTrace:
    """Test trace bookkeeping."""

    def test_best_so_far(self):
        trace = OptimizerTrace()
        for value in (0.2, 0.5, 0.3):
            trace.record([0.0, 0.0], value)
        assert [e.best_objective for e in trace.entries] == [0.2, 0.5, 0.5]
        assert trace.to_csv().splitlines() == ["eval,best_objective", "1,0.20000000000000001",
                                               "2,0.5", "3,0.5"]

    def test_empty_trace(self):
        assert OptimizerTrace().best_objective == float("-inf")


class TestGridSearch:
    """Test the brute-force p = 1 landscape."""

    def test_grover_peak(self):
        best, value = grid_search(SearchInstance(n_qubits=2), resolution=0.01)
        assert value == pytest.approx(1.0, abs=1e-3)
        assert best.gamma[0] == pytest.approx(math.pi, abs=0.01)
        assert best.beta[0] == pytest.approx(math.pi, abs=0.01)

    def test_matches_simulator(self):
        instance = SearchInstance(n_qubits=4)
        best, value = grid_search(instance, resolution=0.05)
        assert objective(instance, best) == pytest.approx(value, abs=1e-12)

    def test_invalid_resolution(self):
        with pytest.raises(DomainError):
            grid_search(SearchInstance(n_qubits=2), resolution=0.0)
