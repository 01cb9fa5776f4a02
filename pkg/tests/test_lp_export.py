"""Tests for the CPLEX-LP model export."""

from collections import Counter

import pytest

from src.tcsched.errors import IoFailure
from src.tcsched.exact import MilpInstance, Objective, build_problem, export_milp, import_solution, merge_schedules

from .factories import independent_tasks


def row_families(problem) -> Counter:
    return Counter(name.split('_')[0] for name in problem.constraints)


class TestBuildProblem:
    """Tests for row generation."""

    def test_single_task(self):
        """Test the smallest model has only capacity, period and jitter rows."""
        problem = build_problem(MilpInstance(independent_tasks([2])))
        assert row_families(problem) == Counter({'c1': 2, 'c4': 1, 'c5': 2})
        assert len(problem.variables()) == 2

    def test_chain(self, chain):
        """Test row counts of the chain."""
        families = row_families(build_problem(MilpInstance(chain)))
        assert families == Counter({'c1': 6, 'c2': 12, 'c3': 12, 'c4': 3, 'c5': 18})

    def test_period_change_rows(self, shared):
        """Test two executions give one pair of period-change rows."""
        problem = build_problem(MilpInstance(shared))
        families = row_families(problem)
        assert families['c7'] == 6
        assert 'c7_4_1_hi' in problem.constraints
        assert 'c7_4_2_hi' not in problem.constraints

    def test_path_completeness_rows(self, shared):
        """Test rows exist only for paths holding shorter-period tasks."""
        families = row_families(build_problem(MilpInstance(shared)))
        assert families['c8'] == 10
        assert families['c8s'] == 10
        assert families['c11'] == 10
        assert families['c10'] == 50
        assert families['c10s'] == 50

    def test_slot_change_objective(self, shared):
        """Test one split row per compared slot."""
        problem = build_problem(MilpInstance(shared, Objective.SLOT_CHANGES))
        assert row_families(problem)['obj1'] == 15
        assert problem.objective is not None

    def test_adaptation_rows(self, wide_chain, wide_chain_schedule):
        """Test C and switch-over rows of a merged instance."""
        merged = merge_schedules(wide_chain_schedule, wide_chain_schedule, wide_chain, wide_chain)
        instance = MilpInstance(merged.taskset, Objective.STABILITY, merged.combined, merged.sources)
        families = row_families(build_problem(instance))
        assert families['c12'] == 30
        assert families['c13'] == 6


class TestExport:
    """Tests for writing and reading solver files."""

    def test_writes_lp_file(self, tmp_path, chain):
        """Test the model file is written."""
        path = tmp_path / 'models' / 'chain.lp'
        export_milp(MilpInstance(chain), path)
        text = path.read_text()
        assert 'Subject To' in text
        assert 'c4_0_1' in text

    def test_unwritable_destination(self, tmp_path, chain):
        """Test a directory as destination raises IoFailure."""
        with pytest.raises(IoFailure):
            export_milp(MilpInstance(chain), tmp_path)

    def test_import_solution(self, chain, chain_schedule):
        """Test only set tensor variables are read."""
        text = "\n".join([
            "# solver output",
            "a_0_1_1 1",
            "a_1_1_4 1",
            "a_2_1_6 1.0",
            "a_2_1_5 0",
            "rho_5_0_1 3",
            "",
        ])
        assert import_solution(chain, text) == chain_schedule
