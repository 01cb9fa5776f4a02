"""Tests for the schedule validator."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.tcsched.errors import DimensionMismatch, TaskMissing
from src.tcsched.model import Schedule, build_taskset
from src.tcsched.validator import (
    dependency_window,
    feeding_execution,
    switch_over_bounds,
    transition_gap,
    validate,
    validate_transition,
)

from .factories import SHARED, SHARED_SLOTS, independent_tasks, make_schedule


@pytest.fixture
def fan_in():
    """P feeds X and Y which both feed L; P also forms its own faster job."""
    return build_taskset({
        'channels': 1,
        'tasks': [{'id': i, 'node': f"n{i}", 'maxJitter': 0} for i in range(4)],
        'edges': [
            {'from': 0, 'to': 1, 'maxAge': 10},
            {'from': 0, 'to': 2, 'maxAge': 10},
            {'from': 1, 'to': 3, 'maxAge': 10},
            {'from': 2, 'to': 3, 'maxAge': 10},
        ],
        'jobs': [
            {'id': 0, 'period': 10, 'leaf': 3, 'members': [0, 1, 2, 3]},
            {'id': 1, 'period': 5, 'leaf': 0, 'members': [0]},
        ],
    })


class TestValidSchedules:
    """Tests for schedules that satisfy every constraint."""

    def test_shared_schedule(self, shared, shared_schedule):
        """Test the reference schedule passes."""
        report = validate(shared_schedule, shared)
        assert report.overall
        assert report.summary() == 'valid'
        assert report.to_dict() == {'overall': True, 'violations': []}

    def test_chain_schedule(self, chain, chain_schedule):
        """Test the chain schedule passes."""
        assert validate(chain_schedule, chain).overall

    @settings(max_examples=20, deadline=None)
    @given(order=st.permutations([1, 2]))
    def test_channel_permutation_keeps_validity(self, order):
        """Test that relabelling channels never changes the verdict."""
        shared = build_taskset(SHARED)
        schedule = make_schedule(10, 2, SHARED_SLOTS)
        assert validate(schedule.permuted_channels(order), shared).overall

    @settings(max_examples=30, deadline=None)
    @given(slot=st.integers(1, 10), channel=st.integers(1, 2))
    def test_channel_permutation_keeps_failures(self, slot, channel):
        """Test that a broken schedule fails the same constraints after relabelling."""
        shared = build_taskset(SHARED)
        schedule = make_schedule(10, 2, SHARED_SLOTS)
        schedule.place(2, slot, channel)
        before = validate(schedule, shared).failed_constraints()
        after = validate(schedule.permuted_channels([2, 1]), shared).failed_constraints()
        assert before and before == after


class TestConstraintViolations:
    """Tests that each constraint is detected on its own."""

    def test_collision(self, shared, shared_schedule):
        """Test two tasks in one cell."""
        shared_schedule.remove(3, 9, 1)
        shared_schedule.place(3, 10, 1)
        failed = validate(shared_schedule, shared).failed_constraints()
        assert {1, 2} <= failed

    def test_intersecting_tasks_share_slot(self):
        """Test tasks on one node in one time-slot on different channels."""
        ts = independent_tasks([2, 2], nodes=['n0', 'n0'], channels=2)
        schedule = make_schedule(2, 2, {0: [(1, 1)], 1: [(1, 2)]})
        report = validate(schedule, ts)
        assert report.failed_constraints() == {2}
        assert report.by_constraint(2)[0].tasks == [0, 1]

    def test_non_intersecting_tasks_share_slot(self):
        """Test tasks on different nodes may share a time-slot."""
        ts = independent_tasks([2, 2], channels=2)
        schedule = make_schedule(2, 2, {0: [(1, 1)], 1: [(1, 2)]})
        assert validate(schedule, ts).overall

    def test_dependency_after_dependent(self, chain):
        """Test a parent that runs after its child."""
        schedule = make_schedule(6, 1, {0: [(5, 1)], 1: [(4, 1)], 2: [(6, 1)]})
        report = validate(schedule, chain)
        assert report.failed_constraints() == {3}
        assert report.by_constraint(3)[0].tasks == [0, 1]

    def test_data_too_old(self, chain_raw):
        """Test a parent execution older than the max age."""
        chain_raw['edges'][0]['maxAge'] = 2
        chain = build_taskset(chain_raw)
        schedule = make_schedule(6, 1, {0: [(1, 1)], 1: [(4, 1)], 2: [(6, 1)]})
        report = validate(schedule, chain)
        assert report.failed_constraints() == {4}
        assert report.summary() == 'invalid: C4x1'

    def test_dependents_read_different_executions(self, fan_in):
        """Test two dependents reading different executions of one parent."""
        schedule = make_schedule(10, 1, {0: [(1, 1), (6, 1)], 1: [(3, 1)], 2: [(8, 1)], 3: [(10, 1)]})
        report = validate(schedule, fan_in)
        assert report.failed_constraints() == {5}
        assert report.by_constraint(5)[0].slots == [1, 6]

    def test_dependents_read_same_execution(self, fan_in):
        """Test moving the late dependent before the second parent execution."""
        schedule = make_schedule(10, 1, {0: [(1, 1), (6, 1)], 1: [(3, 1)], 2: [(4, 1)], 3: [(10, 1)]})
        assert validate(schedule, fan_in).overall

    def test_missing_execution(self, chain):
        """Test a task that never runs."""
        schedule = make_schedule(6, 1, {0: [(1, 1)], 1: [(4, 1)]})
        assert validate(schedule, chain).failed_constraints() == {6}

    def test_second_execution_in_window(self):
        """Test a task running twice in one own-period window."""
        ts = independent_tasks([5], jitters=[5])
        schedule = make_schedule(5, 1, {0: [(1, 1), (3, 1)]})
        assert 6 in validate(schedule, ts).failed_constraints()

    def test_jitter_bound(self):
        """Test consecutive gaps 3 and 7 with jitter 2."""
        ts = build_taskset({
            'channels': 1,
            'tasks': [{'id': 0, 'node': 'n0', 'maxJitter': 2}],
            'edges': [],
            'jobs': [
                {'id': 0, 'period': 5, 'leaf': 0, 'members': [0]},
                {'id': 1, 'period': 10, 'leaf': 0, 'members': [0]},
            ],
        })
        schedule = make_schedule(10, 1, {0: [(4, 1), (7, 1)]})
        report = validate(schedule, ts)
        assert report.failed_constraints() == {7}

    def test_jitter_bound_met(self):
        """Test gaps within the bound pass."""
        ts = independent_tasks([5, 10], jitters=[2, 0])
        schedule = make_schedule(10, 1, {0: [(4, 1), (10, 1)], 1: [(1, 1)]})
        assert validate(schedule, ts).overall


class TestValidatorErrors:
    """Tests for inputs the validator refuses."""

    def test_wrong_hyperperiod(self, chain):
        """Test a schedule of the wrong length."""
        with pytest.raises(DimensionMismatch):
            validate(Schedule(5, 1), chain)

    def test_wrong_channels(self, chain):
        """Test a schedule with the wrong channel count."""
        with pytest.raises(DimensionMismatch):
            validate(Schedule(6, 2), chain)

    def test_unknown_task(self, chain, chain_schedule):
        """Test a schedule naming a task outside the taskset."""
        chain_schedule.place(9, 2, 1)
        with pytest.raises(TaskMissing):
            validate(chain_schedule, chain)


class TestDependencyWindow:
    """Tests for the slot range feeding a dependent."""

    def test_window_clipped_to_period(self, shared):
        """Test the window starts at the child's period start."""
        assert dependency_window(shared, 5, 4, 7) == (6, 6)
        assert dependency_window(shared, 5, 0, 10) == (1, 9)

    def test_feeding_execution_is_nearest(self, shared, shared_schedule):
        """Test the latest parent execution in the window is chosen."""
        assert feeding_execution(shared_schedule, shared, 5, 0, 10) == 6
        assert feeding_execution(shared_schedule, shared, 5, 4, 2) == 1

    def test_no_feeding_execution(self, chain):
        """Test an empty window."""
        schedule = make_schedule(6, 1, {0: [(5, 1)]})
        assert feeding_execution(schedule, chain, 0, 1, 4) is None


class TestTransition:
    """Tests for the switch-over check between schedules."""

    @pytest.fixture
    def task(self):
        return build_taskset({
            'channels': 1,
            'tasks': [{'id': 0, 'node': 'n0', 'maxJitter': 1}],
            'edges': [],
            'jobs': [
                {'id': 0, 'period': 5, 'leaf': 0, 'members': [0]},
                {'id': 1, 'period': 10, 'leaf': 0, 'members': [0]},
            ],
        })

    @pytest.fixture
    def old(self):
        return make_schedule(10, 1, {0: [(5, 1), (10, 1)]})

    def test_gap(self, old):
        """Test the gap across the switch."""
        new = make_schedule(10, 1, {0: [(5, 1), (10, 1)]})
        assert transition_gap(old, new, 0) == 5

    def test_bounds(self, old):
        """Test the legal range of the first new time-slot."""
        assert switch_over_bounds(old, 0, 5, 1) == (4, 6)

    def test_legal_switch(self, task, old):
        """Test a switch keeping the period."""
        new = make_schedule(10, 1, {0: [(5, 1), (10, 1)]})
        assert validate_transition(old, new, task).overall

    def test_illegal_switch(self, task, old):
        """Test a switch shortening the period beyond the jitter."""
        new = make_schedule(10, 1, {0: [(3, 1), (8, 1)]})
        report = validate_transition(old, new, task)
        assert report.failed_constraints() == {8}
        assert report.by_constraint(8)[0].slots == [10, 3]

    def test_unknown_new_task(self, task, old):
        """Test a new schedule naming an unknown task."""
        new = make_schedule(10, 1, {0: [(5, 1), (10, 1)], 4: [(2, 1)]})
        with pytest.raises(TaskMissing):
            validate_transition(old, new, task)

    def test_tasks_missing_from_merged_set_are_skipped(self, task):
        """Test old tasks without a counterpart are ignored."""
        old = make_schedule(10, 1, {7: [(5, 1)]})
        new = make_schedule(10, 1, {0: [(5, 1), (10, 1)]})
        assert validate_transition(old, new, task).overall
