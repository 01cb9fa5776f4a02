"""Tests for the constructive scheduler."""

from dataclasses import replace

import pytest

from src.tcsched.errors import DegenerateDenominator, Unschedulable
from src.tcsched.exact import merge_schedules, solve
from src.tcsched.generator import GenParams, generate, generate_pairs
from src.tcsched.heuristic import (
    ALL_MODES,
    JobContext,
    Ordering,
    SchedulerMode,
    Shifting,
    adapt,
    backward_slot,
    find_common_execution,
    forward_slot,
    job_order,
    leaf_target,
    order_siblings,
    place_leaf,
    reschedule,
    resolve_slot,
    schedule,
    search_box,
)
from src.tcsched.heuristic.scheduler import _Scheduler
from src.tcsched.metrics import stability
from src.tcsched.model import Schedule, SolveStatus, build_taskset, empty_taskset
from src.tcsched.validator import validate, validate_transition

from .factories import SHARED_SLOTS, independent_tasks, make_schedule

TIME_FIRST = SchedulerMode.from_code('00')
CHANNEL_FIRST = SchedulerMode.from_code('10')


class TestModes:
    """Tests for mode codes."""

    def test_codes(self):
        """Test the two-digit codes round trip."""
        mode = SchedulerMode.from_code('11')
        assert mode.shifting is Shifting.CHANNEL_FIRST
        assert mode.ordering is Ordering.JITTER_FIRST
        assert str(mode) == 'heur-11'
        assert [m.code for m in ALL_MODES] == ['00', '01', '10', '11']

    def test_default_is_channel_first_age_first(self):
        """Test the default mode."""
        assert SchedulerMode().code == '10'

    @pytest.mark.parametrize('code', ['2', '20', '101', 'ab'])
    def test_bad_code(self, code):
        """Test malformed codes are rejected."""
        with pytest.raises(ValueError):
            SchedulerMode.from_code(code)


class TestOrderSiblings:
    """Tests for sibling ordering."""

    @pytest.fixture
    def siblings(self):
        """Two parents of one leaf with opposite age and jitter ranks."""
        return build_taskset({
            'channels': 1,
            'tasks': [
                {'id': 0, 'node': 'n0', 'maxJitter': 0},
                {'id': 1, 'node': 'n1', 'maxJitter': 2},
                {'id': 2, 'node': 'n2', 'maxJitter': 0},
            ],
            'edges': [
                {'from': 0, 'to': 2, 'maxAge': 3},
                {'from': 1, 'to': 2, 'maxAge': 1},
            ],
            'jobs': [{'id': 0, 'period': 6, 'leaf': 2, 'members': [0, 1, 2]}],
        })

    def test_age_first(self, siblings):
        """Test the tighter age bound goes first."""
        assert order_siblings([0, 1], SchedulerMode.from_code('10'), siblings, anchor=2) == [1, 0]

    def test_jitter_first(self, siblings):
        """Test the tighter jitter bound goes first."""
        assert order_siblings([0, 1], SchedulerMode.from_code('11'), siblings, anchor=2) == [0, 1]

    def test_ties_by_id(self, shared):
        """Test equal ages fall back to task id."""
        assert order_siblings([3, 2], CHANNEL_FIRST, shared, anchor={2: 0, 3: 0}) == [2, 3]


class TestEquations:
    """Tests for the placement formulas."""

    def test_leaf_target(self):
        """Test the leaf goes to the end of its subperiod."""
        assert leaf_target(5, 1) == 5
        assert leaf_target(5, 2) == 10

    def test_backward_slot(self):
        """Test parents spread back from their child."""
        assert backward_slot(6, None, 3, 1, 10) == 4
        assert backward_slot(4, None, 3, 2, 10) == 1
        assert backward_slot(10, 5, 3, 1, 10) == 8

    def test_backward_slot_capped_by_age(self):
        """Test the step never exceeds the max age."""
        assert backward_slot(6, None, 3, 1, 1) == 5

    def test_backward_slot_degenerate(self):
        """Test a distance equal to the job size."""
        with pytest.raises(DegenerateDenominator):
            backward_slot(6, None, 3, 3, 10)

    def test_forward_slot(self):
        """Test children spread forward from a reused parent."""
        assert forward_slot(2, 8, 2, 10) == 5
        assert forward_slot(2, 8, 2, 2) == 4
        assert forward_slot(2, 8, 2, 10, t_parent_next=6) == 4
        assert forward_slot(7, 8, 3, 10) == 8

    def test_forward_slot_from_leaf(self):
        """Test the leaf has no forward step."""
        with pytest.raises(DegenerateDenominator):
            forward_slot(2, 8, 0, 10)

    def test_search_box(self):
        """Test the reuse range for the first and a later subperiod."""
        assert search_box(1, 5, 0, 0, delta=1, size=3, age_sum=10) == (2, 4)
        assert search_box(2, 5, 0, 1, delta=1, size=3, age_sum=10, t_child_prev=5, t_common_prev=2) == (6, 8)

    def test_search_box_first_subperiod_ignores_ages(self):
        """Test short ages do not narrow the first subperiod's range."""
        assert search_box(1, 10, 0, 0, delta=1, size=3, age_sum=2) == (2, 9)
        assert search_box(1, 10, 2, 0, delta=1, size=3, age_sum=2) == (2, 11)


class TestResolveSlot:
    """Tests for conflict shifting."""

    @pytest.fixture
    def trio(self):
        """Three single-task jobs; tasks 1 and 2 share a node."""
        return independent_tasks([6, 6, 6], nodes=['n0', 'n1', 'n1'], jitters=[0, 0, 1], channels=2)

    def test_free_target(self, trio):
        """Test a free target is taken as is."""
        assert resolve_slot(2, 3, Schedule(6, 2), CHANNEL_FIRST, trio) == (3, 1)

    def test_time_first_shifts_in_time(self, trio):
        """Test time-first moves to the next slot on the same channel."""
        grid = make_schedule(6, 2, {0: [(3, 1)]})
        assert resolve_slot(2, 3, grid, TIME_FIRST, trio) == (4, 1)

    def test_channel_first_shifts_channel(self, trio):
        """Test channel-first stays in the slot on the next channel."""
        grid = make_schedule(6, 2, {0: [(3, 1)]})
        assert resolve_slot(2, 3, grid, CHANNEL_FIRST, trio) == (3, 2)

    def test_intersecting_occupant_blocks_slot(self, trio):
        """Test a slot holding an intersecting task is skipped on all channels."""
        grid = make_schedule(6, 2, {1: [(3, 1)]})
        assert resolve_slot(2, 3, grid, CHANNEL_FIRST, trio) == (4, 1)
        assert resolve_slot(2, 3, grid, TIME_FIRST, trio) == (4, 1)

    def test_accept_veto(self, trio):
        """Test the accept hook vetoes time-slots."""
        assert resolve_slot(2, 3, Schedule(6, 2), CHANNEL_FIRST, trio, accept=lambda t: t != 3) == (4, 1)

    def test_hyperperiod_edge(self, trio):
        """Test slots past H are never used."""
        grid = make_schedule(6, 2, {0: [(6, 1)], 1: [(6, 2)]})
        assert resolve_slot(2, 6, grid, CHANNEL_FIRST, trio) == (5, 1)

    def test_unschedulable(self, trio):
        """Test no jitter room and an intersecting occupant."""
        grid = make_schedule(6, 2, {2: [(3, 1)]})
        with pytest.raises(Unschedulable) as exc:
            resolve_slot(1, 3, grid, CHANNEL_FIRST, trio)
        assert exc.value.task_id == 1

    def test_widen_searches_whole_hyperperiod(self, trio):
        """Test a widened search takes the nearest usable slot outside the jitter bound."""
        grid = make_schedule(6, 2, {2: [(3, 1)]})
        assert resolve_slot(1, 3, grid, CHANNEL_FIRST, trio, widen=True) == (4, 1)
        assert resolve_slot(1, 3, grid, TIME_FIRST, trio, widen=True) == (4, 1)
        assert resolve_slot(1, 3, grid, CHANNEL_FIRST, trio, accept=lambda t: t != 4, widen=True) == (2, 1)

    def test_widen_unschedulable(self, trio):
        """Test a widened search that finds nothing names the whole hyperperiod."""
        with pytest.raises(Unschedulable, match='anywhere in the hyperperiod'):
            resolve_slot(1, 3, Schedule(6, 2), CHANNEL_FIRST, trio, accept=lambda t: False, widen=True)


class TestPlaceLeaf:
    """Tests for leaf placement."""

    def test_full_target_moves_back(self):
        """Test a full end-of-subperiod slot pushes the leaf one slot back."""
        ts = independent_tasks([6, 6, 6], jitters=[1, 0, 0], channels=2)
        grid = make_schedule(6, 2, {1: [(6, 1)], 2: [(6, 2)]})
        ctx = JobContext.for_job(ts, ts.job(0))
        assert place_leaf(ctx, grid, CHANNEL_FIRST, ts) == 5
        assert grid.slots(0) == [5]

    def test_existing_execution_is_reused(self):
        """Test a leaf already running in the subperiod is not placed again."""
        ts = independent_tasks([6])
        grid = make_schedule(6, 1, {0: [(4, 1)]})
        ctx = JobContext.for_job(ts, ts.job(0))
        assert place_leaf(ctx, grid, CHANNEL_FIRST, ts) == 4
        assert grid.execution_count() == 1


class TestJobContext:
    """Tests for per-job distances."""

    def test_shared_first_job(self, shared):
        """Test distances to the leaf and from the entry."""
        ctx = JobContext.for_job(shared, shared.job(0))
        assert ctx.delta == {0: 0, 2: 1, 3: 1, 4: 2, 5: 3}
        assert ctx.depth == {5: 0, 4: 1, 2: 2, 3: 2, 0: 3}
        assert ctx.size == 5
        assert ctx.subperiods == 1

    def test_age_to_leaf(self, chain):
        """Test summed ages along the longest path."""
        ctx = JobContext.for_job(chain, chain.job(0))
        assert ctx.age_to_leaf == {2: 0, 1: 10, 0: 20}

    def test_job_order(self, shared):
        """Test the longer job goes first."""
        assert [j.id for j in job_order(shared)] == [0, 1]

    def test_find_common_execution(self, shared):
        """Test a common execution outside the search box is not reused."""
        grid = make_schedule(10, 2, {4: [(7, 1)], 5: [(6, 1)]})
        ctx = JobContext.for_job(shared, shared.job(1))
        assert find_common_execution(4, ctx, grid, shared) is None
        ctx.k = 2
        previous = {1: 5, 4: 2, 5: 1}
        assert find_common_execution(4, ctx, grid, shared, previous) == 7

    def test_parents_fit(self, chain):
        """Test a slot is refused when an unplaced parent can no longer feed it."""
        builder = _Scheduler(chain, CHANNEL_FIRST)
        ctx = JobContext.for_job(chain, chain.job(0))
        assert builder._parents_fit(2, 5, {}, ctx)
        assert not builder._parents_fit(2, 1, {}, ctx)

        builder.schedule = make_schedule(6, 1, {1: [(6, 1)]})
        assert not builder._parents_fit(2, 5, {}, ctx)
        builder.schedule = make_schedule(6, 1, {1: [(3, 1)]})
        assert builder._parents_fit(2, 5, {}, ctx)
        assert builder._parents_fit(2, 5, {1: 2}, ctx)


class TestSchedule:
    """Tests for whole-taskset scheduling."""

    def test_chain(self, chain):
        """Test the chain is spread back from the leaf."""
        outcome = schedule(chain)
        assert outcome.status is SolveStatus.FEASIBLE
        assert outcome.engine == 'heur-10'
        assert {t: outcome.schedule.slots(t) for t in range(3)} == {0: [1], 1: [4], 2: [6]}

    @pytest.mark.parametrize('mode', ALL_MODES, ids=str)
    def test_shared_in_every_mode(self, shared, mode):
        """Test the reference taskset is scheduled with common tasks reused."""
        outcome = schedule(shared, mode)
        assert outcome.feasible
        assert outcome.engine == str(mode)
        assert validate(outcome.schedule, shared).overall
        assert outcome.schedule == make_schedule(10, 2, SHARED_SLOTS)
        assert outcome.nodes == 9

    def test_mode_as_code(self, chain):
        """Test the mode may be given as its code."""
        assert schedule(chain, '01').engine == 'heur-01'

    def test_unschedulable(self):
        """Test a dependency without room before its leaf."""
        ts = build_taskset({
            'channels': 1,
            'tasks': [{'id': 0, 'node': 'n0'}, {'id': 1, 'node': 'n1'}],
            'edges': [{'from': 0, 'to': 1, 'maxAge': 1}],
            'jobs': [{'id': 0, 'period': 1, 'leaf': 1, 'members': [0, 1]}],
        })
        outcome = schedule(ts)
        assert outcome.status is SolveStatus.UNSCHEDULABLE
        assert outcome.schedule is None
        assert 'subperiod 1' in outcome.message
        assert solve(ts, time_budget=10).status is SolveStatus.INFEASIBLE

    def test_empty_taskset(self):
        """Test nothing to schedule is trivially feasible."""
        outcome = schedule(empty_taskset())
        assert outcome.feasible
        assert outcome.schedule.execution_count() == 0

    def test_capacity_exceeded(self):
        """Test more period-1 tasks than channels."""
        ts = independent_tasks([1, 1], channels=1)
        assert schedule(ts).status is SolveStatus.UNSCHEDULABLE


class TestAdaptation:
    """Tests for rescheduling merged clusters."""

    def test_two_chains_side_by_side(self, wide_chain, wide_chain_schedule):
        """Test identical clusters end up on separate channels, unmoved."""
        outcome = adapt(wide_chain, wide_chain_schedule, wide_chain, wide_chain_schedule)
        assert outcome.feasible
        merged = merge_schedules(wide_chain_schedule, wide_chain_schedule, wide_chain, wide_chain)
        assert stability(merged.combined, outcome.schedule) == 6

    def test_reschedule_respects_switch_over(self, chain, chain_schedule):
        """Test one channel cannot hold two jitter-free chains."""
        merged = merge_schedules(chain_schedule, chain_schedule, chain, chain)
        outcome = reschedule(merged, TIME_FIRST)
        assert outcome.status is SolveStatus.UNSCHEDULABLE

    def test_adapt_with_empty_cluster(self, shared, shared_schedule):
        """Test merging with an empty cluster reschedules the first one alone."""
        merged = adapt(shared, shared_schedule, empty_taskset(shared.channels), Schedule(10, shared.channels))
        alone = schedule(shared, CHANNEL_FIRST, sources=[shared_schedule])
        assert merged.status is alone.status
        assert merged.schedule == alone.schedule


SOLO = GenParams(hyperperiod=8, tasks=5, dependencies=5, jobs=2, nodes=5, channels=2, jitter_range=(0, 1))
CORPUS = GenParams(hyperperiod=12, tasks=8, dependencies=9, jobs=2, nodes=8, channels=3)
PAIRS = GenParams(
    hyperperiod=8, tasks=5, dependencies=4, jobs=1, nodes=5, channels=3,
    jitter_range=(1, 2), age_range=(4, 8),
)


@pytest.fixture(scope='module')
def merge_outcomes():
    """Per mode, the reschedule outcome of every pair whose members fit alone."""
    outcomes = {}
    for mode in ALL_MODES:
        results = []
        for first_set, second_set in generate_pairs(PAIRS, 20):
            first, second = schedule(first_set, mode), schedule(second_set, mode)
            if first.feasible and second.feasible:
                merged = merge_schedules(first.schedule, second.schedule, first_set, second_set)
                results.append((merged, reschedule(merged, mode)))
        outcomes[mode] = results
    return outcomes


class TestCorpus:
    """Tests over generated tasksets."""

    @pytest.mark.parametrize('seed', range(10))
    def test_deterministic(self, seed):
        """Test equal inputs give equal schedules in every mode."""
        taskset = generate(replace(CORPUS, seed=seed))
        for mode in ALL_MODES:
            first, second = schedule(taskset, mode), schedule(taskset, mode)
            assert first.status is second.status
            assert first.schedule == second.schedule

    @pytest.mark.parametrize('seed', range(12))
    def test_sound(self, seed):
        """Test every feasible schedule validates and agrees with the exact engine."""
        taskset = generate(replace(SOLO, seed=seed))
        exact = solve(taskset, time_budget=30)
        for mode in ALL_MODES:
            outcome = schedule(taskset, mode)
            if outcome.feasible:
                assert validate(outcome.schedule, taskset).overall
                assert exact.status is not SolveStatus.INFEASIBLE

    def test_channel_first_dominates(self):
        """Test channel-first schedules at least as many tasksets as time-first."""
        tasksets = [generate(replace(CORPUS, seed=seed)) for seed in range(30)]
        successes = {mode: sum(schedule(ts, mode).feasible for ts in tasksets) for mode in ALL_MODES}
        channel_first = sum(n for mode, n in successes.items() if mode.shifting is Shifting.CHANNEL_FIRST)
        time_first = sum(n for mode, n in successes.items() if mode.shifting is Shifting.TIME_FIRST)
        assert channel_first > 0
        assert channel_first >= time_first

    def test_merges_pass_switch_over(self, merge_outcomes):
        """Test every feasible reschedule validates, including both switch-overs."""
        for results in merge_outcomes.values():
            for merged, outcome in results:
                if outcome.feasible:
                    assert validate(outcome.schedule, merged.taskset).overall
                    for source in merged.sources:
                        assert validate_transition(source, outcome.schedule, merged.taskset).overall

    def test_channel_first_merges(self, merge_outcomes):
        """Test channel-first reschedules most pairs and no fewer than time-first."""
        def rate(shifting):
            results = [o for mode, rs in merge_outcomes.items() if mode.shifting is shifting for _, o in rs]
            return sum(o.feasible for o in results) / len(results)

        assert rate(Shifting.CHANNEL_FIRST) >= 0.4
        assert rate(Shifting.CHANNEL_FIRST) >= rate(Shifting.TIME_FIRST)
