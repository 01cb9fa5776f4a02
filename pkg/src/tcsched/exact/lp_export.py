"""CPLEX-LP export of the scheduling model and solution import.

Rows are named after their constraint family so external tooling (and
the tests) can count them:

  c1_c_t          one task per slot
  c2_U_T_t        intersecting tasks apart
  c3_U_T_t        dependency window
  c4_T_p          once per own period
  c5_T_t          next execution one period later, +/- J (cyclic)
  c7_T_i_lo/hi    consecutive periods differ by at most J
  c8_/c10_/c11_   path-completeness rows of each (entry, leaf) pair
  c12_T_t         adaptation: stay within J of C
  c13_T           adaptation: switch-over gap of the first execution
  obj1_T_t        split of |x[t] - x[t+P]| in the slot-change objective
"""

import re
from pathlib import Path
from typing import Optional

import pulp

from ..errors import IoFailure
from ..logging_config import get_logger
from ..model.schedule import Schedule
from ..model.taskset import TaskSet
from ..utils import parse_solution_line, period_start, window_bounds
from ..validator import switch_over_bounds
from .solver import MilpInstance, Objective, compared_period_pairs

logger = get_logger(__name__, namespace='exact')

_VARIABLE = re.compile(r"^a_(\d+)_(\d+)_(\d+)$")


class _Model:
    def __init__(self, instance: MilpInstance):
        self.instance = instance
        self.taskset = instance.taskset
        self.hyperperiod = self.taskset.hyperperiod
        self.channels = self.taskset.channels
        sense = pulp.LpMaximize if instance.objective is Objective.STABILITY else pulp.LpMinimize
        self.problem = pulp.LpProblem(self.taskset.name.replace('+', '_') or "tcsched", sense)
        self.a = {
            (task, c, t): pulp.LpVariable(f"a_{task}_{c}_{t}", cat=pulp.LpBinary)
            for task, c, t in instance.variables()
        }

    def x(self, task: int, t: int) -> pulp.LpAffineExpression:
        """Channel-collapsed occupancy of a task in time-slot t."""
        return pulp.lpSum(self.a[(task, c, t)] for c in range(1, self.channels + 1))

    def add(self, constraint, name: str) -> None:
        self.problem += constraint, name

    # ------------------------------------------------------------------

    def collisions(self) -> None:
        for c in range(1, self.channels + 1):
            for t in range(1, self.hyperperiod + 1):
                self.add(pulp.lpSum(self.a[(task, c, t)] for task in self.taskset.task_ids) <= 1, f"c1_{c}_{t}")

    def intersections(self) -> None:
        for u, v in self.taskset.intersections.pairs():
            for t in range(1, self.hyperperiod + 1):
                self.add(self.x(u, t) + self.x(v, t) <= 1, f"c2_{u}_{v}_{t}")

    def dependencies(self) -> None:
        for edge in self.taskset.edges:
            period = self.taskset.period(edge.child)
            for t in range(1, self.hyperperiod + 1):
                low = max(1, t - edge.max_age, period_start(t, period))
                window = pulp.lpSum(self.x(edge.parent, i) for i in range(low, t))
                self.add(window - self.x(edge.child, t) >= 0, f"c3_{edge.parent}_{edge.child}_{t}")

    def periods(self) -> None:
        for task in self.taskset.task_ids:
            period = self.taskset.period(task)
            for p in range(1, self.hyperperiod // period + 1):
                low, high = window_bounds(p, period)
                self.add(pulp.lpSum(self.x(task, t) for t in range(low, high + 1)) == 1, f"c4_{task}_{p}")

    def jitter_windows(self) -> None:
        h = self.hyperperiod
        for task in self.taskset.task_ids:
            period, jitter = self.taskset.period(task), self.taskset.jitter(task)
            for t in range(1, h + 1):
                earlier = {(i - 1) % h + 1 for i in range(t - period - jitter, t - period + jitter + 1)}
                self.add(
                    pulp.lpSum(self.x(task, i) for i in sorted(earlier)) - self.x(task, t) >= 0,
                    f"c5_{task}_{t}",
                )

    def _execution_slot(self, task: int, p: int) -> pulp.LpAffineExpression:
        low, high = window_bounds(p, self.taskset.period(task))
        return pulp.lpSum(t * self.x(task, t) for t in range(low, high + 1))

    def period_changes(self) -> None:
        for task in self.taskset.task_ids:
            n = self.taskset.executions_per_hyperperiod(task)
            if n < 2:
                continue
            jitter = self.taskset.jitter(task)
            e = [self._execution_slot(task, p) for p in range(1, n + 1)]
            gaps = [e[i + 1] - e[i] for i in range(n - 1)] + [self.hyperperiod + e[0] - e[n - 1]]
            for i in range(1 if n == 2 else n):
                change = gaps[(i + 1) % n] - gaps[i]
                self.add(change <= jitter, f"c7_{task}_{i + 1}_hi")
                self.add(change >= -jitter, f"c7_{task}_{i + 1}_lo")

    def path_completeness(self) -> None:
        h = self.hyperperiod
        for job in self.taskset.jobs:
            for entry in job.entries:
                paths = self.taskset.path_sets[(entry, job.leaf)]
                if not paths.omega_breve:
                    continue
                size, short_size = len(paths.omega), len(paths.omega_breve)
                short_cap = short_size * (job.period + 1)
                for t in range(1, h + 1):
                    tag = f"{entry}_{job.leaf}_{t}"
                    span = range(t, min(t + job.period, h) + 1)
                    rho = pulp.LpVariable(f"rho_{tag}", lowBound=0, cat=pulp.LpInteger)
                    rho_s = pulp.LpVariable(f"rhos_{tag}", lowBound=0, cat=pulp.LpInteger)
                    self.add(rho == pulp.lpSum(self.x(m, i) for m in sorted(paths.omega) for i in span), f"c8_{tag}")
                    self.add(
                        rho_s == pulp.lpSum(self.x(m, i) for m in sorted(paths.omega_breve) for i in span),
                        f"c8s_{tag}",
                    )
                    whole = self._indicator(rho, size, size * 2, f"c10_{tag}")
                    whole_s = self._indicator(rho_s, short_size, short_cap, f"c10s_{tag}")
                    self.add(whole_s - whole >= 0, f"c11_{tag}")

    def _indicator(self, count: pulp.LpVariable, size: int, cap: int, name: str) -> pulp.LpVariable:
        """Binary that is 1 iff `count` is 0 or at least `size`."""
        none = pulp.LpVariable(f"{name}_none", cat=pulp.LpBinary)
        full = pulp.LpVariable(f"{name}_full", cat=pulp.LpBinary)
        flag = pulp.LpVariable(f"{name}_flag", cat=pulp.LpBinary)
        self.add(count + cap * none <= cap, f"{name}_none_hi")
        self.add(count + none >= 1, f"{name}_none_lo")
        self.add(count - size * full >= 0, f"{name}_full_lo")
        self.add(count - (cap - size + 1) * full <= size - 1, f"{name}_full_hi")
        self.add(flag == none + full, f"{name}_flag")
        return flag

    def adaptation(self) -> None:
        combined = self.instance.combined
        if combined is None:
            return
        occupied = combined.collapsed()
        for task in self.taskset.task_ids:
            jitter = self.taskset.jitter(task)
            c_slots = sorted(t for u, t in occupied if u == task)
            if not c_slots:
                continue
            for t in range(1, self.hyperperiod + 1):
                if not any(abs(t - c) <= jitter for c in c_slots):
                    self.add(self.x(task, t) <= 0, f"c12_{task}_{t}")
        for source in self.instance.sources:
            for task in source.task_ids():
                if not self.taskset.has_task(task):
                    continue
                lo, hi = switch_over_bounds(source, task, self.taskset.period(task), self.taskset.jitter(task))
                low, high = window_bounds(1, self.taskset.period(task))
                outside = [t for t in range(low, high + 1) if not lo <= t <= hi]
                if outside:
                    self.add(pulp.lpSum(self.x(task, t) for t in outside) <= 0, f"c13_{task}")

    def objective(self) -> None:
        objective = self.instance.objective
        if objective is Objective.SLOT_CHANGES:
            terms = []
            for task in self.taskset.task_ids:
                period = self.taskset.period(task)
                for t in range(1, self.hyperperiod - period + 1):
                    pos = pulp.LpVariable(f"dpos_{task}_{t}", lowBound=0)
                    neg = pulp.LpVariable(f"dneg_{task}_{t}", lowBound=0)
                    self.add(pos - neg == self.x(task, t) - self.x(task, t + period), f"obj1_{task}_{t}")
                    terms.extend([pos, neg])
            pairs = compared_period_pairs(self.taskset) or 1
            self.problem += (1.0 / pairs) * pulp.lpSum(terms)
        elif objective is Objective.STABILITY and self.instance.combined is not None:
            self.problem += pulp.lpSum(
                self.x(task, t) for task, t in sorted(self.instance.combined.collapsed()) if self.taskset.has_task(task)
            )

    def build(self) -> pulp.LpProblem:
        self.collisions()
        self.intersections()
        self.dependencies()
        self.periods()
        self.jitter_windows()
        self.period_changes()
        self.path_completeness()
        self.adaptation()
        self.objective()
        return self.problem


def build_problem(instance: MilpInstance) -> pulp.LpProblem:
    """The scheduling model as a pulp problem, one row per quantifier tuple."""
    problem = _Model(instance).build()
    logger.debug(f"model {problem.name}: {len(problem.variables())} variables, {len(problem.constraints)} rows")
    return problem


def export_milp(instance: MilpInstance, destination: str | Path) -> pulp.LpProblem:
    """Write the model in CPLEX-LP format.

    Raises:
        IoFailure: the destination cannot be written
    """
    problem = build_problem(instance)
    path = Path(destination)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        problem.writeLP(str(path))
    except OSError as e:
        raise IoFailure(f"cannot write model to {path}: {e}") from e
    logger.info(f"wrote {len(problem.constraints)} rows to {path}")
    return problem


def import_solution(taskset: TaskSet, text: str, channels: Optional[int] = None) -> Schedule:
    """Rebuild a schedule from `name value` lines of a solver solution.

    Only a_T_c_t variables with value 1 are read; everything else is
    ignored.
    """
    schedule = Schedule(taskset.hyperperiod, channels or taskset.channels)
    for line in text.splitlines():
        parsed = parse_solution_line(line)
        if parsed is None:
            continue
        name, value = parsed
        match = _VARIABLE.match(name)
        if match and value > 0.5:
            task, c, t = (int(g) for g in match.groups())
            schedule.place(task, t, c)
    return schedule
