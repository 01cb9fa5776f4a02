"""Exception hierarchy shared by every tc-sched module."""


class SchedulingError(Exception):
    """Base class for all tc-sched errors."""


# ============================================================================
# Taskset model
# ============================================================================

class TaskSetError(SchedulingError):
    """The taskset description is malformed."""


class CyclicDependency(TaskSetError):
    def __init__(self, cycle: list[tuple[int, int]]):
        self.cycle = cycle
        path = ' -> '.join(str(u) for u, _ in cycle)
        super().__init__(f"dependency cycle: {path} -> {cycle[0][0]}" if cycle else "dependency cycle")


class MultipleLeaves(TaskSetError):
    def __init__(self, job_id: int, leaves: list[int]):
        self.job_id = job_id
        self.leaves = leaves
        super().__init__(f"job {job_id} has {len(leaves)} leaves: {leaves}")


class DanglingReference(TaskSetError):
    """An edge or job names a task that does not exist."""


class NonDividingPeriod(TaskSetError):
    def __init__(self, job_id: int, period: int, hyperperiod: int):
        self.job_id = job_id
        super().__init__(f"job {job_id} period {period} does not divide H={hyperperiod}")


class DuplicateId(TaskSetError):
    """Two tasks, jobs or edges share an identifier."""


class EmptyJob(TaskSetError):
    """A job has no members, no entries or a non-positive period."""


# ============================================================================
# Validator
# ============================================================================

class DimensionMismatch(SchedulingError):
    """Schedule dimensions do not match the taskset (H, M)."""


class TaskMissing(SchedulingError):
    """A scheduled task is not part of the taskset."""


# ============================================================================
# Solvers
# ============================================================================

class ChannelCountMismatch(SchedulingError):
    def __init__(self, first: int, second: int):
        super().__init__(f"cannot merge task clusters with {first} and {second} channels")


class IoFailure(SchedulingError):
    """Reading or writing a model or solution file failed."""


class Unschedulable(SchedulingError):
    def __init__(
        self,
        message: str,
        task_id: int | None = None,
        subperiod: int | None = None,
        job_id: int | None = None,
    ):
        self.task_id = task_id
        self.subperiod = subperiod
        self.job_id = job_id
        super().__init__(message)


class DegenerateDenominator(SchedulingError):
    """A placement formula divides by zero."""


# ============================================================================
# Metrics and benchmarks
# ============================================================================

class EmptyCorpus(SchedulingError):
    """An aggregate metric was asked for over no schedules."""


class EmptyInput(SchedulingError):
    """A plot or CDF was asked for over no values."""


class InfeasibleParams(SchedulingError):
    """Generator parameters cannot be satisfied."""


class MissingCorpus(SchedulingError):
    """The corpus directory or manifest does not exist."""


class UnsoundSchedule(SchedulingError):
    """An engine emitted a schedule the validator rejects."""
