"""Shared fixtures."""

import copy

import pytest

from src.tcsched.model import Schedule, TaskSet, build_taskset

from .factories import CHAIN, SHARED, SHARED_SLOTS, make_schedule


@pytest.fixture
def shared_raw():
    return copy.deepcopy(SHARED)


@pytest.fixture
def shared(shared_raw) -> TaskSet:
    return build_taskset(shared_raw, name='shared')


@pytest.fixture
def shared_schedule() -> Schedule:
    return make_schedule(10, 2, SHARED_SLOTS)


@pytest.fixture
def chain_raw():
    return copy.deepcopy(CHAIN)


@pytest.fixture
def chain(chain_raw) -> TaskSet:
    return build_taskset(chain_raw, name='chain')


@pytest.fixture
def chain_schedule() -> Schedule:
    return make_schedule(6, 1, {0: [(1, 1)], 1: [(4, 1)], 2: [(6, 1)]})


@pytest.fixture
def wide_chain(chain_raw) -> TaskSet:
    """The chain on two channels, so two copies fit side by side."""
    chain_raw['channels'] = 2
    return build_taskset(chain_raw, name='chain')


@pytest.fixture
def wide_chain_schedule() -> Schedule:
    return make_schedule(6, 2, {0: [(1, 1)], 1: [(4, 1)], 2: [(6, 1)]})
