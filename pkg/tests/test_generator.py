"""Tests for the taskset generator."""

import json

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.tcsched.errors import InfeasibleParams, MissingCorpus
from src.tcsched.exact import merge_tasksets
from src.tcsched.generator import (
    MANIFEST_NAME,
    GenParams,
    derive_seeds,
    generate,
    generate_pairs,
    load_corpus,
    load_manifest,
    load_pair_corpus,
    write_corpus,
)
from src.tcsched.model import taskset_to_dict


class TestGenParams:
    """Tests for parameter checks."""

    def test_defaults_are_valid(self):
        """Test the default parameters pass."""
        GenParams().check()

    def test_too_many_dependencies(self):
        """Test more edges than an acyclic graph of 8 tasks can hold."""
        with pytest.raises(InfeasibleParams):
            GenParams(tasks=8, dependencies=29).check()

    def test_too_few_dependencies_for_jobs(self):
        """Test more sinks than jobs."""
        with pytest.raises(InfeasibleParams):
            GenParams(tasks=8, dependencies=3, jobs=2).check()

    def test_more_jobs_than_tasks(self):
        """Test job count above task count."""
        with pytest.raises(InfeasibleParams):
            GenParams(tasks=2, dependencies=1, jobs=3).check()

    @pytest.mark.parametrize('field', ['hyperperiod', 'tasks', 'nodes', 'channels', 'jobs'])
    def test_non_positive_counts(self, field):
        """Test zero counts are refused."""
        with pytest.raises(InfeasibleParams):
            GenParams(**{field: 0}).check()

    def test_bad_jitter_range(self):
        """Test an inverted jitter range."""
        with pytest.raises(InfeasibleParams):
            GenParams(jitter_range=(2, 1)).check()

    def test_dict_round_trip(self):
        """Test tuples survive serialization."""
        params = GenParams(jitter_range=(0, 1), age_range=(1, 3))
        assert GenParams.from_dict(json.loads(json.dumps(params.to_dict()))) == params


class TestGenerate:
    """Tests for single tasksets."""

    def test_deterministic(self):
        """Test equal params give equal tasksets."""
        params = GenParams(seed=42)
        assert taskset_to_dict(generate(params)) == taskset_to_dict(generate(params))

    def test_seed_matters(self):
        """Test different seeds give different tasksets."""
        assert taskset_to_dict(generate(GenParams(seed=1))) != taskset_to_dict(generate(GenParams(seed=2)))

    def test_counts(self):
        """Test the requested counts are met."""
        ts = generate(GenParams(hyperperiod=12, tasks=8, dependencies=9, jobs=3, nodes=4, channels=2, seed=5))
        assert len(ts) == 8
        assert len(ts.edges) == 9
        assert len(ts.jobs) == 3
        assert ts.hyperperiod == 12
        assert ts.channels == 2
        assert {t.node for t in ts.tasks} <= {'n0', 'n1', 'n2', 'n3'}

    def test_ages_within_dependent_period(self):
        """Test default ages lie in [1, period of the dependent]."""
        ts = generate(GenParams(seed=3, jobs=2))
        assert all(1 <= e.max_age <= ts.period(e.child) for e in ts.edges)

    def test_jitter_range(self):
        """Test jitter bounds come from the range."""
        ts = generate(GenParams(seed=3, jitter_range=(1, 1)))
        assert {t.max_jitter for t in ts.tasks} == {1}

    def test_name(self):
        """Test tasksets are named after their seed."""
        assert generate(GenParams(seed=9)).name == 'gen-9'

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32))
    def test_always_well_formed(self, seed):
        """Test every seed yields a well-formed taskset."""
        ts = generate(GenParams(hyperperiod=12, tasks=8, dependencies=12, jobs=3, nodes=8, seed=seed))
        assert nx.is_directed_acyclic_graph(ts.graph)
        assert len(ts.edges) == 12
        assert len(ts.leaf_tasks) <= 3
        assert all(12 % job.period == 0 for job in ts.jobs)


class TestPairs:
    """Tests for taskset pairs."""

    def test_no_pairs(self):
        """Test a count of zero."""
        assert generate_pairs(GenParams(), 0) == []

    def test_pairs_share_shape(self):
        """Test both sides share hyperperiod, job and node counts."""
        for a, b in generate_pairs(GenParams(jobs=2, nodes=5), 3):
            assert a.hyperperiod == b.hyperperiod
            assert len(a.jobs) == len(b.jobs)
            assert a.nodes == b.nodes
            merged, _ = merge_tasksets(a, b)
            assert len(merged) == len(a) + len(b)

    def test_derived_seeds(self):
        """Test seed derivation is deterministic."""
        assert derive_seeds(0, 4) == derive_seeds(0, 4)
        assert len(set(derive_seeds(0, 4))) == 4


class TestCorpus:
    """Tests for corpus files."""

    def test_write_and_load(self, tmp_path):
        """Test a corpus round trip."""
        params = GenParams(tasks=4, dependencies=3, nodes=4)
        data = write_corpus(params, 3, tmp_path)
        assert data['files'] == ['ts-00000.json', 'ts-00001.json', 'ts-00002.json']
        assert (tmp_path / MANIFEST_NAME).is_file()
        corpus = load_corpus(tmp_path)
        assert len(corpus) == 3
        assert corpus[0].name == 'ts-00000'
        assert load_manifest(tmp_path)['params']['tasks'] == 4

    def test_pair_corpus(self, tmp_path):
        """Test a pair corpus round trip."""
        write_corpus(GenParams(tasks=4, dependencies=3, nodes=4), 2, tmp_path, pairs=True)
        pairs = load_pair_corpus(tmp_path)
        assert len(pairs) == 2
        assert pairs[1][0].name == 'pair-00001-a'

    def test_single_corpus_is_not_a_pair_corpus(self, tmp_path):
        """Test loading pairs from a single-taskset corpus."""
        write_corpus(GenParams(tasks=4, dependencies=3, nodes=4), 1, tmp_path)
        with pytest.raises(MissingCorpus):
            load_pair_corpus(tmp_path)

    def test_missing_manifest(self, tmp_path):
        """Test a directory without a manifest."""
        with pytest.raises(MissingCorpus):
            load_corpus(tmp_path / 'absent')
