"""Tests for :mod:`relent.randgen`."""

from __future__ import annotations

import numpy as np
import pytest

from relent import randgen
from relent.document import Document
from relent.errors import SizeError
from relent.finstat import re
from relent.finstat2 import ce, re2, vcompose
from relent.prob_core import FinSet, is_section, pushforward
from relent.randgen import GenConfig, InstanceGenerator


def fingerprint(obj) -> dict:
    return Document.of(obj=obj).to_dict()


class TestGenConfig:
    def test_defaults(self):
        cfg = GenConfig()
        assert (cfg.seed, cfg.max_size, cfg.full_support, cfg.dirichlet_like) == (42, 6, True, True)

    @pytest.mark.parametrize("kwargs", [{"seed": -1}, {"seed": 2**64}, {"max_size": 0}])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            GenConfig(**kwargs)

    def test_variants(self, cfg):
        assert cfg.with_seed(7).seed == 7
        assert not cfg.sparse().full_support
        assert cfg.sparse().dense() == cfg


class TestDeterminism:
    def test_same_seed_same_square(self, cfg):
        assert fingerprint(randgen.random_two_morphism(cfg)) == fingerprint(randgen.random_two_morphism(cfg))

    def test_different_seed_differs(self, cfg):
        a = fingerprint(randgen.random_two_morphism(cfg))
        b = fingerprint(randgen.random_two_morphism(cfg.with_seed(43)))
        assert a != b

    def test_trial_streams_are_independent_of_order(self, cfg):
        late = InstanceGenerator.for_trial(cfg, "suite", 5).random_stat_morphism()
        for index in range(5):
            InstanceGenerator.for_trial(cfg, "suite", index).random_stat_morphism()
        again = InstanceGenerator.for_trial(cfg, "suite", 5).random_stat_morphism()
        assert late.same_as(again, 0.0)

    def test_trial_streams_depend_on_suite(self, cfg):
        a = InstanceGenerator.for_trial(cfg, "one", 0).simplex(6)
        b = InstanceGenerator.for_trial(cfg, "two", 0).simplex(6)
        assert not np.array_equal(a, b)

    def test_suite_key_is_stable(self):
        assert randgen.suite_key("chain_rule") == randgen.suite_key("chain_rule")
        assert 0 <= randgen.suite_key("chain_rule") < 2**64


class TestPrimitives:
    def test_draw_size_bounds(self, gen):
        sizes = {gen.draw_size() for _ in range(200)}
        assert sizes == set(range(1, 7))
        with pytest.raises(SizeError):
            gen.draw_size(5, 4)

    def test_capped_shares_stream(self, gen):
        small = gen.capped(2)
        assert small.rng is gen.rng
        assert all(small.draw_size() <= 2 for _ in range(50))
        with pytest.raises(SizeError):
            gen.capped(0)

    @pytest.mark.parametrize("dirichlet_like", [True, False])
    def test_simplex_full_support(self, dirichlet_like):
        gen = InstanceGenerator(GenConfig(seed=1, dirichlet_like=dirichlet_like))
        for _ in range(50):
            w = gen.simplex(5)
            assert w.min() > 0.0
            assert w.sum() == pytest.approx(1.0)

    def test_sparse_draws_hit_zero(self):
        gen = InstanceGenerator(GenConfig(seed=3, full_support=False))
        draws = np.stack([gen.simplex(6) for _ in range(200)])
        assert (draws == 0.0).any()
        assert np.allclose(draws.sum(axis=1), 1.0)

    def test_surjection_covers_codomain(self, gen):
        for _ in range(50):
            n = gen.draw_size()
            h = gen.random_surjection(FinSet.range(n, "x"), FinSet.range(gen.draw_size(1, n), "y"))
            assert h.is_surjective()

    def test_surjection_needs_room(self, gen):
        with pytest.raises(SizeError):
            gen.random_surjection(FinSet.range(2, "x"), FinSet.range(3, "y"))

    def test_sections(self, gen):
        h = gen.random_surjection(FinSet.range(6, "x"), FinSet.range(3, "y"))
        assert is_section(gen.random_section(h), h)
        point = gen.point_section(h)
        assert is_section(point, h)
        assert set(np.unique(point.matrix)) <= {0.0, 1.0}

    def test_split_along(self, gen):
        h = gen.random_surjection(FinSet.range(5, "x"), FinSet.range(2, "y"))
        coarse = gen.random_dist(h.cod)
        assert pushforward(h, gen.split_along(coarse, h)).distance(coarse) <= 1e-12


class TestInstances:
    @pytest.mark.parametrize("seed", range(20))
    def test_stat_morphism_sizes(self, seed):
        m = randgen.random_stat_morphism(GenConfig(seed=seed, max_size=4))
        assert 1 <= len(m.target) <= len(m.source) <= 4

    def test_optimal_morphism(self, gen):
        assert float(re(gen.optimal_stat_morphism())) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_stacked_pair_composes(self, seed):
        spade, club = randgen.stacked_pair(GenConfig(seed=seed, max_size=5))
        assert club.f is spade.fp
        assert vcompose(club, spade).size() > 0

    @pytest.mark.parametrize("seed", range(20))
    def test_collapsing_pair(self, seed):
        gen = InstanceGenerator(GenConfig(seed=seed, max_size=2))
        spade, club = gen.stacked_pair(collapse_y=True)
        assert len(spade.nu.dom) > len(spade.nu.cod)
        assert len(club.dom.source) <= 2

    def test_collapse_needs_two_elements(self):
        gen = InstanceGenerator(GenConfig(seed=0, max_size=1))
        with pytest.raises(SizeError):
            gen.random_two_morphism(collapse_y=True)

    def test_prefixes(self, gen):
        sq = gen.random_two_morphism(prefixes=("a", "b", "c", "d"))
        assert sq.dom.source.labels[0] == "a0"
        assert sq.fp.cod.labels[0] == "d0"

    def test_max_size_one(self):
        sq = randgen.random_two_morphism(GenConfig(seed=5, max_size=1))
        assert sq.size() == 4

    def test_two_optimal_and_bayes_squares(self, gen):
        assert float(ce(gen.two_optimal_square())) == pytest.approx(0.0, abs=1e-12)
        bayes = gen.bayes_square()
        assert float(re(bayes.dom)) == pytest.approx(0.0, abs=1e-12)


class TestConvergentSequence:
    def test_elements_approach_target(self, gen):
        target = gen.random_two_morphism()
        sequence = randgen.convergent_sequence(target, 1_000_000, gen.cfg)
        assert len(sequence) == 1_000_000
        assert sequence[1_000_000].distance(target) <= 1e-5
        assert sequence.element(10).distance(target) > sequence.element(1000).distance(target)

    def test_legs_that_never_move(self, gen):
        target = gen.random_two_morphism()
        element = gen.convergent_sequence(target, 100).element(3)
        assert element.mu.same_as(target.mu)
        assert element.nu.same_as(target.nu)

    def test_index_bounds(self, gen):
        sequence = gen.convergent_stat_sequence(gen.random_stat_morphism(), 10)
        with pytest.raises(IndexError):
            sequence.element(0)
        with pytest.raises(IndexError):
            sequence.element(11)
        assert [n for n, _ in sequence.sample([1, 5, 10, 100])] == [1, 5, 10]

    def test_entropy_along_sequence_is_finite(self, gen):
        target = gen.random_two_morphism()
        for _, sq in gen.convergent_sequence(target, 10_000).sample([10, 100, 1000, 10_000]):
            assert not re2(sq).is_infinite
