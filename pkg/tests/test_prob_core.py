"""Tests for :mod:`relent.prob_core`.

Covers the value types (FinSet, Dist, Channel, DetMap), composition and its
fast paths, tagged sums and products, extended reals, and KL divergence with
its support conventions. Algebraic laws run under hypothesis.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relent import prob_core as pc
from relent.errors import InvalidChannel, InvalidDistribution, LabelError, NotPure, NotSurjective, SpaceMismatch


@st.composite
def probability_vectors(draw, n: int, full_support: bool = True):
    low = 0.01 if full_support else 0.0
    weights = np.array(draw(st.lists(st.floats(low, 1.0), min_size=n, max_size=n)))
    # keep sparse draws away from products that underflow to zero
    weights[weights < 1e-3] = 0.0
    if weights.sum() == 0.0:
        weights[0] = 1.0
    return weights / weights.sum()


@st.composite
def dists(draw, space: pc.FinSet, full_support: bool = True):
    return pc.Dist(space, draw(probability_vectors(len(space), full_support)))


@st.composite
def channels(draw, dom: pc.FinSet, cod: pc.FinSet, full_support: bool = True):
    rows = [draw(probability_vectors(len(cod), full_support)) for _ in dom.labels]
    return pc.Channel(dom, cod, np.array(rows))


sizes = st.integers(1, 5)


@st.composite
def spaces(draw, prefix: str):
    return pc.FinSet.range(draw(sizes), prefix)


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


class TestFinSet:
    def test_labels_and_index(self):
        xs = pc.FinSet(("a", "b", "c"))
        assert len(xs) == 3
        assert xs.index("b") == 1
        assert "c" in xs and "d" not in xs
        assert list(xs) == ["a", "b", "c"]

    def test_duplicate_labels_rejected(self):
        with pytest.raises(LabelError):
            pc.FinSet(("a", "a"))

    def test_empty_rejected(self):
        with pytest.raises(LabelError):
            pc.FinSet(())

    def test_unknown_label(self):
        with pytest.raises(LabelError):
            pc.FinSet(("a",)).index("z")

    def test_range_and_one_point(self):
        assert pc.FinSet.range(3, "y").labels == ("y0", "y1", "y2")
        assert len(pc.one_point()) == 1


class TestDist:
    xs = pc.FinSet(("a", "b"))

    def test_sum_must_be_one(self):
        with pytest.raises(InvalidDistribution):
            pc.Dist(self.xs, [0.5, 0.6])

    def test_tiny_negative_is_clamped(self):
        d = pc.Dist(self.xs, [-1e-12, 1.0 + 1e-12])
        assert d.probs[0] == 0.0

    def test_real_negative_rejected(self):
        with pytest.raises(InvalidDistribution):
            pc.Dist(self.xs, [-1e-6, 1.0 + 1e-6])

    def test_wrong_shape(self):
        with pytest.raises(InvalidDistribution):
            pc.Dist(self.xs, [1.0])

    def test_immutable(self):
        d = pc.uniform(self.xs)
        with pytest.raises(ValueError):
            d.probs[0] = 1.0

    def test_mapping_round_trip_drops_zeros(self):
        d = pc.Dist.from_mapping(self.xs, {"b": 1.0})
        assert d["a"] == 0.0
        assert d.as_mapping() == {"b": 1.0}

    def test_point_mass(self):
        assert pc.point_mass(self.xs, "b").as_mapping() == {"b": 1.0}


class TestChannel:
    xs = pc.FinSet(("a", "b"))
    ys = pc.FinSet(("u", "v", "w"))

    def test_row_per_input_orientation(self):
        f = pc.Channel.from_rows(self.xs, self.ys, {"a": {"u": 1.0}, "b": {"v": 0.25, "w": 0.75}})
        assert f.entry("w", "b") == 0.75
        assert f.row("a").as_mapping() == {"u": 1.0}
        assert f.as_rows() == {"a": {"u": 1.0}, "b": {"v": 0.25, "w": 0.75}}

    def test_rows_must_be_stochastic(self):
        with pytest.raises(InvalidChannel):
            pc.Channel(self.xs, self.ys, [[1.0, 0.0, 0.0], [0.5, 0.0, 0.0]])

    def test_constant_channel(self):
        d = pc.uniform(self.ys)
        c = pc.constant_channel(self.xs, d)
        assert np.allclose(c.matrix, 1.0 / 3.0)

    def test_as_channel(self):
        c = pc.as_channel(pc.uniform(self.xs))
        assert c.dom == pc.one_point()
        assert pc.apply(c, pc.point_mass(pc.one_point(), "⋆")).allclose(pc.uniform(self.xs))

    def test_mixture(self):
        a, b = pc.point_mass(self.xs, "a"), pc.point_mass(self.xs, "b")
        assert pc.mixture(a, b, 0.25).as_mapping() == {"a": 0.75, "b": 0.25}


class TestDetMap:
    xs = pc.FinSet(("a", "b", "c"))
    ys = pc.FinSet(("u", "v"))

    def test_call_and_fibers(self):
        h = pc.DetMap.from_mapping(self.xs, self.ys, {"a": "u", "b": "v", "c": "u"})
        assert h("c") == "u"
        assert pc.fiber(h, "u") == ("a", "c")
        assert h.is_surjective()

    def test_not_total(self):
        with pytest.raises(LabelError):
            pc.DetMap.from_mapping(self.xs, self.ys, {"a": "u"})

    def test_not_surjective_names_missing(self):
        h = pc.DetMap.from_mapping(self.xs, self.ys, {"a": "u", "b": "u", "c": "u"})
        with pytest.raises(NotSurjective) as info:
            h.require_surjective()
        assert info.value.missing == ("v",)

    def test_lift_and_as_det(self):
        h = pc.DetMap.from_mapping(self.xs, self.ys, {"a": "u", "b": "v", "c": "u"})
        assert pc.as_det(pc.lift(h)).same_as(h)

    def test_as_det_rejects_mixed_rows(self):
        with pytest.raises(NotPure):
            pc.as_det(pc.constant_channel(self.xs, pc.uniform(self.ys)))

    def test_compose_det(self):
        h = pc.DetMap.from_mapping(self.xs, self.ys, {"a": "u", "b": "v", "c": "u"})
        g = pc.DetMap.from_mapping(self.ys, pc.one_point(), {"u": "⋆", "v": "⋆"})
        assert pc.compose_det(g, h).as_mapping() == {"a": "⋆", "b": "⋆", "c": "⋆"}


# ---------------------------------------------------------------------------
# Composition laws
# ---------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_compose_associative(data):
    w, x, y, z = (data.draw(spaces(prefix)) for prefix in "wxyz")
    f, g, h = data.draw(channels(w, x)), data.draw(channels(x, y)), data.draw(channels(y, z))
    left = pc.compose_channels(h, pc.compose_channels(g, f))
    right = pc.compose_channels(pc.compose_channels(h, g), f)
    assert left.distance(right) <= pc.EPS_EQ


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_identity_is_neutral(data):
    x, y = data.draw(spaces("x")), data.draw(spaces("y"))
    f = data.draw(channels(x, y))
    assert pc.compose_channels(pc.identity_channel(y), f).distance(f) == 0.0
    assert pc.compose_channels(f, pc.identity_channel(x)).distance(f) == 0.0


def test_compose_rejects_mismatched_spaces():
    f = pc.identity_channel(pc.FinSet(("a",)))
    g = pc.identity_channel(pc.FinSet(("b",)))
    with pytest.raises(SpaceMismatch):
        pc.compose_channels(g, f)


class TestPureFastPaths:
    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_pure_fast_matches_generic(self, data):
        y, z = data.draw(spaces("y")), data.draw(spaces("z"))
        x = pc.FinSet.range(len(y) + data.draw(st.integers(0, 3)), "x")
        indices = list(range(len(y))) + data.draw(
            st.lists(st.integers(0, len(y) - 1), min_size=len(x) - len(y), max_size=len(x) - len(y))
        )
        h = pc.DetMap(x, y, indices)
        g = data.draw(channels(y, z))
        fast = pc.compose_pure_fast(g, h)
        assert fast.distance(pc.compose_channels(g, pc.lift(h))) <= 1e-12
        for i, j in enumerate(h.indices):
            assert np.array_equal(fast.matrix[i], g.matrix[j])

    def test_identity_leaves_channel_unchanged(self):
        y, z = pc.FinSet.range(3, "y"), pc.FinSet.range(2, "z")
        g = pc.Channel(y, z, [[0.5, 0.5], [1.0, 0.0], [0.2, 0.8]])
        assert np.array_equal(pc.compose_pure_fast(g, pc.DetMap.identity(y)).matrix, g.matrix)

    def test_constant_function_repeats_one_row(self):
        y, z = pc.FinSet.range(2, "y"), pc.FinSet.range(2, "z")
        g = pc.Channel(y, z, [[0.5, 0.5], [0.1, 0.9]])
        h = pc.DetMap(pc.FinSet.range(3, "x"), y, [1, 1, 1])
        assert np.allclose(pc.compose_pure_fast(g, h).matrix, [[0.1, 0.9]] * 3)

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_section_compose_matches_generic(self, data):
        x, y = data.draw(spaces("x")), data.draw(spaces("y"))
        z = pc.FinSet.range(len(y) + data.draw(st.integers(0, 3)), "z")
        k = pc.DetMap(z, y, list(range(len(y))) + [0] * (len(z) - len(y)))
        matrix = np.zeros((len(y), len(z)))
        for j, fib in enumerate(k.fiber_indices()):
            matrix[j, fib] = data.draw(probability_vectors(len(fib)))
        section = pc.Channel(y, z, matrix)
        assert pc.is_section(section, k, tol=0.0)
        f = data.draw(channels(x, y))
        fast = pc.lcm17_section_compose(section, k, f)
        assert fast.distance(pc.compose_channels(section, f)) <= 1e-12


class TestSections:
    xs = pc.FinSet(("a", "b", "c"))
    ys = pc.FinSet(("u", "v"))
    h = pc.DetMap(xs, ys, [0, 1, 0])

    def test_section_on_fibers(self):
        s = pc.Channel(self.ys, self.xs, [[0.3, 0.0, 0.7], [0.0, 1.0, 0.0]])
        assert pc.is_section(s, self.h)
        assert pc.section_violation(s, self.h) == 0.0

    def test_off_fiber_mass_measured(self):
        s = pc.Channel(self.ys, self.xs, [[0.3, 0.2, 0.5], [0.0, 1.0, 0.0]])
        assert pc.section_violation(s, self.h) == pytest.approx(0.2)
        assert not pc.is_section(s, self.h)


# ---------------------------------------------------------------------------
# Products, sums and marginals
# ---------------------------------------------------------------------------


class TestProductsAndSums:
    def test_product_labels_lexicographic(self):
        prod = pc.product(pc.FinSet(("a", "b")), pc.FinSet(("0", "1")))
        assert prod.labels == ("a⊗0", "a⊗1", "b⊗0", "b⊗1")

    def test_disjoint_union_tags(self):
        base = pc.FinSet(("x", "y"))
        union = pc.disjoint_union(base, [pc.FinSet(("a",)), pc.FinSet(("a", "b"))])
        assert union.labels == ("x:a", "y:a", "y:b")
        assert pc.split_tag("y:b") == ("y", "b")

    def test_base_labels_may_not_contain_colon(self):
        with pytest.raises(LabelError):
            pc.disjoint_union(pc.FinSet(("x:1",)), [pc.FinSet(("a",))])

    def test_direct_sum_is_block_diagonal(self):
        base = pc.FinSet(("x", "y"))
        f = pc.identity_channel(pc.FinSet(("a",)))
        g = pc.Channel(pc.FinSet(("a", "b")), pc.FinSet(("c",)), [[1.0], [1.0]])
        total = pc.direct_sum_channels(base, [f, g])
        assert total.matrix.tolist() == [[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]

    def test_convex_combine_channels(self):
        base = pc.Dist(pc.FinSet(("x", "y")), [0.25, 0.75])
        a = pc.FinSet(("a",))
        channel, prior = pc.convex_combine_channels(base, [pc.identity_channel(a)] * 2, [pc.uniform(a)] * 2)
        assert prior.as_mapping() == {"x:a": 0.25, "y:a": 0.75}
        assert channel.dom == prior.space

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_marginals_of_joint(self, data):
        x, y = data.draw(spaces("x")), data.draw(spaces("y"))
        p, f = data.draw(dists(x, full_support=False)), data.draw(channels(x, y, full_support=False))
        theta = pc.joint(f, p)
        assert pc.marginal_x(theta, x, y).distance(p) <= pc.EPS_EQ
        assert pc.marginal_y(theta, x, y).distance(pc.apply(f, p)) <= pc.EPS_EQ


# ---------------------------------------------------------------------------
# Extended reals and KL
# ---------------------------------------------------------------------------


class TestExtReal:
    def test_infinity_absorbs(self):
        assert (pc.INF + 3.0).is_infinite
        assert str(pc.INF) == "inf"

    def test_zero_weight_kills_infinity(self):
        assert pc.INF.weighted(0.0) == 0.0
        assert pc.INF.weighted(0.5).is_infinite

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            pc.ExtReal(-1.0)

    def test_ext_sum(self):
        assert pc.ext_sum([1.0, 2.0]) == 3.0
        assert pc.ext_sum([1.0, math.inf]).is_infinite

    @pytest.mark.parametrize(
        ("a", "b", "ok", "violation"),
        [
            (math.inf, math.inf, True, 0.0),
            (math.inf, 1.0, False, math.inf),
            (1.0, 1.0 + 1e-10, True, pytest.approx(1e-10)),
            (1.0, 1.1, False, pytest.approx(0.1)),
        ],
    )
    def test_ext_close(self, a, b, ok, violation):
        assert pc.ext_close(a, b, 1e-9) == (ok, violation)


class TestKL:
    xs = pc.FinSet(("a", "b"))

    def test_one_bit(self):
        p, u = pc.point_mass(self.xs, "a"), pc.uniform(self.xs)
        assert pc.kl(p, u, base=2) == pytest.approx(1.0)
        assert pc.kl(p, u) == pytest.approx(math.log(2))

    def test_zero_log_zero(self):
        p = pc.point_mass(self.xs, "b")
        q = pc.Dist(self.xs, [0.0, 1.0])
        assert pc.kl(p, q) == 0.0

    def test_support_violation_is_infinite(self):
        assert pc.kl(pc.uniform(self.xs), pc.point_mass(self.xs, "a")).is_infinite

    def test_log_base_context(self):
        p, u = pc.point_mass(self.xs, "a"), pc.uniform(self.xs)
        assert pc.get_log_base() == math.e
        with pc.log_base(2):
            assert pc.kl(p, u) == pytest.approx(1.0)
        assert pc.get_log_base() == math.e

    def test_bad_base(self):
        with pytest.raises(ValueError):
            pc.set_log_base("ten")

    def test_conditional_skips_null_inputs(self):
        f = pc.Channel(self.xs, self.xs, [[1.0, 0.0], [0.5, 0.5]])
        g = pc.Channel(self.xs, self.xs, [[0.0, 1.0], [0.5, 0.5]])
        assert pc.conditional_kl(f, g, pc.point_mass(self.xs, "b")) == 0.0
        assert pc.conditional_kl(f, g, pc.uniform(self.xs)).is_infinite

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_chain_rule(self, data):
        x, y = data.draw(spaces("x")), data.draw(spaces("y"))
        p, q = data.draw(dists(x)), data.draw(dists(x))
        f, g = data.draw(channels(x, y)), data.draw(channels(x, y))
        lhs = pc.kl(pc.joint(f, p), pc.joint(g, q))
        rhs = pc.kl(p, q) + pc.conditional_kl(f, g, p)
        assert pc.ext_close(lhs, rhs, 1e-9)[0]

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_chain_rule_at_support_boundary(self, data):
        x, y = data.draw(spaces("x")), data.draw(spaces("y"))
        p, q = data.draw(dists(x, False)), data.draw(dists(x, False))
        f, g = data.draw(channels(x, y, False)), data.draw(channels(x, y, False))
        lhs = pc.kl(pc.joint(f, p), pc.joint(g, q))
        rhs = pc.kl(p, q) + pc.conditional_kl(f, g, p)
        assert math.isinf(lhs) == math.isinf(rhs)
        assert pc.ext_close(lhs, rhs, 1e-9)[0]

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_gibbs(self, data):
        x = data.draw(spaces("x"))
        p, q = data.draw(dists(x, False)), data.draw(dists(x))
        assert pc.kl(p, q) >= 0.0
        assert pc.kl(p, p) == 0.0
