"""The category FinStat.

A morphism ``(f, p, s): (X, p) → (Y, q)`` is a function ``f``, a prior ``p`` on
``X`` and a stochastic section ``s: Y ⇝ X`` of ``f``. The pushforward
``q = f∘p`` and the retrodiction ``r = s∘q`` are derived on construction.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import TypeVar

import numpy as np

from .errors import EmptyFamily, NotASection, PriorMismatch, SpaceMismatch
from .prob_core import (
    EPS_EQ,
    Channel,
    DetMap,
    Dist,
    ExtReal,
    FinSet,
    apply,
    compose_channels,
    compose_det,
    direct_sum_channels,
    direct_sum_det,
    identity_channel,
    kl,
    pushforward,
    section_violation,
    weighted_sum_dists,
)

__all__ = [
    "StatMorphism",
    "make_stat_morphism",
    "identity_morphism",
    "compose_stat",
    "re",
    "is_optimal",
    "bayes_inverse",
    "convex_combine_stat",
]

T = TypeVar("T")


@dataclass(frozen=True, eq=False)
class StatMorphism:
    f: DetMap
    p: Dist
    s: Channel
    q: Dist = field(init=False)
    r: Dist = field(init=False)

    def __post_init__(self):
        if self.p.space != self.f.dom:
            raise SpaceMismatch("prior of a FinStat morphism", self.f.dom.labels, self.p.space.labels)
        if self.s.dom != self.f.cod or self.s.cod != self.f.dom:
            raise SpaceMismatch(
                "section of a FinStat morphism",
                (self.f.cod.labels, self.f.dom.labels),
                (self.s.dom.labels, self.s.cod.labels),
            )
        # An empty fiber rules out every section, so report it first.
        self.f.require_surjective()
        violation = section_violation(self.s, self.f)
        if violation > EPS_EQ:
            raise NotASection(violation)
        q = pushforward(self.f, self.p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", apply(self.s, q))

    @property
    def source(self) -> FinSet:
        return self.f.dom

    @property
    def target(self) -> FinSet:
        return self.f.cod

    def size(self) -> int:
        return len(self.source) + len(self.target)

    def distance(self, other: StatMorphism) -> float:
        """Max entrywise distance of priors and sections; ``inf`` if the functions differ."""
        if not self.f.same_as(other.f):
            return float("inf")
        return max(self.p.distance(other.p), self.s.distance(other.s))

    def same_as(self, other: StatMorphism, tol: float = EPS_EQ) -> bool:
        return self.distance(other) <= tol

    def __repr__(self):
        return f"StatMorphism(f={self.f!r}, p={self.p!r}, s={self.s!r})"


def make_stat_morphism(f: DetMap, p: Dist, s: Channel) -> StatMorphism:
    """Validate ``(f, p, s)`` and derive ``q`` and ``r``.

    Raises:
        SpaceMismatch: the legs do not line up.
        NotSurjective: some element of ``Y`` has an empty fiber.
        NotASection: ``f ∘ s ≠ id_Y``.
    """
    return StatMorphism(f, p, s)


def identity_morphism(space: FinSet, p: Dist) -> StatMorphism:
    return StatMorphism(DetMap.identity(space), p, identity_channel(space))


def compose_stat(m2: StatMorphism, m1: StatMorphism) -> StatMorphism:
    """``(g∘f, p, s∘t)`` for ``m1 = (f, p, s)`` and ``m2 = (g, f∘p, t)``."""
    if m1.target != m2.source:
        raise SpaceMismatch("compose_stat", m1.target.labels, m2.source.labels)
    gap = m1.q.distance(m2.p)
    if gap > EPS_EQ:
        raise PriorMismatch(gap)
    return StatMorphism(compose_det(m2.f, m1.f), m1.p, compose_channels(m1.s, m2.s))


def re(m: StatMorphism, base: float | str | None = None) -> ExtReal:
    """Relative entropy ``RE(f, p, s) = D(p, s∘f∘p)``."""
    return kl(m.p, m.r, base=base)


def is_optimal(m: StatMorphism, tol: float = EPS_EQ) -> bool:
    """True iff ``s∘q = p``, i.e. ``s`` is an optimal hypothesis."""
    return m.r.distance(m.p) <= tol


def bayes_inverse(f: DetMap, p: Dist) -> Channel:
    """The optimal hypothesis for ``(f|p)``.

    ``s_{xy} = p_x / q_y`` on the fiber of ``y``; a fiber of zero mass gets the
    uniform distribution on itself.
    """
    f.require_surjective()
    q = pushforward(f, p).probs[f.indices]
    fiber_sizes = np.bincount(f.indices, minlength=len(f.cod))[f.indices]
    weights = np.divide(p.probs, q, out=np.zeros_like(q), where=q > 0.0)
    weights = np.where(q > 0.0, weights, 1.0 / fiber_sizes)
    matrix = np.zeros((len(f.cod), len(f.dom)))
    matrix[f.indices, np.arange(len(f.dom))] = weights
    # p_x / q_y sums to 1 only up to rounding.
    matrix /= matrix.sum(axis=1, keepdims=True)
    return Channel(f.cod, f.dom, matrix)


def order_family(base: FinSet, family: Mapping[str, T] | Sequence[T]) -> list[T]:
    """Return a family indexed by ``base`` as a list in ``base`` order."""
    if not family:
        raise EmptyFamily("a convex combination needs one member per element of its base")
    if isinstance(family, Mapping):
        if set(family) != set(base.labels):
            raise SpaceMismatch("convex combination family", base.labels, tuple(family))
        return [family[x] for x in base.labels]
    members = list(family)
    if len(members) != len(base):
        raise SpaceMismatch("convex combination family", f"{len(base)} members", f"{len(members)} members")
    return members


def convex_combine_stat(base: Dist, family: Mapping[str, StatMorphism] | Sequence[StatMorphism]) -> StatMorphism:
    """``⊕_x p_x (μ^x, q^x, s^x)`` on tagged disjoint unions (labels ``"x:u"``)."""
    members = order_family(base.space, family)
    return StatMorphism(
        direct_sum_det(base.space, [m.f for m in members]),
        weighted_sum_dists(base, [m.p for m in members]),
        direct_sum_channels(base.space, [m.s for m in members]),
    )
