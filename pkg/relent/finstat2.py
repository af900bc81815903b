"""2-morphisms between FinStat morphisms, and the entropies attached to them.

A 2-morphism ``♠: (μ, p, s) ⇒ (ν, q, t)`` is a pair of channels
``f: X ⇝ Y`` (top) and ``f′: X′ ⇝ Y′`` (bottom) with

    f∘p = q,    f′∘p′ = q′,    ν∘f = f′∘μ.

The sections ``s`` and ``t`` are not required to commute with anything.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import GlueMismatch, SpaceMismatch, SquareDoesNotCommute
from .finstat import StatMorphism, bayes_inverse, compose_stat, convex_combine_stat, identity_morphism, order_family, re
from .prob_core import (
    EPS_EQ,
    INF,
    Channel,
    Dist,
    ExtReal,
    base_log,
    apply,
    compose_channels,
    conditional_kl,
    direct_sum_channels,
    identity_channel,
    joint,
    kl,
    lift,
)

__all__ = [
    "TwoMorphism",
    "make_two_morphism",
    "identity_square",
    "horizontal_identity",
    "vcompose",
    "hcompose",
    "convex_combine_two",
    "reconstruction",
    "ce",
    "ce_closed_form",
    "re2",
    "re2_joint",
    "is_two_optimal",
    "lev77_marginal_check",
    "with_optimal_hypotheses",
]

TOP = "f∘p = q"
BOTTOM = "f′∘p′ = q′"
SQUARE = "ν∘f = f′∘μ"


def square_violations(dom: StatMorphism, cod: StatMorphism, f: Channel, fp: Channel) -> dict[str, float]:
    """Max entrywise violation of each commuting condition."""
    if f.dom != dom.source or f.cod != cod.source:
        raise SpaceMismatch("top channel f", (dom.source.labels, cod.source.labels), (f.dom.labels, f.cod.labels))
    if fp.dom != dom.target or fp.cod != cod.target:
        raise SpaceMismatch("bottom channel f′", (dom.target.labels, cod.target.labels), (fp.dom.labels, fp.cod.labels))
    nu_f = f.matrix @ lift(cod.f).matrix
    fp_mu = fp.matrix[dom.f.indices]
    return {
        TOP: apply(f, dom.p).distance(cod.p),
        BOTTOM: apply(fp, dom.q).distance(cod.q),
        SQUARE: float(np.max(np.abs(nu_f - fp_mu))),
    }


@dataclass(frozen=True, eq=False)
class TwoMorphism:
    dom: StatMorphism
    cod: StatMorphism
    f: Channel
    fp: Channel

    def __post_init__(self):
        for condition, violation in square_violations(self.dom, self.cod, self.f, self.fp).items():
            if violation > EPS_EQ:
                raise SquareDoesNotCommute(condition, violation)

    # the corners of the square, named as in ♠: (μ, p, s) ⇒ (ν, q, t)
    @property
    def mu(self):
        return self.dom.f

    @property
    def nu(self):
        return self.cod.f

    @property
    def s(self) -> Channel:
        return self.dom.s

    @property
    def t(self) -> Channel:
        return self.cod.s

    @property
    def p(self) -> Dist:
        return self.dom.p

    @property
    def q(self) -> Dist:
        return self.cod.p

    @property
    def p_prime(self) -> Dist:
        return self.dom.q

    @property
    def q_prime(self) -> Dist:
        return self.cod.q

    def size(self) -> int:
        return self.dom.size() + self.cod.size()

    def violations(self) -> dict[str, float]:
        return square_violations(self.dom, self.cod, self.f, self.fp)

    def distance(self, other: TwoMorphism) -> float:
        try:
            return max(
                self.dom.distance(other.dom),
                self.cod.distance(other.cod),
                self.f.distance(other.f),
                self.fp.distance(other.fp),
            )
        except SpaceMismatch:
            return math.inf

    def same_as(self, other: TwoMorphism, tol: float = EPS_EQ) -> bool:
        return self.distance(other) <= tol


def make_two_morphism(dom: StatMorphism, cod: StatMorphism, f: Channel, fp: Channel) -> TwoMorphism:
    """Validate a square ``dom ⇒ cod`` with top ``f`` and bottom ``fp``.

    Raises:
        SpaceMismatch: the legs do not line up.
        SquareDoesNotCommute: names the failing condition and its violation.
    """
    return TwoMorphism(dom, cod, f, fp)


def identity_square(f: Channel, p: Dist) -> TwoMorphism:
    """The unit for :func:`vcompose` on ``f: X ⇝ Y`` with prior ``p``.

    Both legs are identities with identity sections and both channels are ``f``,
    so CE and RE₂ vanish.
    """
    if f.dom != p.space:
        raise SpaceMismatch("identity_square", f.dom.labels, p.space.labels)
    return TwoMorphism(identity_morphism(f.dom, p), identity_morphism(f.cod, apply(f, p)), f, f)


def horizontal_identity(m: StatMorphism) -> TwoMorphism:
    """The unit for :func:`hcompose` at ``m``: the square ``m ⇒ m`` with identity channels."""
    return TwoMorphism(m, m, identity_channel(m.source), identity_channel(m.target))


# ---------------------------------------------------------------------------
# Composition and convex sums
# ---------------------------------------------------------------------------


def vcompose(club: TwoMorphism, spade: TwoMorphism) -> TwoMorphism:
    """Stack ``club`` below ``spade``: ``(μ′∘μ, p, s∘s′) ⇒ (ν′∘ν, q, t∘t′)`` with legs ``f`` and ``f″``."""
    if spade.dom.target != club.dom.source:
        raise SpaceMismatch("vcompose (X′)", spade.dom.target.labels, club.dom.source.labels)
    if spade.cod.target != club.cod.source:
        raise SpaceMismatch("vcompose (Y′)", spade.cod.target.labels, club.cod.source.labels)
    gaps = {
        "f′": club.f.distance(spade.fp),
        "p′": club.p.distance(spade.p_prime),
        "q′": club.q.distance(spade.q_prime),
    }
    for what, gap in gaps.items():
        if gap > EPS_EQ:
            raise GlueMismatch(what, gap)
    return TwoMorphism(compose_stat(club.dom, spade.dom), compose_stat(club.cod, spade.cod), spade.f, club.fp)


def hcompose(heart: TwoMorphism, spade: TwoMorphism) -> TwoMorphism:
    """Paste ``heart: (ν, q, t) ⇒ (ξ, r, u)`` after ``spade: (μ, p, s) ⇒ (ν, q, t)``."""
    if spade.cod.source != heart.dom.source or spade.cod.target != heart.dom.target:
        raise SpaceMismatch(
            "hcompose",
            (spade.cod.source.labels, spade.cod.target.labels),
            (heart.dom.source.labels, heart.dom.target.labels),
        )
    gap = spade.cod.distance(heart.dom)
    if gap > EPS_EQ:
        raise GlueMismatch("shared 1-morphism (ν, q, t)", gap)
    return TwoMorphism(
        spade.dom,
        heart.cod,
        compose_channels(heart.f, spade.f),
        compose_channels(heart.fp, spade.fp),
    )


def convex_combine_two(base: Dist, family: Mapping[str, TwoMorphism] | Sequence[TwoMorphism]) -> TwoMorphism:
    """The convex sum ``⊕_x p_x ♠^x``."""
    members = order_family(base.space, family)
    return TwoMorphism(
        convex_combine_stat(base, [sq.dom for sq in members]),
        convex_combine_stat(base, [sq.cod for sq in members]),
        direct_sum_channels(base.space, [sq.f for sq in members]),
        direct_sum_channels(base.space, [sq.fp for sq in members]),
    )


def with_optimal_hypotheses(spade: TwoMorphism) -> TwoMorphism:
    """The same square with ``s`` and ``t`` replaced by Bayes inverses."""
    dom = StatMorphism(spade.mu, spade.p, bayes_inverse(spade.mu, spade.p))
    cod = StatMorphism(spade.nu, spade.q, bayes_inverse(spade.nu, spade.q))
    return TwoMorphism(dom, cod, spade.f, spade.fp)


# ---------------------------------------------------------------------------
# Entropies
# ---------------------------------------------------------------------------


def reconstruction(spade: TwoMorphism) -> Channel:
    """``t∘f′∘μ: X ⇝ Y``, the top channel rebuilt through the bottom row."""
    return compose_channels(spade.t, compose_channels(spade.fp, lift(spade.mu)))


def ce(spade: TwoMorphism, base: float | str | None = None) -> ExtReal:
    """Conditional relative entropy ``Σ_x p_x D(f^x, (t∘f′∘μ)^x)``."""
    return conditional_kl(spade.f, reconstruction(spade), spade.p, base=base)


def ce_closed_form(spade: TwoMorphism, base: float | str | None = None) -> ExtReal:
    """``ΣΣ p_x f_{yx} log(f_{yx} / (t_{y ν(y)} f′_{ν(y) μ(x)}))``, without composing channels."""
    mu, nu = spade.mu.indices, spade.nu.indices
    weights = spade.p.probs[:, None] * spade.f.matrix
    denom = spade.t.matrix[nu, np.arange(len(nu))][None, :] * spade.fp.matrix[np.ix_(mu, nu)]
    live = weights > 0.0
    if np.any(live & (denom <= 0.0)):
        return INF
    total = float(np.sum(weights[live] * np.log(spade.f.matrix[live] / denom[live])))
    return ExtReal(max(total, 0.0) / base_log(base))


def re2(spade: TwoMorphism, base: float | str | None = None) -> ExtReal:
    """2-relative entropy ``RE(μ, p, s) + CE(♠)``."""
    return re(spade.dom, base=base) + ce(spade, base=base)


def re2_joint(spade: TwoMorphism, base: float | str | None = None) -> ExtReal:
    """RE₂ as one divergence of joints, ``D(ϑ(f|p), ϑ(t∘f′∘μ | s∘μ∘p))``."""
    return kl(joint(spade.f, spade.p), joint(reconstruction(spade), spade.dom.r), base=base)


def is_two_optimal(spade: TwoMorphism, tol: float = EPS_EQ) -> bool:
    """True iff ``f^x = (t∘f′∘μ)^x`` wherever ``p_x > tol``; then CE vanishes."""
    support = spade.p.probs > tol
    if not support.any():
        return True
    gap = np.abs(spade.f.matrix[support] - reconstruction(spade).matrix[support])
    return float(gap.max()) <= tol


class MarginalCheck(NamedTuple):
    ok: bool
    violation: float


def lev77_marginal_check(spade: TwoMorphism, tol: float = 1e-10) -> MarginalCheck:
    """Check ``p′_{x′} f′_{y′x′} = Σ_{x∈μ⁻¹(x′)} Σ_{y∈ν⁻¹(y′)} p_x f_{yx}`` entrywise."""
    lhs = spade.p_prime.probs[:, None] * spade.fp.matrix
    top = spade.p.probs[:, None] * spade.f.matrix
    rhs = lift(spade.mu).matrix.T @ top @ lift(spade.nu).matrix
    violation = float(np.max(np.abs(lhs - rhs)))
    return MarginalCheck(violation <= tol, violation)
