"""Seeded random instances: distributions, channels, FinStat morphisms and
commuting squares.

The bit stream comes from NumPy's ``PCG64``; identical :class:`GenConfig`
values give identical instances on every platform. A generator holds a
stateful stream and is meant for one thread; the harness gives every trial
its own generator (see :meth:`InstanceGenerator.for_trial`).

Commuting squares are never found by rejection: ``ν∘f = f′∘μ`` has measure
zero. Instead ``f′`` is drawn first and each ``f′_{y′μ(x)}`` is split across
the fiber ``ν⁻¹(y′)`` with random convex weights.
"""

from __future__ import annotations

import dataclasses
import hashlib
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from typing import Generic, TypeVar

import numpy as np

from .errors import SizeError
from .finstat import StatMorphism, bayes_inverse
from .finstat2 import TwoMorphism, reconstruction, with_optimal_hypotheses
from .prob_core import Channel, DetMap, Dist, FinSet, apply, mixture

__all__ = [
    "GenConfig",
    "InstanceGenerator",
    "ConvergentSequence",
    "random_dist",
    "random_surjection",
    "random_section",
    "random_stat_morphism",
    "random_two_morphism",
    "stacked_pair",
    "convergent_sequence",
]

# Probability that a sparse draw zeroes an entry before renormalising.
SPARSE_ZERO_PROB = 0.2

T = TypeVar("T")


@dataclass(frozen=True)
class GenConfig:
    """Generator settings.

    Args:
        seed: 64-bit master seed.
        max_size: bound on the size of every drawn set.
        full_support: draw strictly positive entries; otherwise each entry is
            zeroed with probability ``SPARSE_ZERO_PROB``.
        dirichlet_like: draw simplex points from Dirichlet(1, ..., 1) instead of
            normalised uniforms.
    """

    seed: int = 42
    max_size: int = 6
    full_support: bool = True
    dirichlet_like: bool = True

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.max_size < 1:
            raise ValueError(f"max_size must be positive, got {self.max_size!r}")

    def with_seed(self, seed: int) -> GenConfig:
        return dataclasses.replace(self, seed=seed)

    def sparse(self) -> GenConfig:
        return dataclasses.replace(self, full_support=False)

    def dense(self) -> GenConfig:
        return dataclasses.replace(self, full_support=True)


def suite_key(name: str) -> int:
    return int.from_bytes(hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest(), "little")


class ConvergentSequence(Generic[T]):
    """Elements ``1..n_max`` of a sequence converging to ``target``.

    Element ``n`` mixes each stochastic leg of the target with a fixed
    full-support draw at weight ``1/n``; deterministic legs never move.
    """

    def __init__(self, target: T, n_max: int, build: Callable[[float], T]):
        self.target = target
        self.n_max = n_max
        self._build = build

    def __len__(self) -> int:
        return self.n_max

    def element(self, n: int) -> T:
        if not 1 <= n <= self.n_max:
            raise IndexError(f"sequence index {n} outside 1..{self.n_max}")
        return self._build(1.0 / n)

    __getitem__ = element

    def sample(self, ns: Iterable[int]) -> list[tuple[int, T]]:
        return [(n, self.element(n)) for n in ns if n <= self.n_max]


class InstanceGenerator:
    def __init__(self, cfg: GenConfig, rng: np.random.Generator | None = None):
        self.cfg = cfg
        self.rng = rng if rng is not None else np.random.Generator(np.random.PCG64(cfg.seed))

    @classmethod
    def for_trial(cls, cfg: GenConfig, suite: str, index: int) -> InstanceGenerator:
        """An independent stream for one harness trial, fixed by (seed, suite, index)."""
        seq = np.random.SeedSequence([cfg.seed, suite_key(suite), index])
        return cls(cfg, np.random.Generator(np.random.PCG64(seq)))

    def capped(self, max_size: int) -> InstanceGenerator:
        """A view with a smaller size bound that draws from the same stream."""
        if max_size < 1:
            raise SizeError(f"cannot cap sizes at {max_size}")
        return InstanceGenerator(dataclasses.replace(self.cfg, max_size=min(max_size, self.cfg.max_size)), self.rng)

    # -- primitives ---------------------------------------------------------

    def draw_size(self, low: int = 1, high: int | None = None) -> int:
        high = self.cfg.max_size if high is None else high
        if low > high:
            raise SizeError(f"cannot draw a size in [{low}, {high}]")
        return int(self.rng.integers(low, high + 1))

    def simplex(self, n: int, full_support: bool | None = None) -> np.ndarray:
        """A random point of the ``n``-simplex."""
        full = self.cfg.full_support if full_support is None else full_support
        while True:
            w = self.rng.dirichlet(np.ones(n)) if self.cfg.dirichlet_like else self.rng.random(n)
            if not full:
                w = np.where(self.rng.random(n) < SPARSE_ZERO_PROB, 0.0, w)
            total = w.sum()
            if total > 0.0 and (not full or w.min() > 0.0):
                return w / total

    def space(self, n: int, prefix: str) -> FinSet:
        return FinSet.range(n, prefix)

    def random_dist(self, space: FinSet, full_support: bool | None = None) -> Dist:
        return Dist(space, self.simplex(len(space), full_support))

    def random_channel(self, dom: FinSet, cod: FinSet, full_support: bool | None = None) -> Channel:
        return Channel(dom, cod, np.stack([self.simplex(len(cod), full_support) for _ in dom.labels]))

    def random_surjection(self, dom: FinSet, cod: FinSet) -> DetMap:
        """One random preimage per element of ``cod``, the rest spread uniformly."""
        if len(dom) < len(cod):
            raise SizeError(f"no surjection from {len(dom)} elements onto {len(cod)}")
        order = self.rng.permutation(len(dom))
        indices = np.empty(len(dom), dtype=np.int64)
        indices[order[: len(cod)]] = np.arange(len(cod))
        indices[order[len(cod) :]] = self.rng.integers(0, len(cod), size=len(dom) - len(cod))
        return DetMap(dom, cod, indices)

    def random_section(self, h: DetMap, full_support: bool | None = None) -> Channel:
        """Row ``y`` is a random distribution supported on ``h⁻¹(y)``."""
        h.require_surjective()
        matrix = np.zeros((len(h.cod), len(h.dom)))
        for y, fiber in enumerate(h.fiber_indices()):
            matrix[y, fiber] = self.simplex(len(fiber), full_support)
        return Channel(h.cod, h.dom, matrix)

    def point_section(self, h: DetMap) -> Channel:
        """A deterministic section: row ``y`` is a point mass on one random preimage."""
        h.require_surjective()
        matrix = np.zeros((len(h.cod), len(h.dom)))
        for y, fiber in enumerate(h.fiber_indices()):
            matrix[y, fiber[int(self.rng.integers(len(fiber)))]] = 1.0
        return Channel(h.cod, h.dom, matrix)

    def split_along(self, coarse: Dist, h: DetMap, full_support: bool | None = None) -> Dist:
        """A distribution ``p`` on ``h.dom`` with ``h∘p = coarse``."""
        probs = np.zeros(len(h.dom))
        for y, fiber in enumerate(h.fiber_indices()):
            probs[fiber] = coarse.probs[y] * self.simplex(len(fiber), full_support)
        return Dist(h.dom, probs)

    def refine(self, fp: Channel, mu: DetMap, nu: DetMap, full_support: bool | None = None) -> Channel:
        """A channel ``f: X ⇝ Y`` with ``ν∘f = f′∘μ``."""
        fibers = nu.fiber_indices()
        matrix = np.zeros((len(mu.dom), len(nu.dom)))
        for x, x_prime in enumerate(mu.indices):
            row = fp.matrix[x_prime]
            for y_prime, fiber in enumerate(fibers):
                matrix[x, fiber] = row[y_prime] * self.simplex(len(fiber), full_support)
        return Channel(mu.dom, nu.dom, matrix)

    # -- morphisms ----------------------------------------------------------

    def random_stat_morphism(self) -> StatMorphism:
        n_x = self.draw_size()
        x_space, y_space = self.space(n_x, "x"), self.space(self.draw_size(1, n_x), "y")
        f = self.random_surjection(x_space, y_space)
        p = self.random_dist(x_space)
        return StatMorphism(f, p, self.random_section(f))

    def optimal_stat_morphism(self) -> StatMorphism:
        m = self.random_stat_morphism()
        return StatMorphism(m.f, m.p, bayes_inverse(m.f, m.p))

    def _square_over(
        self, x_prime: FinSet, y_prime: FinSet, fp: Channel, prefixes: tuple[str, str], collapse_y: bool = False
    ) -> tuple[DetMap, DetMap, Channel, Channel, Channel]:
        """Draw ``X, Y, μ, ν, s, t, f`` above a bottom row ``f′: X′ ⇝ Y′``."""
        x_space = self.space(self.draw_size(len(x_prime)), prefixes[0])
        y_low = len(y_prime) + 1 if collapse_y else len(y_prime)
        y_space = self.space(self.draw_size(y_low), prefixes[1])
        mu = self.random_surjection(x_space, x_prime)
        nu = self.random_surjection(y_space, y_prime)
        s = self.random_section(mu)
        t = self.random_section(nu)
        return mu, nu, s, t, self.refine(fp, mu, nu)

    def random_two_morphism(self, collapse_y: bool = False, prefixes: tuple[str, str, str, str] = ("x", "y", "xp", "yp")):
        """A random commuting square.

        With ``collapse_y`` the map ``ν`` is never injective (needs ``max_size >= 2``).
        """
        high = self.cfg.max_size - 1 if collapse_y else self.cfg.max_size
        x_prime = self.space(self.draw_size(1, self.cfg.max_size), prefixes[2])
        y_prime = self.space(self.draw_size(1, high), prefixes[3])
        fp = self.random_channel(x_prime, y_prime)
        mu, nu, s, t, f = self._square_over(x_prime, y_prime, fp, prefixes[:2], collapse_y)
        p = self.random_dist(mu.dom)
        dom = StatMorphism(mu, p, s)
        cod = StatMorphism(nu, apply(f, p), t)
        return TwoMorphism(dom, cod, f, fp)

    def stacked_pair(self, collapse_y: bool = False) -> tuple[TwoMorphism, TwoMorphism]:
        """Two vertically composable squares ``(spade, club)`` with ``club.f is spade.fp``.

        With ``collapse_y`` the upper map ``ν`` is never injective (needs ``max_size >= 2``).
        """
        lower = self.capped(self.cfg.max_size - 1) if collapse_y else self
        club = lower.random_two_morphism(prefixes=("xp", "yp", "xpp", "ypp"))
        mu, nu, s, t, f = self._square_over(club.dom.source, club.cod.source, club.f, ("x", "y"), collapse_y)
        p = self.split_along(club.p, mu)
        dom = StatMorphism(mu, p, s)
        cod = StatMorphism(nu, apply(f, p), t)
        return TwoMorphism(dom, cod, f, club.f), club

    def two_optimal_square(self) -> TwoMorphism:
        """A square whose top channel equals ``t∘f′∘μ``, so its CE vanishes."""
        sq = self.random_two_morphism()
        f = reconstruction(sq)
        return TwoMorphism(sq.dom, StatMorphism(sq.nu, apply(f, sq.p), sq.t), f, sq.fp)

    def bayes_square(self) -> TwoMorphism:
        """A random square whose sections are both optimal hypotheses."""
        return with_optimal_hypotheses(self.random_two_morphism())

    # -- convergent sequences -----------------------------------------------

    def convergent_stat_sequence(self, target: StatMorphism, n_max: int) -> ConvergentSequence[StatMorphism]:
        noise_p = self.random_dist(target.source, full_support=True)
        noise_s = self.random_section(target.f, full_support=True)

        def build(w: float) -> StatMorphism:
            return StatMorphism(target.f, mixture(target.p, noise_p, w), mixture(target.s, noise_s, w))

        return ConvergentSequence(target, n_max, build)

    def convergent_sequence(self, target: TwoMorphism, n_max: int) -> ConvergentSequence[TwoMorphism]:
        noise_p = self.random_dist(target.dom.source, full_support=True)
        noise_s = self.random_section(target.mu, full_support=True)
        noise_t = self.random_section(target.nu, full_support=True)
        noise_fp = self.random_channel(target.fp.dom, target.fp.cod, full_support=True)
        noise_f = self.refine(noise_fp, target.mu, target.nu, full_support=True)

        def build(w: float) -> TwoMorphism:
            p = mixture(target.p, noise_p, w)
            f = mixture(target.f, noise_f, w)
            dom = StatMorphism(target.mu, p, mixture(target.s, noise_s, w))
            cod = StatMorphism(target.nu, apply(f, p), mixture(target.t, noise_t, w))
            return TwoMorphism(dom, cod, f, mixture(target.fp, noise_fp, w))

        return ConvergentSequence(target, n_max, build)


# Module-level entry points: each builds a fresh generator from ``cfg``.


def random_dist(space: FinSet, cfg: GenConfig) -> Dist:
    return InstanceGenerator(cfg).random_dist(space)


def random_surjection(dom: FinSet, cod: FinSet, cfg: GenConfig) -> DetMap:
    return InstanceGenerator(cfg).random_surjection(dom, cod)


def random_section(h: DetMap, cfg: GenConfig) -> Channel:
    return InstanceGenerator(cfg).random_section(h)


def random_stat_morphism(cfg: GenConfig) -> StatMorphism:
    return InstanceGenerator(cfg).random_stat_morphism()


def random_two_morphism(cfg: GenConfig) -> TwoMorphism:
    return InstanceGenerator(cfg).random_two_morphism()


def stacked_pair(cfg: GenConfig) -> tuple[TwoMorphism, TwoMorphism]:
    return InstanceGenerator(cfg).stacked_pair()


def convergent_sequence(target: TwoMorphism, n_max: int, cfg: GenConfig) -> ConvergentSequence[TwoMorphism]:
    return InstanceGenerator(cfg).convergent_sequence(target, n_max)
