"""Finite probability spaces, channels and relative entropy.

Everything in this module is an immutable value: arrays are copied on
construction and frozen with ``setflags(write=False)``, so objects can be
shared between threads without locks.

Orientation: a :class:`Channel` ``X ⇝ Y`` stores one row per input, so
``channel.matrix[x, y]`` is the probability ``f_{yx}`` of output ``y`` given
input ``x``. Composition is then a plain matrix product ``f.matrix @ g.matrix``.
"""

from __future__ import annotations

import contextvars
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
from scipy.special import rel_entr

from .errors import InvalidChannel, InvalidDistribution, LabelError, NotPure, NotSurjective, SpaceMismatch

__all__ = [
    "EPS_STOCH",
    "EPS_EQ",
    "ExtReal",
    "INF",
    "ZERO",
    "FinSet",
    "Dist",
    "Channel",
    "DetMap",
    "compose_channels",
    "lift",
    "as_det",
    "apply",
    "is_section",
    "joint",
    "kl",
    "conditional_kl",
    "compose_pure_fast",
]

# Validation slack for row sums and small negative entries.
EPS_STOCH = 1e-9
# Tolerance for equality of distributions and channels.
EPS_EQ = 1e-9

PRODUCT_SEP = "⊗"
TAG_SEP = ":"

_LOG_BASE: contextvars.ContextVar[float] = contextvars.ContextVar("relent_log_base", default=math.e)


# ---------------------------------------------------------------------------
# Log base
# ---------------------------------------------------------------------------


def _coerce_base(base: float | str) -> float:
    if isinstance(base, str):
        match base.lower():
            case "e":
                return math.e
            case "2":
                return 2.0
            case _:
                raise ValueError(f"log base must be 'e' or '2', not {base!r}")
    base = float(base)
    if not base > 1.0:
        raise ValueError(f"log base must exceed 1, got {base!r}")
    return base


def get_log_base() -> float:
    return _LOG_BASE.get()


def set_log_base(base: float | str) -> None:
    """Select the logarithm base for every entropy computed in this context."""
    _LOG_BASE.set(_coerce_base(base))


@contextmanager
def log_base(base: float | str):
    token = _LOG_BASE.set(_coerce_base(base))
    try:
        yield
    finally:
        _LOG_BASE.reset(token)


def base_log(base: float | str | None) -> float:
    return math.log(_LOG_BASE.get() if base is None else _coerce_base(base))


# ---------------------------------------------------------------------------
# Extended reals
# ---------------------------------------------------------------------------


class ExtReal(float):
    """A value in ``[0, inf]``.

    ``inf`` is IEEE infinity, an exact value: ``inf + x == inf`` and it compares
    above every finite value. Use :meth:`weighted` for products with
    probabilities so that ``0 * inf == 0``.
    """

    __slots__ = ()

    def __new__(cls, value: float = 0.0):
        v = float(value)
        if math.isnan(v) or v < 0.0:
            raise ValueError(f"extended non-negative real required, got {value!r}")
        return super().__new__(cls, v)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self)

    def __add__(self, other):
        if not isinstance(other, (int, float)):
            return NotImplemented
        total = float(self) + float(other)
        return ExtReal(total) if total >= 0.0 else total

    __radd__ = __add__

    def weighted(self, weight: float) -> ExtReal:
        if weight == 0:
            return ZERO
        return ExtReal(float(weight) * float(self))

    def __repr__(self):
        return f"ExtReal({'inf' if self.is_infinite else float(self)!r})"

    def __str__(self):
        return "inf" if self.is_infinite else repr(float(self))


INF = ExtReal(math.inf)
ZERO = ExtReal(0.0)


def ext_sum(values: Iterable[float]) -> ExtReal:
    total = ZERO
    for v in values:
        total = total + ExtReal(v)
    return total


def ext_close(a: float, b: float, tol: float) -> tuple[bool, float]:
    """Compare two extended reals; returns ``(ok, violation)``.

    Both infinite is agreement; exactly one infinite is an infinite violation.
    """
    a_inf, b_inf = math.isinf(a), math.isinf(b)
    if a_inf and b_inf:
        return True, 0.0
    if a_inf or b_inf:
        return False, math.inf
    violation = abs(float(a) - float(b))
    return violation <= tol, violation


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinSet:
    """A non-empty ordered set of distinct labels."""

    labels: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        if not labels:
            raise LabelError("a finite set needs at least one element")
        index = {label: i for i, label in enumerate(labels)}
        if len(index) != len(labels):
            dupes = sorted({label for label in labels if labels.count(label) > 1})
            raise LabelError(f"duplicate labels {dupes!r}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", index)

    @classmethod
    def range(cls, n: int, prefix: str = "x") -> FinSet:
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise LabelError(f"{label!r} is not an element of {self.labels!r}") from None


def one_point(label: str = "⋆") -> FinSet:
    return FinSet((label,))


def _require_space(what: str, expected: FinSet, got: FinSet) -> None:
    if expected != got:
        raise SpaceMismatch(what, expected.labels, got.labels)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _clean_probabilities(values, shape: tuple[int, ...], error: type[Exception], what: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.shape != shape:
        raise error(f"{what}: expected shape {shape}, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise error(f"{what}: entries must be finite")
    if array.size and array.min() < -EPS_STOCH:
        raise error(f"{what}: negative entry {array.min():.3g}")
    np.clip(array, 0.0, None, out=array)
    sums = array.sum(axis=-1)
    worst = float(np.max(np.abs(sums - 1.0))) if sums.size else 0.0
    if worst > EPS_STOCH:
        raise error(f"{what}: entries sum to {float(np.atleast_1d(sums)[np.argmax(np.abs(sums - 1.0))])!r}, not 1")
    return _frozen(array)


# ---------------------------------------------------------------------------
# Distributions, channels and functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dist:
    """A probability distribution on a :class:`FinSet`."""

    space: FinSet
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "probs", _clean_probabilities(self.probs, (len(self.space),), InvalidDistribution, "distribution")
        )

    @classmethod
    def from_mapping(cls, space: FinSet, probs: Mapping[str, float]) -> Dist:
        values = np.zeros(len(space))
        for label, p in probs.items():
            values[space.index(label)] = p
        return cls(space, values)

    def __getitem__(self, label: str) -> float:
        return float(self.probs[self.space.index(label)])

    def as_mapping(self) -> dict[str, float]:
        return {label: float(p) for label, p in zip(self.space.labels, self.probs) if p != 0.0}

    def support(self) -> np.ndarray:
        return self.probs > 0.0

    def distance(self, other: Dist) -> float:
        _require_space("distribution comparison", self.space, other.space)
        return float(np.max(np.abs(self.probs - other.probs)))

    def allclose(self, other: Dist, tol: float = EPS_EQ) -> bool:
        return self.space == other.space and self.distance(other) <= tol

    def __repr__(self):
        return f"Dist({dict(zip(self.space.labels, self.probs.tolist()))!r})"


@dataclass(frozen=True, eq=False)
class Channel:
    """A stochastic map ``dom ⇝ cod``; ``matrix[x, y]`` is ``f_{yx}``."""

    dom: FinSet
    cod: FinSet
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self,
            "matrix",
            _clean_probabilities(self.matrix, (len(self.dom), len(self.cod)), InvalidChannel, "channel row"),
        )

    @classmethod
    def from_rows(cls, dom: FinSet, cod: FinSet, rows: Mapping[str, Mapping[str, float]]) -> Channel:
        matrix = np.zeros((len(dom), len(cod)))
        for x, row in rows.items():
            i = dom.index(x)
            for y, p in row.items():
                matrix[i, cod.index(y)] = p
        return cls(dom, cod, matrix)

    def row(self, x: str) -> Dist:
        return Dist(self.cod, self.matrix[self.dom.index(x)])

    def entry(self, y: str, x: str) -> float:
        """``f_{yx}``, the probability of output ``y`` on input ``x``."""
        return float(self.matrix[self.dom.index(x), self.cod.index(y)])

    def as_rows(self) -> dict[str, dict[str, float]]:
        return {
            x: {y: float(p) for y, p in zip(self.cod.labels, row) if p != 0.0}
            for x, row in zip(self.dom.labels, self.matrix)
        }

    def distance(self, other: Channel) -> float:
        _require_space("channel comparison (inputs)", self.dom, other.dom)
        _require_space("channel comparison (outputs)", self.cod, other.cod)
        return float(np.max(np.abs(self.matrix - other.matrix)))

    def allclose(self, other: Channel, tol: float = EPS_EQ) -> bool:
        return self.dom == other.dom and self.cod == other.cod and self.distance(other) <= tol

    def __repr__(self):
        return f"Channel({self.dom.labels!r} ⇝ {self.cod.labels!r}, {self.matrix.tolist()!r})"


@dataclass(frozen=True, eq=False)
class DetMap:
    """A function ``dom → cod`` stored as one codomain index per element."""

    dom: FinSet
    cod: FinSet
    indices: np.ndarray

    def __post_init__(self):
        indices = np.array(self.indices, dtype=np.int64)
        if indices.shape != (len(self.dom),):
            raise LabelError(f"function needs one image per element of {self.dom.labels!r}")
        if indices.size and (indices.min() < 0 or indices.max() >= len(self.cod)):
            raise LabelError("function image outside its codomain")
        object.__setattr__(self, "indices", _frozen(indices))

    @classmethod
    def from_mapping(cls, dom: FinSet, cod: FinSet, mapping: Mapping[str, str]) -> DetMap:
        missing = [x for x in dom.labels if x not in mapping]
        if missing:
            raise LabelError(f"function is not total; no image for {missing!r}")
        extra = [x for x in mapping if x not in dom]
        if extra:
            raise LabelError(f"function maps labels outside its domain: {extra!r}")
        return cls(dom, cod, [cod.index(mapping[x]) for x in dom.labels])

    @classmethod
    def identity(cls, space: FinSet) -> DetMap:
        return cls(space, space, np.arange(len(space)))

    def __call__(self, x: str) -> str:
        return self.cod.labels[int(self.indices[self.dom.index(x)])]

    def as_mapping(self) -> dict[str, str]:
        return {x: self.cod.labels[int(i)] for x, i in zip(self.dom.labels, self.indices)}

    def fiber_indices(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.indices == j) for j in range(len(self.cod))]

    def fiber(self, y: str) -> tuple[str, ...]:
        j = self.cod.index(y)
        return tuple(self.dom.labels[int(i)] for i in np.flatnonzero(self.indices == j))

    def is_surjective(self) -> bool:
        return bool(np.all(np.bincount(self.indices, minlength=len(self.cod)) > 0))

    def require_surjective(self) -> None:
        counts = np.bincount(self.indices, minlength=len(self.cod))
        missing = [self.cod.labels[j] for j in np.flatnonzero(counts == 0)]
        if missing:
            raise NotSurjective(missing)

    def same_as(self, other: DetMap) -> bool:
        return self.dom == other.dom and self.cod == other.cod and bool(np.array_equal(self.indices, other.indices))

    def __repr__(self):
        return f"DetMap({self.as_mapping()!r})"


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def uniform(space: FinSet) -> Dist:
    return Dist(space, np.full(len(space), 1.0 / len(space)))


def point_mass(space: FinSet, label: str) -> Dist:
    probs = np.zeros(len(space))
    probs[space.index(label)] = 1.0
    return Dist(space, probs)


def identity_channel(space: FinSet) -> Channel:
    return Channel(space, space, np.eye(len(space)))


def constant_channel(dom: FinSet, d: Dist) -> Channel:
    return Channel(dom, d.space, np.tile(d.probs, (len(dom), 1)))


def as_channel(p: Dist) -> Channel:
    """A distribution as the channel ``⋆ ⇝ X``."""
    return Channel(one_point(), p.space, p.probs[None, :])


def mixture(a, b, weight: float):
    """``(1 - weight) * a + weight * b`` for two distributions or two channels."""
    if isinstance(a, Dist):
        _require_space("mixture", a.space, b.space)
        return Dist(a.space, (1.0 - weight) * a.probs + weight * b.probs)
    _require_space("mixture (inputs)", a.dom, b.dom)
    _require_space("mixture (outputs)", a.cod, b.cod)
    return Channel(a.dom, a.cod, (1.0 - weight) * a.matrix + weight * b.matrix)


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def compose_channels(g: Channel, f: Channel) -> Channel:
    """``g ∘ f`` with ``(g∘f)_{zx} = Σ_y g_{zy} f_{yx}``."""
    _require_space("compose_channels", g.dom, f.cod)
    return Channel(f.dom, g.cod, f.matrix @ g.matrix)


def lift(h: DetMap) -> Channel:
    matrix = np.zeros((len(h.dom), len(h.cod)))
    matrix[np.arange(len(h.dom)), h.indices] = 1.0
    return Channel(h.dom, h.cod, matrix)


def as_det(f: Channel, tol: float = EPS_EQ) -> DetMap:
    """Recover the function behind a pure channel."""
    peaks = f.matrix.argmax(axis=1)
    heights = f.matrix[np.arange(len(f.dom)), peaks]
    bad = np.flatnonzero(heights < 1.0 - tol)
    if bad.size:
        raise NotPure(f"rows {[f.dom.labels[i] for i in bad]!r} are not point masses (tol {tol:g})")
    return DetMap(f.dom, f.cod, peaks)


def compose_det(g: DetMap, h: DetMap) -> DetMap:
    _require_space("compose_det", g.dom, h.cod)
    return DetMap(h.dom, g.cod, g.indices[h.indices])


def apply(f: Channel, p: Dist) -> Dist:
    """The pushforward ``f ∘ p``."""
    _require_space("apply", f.dom, p.space)
    return Dist(f.cod, p.probs @ f.matrix)


def pushforward(h: DetMap, p: Dist) -> Dist:
    """``apply(lift(h), p)`` without building the channel."""
    _require_space("pushforward", h.dom, p.space)
    return Dist(h.cod, np.bincount(h.indices, weights=p.probs, minlength=len(h.cod)))


def compose_pure_fast(g: Channel, h: DetMap) -> Channel:
    """``g ∘ h`` for a function ``h``: row ``x`` is row ``h(x)`` of ``g``."""
    _require_space("compose_pure_fast", g.dom, h.cod)
    return Channel(h.dom, g.cod, g.matrix[h.indices])


def lcm17_section_compose(g: Channel, h: DetMap, f: Channel) -> Channel:
    """``g ∘ f`` when ``g: Y ⇝ Z`` is a section of ``h: Z → Y``.

    Then ``(g∘f)_{zx} = g_{z h(z)} f_{h(z) x}``.
    """
    _require_space("lcm17_section_compose (section)", g.dom, h.cod)
    _require_space("lcm17_section_compose (function)", g.cod, h.dom)
    _require_space("lcm17_section_compose", g.dom, f.cod)
    on_fiber = g.matrix[h.indices, np.arange(len(h.dom))]
    return Channel(f.dom, g.cod, f.matrix[:, h.indices] * on_fiber[None, :])


# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------


def section_violation(s: Channel, h: DetMap) -> float:
    """Largest mass a row ``s^y`` puts outside the fiber ``h⁻¹(y)``."""
    _require_space("section (inputs)", s.dom, h.cod)
    _require_space("section (outputs)", s.cod, h.dom)
    off_fiber = h.indices[None, :] != np.arange(len(h.cod))[:, None]
    return float(np.max(np.where(off_fiber, s.matrix, 0.0).sum(axis=1)))


def is_section(s: Channel, h: DetMap, tol: float = EPS_EQ) -> bool:
    """True iff ``h ∘ s = id`` within ``tol``."""
    return section_violation(s, h) <= tol


def fiber(h: DetMap, y: str) -> tuple[str, ...]:
    """The preimage ``h⁻¹(y)`` as labels, in domain order."""
    return h.fiber(y)


# ---------------------------------------------------------------------------
# Products, sums and marginals
# ---------------------------------------------------------------------------


def product(x_space: FinSet, y_space: FinSet) -> FinSet:
    return FinSet(tuple(f"{x}{PRODUCT_SEP}{y}" for x in x_space.labels for y in y_space.labels))


def joint(f: Channel, p: Dist) -> Dist:
    """``ϑ(f|p)`` on ``X×Y`` with ``ϑ_{(x,y)} = p_x f_{yx}``."""
    _require_space("joint", f.dom, p.space)
    return Dist(product(f.dom, f.cod), (p.probs[:, None] * f.matrix).ravel())


def marginal_x(d: Dist, x_space: FinSet, y_space: FinSet) -> Dist:
    _require_space("marginal", product(x_space, y_space), d.space)
    return Dist(x_space, d.probs.reshape(len(x_space), len(y_space)).sum(axis=1))


def marginal_y(d: Dist, x_space: FinSet, y_space: FinSet) -> Dist:
    _require_space("marginal", product(x_space, y_space), d.space)
    return Dist(y_space, d.probs.reshape(len(x_space), len(y_space)).sum(axis=0))


def _check_base_labels(base: FinSet) -> None:
    bad = [x for x in base.labels if TAG_SEP in x]
    if bad:
        raise LabelError(f"labels {bad!r} of a convex-combination base may not contain {TAG_SEP!r}")


def disjoint_union(base: FinSet, spaces: Sequence[FinSet]) -> FinSet:
    """``∐_x U^x`` with element ``u`` of block ``x`` labelled ``"x:u"``."""
    _check_base_labels(base)
    if len(spaces) != len(base):
        raise SpaceMismatch("disjoint_union", f"{len(base)} blocks", f"{len(spaces)} blocks")
    return FinSet(tuple(f"{x}{TAG_SEP}{u}" for x, space in zip(base.labels, spaces) for u in space.labels))


def split_tag(label: str) -> tuple[str, str]:
    tag, sep, rest = label.partition(TAG_SEP)
    if not sep:
        raise LabelError(f"{label!r} is not a tagged label")
    return tag, rest


def direct_sum_channels(base: FinSet, channels: Sequence[Channel]) -> Channel:
    """Block-diagonal ``⊕ f_x`` between tagged disjoint unions."""
    dom = disjoint_union(base, [c.dom for c in channels])
    cod = disjoint_union(base, [c.cod for c in channels])
    matrix = np.zeros((len(dom), len(cod)))
    i = j = 0
    for c in channels:
        rows, cols = c.matrix.shape
        matrix[i : i + rows, j : j + cols] = c.matrix
        i += rows
        j += cols
    return Channel(dom, cod, matrix)


def direct_sum_det(base: FinSet, maps: Sequence[DetMap]) -> DetMap:
    dom = disjoint_union(base, [h.dom for h in maps])
    cod = disjoint_union(base, [h.cod for h in maps])
    offsets = np.cumsum([0] + [len(h.cod) for h in maps[:-1]])
    return DetMap(dom, cod, np.concatenate([h.indices + off for h, off in zip(maps, offsets)]))


def weighted_sum_dists(base: Dist, dists: Sequence[Dist]) -> Dist:
    """``⊕ p_x q^x`` on the tagged disjoint union."""
    space = disjoint_union(base.space, [d.space for d in dists])
    return Dist(space, np.concatenate([w * d.probs for w, d in zip(base.probs, dists)]))


def convex_combine_channels(base: Dist, channels: Sequence[Channel], priors: Sequence[Dist]) -> tuple[Channel, Dist]:
    """The convex combination ``⊕ p_x (μ^x | q^x)`` of channels with priors."""
    for c, q in zip(channels, priors):
        _require_space("convex_combine_channels", c.dom, q.space)
    return direct_sum_channels(base.space, channels), weighted_sum_dists(base, priors)


# ---------------------------------------------------------------------------
# Relative entropy
# ---------------------------------------------------------------------------


def kl(p: Dist, q: Dist, base: float | str | None = None) -> ExtReal:
    """``D(p, q) = Σ_x p_x log(p_x / q_x)`` in ``[0, inf]``.

    Terms with ``p_x = 0`` vanish; ``p_x > 0 = q_x`` gives ``inf``.
    """
    _require_space("kl", p.space, q.space)
    total = float(rel_entr(p.probs, q.probs).sum())
    if math.isinf(total):
        return INF
    return ExtReal(max(total, 0.0) / base_log(base))


def conditional_kl(f: Channel, g: Channel, p: Dist, base: float | str | None = None) -> ExtReal:
    """``Σ_x p_x D(f^x, g^x)``; rows with ``p_x = 0`` contribute nothing."""
    _require_space("conditional_kl (inputs)", f.dom, g.dom)
    _require_space("conditional_kl (outputs)", f.cod, g.cod)
    _require_space("conditional_kl (prior)", f.dom, p.space)
    support = p.probs > 0.0
    rows = rel_entr(f.matrix[support], g.matrix[support]).sum(axis=1)
    if np.isinf(rows).any():
        return INF
    return ExtReal(max(float(p.probs[support] @ rows), 0.0) / base_log(base))
