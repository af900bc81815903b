"""The declarative JSON document format.

A document has six sections, each a map from names to entries::

    {
      "spaces":        {"X": ["a", "b"]},
      "dists":         {"p": {"space": "X", "probs": {"a": 0.5, "b": 0.5}}},
      "channels":      {"s": {"dom": "Y", "cod": "X", "rows": {"y": {"a": 1}}}},
      "det_maps":      {"f": {"dom": "X", "cod": "Y", "map": {"a": "y", "b": "y"}}},
      "morphisms":     {"m": {"f": "f", "p": "p", "s": "s"}},
      "two_morphisms": {"sq": {"dom": "m", "cod": "n", "f": "top", "fp": "bottom"}}
    }

Channels are written row-per-input; omitted entries are 0. Entries only refer
to earlier sections, so the reference graph is acyclic. :func:`parse` checks
structure and references; semantic validation happens when an object is built.
"""

from __future__ import annotations

import json
import math
import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import pydantic
from pydantic import BaseModel, ConfigDict

from .errors import DanglingReference, DuplicateName, ParseError, ValidationError
from .finstat import StatMorphism
from .finstat2 import TwoMorphism, square_violations
from .prob_core import Channel, DetMap, Dist, FinSet, section_violation
from .serializer import CanonicalJsonSerializer, ExtFloat
from .utils import timed

__all__ = ["Document", "ValidationRow", "parse", "serialize", "load", "SECTIONS"]

SECTIONS = ("spaces", "dists", "channels", "det_maps", "morphisms", "two_morphisms")


class _Entry(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DistSpec(_Entry):
    space: str
    probs: dict[str, ExtFloat]


class ChannelSpec(_Entry):
    dom: str
    cod: str
    rows: dict[str, dict[str, ExtFloat]]


class DetMapSpec(_Entry):
    dom: str
    cod: str
    map: dict[str, str]


class MorphismSpec(_Entry):
    f: str
    p: str
    s: str


class TwoMorphismSpec(_Entry):
    dom: str
    cod: str
    f: str
    fp: str


class DocumentModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    spaces: dict[str, list[str]] = {}
    dists: dict[str, DistSpec] = {}
    channels: dict[str, ChannelSpec] = {}
    det_maps: dict[str, DetMapSpec] = {}
    morphisms: dict[str, MorphismSpec] = {}
    two_morphisms: dict[str, TwoMorphismSpec] = {}


# (section, field) pairs each entry type points at
_REFERENCES = {
    "dists": (("spaces", "space"),),
    "channels": (("spaces", "dom"), ("spaces", "cod")),
    "det_maps": (("spaces", "dom"), ("spaces", "cod")),
    "morphisms": (("det_maps", "f"), ("dists", "p"), ("channels", "s")),
    "two_morphisms": (("morphisms", "dom"), ("morphisms", "cod"), ("channels", "f"), ("channels", "fp")),
}


class _Object(dict):
    """A JSON object that remembers keys it saw twice."""

    duplicates: tuple[str, ...] = ()


def _object_pairs(pairs: list[tuple[str, Any]]) -> _Object:
    obj = _Object()
    seen = []
    for key, value in pairs:
        if key in obj:
            seen.append(key)
        obj[key] = value
    obj.duplicates = tuple(seen)
    return obj


def _locate(text: str, path: tuple) -> tuple[int, int] | None:
    """Line and column of the deepest key of ``path`` found in ``text``, searching in order."""
    pos, found = 0, None
    for part in path:
        if not isinstance(part, str):
            continue
        match = re.compile(re.escape(json.dumps(part, ensure_ascii=False)) + r"\s*:").search(text, pos)
        if match is None:
            break
        pos = found = match.start()
    if found is None:
        return None
    line = text.count("\n", 0, found) + 1
    return line, found - (text.rfind("\n", 0, found) + 1) + 1


def _reject_nested_duplicates(value, path: tuple, text: str) -> None:
    if isinstance(value, _Object):
        if value.duplicates:
            where = ".".join(str(part) for part in path)
            raise ParseError(f"duplicate key {value.duplicates[0]!r} in {where}", *(_locate(text, path) or ()))
        for key, inner in value.items():
            _reject_nested_duplicates(inner, (*path, key), text)
    elif isinstance(value, list):
        for i, inner in enumerate(value):
            _reject_nested_duplicates(inner, (*path, i), text)


class ValidationRow(NamedTuple):
    section: str
    name: str
    ok: bool
    violation: float
    message: str = ""


def _label_violation(values: list[float]) -> float:
    """Distance of raw values from a probability vector."""
    if not values:
        return 1.0
    negative = max(0.0, -min(values))
    return max(negative, abs(math.fsum(values) - 1.0))


@dataclass
class Document:
    model: DocumentModel = field(default_factory=DocumentModel)
    _cache: dict[tuple[str, str], Any] = field(default_factory=dict, init=False, repr=False)

    # -- lookup --------------------------------------------------------------

    def _entry(self, section: str, name: str, owner: str = "command line"):
        entries = getattr(self.model, section)
        if name not in entries:
            raise DanglingReference(section, name, owner)
        return entries[name]

    def names(self, section: str) -> list[str]:
        return list(getattr(self.model, section))

    def find(self, name: str) -> str:
        """The section holding ``name``; morphism sections are searched first."""
        for section in reversed(SECTIONS):
            if name in getattr(self.model, section):
                return section
        raise DanglingReference("any section", name, "command line")

    def check_references(self) -> None:
        for section, refs in _REFERENCES.items():
            for name, entry in getattr(self.model, section).items():
                for target, attr in refs:
                    ref = getattr(entry, attr)
                    if ref not in getattr(self.model, target):
                        raise DanglingReference(target, ref, f"{section} entry {name!r}")

    # -- building ------------------------------------------------------------

    def _cached(self, section: str, name: str, build):
        key = (section, name)
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def space(self, name: str) -> FinSet:
        return self._cached("spaces", name, lambda: FinSet(tuple(self._entry("spaces", name))))

    def dist(self, name: str) -> Dist:
        spec = self._entry("dists", name)
        return self._cached("dists", name, lambda: Dist.from_mapping(self.space(spec.space), spec.probs))

    def channel(self, name: str) -> Channel:
        spec = self._entry("channels", name)
        return self._cached(
            "channels", name, lambda: Channel.from_rows(self.space(spec.dom), self.space(spec.cod), spec.rows)
        )

    def det_map(self, name: str) -> DetMap:
        spec = self._entry("det_maps", name)
        return self._cached(
            "det_maps", name, lambda: DetMap.from_mapping(self.space(spec.dom), self.space(spec.cod), spec.map)
        )

    def morphism(self, name: str) -> StatMorphism:
        spec = self._entry("morphisms", name)
        return self._cached(
            "morphisms", name, lambda: StatMorphism(self.det_map(spec.f), self.dist(spec.p), self.channel(spec.s))
        )

    def two_morphism(self, name: str) -> TwoMorphism:
        spec = self._entry("two_morphisms", name)
        return self._cached(
            "two_morphisms",
            name,
            lambda: TwoMorphism(
                self.morphism(spec.dom), self.morphism(spec.cod), self.channel(spec.f), self.channel(spec.fp)
            ),
        )

    def get(self, section: str, name: str):
        return {
            "spaces": self.space,
            "dists": self.dist,
            "channels": self.channel,
            "det_maps": self.det_map,
            "morphisms": self.morphism,
            "two_morphisms": self.two_morphism,
        }[section](name)

    # -- validation ----------------------------------------------------------

    def _violation(self, section: str, name: str) -> float:
        """Raw violation measured on the written numbers, before an object is built."""
        if section == "dists":
            return _label_violation(list(self._entry(section, name).probs.values()))
        if section == "channels":
            spec = self._entry(section, name)
            rows = [list(spec.rows.get(x, {}).values()) for x in self.space(spec.dom).labels]
            return max(_label_violation(row) for row in rows)
        if section == "morphisms":
            m = self.morphism(name)
            return section_violation(m.s, m.f)
        if section == "two_morphisms":
            sq = self.two_morphism(name)
            return max(square_violations(sq.dom, sq.cod, sq.f, sq.fp).values())
        return 0.0

    def validate(self, tol: float) -> Iterator[ValidationRow]:
        """Build every object in order and report its worst violation."""
        for section in SECTIONS:
            for name in getattr(self.model, section):
                try:
                    self.get(section, name)
                    violation = self._violation(section, name)
                except ValidationError as exc:
                    violation = getattr(exc, "violation", math.inf)
                    yield ValidationRow(section, name, False, violation, str(exc))
                    continue
                yield ValidationRow(section, name, violation <= tol, violation)

    # -- extension -----------------------------------------------------------

    def _claim(self, section: str, name: str) -> None:
        if name in getattr(self.model, section):
            raise DuplicateName(section, name)

    def add_space(self, name: str, space: FinSet) -> str:
        """Register ``space``, reusing an existing name with the same labels."""
        for existing, labels in self.model.spaces.items():
            if tuple(labels) == space.labels:
                return existing
        unique, i = name, 1
        while unique in self.model.spaces:
            unique, i = f"{name}{i}", i + 1
        self.model.spaces[unique] = list(space.labels)
        self._cache[("spaces", unique)] = space
        return unique

    def add_dist(self, name: str, d: Dist) -> str:
        self._claim("dists", name)
        space = self.add_space(f"{name}.space", d.space)
        self.model.dists[name] = DistSpec(space=space, probs=d.as_mapping())
        self._cache[("dists", name)] = d
        return name

    def add_channel(self, name: str, c: Channel) -> str:
        self._claim("channels", name)
        dom = self.add_space(f"{name}.dom", c.dom)
        cod = self.add_space(f"{name}.cod", c.cod)
        self.model.channels[name] = ChannelSpec(dom=dom, cod=cod, rows=c.as_rows())
        self._cache[("channels", name)] = c
        return name

    def add_det_map(self, name: str, h: DetMap) -> str:
        self._claim("det_maps", name)
        dom = self.add_space(f"{name}.dom", h.dom)
        cod = self.add_space(f"{name}.cod", h.cod)
        self.model.det_maps[name] = DetMapSpec(dom=dom, cod=cod, map=h.as_mapping())
        self._cache[("det_maps", name)] = h
        return name

    def add_morphism(self, name: str, m: StatMorphism) -> str:
        self._claim("morphisms", name)
        spec = MorphismSpec(
            f=self.add_det_map(f"{name}.f", m.f),
            p=self.add_dist(f"{name}.p", m.p),
            s=self.add_channel(f"{name}.s", m.s),
        )
        self.model.morphisms[name] = spec
        self._cache[("morphisms", name)] = m
        return name

    def add_two_morphism(self, name: str, sq: TwoMorphism) -> str:
        self._claim("two_morphisms", name)
        spec = TwoMorphismSpec(
            dom=self.add_morphism(f"{name}.dom", sq.dom),
            cod=self.add_morphism(f"{name}.cod", sq.cod),
            f=self.add_channel(f"{name}.f", sq.f),
            fp=self.add_channel(f"{name}.fp", sq.fp),
        )
        self.model.two_morphisms[name] = spec
        self._cache[("two_morphisms", name)] = sq
        return name

    def add(self, name: str, obj) -> str:
        adders = (
            (TwoMorphism, self.add_two_morphism),
            (StatMorphism, self.add_morphism),
            (DetMap, self.add_det_map),
            (Channel, self.add_channel),
            (Dist, self.add_dist),
            (FinSet, self.add_space),
        )
        for kind, adder in adders:
            if isinstance(obj, kind):
                return adder(name, obj)
        raise TypeError(f"cannot store {type(obj).__name__} in a document")

    @classmethod
    def of(cls, **objects) -> Document:
        doc = cls()
        for name, obj in objects.items():
            doc.add(name, obj)
        return doc

    # -- output --------------------------------------------------------------

    def to_dict(self) -> dict:
        """The canonical dictionary form: every section present, zero entries dropped."""
        m = self.model
        return {
            "spaces": {name: list(labels) for name, labels in m.spaces.items()},
            "dists": {
                name: {"space": d.space, "probs": {k: v for k, v in d.probs.items() if v != 0.0}}
                for name, d in m.dists.items()
            },
            "channels": {
                name: {
                    "dom": c.dom,
                    "cod": c.cod,
                    "rows": {x: {y: v for y, v in row.items() if v != 0.0} for x, row in c.rows.items()},
                }
                for name, c in m.channels.items()
            },
            "det_maps": {name: h.model_dump() for name, h in m.det_maps.items()},
            "morphisms": {name: spec.model_dump() for name, spec in m.morphisms.items()},
            "two_morphisms": {name: spec.model_dump() for name, spec in m.two_morphisms.items()},
        }


def parse(text: str | bytes) -> Document:
    """Read a document and check its references.

    Raises:
        ParseError: malformed JSON or an entry that does not fit the schema.
        DuplicateName: a name appears twice within a section.
        DanglingReference: an entry names something that is not defined.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"document is not UTF-8: {exc.reason}") from None
    try:
        raw = json.loads(text, object_pairs_hook=_object_pairs)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(raw, dict):
        raise ParseError("a document must be a JSON object")
    if raw.duplicates:
        raise ParseError(f"section {raw.duplicates[0]!r} appears twice")
    for section, entries in raw.items():
        if isinstance(entries, _Object):
            if entries.duplicates:
                raise DuplicateName(section, entries.duplicates[0])
            for name, entry in entries.items():
                _reject_nested_duplicates(entry, (section, name), text)
    try:
        model = DocumentModel.model_validate(raw)
    except pydantic.ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise ParseError(f"{where}: {first['msg']}", *(_locate(text, first["loc"]) or ())) from None
    doc = Document(model)
    doc.check_references()
    return doc


def serialize(doc: Document) -> str:
    return CanonicalJsonSerializer().serialize(doc.to_dict()).decode("utf-8")


@timed
def load(path) -> Document:
    with open(path, "rb") as fh:
        return parse(fh.read())
