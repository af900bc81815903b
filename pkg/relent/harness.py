"""Seeded property suites for the laws of RE, CE and RE₂.

Every suite is a function ``check(gen, index, tol) -> Trial`` registered under
a name. :func:`run_suite` runs ``trials`` independent trials, each with its own
generator derived from ``(seed, suite, index)``, and folds them into a
:class:`SuiteReport`. Trials may run on a thread pool; results are collected
in index order, so reports never depend on scheduling.

Probe suites measure a quantity instead of asserting a law. They always
succeed and report the distribution of what they measured.
"""

from __future__ import annotations

import contextvars
import logging
import math
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.special import rel_entr

from .document import Document
from .errors import UnknownSuite, ValidationError
from .finstat import StatMorphism, bayes_inverse, compose_stat, convex_combine_stat, is_optimal, re
from .finstat2 import (
    TwoMorphism,
    ce,
    ce_closed_form,
    convex_combine_two,
    is_two_optimal,
    lev77_marginal_check,
    re2,
    re2_joint,
    vcompose,
)
from .prob_core import (
    Channel,
    DetMap,
    Dist,
    ExtReal,
    FinSet,
    apply,
    compose_channels,
    compose_pure_fast,
    conditional_kl,
    ext_close,
    ext_sum,
    joint,
    kl,
    lcm17_section_compose,
    lift,
    marginal_x,
    marginal_y,
)
from .randgen import GenConfig, InstanceGenerator
from .serializer import ExtFloat, PydanticSerializer
from .utils import Stopwatch, timed

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 1000
DEFAULT_SEED = 42
DEFAULT_MAX_SIZE = 6
DEFAULT_TOL = 1e-8
MAX_COUNTEREXAMPLES = 5

# The tail runs to 1/n = 1e-12; steep targets still move by more than tol past n = 10⁶.
LSC_SAMPLES = (10, 100, 1000, 10_000, 1_000_000, 10**8, 10**10, 10**12)
LSC_TAIL_START = 1000

# Convex suites draw bases and components no larger than this.
CONVEX_MAX_SIZE = 4

# Vanishing suites hold RE and CE/RE₂ to these bounds even under a looser tol.
RE_VANISHING_BOUND = 1e-12
CE_VANISHING_BOUND = 1e-9

# Probe instances are kept when the measured value exceeds this.
PROBE_THRESHOLD = 1e-6


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class Counterexample(BaseModel):
    model_config = ConfigDict(extra="forbid")

    trial: int
    size: int
    violation: ExtFloat
    detail: str = ""
    instance: dict[str, Any] = {}


class ProbeSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    count: int
    min: ExtFloat
    median: ExtFloat
    max: ExtFloat
    above_threshold: int


class SuiteReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    suite: str
    trials: int
    passes: int
    max_violation: ExtFloat
    counterexamples: list[Counterexample] = []
    seed: int
    max_size: int
    full_support: bool
    dirichlet_like: bool
    tol: float
    probe: bool = False
    summary: ProbeSummary | None = None
    elapsed: float | None = None

    @model_validator(mode="after")
    def _check_counts(self):
        if not 0 <= self.passes <= self.trials:
            raise ValueError(f"passes={self.passes} outside 0..{self.trials}")
        if len(self.counterexamples) > MAX_COUNTEREXAMPLES:
            raise ValueError(f"at most {MAX_COUNTEREXAMPLES} counterexamples are kept")
        return self

    @property
    def ok(self) -> bool:
        return self.probe or self.passes == self.trials

    def config(self) -> GenConfig:
        return GenConfig(self.seed, self.max_size, self.full_support, self.dirichlet_like)


report_serializer = PydanticSerializer(SuiteReport)


def report_bytes(report: SuiteReport, timings: bool = False) -> bytes:
    """Canonical JSON for a report; ``elapsed`` only when ``timings`` is set."""
    if not timings:
        report = report.model_copy(update={"elapsed": None})
    return report_serializer.serialize(report)


def reports_bytes(reports: list[SuiteReport], timings: bool = False) -> bytes:
    """Canonical JSON for several reports as one array."""
    if len(reports) == 1:
        return report_bytes(reports[0], timings)
    items = b",\n".join(report_bytes(r, timings).rstrip() for r in reports)
    return b"[\n" + items + b"\n]\n"


# ---------------------------------------------------------------------------
# Trials and the suite registry
# ---------------------------------------------------------------------------


@dataclass
class Trial:
    """Outcome of one trial.

    ``ok`` defaults to ``violation <= tol``; probes set ``value`` to what they
    measured. ``objects`` is only serialized if the trial ends up in a report.
    """

    violation: float
    size: int
    objects: dict[str, Any] = field(default_factory=dict)
    ok: bool | None = None
    detail: str = ""
    value: float | None = None

    def passed(self, tol: float) -> bool:
        return self.violation <= tol if self.ok is None else self.ok


Check = Callable[[InstanceGenerator, int, float], Trial]


@dataclass(frozen=True)
class Suite:
    name: str
    check: Check
    description: str
    probe: bool = False


SUITES: dict[str, Suite] = {}


def suite(name: str, description: str, probe: bool = False):
    def register(check: Check) -> Check:
        SUITES[name] = Suite(name, check, description, probe)
        return check

    return register


def get_suite(name: str) -> Suite:
    try:
        return SUITES[name]
    except KeyError:
        raise UnknownSuite(name) from None


def suite_names(name: str = "all") -> list[str]:
    """Expand ``"all"`` to every registered suite, in registration order."""
    if name == "all":
        return list(SUITES)
    return [get_suite(name).name]


def _agree(lhs: float, rhs: float, tol: float, size: int, objects: dict, infinite: bool = False) -> Trial:
    """Compare two extended reals; with ``infinite`` both sides must also be ∞."""
    ok, violation = ext_close(lhs, rhs, tol)
    detail = f"lhs={ExtReal(lhs)} rhs={ExtReal(rhs)}"
    if infinite and not math.isinf(lhs):
        return Trial(math.inf, size, objects, ok=False, detail=f"expected both sides infinite; {detail}")
    return Trial(violation, size, objects, ok=ok, detail=detail)


# ---------------------------------------------------------------------------
# Fixed instances
# ---------------------------------------------------------------------------


def infinite_morphism() -> StatMorphism:
    """``{a, b} → {⋆}`` with a uniform prior and the point section on ``a``: RE = ∞."""
    x_space, point = FinSet(("a", "b")), FinSet(("⋆",))
    f = DetMap(x_space, point, [0, 0])
    return StatMorphism(f, Dist(x_space, [0.5, 0.5]), Channel(point, x_space, [[1.0, 0.0]]))


def infinite_square() -> TwoMorphism:
    """The identity on ``{a, b}`` over ``{⋆}``, hypothesis ``t`` a point mass: CE = ∞."""
    m = infinite_morphism()
    return TwoMorphism(m, m, Channel(m.source, m.source, np.eye(2)), Channel(m.target, m.target, [[1.0]]))


# ---------------------------------------------------------------------------
# Lower semicontinuity
# ---------------------------------------------------------------------------


class LscResult(NamedTuple):
    ok: bool
    violation: float
    tail_min: float
    extrapolated: float


def extrapolate_at_zero(samples: list[tuple[int, float]]) -> float:
    """Value at ``1/n = 0`` of the polynomial in ``1/n`` through ``samples``."""
    eps = np.array([1.0 / n for n, _ in samples])
    values = np.array([v for _, v in samples])
    total = 0.0
    for i in range(len(eps)):
        others = np.delete(eps, i)
        total += values[i] * float(np.prod(others / (others - eps[i])))
    return total


def lsc_check(limit: float, samples: list[tuple[int, float]], tol: float) -> LscResult:
    """Check ``value(limit) <= liminf`` from a sampled sequence.

    The liminf is estimated from the tail ``n >= LSC_TAIL_START`` as the larger
    of its minimum and its extrapolation to ``n = ∞``. An infinite limit passes
    only when the tail is infinite throughout or strictly increasing.
    """
    tail = [(n, float(v)) for n, v in samples if n >= LSC_TAIL_START]
    if not tail:
        raise ValueError(f"no samples with n >= {LSC_TAIL_START}")
    values = [v for _, v in tail]
    tail_min = min(values)
    if math.isinf(limit):
        rising = all(b > a for a, b in zip(values, values[1:]))
        ok = all(math.isinf(v) for v in values) or rising
        return LscResult(ok, 0.0 if ok else math.inf, tail_min, math.inf)
    finite = [(n, v) for n, v in tail if math.isfinite(v)]
    extrapolated = extrapolate_at_zero(finite) if len(finite) >= 2 else tail_min
    violation = max(0.0, float(limit) - max(tail_min, extrapolated))
    return LscResult(violation <= tol, violation, tail_min, extrapolated)


# ---------------------------------------------------------------------------
# Suites: prob_core laws
# ---------------------------------------------------------------------------


@suite("chain_rule", "D(ϑ(f|p), ϑ(g|q)) = D(p, q) + Σ p_x D(f^x, g^x); every tenth trial sparse")
def check_chain_rule(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    sparse = index % 10 == 9
    x_space = gen.space(gen.draw_size(), "x")
    y_space = gen.space(gen.draw_size(), "y")
    p = gen.random_dist(x_space)
    q = gen.random_dist(x_space, full_support=not sparse)
    f = gen.random_channel(x_space, y_space)
    g = gen.random_channel(x_space, y_space, full_support=not sparse)
    lhs = kl(joint(f, p), joint(g, q))
    rhs = kl(p, q) + conditional_kl(f, g, p)
    return _agree(lhs, rhs, tol, len(x_space) + len(y_space), {"p": p, "q": q, "f": f, "g": g})


@suite("associativity", "h∘(g∘f) = (h∘g)∘f for channels")
def check_associativity(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    spaces = [gen.space(gen.draw_size(), prefix) for prefix in "wxyz"]
    f, g, h = (gen.random_channel(a, b) for a, b in zip(spaces, spaces[1:]))
    left = compose_channels(h, compose_channels(g, f))
    right = compose_channels(compose_channels(h, g), f)
    return Trial(left.distance(right), sum(map(len, spaces)), {"f": f, "g": g, "h": h})


@suite("gibbs", "Σ p log(p/q) >= 0 before clamping, and D(p, p) = 0")
def check_gibbs(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    x_space = gen.space(gen.draw_size(), "x")
    p, q = gen.random_dist(x_space), gen.random_dist(x_space)
    raw = float(rel_entr(p.probs, q.probs).sum())
    violation = max(0.0, -raw) + float(kl(p, p))
    return Trial(violation, len(x_space), {"p": p, "q": q}, detail=f"raw={raw!r}")


@suite("marginals", "summing ϑ(f|p) over y gives p, over x gives f∘p")
def check_marginals(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    x_space = gen.space(gen.draw_size(), "x")
    y_space = gen.space(gen.draw_size(), "y")
    p, f = gen.random_dist(x_space), gen.random_channel(x_space, y_space)
    theta = joint(f, p)
    violation = max(
        marginal_x(theta, x_space, y_space).distance(p), marginal_y(theta, x_space, y_space).distance(apply(f, p))
    )
    return Trial(violation, len(x_space) + len(y_space), {"p": p, "f": f})


@suite("lcm17", "fast paths for g∘h with h pure, and g∘f with g a section of a function")
def check_lcm17(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    x_space = gen.space(gen.draw_size(), "x")
    y_space = gen.space(gen.draw_size(), "y")
    z_space = gen.space(gen.draw_size(len(y_space)), "z")
    g = gen.random_channel(y_space, z_space)
    h = gen.random_surjection(x_space, y_space) if len(x_space) >= len(y_space) else None
    pure_gap = 0.0
    if h is not None:
        pure_gap = compose_pure_fast(g, h).distance(compose_channels(g, lift(h)))
    k = gen.random_surjection(z_space, y_space)
    section = gen.random_section(k)
    f = gen.random_channel(x_space, y_space)
    section_gap = lcm17_section_compose(section, k, f).distance(compose_channels(section, f))
    objects = {"g": g, "k": k, "section": section, "f": f}
    if h is not None:
        objects["h"] = h
    size = len(x_space) + len(y_space) + len(z_space)
    return Trial(max(pure_gap, section_gap), size, objects, detail=f"pure={pure_gap!r} section={section_gap!r}")


# ---------------------------------------------------------------------------
# Suites: RE on FinStat
# ---------------------------------------------------------------------------


def _compose_after(gen: InstanceGenerator, first: StatMorphism) -> StatMorphism:
    z_space = gen.space(gen.draw_size(1, len(first.target)), "z")
    g = gen.random_surjection(first.target, z_space)
    return StatMorphism(g, first.q, gen.random_section(g))


@suite("re_functorial", "RE(g∘f) = RE(g) + RE(f)")
def check_re_functorial(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    first = gen.random_stat_morphism()
    second = _compose_after(gen, first)
    lhs = re(compose_stat(second, first))
    rhs = re(second) + re(first)
    size = first.size() + len(second.target)
    return _agree(lhs, rhs, tol, size, {"first": first, "second": second})


def _convex_base(gen: InstanceGenerator, index: int) -> Dist:
    small = gen.capped(CONVEX_MAX_SIZE)
    # trial 0 carries an infinite component, which needs positive weight
    return small.random_dist(small.space(small.draw_size(), "b"), full_support=True if index == 0 else None)


@suite("re_convex", "RE(⊕ λ_x m^x) = Σ λ_x RE(m^x); trial 0 has an infinite component")
def check_re_convex(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    base = _convex_base(gen, index)
    small = gen.capped(CONVEX_MAX_SIZE)
    family = [small.random_stat_morphism() for _ in base.space.labels]
    if index == 0:
        family[0] = infinite_morphism()
    combined = convex_combine_stat(base, family)
    rhs = ext_sum(re(m).weighted(w) for w, m in zip(base.probs, family))
    return _agree(re(combined), rhs, tol, combined.size(), {"base": base, "combined": combined}, infinite=index == 0)


@suite("re_vanishing", "RE vanishes when s is the Bayes inverse")
def check_re_vanishing(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    m = gen.optimal_stat_morphism()
    value = float(re(m))
    ok = value <= min(tol, RE_VANISHING_BOUND) and is_optimal(m)
    return Trial(value, m.size(), {"m": m}, ok=ok, detail=f"re={value!r}")


@suite("re_lsc", "RE at a limit is at most the liminf along a convergent sequence")
def check_re_lsc(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    dense = InstanceGenerator(gen.cfg.dense(), gen.rng)
    target = dense.random_stat_morphism()
    sequence = dense.convergent_stat_sequence(target, LSC_SAMPLES[-1])
    samples = [(n, float(re(m))) for n, m in sequence.sample(LSC_SAMPLES)]
    limit = float(re(target))
    result = lsc_check(limit, samples, tol)
    detail = f"limit={limit!r} tail_min={result.tail_min!r} extrapolated={result.extrapolated!r}"
    return Trial(result.violation, target.size(), {"target": target}, ok=result.ok, detail=detail)


# ---------------------------------------------------------------------------
# Suites: CE and RE₂ on FinStat₂
# ---------------------------------------------------------------------------


@suite("lev77", "CE equals its closed form, and p′ f′ is the fiber sum of p f")
def check_lev77(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    spade = gen.random_two_morphism()
    closed_ok, closed_gap = ext_close(ce(spade), ce_closed_form(spade), tol)
    marginal = lev77_marginal_check(spade)
    violation = max(closed_gap, marginal.violation)
    detail = f"closed_form={closed_gap!r} marginal={marginal.violation!r}"
    return Trial(violation, spade.size(), {"spade": spade}, ok=closed_ok and marginal.ok, detail=detail)


@suite("ce_closed_form", "CE against its closed form on sparse squares, ∞ included")
def check_ce_closed_form(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    spade = InstanceGenerator(gen.cfg.sparse(), gen.rng).random_two_morphism()
    return _agree(ce(spade), ce_closed_form(spade), tol, spade.size(), {"spade": spade})


def _vertical_pair(gen: InstanceGenerator, index: int) -> tuple[TwoMorphism, TwoMorphism]:
    """Trial 1 swaps in a point-mass hypothesis over a collapsing ν, making both sides ∞."""
    if index != 1 or gen.cfg.max_size < 2:
        return gen.stacked_pair()
    dense = InstanceGenerator(gen.cfg.dense(), gen.rng)
    spade, club = dense.stacked_pair(collapse_y=True)
    cod = StatMorphism(spade.nu, spade.q, dense.point_section(spade.nu))
    return TwoMorphism(spade.dom, cod, spade.f, spade.fp), club


def _check_vertical(entropy, gen: InstanceGenerator, index: int, tol: float) -> Trial:
    spade, club = _vertical_pair(gen, index)
    composite = vcompose(club, spade)
    lhs = entropy(composite)
    rhs = entropy(club) + entropy(spade)
    size = spade.size() + len(club.dom.target) + len(club.cod.target)
    infinite = index == 1 and gen.cfg.max_size >= 2
    return _agree(lhs, rhs, tol, size, {"spade": spade, "club": club}, infinite=infinite)


@suite("ce_vertical", "CE(♣∘♠) = CE(♣) + CE(♠); trial 1 is an infinite pair")
def check_ce_vertical(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    return _check_vertical(ce, gen, index, tol)


@suite("re2_vertical", "RE₂(♣∘♠) = RE₂(♣) + RE₂(♠); trial 1 is an infinite pair")
def check_re2_vertical(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    return _check_vertical(re2, gen, index, tol)


def _check_convex_two(entropy, gen: InstanceGenerator, index: int, tol: float) -> Trial:
    base = _convex_base(gen, index)
    small = gen.capped(CONVEX_MAX_SIZE)
    family = [small.random_two_morphism() for _ in base.space.labels]
    if index == 0:
        family[0] = infinite_square()
    combined = convex_combine_two(base, family)
    rhs = ext_sum(entropy(sq).weighted(w) for w, sq in zip(base.probs, family))
    objects = {"base": base, "combined": combined}
    return _agree(entropy(combined), rhs, tol, combined.size(), objects, infinite=index == 0)


@suite("ce_convex", "CE(⊕ λ_x ♠^x) = Σ λ_x CE(♠^x); trial 0 has an infinite component")
def check_ce_convex(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    return _check_convex_two(ce, gen, index, tol)


@suite("re2_convex", "RE₂(⊕ λ_x ♠^x) = Σ λ_x RE₂(♠^x); trial 0 has an infinite component")
def check_re2_convex(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    return _check_convex_two(re2, gen, index, tol)


@suite("ce_vanishing", "CE vanishes when f = t∘f′∘μ, and RE₂ too once s is optimal")
def check_ce_vanishing(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    spade = gen.two_optimal_square()
    dom = StatMorphism(spade.mu, spade.p, bayes_inverse(spade.mu, spade.p))
    optimal = TwoMorphism(dom, spade.cod, spade.f, spade.fp)
    ce_value, re2_value = float(ce(spade)), float(re2(optimal))
    two_optimal = is_two_optimal(spade)
    ok = two_optimal and max(ce_value, re2_value) <= min(tol, CE_VANISHING_BOUND)
    detail = f"ce={ce_value!r} re2={re2_value!r} two_optimal={two_optimal}"
    return Trial(max(ce_value, re2_value), spade.size(), {"spade": spade}, ok=ok, detail=detail)


@suite("re2_chain", "RE₂ equals the divergence of joints D(ϑ(f|p), ϑ(t∘f′∘μ | s∘μ∘p))")
def check_re2_chain(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    spade = gen.random_two_morphism()
    return _agree(re2(spade), re2_joint(spade), tol, spade.size(), {"spade": spade})


@suite("re2_lsc", "RE₂ at a limit is at most the liminf along a convergent sequence")
def check_re2_lsc(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    dense = InstanceGenerator(gen.cfg.dense(), gen.rng)
    target = dense.random_two_morphism()
    sequence = dense.convergent_sequence(target, LSC_SAMPLES[-1])
    samples = [(n, float(re2(sq))) for n, sq in sequence.sample(LSC_SAMPLES)]
    limit = float(re2(target))
    result = lsc_check(limit, samples, tol)
    detail = f"limit={limit!r} tail_min={result.tail_min!r} extrapolated={result.extrapolated!r}"
    return Trial(result.violation, target.size(), {"target": target}, ok=result.ok, detail=detail)


@suite("generator", "random squares validate and regenerate identically from their seed")
def check_generator(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    spade = gen.random_two_morphism()
    again = InstanceGenerator.for_trial(gen.cfg, "generator", index).random_two_morphism()
    first = Document.of(spade=spade).to_dict()
    second = Document.of(spade=again).to_dict()
    violation = max(spade.violations().values())
    same = first == second
    detail = "" if same else "regenerated square differs"
    return Trial(violation, spade.size(), {"spade": spade}, ok=same and violation <= tol, detail=detail)


@suite("vanishing_probe", "CE of squares whose hypotheses s and t are both Bayes inverses", probe=True)
def probe_vanishing(gen: InstanceGenerator, index: int, tol: float) -> Trial:
    spade = gen.bayes_square()
    value = float(ce(spade))
    return Trial(value, spade.size(), {"spade": spade}, ok=True, detail=f"ce={value!r}", value=value)


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def run_trial(spec: Suite, cfg: GenConfig, index: int, tol: float) -> Trial:
    gen = InstanceGenerator.for_trial(cfg, spec.name, index)
    try:
        return spec.check(gen, index, tol)
    except ValidationError as exc:
        return Trial(math.inf, 0, ok=False, detail=f"{type(exc).__name__}: {exc}")


def _counterexample(index: int, trial: Trial) -> Counterexample:
    return Counterexample(
        trial=index,
        size=trial.size,
        violation=trial.violation,
        detail=trial.detail,
        instance=Document.of(**trial.objects).to_dict() if trial.objects else {},
    )


def _smallest(candidates: Iterable[tuple[int, Trial]]) -> list[Counterexample]:
    ranked = sorted(candidates, key=lambda item: (item[1].size, item[0]))
    return [_counterexample(i, t) for i, t in ranked[:MAX_COUNTEREXAMPLES]]


def _summary(values: list[float]) -> ProbeSummary:
    arr = np.array(values)
    return ProbeSummary(
        count=len(values),
        min=float(arr.min()),
        median=float(np.median(arr)),
        max=float(arr.max()),
        above_threshold=int(np.sum(arr > PROBE_THRESHOLD)),
    )


def run_suite(
    name: str,
    trials: int = DEFAULT_TRIALS,
    cfg: GenConfig | None = None,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> SuiteReport:
    """Run one registered suite.

    Raises:
        UnknownSuite: ``name`` is not registered.
    """
    spec = get_suite(name)
    cfg = cfg or GenConfig(DEFAULT_SEED, DEFAULT_MAX_SIZE)
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials!r}")
    logger.info("suite %s: %d trials, seed %d, max_size %d", name, trials, cfg.seed, cfg.max_size)

    def one(index: int) -> Trial:
        return run_trial(spec, cfg, index, tol)

    with Stopwatch() as sw:
        if workers > 1:
            # each trial runs in a copy of the caller's context, log base included
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(contextvars.copy_context().run, one, i) for i in range(trials)]
                results = [future.result() for future in futures]
        else:
            results = [one(i) for i in range(trials)]

    failures = [(i, t) for i, t in enumerate(results) if not t.passed(tol)]
    for i, t in failures:
        logger.debug("suite %s trial %d failed: violation %s %s", name, i, ExtReal(max(t.violation, 0.0)), t.detail)

    summary = None
    if spec.probe:
        values = [t.value for t in results if t.value is not None]
        summary = _summary(values) if values else None
        kept = _smallest((i, t) for i, t in enumerate(results) if t.value is not None and t.value > PROBE_THRESHOLD)
        max_violation = max(values, default=0.0)
    else:
        kept = _smallest(failures)
        max_violation = max((t.violation for t in results), default=0.0)

    report = SuiteReport(
        suite=name,
        trials=trials,
        passes=trials - len(failures),
        max_violation=max(float(max_violation), 0.0),
        counterexamples=kept,
        seed=cfg.seed,
        max_size=cfg.max_size,
        full_support=cfg.full_support,
        dirichlet_like=cfg.dirichlet_like,
        tol=tol,
        probe=spec.probe,
        summary=summary,
        elapsed=sw.elapsed,
    )
    log = logger.info if report.ok else logger.warning
    log(
        "suite %s: %d/%d passed, max violation %s, %.3f s",
        name,
        report.passes,
        report.trials,
        ExtReal(report.max_violation),
        sw.elapsed,
    )
    return report


@timed
def run_all(
    trials: int = DEFAULT_TRIALS,
    cfg: GenConfig | None = None,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    names: Iterable[str] | None = None,
) -> list[SuiteReport]:
    return [run_suite(name, trials, cfg, tol, workers) for name in (names or suite_names("all"))]
