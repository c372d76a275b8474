"""Learning problems and computable bound quantities (triv, frac, lower bounds, boosting).

Suprema over targets and queries are maxima over explicit candidate pools.
Monte Carlo quantities are :class:`Estimate` values; bound calculators take
either floats or estimates and apply a ``3 * stderr`` worst-case slack.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import qmath

SLACK_SIGMAS = 3.0


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float = 0.0
    n: int = 0

    @property
    def exact(self) -> bool:
        return self.stderr == 0.0

    def upper(self, k: float = SLACK_SIGMAS) -> float:
        return self.value + k * self.stderr

    def lower(self, k: float = SLACK_SIGMAS) -> float:
        return self.value - k * self.stderr

    def __float__(self):
        return float(self.value)


def _val(x) -> Estimate:
    return x if isinstance(x, Estimate) else Estimate(float(x))


def _bernoulli_estimate(hits: np.ndarray) -> Estimate:
    hits = np.asarray(hits, dtype=float)
    n = hits.size
    p = float(hits.mean())
    return Estimate(p, math.sqrt(max(p * (1 - p), 0.0) / n) if n > 1 else 0.0, n)


@dataclass
class Measure:
    """Finite weighted support or a sampler ``fn(rng, size) -> sequence``."""

    support: list | None = None
    weights: np.ndarray | None = None
    sampler: Callable | None = None
    kind: str = ""

    def __post_init__(self):
        if (self.support is None) == (self.sampler is None):
            raise ValueError("give exactly one of support or sampler")
        if self.support is not None:
            if len(self.support) == 0:
                raise ValueError("empty support")
            w = np.full(len(self.support), 1 / len(self.support)) if self.weights is None else np.asarray(self.weights, float)
            if len(w) != len(self.support) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
                raise ValueError("weights must be nonnegative and sum to 1")
            self.weights = w

    @classmethod
    def uniform(cls, items, kind="uniform"):
        return cls(support=list(items), kind=kind)

    @classmethod
    def point(cls, item):
        return cls(support=[item], kind="point")

    @classmethod
    def from_sampler(cls, fn, kind="sampler"):
        return cls(sampler=fn, kind=kind)

    @property
    def finite(self) -> bool:
        return self.support is not None

    def draw(self, rng: np.random.Generator, size: int) -> list:
        if self.finite:
            idx = rng.choice(len(self.support), size=size, p=self.weights)
            return [self.support[i] for i in idx]
        return list(self.sampler(rng, size))

    def mass(self, pred: Callable[[Any], bool], rng=None, samples: int = 10_000) -> Estimate:
        """``Pr_{s~mu}[pred(s)]``, exact for finite supports."""
        if self.finite:
            return Estimate(float(sum(w for s, w in zip(self.support, self.weights) if pred(s))), 0.0, len(self.support))
        rng = np.random.default_rng() if rng is None else rng
        return _bernoulli_estimate([bool(pred(s)) for s in self.draw(rng, samples)])


@dataclass
class LearningProblem:
    """``Z: S -> P(T)`` given by a predicate ``t in Z(s)`` and a source measure."""

    measure: Measure
    predicate: Callable[[Any, Any], bool]
    targets: list | None = None

    def solution_sources(self, t) -> list:
        """``Z_t``: sources compatible with ``t`` (finite supports only)."""
        if not self.measure.finite:
            raise ValueError("Z_t needs a finite source support")
        return [s for s in self.measure.support if self.predicate(s, t)]


@dataclass
class DecisionProblem:
    """``Dec(S, s*)``: is the hidden source the reference or drawn from the class?"""

    measure: Measure
    reference: Any


@dataclass
class EpsLearnSpec:
    """``eps``-learning with the dual-norm distance (``"trace"``) or a restricted ``d_M``."""

    eps: float
    distance: str | Callable = "trace"
    query_set: list | None = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.distance == "restricted" and not self.query_set:
            raise ValueError("restricted distance needs a query set")

    def d(self, x, y) -> float:
        if callable(self.distance):
            return float(self.distance(x, y))
        if self.distance == "trace":
            return qmath.trace_distance(x, y)
        if self.distance == "restricted":
            return restricted_distance(x, y, self.query_set)
        raise ValueError(f"unknown distance {self.distance!r}")


def restricted_distance(x, y, queries) -> float:
    """``d_M(x, y) = max_{O in M} |tr[(x - y) O]| / 2``."""
    rx, ry = qmath.as_density(x), qmath.as_density(y)
    return max(0.5 * abs(qmath.expectation(rx, O) - qmath.expectation(ry, O)) for O in queries)


# ---------------------------------------------------------------- triv / frac

def triv(problem: LearningProblem, candidates: Sequence | None = None, rng=None, samples: int = 10_000) -> Estimate:
    """``max_t Pr_{s~mu}[s in Z_t]`` over candidate targets (defaults to all targets)."""
    cands = problem.targets if candidates is None else list(candidates)
    if not cands:
        raise ValueError("no candidate targets")
    if problem.measure.finite:
        best = max(problem.measure.mass(lambda s, t=t: problem.predicate(s, t)).value for t in cands)
        return Estimate(best, 0.0, len(problem.measure.support))
    rng = np.random.default_rng() if rng is None else rng
    draws = problem.measure.draw(rng, samples)
    hits = np.array([[problem.predicate(s, t) for s in draws] for t in cands], dtype=float)
    i = int(np.argmax(hits.mean(axis=1)))
    return _bernoulli_estimate(hits[i])


def triv_by_enumeration(problem: LearningProblem) -> float:
    """Same quantity via the sets ``Z_t`` (finite problems only)."""
    mu = problem.measure
    wmap = {id(s): w for s, w in zip(mu.support, mu.weights)}
    return max(sum(wmap[id(s)] for s in problem.solution_sources(t)) for t in problem.targets)


def frac(measure: Measure, reference: Callable, tau: float, pool: Sequence, evaluate: Callable,
         rng=None, samples: int = 10_000, distance: Callable = None) -> Estimate:
    """``max_x Pr_{s~mu}[d(s(x), f(x)) > tau]`` over a query pool.

    ``evaluate(s, x)`` is the source's value on query ``x``; ``reference(x)`` is ``f(x)``.
    """
    if not pool:
        raise ValueError("empty query pool")
    dist = distance or (lambda a, b: abs(a - b))
    if measure.finite:
        sources, w, n = measure.support, measure.weights, len(measure.support)
    else:
        rng = np.random.default_rng() if rng is None else rng
        sources, w, n = measure.draw(rng, samples), None, samples
    best = None
    for x in pool:
        fx = reference(x)
        hits = np.array([dist(evaluate(s, x), fx) > tau for s in sources], dtype=float)
        est = Estimate(float(w @ hits), 0.0, n) if w is not None else _bernoulli_estimate(hits)
        if best is None or est.value > best.value:
            best = est
    return best


def alpha_probable_sources(problem: LearningProblem, theta: dict, gamma: float) -> list:
    """``Z_theta(gamma)``: sources whose solution set has ``theta``-mass at least ``gamma``.

    Only finite target measures ``theta`` (mapping target -> weight) are supported.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if not problem.measure.finite:
        raise ValueError("needs a finite source support")
    if abs(sum(theta.values()) - 1) > 1e-9:
        raise ValueError("theta must be a probability measure")
    return [s for s in problem.measure.support
            if sum(w for t, w in theta.items() if problem.predicate(s, t)) >= gamma]


def random_dimension_surrogate(measures: Sequence[Measure], reference, tau, pool, evaluate) -> dict:
    """Surrogate for ``rd``: max of ``1/frac`` over user-supplied measures only.

    The true quantity is a supremum over all measures; this is a lower estimate.
    """
    vals = []
    for mu in measures:
        if not mu.finite:
            raise ValueError("surrogate accepts finite measures only")
        fr = frac(mu, reference, tau, pool, evaluate).value
        vals.append(math.inf if fr == 0 else 1.0 / fr)
    i = int(np.argmax(vals))
    return {"label": "surrogate", "value": vals[i], "argmax_measure": i, "per_measure": vals}


# ---------------------------------------------------------------- bound calculators

def qnt_via_variance(variance_max, tau: float) -> float:
    """``q_nt >= tau^2 / max Var``; a zero variance gives ``inf``."""
    v = _val(variance_max)
    if tau == 0:
        return 0.0
    var = v.upper()
    return math.inf if var <= 0 else tau**2 / var


def deterministic_avg_lower_bound(beta: float, triv_value, frac_value) -> float:
    """``max(0, (beta - triv) / frac)`` with triv and frac taken at their upper 3-sigma ends."""
    t, f = _val(triv_value).upper(), _val(frac_value).upper()
    if f <= 0:
        return math.inf
    return max(0.0, (beta - t) / f)


def random_lower_bound_dec(alpha: float, frac_value) -> float:
    """Random algorithms deciding ``Dec`` with success ``alpha``: ``q >= 2(alpha - 1/2)/frac``."""
    f = _val(frac_value).upper()
    if f <= 0:
        return math.inf
    return max(0.0, 2 * (alpha - 0.5) / f)


def verifiable_lower_bound(alpha: float, beta: float, p_v: float, frac_value, excluded_mass) -> float:
    """Lower bound on ``q`` from ``q + p_v >= 2(alpha-1/2)(beta - excluded)/frac``."""
    f = _val(frac_value).upper()
    ex = _val(excluded_mass).upper()
    if f <= 0:
        return math.inf
    return max(0.0, 2 * (alpha - 0.5) * (beta - ex) / f - p_v)


def eps_learning_lower_bound(alpha: float, beta: float, frac_value, ball_mass) -> float:
    """``q + 1 >= 2(alpha-1/2)(beta - Pr[d(s, s*) < 2 eps + tau])/frac``; returns the bound on ``q``."""
    return verifiable_lower_bound(alpha, beta, 1.0, frac_value, ball_mass)


def random_avg_lower_bound(alpha: float, gamma: float, beta: float, sup_mass, frac_value) -> float:
    """``q > (alpha - gamma)(beta - sup_theta Pr[s in Z_theta(gamma)]) / frac``."""
    if not 0 < gamma < alpha:
        raise ValueError("need 0 < gamma < alpha")
    f = _val(frac_value).upper()
    if f <= 0:
        return math.inf
    return max(0.0, (alpha - gamma) * (beta - _val(sup_mass).upper()) / f)


@dataclass
class BoundReport:
    triv: float
    frac: float
    qnt_lower: float
    lower_bound_value: float
    bound_name: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("triv", "frac"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} = {v} is not a probability")
        if self.qnt_lower < 0:
            raise ValueError("qnt_lower must be nonnegative")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in list(d.items()):
            if isinstance(v, float) and math.isinf(v):
                d[k] = "inf"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def selflearn_basis_report(n: int, beta: float = 1.0) -> BoundReport:
    """Closed-form quantities for self-learning computational basis states on ``n`` qubits."""
    if n < 1 or n > 1000:
        raise ValueError("n out of range")
    p = 2.0**-n
    return BoundReport(triv=p, frac=p, qnt_lower=2.0**n, lower_bound_value=deterministic_avg_lower_bound(beta, p, p),
                       bound_name="deterministic_avg", parameters={"n": n, "beta": beta})


# ---------------------------------------------------------------- eps balls

def eps_ball_mass(measure: Measure, center, spec: EpsLearnSpec, samples: int = 10_000, rng=None,
                  strict: bool = True) -> Estimate:
    """``Pr_{s~mu}[d(s, center) < eps]`` (``<=`` when ``strict`` is False)."""
    if strict:
        return measure.mass(lambda s: spec.d(s, center) < spec.eps, rng, samples)
    return measure.mass(lambda s: spec.d(s, center) <= spec.eps, rng, samples)


def helstrom_observable(x, z) -> qmath.Observable:
    """``2 P_+ - I`` with ``P_+`` the projector on the positive part of ``x - z``; attains ``||x - z||_tr``."""
    diff = qmath.as_density(x).matrix - qmath.as_density(z).matrix
    w, v = np.linalg.eigh(diff)
    sgn = np.where(w > 0, 1.0, -1.0)
    return qmath.Observable((v * sgn) @ v.conj().T, op_norm=1.0, tag="helstrom", check=False)


def farfrom_check(measure: Measure, x, z, eps: float, tau: float, pool: Sequence | None = None) -> dict:
    """Both sides of ``Pr[d(x,y) < eps] <= max{frac(mu, z, tau), Pr[d(y,z) < 2 eps + tau/2]}``.

    The Helstrom observable of ``(x, z)`` is always added to the pool, since the
    inequality relies on the query that realizes ``d(x, z)``.
    """
    pool = list(pool or []) + [helstrom_observable(x, z)]
    ev = lambda s, O: qmath.expectation(qmath.as_density(s), O)  # noqa: E731
    zr = qmath.as_density(z)
    lhs = eps_ball_mass(measure, x, EpsLearnSpec(eps))
    fr = frac(measure, lambda O: qmath.expectation(zr, O), tau, pool, ev)
    ball = eps_ball_mass(measure, z, EpsLearnSpec(2 * eps + tau / 2))
    rhs = max(fr.value, ball.value)
    return {"lhs": lhs.value, "lhs_se": lhs.stderr, "frac": fr.value, "ball": ball.value, "rhs": rhs,
            "holds": lhs.lower() <= rhs + SLACK_SIGMAS * max(fr.stderr, ball.stderr) + 1e-12}


# ---------------------------------------------------------------- boosting

def boost_repetitions(gamma: float, delta: float) -> int:
    """``b = ceil(ln(1/delta) / (2 gamma^2))`` repetitions for a ``1/2 + gamma`` learner."""
    if gamma <= 0 or not 0 < delta < 1:
        raise ValueError("need gamma > 0 and 0 < delta < 1")
    return math.ceil(math.log(1 / delta) / (2 * gamma**2))


class BoostFailure(RuntimeError):
    pass


@dataclass
class BoostResult:
    output: Any
    queries: int
    outputs: list
    source_index: int | None

    @property
    def success(self) -> bool:
        return self.source_index is not None


def boost(base_learner: Callable, b: int, sources: Sequence, predicate: Callable) -> Callable:
    """Wrap ``base_learner`` (returns ``t`` or ``(t, queries)``) into a majority learner.

    Runs it ``b`` times; the first source (in ``sources`` order) whose solution
    set contains at least ``ceil(b/2)`` of the outputs decides the answer.
    """
    if b < 1:
        raise ValueError("b must be >= 1")
    need = math.ceil(b / 2)

    def learner(*args, **kwargs) -> BoostResult:
        outs, q = [], 0
        for _ in range(b):
            r = base_learner(*args, **kwargs)
            if isinstance(r, tuple):
                r, dq = r
                q += dq
            outs.append(r)
        if b == 1:
            return BoostResult(outs[0], q, outs, 0)
        for i, s in enumerate(sources):
            hits = [t for t in outs if predicate(s, t)]
            if len(hits) >= need:
                return BoostResult(hits[0], q, outs, i)
        return BoostResult(None, q, outs, None)

    return learner


# ---------------------------------------------------------------- metric variance

def _pairs(m: int, rng, max_pairs: int):
    if m * (m - 1) // 2 <= max_pairs:
        i, j = np.triu_indices(m, 1)
        return i, j
    rng = np.random.default_rng(0) if rng is None else rng
    i = rng.integers(m, size=max_pairs)
    j = rng.integers(m - 1, size=max_pairs)
    j = j + (j >= i)
    return i, j


def metric_variance(points: Sequence, d: Callable = None, weights=None, rng=None, max_pairs: int = 10**6) -> float:
    """``Var = E[d(X1, X2)^2] / 2`` for independent ``X1, X2``.

    With ``weights`` the points are a finite distribution and the value is exact;
    otherwise it is the U-statistic over distinct sample pairs (random pairs once
    there are more than 10^4 points).
    """
    d = d or (lambda a, b: abs(a - b))
    m = len(points)
    if weights is not None:
        w = np.asarray(weights, float)
        return 0.5 * float(sum(w[i] * w[j] * d(points[i], points[j]) ** 2 for i in range(m) for j in range(m)))
    if m < 2:
        raise ValueError("need at least 2 samples")
    if m > 10_000:
        max_pairs = min(max_pairs, 10**5)
    i, j = _pairs(m, rng, max_pairs)
    return 0.5 * float(np.mean([d(points[a], points[b]) ** 2 for a, b in zip(i, j)]))


def metric_chebyshev_check(points: Sequence, tau: float, d: Callable = None, rng=None) -> dict:
    """Empirical ``Pr[d(X1,X2) > 2 tau]`` against ``Var / tau^2``."""
    d = d or (lambda a, b: abs(a - b))
    m = len(points)
    if m < 2:
        raise ValueError("need at least 2 samples")
    i, j = _pairs(m, rng, 10**5 if m > 10_000 else 10**6)
    dist = np.array([d(points[a], points[b]) for a, b in zip(i, j)])
    var = 0.5 * float(np.mean(dist**2))
    tail = float(np.mean(dist > 2 * tau))
    bound = math.inf if tau == 0 else var / tau**2
    return {"tail": tail, "bound": bound, "variance": var, "holds": tail <= bound + 1e-12}
