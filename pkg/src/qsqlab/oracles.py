"""Evaluation oracles with tolerance, noise policies, query accounting and transcripts.

An oracle hides a function ``s`` and, for a valid query ``x``, returns some
``v`` with ``d(v, s(x)) <= tau``.  Which ``v`` is chosen is decided by a
:class:`NoisePolicy`; the default rounds the truth to the nearest multiple of
``tau``, which is deterministic and always legal.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import qmath
from .ensembles import tensor_power_expectation
from .qmath import BudgetError, DimensionError, Observable, TensorSumObservable

NORM_SLACK = 1e-9


class QueryError(ValueError):
    """The query is outside the oracle's query domain; no budget is consumed."""


# ---------------------------------------------------------------- noise policies

class NoisePolicy:
    name = "base"

    def respond(self, truth, tau: float, query_key: str, history: list):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.name}


class Exact(NoisePolicy):
    name = "Exact"

    def respond(self, truth, tau, query_key, history):
        return truth


def _round_half_up(x: float, step: float) -> float:
    q = x / step
    if not math.isfinite(q) or abs(q) >= 2.0**52:  # grid finer than float resolution
        return x
    return math.floor(q + 0.5) * step


@dataclass
class QuantizeGrid(NoisePolicy):
    """Round to the nearest multiple of ``step`` (default ``tau``).

    Complex values are rounded componentwise on a ``step/sqrt(2)`` grid so the
    error stays inside the disk of radius ``step/2``.
    """

    step: float | None = None
    name = "QuantizeGrid"

    def respond(self, truth, tau, query_key, history):
        step = tau if self.step is None else self.step
        if step > tau + 1e-15:
            raise ValueError(f"grid step {step} exceeds tolerance {tau}")
        if step == 0:
            return truth
        if isinstance(truth, complex):
            s = step / math.sqrt(2)
            return complex(_round_half_up(truth.real, s), _round_half_up(truth.imag, s))
        return _round_half_up(float(truth), step)

    def describe(self):
        return {"kind": self.name, "step": self.step}


@dataclass
class SeededUniform(NoisePolicy):
    """Add uniform noise of half-width ``width`` (default ``tau``); a disk for complex values."""

    seed: int = 0
    width: float | None = None
    name = "SeededUniform"

    def __post_init__(self):
        self._rng = np.random.default_rng(self.seed)

    def respond(self, truth, tau, query_key, history):
        w = tau if self.width is None else self.width
        if w > tau + 1e-15:
            raise ValueError(f"noise width {w} exceeds tolerance {tau}")
        if isinstance(truth, complex):
            r = w * math.sqrt(self._rng.uniform())
            phi = self._rng.uniform(0, 2 * math.pi)
            return truth + r * complex(math.cos(phi), math.sin(phi))
        return float(truth) + self._rng.uniform(-w, w)

    def describe(self):
        return {"kind": self.name, "seed": self.seed, "width": self.width}


@dataclass
class AdversarialCallback(NoisePolicy):
    """User responder ``fn(truth, tau, query_key, history) -> value``, clipped to the tau ball.

    ``history`` is the transcript so far, so adaptive adversaries are possible.
    """

    fn: Callable = None
    name = "AdversarialCallback"

    def respond(self, truth, tau, query_key, history):
        v = self.fn(truth, tau, query_key, history)
        if isinstance(truth, complex) or isinstance(v, complex):
            delta = complex(v) - complex(truth)
            if abs(delta) > tau:
                delta *= tau / abs(delta)
            return complex(truth) + delta
        return float(truth) + float(np.clip(float(v) - float(truth), -tau, tau))


def make_policy(spec) -> NoisePolicy:
    """Build a policy from a name or ``{"kind": ..., ...}`` mapping."""
    if isinstance(spec, NoisePolicy):
        return spec
    if spec is None:
        return QuantizeGrid()
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    if kind == "Exact":
        return Exact()
    if kind == "QuantizeGrid":
        return QuantizeGrid(spec.get("step"))
    if kind == "SeededUniform":
        return SeededUniform(int(spec.get("seed", 0)), spec.get("width"))
    raise ValueError(f"unknown noise policy {kind!r}")


# ---------------------------------------------------------------- oracle core

@dataclass
class TranscriptEntry:
    index: int
    tag: str
    digest: str
    value: Any
    tolerance: float

    def to_json(self) -> dict:
        v = self.value
        if isinstance(v, complex):
            v = [v.real, v.imag]
        elif isinstance(v, np.ndarray):
            v = v.tolist()
        return {"index": self.index, "tag": self.tag, "digest": self.digest, "value": v, "tolerance": self.tolerance}


class EvalOracle:
    """Tolerance-``tau`` evaluation oracle for a hidden function.

    ``truth_fn(x)`` computes the exact value; ``validate(x)`` raises
    :class:`QueryError` for queries outside the domain.  ``metric`` is
    ``"abs"`` (real or complex modulus) or ``"tv"`` (one-bit distributions).
    """

    def __init__(self, kind: str, truth_fn: Callable, validate: Callable, tau: float,
                 policy: NoisePolicy | None = None, metric: str = "abs", expose_truth: bool = False,
                 describe_query: Callable | None = None):
        if tau < 0 or not math.isfinite(tau):
            raise ValueError("tolerance must be a finite nonnegative number")
        self.kind = kind
        self.tau = float(tau)
        self.policy = QuantizeGrid() if policy is None else make_policy(policy)
        self.metric = metric
        self._truth_fn = truth_fn
        self._validate = validate
        self._describe = describe_query or _describe_query
        self._expose = expose_truth
        self.dim: int | None = None
        self.transcript: list[TranscriptEntry] = []

    @property
    def query_count(self) -> int:
        return len(self.transcript)

    def query(self, x, tag: str | None = None):
        self._validate(x)
        truth = self._truth_fn(x)
        dtag, key = self._describe(x)
        if self.metric == "tv":
            p1 = self.policy.respond(float(truth[1]), self.tau, key, self.transcript)
            p1 = float(np.clip(p1, 0.0, 1.0))
            value = np.array([1.0 - p1, p1])
        else:
            value = self.policy.respond(truth, self.tau, key, self.transcript)
        self.transcript.append(TranscriptEntry(len(self.transcript), tag or dtag, key, value, self.tau))
        return value

    def truth(self, x):
        """Exact value; only available for oracles built with ``expose_truth=True``."""
        if not self._expose:
            raise PermissionError("ground truth is hidden outside test mode")
        self._validate(x)
        return self._truth_fn(x)

    def distance(self, v, w) -> float:
        if self.metric == "tv":
            return float(0.5 * np.sum(np.abs(np.asarray(v) - np.asarray(w))))
        return float(abs(v - w))

    def transcript_jsonl(self) -> str:
        return "\n".join(json.dumps(e.to_json()) for e in self.transcript)

    def export_transcript(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.transcript_jsonl())
            fh.write("\n")

    def __repr__(self):
        return f"EvalOracle(kind={self.kind}, tau={self.tau}, queries={self.query_count})"


def query(oracle: EvalOracle, x, tag: str | None = None):
    return oracle.query(x, tag)


def _describe_query(x) -> tuple[str, str]:
    if isinstance(x, (Observable, TensorSumObservable)):
        return x.tag or type(x).__name__, x.key
    if isinstance(x, np.ndarray):
        return f"array{list(x.shape)}", qmath.digest(x)
    try:
        arr = np.asarray(x)
        if arr.dtype != object:
            return f"param{list(arr.shape)}", qmath.digest(arr)
    except Exception:
        pass
    return type(x).__name__, hashlib.sha256(repr(x).encode()).hexdigest()[:16]


def _check_op_norm(O, bound: float = 1.0):
    nrm = O.op_norm
    if nrm > bound + NORM_SLACK:
        raise QueryError(f"observable operator norm {nrm:.6g} exceeds {bound}")


def _as_query_observable(O, dim: int):
    if not isinstance(O, (Observable, TensorSumObservable)):
        arr = np.asarray(O)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise QueryError("observable query must be a square matrix")
        if not qmath.is_hermitian(arr):
            raise QueryError("observable query is not Hermitian")
        O = Observable(arr, check=False)
    if O.dim != dim:
        raise QueryError(f"observable dim {O.dim} does not match {dim}")
    return O


class _ObservableDomain:
    """Caches the converted observable for the query in flight."""

    def __init__(self, dim):
        self.dim = dim
        self._last = None

    def validate(self, O):
        obs = _as_query_observable(O, self.dim)
        _check_op_norm(obs)
        self._last = (id(O), obs)

    def get(self, O):
        if self._last is not None and self._last[0] == id(O):
            return self._last[1]
        return _as_query_observable(O, self.dim)

    def describe(self, O):
        return _describe_query(self.get(O))


# ---------------------------------------------------------------- constructors

def make_stat_oracle(P, tau: float, policy=None, expose_truth: bool = False) -> EvalOracle:
    """SQ oracle of a distribution on ``[N]``: queries ``phi: [N] -> [-1, 1]``."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 1 or np.any(P < -1e-15) or abs(P.sum() - 1) > 1e-9:
        raise ValueError("P must be a probability vector")

    def validate(phi):
        phi = np.asarray(phi)
        if phi.shape != P.shape:
            raise QueryError(f"query shape {phi.shape} != {P.shape}")
        if np.iscomplexobj(phi) or not np.all(np.isfinite(phi)):
            raise QueryError("query must be real and finite")
        if np.max(np.abs(phi)) > 1 + 1e-12:
            raise QueryError("query values must lie in [-1, 1]")

    return EvalOracle("Stat", lambda phi: float(P @ np.asarray(phi, float)), validate, tau, policy,
                      expose_truth=expose_truth)


def _state(rho):
    if isinstance(rho, (qmath.PureState, qmath.DensityMatrix)):
        return rho
    arr = np.asarray(rho)
    return qmath.PureState(arr) if arr.ndim == 1 else qmath.DensityMatrix(arr)


def make_qstat_oracle(rho, tau: float, policy=None, expose_truth: bool = False) -> EvalOracle:
    """QStat oracle: queries ``O`` with ``||O||_op <= 1``, truth ``tr[rho O]``."""
    rho = _state(rho)
    dom = _ObservableDomain(rho.dim)
    oracle = EvalOracle("QStat", lambda O: qmath.expectation(rho, dom.get(O)), dom.validate, tau, policy,
                        expose_truth=expose_truth, describe_query=dom.describe)
    oracle.dim = rho.dim
    return oracle


def make_kqstat_oracle(rho, k: int, tau: float, policy=None, expose_truth: bool = False) -> EvalOracle:
    """k-copy QStat: truth ``tr[rho^{(x)k} O]``.

    Pure states are contracted as state vectors; factored
    :class:`TensorSumObservable` queries work at any size.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rho = _state(rho)
    N = rho.dim
    if N**k > 2**30:
        raise BudgetError(f"N^k = {N}^{k} exceeds the multi-copy budget 2^30")
    dom = _ObservableDomain(N**k)
    cache = {}

    def truth(O):
        O = dom.get(O)
        if isinstance(O, TensorSumObservable):
            if O.copies != k:
                raise QueryError("tensor-sum query has the wrong number of copies")
            return O.product_expectation(lambda a: qmath.expectation(rho, a))
        if isinstance(rho, qmath.PureState):
            return tensor_power_expectation(rho.amplitudes, O, k)
        if "power" not in cache:
            cache["power"] = rho.tensor_power(k)
        return qmath.expectation(cache["power"], O)

    oracle = EvalOracle(f"{k}QStat", truth, dom.validate, tau, policy, expose_truth=expose_truth,
                        describe_query=dom.describe)
    oracle.dim = N**k
    return oracle


def make_csq_oracle(f, lam, tau: float, policy=None, expose_truth: bool = False) -> EvalOracle:
    """CSQ oracle of ``f`` under the measure ``lam`` on ``[N]``: truth ``E_lam[g f]``, ``||g||_{L2(lam)} <= 1``."""
    f = np.asarray(f, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != f.shape or abs(lam.sum() - 1) > 1e-9 or np.any(lam < 0):
        raise ValueError("lam must be a probability vector matching f")

    def validate(g):
        g = np.asarray(g)
        if g.shape != f.shape or np.iscomplexobj(g) or not np.all(np.isfinite(g)):
            raise QueryError("query must be a finite real vector of the right length")
        nrm = math.sqrt(float(lam @ (g * g)))
        if nrm > 1 + NORM_SLACK:
            raise QueryError(f"query L2(lam) norm {nrm:.6g} exceeds 1")

    return EvalOracle("CSQ", lambda g: float(lam @ (np.asarray(g, float) * f)), validate, tau, policy,
                      expose_truth=expose_truth)


def make_mcsq_oracle(A, rho, tau: float, policy=None, expose_truth: bool = False) -> EvalOracle:
    """Matrix CSQ: truth ``tr[A^dag rho B]`` (complex) for ``tr[B^dag rho B] <= 1``."""
    A = np.asarray(A, dtype=complex)
    R = qmath.as_density(_state(rho)).matrix
    if A.shape != R.shape:
        raise DimensionError("A and rho dimensions differ")

    def validate(B):
        B = np.asarray(B)
        if B.shape != R.shape:
            raise QueryError("query shape mismatch")
        nrm2 = float(np.real(np.trace(B.conj().T @ R @ B)))
        if nrm2 > (1 + NORM_SLACK) ** 2:
            raise QueryError(f"query L2(rho) norm {math.sqrt(nrm2):.6g} exceeds 1")

    return EvalOracle("MCSQ", lambda B: complex(np.trace(A.conj().T @ R @ np.asarray(B, complex))), validate,
                      tau, policy, expose_truth=expose_truth)


def _ensemble_densities(states, weights):
    mats = [qmath.as_density(_state(s)).matrix for s in states]
    if not mats:
        raise ValueError("state ensemble is empty")
    w = np.full(len(mats), 1 / len(mats)) if weights is None else np.asarray(weights, float)
    if len(w) != len(mats) or abs(w.sum() - 1) > 1e-9 or np.any(w < 0):
        raise ValueError("weights must be a probability vector over the states")
    return np.array(mats), w


def make_qcsq_oracle(M, states, tau: float, policy=None, weights=None, expose_truth: bool = False) -> EvalOracle:
    """QCSQ: truth ``E_{rho~lam}[tr(rho O) tr(rho M)]`` over an explicit state ensemble."""
    rhos, w = _ensemble_densities(states, weights)
    Mobs = qmath.as_observable(M)
    m_vals = np.array([np.real(np.einsum("ij,ji->", r, Mobs.dense())) for r in rhos])
    dom = _ObservableDomain(rhos.shape[1])

    def truth(O):
        o = dom.get(O).dense()
        o_vals = np.real(np.einsum("sij,ji->s", rhos, o))
        return float(np.sum(w * o_vals * m_vals))

    return EvalOracle("QCSQ", truth, dom.validate, tau, policy, expose_truth=expose_truth,
                      describe_query=dom.describe)


def make_qusq_oracle(U, states, tau: float, policy=None, weights=None, expose_truth: bool = False) -> EvalOracle:
    """QUSQ: truth ``E_{rho~lam}[tr(U^dag Q rho)]`` for unitary queries ``Q`` (complex disk tolerance)."""
    U = np.asarray(U, dtype=complex)
    if not qmath.is_unitary(U):
        raise ValueError("U must be unitary")
    rhos, w = _ensemble_densities(states, weights)
    rho_bar = np.einsum("s,sij->ij", w, rhos)

    def validate(Q):
        Q = np.asarray(Q)
        if Q.shape != U.shape:
            raise QueryError("query shape mismatch")
        if not qmath.is_unitary(Q.astype(complex), tol=1e-9):
            raise QueryError("query must be unitary")

    return EvalOracle("QUSQ", lambda Q: complex(np.trace(U.conj().T @ np.asarray(Q, complex) @ rho_bar)),
                      validate, tau, policy, expose_truth=expose_truth)


def make_1bit_oracle(P, tau: float, policy=None, expose_truth: bool = False) -> EvalOracle:
    """One-bit oracle: a query is a boolean function ``h`` on ``[N]``; the answer is
    a distribution ``(p0, p1)`` within TV distance ``tau`` of the law of ``h(i)``, ``i ~ P``."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 1 or abs(P.sum() - 1) > 1e-9 or np.any(P < 0):
        raise ValueError("P must be a probability vector")
    idx = np.arange(P.size)

    def bits(h):
        return np.asarray(h(idx) if callable(h) else h)

    def validate(h):
        try:
            b = bits(h)
        except Exception as exc:  # noqa: BLE001 - any failure of a user function is a bad query
            raise QueryError(f"boolean query failed: {exc}") from exc
        if b.shape != P.shape or not np.all((b == 0) | (b == 1)):
            raise QueryError("query must map [N] to {0, 1}")

    def truth(h):
        p1 = float(P @ bits(h).astype(float))
        return np.array([1 - p1, p1])

    def describe(h):
        b = bits(h).astype(np.uint8)
        return "bool", qmath.digest(b)

    return EvalOracle("1Bit", truth, validate, tau, policy, metric="tv", expose_truth=expose_truth,
                      describe_query=describe)


def make_loss_oracle(loss: Callable, tau: float, policy=None, domain: Callable | None = None,
                     expose_truth: bool = False) -> EvalOracle:
    """Loss oracle ``eval_tau(l)`` for ``l: Theta -> [0, 1]``; ``domain(theta)`` validates parameters."""

    def validate(theta):
        if domain is not None and not domain(theta):
            raise QueryError("parameter outside the parameter space")

    def truth(theta):
        v = float(loss(theta))
        if not (-1e-12 <= v <= 1 + 1e-12):
            raise ValueError(f"loss value {v} outside [0, 1]")
        return v

    return EvalOracle("Loss", truth, validate, tau, policy, expose_truth=expose_truth)
