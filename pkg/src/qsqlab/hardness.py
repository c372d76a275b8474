"""Numerical checks of variance / concentration bounds and barren-plateau probes."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import qmath
from .ensembles import (UnitaryEnsemble, _power_outer, apply_one_qubit, apply_two_qubit, haar_states,
                        jackknife_variance, mean_and_stderr, sample_haar)
from .problems import BoundReport, selflearn_basis_report
from .qmath import BudgetError, Observable, TensorSumObservable

SIGMAS = 3.0


# ---------------------------------------------------------------- reports

@dataclass
class VarianceReport:
    ensemble: dict
    observable: str
    copies: int
    n: int | None
    estimate: float
    stderr: float
    analytic_bound: float
    bound_name: str
    samples: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")

    @property
    def passed(self) -> bool:
        return self.estimate <= self.analytic_bound + SIGMAS * self.stderr

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d

    CSV_FIELDS = ("ensemble", "observable", "copies", "n", "estimate", "stderr", "analytic_bound",
                  "bound_name", "samples", "pass")

    def csv_row(self) -> dict:
        d = self.to_dict()
        d["ensemble"] = d["ensemble"].get("kind", "")
        return {k: d[k] for k in self.CSV_FIELDS}


def reports_to_csv(reports: Sequence, fields: Sequence[str] | None = None) -> str:
    rows = [r.csv_row() for r in reports]
    fields = list(fields or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


@dataclass
class BPReport:
    model: dict
    parameter_measure: str
    tau: float
    samples: int
    gradient_variance: list
    gradient_variance_stderr: list
    tail_probability: list
    loss_variance: float
    loss_variance_stderr: float
    concentrated: bool
    audit_max_error: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> dict:
        return {"model": self.model.get("kind", ""), "n": self.model.get("n"), "tau": self.tau,
                "samples": self.samples, "mean_gradient_variance": float(np.mean(self.gradient_variance)),
                "max_tail_probability": float(np.max(self.tail_probability)),
                "loss_variance": self.loss_variance, "concentrated": self.concentrated}


# ---------------------------------------------------------------- functional evaluation

def _expect_rows(states: np.ndarray, A) -> np.ndarray:
    """``<psi_s|A|psi_s>`` for each row."""
    if isinstance(A, Observable) and A.matrix is None:
        return np.array([np.real(np.vdot(s, A.apply(s))) for s in states])
    M = A.matrix if isinstance(A, Observable) else np.asarray(A)
    return np.real(np.einsum("si,si->s", states.conj(), states @ M.T))


def functional_values(states: np.ndarray, O, k: int = 1) -> np.ndarray:
    """``tr[rho^{(x)k} O]`` for each state row without materializing ``rho^{(x)k}``."""
    if isinstance(O, TensorSumObservable):
        if O.copies != k:
            raise qmath.DimensionError("observable copy count does not match k")
        cache = {}
        total = np.zeros(states.shape[0])
        for c, factors in O.terms:
            p = np.full(states.shape[0], complex(c))
            for a in factors:
                if id(a) not in cache:
                    cache[id(a)] = _expect_rows(states, a)
                p = p * cache[id(a)]
            total += p.real
        return total
    O = qmath.as_observable(O)
    N = states.shape[1]
    if O.dim != N**k:
        raise qmath.DimensionError(f"observable dim {O.dim} != {N}^{k}")
    if k == 1:
        return _expect_rows(states, O)
    if O.matrix is None:
        return np.array([np.real(np.vdot(v, O.apply(v))) for v in _power_outer(states, k)])
    out = []
    for start in range(0, states.shape[0], 256):
        out.append(_expect_rows(_power_outer(states[start:start + 256], k), O))
    return np.concatenate(out)


def _observable_name(O) -> str:
    return getattr(O, "tag", "") or type(O).__name__


# ---------------------------------------------------------------- variance checks

def haar_variance_exact(O) -> float:
    """``(tr[O^2] N - tr[O]^2) / (N^2 (N+1))`` for Haar-random pure states."""
    M = qmath.as_observable(O).dense()
    N = M.shape[0]
    t1 = np.trace(M).real
    t2 = np.real(np.vdot(M, M))
    return float((t2 * N - t1**2) / (N**2 * (N + 1)))


def default_variance_bound(ensemble: UnitaryEnsemble, k: int) -> tuple[float, str]:
    N = ensemble.N
    if k == 1 and ensemble.kind in ("Haar", "CliffordUniform"):
        return 1.0 / (N + 1), "2-design single copy: 1/(N+1)"
    if ensemble.kind == "Haar":
        return 8 * k**2 / N, "t-design k copies: 8k^2/N"
    if ensemble.kind == "CliffordUniform" and k == 2:
        return 16.0 / N, "measured envelope C/N with C=16"
    return math.inf, "none"


def state_variance(ensemble: UnitaryEnsemble, O, k: int = 1, samples: int = 10_000,
                   rng: np.random.Generator | None = None, bound: float | None = None,
                   bound_name: str | None = None, chunk: int = 2000,
                   states: np.ndarray | None = None) -> VarianceReport:
    """Variance of ``tr[rho(U)^{(x)k} O]`` over the ensemble with a jackknife standard error.

    ``states`` may carry pre-sampled ensemble states (rows) to share across observables.
    """
    norm = O.op_norm if isinstance(O, TensorSumObservable) else qmath.as_observable(O).op_norm
    if norm > 1 + 1e-9:
        raise ValueError("observable needs operator norm <= 1")
    if states is not None:
        vals = np.concatenate([functional_values(states[i:i + chunk], O, k) for i in range(0, len(states), chunk)])
        est, se = jackknife_variance(vals)
        count = len(states)
    elif ensemble.is_exact:
        states, w = ensemble.exact_states()
        vals = functional_values(states, O, k)
        mu = float(w @ vals)
        est, se, count = float(w @ (vals - mu) ** 2), 0.0, len(states)
    else:
        rng = np.random.default_rng() if rng is None else rng
        vals = []
        remaining = samples
        while remaining > 0:
            m = min(chunk, remaining)
            vals.append(functional_values(ensemble.sample_states(rng, m), O, k))
            remaining -= m
        vals = np.concatenate(vals)
        est, se = jackknife_variance(vals)
        count = samples
    if bound is None:
        bound, dname = default_variance_bound(ensemble, k)
        bound_name = bound_name or dname
    n = int(round(math.log2(ensemble.N))) if ensemble.N & (ensemble.N - 1) == 0 else None
    return VarianceReport(ensemble.describe(), _observable_name(O), k, n, est, se, bound, bound_name or "custom", count)


def random_observable(N: int, rng: np.random.Generator, kind: str = "hermitian") -> Observable:
    """Random query observable with operator norm exactly 1."""
    if kind == "hermitian":
        return Observable(qmath.random_hermitian(N, rng), op_norm=1.0, tag="random_hermitian", check=False)
    if kind == "pauli":
        n = int(round(math.log2(N)))
        while True:
            lab = "".join(rng.choice(list("IXYZ"), size=n))
            if set(lab) != {"I"}:
                break
        return Observable(qmath.PauliWeyl.from_label(lab).dense(), op_norm=1.0, tag=f"pauli_{lab}", check=False)
    if kind == "projector":
        v = haar_states(N, rng, 1)[0]
        return Observable(np.outer(v, v.conj()), op_norm=1.0, tag="projector", check=False)
    raise ValueError(f"unknown observable kind {kind!r}")


def adversarial_pool(n: int, k: int, rng: np.random.Generator, size: int = 10,
                     stabilizer_source: Callable | None = None) -> list:
    """Observables on ``k`` copies meant to maximize variance over (stabilizer-)state ensembles.

    Cycles through ``P^{(x)k}`` for random Paulis, ``|phi><phi|^{(x)k}`` for
    sampled states (stabilizer states when ``stabilizer_source`` is given),
    and random Hermitian operators on the full ``N^k`` space when it fits.
    """
    N = 2**n
    pool = []
    kinds = ["pauli_power", "projector_power", "pauli_power", "hermitian", "pauli_mixed"]
    i = 0
    while len(pool) < size:
        kind = kinds[i % len(kinds)]
        i += 1
        if kind == "pauli_power":
            P = random_observable(N, rng, "pauli")
            pool.append(TensorSumObservable([(1.0, [P] * k)], tag=f"{P.tag}^{k}"))
        elif kind == "projector_power":
            if stabilizer_source is not None:
                v = stabilizer_source(rng)
            else:
                v = haar_states(N, rng, 1)[0]
            Pr = Observable(np.outer(v, v.conj()), op_norm=1.0, tag="proj", check=False)
            pool.append(TensorSumObservable([(1.0, [Pr] * k)], tag=f"state_projector^{k}"))
        elif kind == "hermitian":
            if N**k <= 2**10:
                pool.append(random_observable(N**k, rng, "hermitian"))
            else:
                A = random_observable(N, rng, "hermitian")
                pool.append(TensorSumObservable([(1.0, [A] * k)], tag=f"random_hermitian^{k}"))
        else:
            Ps = [random_observable(N, rng, "pauli") for _ in range(k)]
            pool.append(TensorSumObservable([(1.0, Ps)], tag="x".join(p.tag for p in Ps)))
    return pool


def max_variance_over_pool(ensemble, pool, k, samples, rng) -> tuple[VarianceReport, list]:
    """Report for the pool member with the largest estimated variance, plus all reports."""
    states = None if ensemble.is_exact else ensemble.sample_states(rng, samples)
    reps = [state_variance(ensemble, O, k, samples, rng, states=states) for O in pool]
    best = max(range(len(reps)), key=lambda i: reps[i].estimate)
    reps[best].extra["pool_argmax"] = best
    return reps[best], reps


# ---------------------------------------------------------------- Levy

def levy_bound(N: int, k: int, tau: float, lipschitz_norm: float = 1.0) -> float:
    """``exp(-4 N tau^2 / (9 pi^3 L^2))`` with ``L = 2k ||O||_op``."""
    L = 2 * k * lipschitz_norm
    return math.exp(-4 * N * tau**2 / (9 * math.pi**3 * L**2))


def levy_tail_check(N: int, k: int, tau: float, samples: int = 10_000, rng=None, O=None) -> dict:
    """Empirical ``Pr[|f - mean| > tau]`` for ``f = tr[rho^{(x)k} O]`` over Haar states vs the Levy bound."""
    n = int(round(math.log2(N)))
    if (2**n != N) or n > 10 or (k > 2 and n > 8):
        raise BudgetError("Levy check limited to N = 2^n with n <= 10 for k <= 2")
    rng = np.random.default_rng() if rng is None else rng
    if O is None:
        Z1 = Observable(qmath.tensor(qmath.Z, np.eye(N // 2)), op_norm=1.0, tag="Z1", check=False)
        O = Z1 if k == 1 else TensorSumObservable([(1.0, [Z1] * k)], tag=f"Z1^{k}")
    vals = []
    for start in range(0, samples, 2000):
        vals.append(functional_values(haar_states(N, rng, min(2000, samples - start)), O, k))
    vals = np.concatenate(vals)
    hits = np.abs(vals - vals.mean()) > tau
    p, se = mean_and_stderr(hits.astype(float))
    bound = levy_bound(N, k, tau, O.op_norm)
    return {"N": N, "k": k, "tau": tau, "samples": samples, "tail": p, "stderr": se, "bound": bound,
            "holds": p <= bound + SIGMAS * se}


# ---------------------------------------------------------------- global cost identity

class IdentityViolation(ArithmeticError):
    pass


def pauli_cost_identity(psi) -> float:
    """Mean of ``<W_x>^2`` over all ``4^n`` Weyl labels; equals ``2^{-n}`` for every pure state."""
    psi = psi if isinstance(psi, qmath.PureState) else qmath.PureState(psi, normalize=True)
    n = int(round(math.log2(psi.dim)))
    if n > 5:
        raise BudgetError("4^n enumeration refused above n = 5")
    val = float(np.mean(qmath.weyl_expectations(psi) ** 2))
    if abs(val - 2.0**-n) > 1e-10:
        raise IdentityViolation(f"mean <W_x>^2 = {val} differs from 2^-{n}")
    return val


def selflearn_basis_quantities(n: int, beta: float = 1.0) -> BoundReport:
    """``triv = frac = 2^{-n}`` and the bound ``(beta - 2^{-n}) 2^n``, analytically (``n <= 30``)."""
    if not 1 <= n <= 30:
        raise ValueError("n must be in 1..30")
    return selflearn_basis_report(n, beta)


# ---------------------------------------------------------------- linear models

@dataclass
class LinearModel:
    """``f_phi(x) = tr[rho_x U_phi^dag O U_phi]`` with a Haar variational layer or Haar encoding."""

    n: int
    O: np.ndarray
    phis: int = 16  # size of the finite variational set in encoding mode

    @property
    def N(self) -> int:
        return 2**self.n

    def describe(self) -> dict:
        return {"kind": "LinearModel", "n": self.n, "phis": self.phis}


def local_pauli(n: int, q: int, P: str = "Z") -> np.ndarray:
    ops = [qmath.I2] * n
    ops[q] = qmath.PAULIS[P]
    return qmath.tensor(*ops)


def linear_model_variance(model: LinearModel, which: str = "variational_2design", samples: int = 5000,
                          rng: np.random.Generator | None = None, inputs: int = 8) -> VarianceReport:
    """``Var_phi[f_phi] = E_x Var_phi f_phi(x)`` (the ``L^2(D)`` functional variance).

    ``variational_2design``: Haar ``U_phi``, a few basis-state inputs; bound ``1/(N+1)``.
    ``encoding_2design``: Haar-random encoded states, a finite set of ``phis``
    Haar-rotated observables; ``O`` is shifted to be traceless and scaled to unit
    Hilbert-Schmidt norm, the normalization under which ``2/(N(N+1))`` holds.
    The report also carries the exact value for the finite set.
    """
    rng = np.random.default_rng() if rng is None else rng
    N = model.N
    O = np.asarray(model.O, dtype=complex)
    if qmath.op_norm(O) > 1 + 1e-9:
        raise ValueError("observable needs operator norm <= 1")
    if which == "variational_2design":
        xs = rng.choice(N, size=min(inputs, N), replace=False)
        per_x = []
        for x in xs:
            vals = []
            for start in range(0, samples, 500):
                U = sample_haar(N, rng, size=min(500, samples - start))
                cols = U[:, :, x]
                vals.append(_expect_rows(cols, O))
            per_x.append(np.concatenate(vals))
        per_x = np.array(per_x)  # (inputs, samples)
        # average over inputs of the variance over phi; jackknife over phi draws
        mu = per_x.mean(axis=1, keepdims=True)
        contrib = ((per_x - mu) ** 2).mean(axis=0) * samples / (samples - 1)
        est, se = mean_and_stderr(contrib)
        return VarianceReport(model.describe() | {"mode": which}, "O", 1, model.n, est, se, 1.0 / (N + 1),
                              "variational 2-design: 1/(N+1)", samples,
                              {"exact": haar_variance_exact(O)})
    if which == "encoding_2design":
        Ox = O - np.trace(O) / N * np.eye(N)
        hs = math.sqrt(np.real(np.vdot(Ox, Ox)))
        if hs < 1e-12:
            return VarianceReport(model.describe() | {"mode": which}, "O", 1, model.n, 0.0, 0.0,
                                  2.0 / (N * (N + 1)), "encoding 2-design: 2/(N(N+1))", 0, {"exact": 0.0})
        Ox = Ox / max(hs, 1.0)
        Us = sample_haar(N, rng, size=model.phis)
        Ophi = np.einsum("pij,jk,plk->pil", Us, Ox, Us.conj())
        Obar = Ophi.mean(axis=0)
        exact = float((np.real(np.vdot(Ox, Ox)) - np.real(np.vdot(Obar, Obar))) / (N * (N + 1)))
        contrib = []
        for start in range(0, samples, 1000):
            st = haar_states(N, rng, min(1000, samples - start))
            f = np.real(np.einsum("si,pij,sj->sp", st.conj(), Ophi, st))
            contrib.append(f.var(axis=1))
        contrib = np.concatenate(contrib)
        est, se = mean_and_stderr(contrib)
        return VarianceReport(model.describe() | {"mode": which}, "O_traceless_hs", 1, model.n, est, se,
                              2.0 / (N * (N + 1)), "encoding 2-design: 2/(N(N+1))", samples,
                              {"exact": exact, "hs_norm_before_scaling": hs,
                               "general_bound": 2 * min(hs, 1.0) ** 2 / (N * (N + 1))})
    raise ValueError(f"unknown mode {which!r}")


def selflearn_loss_variance_check(sample_functions: Callable, sample_inputs: Callable, samples: int = 2000,
                                  rng=None, n_theta: int = 10, n_inputs: int = 64) -> dict:
    """Check ``Var_phi[l^phi(theta)] <= 4 sqrt(Var_phi[f_phi])`` at ``n_theta`` random ``theta``.

    ``sample_inputs(rng, m)`` draws inputs ``x ~ D``; ``sample_functions(rng, m, xs)``
    returns an ``(m, len(xs))`` array of values ``f_phi(x)`` in ``[-1, 1]``.
    ``l^phi(theta) = E_x (f_phi(x) - f_theta(x))^2 / 2``.
    """
    rng = np.random.default_rng() if rng is None else rng
    xs = sample_inputs(rng, n_inputs)
    F = np.asarray(sample_functions(rng, samples, xs), float)
    Ft = np.asarray(sample_functions(rng, n_theta, xs), float)
    if np.max(np.abs(F)) > 1 + 1e-9:
        raise ValueError("functions must be bounded by 1")
    var_f = float(np.mean(F.var(axis=0)))
    rhs = 4 * math.sqrt(var_f)
    lhs, lhs_se = [], []
    for t in Ft:
        L = 0.5 * np.mean((F - t) ** 2, axis=1)
        v, se = jackknife_variance(L) if samples >= 3 else (float(L.var()), 0.0)
        lhs.append(v)
        lhs_se.append(se)
    holds = all(l <= rhs + SIGMAS * s + 1e-12 for l, s in zip(lhs, lhs_se))
    return {"lhs": lhs, "lhs_stderr": lhs_se, "rhs": rhs, "function_variance": var_f, "holds": holds}


# ---------------------------------------------------------------- parametrized circuits

_ROT = {
    "RX": lambda t: np.array([[math.cos(t / 2), -1j * math.sin(t / 2)], [-1j * math.sin(t / 2), math.cos(t / 2)]]),
    "RY": lambda t: np.array([[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]], dtype=complex),
    "RZ": lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]),
}
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


@dataclass
class CircuitModel:
    """Layers of ``RY``/``RZ`` rotations and a ``CZ`` chain, optional fixed unitary after.

    Loss ``(1 + <O>)/2``, so it lies in ``[0, 1]`` for ``||O||_op <= 1``.  Every
    parameter enters through ``exp(-i theta P / 2)`` with a Pauli ``P``.
    """

    n: int
    layers: int = 1
    O: np.ndarray | None = None
    post: np.ndarray | None = None
    gates: tuple = ("RY", "RZ")

    def __post_init__(self):
        if self.O is None:
            self.O = local_pauli(self.n, 0, "Z")
        self.O = np.asarray(self.O, dtype=complex)

    @property
    def num_params(self) -> int:
        return self.layers * len(self.gates) * self.n

    @property
    def gate_kinds(self) -> list[str]:
        return [g for _ in range(self.layers) for g in self.gates for _ in range(self.n)]

    def describe(self) -> dict:
        return {"kind": "CircuitModel", "n": self.n, "layers": self.layers, "gates": list(self.gates),
                "post": self.post is not None}

    def state(self, theta) -> np.ndarray:
        theta = np.asarray(theta, float)
        if theta.shape != (self.num_params,):
            raise ValueError(f"expected {self.num_params} parameters")
        n = self.n
        psi = np.zeros(2**n, dtype=complex)
        psi[0] = 1
        p = 0
        for _ in range(self.layers):
            for g in self.gates:
                for q in range(n):
                    psi = apply_one_qubit(psi, _ROT[g](theta[p]), q, n)
                    p += 1
            for q in range(n - 1):
                psi = apply_two_qubit(psi, _CZ, q, n)
        if self.post is not None:
            psi = self.post @ psi
        return psi

    def loss(self, theta) -> float:
        psi = self.state(theta)
        return 0.5 * (1 + float(np.real(np.vdot(psi, self.O @ psi))))


def parameter_shift_gradient(model: CircuitModel, theta, i: int) -> float:
    """``(l(theta + pi/2 e_i) - l(theta - pi/2 e_i)) / 2`` for Pauli-rotation gates."""
    kind = model.gate_kinds[i]
    if kind not in _ROT:
        raise ValueError(f"gate {kind} has no two-term shift rule")
    e = np.zeros(model.num_params)
    e[i] = math.pi / 2
    theta = np.asarray(theta, float)
    return 0.5 * (model.loss(theta + e) - model.loss(theta - e))


def finite_difference_gradient(model: CircuitModel, theta, i: int, h: float = 1e-5) -> float:
    e = np.zeros(model.num_params)
    e[i] = h
    theta = np.asarray(theta, float)
    return (model.loss(theta + e) - model.loss(theta - e)) / (2 * h)


def bp_probe(model_sampler: Callable, tau: float, samples: int = 200, rng=None, audit: int = 0) -> BPReport:
    """Gradient statistics over ``theta ~ U[0, 2pi)^P`` (and whatever ``model_sampler(rng)`` randomizes).

    Returns per-component gradient variances, ``Pr[|d_i l| > tau]`` and the loss
    variance; ``audit`` points are cross-checked against finite differences.
    """
    rng = np.random.default_rng() if rng is None else rng
    grads, losses = [], []
    audit_err = 0.0
    m0 = None
    for s in range(samples):
        m = model_sampler(rng)
        m0 = m0 or m
        theta = rng.uniform(0, 2 * math.pi, size=m.num_params)
        g = [parameter_shift_gradient(m, theta, i) for i in range(m.num_params)]
        if s < audit:
            fd = [finite_difference_gradient(m, theta, i) for i in range(m.num_params)]
            audit_err = max(audit_err, float(np.max(np.abs(np.array(g) - fd))))
        grads.append(g)
        losses.append(m.loss(theta))
    G = np.array(grads)
    gv, gse = zip(*(jackknife_variance(G[:, i]) for i in range(G.shape[1])))
    tails = (np.abs(G) > tau).mean(axis=0)
    lv, lse = jackknife_variance(np.array(losses))
    N = 2**m0.n
    concentrated = bool(np.max(tails) <= 1.0 / (N * tau**2) + SIGMAS * math.sqrt(0.25 / samples))
    return BPReport(m0.describe(), "uniform[0,2pi)^P", tau, samples, list(gv), list(gse), tails.tolist(),
                    lv, lse, concentrated, audit_err if audit else None)


def random_init_expected_variance(hamiltonians: Sequence, c: float, N: int, samples: int = 5000, rng=None,
                                  ansatz: Callable | None = None) -> VarianceReport:
    """``E_phi Var_H[tr(rho_phi H)/c]`` over a uniform Hamiltonian family vs ``1/(N+1)``.

    ``ansatz(rng, m)`` returns ``m`` ansatz states as rows (default: Haar states).
    """
    rng = np.random.default_rng() if rng is None else rng
    Hs = [np.asarray(H, dtype=complex) for H in hamiltonians]
    for H in Hs:
        if abs(np.trace(H)) > 1e-9 * N:
            raise ValueError("Hamiltonians must be traceless")
        if qmath.op_norm(H) > c + 1e-9:
            raise ValueError("Hamiltonian norm exceeds c")
    sampler = ansatz or (lambda r, m: haar_states(N, r, m))
    contrib = []
    for start in range(0, samples, 1000):
        st = sampler(rng, min(1000, samples - start))
        vals = np.array([_expect_rows(st, H) / c for H in Hs])  # (family, states)
        contrib.append(vals.var(axis=0))
    contrib = np.concatenate(contrib)
    est, se = mean_and_stderr(contrib)
    return VarianceReport({"kind": "Haar", "N": N}, f"family[{len(Hs)}]", 1,
                          int(round(math.log2(N))), est, se, 1.0 / (N + 1), "random-init VQE: 1/(N+1)", samples)


def data_reupload_variance(n: int, depth: int, block: int = 2, samples: int = 2000, rng=None,
                           x: np.ndarray | None = None) -> VarianceReport:
    """Variance of ``<Z^{(x)n}>`` for a data re-uploading circuit with local Haar blocks.

    Each layer encodes ``RZ(x_i)`` on every qubit and then applies Haar unitaries on
    disjoint ``block``-qubit groups (alternating offsets).  No closed-form constant is used
    for this scaling; the report's bound is ``inf`` and trends are compared across ``n``.
    """
    rng = np.random.default_rng() if rng is None else rng
    x = rng.uniform(0, 2 * math.pi, size=n) if x is None else np.asarray(x, float)
    O = qmath.PauliWeyl.from_label("Z" * n).dense().diagonal().real
    vals = np.empty(samples)
    for s in range(samples):
        psi = np.zeros(2**n, dtype=complex)
        psi[0] = 1
        for layer in range(depth):
            for q in range(n):
                psi = apply_one_qubit(psi, _ROT["RZ"](x[q]), q, n)
            off = (layer % 2) if block == 2 else 0
            for q in range(off, n - block + 1, block):
                U = sample_haar(2**block, rng)
                t = psi.reshape(2**q, 2**block, -1)
                psi = np.einsum("ab,xby->xay", U, t).reshape(-1)
        vals[s] = float(np.sum(O * np.abs(psi) ** 2))
    est, se = jackknife_variance(vals)
    return VarianceReport({"kind": "DataReupload", "n": n, "depth": depth, "block": block}, "Z^n", 1, n,
                          est, se, math.inf, "none (trend only)", samples)
