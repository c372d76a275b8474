"""Random unitary/state ensembles (Haar, Clifford, brickwork) and their moments."""

from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import qmath
from .qmath import BudgetError, DimensionError, PauliWeyl


# ---------------------------------------------------------------- streams

def spawn_rngs(seed, count: int) -> list[np.random.Generator]:
    """Independent child generators derived deterministically from ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(count)]


def run_streams(fn: Callable[[np.random.Generator, int], object], seed, total: int,
                chunk: int = 2000, workers: int = 1) -> list:
    """Split ``total`` samples into fixed-size seeded chunks and run ``fn(rng, size)``.

    The chunking depends only on ``seed``, ``total`` and ``chunk`` so results
    are merged in the same order whatever the worker count.
    """
    sizes = [chunk] * (total // chunk) + ([total % chunk] if total % chunk else [])
    rngs = spawn_rngs(seed, len(sizes))
    if workers <= 1 or len(sizes) == 1:
        return [fn(r, s) for r, s in zip(rngs, sizes)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, rngs, sizes))


# ---------------------------------------------------------------- statistics

def jackknife_variance(x: np.ndarray) -> tuple[float, float]:
    """Unbiased sample variance and its leave-one-out jackknife standard error."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 samples for a jackknife variance")
    mu = x.mean()
    d = x - mu
    var = float(d @ d / (n - 1))
    # leave-one-out variances in closed form (centred for stability)
    s1 = d.sum()
    s2 = d @ d
    m_loo = (s1 - d) / (n - 1)
    v_loo = ((s2 - d * d) - (n - 1) * m_loo**2) / (n - 2)
    se = math.sqrt((n - 1) / n * float(np.sum((v_loo - v_loo.mean()) ** 2)))
    return var, se


def jackknife(x: np.ndarray, stat: Callable[[np.ndarray], float]) -> tuple[float, float]:
    """Generic delete-one jackknife (O(n) calls to ``stat``)."""
    x = np.asarray(x)
    n = len(x)
    if n < 2:
        raise ValueError("need at least 2 samples")
    est = float(stat(x))
    loo = np.array([stat(np.delete(x, i, axis=0)) for i in range(n)])
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return est, se


def mean_and_stderr(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float).ravel()
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0


# ---------------------------------------------------------------- Haar

def sample_haar(N: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with the phases of diag(R) removed."""
    if N < 1:
        raise ValueError("N must be positive")
    shape = (N, N) if size is None else (size, N, N)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def haar_states(N: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` Haar-random pure states as rows (normalized complex Gaussians)."""
    z = rng.standard_normal((size, N)) + 1j * rng.standard_normal((size, N))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


# ---------------------------------------------------------------- Clifford tableau

@dataclass
class CliffordTableau:
    """Images of ``X_1..X_n`` (rows ``0..n-1``) and ``Z_1..Z_n`` (rows ``n..2n-1``).

    Row ``r`` is the Hermitian Pauli ``(-1)^phase[r] * P(x, z)`` with
    ``x = table[r, :n]`` and ``z = table[r, n:]``; ``x = z = 1`` means ``Y``.
    Qubit ``j`` is tensor factor ``j`` counted from the left.
    """

    n: int
    table: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=np.uint8) % 2
        self.phase = np.asarray(self.phase, dtype=np.uint8) % 2
        if self.table.shape != (2 * self.n, 2 * self.n) or self.phase.shape != (2 * self.n,):
            raise DimensionError("tableau shape does not match n")

    def is_symplectic(self) -> bool:
        n = self.n
        om = np.block([[np.zeros((n, n), int), np.eye(n, dtype=int)],
                       [np.eye(n, dtype=int), np.zeros((n, n), int)]])
        s = self.table.astype(int)
        return bool(np.array_equal((s @ om @ s.T) % 2, om))

    def key(self) -> bytes:
        return self.table.tobytes() + self.phase.tobytes()

    def row(self, r: int) -> PauliWeyl:
        n = self.n
        return PauliWeyl(tuple(int(v) for v in self.table[r, :n]), tuple(int(v) for v in self.table[r, n:]),
                         -1 if self.phase[r] else 1)

    def stabilizers(self) -> list[PauliWeyl]:
        return [self.row(self.n + i) for i in range(self.n)]

    def destabilizers(self) -> list[PauliWeyl]:
        return [self.row(i) for i in range(self.n)]

    def stabilizer_state(self) -> np.ndarray:
        """``U|0...0>`` up to global phase."""
        if self.n > 12:
            raise BudgetError("stabilizer state vector refused above 12 qubits")
        return stabilizer_state_from_generators(self.stabilizers())

    def to_unitary(self) -> np.ndarray:
        if self.n > 6:
            raise BudgetError("dense Clifford unitary refused above 6 qubits")
        N = 2**self.n
        v0 = self.stabilizer_state()
        D = [r.dense() for r in self.destabilizers()]
        U = np.empty((N, N), dtype=complex)
        for x in range(N):
            v = v0
            bits = [(x >> (self.n - 1 - j)) & 1 for j in range(self.n)]
            for j in reversed(range(self.n)):
                if bits[j]:
                    v = D[j] @ v
            U[:, x] = v
        return U

    @classmethod
    def from_unitary(cls, U: np.ndarray) -> "CliffordTableau":
        N = U.shape[0]
        n = int(round(math.log2(N)))
        table = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        phase = np.zeros(2 * n, dtype=np.uint8)
        for r in range(2 * n):
            a = [0] * n
            b = [0] * n
            (a if r < n else b)[r % n] = 1
            img = U @ PauliWeyl(tuple(a), tuple(b)).dense() @ U.conj().T
            x, z, s = decompose_pauli(img)
            table[r, :n], table[r, n:], phase[r] = x, z, s
        return cls(n, table, phase)


def decompose_pauli(M: np.ndarray, tol: float = 1e-8):
    """Return ``(x, z, phase_bit)`` if ``M = ±P(x,z)`` for a Hermitian Pauli, else raise."""
    N = M.shape[0]
    n = int(round(math.log2(N)))
    # the support pattern of a Pauli fixes x: column 0 has its single entry at row x
    col = M[:, 0]
    idx = int(np.argmax(np.abs(col)))
    x = [(idx >> (n - 1 - j)) & 1 for j in range(n)]
    for z_int in range(N):
        z = [(z_int >> (n - 1 - j)) & 1 for j in range(n)]
        P = PauliWeyl(tuple(x), tuple(z)).dense()
        c = np.trace(P @ M) / N
        if abs(abs(c) - 1) < tol:
            if abs(c.imag) > tol:
                break
            return x, z, int(c.real < 0)
    raise ValueError("matrix is not a signed Hermitian Pauli")


def stabilizer_state_from_generators(gens: Sequence[PauliWeyl]) -> np.ndarray:
    """Joint +1 eigenvector of ``n`` independent commuting signed Paulis."""
    n = gens[0].n
    N = 2**n
    P = np.eye(N, dtype=complex)
    for g in gens:
        P = 0.5 * (P + g.dense() @ P)
    col = int(np.argmax(np.linalg.norm(P, axis=0)))
    v = P[:, col]
    nrm = np.linalg.norm(v)
    if nrm < 1e-6:
        raise ValueError("generators have no common +1 eigenvector")
    v = v / nrm
    k = int(np.argmax(np.abs(v) > 1e-9))
    return v * (abs(v[k]) / v[k])


def _sample_mallows(n: int, rng: np.random.Generator):
    had = np.zeros(n, dtype=bool)
    perm = np.zeros(n, dtype=int)
    inds = list(range(n))
    for i in range(n):
        m = n - i
        eps = 4.0 ** (-m)
        r = rng.uniform(0, 1)
        index = -int(np.ceil(np.log2(r + (1 - r) * eps)))
        had[i] = index < m
        k = index if index < m else 2 * m - index - 1
        perm[i] = inds[k]
        del inds[k]
    return had, perm


def _fill_tril(mat: np.ndarray, rng: np.random.Generator, symmetric: bool = False):
    rows, cols = np.tril_indices(mat.shape[0], -1)
    vals = rng.integers(2, size=rows.size)
    mat[rows, cols] = vals
    if symmetric:
        mat[cols, rows] = vals


def _inv_mod2_lower(m: np.ndarray) -> np.ndarray:
    """Inverse over GF(2) of a unit lower-triangular matrix by forward substitution."""
    n = m.shape[0]
    inv = np.eye(n, dtype=np.int64)
    for i in range(n):
        for j in range(i):
            if m[i, j]:
                inv[i] ^= inv[j]
    return inv % 2


def sample_clifford_tableau(n: int, rng: np.random.Generator) -> CliffordTableau:
    """Uniform Clifford (mod global phase) via the Bravyi-Maslov canonical form."""
    if n < 1:
        raise ValueError("n must be >= 1")
    had, perm = _sample_mallows(n, rng)
    gamma1 = np.diag(rng.integers(2, size=n)).astype(np.int64)
    gamma2 = np.diag(rng.integers(2, size=n)).astype(np.int64)
    delta1 = np.eye(n, dtype=np.int64)
    delta2 = np.eye(n, dtype=np.int64)
    _fill_tril(gamma1, rng, symmetric=True)
    _fill_tril(gamma2, rng, symmetric=True)
    _fill_tril(delta1, rng)
    _fill_tril(delta2, rng)
    zero = np.zeros((n, n), dtype=np.int64)
    table1 = np.block([[delta1, zero], [(gamma1 @ delta1) % 2, _inv_mod2_lower(delta1).T]])
    table2 = np.block([[delta2, zero], [(gamma2 @ delta2) % 2, _inv_mod2_lower(delta2).T]])
    table = table2[np.concatenate([perm, n + perm])]
    inds = np.flatnonzero(had)
    lhs = np.concatenate([inds, inds + n])
    rhs = np.concatenate([inds + n, inds])
    table[lhs, :] = table[rhs, :]
    full = (table1 @ table) % 2
    phase = rng.integers(2, size=2 * n)
    return CliffordTableau(n, full, phase)


def sample_clifford(n: int, rng: np.random.Generator, dense: bool = True):
    """Uniform Clifford: ``(tableau, unitary)``; the unitary is ``None`` when not requested."""
    tab = sample_clifford_tableau(n, rng)
    if not dense:
        return tab, None
    if n > 6:
        raise BudgetError("dense Clifford unitary refused above 6 qubits")
    return tab, tab.to_unitary()


def random_stabilizer_states(n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    return np.array([sample_clifford_tableau(n, rng).stabilizer_state() for _ in range(size)])


# ---------------------------------------------------------------- exhaustive groups

def _phase_key(U: np.ndarray) -> bytes:
    flat = U.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-9))
    V = flat * (abs(flat[k]) / flat[k])
    V = np.round(V, 7) + (0.0 + 0.0j)  # normalizes -0.0
    return V.tobytes()


def _clifford_generators(n: int) -> list[np.ndarray]:
    S = np.diag([1, 1j])
    gens = []
    for q in range(n):
        for g in (qmath.H, S):
            ops = [qmath.I2] * n
            ops[q] = g
            gens.append(qmath.tensor(*ops))
    for q in range(n - 1):
        cz = np.ones(2**n, dtype=complex)
        for x in range(2**n):
            if (x >> (n - 1 - q)) & 1 and (x >> (n - 2 - q)) & 1:
                cz[x] = -1
        gens.append(np.diag(cz))
    return gens


def clifford_group(n: int) -> list[np.ndarray]:
    """All Clifford unitaries on ``n <= 2`` qubits modulo global phase (24 / 11520)."""
    return list(_clifford_group_array(n))


@functools.lru_cache(maxsize=None)
def _clifford_group_array(n: int) -> np.ndarray:
    if n > 2:
        raise BudgetError("exhaustive Clifford enumeration refused above 2 qubits")
    gens = _clifford_generators(n)
    I = np.eye(2**n, dtype=complex)
    seen = {_phase_key(I): I}
    frontier = [I]
    while frontier:
        nxt = []
        for U in frontier:
            for g in gens:
                V = g @ U
                k = _phase_key(V)
                if k not in seen:
                    seen[k] = V
                    nxt.append(V)
        frontier = nxt
    out = np.array(list(seen.values()))
    out.setflags(write=False)
    return out


def stabilizer_states(n: int) -> np.ndarray:
    """All ``n``-qubit stabilizer states modulo phase (6, 60, 1080 for n = 1, 2, 3)."""
    if n > 3:
        raise BudgetError("exhaustive stabilizer enumeration refused above 3 qubits")
    gens = _clifford_generators(n)
    v0 = np.zeros(2**n, dtype=complex)
    v0[0] = 1
    seen = {_phase_key(v0): v0}
    frontier = [v0]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = g @ v
                k = _phase_key(w)
                if k not in seen:
                    seen[k] = w
                    nxt.append(w)
        frontier = nxt
    return np.array(list(seen.values()))


# ---------------------------------------------------------------- brickwork

def apply_two_qubit(psi: np.ndarray, gate: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a 4x4 gate on qubits (q, q+1) to the leading axis of ``psi`` (shape ``(2^n, ...)``)."""
    rest = psi.shape[1:]
    t = psi.reshape((2**q, 4, 2 ** (n - q - 2)) + rest)
    t = np.einsum("ab,xby...->xay...", gate, t)
    return t.reshape(psi.shape)


def apply_one_qubit(psi: np.ndarray, gate: np.ndarray, q: int, n: int) -> np.ndarray:
    rest = psi.shape[1:]
    t = psi.reshape((2**q, 2, 2 ** (n - q - 1)) + rest)
    t = np.einsum("ab,xby...->xay...", gate, t)
    return t.reshape(psi.shape)


def brickwork_pairs(n: int, layer: int) -> list[int]:
    """Left qubit of each gate in layer ``layer`` (0-based): even layers start at 0, odd at 1."""
    start = layer % 2
    return list(range(start, n - 1, 2))


def _local_gate(gateset: str, rng: np.random.Generator) -> np.ndarray:
    if gateset == "Haar4":
        return sample_haar(4, rng)
    if gateset == "CliffordLocal":
        group = _clifford_group_array(2)  # exact uniform draw from the enumerated group
        return group[rng.integers(len(group))]
    raise ValueError(f"unknown gateset {gateset!r}")


def apply_brickwork(psi: np.ndarray, n: int, d: int, gateset: str, rng: np.random.Generator) -> np.ndarray:
    for layer in range(d):
        for q in brickwork_pairs(n, layer):
            psi = apply_two_qubit(psi, _local_gate(gateset, rng), q, n)
    return psi


def sample_brickwork(n: int, d: int, gateset: str, rng: np.random.Generator) -> np.ndarray:
    if n > 12:
        raise BudgetError("dense brickwork unitary refused above 12 qubits")
    if n < 2 and d > 0:
        raise ValueError("brickwork needs at least 2 qubits")
    return apply_brickwork(np.eye(2**n, dtype=complex), n, d, gateset, rng)


# ---------------------------------------------------------------- ensembles

@dataclass
class UnitaryEnsemble:
    """Describe-only ensemble; sampling takes an explicit generator.

    kind: ``Haar`` (param N), ``CliffordUniform`` (n), ``Brickwork`` (n, d,
    gateset) or ``ExplicitSet`` (unitaries, weights).
    """

    kind: str
    N: int = 0
    n: int = 0
    d: int = 0
    gateset: str = "Haar4"
    unitaries: list = field(default_factory=list, repr=False)
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("Haar", "CliffordUniform", "Brickwork", "ExplicitSet"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "Haar":
            if self.N < 1:
                raise ValueError("Haar ensemble needs N >= 1")
        elif self.kind in ("CliffordUniform", "Brickwork"):
            if self.n < 1:
                raise ValueError("ensemble needs n >= 1")
            self.N = 2**self.n
        else:
            if not self.unitaries:
                raise ValueError("ExplicitSet needs at least one unitary")
            self.unitaries = [np.asarray(u, dtype=complex) for u in self.unitaries]
            self.N = self.unitaries[0].shape[0]
            w = np.full(len(self.unitaries), 1 / len(self.unitaries)) if self.weights is None else np.asarray(self.weights, float)
            if abs(w.sum() - 1) > 1e-12 or np.any(w < 0):
                raise ValueError("ExplicitSet weights must be nonnegative and sum to 1")
            self.weights = w

    @classmethod
    def haar(cls, N):
        return cls("Haar", N=N)

    @classmethod
    def clifford(cls, n):
        return cls("CliffordUniform", n=n)

    @classmethod
    def brickwork(cls, n, d, gateset="Haar4"):
        return cls("Brickwork", n=n, d=d, gateset=gateset)

    @classmethod
    def explicit(cls, unitaries, weights=None):
        return cls("ExplicitSet", unitaries=list(unitaries), weights=weights)

    @property
    def is_exact(self) -> bool:
        return self.kind == "ExplicitSet"

    def describe(self) -> dict:
        d = {"kind": self.kind, "N": self.N}
        if self.kind in ("CliffordUniform", "Brickwork"):
            d["n"] = self.n
        if self.kind == "Brickwork":
            d.update(depth=self.d, gateset=self.gateset)
        if self.kind == "ExplicitSet":
            d["size"] = len(self.unitaries)
        return d

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "Haar":
            return sample_haar(self.N, rng)
        if self.kind == "CliffordUniform":
            return sample_clifford(self.n, rng)[1]
        if self.kind == "Brickwork":
            return sample_brickwork(self.n, self.d, self.gateset, rng)
        return self.unitaries[rng.choice(len(self.unitaries), p=self.weights)]

    def sample_states(self, rng: np.random.Generator, size: int, input_state=None) -> np.ndarray:
        """Rows ``U|in>`` for ``size`` draws (default input ``|0>``), without building ``U`` when avoidable."""
        if input_state is None and self.kind == "Haar":
            return haar_states(self.N, rng, size)
        if input_state is None and self.kind == "CliffordUniform":
            return random_stabilizer_states(self.n, rng, size)
        v0 = np.zeros(self.N, dtype=complex)
        v0[0] = 1
        v = v0 if input_state is None else np.asarray(getattr(input_state, "amplitudes", input_state), complex)
        if self.kind == "Brickwork":
            out = np.empty((size, self.N), dtype=complex)
            for i in range(size):
                out[i] = apply_brickwork(v.copy(), self.n, self.d, self.gateset, rng)
            return out
        return np.array([self.sample(rng) @ v for _ in range(size)])

    def exact_states(self, input_state=None) -> tuple[np.ndarray, np.ndarray]:
        if not self.is_exact:
            raise ValueError("only ExplicitSet ensembles enumerate exactly")
        v0 = np.zeros(self.N, dtype=complex)
        v0[0] = 1
        v = v0 if input_state is None else np.asarray(getattr(input_state, "amplitudes", input_state), complex)
        return np.array([u @ v for u in self.unitaries]), self.weights


# ---------------------------------------------------------------- moments

@dataclass
class MomentEstimate:
    t: int
    operator: np.ndarray | None
    values: np.ndarray | None
    sample_count: int
    standard_error: float | np.ndarray


def haar_state_moment(N: int, t: int) -> np.ndarray:
    """``E[(|psi><psi|)^{(x)t}] = P_sym / binom(N+t-1, t)``."""
    return qmath.symmetric_projector(N, t).matrix / math.comb(N + t - 1, t)


def second_moment_channel(A: np.ndarray) -> np.ndarray:
    """Haar twirl ``E[(U x U) A (U x U)^dag]`` in closed form."""
    A = np.asarray(A, dtype=complex)
    N = int(round(math.isqrt(A.shape[0])))
    if N * N != A.shape[0] or A.shape[0] != A.shape[1]:
        raise DimensionError("second-moment channel needs a square N^2 x N^2 input")
    if N < 2:
        raise ValueError("N must be >= 2")
    F = qmath.flip_operator(N).matrix
    I = np.eye(N * N)
    Ps, Pa = (I + F) / 2, (I - F) / 2
    cs = 2 * np.trace(A @ Ps) / (N * (N + 1))
    ca = 2 * np.trace(A @ Pa) / (N * (N - 1))
    return cs * Ps + ca * Pa


def _power_outer(states: np.ndarray, t: int) -> np.ndarray:
    """Rows ``|psi>^{(x)t}`` for each state row."""
    out = states
    for _ in range(t - 1):
        out = np.einsum("si,sj->sij", out, states).reshape(states.shape[0], -1)
    return out


def empirical_moment(ensemble: UnitaryEnsemble, t: int, input_state=None, samples: int = 1000,
                     rng: np.random.Generator | None = None, functionals: Sequence | None = None) -> MomentEstimate:
    """Mean of ``rho(U)^{(x)t}``; the operator only when ``N^t`` fits the budget.

    ``functionals`` are observables on ``N^t`` dims (or ``TensorSumObservable``)
    whose expectations are returned with jackknife standard errors.
    ExplicitSet ensembles are averaged exactly with their weights.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    N = ensemble.N
    dense_ok = N**t <= 2**12
    if not dense_ok and not functionals:
        raise BudgetError(f"N^t = {N**t} exceeds 2^12; request functionals instead")
    if ensemble.is_exact:
        states, w = ensemble.exact_states(input_state)
        count = len(states)
    else:
        if samples < 2:
            raise ValueError("need at least 2 samples")
        rng = np.random.default_rng() if rng is None else rng
        states = ensemble.sample_states(rng, samples, input_state)
        w = np.full(samples, 1 / samples)
        count = samples
    op = None
    if dense_ok:
        op = np.zeros((N**t, N**t), dtype=complex)
        for start in range(0, len(states), 256):
            blk = _power_outer(states[start:start + 256], t)
            op += (blk.T * w[start:start + 256]) @ blk.conj()
    vals = None
    se: float | np.ndarray = 0.0
    if functionals:
        per = np.array([[tensor_power_expectation(s, O, t) for O in functionals] for s in states])
        vals = w @ per
        if not ensemble.is_exact:
            se = per.std(axis=0, ddof=1) / math.sqrt(count)
        else:
            se = np.zeros(len(functionals))
    elif not ensemble.is_exact and op is not None:
        se = float(np.sqrt(1.0 / count))  # crude entrywise bound: entries lie in the unit disk
    return MomentEstimate(t, op, vals, count, se)


def tensor_power_expectation(psi: np.ndarray, O, k: int) -> float:
    """``<psi|^{(x)k} O |psi>^{(x)k}`` without forming ``rho^{(x)k}``."""
    if isinstance(O, qmath.TensorSumObservable):
        if O.copies != k:
            raise DimensionError("observable copy count does not match k")
        return O.product_expectation(lambda a: float(np.real(np.vdot(psi, a.apply(psi)))))
    O = qmath.as_observable(O)
    v = _power_outer(psi[None, :], k)[0]
    return float(np.real(np.vdot(v, O.apply(v))))


def design_deviation(ensemble: UnitaryEnsemble, t: int, samples: int = 1000,
                     rng: np.random.Generator | None = None, bootstrap: int = 20) -> tuple[float, float]:
    """Trace-norm distance of the empirical state moment from the Haar moment, with a bootstrap error bar."""
    N = ensemble.N
    if N**t > 2**12:
        raise BudgetError("design deviation needs the dense moment operator")
    K = haar_state_moment(N, t)
    if ensemble.is_exact:
        est = empirical_moment(ensemble, t)
        return qmath.trace_norm(est.operator - K), 0.0
    rng = np.random.default_rng() if rng is None else rng
    states = ensemble.sample_states(rng, samples)
    blk = _power_outer(states, t)
    op = blk.T @ blk.conj() / samples
    dev = qmath.trace_norm(op - K)
    boots = []
    for _ in range(bootstrap):
        idx = rng.integers(samples, size=samples)
        b = blk[idx]
        boots.append(qmath.trace_norm(b.T @ b.conj() / samples - K))
    return float(dev), float(np.std(boots, ddof=1)) if bootstrap > 1 else 0.0
