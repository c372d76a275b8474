"""Dense linear algebra and quantum-information primitives at desk scale.

Everything here works on plain ``numpy`` arrays. The thin wrapper classes
(:class:`PureState`, :class:`DensityMatrix`, :class:`Observable`, ...) only add
validation on construction and are treated as immutable afterwards.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass
class NumericPolicy:
    herm_tol: float = 1e-10
    trace_tol: float = 1e-10
    norm_tol: float = 1e-10
    psd_tol: float = 1e-9
    op_norm_slack: float = 1e-9
    # largest dimension we are willing to materialize as a dense matrix
    dense_dim_budget: int = 2**13


POLICY = NumericPolicy()


class DimensionError(ValueError):
    pass


class BudgetError(ValueError):
    """Raised when a dense object would exceed the configured memory budget."""


I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of matrices (or vectors)."""
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op))
    return out


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def is_hermitian(a: np.ndarray, tol: float | None = None) -> bool:
    tol = POLICY.herm_tol if tol is None else tol
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=tol, rtol=0)


def is_unitary(u: np.ndarray, tol: float = 1e-9) -> bool:
    return np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0)


def op_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    a = np.asarray(a)
    if a.ndim == 1:
        return float(np.max(np.abs(a)))
    if is_hermitian(a, 1e-12):
        return float(np.max(np.abs(np.linalg.eigvalsh(a))))
    return float(np.linalg.norm(a, 2))


def digest(a) -> str:
    """Short content hash used to tag oracle queries in transcripts."""
    arr = np.ascontiguousarray(np.asarray(a))
    h = hashlib.sha256()
    h.update(str(arr.shape).encode())
    h.update(str(arr.dtype).encode())
    h.update(arr.tobytes())
    return h.hexdigest()[:16]


class PureState:
    """Normalized state vector."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, normalize: bool = False):
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if normalize:
            if nrm == 0:
                raise ValueError("cannot normalize the zero vector")
            v = v / nrm
        elif abs(nrm - 1.0) > POLICY.norm_tol:
            raise ValueError(f"state vector has norm {nrm}, expected 1")
        v.setflags(write=False)
        self.amplitudes = v

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), check=False)

    def tensor_power(self, k: int) -> "PureState":
        if self.dim**k > 2**24:
            raise BudgetError(f"{self.dim}^{k} amplitudes exceed the statevector budget")
        v = self.amplitudes
        for _ in range(k - 1):
            v = np.kron(v, self.amplitudes)
        return PureState(v, normalize=True)

    def __repr__(self):
        return f"PureState(dim={self.dim})"


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, check: bool = True):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        if check:
            if not is_hermitian(m):
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(m).real
            if abs(tr - 1.0) > POLICY.trace_tol:
                raise ValueError(f"density matrix has trace {tr}")
            lam_min = np.linalg.eigvalsh(m).min()
            if lam_min < -POLICY.psd_tol:
                raise ValueError(f"density matrix has negative eigenvalue {lam_min}")
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def tensor_power(self, k: int) -> "DensityMatrix":
        if self.dim**k > POLICY.dense_dim_budget:
            raise BudgetError(f"{self.dim}^{k} exceeds dense budget {POLICY.dense_dim_budget}")
        m = self.matrix
        for _ in range(k - 1):
            m = np.kron(m, self.matrix)
        return DensityMatrix(m, check=False)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return state.density()
    arr = np.asarray(state)
    if arr.ndim == 1:
        return PureState(arr).density()
    return DensityMatrix(arr)


class Observable:
    """Hermitian operator, either dense or given by a matrix-vector product.

    Matrix-free observables must declare ``op_norm``; it is trusted and is
    what oracle validation checks against.
    """

    def __init__(
        self,
        matrix=None,
        *,
        matvec: Callable[[np.ndarray], np.ndarray] | None = None,
        dim: int | None = None,
        op_norm: float | None = None,
        tag: str = "",
        key: str | None = None,
        check: bool = True,
    ):
        if matrix is None and matvec is None:
            raise ValueError("need a dense matrix or a matvec")
        if matrix is not None:
            m = np.asarray(matrix, dtype=complex)
            if check and not is_hermitian(m):
                raise ValueError("observable is not Hermitian")
            m.setflags(write=False)
            self.matrix = m
            self.dim = m.shape[0]
        else:
            if dim is None or op_norm is None:
                raise ValueError("matrix-free observables need dim and op_norm")
            self.matrix = None
            self.dim = int(dim)
        self._matvec = matvec
        self._op_norm = op_norm
        self.tag = tag
        self._key = key

    @property
    def op_norm(self) -> float:
        if self._op_norm is None:
            self._op_norm = op_norm(self.matrix)
        return self._op_norm

    @property
    def key(self) -> str:
        if self._key is None:
            self._key = digest(self.matrix) if self.matrix is not None else f"{self.tag}:{id(self)}"
        return self._key

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix @ v
        return self._matvec(v)

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        if self.dim > POLICY.dense_dim_budget:
            raise BudgetError(f"cannot densify observable of dim {self.dim}")
        return np.column_stack([self._matvec(e) for e in np.eye(self.dim, dtype=complex)])

    def __repr__(self):
        return f"Observable(dim={self.dim}, tag={self.tag!r})"


def as_observable(o) -> Observable:
    return o if isinstance(o, (Observable, TensorSumObservable)) else Observable(o)


@dataclass
class TensorSumObservable:
    """``sum_m c_m A_{m,1} x ... x A_{m,k}`` kept in factored form.

    Expectations on product states ``rho^{(x)k}`` factorize, which is how
    k-copy functionals are evaluated at dimensions where ``N^k`` is far too
    large to materialize.
    """

    terms: list  # list of (coefficient, [Observable, ...])
    tag: str = ""

    def __post_init__(self):
        ks = {len(f) for _, f in self.terms}
        if len(ks) != 1:
            raise DimensionError("all terms need the same number of factors")
        self.copies = ks.pop()
        dims = {a.dim for _, f in self.terms for a in f}
        if len(dims) != 1:
            raise DimensionError("all factors must share one local dimension")
        self.local_dim = dims.pop()

    @property
    def dim(self) -> int:
        return self.local_dim**self.copies

    @property
    def op_norm(self) -> float:
        """Triangle-inequality bound; exact for a single term."""
        return float(sum(abs(c) * math.prod(a.op_norm for a in f) for c, f in self.terms))

    @property
    def key(self) -> str:
        h = hashlib.sha256()
        for c, f in self.terms:
            h.update(repr(complex(c)).encode())
            for a in f:
                h.update(a.key.encode())
        return h.hexdigest()[:16]

    def product_expectation(self, single_copy: Callable[[Observable], float]) -> float:
        cache: dict[int, float] = {}
        total = 0.0
        for c, f in self.terms:
            p = c
            for a in f:
                if id(a) not in cache:
                    cache[id(a)] = single_copy(a)
                p = p * cache[id(a)]
            total += p
        return float(np.real(total))

    def dense(self) -> np.ndarray:
        if self.dim > POLICY.dense_dim_budget:
            raise BudgetError(f"cannot densify {self.dim}-dim tensor-sum observable")
        return sum(c * tensor(*[a.dense() for a in f]) for c, f in self.terms)


def expectation(state, obs) -> float:
    """``tr[rho O]`` for a density matrix or ``<psi|O|psi>`` for a pure state."""
    if isinstance(obs, TensorSumObservable):
        return obs.product_expectation(lambda a: expectation(state, a))
    obs = as_observable(obs)
    if isinstance(state, PureState):
        if state.dim != obs.dim:
            raise DimensionError(f"state dim {state.dim} != observable dim {obs.dim}")
        v = state.amplitudes
        return float(np.real(np.vdot(v, obs.apply(v))))
    rho = as_density(state)
    if rho.dim != obs.dim:
        raise DimensionError(f"state dim {rho.dim} != observable dim {obs.dim}")
    if obs.matrix is not None:
        val = np.einsum("ij,ji->", rho.matrix, obs.matrix)
    else:
        val = np.trace(rho.matrix @ obs.dense())
    if abs(val.imag) > 1e-9:
        raise ValueError(f"expectation has imaginary part {val.imag}")
    return float(val.real)


def _check_same_dim(rho: DensityMatrix, sigma: DensityMatrix):
    if rho.dim != sigma.dim:
        raise DimensionError(f"dimension mismatch {rho.dim} vs {sigma.dim}")


def trace_norm(a: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def trace_distance(rho, sigma) -> float:
    rho, sigma = as_density(rho), as_density(sigma)
    _check_same_dim(rho, sigma)
    return min(1.0, 0.5 * trace_norm(rho.matrix - sigma.matrix))


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Squared Uhlmann fidelity ``(tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2``."""
    if isinstance(rho, PureState) and isinstance(sigma, PureState):
        _check_same_dim(rho, sigma)
        return float(min(1.0, abs(np.vdot(rho.amplitudes, sigma.amplitudes)) ** 2))
    rho, sigma = as_density(rho), as_density(sigma)
    _check_same_dim(rho, sigma)
    s = _psd_sqrt(sigma.matrix)
    inner = s @ rho.matrix @ s
    inner = 0.5 * (inner + inner.conj().T)
    w = np.clip(np.linalg.eigvalsh(inner), 0, None)
    return float(min(1.0, np.sum(np.sqrt(w)) ** 2))


def partial_trace(rho, keep: Sequence[int], local_dims: Sequence[int]) -> DensityMatrix:
    rho = as_density(rho)
    local_dims = list(local_dims)
    if math.prod(local_dims) != rho.dim:
        raise DimensionError(f"local dims {local_dims} do not multiply to {rho.dim}")
    keep = sorted(set(keep))
    if any(k < 0 or k >= len(local_dims) for k in keep):
        raise ValueError(f"bad subsystem indices {keep}")
    n = len(local_dims)
    t = rho.matrix.reshape(local_dims + local_dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    res = np.einsum(t, row + col, out)
    d = math.prod(local_dims[i] for i in keep) if keep else 1
    return DensityMatrix(res.reshape(d, d), check=False)


def permutation_operator(N: int, perm: Sequence[int]) -> np.ndarray:
    """Operator sending ``|i_1,...,i_t>`` to the tensor factors reordered by ``perm``."""
    t = len(perm)
    if N**t > POLICY.dense_dim_budget:
        raise BudgetError(f"{N}^{t} exceeds dense budget")
    idx = np.arange(N**t).reshape([N] * t).transpose(perm).reshape(-1)
    P = np.zeros((N**t, N**t))
    P[np.arange(N**t), idx] = 1.0
    return P


def flip_operator(N: int) -> Observable:
    if N < 2:
        raise ValueError("flip needs N >= 2")
    return Observable(permutation_operator(N, (1, 0)).astype(complex), tag=f"flip[{N}]", check=False)


def symmetric_projector(N: int, t: int) -> Observable:
    if t < 1:
        raise ValueError("t must be >= 1")
    if N**t > POLICY.dense_dim_budget:
        raise BudgetError(f"{N}^{t} exceeds dense budget {POLICY.dense_dim_budget}")
    P = np.zeros((N**t, N**t))
    perms = list(itertools.permutations(range(t)))
    for p in perms:
        P += permutation_operator(N, p)
    P /= len(perms)
    return Observable(P.astype(complex), tag=f"Psym[{N},{t}]", op_norm=1.0, check=False)


@dataclass(frozen=True)
class PauliWeyl:
    """Signed Weyl operator ``sign * i^{a.b} X^{a_1}Z^{b_1} x ... x X^{a_n}Z^{b_n}``."""

    a: tuple
    b: tuple
    sign: int = 1

    def __post_init__(self):
        if len(self.a) != len(self.b):
            raise ValueError("a and b must have equal length")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.a)

    @classmethod
    def from_label(cls, label: str, sign: int = 1) -> "PauliWeyl":
        a = tuple(int(c in "XY") for c in label)
        b = tuple(int(c in "ZY") for c in label)
        return cls(a, b, sign)

    @property
    def label(self) -> str:
        return "".join("IZXY"[x * 2 + z] for x, z in zip(self.a, self.b))

    def dense(self) -> np.ndarray:
        return self.sign * tensor(*[PAULIS[c] for c in self.label]) if self.n else np.eye(1) * self.sign


def weyl_operator(a, b, sign: int = 1) -> Observable:
    w = PauliWeyl(tuple(int(x) for x in a), tuple(int(x) for x in b), sign)
    return Observable(w.dense(), tag=("-" if sign < 0 else "") + w.label, op_norm=1.0, check=False)


def all_weyl_labels(n: int):
    for bits in itertools.product((0, 1), repeat=2 * n):
        yield bits[:n], bits[n:]


def weyl_expectations(psi: PureState) -> np.ndarray:
    """``<psi|W_x|psi>`` for all ``4^n`` Weyl labels, ordered as :func:`all_weyl_labels`."""
    n = int(round(math.log2(psi.dim)))
    if 2**n != psi.dim:
        raise DimensionError("state dimension is not a power of two")
    if n > 7:
        raise BudgetError("4^n enumeration refused above n = 7")
    v = psi.amplitudes
    out = np.empty(4**n)
    for i, (a, b) in enumerate(all_weyl_labels(n)):
        w = PauliWeyl(a, b).dense()
        out[i] = np.real(np.vdot(v, w @ v))
    return out


@dataclass
class MajoranaSet:
    l: int
    operators: list = field(repr=False)

    @property
    def dim(self) -> int:
        return 2**self.l


def majorana_operators(l: int) -> MajoranaSet:
    """Jordan-Wigner Majoranas: ``m_{2i-1} = Z..Z X I..I``, ``m_{2i} = Z..Z Y I..I``."""
    if l < 1:
        raise ValueError("need at least one mode")
    if l > 7:
        raise BudgetError("dense Majorana operators refused above 7 modes")
    ops = []
    for i in range(l):
        pre = [Z] * i
        post = [I2] * (l - i - 1)
        ops.append(tensor(*pre, X, *post) if (pre or post) else X.copy())
        ops.append(tensor(*pre, Y, *post) if (pre or post) else Y.copy())
    return MajoranaSet(l, ops)


def covariance_of_state(rho, mset: MajoranaSet) -> np.ndarray:
    """``M_ij = (i/2) tr[rho [m_i, m_j]]`` (real antisymmetric ``2l x 2l``)."""
    rho = as_density(rho)
    if rho.dim != mset.dim:
        raise DimensionError(f"state dim {rho.dim} != 2^{mset.l}")
    m = mset.operators
    k = len(m)
    M = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            comm = m[i] @ m[j] - m[j] @ m[i]
            val = 0.5j * np.einsum("ab,ba->", rho.matrix, comm)
            M[i, j] = val.real
            M[j, i] = -val.real
    return M


def ket(bits) -> PureState:
    bits = [int(b) for b in bits]
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int("".join(map(str, bits)), 2) if bits else 0] = 1.0
    return PureState(v)


def random_hermitian(N: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """GUE-like Hermitian matrix rescaled to the given operator norm."""
    g = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    h = 0.5 * (g + g.conj().T)
    return h * (norm / op_norm(h))


def random_density(N: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    rank = N if rank is None else rank
    g = rng.normal(size=(N, rank)) + 1j * rng.normal(size=(N, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, check=False)
