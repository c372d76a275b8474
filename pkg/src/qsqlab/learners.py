"""Learning algorithms run against evaluation oracles."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
import scipy.linalg

from . import qmath
from .ensembles import stabilizer_states
from .mirror import MDState, NegEntropy, VonNeumann, md_update
from .oracles import EvalOracle, make_loss_oracle
from .qmath import Observable, PauliWeyl


class LearnerError(RuntimeError):
    pass


class AmbiguousResponse(LearnerError):
    """An oracle answer fits none of the values a valid input can produce."""


class InconsistentOracle(LearnerError):
    pass


class NonGaussianInput(LearnerError):
    pass


@dataclass
class LearnerResult:
    output: Any
    queries_used: int
    success: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = self.output
        if isinstance(out, np.ndarray):
            out = out.tolist() if not np.iscomplexobj(out) else {"re": out.real.tolist(), "im": out.imag.tolist()}
        elif isinstance(out, PauliWeyl):
            out = out.label
        elif isinstance(out, qmath.DensityMatrix):
            out = {"density_dim": out.dim}
        return {"output": out, "queries_used": self.queries_used, "success": self.success,
                "diagnostics": self.diagnostics}


# ---------------------------------------------------------------- multiplicative weights

def update_budget(r: float, zeta: float, tau: float) -> int:
    """``T = ceil(18 r / (zeta tau^2))``."""
    return math.ceil(18 * r / (zeta * tau**2))


def _check_oracle_tolerance(oracle: EvalOracle, tau: float):
    if oracle.tau > tau / 3 + 1e-15:
        raise ValueError(f"oracle tolerance {oracle.tau} exceeds tau/3 = {tau / 3}")


def _md_learner(oracle, pool, tau, mirror, f0, value_of, r, check_step=None):
    _check_oracle_tolerance(oracle, tau)
    eta = tau * mirror.zeta / 3
    T = update_budget(r, mirror.zeta, tau)
    start = oracle.query_count
    answers: dict[int, float] = {}
    st = MDState(f0, eta, 0, r)
    gaps, steps = [], []
    while True:
        found = None
        for i, q in enumerate(pool):
            if i not in answers:
                answers[i] = float(oracle.query(q))
            fv = value_of(st.iterate, q)
            if abs(answers[i] - fv) > 2 * tau / 3:
                found = (i, fv)
                break
        if found is None:
            success = True
            break
        if st.t >= T:
            success = False
            break
        i, fv = found
        q = pool[i]
        g = _as_dual(q)
        # step away from the side the hypothesis overshoots on
        h = g if fv > answers[i] else -g
        gaps.append(abs(answers[i] - fv))
        steps.append(i)
        st = md_update(st, h, mirror)
        if check_step is not None:
            check_step(st.iterate)
    diag = {"updates": st.t, "update_budget": T, "eta": eta, "radius": r, "zeta": mirror.zeta,
            "gaps": gaps, "query_indices": steps, "certified": success}
    if not success:
        diag["failure"] = "update budget exhausted before a certificate was found"
    return st.iterate, oracle.query_count - start, success, diag


def _as_dual(q):
    if isinstance(q, Observable):
        return q.dense()
    return np.asarray(q)


def mw_distribution_learner(oracle: EvalOracle, pool: Sequence, tau: float, N: int | None = None,
                            r: float | None = None) -> LearnerResult:
    """Multiplicative weights on the simplex against a ``tau/3``-accurate Stat oracle.

    ``pool`` holds bounded functions ``[N] -> [-1, 1]``; each is asked at most
    once.  Stops when no pool query separates the hypothesis from the answers
    by more than ``2 tau/3`` (then every pool query is within ``tau`` of the
    truth).  ``r`` defaults to ``ln N``, the largest KL divergence from uniform.
    """
    if N is None:
        if not pool:
            raise ValueError("N is required with an empty pool")
        N = len(pool[0])
    r = math.log(N) if r is None else r
    mirror = NegEntropy()
    pool = [np.asarray(p, float) for p in pool]
    f, q, ok, diag = _md_learner(oracle, pool, tau, mirror, mirror.initial(N), lambda f, p: float(f @ p), r)
    return LearnerResult(f, q, ok, diag)


def mmw_state_learner(oracle: EvalOracle, N: int, pool: Sequence, tau: float, r: float | None = None) -> LearnerResult:
    """Matrix multiplicative weights (von Neumann map, base-2 entropy) against QStat.

    ``r`` defaults to ``log2 N``, the largest relative entropy (in bits) from
    the maximally mixed state.
    """
    r = math.log2(N) if r is None else r
    mirror = VonNeumann()
    pool = [qmath.as_observable(O) for O in pool]
    for O in pool:
        if O.op_norm > 1 + 1e-9:
            raise ValueError("pool observables need operator norm <= 1")
    trace_err, min_eig = [], []

    def check(X):
        trace_err.append(abs(np.trace(X).real - 1))
        min_eig.append(float(np.linalg.eigvalsh(X).min()))

    X, q, ok, diag = _md_learner(oracle, pool, tau, mirror, mirror.initial(N),
                                 lambda X, O: float(np.real(np.einsum("ij,ji->", X, O.dense()))), r, check)
    diag["max_trace_error"] = max(trace_err, default=0.0)
    diag["min_eigenvalue"] = min(min_eig, default=1.0 / N)
    return LearnerResult(qmath.DensityMatrix(0.5 * (X + X.conj().T)), q, ok, diag)


# ---------------------------------------------------------------- parities

def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Apply ``H^{(x)m}`` to a length-``2^m`` vector in ``O(m 2^m)``."""
    v = np.asarray(v, dtype=complex).copy()
    n = v.size
    m = n.bit_length() - 1
    if 1 << m != n:
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        v = v.reshape(-1, 2, h)
        a, b = v[:, 0, :].copy(), v[:, 1, :].copy()
        v[:, 0, :], v[:, 1, :] = a + b, a - b
        v = v.reshape(n)
        h *= 2
    return v / math.sqrt(n)


def parity_qpac_state(s: Sequence[int]) -> qmath.PureState:
    """``2^{-n/2} sum_x |x, s.x mod 2>`` with the label as the last qubit."""
    s = np.asarray(s, dtype=int)
    n = s.size
    xs = np.arange(2**n)
    bits = (xs[:, None] >> (n - 1 - np.arange(n))) & 1
    labels = (bits @ s) % 2
    v = np.zeros(2 ** (n + 1), dtype=complex)
    v[2 * xs + labels] = 2 ** (-n / 2)
    return qmath.PureState(v)


def parity_bit_observable(n: int, i: int) -> Observable:
    """``H^{(x)(n+1)} Pi_i H^{(x)(n+1)}`` with ``Pi_i`` projecting on ``x_i = 1`` and label 1.

    Its expectation on the qPAC state of the parity ``s`` is ``s_i / 2``.
    """
    if not 0 <= i < n:
        raise ValueError("bit index out of range")
    idx = np.arange(2 ** (n + 1))
    mask = ((idx & 1) == 1) & (((idx >> 1) >> (n - 1 - i)) & 1 == 1)

    def matvec(v):
        return walsh_hadamard(mask * walsh_hadamard(v))

    return Observable(matvec=matvec, dim=2 ** (n + 1), op_norm=1.0, tag=f"parity_bit[{i}]", key=f"parity_bit:{n}:{i}")


def parity_learner(oracle: EvalOracle, n: int) -> LearnerResult:
    """Recover ``s`` from ``n`` QStat queries on the uniform qPAC state (needs ``tau < 1/4``)."""
    if oracle.tau >= 0.25:
        raise ValueError("parity learning needs tau < 1/4")
    start = oracle.query_count
    s = np.zeros(n, dtype=int)
    vals = []
    for i in range(n):
        v = float(oracle.query(parity_bit_observable(n, i)))
        vals.append(v)
        if abs(v) > oracle.tau + 1e-12 and abs(v - 0.5) > oracle.tau + 1e-12:
            raise AmbiguousResponse(f"response {v} is within tau of neither 0 nor 1/2")
        s[i] = int(v > 0.25)
    return LearnerResult(s, oracle.query_count - start, True, {"responses": vals})


# ---------------------------------------------------------------- fermionic Gaussian states

def random_gaussian_state(l: int, rng: np.random.Generator) -> qmath.PureState:
    """``exp(-i H)|0...0>`` with ``H = (i/4) sum A_ij m_i m_j`` for random real antisymmetric ``A``."""
    ms = qmath.majorana_operators(l).operators
    A = rng.normal(size=(2 * l, 2 * l))
    A = A - A.T
    Hm = sum(0.25j * A[i, j] * ms[i] @ ms[j] for i in range(2 * l) for j in range(2 * l) if i != j)
    v0 = np.zeros(2**l, dtype=complex)
    v0[0] = 1
    return qmath.PureState(scipy.linalg.expm(-1j * Hm) @ v0, normalize=True)


def majorana_pair_observables(l: int) -> list[tuple[int, int, Observable]]:
    """``i m_i m_j`` for ``i < j`` (Hermitian, unit operator norm); expectation equals ``M_ij``."""
    ms = qmath.majorana_operators(l).operators
    out = []
    for i in range(2 * l):
        for j in range(i + 1, 2 * l):
            out.append((i, j, Observable(1j * ms[i] @ ms[j], op_norm=1.0, tag=f"iM[{i},{j}]", check=False)))
    return out


def _round_covariance(Mp: np.ndarray, l: int, tol: float):
    T, Q = scipy.linalg.schur(Mp, output="real")
    lam = []
    k = 0
    while k < 2 * l:
        if k + 1 < 2 * l and abs(T[k + 1, k]) > 1e-12:
            lam.append(T[k, k + 1])
            k += 2
        else:
            raise NonGaussianInput("covariance estimate has a vanishing normal-form block")
    lam = np.array(lam)
    order = np.argsort(-np.abs(lam), kind="stable")
    bad = np.abs(np.abs(lam) - 1) > tol
    if np.any(bad):
        raise NonGaussianInput(f"normal-form values {lam[bad]} are farther than {tol:.3g} from +-1")
    That = np.zeros_like(T)
    for b, x in enumerate(lam):
        s = 1.0 if x >= 0 else -1.0
        That[2 * b, 2 * b + 1], That[2 * b + 1, 2 * b] = s, -s
    return Q @ That @ Q.T, lam[order]


def state_from_covariance(M: np.ndarray, l: int) -> qmath.PureState:
    """Pure Gaussian state with covariance ``M``: top eigenvector of ``sum_{i<j} M_ij i m_i m_j``."""
    G = np.zeros((2**l, 2**l), dtype=complex)
    for i, j, O in majorana_pair_observables(l):
        G += M[i, j] * O.matrix
    w, v = np.linalg.eigh(G)
    return qmath.PureState(v[:, -1], normalize=True)


def gaussian_state_learner(oracle: EvalOracle, l: int) -> LearnerResult:
    """Learn a pure fermionic Gaussian state from its ``l(2l-1)`` covariance entries.

    The estimate is brought to real Schur form, each block value is rounded to
    ``+-1`` and the state is rebuilt from the rounded covariance.  Fidelity is
    at least ``1 - 2 l^2 tau``.
    """
    tau = oracle.tau
    start = oracle.query_count
    Mp = np.zeros((2 * l, 2 * l))
    for i, j, O in majorana_pair_observables(l):
        v = float(oracle.query(O))
        Mp[i, j], Mp[j, i] = v, -v
    Mhat, lam = _round_covariance(Mp, l, 2 * l * tau)
    rho_hat = state_from_covariance(Mhat, l)
    q = oracle.query_count - start
    return LearnerResult((Mhat, rho_hat), q, True, {"lambda_raw": lam.tolist(), "pair_queries": q,
                                                    "fidelity_guarantee": 1 - 2 * l**2 * tau})


# ---------------------------------------------------------------- ZX strings

def zx_pauli(x: Sequence[int]) -> PauliWeyl:
    """``Z`` where ``x_i = 0`` and ``X`` where ``x_i = 1``."""
    return PauliWeyl.from_label("".join("X" if b else "Z" for b in x))


def _gen(n: int, ops: dict) -> PauliWeyl:
    return PauliWeyl.from_label("".join(ops.get(k, "I") for k in range(n)))


def zx_generators(n: int, which: str = "S", i: int | None = None) -> list[PauliWeyl]:
    """Stabilizer generators of the query states ``S``, ``S_i^e`` and ``S_i^o`` (``i`` 0-based)."""
    if n == 1:
        # a single qubit is decided by the first query; both branches reuse |0>
        return [PauliWeyl.from_label("Z")]
    pairs = {j: {j: "Y", j + 1: "Y"} for j in range(n - 1)}
    first = {k: "Z" for k in range(n)}
    if which in ("e", "o"):
        if i > 0:
            pairs[i - 1] = {i - 1: "Y", i: "X"}
        if i < n - 1:
            pairs[i] = {i: "X", i + 1: "Y"}
        if which == "o":
            j = i + 1 if i < n - 1 else i - 1
            first = dict(first)
            first[j] = "X"
    return [_gen(n, first)] + [_gen(n, pairs[j]) for j in range(n - 1)]


@functools.lru_cache(maxsize=16)
def zx_query_states(n: int) -> dict:
    """Dense stabilizer states for every query label ``("S",)``, ``("e", i)``, ``("o", i)``."""
    from .ensembles import stabilizer_state_from_generators
    if n > 10:
        raise qmath.BudgetError("dense ZX query states refused above 10 qubits")
    out = {("S",): stabilizer_state_from_generators(zx_generators(n))}
    for i in range(n):
        for a in ("e", "o"):
            out[(a, i)] = stabilizer_state_from_generators(zx_generators(n, a, i))
    return out


def make_zx_loss_oracle(x: Sequence[int], tau: float, policy=None, expose_truth: bool = False) -> EvalOracle:
    """Loss oracle ``l^P(psi) = (<P>_psi + 1)/2`` on the stabilizer query states."""
    n = len(x)
    states = zx_query_states(n)
    P = zx_pauli(x).dense()

    def loss(label):
        v = states[tuple(label)]
        return 0.5 * (float(np.real(np.vdot(v, P @ v))) + 1.0)

    return make_loss_oracle(loss, tau, policy, domain=lambda lab: tuple(lab) in states, expose_truth=expose_truth)


def _decode_abs(v: float) -> int:
    """1 if the response means ``|<P>| = 1``, 0 if it means ``<P> = 0``."""
    if v <= 0.2 or v >= 0.8:
        return 1
    if 0.3 <= v <= 0.7:
        return 0
    raise AmbiguousResponse(f"response {v} lies in a forbidden band")


def zx_string_learner(oracle: EvalOracle, n: int) -> LearnerResult:
    """Learn ``P in {Z, X}^n`` from ``n + 1`` loss queries (tolerance at most 1/5)."""
    if oracle.tau > 0.2 + 1e-12:
        raise ValueError("ZX learning needs tau <= 1/5")
    start = oracle.query_count
    v0 = float(oracle.query(("S",)))
    branch = "e" if _decode_abs(v0) == 1 else "o"
    x = []
    vals = [v0]
    for i in range(n):
        v = float(oracle.query((branch, i)))
        vals.append(v)
        x.append(0 if _decode_abs(v) == 1 else 1)
    return LearnerResult(zx_pauli(x), oracle.query_count - start, True,
                         {"branch": branch, "responses": vals, "x": x})


# ---------------------------------------------------------------- testers

def purity_tester(oracle: EvalOracle, delta: float) -> LearnerResult:
    """Decide pure vs ``tr rho^2 <= 1 - delta`` from one 2-copy query of the flip operator."""
    if not oracle.tau < delta / 2:
        raise ValueError("purity testing needs tau < delta/2")
    N = int(round(math.isqrt(_oracle_dim(oracle))))
    start = oracle.query_count
    v = float(oracle.query(qmath.flip_operator(N)))
    verdict = "pure" if v > 1 - delta / 2 else "mixed"
    return LearnerResult(verdict, oracle.query_count - start, True, {"response": v, "threshold": 1 - delta / 2})


def pure_state_tester(oracle: EvalOracle, ref, eps: float) -> LearnerResult:
    """Decide ``rho = rho_ref`` vs trace distance ``>= eps`` by querying ``rho_ref`` itself."""
    if not oracle.tau < eps**2 / 2:
        raise ValueError("pure-state testing needs tau < eps^2/2")
    R = qmath.as_density(ref).matrix
    start = oracle.query_count
    v = float(oracle.query(Observable(R, op_norm=1.0, tag="reference", check=False)))
    verdict = "equal" if v > 1 - eps**2 / 2 else "far"
    return LearnerResult(verdict, oracle.query_count - start, True, {"response": v, "threshold": 1 - eps**2 / 2})


def _oracle_dim(oracle):
    d = getattr(oracle, "dim", None)
    if d is None:
        raise ValueError("oracle does not expose its dimension; pass N explicitly")
    return d


def bell_basis(n: int) -> np.ndarray:
    """Rows are ``<Phi_x|`` with ``|Phi_x> = (W_x (x) I) |Phi>``; labels ordered as ``(a, b)`` bits."""
    N = 2**n
    phi = np.eye(N).reshape(-1) / math.sqrt(N)
    rows = []
    for a, b in qmath.all_weyl_labels(n):
        W = PauliWeyl(a, b).dense()
        rows.append(np.kron(W, np.eye(N)) @ phi)
    return np.array(rows).conj()


def stabilizer_test_observable(n: int) -> Observable:
    """Accept projector of the six-copy Bell-difference-sampling test.

    Copies (1,2) and (3,4) are measured in the Bell basis with outcomes
    ``x, y``; the remaining pair measures ``W_{x+y} (x) W_{x+y}`` and accepts on
    ``+1``.  The observable is matrix-free; ``n <= 2``.
    """
    if n > 2:
        raise qmath.BudgetError("stabilizer test observable refused above 2 qubits")
    N = 2**n
    B = bell_basis(n)
    labels = list(qmath.all_weyl_labels(n))
    Ws = [PauliWeyl(a, b).dense() for a, b in labels]
    # x + y over F_2^{2n}: labels are enumerated as binary numbers of (a, b)
    WW = []
    for z in range(N * N):
        WW.append(0.5 * (np.eye(N * N) + np.kron(Ws[z], Ws[z])))
    WW = np.array(WW)
    xor = np.bitwise_xor.outer(np.arange(N * N), np.arange(N * N))
    D = N * N

    def matvec(v):
        t = v.reshape(D, D, D)
        t = np.einsum("xa,yb,abc->xyc", B, B, t)
        t = np.einsum("xycd,xyd->xyc", WW[xor], t)
        t = np.einsum("xa,yb,xyc->abc", B.conj(), B.conj(), t)
        return t.reshape(-1)

    return Observable(matvec=matvec, dim=N**6, op_norm=1.0, tag=f"stab_test[{n}]", key=f"stab_test:{n}")


def stabilizer_tester(oracle: EvalOracle, n: int, eps: float) -> LearnerResult:
    """One query of the six-copy accept projector; accept iff ``v > 1 - eps^2/8`` (needs ``tau < eps^2/8``)."""
    if not oracle.tau < eps**2 / 8:
        raise ValueError("stabilizer testing needs tau < eps^2/8")
    start = oracle.query_count
    v = float(oracle.query(stabilizer_test_observable(n)))
    verdict = "stabilizer" if v > 1 - eps**2 / 8 else "far"
    return LearnerResult(verdict, oracle.query_count - start, True, {"response": v, "threshold": 1 - eps**2 / 8})


def stabilizer_distance(psi: np.ndarray) -> float:
    """Trace distance from a pure state to the nearest stabilizer state (``n <= 3``)."""
    n = int(round(math.log2(len(psi))))
    F = np.max(np.abs(stabilizer_states(n).conj() @ psi) ** 2)
    return math.sqrt(max(0.0, 1 - F))


# ---------------------------------------------------------------- multi-copy tree reduction

@dataclass
class TreeNode:
    classes: list
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def partition_tree(classes: Sequence) -> TreeNode:
    """Balanced binary split (left half gets the extra element)."""
    classes = list(classes)
    if not classes:
        raise ValueError("need at least one solution class")
    node = TreeNode(classes)
    if len(classes) > 1:
        h = (len(classes) + 1) // 2
        node.left, node.right = partition_tree(classes[:h]), partition_tree(classes[h:])
    return node


def multicopy_tree_learner(oracle: EvalOracle, povm: Callable[[Any], np.ndarray], classes: Sequence,
                           delta: float | None = None) -> LearnerResult:
    """Descend a balanced tree over disjoint solution classes with aggregated POVM queries.

    ``povm(t)`` returns the POVM element of class ``t`` (on the ``k``-copy space).
    At each level the left child's aggregate ``sum_t Pi_t`` is queried and the
    descent goes left iff ``v > 1/2``.  With ``delta`` the answer must lie within
    ``delta + tau`` of 0 or 1, otherwise :class:`InconsistentOracle` is raised.
    """
    root = partition_tree(classes)
    start = oracle.query_count
    node, path, vals, agg_norms = root, [], [], []
    while not node.is_leaf:
        agg = sum(np.asarray(povm(t), dtype=complex) for t in node.left.classes)
        w = np.linalg.eigvalsh(agg)
        agg_norms.append((float(w.min()), float(w.max())))
        v = float(oracle.query(Observable(agg, check=False, tag=f"tree[{len(path)}]")))
        vals.append(v)
        if delta is not None and delta + oracle.tau < v < 1 - delta - oracle.tau:
            raise InconsistentOracle(f"response {v} is not within delta + tau of 0 or 1")
        go_left = v > 0.5
        path.append(0 if go_left else 1)
        node = node.left if go_left else node.right
    return LearnerResult(node.classes[0], oracle.query_count - start, True,
                         {"path": path, "responses": vals, "aggregate_spectra": agg_norms,
                          "depth_bound": math.ceil(math.log2(len(classes))) if len(classes) > 1 else 0})


def toy_tree_problem(delta: float, rng: np.random.Generator, n: int = 3):
    """``2^n`` rotated basis states and a POVM that is correct with probability ``1 - delta``.

    Returns ``(states, povm)`` with ``povm(t) = V (sum_u K_tu |u><u|) V^dag``.
    """
    from .ensembles import sample_haar
    N = 2**n
    V = sample_haar(N, rng)
    K = np.full((N, N), delta / (N - 1))
    np.fill_diagonal(K, 1 - delta)
    states = [qmath.PureState(V[:, s]) for s in range(N)]

    def povm(t):
        return (V * K[t]) @ V.conj().T

    return states, povm


# ---------------------------------------------------------------- trial harness

LEARNER_NAMES = ("parity", "gaussian", "zx", "purity", "pure_state", "tree")


def run_learner_trials(name: str, params: dict, trials: int, rng: np.random.Generator, policy=None) -> dict:
    """Run ``trials`` independent instances of a learner and summarize success and query counts."""
    from .oracles import make_kqstat_oracle, make_qstat_oracle
    from .ensembles import haar_states

    tau = float(params["tau"])
    successes, queries = 0, []
    for _ in range(trials):
        if name == "parity":
            n = int(params["n"])
            s = rng.integers(0, 2, size=n)
            res = parity_learner(make_qstat_oracle(parity_qpac_state(s), tau, policy), n)
            ok = bool(np.array_equal(res.output, s))
        elif name == "gaussian":
            l = int(params["l"])
            psi = random_gaussian_state(l, rng)
            res = gaussian_state_learner(make_qstat_oracle(psi, tau, policy), l)
            ok = abs(np.vdot(res.output[1].amplitudes, psi.amplitudes)) ** 2 >= params.get("fidelity", 0.9)
        elif name == "zx":
            n = int(params["n"])
            x = rng.integers(0, 2, size=n)
            res = zx_string_learner(make_zx_loss_oracle(x, tau, policy), n)
            ok = res.output.label == zx_pauli(x).label
        elif name == "purity":
            N, delta = int(params.get("N", 4)), float(params["delta"])
            pure = bool(rng.integers(2))
            if pure:
                rho = qmath.PureState(haar_states(N, rng, 1)[0]).density()
            else:  # mixture with purity exactly 1 - delta
                p = 0.5 * (1 + math.sqrt(1 - 2 * delta))
                a = haar_states(N, rng, 1)[0]
                b = rng.normal(size=N) + 1j * rng.normal(size=N)
                b -= np.vdot(a, b) * a
                b /= np.linalg.norm(b)
                rho = p * np.outer(a, a.conj()) + (1 - p) * np.outer(b, b.conj())
            res = purity_tester(make_kqstat_oracle(rho, 2, tau, policy), delta)
            ok = (res.output == "pure") == pure
        elif name == "pure_state":
            N, eps = int(params.get("N", 4)), float(params["eps"])
            ref = haar_states(N, rng, 1)[0]
            equal = bool(rng.integers(2))
            if equal:
                psi = ref
            else:  # trace distance exactly eps
                w = rng.normal(size=N) + 1j * rng.normal(size=N)
                w -= np.vdot(ref, w) * ref
                w /= np.linalg.norm(w)
                psi = math.sqrt(1 - eps**2) * ref + eps * w
            res = pure_state_tester(make_qstat_oracle(psi, tau, policy), qmath.PureState(ref), eps)
            ok = (res.output == "equal") == equal
        elif name == "tree":
            delta, n = float(params["delta"]), int(params.get("n", 3))
            states, povm = toy_tree_problem(delta, rng, n)
            t = int(rng.integers(len(states)))
            res = multicopy_tree_learner(make_qstat_oracle(states[t], tau, policy), povm, list(range(len(states))))
            ok = res.output == t
        else:
            raise ValueError(f"unknown learner {name!r}; choose from {LEARNER_NAMES}")
        successes += bool(ok)
        queries.append(res.queries_used)
    return {"learner": name, "trials": trials, "success_rate": successes / trials,
            "queries_min": int(min(queries)), "queries_max": int(max(queries)), "queries_mean": float(np.mean(queries))}
