"""Mirror maps, the mirror-descent update and a regret audit."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np


def _herm_fn(X: np.ndarray, fn) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (X + X.conj().T))
    return (v * fn(w)) @ v.conj().T


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1
    ind = np.arange(1, y.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(y - theta, 0)


class MirrorMap:
    """Regularizer ``R`` on a domain ``W`` with strong-convexity constant ``zeta``."""

    name = "mirror"
    zeta = 1.0

    def gradient(self, x):
        raise NotImplementedError

    def inverse_gradient(self, y):
        raise NotImplementedError

    def project(self, x):
        return x

    def bregman(self, x, y) -> float:
        raise NotImplementedError

    def norm(self, x) -> float:
        raise NotImplementedError

    def dual_norm(self, g) -> float:
        raise NotImplementedError

    def initial(self, dim: int):
        raise NotImplementedError

    def pair(self, g, x) -> float:
        """Duality pairing ``<g, x>``."""
        return float(np.real(np.vdot(np.asarray(g).conj(), np.asarray(x)))) if np.ndim(g) == 1 else \
            float(np.real(np.einsum("ij,ji->", g, x)))

    def in_domain(self, x, tol: float = 1e-9) -> bool:
        raise NotImplementedError


class NegEntropy(MirrorMap):
    """``R(x) = sum x ln x`` on the simplex; 1-strongly convex for ``||.||_1`` (Pinsker)."""

    name = "neg_entropy"
    zeta = 1.0

    def gradient(self, x):
        return 1.0 + np.log(x)

    def inverse_gradient(self, y):
        return np.exp(y - 1.0)

    def project(self, x):
        return x / x.sum()

    def bregman(self, x, y) -> float:
        x, y = np.asarray(x, float), np.asarray(y, float)
        m = x > 0
        return float(np.sum(x[m] * np.log(x[m] / y[m])) - x.sum() + y.sum())

    def norm(self, x):
        return float(np.sum(np.abs(x)))

    def dual_norm(self, g):
        return float(np.max(np.abs(g)))

    def initial(self, dim):
        return np.full(dim, 1.0 / dim)

    def in_domain(self, x, tol=1e-9):
        return bool(np.all(x >= -tol) and abs(x.sum() - 1) <= tol)


class SquaredNorm(MirrorMap):
    """``R(x) = ||x||_2^2 / 2``: a gradient step followed by Euclidean projection."""

    name = "squared_norm"
    zeta = 1.0

    def __init__(self, domain: str = "simplex"):
        if domain not in ("simplex", "ball", "free"):
            raise ValueError(f"unknown domain {domain!r}")
        self.domain = domain

    def gradient(self, x):
        return np.asarray(x, float)

    def inverse_gradient(self, y):
        return np.asarray(y, float)

    def project(self, x):
        if self.domain == "simplex":
            return project_simplex(x)
        if self.domain == "ball":
            n = np.linalg.norm(x)
            return x if n <= 1 else x / n
        return x

    def bregman(self, x, y):
        d = np.asarray(x, float) - np.asarray(y, float)
        return 0.5 * float(d @ d)

    def norm(self, x):
        return float(np.linalg.norm(x))

    def dual_norm(self, g):
        return float(np.linalg.norm(g))

    def initial(self, dim):
        return np.full(dim, 1.0 / dim) if self.domain == "simplex" else np.zeros(dim)

    def in_domain(self, x, tol=1e-9):
        if self.domain == "simplex":
            return bool(np.all(x >= -tol) and abs(x.sum() - 1) <= tol)
        if self.domain == "ball":
            return bool(np.linalg.norm(x) <= 1 + tol)
        return True


class VonNeumann(MirrorMap):
    """``R(X) = tr[X log2 X]`` on density matrices.

    With the base-2 logarithm the Bregman divergence is the relative entropy in
    bits and quantum Pinsker gives ``zeta = 1/ln 2`` for the trace norm.  The
    step is the matrix multiplicative-weights update followed by trace
    normalization (the Bregman projection onto unit trace).
    """

    name = "von_neumann"
    zeta = 1.0 / math.log(2)

    def gradient(self, X):
        return _herm_fn(X, lambda w: np.log2(np.clip(w, 1e-300, None))) + np.eye(X.shape[0]) / math.log(2)

    def inverse_gradient(self, Y):
        return _herm_fn(Y * math.log(2) - np.eye(Y.shape[0]), np.exp)

    def project(self, X):
        X = 0.5 * (X + X.conj().T)
        return X / np.trace(X).real

    def bregman(self, X, Y):
        ly = _herm_fn(Y, lambda w: np.log2(np.clip(w, 1e-300, None)))
        wx = np.clip(np.linalg.eigvalsh(0.5 * (X + X.conj().T)), 0, None)
        xlogx = float(np.sum(wx[wx > 0] * np.log2(wx[wx > 0])))  # 0 log 0 = 0
        cross = float(np.real(np.einsum("ij,ji->", X, ly)))
        return xlogx - cross + (np.trace(Y).real - np.trace(X).real) / math.log(2)

    def norm(self, X):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (X + X.conj().T)))))

    def dual_norm(self, G):
        return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (G + G.conj().T)))))

    def initial(self, dim):
        return np.eye(dim, dtype=complex) / dim

    def in_domain(self, X, tol=1e-9):
        return bool(abs(np.trace(X).real - 1) <= tol and np.linalg.eigvalsh(X).min() >= -tol
                    and np.allclose(X, X.conj().T, atol=tol))


@dataclass(frozen=True)
class MDState:
    iterate: np.ndarray
    eta: float
    t: int = 0
    radius: float | None = None


def md_update(state: MDState, g, mirror: MirrorMap) -> MDState:
    """``f_{t+1} = Pi(grad R^{-1}(grad R(f_t) - eta g))``."""
    g = np.asarray(g)
    if not np.all(np.isfinite(g)):
        raise ValueError("dual vector must be finite")
    y = mirror.gradient(state.iterate) - state.eta * g
    f = mirror.project(mirror.inverse_gradient(y))
    if not mirror.in_domain(f, 1e-8):
        raise ValueError("projection left the constraint set")
    return replace(state, iterate=f, t=state.t + 1)


def run_mirror_descent(mirror: MirrorMap, gs: Sequence, eta: float, f1=None) -> list:
    """Iterates ``f_1..f_T`` played against ``g_1..g_T`` (``f_t`` precedes ``g_t``)."""
    dim = np.asarray(gs[0]).shape[0]
    st = MDState(mirror.initial(dim) if f1 is None else f1, eta)
    fs = []
    for g in gs:
        fs.append(st.iterate)
        st = md_update(st, g, mirror)
    return fs


def regret_audit(gs: Sequence, fs: Sequence, comparator, mirror: MirrorMap, eta: float, f1=None) -> dict:
    """Average regret against ``comparator`` and the bound ``D(f, f1)/(eta T) + eta/(2 zeta)``."""
    T = len(gs)
    if T == 0 or len(fs) != T:
        raise ValueError("need matching non-empty g and f sequences")
    for g in gs:
        if mirror.dual_norm(g) > 1 + 1e-12:
            raise ValueError("every g_t must have dual norm at most 1")
    f1 = fs[0] if f1 is None else f1
    regret = sum(mirror.pair(g, f) - mirror.pair(g, comparator) for g, f in zip(gs, fs)) / T
    D = mirror.bregman(comparator, f1)
    bound = D / (eta * T) + eta / (2 * mirror.zeta)
    return {"T": T, "average_regret": regret, "bound": bound, "divergence": D,
            "holds": regret <= bound + 1e-9}
