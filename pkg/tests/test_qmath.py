import math

import numpy as np
import pytest

from qsqlab import qmath
from qsqlab.qmath import I2, X, Y, Z, H


def test_tensor_examples():
    assert np.allclose(qmath.tensor(I2, I2), np.eye(4))
    assert qmath.expectation(qmath.ket([0, 0]), qmath.tensor(Z, Z)) == pytest.approx(1)
    bell = qmath.PureState(np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert qmath.expectation(bell, qmath.tensor(X, X)) == pytest.approx(1)


def test_expectation_examples():
    assert qmath.expectation(qmath.ket([0]).density(), Z) == pytest.approx(1)
    assert qmath.expectation(qmath.DensityMatrix(np.eye(2) / 2), Z) == pytest.approx(0)
    plus = qmath.PureState(H @ np.array([1, 0]))
    assert qmath.expectation(plus.density(), X) == pytest.approx(1)
    with pytest.raises(qmath.DimensionError):
        qmath.expectation(plus, np.eye(4))


def test_state_validation():
    with pytest.raises(ValueError):
        qmath.PureState([1, 1])
    assert qmath.PureState([1, 1], normalize=True).dim == 2
    with pytest.raises(ValueError):
        qmath.DensityMatrix(np.diag([0.7, 0.7]))
    with pytest.raises(ValueError):
        qmath.DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        qmath.Observable(np.array([[0, 1], [0, 0]]))


def test_trace_distance_and_fidelity(rng):
    z0, z1 = qmath.ket([0]).density(), qmath.ket([1]).density()
    assert qmath.trace_distance(z0, z1) == pytest.approx(1)
    assert qmath.trace_distance(z0, z0) == pytest.approx(0, abs=1e-12)
    assert qmath.fidelity(z0, z0) == pytest.approx(1)
    assert qmath.fidelity(z0, z1) == pytest.approx(0, abs=1e-12)
    assert qmath.fidelity(z0, qmath.DensityMatrix(np.eye(2) / 2)) == pytest.approx(0.5)
    for _ in range(20):
        a, b = (qmath.PureState(rng.normal(size=4) + 1j * rng.normal(size=4), normalize=True) for _ in range(2))
        ov = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
        assert qmath.trace_distance(a, b) == pytest.approx(math.sqrt(1 - ov), abs=1e-9)
        assert qmath.fidelity(a, b) == pytest.approx(ov, abs=1e-9)


def test_partial_trace(rng):
    rho, sigma = qmath.random_density(2, rng), qmath.random_density(4, rng)
    red = qmath.partial_trace(np.kron(rho.matrix, sigma.matrix), [0], [2, 4])
    assert np.allclose(red.matrix, rho.matrix)
    assert np.trace(red.matrix).real == pytest.approx(1)
    bell = qmath.PureState(np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert np.allclose(qmath.partial_trace(bell.density(), [1], [2, 2]).matrix, np.eye(2) / 2)


def test_flip_and_symmetric(rng):
    F = qmath.flip_operator(2).matrix
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(F, swap)
    for N in (2, 3, 4):
        assert np.trace(qmath.flip_operator(N).matrix).real == pytest.approx(N)
        rho = qmath.random_density(N, rng)
        val = np.trace(np.kron(rho.matrix, rho.matrix) @ qmath.flip_operator(N).matrix).real
        assert val == pytest.approx(rho.purity())
    assert np.allclose(qmath.symmetric_projector(3, 1).matrix, np.eye(3))
    P2 = qmath.symmetric_projector(2, 2).matrix
    assert np.allclose(P2, (np.eye(4) + F) / 2)
    assert round(np.trace(P2).real) == 3 == np.linalg.matrix_rank(P2)
    P3 = qmath.symmetric_projector(2, 3).matrix
    assert np.allclose(P3 @ P3, P3) and round(np.trace(P3).real) == math.comb(4, 3)


def test_weyl_operators(rng):
    assert np.allclose(qmath.weyl_operator([0], [0]).matrix, I2)
    W = 1j * X @ Z
    assert np.allclose(qmath.weyl_operator([1], [1]).matrix, W)
    assert np.allclose(W, Y)
    assert qmath.PauliWeyl.from_label("XYZI").label == "XYZI"
    assert np.allclose(qmath.weyl_operator([1], [0], sign=-1).matrix, -X)
    # expansion identity: 2^{-2n} sum_{x,y} <W_x><W_y> tr[W_x W_y] = 2^{-n} sum_x <W_x>^2
    n = 2
    psi = qmath.PureState(rng.normal(size=4) + 1j * rng.normal(size=4), normalize=True)
    ws = [qmath.PauliWeyl(a, b).dense() for a, b in qmath.all_weyl_labels(n)]
    ev = qmath.weyl_expectations(psi)
    lhs = sum(ev[i] * ev[j] * np.trace(ws[i] @ ws[j]).real for i in range(16) for j in range(16)) / 16
    assert lhs == pytest.approx(np.sum(ev**2) / 4)
    assert lhs == pytest.approx(1.0)


def test_majoranas():
    m = qmath.majorana_operators(1).operators
    assert np.allclose(m[0], X) and np.allclose(m[1], Y)
    ms = qmath.majorana_operators(3).operators
    for i, a in enumerate(ms):
        assert np.allclose(a @ a, np.eye(8))
        for b in ms[i + 1:]:
            assert np.allclose(a @ b + b @ a, 0)


def test_covariance():
    ms = qmath.majorana_operators(2)
    M = qmath.covariance_of_state(qmath.ket([0, 0]), ms)
    # this Jordan-Wigner convention gives M_12 = -1 on the vacuum
    expected = np.kron(np.eye(2), np.array([[0, -1], [1, 0]]))
    assert np.allclose(M, expected)
    assert np.allclose(np.diag(M), 0)
    assert np.allclose(qmath.covariance_of_state(qmath.DensityMatrix(np.eye(4) / 4), ms), 0)


def test_tensor_sum_observable(rng):
    A = qmath.Observable(qmath.random_hermitian(2, rng))
    B = qmath.Observable(Z)
    T = qmath.TensorSumObservable([(0.5, [A, B]), (0.5, [B, B])])
    assert T.copies == 2 and T.dim == 4
    psi = qmath.PureState(rng.normal(size=2) + 0j, normalize=True)
    v = np.kron(psi.amplitudes, psi.amplitudes)
    assert qmath.expectation(psi, T) == pytest.approx(np.vdot(v, T.dense() @ v).real)
    assert T.op_norm == pytest.approx(1.0)
    with pytest.raises(qmath.DimensionError):
        qmath.TensorSumObservable([(1, [A]), (1, [A, A])])


def test_matrix_free_observable():
    O = qmath.Observable(matvec=lambda v: Z @ v, dim=2, op_norm=1.0, tag="z")
    assert np.allclose(O.dense(), Z)
    assert qmath.expectation(qmath.ket([1]), O) == pytest.approx(-1)
    with pytest.raises(ValueError):
        qmath.Observable(matvec=lambda v: v)


def test_budgets():
    with pytest.raises(qmath.BudgetError):
        qmath.symmetric_projector(8, 5)
    with pytest.raises(qmath.BudgetError):
        qmath.majorana_operators(8)
