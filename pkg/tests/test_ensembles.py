import math

import numpy as np
import pytest

from qsqlab import ensembles, qmath
from qsqlab.ensembles import UnitaryEnsemble


def test_haar_unitarity_and_first_moment(rng):
    Us = ensembles.sample_haar(2, rng, size=10_000)
    assert np.allclose(np.einsum("sji,sjk->sik", Us.conj(), Us), np.eye(2), atol=1e-9)
    cols = Us[:, :, 0]
    z = np.abs(cols[:, 0]) ** 2 - np.abs(cols[:, 1]) ** 2
    assert abs(z.mean()) <= 3 * z.std() / 100
    p0 = np.abs(cols[:, 0]) ** 2
    assert abs(p0.mean() - 0.5) <= 3 * p0.std() / 100


def test_haar_phase_fix_is_unbiased(rng):
    # diagonal phases of a Haar unitary are uniform: their mean vanishes
    d = np.array([np.diag(U) for U in ensembles.sample_haar(3, rng, size=4000)])
    assert np.all(np.abs(d.mean(axis=0)) < 0.05)


def test_clifford_tableau_basics(rng):
    for n in (1, 2, 3, 4):
        for _ in range(5):
            tab, U = ensembles.sample_clifford(n, rng)
            assert tab.is_symplectic()
            assert qmath.is_unitary(U)
            back = ensembles.CliffordTableau.from_unitary(U)
            assert np.array_equal(back.table, tab.table) and np.array_equal(back.phase, tab.phase)
            # Z_1 maps to a signed Pauli
            Z1 = qmath.PauliWeyl.from_label("Z" + "I" * (n - 1)).dense()
            x, z, s = ensembles.decompose_pauli(U @ Z1 @ U.conj().T)
            assert len(x) == n


def test_clifford_sampling_is_uniform_on_one_qubit(rng):
    counts = {}
    for _ in range(4800):
        tab = ensembles.sample_clifford_tableau(1, rng)
        counts[tab.key()] = counts.get(tab.key(), 0) + 1
    assert len(counts) == 24
    c = np.array(list(counts.values()))
    chi2 = float(np.sum((c - 200) ** 2 / 200))
    assert chi2 < 60  # 23 dof; p ~ 1e-4 cut


def test_stabilizer_overlaps(rng):
    states = ensembles.random_stabilizer_states(3, rng, 30)
    ov = np.abs(states.conj() @ states.T)
    allowed = np.array([0] + [2 ** (-k / 2) for k in range(4)])
    assert np.all(np.min(np.abs(ov[..., None] - allowed), axis=-1) < 1e-9)


def test_exhaustive_groups():
    assert len(ensembles.clifford_group(1)) == 24
    assert [len(ensembles.stabilizer_states(n)) for n in (1, 2)] == [6, 60]
    with pytest.raises(qmath.BudgetError):
        ensembles.clifford_group(3)


def test_brickwork_structure(rng):
    assert np.allclose(ensembles.sample_brickwork(3, 0, "Haar4", rng), np.eye(8))
    U = ensembles.sample_brickwork(2, 1, "Haar4", rng)
    assert qmath.is_unitary(U)
    assert ensembles.brickwork_pairs(5, 0) == [0, 2] and ensembles.brickwork_pairs(5, 1) == [1, 3]
    # a Clifford-gate brickwork maps Paulis to Paulis
    V = ensembles.sample_brickwork(3, 4, "CliffordLocal", rng)
    ensembles.decompose_pauli(V @ qmath.PauliWeyl.from_label("XIZ").dense() @ V.conj().T)


def test_haar_state_moment():
    assert np.allclose(ensembles.haar_state_moment(3, 1), np.eye(3) / 3)
    N = 3
    F = qmath.flip_operator(N).matrix
    assert np.allclose(ensembles.haar_state_moment(N, 2), (np.eye(N * N) + F) / (N * (N + 1)))
    for t in (1, 2, 3):
        assert np.trace(ensembles.haar_state_moment(2, t)).real == pytest.approx(1)


def test_second_moment_channel(rng):
    N = 3
    F = qmath.flip_operator(N).matrix
    assert np.allclose(ensembles.second_moment_channel(np.eye(N * N)), np.eye(N * N))
    assert np.allclose(ensembles.second_moment_channel(F), F)
    A = qmath.random_hermitian(N * N, rng)
    Us = ensembles.sample_haar(N, rng, size=10_000)
    UU = np.einsum("sij,skl->sikjl", Us, Us).reshape(-1, N * N, N * N)
    vals = np.einsum("sij,jk,slk->sil", UU, A, UU.conj())
    mean, se = vals.mean(axis=0), vals.std(axis=0) / math.sqrt(len(Us))
    exact = ensembles.second_moment_channel(A)
    assert np.all(np.abs(mean - exact) <= 3 * se + 1e-3)


def test_empirical_moment(rng):
    U = ensembles.sample_haar(2, rng)
    est = ensembles.empirical_moment(UnitaryEnsemble.explicit([U]), 2)
    v = U[:, 0]
    assert np.allclose(est.operator, np.kron(np.outer(v, v.conj()), np.outer(v, v.conj())))
    est = ensembles.empirical_moment(UnitaryEnsemble.haar(2), 1, samples=10_000, rng=rng)
    assert np.all(np.abs(est.operator - np.eye(2) / 2) <= 3 * est.standard_error)
    Z = qmath.Observable(qmath.Z)
    zz = qmath.TensorSumObservable([(1.0, [Z, Z, Z])])
    e = ensembles.empirical_moment(UnitaryEnsemble.clifford(2), 3, samples=3000, rng=rng,
                                   functionals=[qmath.symmetric_projector(4, 3)])
    assert e.values[0] == pytest.approx(1.0)
    Zl = qmath.Observable(qmath.tensor(qmath.Z, qmath.I2))
    e = ensembles.empirical_moment(UnitaryEnsemble.clifford(2), 3, samples=3000, rng=rng,
                                   functionals=[qmath.TensorSumObservable([(1.0, [Zl, Zl, qmath.Observable(np.eye(4))])])])
    # Haar value of E<Z_1>^2 is 1/(N+1) = 1/5
    assert abs(e.values[0] - 0.2) <= 3 * e.standard_error[0]
    assert zz.copies == 3


def test_clifford_three_design_exhaustive():
    E = UnitaryEnsemble.explicit(ensembles.clifford_group(1))
    for t in (1, 2, 3):
        dev, err = ensembles.design_deviation(E, t)
        assert dev <= 1e-12 and err == 0
    assert ensembles.design_deviation(E, 4)[0] > 1e-3


def test_design_deviation_point_ensemble():
    dev, _ = ensembles.design_deviation(UnitaryEnsemble.explicit([np.eye(2)]), 1)
    assert dev == pytest.approx(1.0)


def test_brickwork_depth_trend(rng):
    devs = [ensembles.design_deviation(UnitaryEnsemble.brickwork(4, d), 2, 1500, rng, bootstrap=5)[0]
            for d in (1, 2, 4, 8)]
    assert devs[0] > devs[1] > devs[2] >= devs[3] - 0.02


def test_clifford_brickwork_matches_uniform_clifford(rng):
    n = 2
    a, ea = ensembles.design_deviation(UnitaryEnsemble.brickwork(n, 9 * n, "CliffordLocal"), 2, 3000, rng)
    b, eb = ensembles.design_deviation(UnitaryEnsemble.clifford(n), 2, 3000, rng)
    assert abs(a - b) <= 3 * math.hypot(ea, eb) + 0.02


def test_run_streams_deterministic():
    f = lambda r, m: r.normal(size=m)  # noqa: E731
    a = np.concatenate(ensembles.run_streams(f, 7, 5000, chunk=1000, workers=1))
    b = np.concatenate(ensembles.run_streams(f, 7, 5000, chunk=1000, workers=3))
    assert np.array_equal(a, b) and a.size == 5000


def test_jackknife_variance_matches_numpy(rng):
    x = rng.normal(size=500)
    v, se = ensembles.jackknife_variance(x)
    assert v == pytest.approx(np.var(x, ddof=1))
    loo = np.array([np.var(np.delete(x, i), ddof=1) for i in range(x.size)])
    se_ref = math.sqrt((x.size - 1) / x.size * np.sum((loo - loo.mean()) ** 2))
    assert se == pytest.approx(se_ref, rel=1e-8)
