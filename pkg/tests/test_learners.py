import math

import numpy as np
import pytest

from qsqlab import ensembles, learners, oracles, qmath
from qsqlab.learners import AmbiguousResponse, InconsistentOracle
from qsqlab.oracles import AdversarialCallback, Exact


def test_update_budget():
    assert learners.update_budget(1.0, 1.0, 0.3) == math.ceil(18 / 0.09)


def test_mw_uniform_target_needs_no_updates(rng):
    N = 8
    pool = [rng.uniform(-1, 1, N) for _ in range(10)]
    orc = oracles.make_stat_oracle(np.full(N, 1 / N), 0.03, Exact())
    res = learners.mw_distribution_learner(orc, pool, 0.09)
    assert res.success and res.diagnostics["updates"] == 0 and res.queries_used == 10
    with pytest.raises(ValueError):
        learners.mw_distribution_learner(oracles.make_stat_oracle(np.full(N, 1 / N), 0.1), pool, 0.09)


def test_mw_learns_point_mass(rng):
    N = 4
    P = np.array([1.0, 0, 0, 0])
    pool = [2 * np.eye(N)[i] - 1 for i in range(N)]
    res = learners.mw_distribution_learner(oracles.make_stat_oracle(P, 0.05), pool, 0.15)
    assert res.success
    for p in pool:
        assert abs(res.output @ p - P @ p) <= 0.15 + 1e-9


def test_mmw_learns_basis_state():
    pool = [qmath.X, qmath.Y, qmath.Z]
    orc = oracles.make_qstat_oracle(qmath.ket([0]), 0.05, Exact())
    res = learners.mmw_state_learner(orc, 2, pool, 0.15)
    assert res.success
    assert qmath.expectation(res.output, qmath.Z) >= 1 - 0.15
    assert res.diagnostics["max_trace_error"] < 1e-9 and res.diagnostics["min_eigenvalue"] > 0


def test_mmw_empty_pool():
    orc = oracles.make_qstat_oracle(qmath.ket([0]), 0.05)
    res = learners.mmw_state_learner(orc, 2, [], 0.15)
    assert res.success and res.queries_used == 0
    assert np.allclose(res.output.matrix, np.eye(2) / 2)


def test_walsh_hadamard_involution(rng):
    v = rng.normal(size=16)
    assert np.allclose(learners.walsh_hadamard(learners.walsh_hadamard(v)), v)


@pytest.mark.parametrize("s", [[0, 0, 0, 0], [1], [0], [1, 0, 1, 1, 0]])
def test_parity_learner(s):
    n = len(s)
    orc = oracles.make_qstat_oracle(learners.parity_qpac_state(s), 0.2)
    res = learners.parity_learner(orc, n)
    assert list(res.output) == s and res.queries_used == n


def test_parity_rejects_large_tau_and_flags_ambiguity():
    with pytest.raises(ValueError):
        learners.parity_learner(oracles.make_qstat_oracle(learners.parity_qpac_state([1]), 0.25), 1)
    # a superposition of two qPAC states is not a valid input: its answers sit between 0 and 1/2
    v = learners.parity_qpac_state([1, 0]).amplitudes + learners.parity_qpac_state([0, 0]).amplitudes
    orc = oracles.make_qstat_oracle(qmath.PureState(v, normalize=True), 0.01)
    with pytest.raises(AmbiguousResponse):
        learners.parity_learner(orc, 2)


def test_gaussian_vacuum_exact():
    l = 3
    orc = oracles.make_qstat_oracle(qmath.ket([0] * l), 0, Exact())
    res = learners.gaussian_state_learner(orc, l)
    M, psi = res.output
    assert res.queries_used == l * (2 * l - 1)
    assert abs(psi.amplitudes[0]) == pytest.approx(1)
    assert np.allclose(M, qmath.covariance_of_state(qmath.ket([0] * l), qmath.majorana_operators(l)))


def test_gaussian_random_state_fidelity(rng):
    l = 3
    psi = learners.random_gaussian_state(l, rng)
    tau = 0.01
    res = learners.gaussian_state_learner(oracles.make_qstat_oracle(psi, tau), l)
    fid = abs(np.vdot(res.output[1].amplitudes, psi.amplitudes)) ** 2
    assert fid >= 1 - 2 * l**2 * tau


def test_gaussian_rejects_non_gaussian():
    # (|0000> + |1111>)/sqrt2 has a vanishing covariance matrix
    v = np.zeros(16)
    v[0] = v[15] = 1 / math.sqrt(2)
    with pytest.raises(learners.NonGaussianInput):
        learners.gaussian_state_learner(oracles.make_qstat_oracle(qmath.PureState(v), 0.0, Exact()), 4)


@pytest.mark.parametrize("x", [[0, 0, 0], [1, 1, 1], [0, 1, 1, 0], [1], [0]])
def test_zx_learner(x):
    orc = learners.make_zx_loss_oracle(x, 0.2)
    res = learners.zx_string_learner(orc, len(x))
    assert res.output.label == learners.zx_pauli(x).label
    assert res.queries_used == len(x) + 1


def test_zx_ambiguity_and_tau_guard():
    states = learners.zx_query_states(2)
    orc = oracles.make_loss_oracle(lambda lab: 0.25, 0.2, Exact(), domain=lambda lab: tuple(lab) in states)
    with pytest.raises(AmbiguousResponse):
        learners.zx_string_learner(orc, 2)
    with pytest.raises(ValueError):
        learners.zx_string_learner(learners.make_zx_loss_oracle([0], 0.25), 1)


def test_purity_tester(rng):
    mixed = oracles.make_kqstat_oracle(qmath.DensityMatrix(np.eye(2) / 2), 2, 0.05)
    assert learners.purity_tester(mixed, 0.2).output == "mixed"
    pure = oracles.make_kqstat_oracle(qmath.ket([1]), 2, 0.05)
    assert learners.purity_tester(pure, 0.2).output == "pure"
    with pytest.raises(ValueError):
        learners.purity_tester(pure, 0.1)


def test_pure_state_tester():
    z0, z1 = qmath.ket([0]), qmath.ket([1])
    assert learners.pure_state_tester(oracles.make_qstat_oracle(z1, 0.1), z0, 0.5).output == "far"
    assert learners.pure_state_tester(oracles.make_qstat_oracle(z0, 0.1), z0, 0.5).output == "equal"


def test_stabilizer_test_observable(rng):
    O = learners.stabilizer_test_observable(1)
    for s in ensembles.stabilizer_states(1):
        orc = oracles.make_kqstat_oracle(qmath.PureState(s), 6, 0.01, expose_truth=True)
        assert orc.truth(O) == pytest.approx(1)
        assert learners.stabilizer_tester(orc, 1, 0.4).output == "stabilizer"
    for _ in range(5):
        psi = ensembles.haar_states(2, rng, 1)[0]
        eps = learners.stabilizer_distance(psi)
        orc = oracles.make_kqstat_oracle(qmath.PureState(psi), 6, 0.01, expose_truth=True)
        assert orc.truth(O) <= 1 - eps**2 / 4 + 1e-9
    with pytest.raises(qmath.BudgetError):
        learners.stabilizer_test_observable(3)


def test_partition_tree():
    root = learners.partition_tree(range(5))
    assert root.left.classes == [0, 1, 2] and root.right.classes == [3, 4]
    assert learners.partition_tree([7]).is_leaf
    with pytest.raises(ValueError):
        learners.partition_tree([])


def test_tree_learner(rng):
    states, povm = learners.toy_tree_problem(0.05, rng, 3)
    res = learners.multicopy_tree_learner(oracles.make_qstat_oracle(qmath.ket([0]), 0.05), povm, [0])
    assert res.queries_used == 0 and res.output == 0
    for t in range(8):
        res = learners.multicopy_tree_learner(oracles.make_qstat_oracle(states[t], 0.05), povm, list(range(8)))
        assert res.output == t and res.queries_used == 3
        for lo, hi in res.diagnostics["aggregate_spectra"]:
            assert -1e-9 <= lo <= hi <= 1 + 1e-9


def test_tree_learner_flags_inconsistent_oracle(rng):
    states, povm = learners.toy_tree_problem(0.05, rng, 2)
    # a superposition of two classes gives an aggregate answer near 1/2
    psi = qmath.PureState(states[0].amplitudes + states[2].amplitudes, normalize=True)
    orc = oracles.make_qstat_oracle(psi, 0.01)
    with pytest.raises(InconsistentOracle):
        learners.multicopy_tree_learner(orc, povm, list(range(4)), delta=0.05)


def test_learner_result_to_dict():
    r = learners.LearnerResult(learners.zx_pauli([1, 0]), 3, True)
    assert r.to_dict()["output"] == "XZ"


@pytest.mark.parametrize("name,params", [
    ("parity", {"n": 4, "tau": 0.2}),
    ("gaussian", {"l": 2, "tau": 0.01}),
    ("zx", {"n": 3, "tau": 0.2}),
    ("purity", {"N": 4, "delta": 0.2, "tau": 0.05}),
    ("pure_state", {"N": 4, "eps": 0.5, "tau": 0.1}),
    ("tree", {"delta": 0.05, "tau": 0.05}),
])
def test_run_learner_trials(name, params, rng):
    out = learners.run_learner_trials(name, params, 10, rng)
    assert out["success_rate"] == 1.0 and out["trials"] == 10


def test_run_learner_trials_unknown(rng):
    with pytest.raises(ValueError):
        learners.run_learner_trials("nope", {"tau": 0.1}, 1, rng)
