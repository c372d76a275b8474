import csv
import io
import json
import math

import numpy as np
import pytest

from qsqlab import ensembles, hardness, qmath
from qsqlab.ensembles import UnitaryEnsemble
from qsqlab.qmath import Observable, TensorSumObservable


def test_haar_variance_exact_examples():
    assert hardness.haar_variance_exact(np.eye(4)) == pytest.approx(0)
    assert hardness.haar_variance_exact(qmath.Z) == pytest.approx(1 / 3)


def test_state_variance_identity_is_zero(rng):
    r = hardness.state_variance(UnitaryEnsemble.haar(4), np.eye(4), 1, 500, rng)
    assert r.estimate == pytest.approx(0, abs=1e-20) and r.passed


def test_clifford_exact_matches_haar():
    E = UnitaryEnsemble.explicit(ensembles.clifford_group(1))
    r = hardness.state_variance(E, qmath.Z, 1)
    assert r.stderr == 0 and r.estimate == pytest.approx(1 / 3)
    O = (qmath.X + qmath.Z) / math.sqrt(2)
    assert hardness.state_variance(E, O, 1).estimate == pytest.approx(hardness.haar_variance_exact(O))


def test_state_variance_haar_single_copy(rng):
    O = hardness.local_pauli(3, 0)
    r = hardness.state_variance(UnitaryEnsemble.haar(8), O, 1, 4000, rng)
    assert abs(r.estimate - 1 / 9) <= 3 * r.stderr + 1e-3
    assert r.passed and r.bound_name.startswith("2-design")


def test_state_variance_rejects_large_norm(rng):
    with pytest.raises(ValueError):
        hardness.state_variance(UnitaryEnsemble.haar(2), 2 * qmath.Z, 1, 10, rng)


def test_default_bounds():
    assert hardness.default_variance_bound(UnitaryEnsemble.haar(8), 1)[0] == pytest.approx(1 / 9)
    assert hardness.default_variance_bound(UnitaryEnsemble.haar(8), 2)[0] == pytest.approx(4)
    assert hardness.default_variance_bound(UnitaryEnsemble.clifford(3), 2)[0] == pytest.approx(2)
    assert hardness.default_variance_bound(UnitaryEnsemble.clifford(3), 3)[0] == math.inf


def test_functional_values_tensor_sum_matches_dense(rng):
    A = Observable(qmath.random_hermitian(2, rng) / 4, check=False)
    T = TensorSumObservable([(0.5, [A, Observable(qmath.Z)]), (0.5, [A, A])])
    states = ensembles.haar_states(2, rng, 20)
    assert np.allclose(hardness.functional_values(states, T, 2), hardness.functional_values(states, T.dense(), 2))
    with pytest.raises(qmath.DimensionError):
        hardness.functional_values(states, T, 3)


def test_random_observable_norm(rng):
    for kind in ("hermitian", "pauli", "projector"):
        O = hardness.random_observable(8, rng, kind)
        assert qmath.op_norm(O.dense()) == pytest.approx(1)
    with pytest.raises(ValueError):
        hardness.random_observable(8, rng, "nope")


def test_adversarial_pool_and_max(rng):
    pool = hardness.adversarial_pool(2, 2, rng, size=5)
    assert len(pool) == 5
    best, reps = hardness.max_variance_over_pool(UnitaryEnsemble.clifford(2), pool, 2, 500, rng)
    assert best.estimate == max(r.estimate for r in reps)
    assert "pool_argmax" in best.extra


def test_lifted_pool_max_variance_nondecreasing_in_k(rng):
    N = 4
    states = ensembles.haar_states(N, rng, 2000)
    I = Observable(np.eye(N))
    bases = [hardness.random_observable(N, rng, "projector"), Observable(hardness.local_pauli(2, 0))]
    maxima = []
    for k in (1, 2, 3):
        pool = [TensorSumObservable([(1.0, [A] * j + [I] * (k - j))]) for A in bases for j in range(1, k + 1)]
        reps = [hardness.state_variance(UnitaryEnsemble.haar(N), O, k, states=states) for O in pool]
        maxima.append(max(r.estimate for r in reps))
    assert maxima[0] <= maxima[1] <= maxima[2]


def test_levy_bound_edges():
    assert hardness.levy_bound(256, 1, 0.0) == 1
    assert hardness.levy_bound(2**20, 1, 0.5) < 1e-3
    vals = [hardness.levy_bound(2**n, 1, 0.2) for n in range(4, 12)]
    assert vals == sorted(vals, reverse=True)
    assert hardness.levy_bound(256, 2, 0.2) > hardness.levy_bound(256, 1, 0.2)


def test_levy_tail_check(rng):
    r = hardness.levy_tail_check(64, 1, 0.3, 2000, rng)
    assert r["holds"] and r["tail"] <= 1
    with pytest.raises(qmath.BudgetError):
        hardness.levy_tail_check(2**11, 1, 0.1, 10, rng)


def test_pauli_cost_identity(rng):
    assert hardness.pauli_cost_identity(qmath.ket([0, 0])) == pytest.approx(0.25)
    for n in (1, 3):
        psi = ensembles.haar_states(2**n, rng, 1)[0]
        assert hardness.pauli_cost_identity(psi) == pytest.approx(2.0**-n, abs=1e-10)
    with pytest.raises(qmath.BudgetError):
        hardness.pauli_cost_identity(np.ones(64) / 8)


def test_selflearn_basis_quantities():
    assert hardness.selflearn_basis_quantities(1).lower_bound_value == pytest.approx(1)
    assert hardness.selflearn_basis_quantities(5, beta=2.0**-5).lower_bound_value == 0
    with pytest.raises(ValueError):
        hardness.selflearn_basis_quantities(31)


def test_linear_model_identity_is_zero(rng):
    m = hardness.LinearModel(2, np.eye(4))
    assert hardness.linear_model_variance(m, "variational_2design", 200, rng).estimate == pytest.approx(0, abs=1e-20)
    r = hardness.linear_model_variance(m, "encoding_2design", 200, rng)
    assert r.estimate == 0 and r.extra["exact"] == 0


def test_linear_model_bounds(rng):
    m = hardness.LinearModel(4, hardness.local_pauli(4, 1, "X"))
    a = hardness.linear_model_variance(m, "variational_2design", 2000, rng, inputs=4)
    assert a.passed and abs(a.estimate - a.extra["exact"]) <= 3 * a.stderr + 1e-3
    b = hardness.linear_model_variance(m, "encoding_2design", 2000, rng)
    assert b.passed and b.extra["exact"] <= b.analytic_bound
    assert b.extra["general_bound"] <= b.analytic_bound + 1e-15
    with pytest.raises(ValueError):
        hardness.linear_model_variance(m, "nope", 10, rng)


def test_selflearn_check_constant_and_sign_family(rng):
    xs = lambda r, m: np.arange(m)  # noqa: E731
    zero = hardness.selflearn_loss_variance_check(lambda r, m, x: np.zeros((m, len(x))), xs, 200, rng, 3, 4)
    assert zero["rhs"] == 0 and max(zero["lhs"]) == 0 and zero["holds"]

    def signs(r, m, x):
        return r.choice([-1.0, 1.0], size=m)[:, None] * np.ones((m, len(x)))

    pm = hardness.selflearn_loss_variance_check(signs, xs, 2000, rng, 3, 4)
    assert pm["rhs"] == pytest.approx(4, abs=0.02) and pm["holds"]


def test_selflearn_check_linear_model_family(rng):
    n = 3
    N = 2**n
    O = hardness.local_pauli(n, 0)

    def funcs(r, m, x):
        U = ensembles.sample_haar(N, r, size=m)
        cols = U[:, :, x]  # (m, N, inputs)
        return np.real(np.einsum("sia,ij,sja->sa", cols.conj(), O, cols))

    r = hardness.selflearn_loss_variance_check(funcs, lambda r, m: r.integers(N, size=m), 1000, rng, 5, 16)
    assert r["holds"] and r["function_variance"] <= 1 / (N + 1) + 0.02


def test_parameter_shift_examples(rng):
    m = hardness.CircuitModel(2, 1, O=np.eye(4))
    th = rng.uniform(0, 2 * math.pi, m.num_params)
    assert all(abs(hardness.parameter_shift_gradient(m, th, i)) < 1e-12 for i in range(m.num_params))
    m1 = hardness.CircuitModel(1, 1, gates=("RY",))
    for t in np.linspace(0, 2 * math.pi, 10):
        # loss = (1 + cos t)/2
        assert hardness.parameter_shift_gradient(m1, [t], 0) == pytest.approx(-math.sin(t) / 2, abs=1e-12)
    m3 = hardness.CircuitModel(3, 2)
    th = rng.uniform(0, 2 * math.pi, m3.num_params)
    for i in range(m3.num_params):
        assert hardness.parameter_shift_gradient(m3, th, i) == pytest.approx(
            hardness.finite_difference_gradient(m3, th, i), abs=1e-8)
    with pytest.raises(ValueError):
        m3.loss(np.zeros(3))


def test_bp_gradient_variance_decreases_with_n(rng):
    means = []
    for n in range(2, 7):
        sampler = lambda r, n=n: hardness.CircuitModel(  # noqa: E731
            n, 1, O=qmath.PauliWeyl.from_label("Z" * n).dense(), post=ensembles.sample_haar(2**n, r))
        rep = hardness.bp_probe(sampler, 0.1, 150, rng, audit=2)
        assert rep.audit_max_error < 1e-8
        means.append(float(np.mean(rep.gradient_variance)))
    assert all(a > b for a, b in zip(means, means[1:]))
    assert rep.csv_row()["n"] == 6 and json.dumps(rep.to_dict())


def test_random_init_expected_variance(rng):
    N = 8
    single = hardness.random_init_expected_variance([hardness.local_pauli(3, 0)], 1.0, N, 500, rng)
    assert single.estimate == pytest.approx(0, abs=1e-20)
    fam = [hardness.local_pauli(3, 0, "Z"), hardness.local_pauli(3, 0, "X")]
    r = hardness.random_init_expected_variance(fam, 1.0, N, 4000, rng)
    assert r.passed and r.analytic_bound == pytest.approx(1 / 9)
    with pytest.raises(ValueError):
        hardness.random_init_expected_variance([np.eye(N)], 1.0, N, 10, rng)


def test_data_reupload_smoke(rng):
    r = hardness.data_reupload_variance(3, 2, samples=100, rng=rng)
    assert r.analytic_bound == math.inf and 0 <= r.estimate <= 1 and r.passed


def test_report_serialization(rng):
    reps = [hardness.state_variance(UnitaryEnsemble.haar(4), hardness.local_pauli(2, 0), 1, 200, rng)]
    rows = list(csv.DictReader(io.StringIO(hardness.reports_to_csv(reps))))
    assert rows[0]["ensemble"] == "Haar" and rows[0]["pass"] == "True"
    assert json.loads(json.dumps(reps[0].to_dict()))["copies"] == 1
    with pytest.raises(ValueError):
        hardness.VarianceReport({}, "O", 1, 1, 0.1, -1.0, 1.0, "x", 1)
