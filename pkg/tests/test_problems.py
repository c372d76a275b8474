import math

import numpy as np
import pytest

from qsqlab import ensembles, problems, qmath
from qsqlab.problems import Estimate, EpsLearnSpec, LearningProblem, Measure


def _basis_problem(n):
    sources = list(range(2**n))
    return LearningProblem(Measure.uniform(sources), lambda s, t: s == t, targets=sources)


def test_triv_examples():
    assert problems.triv(_basis_problem(3)).value == pytest.approx(1 / 8)
    trivial = LearningProblem(Measure.uniform(range(4)), lambda s, t: True, targets=[0])
    assert problems.triv(trivial).value == 1
    P = _basis_problem(4)
    assert problems.triv(P).value == pytest.approx(problems.triv_by_enumeration(P))


def test_triv_sampled_agrees_with_exact(rng):
    P = _basis_problem(3)
    sampled = LearningProblem(Measure.from_sampler(lambda r, m: r.integers(8, size=m)),
                              lambda s, t: s == t, targets=list(range(8)))
    est = problems.triv(sampled, rng=rng, samples=20_000)
    # the max over targets biases upward by O(se); allow that
    assert abs(est.value - problems.triv(P).value) <= 5 * est.stderr


def test_frac_examples():
    mu = Measure.uniform(range(8))
    ev = lambda s, x: float(s == x)  # noqa: E731
    assert problems.frac(mu, lambda x: 0.0, 0.1, list(range(8)), ev).value == pytest.approx(1 / 8)
    assert problems.frac(mu, lambda x: 0.0, 1.0, list(range(8)), ev).value == 0
    with pytest.raises(ValueError):
        problems.frac(mu, lambda x: 0.0, 0.1, [], ev)


def test_qnt_via_variance():
    assert problems.qnt_via_variance(1 / 1025, 0.1) == pytest.approx(10.25)
    assert problems.qnt_via_variance(0.0, 0.1) == math.inf
    assert problems.qnt_via_variance(0.5, 0.0) == 0
    # a Monte Carlo variance is used at its upper end
    assert problems.qnt_via_variance(Estimate(0.01, 0.001), 0.1) == pytest.approx(0.01 / 0.013)


def test_bound_calculators():
    assert problems.deterministic_avg_lower_bound(0.9, 0.1, 0.01) == pytest.approx(80)
    assert problems.deterministic_avg_lower_bound(0.1, 0.5, 0.01) == 0
    assert problems.deterministic_avg_lower_bound(0.9, 0.1, 0.0) == math.inf
    n = 6
    assert problems.random_lower_bound_dec(1.0, 2.0**-n) == pytest.approx(2**n)
    assert problems.random_lower_bound_dec(0.5, 0.1) == 0
    assert problems.eps_learning_lower_bound(1.0, 1.0, 0.01, 0.0) == pytest.approx(99)
    assert problems.random_avg_lower_bound(0.9, 0.4, 1.0, 0.0, 0.1) == pytest.approx(5)
    with pytest.raises(ValueError):
        problems.random_avg_lower_bound(0.4, 0.5, 1.0, 0.0, 0.1)


def test_bounds_monotone():
    fr = [0.5, 0.1, 0.01, 0.001]
    vals = [problems.deterministic_avg_lower_bound(0.9, 0.1, f) for f in fr]
    assert vals == sorted(vals)
    vals = [problems.deterministic_avg_lower_bound(0.9, t, 0.01) for t in (0.0, 0.2, 0.5)]
    assert vals == sorted(vals, reverse=True)


def test_selflearn_basis_report():
    r = problems.selflearn_basis_report(10)
    assert r.lower_bound_value == pytest.approx(1023)
    assert r.qnt_lower == 1024
    assert '"bound_name": "deterministic_avg"' in r.to_json()
    with pytest.raises(ValueError):
        problems.BoundReport(1.5, 0.1, 1, 1, "x")


def test_alpha_probable_sources():
    P = _basis_problem(2)
    assert problems.alpha_probable_sources(P, {0: 0.6, 1: 0.4}, 0.5) == [0]
    assert problems.alpha_probable_sources(P, {0: 0.5, 1: 0.5}, 0.5) == [0, 1]


def test_eps_ball_mass_and_farfrom(rng):
    states = [qmath.PureState(s) for s in ensembles.stabilizer_states(2)[:16]]
    mu = Measure.uniform(states)
    m = problems.eps_ball_mass(mu, states[0], EpsLearnSpec(1e-6))
    assert m.value >= 1 / 16 and m.exact
    assert problems.eps_ball_mass(mu, states[0], EpsLearnSpec(1.0), strict=False).value == 1
    pool = [qmath.Observable(qmath.PauliWeyl.from_label(l).dense()) for l in ("ZI", "IZ", "XX", "ZZ")]
    for x in states[:4]:
        for z in states[4:8]:
            r = problems.farfrom_check(mu, x, z, 0.3, 0.1, pool)
            assert r["holds"]


def test_restricted_distance():
    z0, z1 = qmath.ket([0]), qmath.ket([1])
    assert problems.restricted_distance(z0, z1, [qmath.Z]) == pytest.approx(1)
    assert problems.restricted_distance(z0, z1, [qmath.X]) == pytest.approx(0)
    spec = EpsLearnSpec(0.1, "restricted", [qmath.X])
    assert spec.d(z0, z1) == pytest.approx(0)
    with pytest.raises(ValueError):
        EpsLearnSpec(0.1, "restricted")


def test_boost_identity_and_amplification(rng):
    def base():
        return 0 if rng.uniform() < 0.7 else int(rng.integers(1, 4))

    single = problems.boost(lambda: 7, 1, [7], lambda s, t: s == t)()
    assert single.output == 7 and single.success
    b = problems.boost_repetitions(0.2, 0.05)
    assert b == math.ceil(math.log(20) / 0.08)
    learner = problems.boost(base, b, [0, 1, 2, 3], lambda s, t: s == t)
    wins = [learner().output == 0 for _ in range(300)]
    assert np.mean(wins) >= 0.95
    with pytest.raises(ValueError):
        problems.boost(base, 0, [0], lambda s, t: True)


def test_boost_counts_queries():
    r = problems.boost(lambda: (1, 3), 5, [1], lambda s, t: s == t)()
    assert r.queries == 15 and r.output == 1


def test_metric_variance_and_chebyshev(rng):
    assert problems.metric_variance([0, 1], weights=[0.5, 0.5]) == pytest.approx(0.25)
    x = rng.normal(size=1000)
    assert problems.metric_variance(list(x)) == pytest.approx(np.var(x, ddof=1), rel=1e-9)
    r = problems.metric_chebyshev_check(list(rng.uniform(size=500)), 0.3)
    assert r["holds"] and r["tail"] <= r["bound"]
    with pytest.raises(ValueError):
        problems.metric_variance([1.0])
