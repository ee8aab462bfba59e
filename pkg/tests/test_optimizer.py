import numpy as np
import pytest

from ballsgd.errors import InvalidArgument, NonFinite
from ballsgd.hyperparams import manual_schedule
from ballsgd.noise import NoiseSampler
from ballsgd.optimizer import (BUDGET_EXHAUSTED, CONVERGED, EpisodeRecord,
                               RunResult, RunTrace, descent_threshold,
                               episode_descent_report, run_ball_sgd,
                               run_noise_scheduled_sgd, sgd_step)
from ballsgd.problems import (StochasticOracle, make_quadratic,
                              make_quartic_saddle)

QUARTIC = make_quartic_saddle(2)
PRACTICAL = manual_schedule(QUARTIC.constants, eta=0.01, ball_radius=0.5,
                            k0=3000, ko=400, epsilon=6e-5, p=0.1)


def ball_noise(sigma, dim=2):
    return NoiseSampler("uniform-ball", sigma, dim)


def test_sgd_step_fixed_point():
    obj = make_quadratic(np.zeros((2, 2)), np.zeros(2))
    oracle = StochasticOracle(obj, ball_noise(0.0))
    x = np.array([1.0, 2.0])
    assert np.array_equal(sgd_step(x, oracle, 0.5), x)


def test_sgd_step_linear_contraction():
    obj = make_quadratic(np.eye(2), np.zeros(2))
    oracle = StochasticOracle(obj, ball_noise(0.0))
    out = sgd_step(np.array([1.0, 0.0]), oracle, 0.1)
    assert np.allclose(out, [0.9, 0.0])


def test_sgd_step_zero_eta_is_identity():
    obj = make_quartic_saddle(2)
    oracle = StochasticOracle(obj, ball_noise(0.0))
    x = np.array([0.3, -0.1])
    assert np.array_equal(sgd_step(x, oracle, 0.0), x)
    with pytest.raises(InvalidArgument):
        sgd_step(x, oracle, -0.1)


def test_sgd_step_counts_one_gradient():
    obj = make_quartic_saddle(2)
    oracle = StochasticOracle(obj, ball_noise(1.0))
    sgd_step(np.zeros(2), oracle, 0.01)
    assert oracle.samples_drawn == 1


def test_sgd_step_detects_divergence():
    obj = make_quadratic(np.eye(2), np.zeros(2))
    oracle = StochasticOracle(obj, ball_noise(0.0))
    with np.errstate(over="ignore"), pytest.raises(NonFinite):
        sgd_step(np.array([1e300, 0.0]), oracle, 1e300)


def test_local_minimum_with_zero_noise_converges_to_itself():
    x_init = QUARTIC.minimizer()
    result = run_ball_sgd(QUARTIC, ball_noise(0.0), PRACTICAL, x_init,
                          seed=0, budget_mode="unlimited-episodes")
    assert result.terminated == CONVERGED
    assert result.trace.total_steps == PRACTICAL.k0
    assert result.trace.exits == 0
    assert np.allclose(result.trace.output, x_init, atol=1e-12)


def test_convex_quadratic_monotone_descent():
    obj = make_quadratic(np.eye(2), np.zeros(2), sigma=0.0)
    sched = manual_schedule(obj.constants, eta=0.1, ball_radius=5.0,
                            k0=200, ko=100, epsilon=0.01)
    result = run_ball_sgd(obj, ball_noise(0.0), sched,
                          np.array([3.0, -4.0]), seed=0,
                          budget_mode="unlimited-episodes",
                          store_iterates=True)
    assert result.terminated == CONVERGED
    values = [obj.value(np.asarray(x))
              for x in result.trace.episodes[-1].iterates]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_episode_ball_invariants():
    result = run_ball_sgd(QUARTIC, ball_noise(1.0), PRACTICAL, np.zeros(2),
                          seed=3, budget_mode="unlimited-episodes",
                          store_iterates=True)
    assert result.trace.exits >= 1
    for episode in result.trace.episodes:
        xs = np.asarray(episode.iterates)
        dists = np.linalg.norm(xs - episode.anchor, axis=1)
        if episode.exited:
            assert dists[-1] > PRACTICAL.ball_radius
            assert np.all(dists[:-1] <= PRACTICAL.ball_radius)
        else:
            assert np.all(dists[:-1] <= PRACTICAL.ball_radius)


def test_converged_output_is_mean_of_final_episode():
    result = run_ball_sgd(QUARTIC, ball_noise(1.0), PRACTICAL, np.zeros(2),
                          seed=4, budget_mode="unlimited-episodes",
                          store_iterates=True)
    assert result.terminated == CONVERGED
    final = result.trace.episodes[-1]
    xs = np.asarray(final.iterates)[:PRACTICAL.k0]
    assert np.max(np.abs(xs.mean(axis=0) - result.trace.output)) <= 1e-12


def test_run_determinism():
    a = run_ball_sgd(QUARTIC, ball_noise(1.0), PRACTICAL, np.zeros(2),
                     seed=5, budget_mode="unlimited-episodes")
    b = run_ball_sgd(QUARTIC, ball_noise(1.0), PRACTICAL, np.zeros(2),
                     seed=5, budget_mode="unlimited-episodes")
    assert a.to_dict() == b.to_dict()
    assert np.array_equal(a.trace.output, b.trace.output)


def test_sg_cost_equals_total_steps():
    result = run_ball_sgd(QUARTIC, ball_noise(1.0), PRACTICAL, np.zeros(2),
                          seed=6, budget_mode="unlimited-episodes")
    assert result.trace.sg_cost == result.trace.total_steps


def test_budget_mode_caps_total_steps():
    result = run_ball_sgd(QUARTIC, ball_noise(1.0), PRACTICAL, np.zeros(2),
                          seed=7, budget_mode="unlimited-episodes",
                          max_steps=50)
    assert result.terminated == BUDGET_EXHAUSTED
    assert result.trace.total_steps == 50


def test_invalid_budget_mode():
    with pytest.raises(InvalidArgument):
        run_ball_sgd(QUARTIC, ball_noise(1.0), PRACTICAL, np.zeros(2),
                     seed=0, budget_mode="bogus")


def test_noise_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        run_ball_sgd(QUARTIC, ball_noise(1.0, dim=3), PRACTICAL,
                     np.zeros(2), seed=0)


def test_injection_only_at_episode_start_when_ko_exceeds_k0():
    sched = manual_schedule(QUARTIC.constants, eta=0.01, ball_radius=0.5,
                            k0=300, ko=1000, epsilon=6e-5)
    result = run_noise_scheduled_sgd(QUARTIC, ball_noise(1.0), sched,
                                     np.zeros(2), seed=8,
                                     budget_mode="unlimited-episodes")
    expected = sum(1 + (e.length - 1) // sched.ko
                   for e in result.trace.episodes if e.length >= 1)
    assert result.trace.injections == expected
    short = [e for e in result.trace.episodes if e.length <= sched.ko]
    # every episode no longer than ko contributes exactly its k=0 injection
    assert len(short) <= result.trace.injections


def test_injection_count_bookkeeping():
    result = run_noise_scheduled_sgd(QUARTIC, ball_noise(1.0), PRACTICAL,
                                     np.zeros(2), seed=9,
                                     budget_mode="unlimited-episodes",
                                     store_iterates=True)
    expected = sum(1 + (e.length - 1) // PRACTICAL.ko
                   for e in result.trace.episodes if e.length >= 1)
    assert result.trace.injections == expected


def test_noise_scheduled_escapes_without_base_noise():
    escapes = 0
    for seed in range(30):
        result = run_noise_scheduled_sgd(QUARTIC, ball_noise(0.0), PRACTICAL,
                                         np.zeros(2), seed=seed,
                                         budget_mode="unlimited-episodes",
                                         max_episodes=1,
                                         max_steps=PRACTICAL.k0)
        escapes += result.trace.exits >= 1
    assert escapes >= 27


def test_descent_threshold_formula():
    expected = PRACTICAL.ball_radius ** 2 / (7.0 * PRACTICAL.eta
                                             * PRACTICAL.k0)
    assert descent_threshold(PRACTICAL) == pytest.approx(expected)


def test_descent_report_vacuous_without_exits():
    result = run_ball_sgd(QUARTIC, ball_noise(0.0), PRACTICAL,
                          QUARTIC.minimizer(), seed=0,
                          budget_mode="unlimited-episodes")
    report = episode_descent_report(result)
    assert report.entries == ()
    assert report.pass_fraction == 1.0


def test_descent_report_flags_forced_failure():
    trace = RunTrace()
    trace.episodes.append(EpisodeRecord(
        index=0, start_step=0, anchor=np.zeros(2), length=10,
        f_anchor=1.0, f_end=1.0 - 1e-9, exited=True))
    result = RunResult(trace=trace, terminated=BUDGET_EXHAUSTED,
                       schedule=PRACTICAL, seed=0)
    report = episode_descent_report(result)
    assert len(report.entries) == 1
    assert not report.entries[0].passed
    assert report.pass_fraction == 0.0
