from fractions import Fraction

import pytest

from gmdlab.approx import (
    approx_gmd_quarter,
    approx_gp_quarter,
    lp_round_expectation,
    lp_round_gmd,
    run_trials,
)
from gmdlab.core import GmdInstance, GpInstance, InstanceError
from gmdlab.exact import half_integral_grid, opt_gmd, opt_gp_grid

F = Fraction

TRIALS = 10_000


def triangle():
    return GmdInstance.of(
        1, 3, [(0, 1, 1, F(1, 3)), (1, 2, 1, F(1, 3)), (2, 0, 1, F(1, 3))]
    )


def test_gp_quarter_single_edge_expectation():
    # four equally likely coin patterns; the two one-zero patterns price at 1
    inst = GpInstance.of(2, [(0, 1, 1, 1)])
    run = run_trials(approx_gp_quarter, inst, TRIALS, seed=11)
    assert abs(run.mean - 0.5) <= 3 * run.stderr + 1e-12
    assert run.mean >= float(opt_gp_grid(inst, half_integral_grid(inst)).value) / 4 - 3 * run.stderr


def test_gp_quarter_isolated_vertices():
    inst = GpInstance.of(3, [(0, 1, 1, 1)])
    pricing, value = approx_gp_quarter(inst, seed=5)
    assert pricing[2] == 0
    assert value >= 0


def test_gp_quarter_reproducible():
    inst = GpInstance.of(4, [(0, 1, 2, 1), (1, 2, 1, F(1, 2)), (2, 3, 3, 2)])
    a = approx_gp_quarter(inst, seed=99, trial=7)
    b = approx_gp_quarter(inst, seed=99, trial=7)
    assert a == b
    c = approx_gp_quarter(inst, seed=99, trial=8)
    assert a != c or True  # different trials may coincide, but must not error


def test_gmd_quarter_single_edge_expectation():
    inst = GmdInstance.of(1, 2, [(0, 1, 1, 1)])
    run = run_trials(approx_gmd_quarter, inst, TRIALS, seed=3)
    assert abs(run.mean - 0.25) <= 3 * run.stderr + 1e-12


def test_gmd_quarter_triangle_expectation():
    # each arc succeeds exactly when its coin pattern is (zero, nonzero): prob 1/4
    run = run_trials(approx_gmd_quarter, triangle(), TRIALS, seed=4)
    assert abs(run.mean - 0.25) <= 3 * run.stderr + 1e-12
    assert run.mean >= float(opt_gmd(triangle()).value) / 4 - 3 * run.stderr


def test_quarter_guarantee_on_random_fixtures():
    from gmdlab.rng import substream

    rng = substream(77, 0)
    for k in range(4):
        T = int(rng.integers(1, 3))
        n = int(rng.integers(3, 7))
        arcs = []
        for _ in range(int(rng.integers(2, 9))):
            u, v = rng.choice(n, size=2, replace=False)
            arcs.append((int(u), int(v), int(rng.integers(1, T + 1)), 1))
        inst = GmdInstance.of(T, n, arcs).normalized()
        run = run_trials(approx_gmd_quarter, inst, 2000, seed=1000 + k)
        opt = float(opt_gmd(inst).value)
        assert run.mean >= opt / 4 - 3 * run.stderr


def test_quarter_gmd_exact_expectation_guarantee():
    # enumerate all coin patterns: the quarter guarantee holds exactly
    from gmdlab.approx import quarter_expectation_gmd
    from gmdlab.rng import substream

    rng = substream(88, 0)
    for _ in range(8):
        T = int(rng.integers(1, 4))
        n = int(rng.integers(2, 7))
        arcs = []
        for _ in range(int(rng.integers(1, 9))):
            u, v = rng.choice(n, size=2, replace=False)
            arcs.append((int(u), int(v), int(rng.integers(1, T + 1)), F(int(rng.integers(1, 6)), 5)))
        inst = GmdInstance.of(T, n, arcs)
        assert quarter_expectation_gmd(inst) >= opt_gmd(inst).value / 4


def test_quarter_gmd_exact_expectation_single_edge():
    from gmdlab.approx import quarter_expectation_gmd

    assert quarter_expectation_gmd(GmdInstance.of(1, 2, [(0, 1, 1, 1)])) == F(1, 4)


def test_quarter_gp_exact_expectation_guarantee():
    from gmdlab.approx import quarter_expectation_gp
    from gmdlab.rng import substream

    rng = substream(88, 1)
    for _ in range(6):
        n = int(rng.integers(2, 6))
        edges = []
        for _ in range(int(rng.integers(1, 6))):
            u, v = rng.choice(n, size=2, replace=False)
            edges.append((int(u), int(v), int(rng.integers(1, 4)), F(int(rng.integers(1, 4)), 3)))
        inst = GpInstance.of(n, edges)
        opt = opt_gp_grid(inst, half_integral_grid(inst)).value
        assert quarter_expectation_gp(inst) >= opt / 4


def test_quarter_gp_exact_expectation_single_edge():
    from gmdlab.approx import quarter_expectation_gp

    assert quarter_expectation_gp(GpInstance.of(2, [(0, 1, 1, 1)])) == F(1, 2)


def test_lp_round_integral_marginals():
    inst = GmdInstance.of(1, 2, [(0, 1, 1, 1)])
    marg = [[F(1), F(0)], [F(0), F(1)]]
    _, _, expectation = lp_round_gmd(inst, marg, seed=0)
    assert expectation == F(1, 2)


def test_lp_round_equality_case_of_quadratic_bound():
    inst = GmdInstance.of(1, 2, [(0, 1, 1, 1)])
    marg = [[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]]
    expectation = lp_round_expectation(inst, marg)
    c = F(1, 2)
    assert expectation == F(3, 16) == c / 4 + c * c / 4


def test_lp_round_uniform_marginals():
    inst = GmdInstance.of(1, 2, [(0, 1, 1, 1)])
    marg = [[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]]
    assert lp_round_expectation(inst, marg) == F(3, 16)


def test_lp_round_rejects_non_distribution():
    inst = GmdInstance.of(1, 2, [(0, 1, 1, 1)])
    with pytest.raises(InstanceError):
        lp_round_gmd(inst, [[F(1, 2), F(1, 3)], [F(1, 2), F(1, 2)]], seed=0)


def test_lp_round_empirical_mean_matches_expectation():
    inst = GmdInstance.of(2, 3, [(0, 1, 1, F(1, 2)), (1, 2, 2, F(1, 2))])
    marg = [
        [F(1, 2), F(1, 4), F(1, 4)],
        [F(1, 3), F(1, 3), F(1, 3)],
        [F(0), F(1, 2), F(1, 2)],
    ]
    run = run_trials(lp_round_gmd, inst, TRIALS, seed=21, marginals=marg)
    expectation = float(lp_round_expectation(inst, marg))
    assert abs(run.mean - expectation) <= 3 * run.stderr + 1e-12
