from fractions import Fraction

import pytest

from gmdlab.simplex import LpInfeasible, simplex_max

F = Fraction


def test_tiny_lp_by_hand():
    # max x0 + 2 x1  s.t. x0 + x1 + s = 1  ->  optimum at x1 = 1
    value, x = simplex_max(
        [F(1), F(2), F(0)],
        [[(0, F(1)), (1, F(1)), (2, F(1))]],
        [F(1)],
    )
    assert value == 2
    assert x == [0, 1, 0]


def test_degenerate_and_redundant_rows():
    rows = [
        [(0, F(1)), (1, F(1))],
        [(0, F(2)), (1, F(2))],  # scalar multiple of the first
    ]
    value, x = simplex_max([F(3), F(1)], rows, [F(1), F(2)])
    assert value == 3
    assert x[0] == 1 and x[1] == 0


def test_infeasible_detected():
    rows = [[(0, F(1))], [(0, F(1))]]
    with pytest.raises(LpInfeasible):
        simplex_max([F(1)], rows, [F(1), F(2)])


def test_negative_rhs_normalized():
    # -x0 = -3/4 is x0 = 3/4
    value, x = simplex_max([F(5)], [[(0, F(-1))]], [F(-3, 4)])
    assert x == [F(3, 4)]
    assert value == F(15, 4)


def test_fractional_vertex_solution_exact():
    # max x0 + x1 with x0 + 2 x1 = 1 and 2 x0 + x1 = 1: vertex (1/3, 1/3)
    rows = [
        [(0, F(1)), (1, F(2))],
        [(0, F(2)), (1, F(1))],
    ]
    value, x = simplex_max([F(1), F(1)], rows, [F(1), F(1)])
    assert x == [F(1, 3), F(1, 3)]
    assert value == F(2, 3)
