"""Exact optimum oracles used as ground truth by every other module.

Max-dicut optima come from zero-set enumeration: once the set of vertices
labeled 0 is fixed, the best completion assigns each remaining vertex the
label with maximum incoming weight from the zero set, independently per
vertex.  That turns (T+1)^n enumeration into 2^n * m.

Pricing optima come from candidate-grid enumeration.  On the half-integral
grid {0, 1/2, ..., B} with integer budgets the grid value is the true
optimum (a half-integral optimal pricing always exists); on other grids it
is a certified lower bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .caps import Caps
from .core import (
    CapExceeded,
    GmdInstance,
    GpInstance,
    InstanceError,
    Labeling,
    Pricing,
    val_gmd,
    val_gp,
)


@dataclass(frozen=True)
class OptResult:
    value: Fraction
    witness: Union[Labeling, Pricing]
    explored: int


def greedy_completion(inst: GmdInstance, zero_set: frozenset[int] | set[int]) -> Labeling:
    """Optimal labeling among those assigning 0 exactly on `zero_set`.

    Vertices outside the zero set get the label in 1..T with maximum weight
    of incoming arcs from the zero set, ties broken by smallest label; with
    no zero in-neighbor that is label 1.
    """
    zero_set = frozenset(zero_set)
    for v in zero_set:
        if not (0 <= v < inst.n):
            raise InstanceError(f"zero-set vertex {v} out of range")
    gain: dict[tuple[int, int], Fraction] = {}
    for a in inst.arcs:
        if a.tail in zero_set and a.head not in zero_set:
            key = (a.head, a.label)
            gain[key] = gain.get(key, Fraction(0)) + a.weight
    values = []
    for v in range(inst.n):
        if v in zero_set:
            values.append(0)
            continue
        best_label, best_gain = 1, Fraction(0)
        for t in range(1, inst.T + 1):
            g = gain.get((v, t), Fraction(0))
            if g > best_gain:
                best_label, best_gain = t, g
        values.append(best_label)
    return Labeling(tuple(values))


def opt_gmd(inst: GmdInstance, caps: Caps = Caps()) -> OptResult:
    """Exact max-dicut optimum by zero-set enumeration (2^n * m).

    Weights are rescaled by their common denominator to exact int64 numpy
    arithmetic when they fit; otherwise a pure-Python Fraction sweep runs.
    Either way the returned value is exact and the winning zero set is the
    smallest mask achieving it.
    """
    import math as _math

    n = inst.n
    if n > caps.opt_gmd_n:
        raise CapExceeded(f"opt_gmd: n={n} exceeds cap {caps.opt_gmd_n}")
    if not inst.arcs:
        return OptResult(
            value=Fraction(0), witness=greedy_completion(inst, set()), explored=1
        )
    denom = _math.lcm(*(a.weight.denominator for a in inst.arcs))
    scaled = [int(a.weight * denom) for a in inst.arcs]
    if n >= 12 and sum(scaled) < 2**62:
        best_val, best_mask = _opt_gmd_vectorized(inst, scaled, denom)
    else:
        best_val, best_mask = _opt_gmd_python(inst)
    witness = greedy_completion(inst, {v for v in range(n) if best_mask >> v & 1})
    assert val_gmd(inst, witness) == best_val
    return OptResult(value=best_val, witness=witness, explored=1 << n)


def _opt_gmd_python(inst: GmdInstance) -> tuple[Fraction, int]:
    arcs = [(1 << a.tail, 1 << a.head, a.head, a.label, a.weight) for a in inst.arcs]
    best_val = Fraction(0)
    best_mask = 0
    for mask in range(1 << inst.n):
        gain: dict[tuple[int, int], Fraction] = {}
        for tail_bit, head_bit, head, label, w in arcs:
            if (mask & tail_bit) and not (mask & head_bit):
                key = (head, label)
                g = gain.get(key)
                gain[key] = w if g is None else g + w
        per_head: dict[int, Fraction] = {}
        for (head, _), g in gain.items():
            if g > per_head.get(head, Fraction(-1)):
                per_head[head] = g
        val = sum(per_head.values(), Fraction(0))
        if val > best_val:
            best_val, best_mask = val, mask
    return best_val, best_mask


def _opt_gmd_vectorized(inst: GmdInstance, scaled: list[int], denom: int) -> tuple[Fraction, int]:
    import numpy as np

    n = inst.n
    by_head: dict[int, dict[int, list[tuple[int, int]]]] = {}
    for a, w in zip(inst.arcs, scaled):
        by_head.setdefault(a.head, {}).setdefault(a.label, []).append((a.tail, w))

    best_val = 0
    best_mask = 0
    chunk_bits = min(n, 20)
    for start in range(0, 1 << n, 1 << chunk_bits):
        masks = np.arange(start, start + (1 << chunk_bits), dtype=np.int64)
        total = np.zeros(masks.shape, dtype=np.int64)
        for head, by_label in by_head.items():
            head_out = ((masks >> head) & 1) ^ 1
            best_gain = None
            for tails in by_label.values():
                gain = np.zeros(masks.shape, dtype=np.int64)
                for tail, w in tails:
                    gain += ((masks >> tail) & 1) * w
                best_gain = gain if best_gain is None else np.maximum(best_gain, gain)
            total += head_out * best_gain
        i = int(np.argmax(total))
        if int(total[i]) > best_val:
            best_val = int(total[i])
            best_mask = start + i
    return Fraction(best_val, denom), best_mask


def opt_gmd_bruteforce(inst: GmdInstance, caps: Caps = Caps()) -> OptResult:
    """Independent oracle: full enumeration of all (T+1)^n labelings."""
    states = (inst.T + 1) ** inst.n
    if states > caps.brute_states:
        raise CapExceeded(f"brute force: {states} labelings exceed cap {caps.brute_states}")
    best_val = Fraction(0)
    best: tuple[int, ...] = tuple([0] * inst.n)
    arcs = inst.arcs
    for assignment in itertools.product(range(inst.T + 1), repeat=inst.n):
        val = Fraction(0)
        for a in arcs:
            if assignment[a.tail] == 0 and assignment[a.head] == a.label:
                val += a.weight
        if val > best_val:
            best_val, best = val, assignment
    return OptResult(value=best_val, witness=Labeling(best), explored=states)


def half_integral_grid(inst: GpInstance) -> list[list[Fraction]]:
    """Per-vertex candidates {0, 1/2, ..., B_v} where B_v caps incident budgets.

    Exact for integer budgets; for fractional budgets the grid is still legal
    input but the result is only a lower bound on the optimum.
    """
    bound = [Fraction(0)] * inst.n
    for e in inst.edges:
        bound[e.u] = max(bound[e.u], e.budget)
        bound[e.v] = max(bound[e.v], e.budget)
    grids = []
    for v in range(inst.n):
        top = 2 * bound[v]
        grids.append([Fraction(k, 2) for k in range(int(top) + 1)])
    return grids


def opt_gp_grid(
    inst: GpInstance,
    candidates: Sequence[Sequence[Fraction]],
    caps: Caps = Caps(),
) -> OptResult:
    """Exact maximum of the pricing value over the candidate grid."""
    if len(candidates) != inst.n:
        raise InstanceError("need one candidate list per vertex")
    points = 1
    for cand in candidates:
        if not cand:
            raise InstanceError("empty candidate list")
        for p in cand:
            if p < 0:
                raise InstanceError(f"negative candidate price {p}")
        points *= len(cand)
    if points > caps.gp_grid_points:
        raise CapExceeded(f"grid has {points} points, cap {caps.gp_grid_points}")

    # Per-edge payoff table over candidate index pairs avoids re-walking the
    # edge list's Fractions for every grid point.
    tables = []
    for e in inst.edges:
        cu, cv = candidates[e.u], candidates[e.v]
        table = [
            [
                e.weight * (pu + pv) if pu + pv <= e.budget else Fraction(0)
                for pv in cv
            ]
            for pu in cu
        ]
        tables.append((e.u, e.v, table))

    best_val = Fraction(-1)
    best_point: tuple[int, ...] = ()
    for point in itertools.product(*(range(len(c)) for c in candidates)):
        val = Fraction(0)
        for u, v, table in tables:
            val += table[point[u]][point[v]]
        if val > best_val:
            best_val, best_point = val, point
    witness = Pricing(tuple(candidates[v][i] for v, i in enumerate(best_point)))
    assert val_gp(inst, witness) == best_val
    return OptResult(value=best_val, witness=witness, explored=points)
