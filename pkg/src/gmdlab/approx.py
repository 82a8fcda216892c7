"""Randomized approximation algorithms.

* quarter algorithms: price/label each vertex 0 with probability 1/2, then
  give every remaining vertex its greedy best response against the zero set.
  Expected value is at least Opt/4 for both problems.
* LP rounding: given per-vertex marginal distributions (typically from the
  2-round Sherali-Adams optimum), label v zero with probability
  (1 + x_v(0))/2 and i != 0 with probability x_v(i)/2.  The per-edge success
  probability ((1+x_u(0))/2)(x_v(t)/2) is at least c/4 + c^2/4 whenever the
  pairwise mass c on the satisfying assignment is at most both marginals,
  which lifts the guarantee to 1/4 + 1/(16T) on normalized instances.

Randomness is counter-based (see rng.py): trial k of master seed s uses
substream(s, k), so batch results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .core import (
    GmdInstance,
    GpInstance,
    InstanceError,
    Labeling,
    Pricing,
    val_gmd,
    val_gp,
)
from .rng import substream


def gp_price_completion(inst: GpInstance, zero: Sequence[bool]) -> Pricing:
    """Best response to a fixed zero set: each non-zero vertex takes the
    profit-maximizing price against its zero neighbors.

    The profit of v as a function of its price is piecewise linear with
    breakpoints at the incident budgets, so those budgets are the only
    candidates; ties break to the smallest price, no zero neighbor means 0.
    """
    candidates: list[set] = [set() for _ in range(inst.n)]
    for e in inst.edges:
        if zero[e.u] and not zero[e.v]:
            candidates[e.v].add(e.budget)
        if zero[e.v] and not zero[e.u]:
            candidates[e.u].add(e.budget)
    prices = []
    for v in range(inst.n):
        if zero[v] or not candidates[v]:
            prices.append(Fraction(0))
            continue
        best_q, best_profit = Fraction(0), Fraction(0)
        for q in sorted(candidates[v]):
            profit = Fraction(0)
            for e in inst.edges:
                if e.u == v and zero[e.v] or e.v == v and zero[e.u]:
                    if q <= e.budget:
                        profit += e.weight * q
            if profit > best_profit:
                best_q, best_profit = q, profit
        prices.append(best_q)
    return Pricing(tuple(prices))


def gmd_label_completion(inst: GmdInstance, zero: Sequence[bool]) -> Labeling:
    """Zero on the zero set, greedy best label against it elsewhere."""
    gain: dict[tuple[int, int], Fraction] = {}
    for a in inst.arcs:
        if zero[a.tail] and not zero[a.head]:
            key = (a.head, a.label)
            gain[key] = gain.get(key, Fraction(0)) + a.weight
    values = []
    for v in range(inst.n):
        if zero[v]:
            values.append(0)
            continue
        best_label, best_gain = 1, Fraction(0)
        for t in range(1, inst.T + 1):
            g = gain.get((v, t), Fraction(0))
            if g > best_gain:
                best_label, best_gain = t, g
        values.append(best_label)
    return Labeling(tuple(values))


def approx_gp_quarter(inst: GpInstance, seed: int, trial: int = 0) -> tuple[Pricing, Fraction]:
    """One run of the combinatorial quarter algorithm for pricing."""
    rng = substream(seed, trial)
    zero = rng.integers(0, 2, size=inst.n) == 0
    pricing = gp_price_completion(inst, zero)
    return pricing, val_gp(inst, pricing)


def approx_gmd_quarter(inst: GmdInstance, seed: int, trial: int = 0) -> tuple[Labeling, Fraction]:
    """One run of the combinatorial quarter algorithm for max-dicut."""
    rng = substream(seed, trial)
    zero = rng.integers(0, 2, size=inst.n) == 0
    lab = gmd_label_completion(inst, zero)
    return lab, val_gmd(inst, lab)


def quarter_expectation_gmd(inst: GmdInstance) -> Fraction:
    """Exact expectation of the quarter algorithm over all coin patterns."""
    total = Fraction(0)
    for mask in range(1 << inst.n):
        zero = [bool(mask >> v & 1) for v in range(inst.n)]
        total += val_gmd(inst, gmd_label_completion(inst, zero))
    return total / (1 << inst.n)


def quarter_expectation_gp(inst: GpInstance) -> Fraction:
    """Exact expectation of the quarter algorithm over all coin patterns."""
    total = Fraction(0)
    for mask in range(1 << inst.n):
        zero = [bool(mask >> v & 1) for v in range(inst.n)]
        total += val_gp(inst, gp_price_completion(inst, zero))
    return total / (1 << inst.n)


def _check_marginals(inst: GmdInstance, marginals: Sequence[Sequence[Fraction]]):
    if len(marginals) != inst.n:
        raise InstanceError("need one marginal distribution per vertex")
    for v, dist in enumerate(marginals):
        if len(dist) != inst.T + 1:
            raise InstanceError(f"marginal at vertex {v} has wrong domain size")
        if any(p < 0 for p in dist) or sum(dist) != 1:
            raise InstanceError(f"marginal at vertex {v} is not a distribution")


def lp_round_expectation(inst: GmdInstance, marginals: Sequence[Sequence[Fraction]]) -> Fraction:
    """Closed-form expected value of the LP rounding, exact."""
    _check_marginals(inst, marginals)
    total = Fraction(0)
    for a in inst.arcs:
        total += (
            a.weight
            * (1 + marginals[a.tail][0])
            * marginals[a.head][a.label]
            / 4
        )
    return total


def lp_round_gmd(
    inst: GmdInstance,
    marginals: Sequence[Sequence[Fraction]],
    seed: int,
    trial: int = 0,
) -> tuple[Labeling, Fraction, Fraction]:
    """Sample the LP rounding once; also return its exact expectation."""
    _check_marginals(inst, marginals)
    rng = substream(seed, trial)
    u = rng.random(inst.n)
    values = []
    for v in range(inst.n):
        # thresholds (1+x0)/2, then x_i/2 slices of the remaining mass
        cut = float((1 + marginals[v][0]) / 2)
        if u[v] < cut:
            values.append(0)
            continue
        rest = float(u[v]) - cut
        chosen = inst.T
        acc = 0.0
        for i in range(1, inst.T + 1):
            acc += float(marginals[v][i] / 2)
            if rest < acc:
                chosen = i
                break
        values.append(chosen)
    lab = Labeling(tuple(values))
    return lab, val_gmd(inst, lab), lp_round_expectation(inst, marginals)


@dataclass(frozen=True)
class RandomizedRun:
    """Seeded batch of trials with exact per-trial values."""

    seed: int
    trials: int
    values: tuple[Fraction, ...]

    @property
    def mean(self) -> float:
        return sum(float(v) for v in self.values) / self.trials

    @property
    def stddev(self) -> float:
        if self.trials < 2:
            return 0.0
        m = self.mean
        var = sum((float(v) - m) ** 2 for v in self.values) / (self.trials - 1)
        return math.sqrt(var)

    @property
    def stderr(self) -> float:
        return self.stddev / math.sqrt(self.trials)

    @property
    def exact_mean(self) -> Fraction:
        return sum(self.values, Fraction(0)) / self.trials


def run_trials(
    algorithm: Callable[..., tuple],
    inst,
    trials: int,
    seed: int,
    **kwargs,
) -> RandomizedRun:
    """Run `algorithm(inst, seed, trial=k, **kwargs)` for k = 0..trials-1."""
    values = []
    for k in range(trials):
        out = algorithm(inst, seed=seed, trial=k, **kwargs)
        values.append(out[1])
    return RandomizedRun(seed=seed, trials=trials, values=tuple(values))
