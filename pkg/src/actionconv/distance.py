"""Truncated profile metric between two operators.

Paired mode evaluates the same test tuples on both operators (they must share
a space); the per-k value is the largest matched-pair LP distance, which by
the coupling bound is an upper-bound-flavoured estimate of the profile
Hausdorff distance.  Cross-search mode samples each side independently and
improves unmatched members by local search over the other operator's test
vectors; it carries no approximation guarantee.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SpaceMismatch, UsageError
from .measures import EmpiricalMeasure, lp_distance
from .operators import Operator
from .profiles import (SamplingBudget, StrategyKind, dedup_measures,
                       generate_tuples, measure_for_tuple)

_OPERATOR_DEPENDENT = (StrategyKind.SPECTRAL_COMBOS,)


@dataclass(frozen=True)
class DmEstimate:
    """Truncated sum over k of 2^-k times the per-k distance estimate."""

    value: float
    per_k: tuple
    k_max: int
    tail_bound: float
    mode: str

    def __post_init__(self):
        want = sum(2.0 ** (-k) * d for k, d in self.per_k)
        if abs(self.value - want) > 1e-12:
            raise UsageError("DmEstimate value inconsistent with per_k rows")
        if self.tail_bound != 2.0 ** (-self.k_max):
            raise UsageError("tail bound must be 2^-k_max")


def _paired_per_k(a: Operator, b: Operator, k: int,
                  budget: SamplingBudget) -> float:
    entries = generate_tuples(a, k, budget)
    if any(s in budget.strategies for s in _OPERATOR_DEPENDENT):
        dep = SamplingBudget(budget.vectors_per_k,
                             tuple(s for s in budget.strategies
                                   if s in _OPERATOR_DEPENDENT), budget.seed)
        entries += generate_tuples(b, k, dep, stream_tag=1)
    worst = 0.0
    for _, _, tup in entries:
        mu = measure_for_tuple(a, tup)
        nu = measure_for_tuple(b, tup)
        if mu.same_atoms(nu):
            continue
        worst = max(worst, lp_distance(mu, nu))
    return worst


def _greedy_match_tuple(target: EmpiricalMeasure, op: Operator,
                        k: int) -> np.ndarray:
    """Test tuple whose input block walks the target atoms, heaviest points
    against heaviest atoms in mass proportion; a cheap search start."""
    w = op.space.weights
    pt_order = np.argsort(-w, kind="stable")
    at_order = np.argsort(-target.masses, kind="stable")
    sorted_w = w[pt_order]
    cum_w = np.cumsum(sorted_w) - sorted_w / 2.0
    cum_mass = np.cumsum(target.masses[at_order])
    slot = np.searchsorted(cum_mass, np.clip(cum_w, 0.0, 1.0 - 1e-15),
                           side="right")
    slot = np.minimum(slot, target.size - 1)
    block = np.empty((op.size, k))
    block[pt_order] = target.points[at_order][slot, :k]
    return np.clip(block.T, -1.0, 1.0)


def _lloyd_match_tuple(target: EmpiricalMeasure, op: Operator, k: int,
                       start: np.ndarray, rounds: int = 6) -> np.ndarray:
    """Quantize the target's input block onto the space points: nearest-center
    assignment with mass-weighted recentering, seeded by `start`."""
    pts = target.points[:, :k]
    centers = start.T.copy()
    for _ in range(rounds):
        d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        nearest = d2.argmin(axis=1)
        for p in np.unique(nearest):
            sel = nearest == p
            centers[p] = np.average(pts[sel], axis=0,
                                    weights=target.masses[sel])
    return np.clip(centers.T, -1.0, 1.0)


def _local_search(target: EmpiricalMeasure, op: Operator, k: int,
                  start_val: float, rng: np.random.Generator,
                  iters: int) -> float:
    greedy = _greedy_match_tuple(target, op, k)
    best_tup, best = greedy, start_val
    for cand in (greedy, _lloyd_match_tuple(target, op, k, greedy)):
        val = lp_distance(measure_for_tuple(op, cand), target)
        if val < best:
            best_tup, best = cand, val
    step = 0.4
    n = op.size
    for _ in range(iters):
        mask = rng.random((k, n)) < 0.25
        cand = np.clip(best_tup + step * rng.standard_normal((k, n)) * mask,
                       -1.0, 1.0)
        v = lp_distance(measure_for_tuple(op, cand), target)
        if v < best:
            best_tup, best = cand, v
        else:
            step *= 0.85
            if step < 1e-3:
                break
    return best


def _cross_direction(xs, other_measures, other_op, k, rng,
                     refine_iters) -> float:
    worst = 0.0
    for x in xs:
        best = min(lp_distance(x, y) for y in other_measures)
        # refinement can only lower a value, so skip once it cannot move max
        if refine_iters > 0 and best > worst:
            best = min(best, _local_search(x, other_op, k, best, rng,
                                           refine_iters))
        worst = max(worst, best)
    return worst


def _cross_per_k(a: Operator, b: Operator, k: int, budget: SamplingBudget,
                 refine_iters: int) -> float:
    budget_a = SamplingBudget(budget.vectors_per_k, budget.strategies,
                              budget.seed)
    budget_b = SamplingBudget(budget.vectors_per_k, budget.strategies,
                              budget.seed + 0x9E3779B9)
    xs = dedup_measures([measure_for_tuple(a, t)
                         for _, _, t in generate_tuples(a, k, budget_a)])
    ys = dedup_measures([measure_for_tuple(b, t)
                         for _, _, t in generate_tuples(b, k, budget_b)])
    rng_ab = np.random.default_rng((budget.seed, k, 0))
    rng_ba = np.random.default_rng((budget.seed, k, 1))
    return max(_cross_direction(xs, ys, b, k, rng_ab, refine_iters),
               _cross_direction(ys, xs, a, k, rng_ba, refine_iters))


def dm_estimate(a: Operator, b: Operator, k_max: int,
                budget: SamplingBudget, mode: str = "paired",
                seed: int | None = None, refine_iters: int = 40) -> DmEstimate:
    """Estimate the truncated profile metric between two operators.

    Paired mode needs a shared space and gives the matched-tuple upper-bound
    estimate; cross_search samples independently and refines matches by
    local search.  The truncation tail is reported as 2^-k_max.
    """
    if k_max < 1:
        raise UsageError("k_max must be >= 1")
    if seed is not None:
        budget = SamplingBudget(budget.vectors_per_k, budget.strategies, seed)
    if mode == "paired":
        if not a.space.same_as(b.space):
            raise SpaceMismatch("paired mode requires a shared space")
        per_k = tuple((k, _paired_per_k(a, b, k, budget))
                      for k in range(1, k_max + 1))
    elif mode == "cross_search":
        per_k = tuple((k, _cross_per_k(a, b, k, budget, refine_iters))
                      for k in range(1, k_max + 1))
    else:
        raise UsageError(f"unknown mode {mode!r}")
    value = float(sum(2.0 ** (-k) * d for k, d in per_k))
    return DmEstimate(value, per_k, k_max, 2.0 ** (-k_max), mode)
