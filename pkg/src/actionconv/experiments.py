"""Experiment runner reproducing the convergence studies at desk scale.

Continuum limit objects are discretized as step approximations whose
resolution stays fixed along a curve, so the reported estimate measures the
distance to one target set rather than to a moving one.  All randomness
derives from the config seed; rows are reproducible bit for bit.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .distance import dm_estimate
from .errors import LimitExceeded, UsageError
from .graphs import (Graph, adjacency_op, check_uniform_map, cycle,
                     erdos_renyi, hypercube, hypercube_halving_map, markov_op,
                     projective_incidence, star, subdivision_complete,
                     tensor_square_projection, graph_power,
                     pullback_profile_check)
from .measures import lp_distance
from .operators import (DenseOperator, GraphonGridOperator, Operator,
                        make_space, norm_pq, uniform_space)
from .profiles import SamplingBudget, generate_tuples, measure_for_tuple

FAMILIES = ("star", "subdivision", "projective", "hypercube", "power",
            "quasirandom", "rmt")

PROJECTIVE_SIZES = (2, 3, 5, 7, 11)


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    sizes: tuple
    k_max: int = 3
    budget: SamplingBudget = SamplingBudget(vectors_per_k=8)
    mode: str = "cross_search"
    seed: int = 0
    output_path: str | None = None
    limit_cells: int | None = None
    reps: int = 10
    refine_iters: int = 40

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown family {self.family!r}")
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise UsageError("sizes must be nonempty and strictly increasing")
        if self.k_max < 1:
            raise UsageError("k_max must be >= 1")
        object.__setattr__(self, "sizes", sizes)


@dataclass(frozen=True)
class CurveRow:
    size: int
    estimate: float
    per_k: tuple
    wall_time: float
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.estimate < 0:
            raise UsageError("negative distance estimate")


@dataclass(frozen=True)
class CurveResult:
    family: str
    seed: int
    rows: tuple
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "seed": self.seed,
            "metadata": self.metadata,
            "rows": [
                {"size": r.size, "estimate": r.estimate,
                 "per_k": [[k, d] for k, d in r.per_k],
                 "wall_time": r.wall_time, **r.extras}
                for r in self.rows
            ],
        }


def _row_seed(seed: int, size: int) -> int:
    return (seed * 1000003 + size * 7919 + 17) % (2 ** 63)


def _row_budget(cfg: ExperimentConfig, size: int) -> SamplingBudget:
    return SamplingBudget(cfg.budget.vectors_per_k, cfg.budget.strategies,
                          _row_seed(cfg.seed, size))


def _estimate_row(cfg, size, op_a, op_b, extras=None, mode=None) -> CurveRow:
    start = time.perf_counter()
    est = dm_estimate(op_a, op_b, cfg.k_max, _row_budget(cfg, size),
                      mode=mode or cfg.mode, refine_iters=cfg.refine_iters)
    return CurveRow(size, est.value, est.per_k,
                    time.perf_counter() - start, extras or {})


def star_limit_operator(cells: int):
    """Discretized star limit: one atom of weight 1/2 joined to `cells`
    uniform cells carrying the other half.  Identical in structure to the
    random-walk kernel of a star on cells+1 vertices."""
    return markov_op(star(cells + 1))[0]


def run_star_curve(cfg: ExperimentConfig) -> CurveResult:
    if any(n < 8 or n > 512 for n in cfg.sizes):
        raise LimitExceeded("star sizes must lie in [8, 512]")
    cells = cfg.limit_cells or 4 * max(cfg.sizes)
    limit = star_limit_operator(cells)
    rows = []
    for n in cfg.sizes:
        op, space = markov_op(star(n))
        rows.append(_estimate_row(cfg, n, op, limit,
                                  {"center_weight": float(space.weights[0])}))
    return CurveResult("star", cfg.seed, tuple(rows), {"limit_cells": cells})


def subdivision_limit_operator(m: int) -> DenseOperator:
    """Discretized subdivision limit on [m] plus the unordered m x m cells."""
    pair_index = {}
    idx = m
    for y in range(m):
        for z in range(y, m):
            pair_index[(y, z)] = idx
            idx += 1
    size = idx
    weights = np.empty(size)
    weights[:m] = 1.0 / (2 * m)
    for (y, z), i in pair_index.items():
        weights[i] = 1.0 / (2 * m * m) if y == z else 1.0 / (m * m)
    kernel = np.zeros((size, size))
    for x in range(m):
        for u in range(m):
            kernel[pair_index[(min(x, u), max(x, u))], x] = 1.0 / m
    for (y, z), i in pair_index.items():
        if y == z:
            kernel[y, i] = 1.0
        else:
            kernel[y, i] = 0.5
            kernel[z, i] = 0.5
    return DenseOperator(make_space(weights), kernel, f"subdivision-limit[{m}]")


def run_subdivision_curve(cfg: ExperimentConfig) -> CurveResult:
    if any(n < 2 or n > 40 for n in cfg.sizes):
        raise LimitExceeded("subdivision sizes must lie in [2, 40]")
    m = cfg.limit_cells or max(cfg.sizes)
    limit = subdivision_limit_operator(m)
    rows = []
    for n in cfg.sizes:
        op, _ = markov_op(subdivision_complete(n))
        rows.append(_estimate_row(cfg, n, op, limit))
    return CurveResult("subdivision", cfg.seed, tuple(rows),
                       {"limit_cells": m})


def projective_pair(q: int):
    """Normalized incidence operator and its rank-2 spectral companion."""
    g = projective_incidence(q)
    count = g.n // 2
    a = adjacency_op(g, ("by_constant", q + 1))
    ones = np.ones(g.n)
    signs = np.concatenate([np.ones(count), -np.ones(count)])
    b = DenseOperator(uniform_space(g.n),
                      (np.outer(ones, ones) - np.outer(signs, signs)) / g.n,
                      f"B[{q}]")
    return a, b


def run_projective_curve(cfg: ExperimentConfig) -> CurveResult:
    if any(q not in PROJECTIVE_SIZES for q in cfg.sizes):
        raise LimitExceeded(f"projective sizes must be in {PROJECTIVE_SIZES}")
    rows = []
    for q in cfg.sizes:
        a, b = projective_pair(q)
        start = time.perf_counter()
        diff = DenseOperator(a.space, a.to_dense() - b.to_dense())
        nrm = norm_pq(diff, 2, 2, mode="exact")
        est = dm_estimate(a, b, cfg.k_max, _row_budget(cfg, q), mode="paired")
        rows.append(CurveRow(q, est.value, est.per_k,
                             time.perf_counter() - start,
                             {"norm_2_2": nrm,
                              "dm_bound": 3.0 * q ** -0.25,
                              "vertices": a.size}))
    return CurveResult("projective", cfg.seed, tuple(rows), {})


def run_hypercube_curve(cfg: ExperimentConfig) -> CurveResult:
    if any(n < 1 or n > 10 for n in cfg.sizes):
        raise LimitExceeded("hypercube dimensions must lie in [1, 10]")
    halving = hypercube_halving_map()
    halving_report = check_uniform_map(halving)
    rows = []
    for n, n_next in zip(cfg.sizes, cfg.sizes[1:]):
        a = adjacency_op(hypercube(n), ("by_constant", n))
        b = adjacency_op(hypercube(n_next), ("by_constant", n_next))
        rows.append(_estimate_row(cfg, n, a, b, {"next_dim": n_next}))
    return CurveResult("hypercube", cfg.seed, tuple(rows),
                       {"halving_map_uniform": halving_report.is_uniform,
                        "halving_map_params": [halving.a, halving.b]})


def run_power_curve(cfg: ExperimentConfig,
                    base_graph: Graph | None = None) -> CurveResult:
    base = base_graph or cycle(4)
    deg = base.degrees()
    if deg.min() != deg.max():
        raise UsageError("power curve expects a regular base graph")
    d = int(deg[0])
    proj = tensor_square_projection(base)
    rng = np.random.default_rng(cfg.seed)
    tuples = [rng.uniform(-1, 1, size=(1, base.n)) for _ in range(8)]
    pullback_ok = pullback_profile_check(proj, tuples)
    rows = []
    for i, i_next in zip(cfg.sizes, cfg.sizes[1:]):
        a = adjacency_op(graph_power(base, i), ("by_constant", float(d ** i)))
        b = adjacency_op(graph_power(base, i_next),
                         ("by_constant", float(d ** i_next)))
        rows.append(_estimate_row(cfg, i, a, b, {"next_power": i_next}))
    return CurveResult("power", cfg.seed, tuple(rows),
                       {"base": base.name, "degree": d,
                        "projection_uniform": check_uniform_map(proj).is_uniform,
                        "projection_pullback_exact": pullback_ok})


def run_quasirandom(cfg: ExperimentConfig) -> CurveResult:
    # the dense target lives on the same uniform space, so the matched-tuple
    # (paired) estimate applies regardless of the configured mode
    rows = []
    for n in cfg.sizes:
        g = erdos_renyi(n, 0.5, _row_seed(cfg.seed, n))
        a = adjacency_op(g, "by_vertex_count")
        w = GraphonGridOperator(np.full((n, n), 0.5), f"W=1/2[{n}]")
        rows.append(_estimate_row(cfg, n, a, w, mode="paired"))
    return CurveResult("quasirandom", cfg.seed, tuple(rows),
                       {"target": "constant 1/2 step kernel"})


CURVE_RUNNERS = {
    "star": run_star_curve,
    "subdivision": run_subdivision_curve,
    "projective": run_projective_curve,
    "hypercube": run_hypercube_curve,
    "power": run_power_curve,
    "quasirandom": run_quasirandom,
}


def run_curve(cfg: ExperimentConfig) -> CurveResult:
    if cfg.family not in CURVE_RUNNERS:
        raise UsageError(f"family {cfg.family!r} is not a curve family")
    return CURVE_RUNNERS[cfg.family](cfg)


# ---------------------------------------------------------------------------
# random matrix concentration


def random_sign_matrix(n: int, seed) -> DenseOperator:
    rng = np.random.default_rng(seed)
    entries = rng.choice([-1.0, 1.0], size=(n, n)) / np.sqrt(n)
    return DenseOperator(uniform_space(n), entries, f"signs[{n}]")


@dataclass(frozen=True)
class RmtReport:
    rows: tuple           # (n, mean, std) over repetitions
    std_ratios: tuple     # consecutive std ratios
    shift_checks: tuple   # (n, max_shift, bound, ok)
    norm_samples: dict    # spectral norm band statistics
    seed: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "rows": [{"size": n, "mean": m, "std": s} for n, m, s in self.rows],
            "std_ratios": list(self.std_ratios),
            "shift_checks": [
                {"size": n, "max_shift": sh, "bound": b, "ok": ok}
                for n, sh, b, ok in self.shift_checks
            ],
            "norm_samples": self.norm_samples,
        }


def column_perturbation_shift(n: int, k_max: int, budget: SamplingBudget,
                              seed: int) -> float:
    """Largest LP move of any sampled profile measure after resampling one
    column of a sign matrix."""
    rng = np.random.default_rng((seed, n))
    a = random_sign_matrix(n, (seed, n, 0))
    entries = a.to_dense().copy()
    col = int(rng.integers(n))
    entries[:, col] = rng.choice([-1.0, 1.0], size=n) / np.sqrt(n)
    b = DenseOperator(a.space, entries, f"signs'[{n}]")
    worst = 0.0
    for k in range(1, k_max + 1):
        for _, _, tup in generate_tuples(a, k, budget):
            mu = measure_for_tuple(a, tup)
            nu = measure_for_tuple(b, tup)
            if not mu.same_atoms(nu):
                worst = max(worst, lp_distance(mu, nu))
    return worst


def run_rmt_concentration(cfg: ExperimentConfig) -> RmtReport:
    if any(n > 2048 for n in cfg.sizes):
        raise LimitExceeded("rmt sizes capped at 2048")
    rows = []
    for n in cfg.sizes:
        values = []
        for rep in range(cfg.reps):
            a = random_sign_matrix(n, (cfg.seed, n, rep, 0))
            b = random_sign_matrix(n, (cfg.seed, n, rep, 1))
            est = dm_estimate(a, b, cfg.k_max, _row_budget(cfg, n),
                              mode="paired")
            values.append(est.value)
        rows.append((n, float(np.mean(values)),
                     float(np.std(values, ddof=1)) if len(values) > 1 else 0.0))
    ratios = tuple(b[2] / a[2] for a, b in zip(rows, rows[1:]) if a[2] > 0)

    shift_checks = []
    for n in cfg.sizes:
        if n > 256:
            continue
        shift = column_perturbation_shift(n, min(cfg.k_max, 2),
                                          _row_budget(cfg, n), cfg.seed)
        bound = 1.0 / n
        shift_checks.append((n, shift, bound, shift <= bound + 1e-12))

    norm_n = min(max(cfg.sizes), 512)
    samples = []
    for rep in range(20):
        h = random_sign_matrix(norm_n, (cfg.seed, 0xBEEF, rep))
        samples.append(float(np.linalg.svd(h.to_dense(),
                                           compute_uv=False)[0]))
    in_band = sum(1.8 <= s <= 2.3 for s in samples)
    return RmtReport(tuple(rows), ratios, tuple(shift_checks),
                     {"size": norm_n, "samples": samples,
                      "in_band": in_band, "band": [1.8, 2.3]},
                     cfg.seed)
