"""Independent brute-force verifiers used by the test suites.

Nothing here shares numeric kernels with the code it checks: the LP oracle
enumerates subsets instead of flowing, the norm oracle enumerates sign
vectors one by one, and the partition/coloring oracles enumerate assignments
directly.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import LimitExceeded, UsageError
from .measures import EmpiricalMeasure


@dataclass(frozen=True)
class OracleBudget:
    max_atoms: int = 15
    max_subsets: int = 2 ** 15
    max_enumeration: int = 2 * 10 ** 6

    def __post_init__(self):
        if min(self.max_atoms, self.max_subsets, self.max_enumeration) <= 0:
            raise UsageError("oracle budget fields must be positive")


@dataclass
class OracleReport:
    """Outcome of a randomized inequality suite."""

    check: str
    trials: int
    violations: int
    max_ratio: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"lemma": self.check, "trials": self.trials,
                "violations": self.violations, "max_ratio": self.max_ratio,
                **({"details": self.details} if self.details else {})}


def _own_distances(points: np.ndarray, norm_kind: str) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    if norm_kind == "euclidean":
        return np.sqrt((diff ** 2).sum(axis=-1))
    return np.abs(diff).max(axis=-1)


def lp_distance_oracle(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                       budget: OracleBudget = OracleBudget()) -> float:
    """Levy-Prokhorov distance by subset enumeration over the joint support.

    For every subset U of the joint support the minimal feasible eps is read
    off the step function of covered mass; the distance is the largest of
    those minima, located by scanning the candidate eps values (pairwise
    distances and the deficiencies between them).
    """
    if mu.dim != nu.dim or mu.norm_kind != nu.norm_kind:
        raise UsageError("measure pair mismatch")
    points = np.concatenate([mu.points, nu.points])
    joint, inverse = np.unique(points, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    m = joint.shape[0]
    if m > budget.max_atoms or (1 << m) > budget.max_subsets:
        raise LimitExceeded(f"joint support of {m} atoms exceeds oracle budget")
    a = np.zeros(m)
    b = np.zeros(m)
    np.add.at(a, inverse[: mu.size], mu.masses)
    np.add.at(b, inverse[mu.size:], nu.masses)

    dist = _own_distances(joint, mu.norm_kind)
    n_sub = 1 << m
    masks = ((np.arange(n_sub, dtype=np.uint32)[:, None]
              >> np.arange(m, dtype=np.uint32)[None, :]) & 1).astype(bool)
    # d(p, U) for every subset U via a min-fold over member bits
    d_to_set = np.full((n_sub, m), np.inf)
    sub_idx = np.arange(n_sub)
    for j in range(m):
        with_j = sub_idx[(sub_idx >> j) & 1 == 1]
        d_to_set[with_j] = np.minimum(d_to_set[with_j], dist[j][None, :])

    mass_a = masks @ a
    mass_b = masks @ b

    def worst_deficit(c: float) -> float:
        covered = d_to_set <= c
        da = float((mass_a - covered @ b).max())
        db = float((mass_b - covered @ a).max())
        return max(da, db)

    candidates = np.unique(np.concatenate(([0.0], dist.ravel())))
    lo, hi = 0, len(candidates) - 1
    first_feasible = hi
    while lo <= hi:
        mid = (lo + hi) // 2
        if worst_deficit(candidates[mid]) <= candidates[mid]:
            first_feasible = mid
            hi = mid - 1
        else:
            lo = mid + 1
    if first_feasible == 0:
        return float(max(candidates[0], worst_deficit(candidates[0])))
    return float(min(candidates[first_feasible],
                     worst_deficit(candidates[first_feasible - 1])))


def norm_inf_one_oracle(matrix: np.ndarray, weights: np.ndarray) -> float:
    """sup over sign vectors v of the weighted l1 norm of vA, one v at a time."""
    matrix = np.asarray(matrix, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    n = matrix.shape[0]
    if n > 22:
        raise LimitExceeded("sign-vector oracle limited to n <= 22")
    best = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=n - 1):
        v = np.array((1.0,) + signs)
        val = float(np.abs(v @ matrix) @ weights)
        if val > best:
            best = val
    return best


def enumerate_partition_measures(op, k: int,
                                 budget: OracleBudget = OracleBudget()):
    """All measures D_A(1_{P_1}, ..., 1_{P_k}) over the k^n ordered partitions.

    Returns the deduplicated list (exact atom-level dedup after rounding at
    1e-12); this is the full finite partition profile of the operator.
    """
    if k < 1:
        raise UsageError("k must be >= 1")
    n = op.size
    total = k ** n
    if total > budget.max_enumeration:
        raise LimitExceeded(f"{k}^{n} partitions exceed enumeration budget")
    dense = op.to_dense()
    weights = op.space.weights
    radix = k ** np.arange(n, dtype=np.int64)
    seen = set()
    out = []
    chunk = 1 << 14
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // radix[None, :]) % k
        indicators = np.stack([(digits == c).astype(np.float64)
                               for c in range(k)], axis=1)  # (chunk, k, n)
        outs = indicators @ dense  # (chunk, k, n)
        for r in range(idx.size):
            cols = np.concatenate([indicators[r], outs[r]]).T  # (n, 2k)
            measure = EmpiricalMeasure(cols, weights)
            key = (np.round(measure.points, 12).tobytes(),
                   np.round(measure.masses, 12).tobytes())
            if key not in seen:
                seen.add(key)
                out.append(measure)
    return out


def enumerate_colored_star_sets(neighbors, k: int,
                                budget: OracleBudget = OracleBudget()):
    """The set of radius-1 colored star statistics over all k-colorings.

    `neighbors` is the adjacency list of a graph on n vertices.  Each
    coloring yields a distribution over star types (root color, neighbor
    color counts); distributions are returned as canonical frozensets of
    ((root, counts), multiplicity) with denominator n, so comparisons are
    exact integer arithmetic.
    """
    n = len(neighbors)
    if k ** n > budget.max_enumeration:
        raise LimitExceeded(f"{k}^{n} colorings exceed enumeration budget")
    result = set()
    for coloring in itertools.product(range(k), repeat=n):
        counter = {}
        for v in range(n):
            counts = [0] * k
            for u in neighbors[v]:
                counts[coloring[u]] += 1
            key = (coloring[v], tuple(counts))
            counter[key] = counter.get(key, 0) + 1
        result.add(frozenset(counter.items()))
    return result


# ---------------------------------------------------------------------------
# randomized inequality suites


def random_measure_pair(rng: np.random.Generator, max_each: int = 12,
                        max_joint: int = 15, dims=(1, 4)):
    """A random pair of discrete measures small enough for the subset oracle."""
    dim = int(rng.integers(dims[0], dims[1] + 1))
    m1 = int(rng.integers(1, min(max_each, max_joint - 1) + 1))
    m2 = int(rng.integers(1, min(max_each, max_joint - m1) + 1))
    scale = float(rng.choice([0.2, 1.0, 3.0]))
    pts1 = rng.uniform(-scale, scale, size=(m1, dim))
    pts2 = rng.uniform(-scale, scale, size=(m2, dim))
    if m1 > 1 and m2 > 1 and rng.random() < 0.35:
        shared = int(rng.integers(1, min(m1, m2)))
        pts2[:shared] = pts1[:shared]
    mass1 = rng.dirichlet(np.ones(m1))
    mass2 = rng.dirichlet(np.ones(m2))
    return (EmpiricalMeasure(pts1, mass1), EmpiricalMeasure(pts2, mass2))


def verify_lp_agreement(trials: int = 500, seed: int = 0,
                        tol: float = 1e-9) -> OracleReport:
    """Flow-based LP distance vs subset-enumeration oracle on random pairs."""
    from .measures import lp_distance

    violations = 0
    worst = 0.0
    for t in range(trials):
        rng = np.random.default_rng((seed, t))
        mu, nu = random_measure_pair(rng)
        got = lp_distance(mu, nu)
        want = lp_distance_oracle(mu, nu)
        diff = abs(got - want)
        worst = max(worst, diff)
        if diff > tol:
            violations += 1
    return OracleReport("lp-agreement", trials, violations, worst,
                        {"tolerance": tol})


def _random_space(rng: np.random.Generator, n: int):
    from .operators import make_space, uniform_space

    if rng.random() < 0.5:
        return uniform_space(n)
    return make_space(rng.uniform(0.05, 1.0, size=n))


def verify_coupling_bound(trials: int = 200, seed: int = 0,
                          tol: float = 1e-12) -> OracleReport:
    """d_LP(D(X), D(Y)) <= tau(X - Y)^(1/2) k^(3/4) on random joint pairs.

    tau(X - Y) is the largest weighted l1 distance between matched
    coordinate functions, which covers both the random-variable and the
    vector-system reading of the bound.
    """
    from .measures import lp_distance
    from .operators import joint_distribution

    violations = 0
    max_ratio = 0.0
    sweep = []
    for t in range(trials):
        rng = np.random.default_rng((seed, t))
        n = int(rng.integers(2, 13))
        k = int(rng.integers(1, 4))
        space = _random_space(rng, n)
        x = rng.uniform(-1.0, 1.0, size=(k, n))
        if t % 5 == 0:
            eps = float(rng.choice([1e-3, 1e-2, 0.1, 0.3, 0.5]))
            y = np.clip(x + eps * rng.choice([-1.0, 1.0], size=(k, n)), -1, 1)
        else:
            y = np.clip(x + rng.normal(scale=rng.uniform(0.01, 0.8),
                                       size=(k, n)), -1, 1)
        m = max(space.pnorm(x[i] - y[i], 1) for i in range(k))
        lhs = lp_distance(joint_distribution(list(x), space),
                          joint_distribution(list(y), space))
        rhs = m ** 0.5 * k ** 0.75
        if lhs > rhs + tol:
            violations += 1
        if rhs > 0:
            ratio = lhs / rhs
            max_ratio = max(max_ratio, ratio)
            if t % 5 == 0:
                sweep.append(round(ratio, 6))
    return OracleReport("coupling", trials, violations, max_ratio,
                        {"near_tight_ratios": sweep[:10]})


def _random_perturbed_pair(rng: np.random.Generator, n: int):
    from .operators import DenseOperator, uniform_space

    space = uniform_space(n)
    base = rng.normal(scale=1.0, size=(n, n))
    noise = rng.normal(scale=rng.uniform(0.001, 0.5), size=(n, n))
    a = DenseOperator(space, base, "oracle-A")
    b = DenseOperator(space, base + noise, "oracle-B")
    eta = norm_inf_one_oracle(noise, space.weights)
    return a, b, eta


def verify_profile_perturbation_bound(trials: int = 200, seed: int = 0,
                                      k_max: int = 3,
                                      tol: float = 1e-12) -> OracleReport:
    """Paired per-k profile estimates vs the norm bound eta^(1/2) (2k)^(3/4).

    The checked side is the sampled paired estimate; the bound side uses the
    sign-vector oracle norm, so the two routes stay independent.
    """
    from .distance import dm_estimate
    from .profiles import SamplingBudget

    violations = 0
    max_ratio = 0.0
    for t in range(trials):
        rng = np.random.default_rng((seed, t))
        n = int(rng.integers(2, 13))
        a, b, eta = _random_perturbed_pair(rng, n)
        budget = SamplingBudget(vectors_per_k=4, seed=int(rng.integers(2 ** 32)))
        est = dm_estimate(a, b, k_max=k_max, budget=budget, mode="paired")
        for k, dh in est.per_k:
            rhs = eta ** 0.5 * (2 * k) ** 0.75
            if dh > rhs + tol:
                violations += 1
            if rhs > 0:
                max_ratio = max(max_ratio, dh / rhs)
    return OracleReport("profile-perturbation", trials, violations, max_ratio)


def verify_metric_norm_bound(trials: int = 200, seed: int = 0,
                             k_max: int = 5,
                             tol: float = 1e-12) -> OracleReport:
    """Truncated paired profile metric vs 3 eta^(1/2) on perturbed pairs."""
    from .distance import dm_estimate
    from .profiles import SamplingBudget

    violations = 0
    max_ratio = 0.0
    for t in range(trials):
        rng = np.random.default_rng((seed, t))
        n = int(rng.integers(2, 13))
        a, b, eta = _random_perturbed_pair(rng, n)
        budget = SamplingBudget(vectors_per_k=3, seed=int(rng.integers(2 ** 32)))
        value = dm_estimate(a, b, k_max=k_max, budget=budget, mode="paired").value
        rhs = 3.0 * eta ** 0.5
        if value > rhs + tol:
            violations += 1
        if rhs > 0:
            max_ratio = max(max_ratio, value / rhs)
    return OracleReport("metric-aggregate", trials, violations, max_ratio)


ORACLE_CHECKS = {
    "lp-agreement": verify_lp_agreement,
    "coupling": verify_coupling_bound,
    "profile-perturbation": verify_profile_perturbation_bound,
    "metric-aggregate": verify_metric_norm_bound,
}


def run_oracle_check(name: str, trials: int, seed: int) -> OracleReport:
    if name not in ORACLE_CHECKS:
        raise UsageError(f"unknown oracle check {name!r}; "
                         f"choices: {sorted(ORACLE_CHECKS)}")
    return ORACLE_CHECKS[name](trials=trials, seed=seed)
