"""Sampling k-profiles, partition profiles, extended profiles and quotients.

The true k-profile of an operator is an infinite set; everything sampled here
is a finite inner approximation.  Per-tuple RNG streams derive from
(seed, strategy, tuple index), so output does not depend on evaluation order.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, SpaceMismatch, UsageError
from .measures import EmpiricalMeasure, MeasureSet, lp_distance
from .operators import (FiniteSpace, GraphonGridOperator, MarkovPair,
                        Operator, bilinear_form, joint_distribution)

DEDUP_TOL = 1e-9


class StrategyKind(enum.Enum):
    UNIFORM_BOX = "uniform_box"
    RADEMACHER = "rademacher"
    PARTITION_INDICATORS = "partition_indicators"
    SPECTRAL_COMBOS = "spectral_combos"
    STEP_FUNCTIONS = "step_functions"
    GRID_QUANTIZED = "grid_quantized"


_STRATEGY_ID = {s: i for i, s in enumerate(StrategyKind)}

DEFAULT_STRATEGIES = (StrategyKind.UNIFORM_BOX, StrategyKind.RADEMACHER,
                      StrategyKind.PARTITION_INDICATORS,
                      StrategyKind.SPECTRAL_COMBOS)


@dataclass(frozen=True)
class SamplingBudget:
    """How many test tuples to draw per k, with which strategies and seed."""

    vectors_per_k: int = 24
    strategies: tuple = DEFAULT_STRATEGIES
    seed: int = 0

    def __post_init__(self):
        if self.vectors_per_k < 1:
            raise UsageError("vectors_per_k must be >= 1")
        strategies = tuple(StrategyKind(s) for s in self.strategies)
        object.__setattr__(self, "strategies", strategies)


@dataclass(frozen=True, eq=False)
class Profile:
    """A finite sampled subset of the k-profile of one operator."""

    k: int
    measures: MeasureSet
    operator_id: str
    budget: SamplingBudget | None
    extended: bool = False

    def __post_init__(self):
        want = 2 * self.k + (1 if self.extended else 0)
        if self.measures.dim != want:
            raise UsageError(
                f"profile members have dim {self.measures.dim}, expected {want}")
        for m in self.measures:
            first = m.points[:, : self.k]
            if np.any(np.abs(first) > 1.0 + 1e-9):
                raise InvariantViolation(
                    "profile member has input marginal outside [-1,1]^k")


def _spectral_basis(op: Operator, count: int) -> np.ndarray:
    """Rows: up to `count` eigenvectors by |eigenvalue|, sup-normalized."""
    dense = op.to_dense()
    if np.allclose(dense, dense.T, atol=1e-12):
        vals, vecs = np.linalg.eigh(dense)
    else:
        vals, vecs = np.linalg.eig(dense)
        vals, vecs = vals.real, vecs.real
    order = np.argsort(-np.abs(vals))[:count]
    basis = vecs[:, order].T
    sup = np.abs(basis).max(axis=1, keepdims=True)
    sup[sup == 0] = 1.0
    return basis / sup


def _quantize(values: np.ndarray, levels: int) -> np.ndarray:
    if levels < 2:
        raise UsageError("need at least 2 quantization levels")
    idx = np.round((values + 1.0) / 2.0 * (levels - 1))
    return idx / (levels - 1) * 2.0 - 1.0


def _draw_tuple(strategy: StrategyKind, op: Operator, k: int,
                rng: np.random.Generator, quant_levels: int,
                basis: np.ndarray | None) -> np.ndarray:
    n = op.size
    if strategy is StrategyKind.UNIFORM_BOX:
        return rng.uniform(-1.0, 1.0, size=(k, n))
    if strategy is StrategyKind.RADEMACHER:
        return rng.choice([-1.0, 1.0], size=(k, n))
    if strategy is StrategyKind.PARTITION_INDICATORS:
        probs = rng.dirichlet(np.ones(k))
        labels = rng.choice(k, size=n, p=probs)
        out = np.zeros((k, n))
        out[labels, np.arange(n)] = 1.0
        return out
    if strategy is StrategyKind.SPECTRAL_COMBOS:
        coeff = rng.normal(size=(k, basis.shape[0]))
        return np.clip(coeff @ basis, -1.0, 1.0)
    if strategy is StrategyKind.STEP_FUNCTIONS:
        if not isinstance(op, GraphonGridOperator):
            raise UsageError("step_functions requires a graphon-grid operator")
        out = np.empty((k, n))
        for i in range(k):
            steps = int(rng.integers(1, min(8, n) + 1))
            cuts = np.sort(rng.choice(np.arange(1, n), size=steps - 1,
                                      replace=False)) if steps > 1 else []
            levels = rng.uniform(-1.0, 1.0, size=steps)
            out[i] = levels[np.searchsorted(cuts, np.arange(n), side="right")]
        return out
    if strategy is StrategyKind.GRID_QUANTIZED:
        return _quantize(rng.uniform(-1.0, 1.0, size=(k, n)), quant_levels)
    raise UsageError(f"unknown strategy {strategy!r}")


def generate_tuples(op: Operator, k: int, budget: SamplingBudget,
                    quant_levels: int = 3, stream_tag: int = 0):
    """Ordered list of (strategy, index, tuple) for the budget's ensemble."""
    out = []
    need_basis = StrategyKind.SPECTRAL_COMBOS in budget.strategies
    basis = _spectral_basis(op, 2 * k) if need_basis else None
    for strategy in budget.strategies:
        sid = _STRATEGY_ID[strategy]
        for idx in range(budget.vectors_per_k):
            key = (budget.seed, sid, idx) if stream_tag == 0 \
                else (budget.seed, sid, idx, stream_tag)
            rng = np.random.default_rng(key)
            out.append((strategy, idx,
                        _draw_tuple(strategy, op, k, rng, quant_levels, basis)))
    return out


def measure_for_tuple(op: Operator, tup: np.ndarray,
                      extra: np.ndarray | None = None) -> EmpiricalMeasure:
    rows = [row for row in tup] + [op.apply_array(row) for row in tup]
    if extra is not None:
        rows.append(extra)
    return joint_distribution(rows, op.space)


def dedup_measures(measures, tol: float = DEDUP_TOL):
    """Merge members closer than `tol` in LP distance (exact-key fast path,
    then a mean-prefiltered LP pass)."""
    kept = []
    seen = set()
    for m in measures:
        key = (m.size, np.round(m.points, 12).tobytes(),
               np.round(m.masses, 12).tobytes())
        if key not in seen:
            seen.add(key)
            kept.append(m)
    final, moments = [], []
    for m in kept:
        mom = m.points.T @ m.masses
        dup = False
        for f, fmom in zip(final, moments):
            if np.max(np.abs(fmom - mom)) < 1e-6 and lp_distance(f, m) < tol:
                dup = True
                break
        if not dup:
            final.append(m)
            moments.append(mom)
    return final


def sample_profile(op: Operator, k: int, budget: SamplingBudget,
                   quant_levels: int = 3, _extra: np.ndarray | None = None,
                   _return_tuples: bool = False):
    """Sample a k-profile of the operator with the budget's strategy ensemble."""
    if k < 1:
        raise UsageError("k must be >= 1")
    entries = generate_tuples(op, k, budget, quant_levels)
    measures = [measure_for_tuple(op, tup, _extra) for _, _, tup in entries]
    deduped = dedup_measures(measures)
    profile = Profile(k, MeasureSet(2 * k + (0 if _extra is None else 1),
                                    tuple(deduped)),
                      op.metadata, budget, extended=_extra is not None)
    if _return_tuples:
        return profile, [tup for _, _, tup in entries]
    return profile


def in_partition_support(measure: EmpiricalMeasure, k: int,
                         tol: float = 1e-9) -> bool:
    """Whether the first-k marginal is supported on the standard basis vectors."""
    first = measure.points[:, :k]
    ok_binary = np.all(np.minimum(np.abs(first), np.abs(first - 1.0)) <= tol)
    ok_rowsum = np.all(np.abs(first.sum(axis=1) - 1.0) <= tol)
    return bool(ok_binary and ok_rowsum)


def sample_partition_profile(op: Operator, k: int,
                             budget: SamplingBudget) -> Profile:
    """Profile restricted to 0-1 function partitions (sum of cells = 1)."""
    if k < 1:
        raise UsageError("k must be >= 1")
    budget = SamplingBudget(budget.vectors_per_k,
                            (StrategyKind.PARTITION_INDICATORS,), budget.seed)
    profile = sample_profile(op, k, budget)
    for m in profile.measures:
        if not in_partition_support(m, k):
            raise InvariantViolation("partition-profile member escaped the "
                                     "basis-vector support")
    return profile


def enumerate_partition_profile_oracle(op: Operator, k: int) -> Profile:
    """The exact finite partition profile by full k^n enumeration (tests)."""
    from .oracles import enumerate_partition_measures

    measures = enumerate_partition_measures(op, k)
    return Profile(k, MeasureSet(2 * k, tuple(measures)), op.metadata, None)


def extended_profile(pair: MarkovPair, k: int,
                     budget: SamplingBudget) -> Profile:
    """Profile of (A, f): f is appended as the last coordinate of every member.

    Uses the same tuple streams as sample_profile, so dropping the last
    coordinate reproduces the plain profile at equal seeds.
    """
    return sample_profile(pair.op, k, budget, _extra=pair.ref_fn.values)


def weak_containment_violations(inner: Profile, outer: Profile,
                                tol: float = 1e-6):
    """Members of `inner` farther than tol from every sampled member of
    `outer`.  Sampling can only ever exhibit violations of containment,
    never certify it; an empty list is not a confirmation."""
    if inner.measures.dim != outer.measures.dim:
        raise UsageError("profile dimension mismatch")
    out = []
    for i, x in enumerate(inner.measures):
        d = min(lp_distance(x, y) for y in outer.measures)
        if d > tol:
            out.append((i, d))
    return out


# ---------------------------------------------------------------------------
# quotients


@dataclass(frozen=True, eq=False)
class QuotientSet:
    """Sampled balanced fractional quotient matrices of one operator."""

    k: int
    matrices: tuple

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=np.float64) for m in self.matrices)
        for m in mats:
            if m.shape != (self.k, self.k):
                raise UsageError("quotient matrix shape mismatch")
        object.__setattr__(self, "matrices", mats)

    def entry_sums(self) -> np.ndarray:
        return np.array([m.sum() for m in self.matrices])


def balanced_fractional_partition(space: FiniteSpace, k: int,
                                  rng: np.random.Generator,
                                  iters: int = 200,
                                  tol: float = 1e-12) -> np.ndarray:
    """Random fractional partition with cell sums 1 and weighted cell masses
    1/k, balanced by iterative proportional fitting.

    The final pass is the cell-sum normalization, so sum_i v_i(x) = 1 holds
    to working precision and the l1 balance sits within the fitting
    tolerance.
    """
    w = space.weights
    n = space.size
    table = rng.dirichlet(np.ones(k), size=n).T * w[None, :]
    supp = w > 0
    target = 1.0 / k
    for _ in range(iters):
        rows = table.sum(axis=1)
        table *= (target / rows)[:, None]
        cols = table.sum(axis=0)
        scale = np.ones(n)
        scale[supp] = w[supp] / cols[supp]
        table *= scale[None, :]
        if np.abs(table.sum(axis=1) - target).max() < tol:
            break
    values = np.full((k, n), 1.0 / k)
    values[:, supp] = table[:, supp] / w[supp][None, :]
    values[:, supp] /= values[:, supp].sum(axis=0, keepdims=True)
    return values


def quotient_of_partition(op: Operator, values: np.ndarray) -> np.ndarray:
    """Matrix of pairwise bilinear forms of the partition cells."""
    applied = np.stack([op.apply_array(v) for v in values])
    return (applied * op.space.weights[None, :]) @ values.T


def sample_quotients(op: Operator, k: int, budget: SamplingBudget,
                     validate_tol: float = 1e-10) -> QuotientSet:
    """Sample balanced fractional quotients; validates the entry-sum invariant
    (it must equal (1,1)_A) before returning."""
    if k < 1:
        raise UsageError("k must be >= 1")
    reference = bilinear_form(op, np.ones(op.size), np.ones(op.size))
    mats = []
    for idx in range(budget.vectors_per_k):
        rng = np.random.default_rng((budget.seed, 97, idx))
        values = balanced_fractional_partition(op.space, k, rng)
        mat = quotient_of_partition(op, values)
        if abs(float(mat.sum()) - reference) > validate_tol * max(
                1.0, abs(reference)):
            raise InvariantViolation(
                f"quotient entry sum {mat.sum()} != (1,1)_A = {reference}")
        mats.append(mat)
    return QuotientSet(k, tuple(mats))


def quotient_hausdorff(q1: QuotientSet, q2: QuotientSet) -> float:
    """Hausdorff distance between quotient sets under entrywise l1."""
    if q1.k != q2.k:
        raise UsageError(f"quotient k mismatch: {q1.k} vs {q2.k}")
    d = np.array([[float(np.abs(a - b).sum()) for b in q2.matrices]
                  for a in q1.matrices])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
