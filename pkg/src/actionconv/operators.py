"""Finite probability spaces and concrete P-operator representations.

Operators act on row vectors: (vA)(i) = sum_j v(j) A[j, i].  All L^p norms
and joint distributions are weight-aware; zero-weight points are allowed and
ignored by every distribution (apply may return anything there, and the
kernels built here return 0).
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import LimitExceeded, SpaceMismatch, UsageError
from .measures import EmpiricalMeasure

SIGN_ENUM_LIMIT = 22  # 2^22 sign vectors / subsets keep exact mode ~4M evals
_INF = float("inf")


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """Finite probability space: n points with nonnegative weights summing to 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise UsageError("weights must be a nonempty vector")
        if np.any(w < 0):
            raise UsageError("negative weight")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise UsageError(f"weights sum to {float(w.sum())}, not 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def same_as(self, other: "FiniteSpace") -> bool:
        return (self.size == other.size
                and np.array_equal(self.weights, other.weights))

    def pnorm(self, values: np.ndarray, p: float) -> float:
        """Weighted L^p norm; p = inf gives the essential sup (over support)."""
        v = np.asarray(values, dtype=np.float64)
        if p == _INF:
            supp = self.support
            return float(np.abs(v[supp]).max()) if supp.size else 0.0
        return float(np.sum(np.abs(v) ** p * self.weights) ** (1.0 / p))

    def expect(self, values: np.ndarray) -> float:
        return float(np.dot(values, self.weights))


def make_space(weights) -> FiniteSpace:
    """Normalize nonnegative weights to a probability space."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise UsageError("weights must be a nonempty vector")
    if np.any(w < 0):
        raise UsageError("negative weight")
    total = float(w.sum())
    if total <= 0:
        raise UsageError("weights sum to zero")
    return FiniteSpace(w / total)


def uniform_space(n: int) -> FiniteSpace:
    if n < 1:
        raise UsageError("space size must be >= 1")
    return FiniteSpace(np.full(n, 1.0 / n))


@dataclass(frozen=True, eq=False)
class Vec:
    """A measurable function on a finite space, stored as coordinates."""

    values: np.ndarray
    space: FiniteSpace

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size != self.space.size:
            raise SpaceMismatch(
                f"vector of length {v.size} on space of size {self.space.size}")
        object.__setattr__(self, "values", v)


class Operator:
    """Base class: a P-operator on a finite space with the action v -> vA."""

    kind = "abstract"

    def __init__(self, space: FiniteSpace, metadata: str = ""):
        self.space = space
        self.metadata = metadata

    def apply_array(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def size(self) -> int:
        return self.space.size

    def __repr__(self):
        tag = f" {self.metadata!r}" if self.metadata else ""
        return f"<{type(self).__name__} n={self.size}{tag}>"


class DenseOperator(Operator):
    kind = "dense"

    def __init__(self, space: FiniteSpace, matrix, metadata: str = ""):
        super().__init__(space, metadata)
        m = np.asarray(matrix, dtype=np.float64)
        if m.shape != (space.size, space.size):
            raise SpaceMismatch(f"matrix shape {m.shape} on space of size {space.size}")
        m = m.copy()
        m.setflags(write=False)
        self.matrix = m

    def apply_array(self, v):
        return v @ self.matrix

    def to_dense(self):
        return self.matrix


class SparseOperator(Operator):
    """Sparse kernel given by (i, j, value) entries, row-action convention."""

    kind = "sparse"

    def __init__(self, space: FiniteSpace, entries, metadata: str = ""):
        super().__init__(space, metadata)
        n = space.size
        if sp.issparse(entries):
            csr = sp.csr_matrix(entries, dtype=np.float64)
            if csr.shape != (n, n):
                raise SpaceMismatch("sparse matrix shape mismatch")
        else:
            entries = list(entries)
            rows = np.array([e[0] for e in entries], dtype=np.int64)
            cols = np.array([e[1] for e in entries], dtype=np.int64)
            vals = np.array([e[2] for e in entries], dtype=np.float64)
            if entries and (rows.min() < 0 or rows.max() >= n
                            or cols.min() < 0 or cols.max() >= n):
                raise UsageError("sparse entry index out of range")
            csr = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        self.csr = csr

    def apply_array(self, v):
        return np.asarray(v @ self.csr)

    def to_dense(self):
        return self.csr.toarray()


class ScaledOperator(Operator):
    kind = "scaled"

    def __init__(self, inner: Operator, scalar: float, metadata: str = ""):
        super().__init__(inner.space, metadata or inner.metadata)
        self.inner = inner
        self.scalar = float(scalar)

    def apply_array(self, v):
        return self.inner.apply_array(v) * self.scalar

    def to_dense(self):
        return self.inner.to_dense() * self.scalar


class GraphonGridOperator(Operator):
    """Step-function kernel W on the uniform m-point grid.

    (vA)(x) = sum_y v(y) W[y, x] weight(y); the dense kernel is W scaled by
    the row weights.
    """

    kind = "graphon_grid"

    def __init__(self, values, metadata: str = ""):
        w = np.asarray(values, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise UsageError("graphon grid must be a square matrix")
        super().__init__(uniform_space(w.shape[0]), metadata)
        w = w.copy()
        w.setflags(write=False)
        self.values = w

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    def apply_array(self, v):
        return (v * self.space.weights) @ self.values

    def to_dense(self):
        return self.values * self.space.weights[:, None]


class MarkovKernelOperator(Operator):
    """Random-walk kernel: neighbour sum divided by the target degree.

    Summing first and dividing last keeps 1A = 1 exact in floats (d/d == 1.0),
    which a premultiplied dense kernel cannot guarantee.
    """

    kind = "markov"

    def __init__(self, space: FiniteSpace, adjacency, degrees, metadata: str = ""):
        super().__init__(space, metadata)
        self.adjacency = sp.csr_matrix(adjacency, dtype=np.float64)
        self.degrees = np.asarray(degrees, dtype=np.float64)
        if self.adjacency.shape != (space.size, space.size):
            raise SpaceMismatch("adjacency shape mismatch")

    def apply_array(self, v):
        out = np.asarray(v @ self.adjacency)
        pos = self.degrees > 0
        out[pos] = out[pos] / self.degrees[pos]
        out[~pos] = 0.0
        return out

    def to_dense(self):
        dense = self.adjacency.toarray()
        pos = self.degrees > 0
        dense[:, pos] /= self.degrees[pos]
        dense[:, ~pos] = 0.0
        return dense


def _as_values(v, space: FiniteSpace) -> np.ndarray:
    if isinstance(v, Vec):
        if not v.space.same_as(space):
            raise SpaceMismatch("vector lives on a different space")
        return v.values
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size != space.size:
        raise SpaceMismatch(
            f"vector of length {arr.size} on space of size {space.size}")
    return arr


def apply(op: Operator, v):
    """Evaluate the action vA; accepts a Vec (returned as Vec) or an array."""
    if isinstance(v, Vec):
        return Vec(op.apply_array(_as_values(v, op.space)), op.space)
    return op.apply_array(_as_values(v, op.space))


@dataclass(frozen=True, eq=False)
class MarkovPair:
    """A random-walk kernel bundled with a reference function on its space."""

    op: Operator
    ref_fn: Vec

    def __post_init__(self):
        if not self.op.space.same_as(self.ref_fn.space):
            raise SpaceMismatch("reference function lives on a different space")


def joint_distribution(vs, space: FiniteSpace) -> EmpiricalMeasure:
    """Joint distribution of functions on a space: the push-forward of the
    weights under x -> (v_1(x), ..., v_d(x)).  Zero-weight points drop out and
    identical columns merge."""
    vs = list(vs)
    if not vs:
        raise UsageError("need at least one function")
    cols = np.column_stack([_as_values(v, space) for v in vs])
    return EmpiricalMeasure(cols, space.weights)


def bilinear_form(op: Operator, f, g) -> float:
    """(f, g)_A = E((fA) g) with the expectation over the space weights."""
    fv = _as_values(f, op.space)
    gv = _as_values(g, op.space)
    return float(np.dot(op.apply_array(fv) * gv, op.space.weights))


def _check_exponent(p: float):
    if not (p == _INF or 1.0 <= p):
        raise UsageError(f"exponent {p} outside [1, inf]")


def _sign_chunks(n: int, chunk_bits: int = 16):
    """Yield blocks of {-1,1}^n with the first coordinate pinned to +1."""
    free = n - 1
    total = 1 << free
    step = 1 << min(chunk_bits, free)
    shifts = np.arange(free, dtype=np.uint64)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.uint64)
        bits = (idx[:, None] >> shifts[None, :]) & 1
        block = np.empty((idx.size, n))
        block[:, 0] = 1.0
        block[:, 1:] = np.where(bits == 1, 1.0, -1.0)
        yield block


def _subset_chunks(n: int, chunk_bits: int = 16):
    """Yield blocks of {0,1}^n, skipping the empty set."""
    total = 1 << n
    step = 1 << min(chunk_bits, n)
    shifts = np.arange(n, dtype=np.uint64)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.uint64)
        if start == 0:
            idx = idx[1:]
            if idx.size == 0:
                continue
        bits = (idx[:, None] >> shifts[None, :]) & 1
        yield bits.astype(np.float64)


def _norm_inf_one_exact(op: Operator) -> float:
    if op.size > SIGN_ENUM_LIMIT:
        raise LimitExceeded(
            f"exact (inf,1) norm limited to n <= {SIGN_ENUM_LIMIT}")
    dense = op.to_dense()
    w = op.space.weights
    best = 0.0
    for block in _sign_chunks(op.size):
        vals = np.abs(block @ dense) @ w
        m = float(vals.max())
        if m > best:
            best = m
    return best


def _rescaled_support_matrix(op: Operator) -> np.ndarray:
    """The Euclidean matrix of the action on L^2(mu): D^-1/2 A D^1/2 on supp."""
    supp = op.space.support
    dense = op.to_dense()[np.ix_(supp, supp)]
    root = np.sqrt(op.space.weights[supp])
    return dense * (root[None, :] / root[:, None])


def _norm_two_two_exact(op: Operator) -> float:
    if op.space.support.size == 0:
        return 0.0
    b = _rescaled_support_matrix(op)
    return float(np.linalg.svd(b, compute_uv=False)[0])


def _dual_gradient(u: np.ndarray, q: float, w: np.ndarray) -> np.ndarray:
    """Gradient of the weighted L^q norm at u (any subgradient at kinks)."""
    if q == _INF:
        g = np.zeros_like(u)
        masked = np.where(w > 0, np.abs(u), -1.0)
        i = int(np.argmax(masked))
        g[i] = math.copysign(1.0, u[i] if u[i] != 0 else 1.0)
        return g
    nq = np.sum(np.abs(u) ** q * w)
    if nq == 0:
        return np.zeros_like(u)
    scale = nq ** (1.0 / q - 1.0)
    return scale * w * np.abs(u) ** (q - 1.0) * np.sign(u)


def _project_p(v: np.ndarray, p: float, space: FiniteSpace) -> np.ndarray:
    if p == _INF:
        return np.clip(v, -1.0, 1.0)
    nrm = space.pnorm(v, p)
    return v if nrm == 0 else v / nrm


def _heuristic_starts(op: Operator, rng: np.random.Generator, starts: int):
    n = op.size
    yield np.ones(n)
    try:
        b = _rescaled_support_matrix(op)
        u, _, _ = np.linalg.svd(b)
        lead = np.zeros(n)
        supp = op.space.support
        root = np.sqrt(op.space.weights[supp])
        lead[supp] = u[:, 0] / root
        lead /= max(np.abs(lead).max(), 1e-300)
        yield lead
        yield np.where(lead >= 0, 1.0, -1.0)
    except np.linalg.LinAlgError:  # pragma: no cover
        pass
    for _ in range(starts):
        yield rng.uniform(-1.0, 1.0, size=n)


def _norm_heuristic(op: Operator, p: float, q: float, seed: int,
                    starts: int, iters: int) -> float:
    """Multi-start projected gradient ascent on ||vA||_q with ||v||_p <= 1.

    Returns a lower bound on the norm.  Per-start RNG streams derive from
    (seed, start index) so results do not depend on evaluation order.
    """
    w = op.space.weights
    dense = op.to_dense()
    best = 0.0
    start_list = list(
        _heuristic_starts(op, np.random.default_rng((seed, 0)), starts))
    for si, v0 in enumerate(start_list):
        v = _project_p(v0.copy(), p, op.space)
        step = 0.5
        val = op.space.pnorm(op.apply_array(v), q)
        for _ in range(iters):
            u = op.apply_array(v)
            g = _dual_gradient(u, q, w)
            grad = dense @ g
            gn = np.abs(grad).max()
            if gn == 0:
                break
            cand = _project_p(v + step * grad / gn, p, op.space)
            cand_val = op.space.pnorm(op.apply_array(cand), q)
            if cand_val > val:
                v, val = cand, cand_val
            else:
                step *= 0.7
                if step < 1e-4:
                    break
        if p == _INF:
            rounded = np.where(v >= 0, 1.0, -1.0)
            val = max(val, op.space.pnorm(op.apply_array(rounded), q))
        best = max(best, val)
    return best


def norm_pq(op: Operator, p: float, q: float, mode: str = "exact",
            seed: int = 0, starts: int = 8, iters: int = 200) -> float:
    """Operator norm sup ||vA||_q / ||v||_p over weighted L^p.

    Exact mode covers (p,q) = (inf,1) by sign-vector enumeration (n <= 22;
    the maximum of a convex function over the cube sits at a vertex) and
    (p,q) = (2,2) as the spectral norm of the similarity-rescaled kernel on
    the support of the measure.  Heuristic mode runs projected gradient
    ascent from multiple starts and returns a lower bound.
    """
    p, q = float(p), float(q)
    _check_exponent(p)
    _check_exponent(q)
    if mode == "exact":
        if p == _INF and q == 1.0:
            return _norm_inf_one_exact(op)
        if p == 2.0 and q == 2.0:
            return _norm_two_two_exact(op)
        raise UsageError(
            "exact mode supports only (p,q) = (inf,1) with n <= 22 or (2,2)")
    if mode == "heuristic":
        return _norm_heuristic(op, p, q, seed, starts, iters)
    raise UsageError(f"unknown mode {mode!r}")


def _cut_norm_exact(op: Operator) -> float:
    if op.size > SIGN_ENUM_LIMIT:
        raise LimitExceeded(
            f"exact cut norm limited to n <= {SIGN_ENUM_LIMIT}")
    dense = op.to_dense()
    w = op.space.weights
    best = 0.0
    # for fixed S the optimal T picks one sign class of (1_S A) * w
    for block in _subset_chunks(op.size):
        u = (block @ dense) * w
        pos = np.where(u > 0, u, 0.0).sum(axis=1)
        neg = np.where(u < 0, -u, 0.0).sum(axis=1)
        m = float(np.maximum(pos, neg).max())
        if m > best:
            best = m
    return best


def _cut_norm_heuristic(op: Operator, seed: int, starts: int,
                        iters: int) -> float:
    dense = op.to_dense()
    w = op.space.weights
    n = op.size
    best = 0.0
    for si in range(starts):
        rng = np.random.default_rng((seed, si))
        s = (rng.random(n) < 0.5).astype(np.float64)
        val = -1.0
        for _ in range(iters):
            u = (s @ dense) * w
            pos, neg = u.clip(min=0).sum(), (-u).clip(min=0).sum()
            t = (u > 0).astype(np.float64) if pos >= neg \
                else (u < 0).astype(np.float64)
            r = dense @ (t * w)
            sign = 1.0 if pos >= neg else -1.0
            s_new = (sign * r > 0).astype(np.float64)
            new_val = abs(float(np.dot(s_new, r)))
            if new_val <= val + 1e-15:
                val = max(val, new_val)
                break
            s, val = s_new, new_val
        best = max(best, max(val, 0.0))
    return best


def cut_norm(op: Operator, mode: str = "exact", seed: int = 0,
             starts: int = 12, iters: int = 60) -> float:
    """sup over measurable S, T of |(1_S, 1_T)_A|.

    Exact mode enumerates subsets S (n <= 22) and picks the optimal T in
    closed form; heuristic mode alternates optimal-response updates from
    random starts and returns a lower bound.
    """
    if mode == "exact":
        return _cut_norm_exact(op)
    if mode == "heuristic":
        return _cut_norm_heuristic(op, seed, starts, iters)
    raise UsageError(f"unknown mode {mode!r}")
