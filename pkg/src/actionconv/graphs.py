"""Graph generators, the operator representations of graphs, uniform maps,
and colored star statistics."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import InvariantViolation, LimitExceeded, UsageError
from .operators import (DenseOperator, FiniteSpace, MarkovKernelOperator,
                        Operator, ScaledOperator, SparseOperator,
                        make_space, norm_pq, uniform_space)

VERTEX_LIMIT = 1 << 20


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    n: int
    edges: tuple
    name: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise UsageError("graph needs at least one vertex")
        seen = set()
        norm = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise UsageError(f"loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise UsageError(f"edge ({u},{v}) out of range")
            e = (min(u, v), max(u, v))
            if e in seen:
                raise UsageError(f"duplicate edge {e}")
            seen.add(e)
            norm.append(e)
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            d[u] += 1
            d[v] += 1
        return d

    def neighbors(self):
        out = [[] for _ in range(self.n)]
        for u, v in self.edges:
            out[u].append(v)
            out[v].append(u)
        return out

    def adjacency_sparse(self) -> sp.csr_matrix:
        if not self.edges:
            return sp.csr_matrix((self.n, self.n))
        us = np.array([e[0] for e in self.edges])
        vs = np.array([e[1] for e in self.edges])
        rows = np.concatenate([us, vs])
        cols = np.concatenate([vs, us])
        vals = np.ones(rows.size)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    def adjacency_dense(self) -> np.ndarray:
        return self.adjacency_sparse().toarray()


# ---------------------------------------------------------------------------
# generators


def _guard_vertices(count: int, what: str):
    if count > VERTEX_LIMIT:
        raise LimitExceeded(f"{what} would have {count} vertices "
                            f"(limit {VERTEX_LIMIT})")


def hypercube(n: int) -> Graph:
    """Vertices {0,1}^n, edges between words at Hamming distance one."""
    if n < 1:
        raise UsageError("hypercube dimension must be >= 1")
    _guard_vertices(1 << n, "hypercube")
    size = 1 << n
    edges = [(v, v ^ (1 << b)) for v in range(size) for b in range(n)
             if v < v ^ (1 << b)]
    return Graph(size, tuple(edges), f"Q{n}")


def star(n: int) -> Graph:
    """Vertex 0 joined to each of the other n-1 vertices."""
    if n < 1:
        raise UsageError("star needs at least one vertex")
    return Graph(n, tuple((0, i) for i in range(1, n)), f"S{n}")


def cycle(n: int) -> Graph:
    if n < 3:
        raise UsageError("cycle needs at least 3 vertices")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)), f"C{n}")


def subdivision_complete(n: int) -> Graph:
    """2-subdivision of K_n: each pair {i,j} gets a midpoint vertex w_ij."""
    if n < 1:
        raise UsageError("need at least one base vertex")
    edges = []
    next_id = n
    for i in range(n):
        for j in range(i + 1, n):
            edges.append((i, next_id))
            edges.append((j, next_id))
            next_id += 1
    return Graph(n + n * (n - 1) // 2, tuple(edges), f"subdivision-K{n}")


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    f = 2
    while f * f <= q:
        if q % f == 0:
            return False
        f += 1
    return True


def projective_incidence(q: int) -> Graph:
    """Point-line incidence graph of the projective plane over F_q, q prime.

    Vertices 0..N-1 are the points, N..2N-1 the lines (N = q^2+q+1);
    a point sits on a line iff the homogeneous dot product vanishes mod q.
    """
    if not _is_prime(q):
        raise UsageError(f"{q} is not prime (prime powers are out of scope)")
    classes = []
    seen = set()
    for a in range(q):
        for b in range(q):
            for c in range(q):
                v = (a, b, c)
                if v == (0, 0, 0) or v in seen:
                    continue
                for lead in v:
                    if lead:
                        inv = pow(lead, -1, q)
                        break
                w = tuple((x * inv) % q for x in v)
                if w not in seen:
                    seen.add(w)
                    # mark the whole scalar class as seen
                    for s in range(1, q):
                        seen.add(tuple((x * s) % q for x in w))
                    classes.append(w)
    count = q * q + q + 1
    if len(classes) != count:  # pragma: no cover
        raise InvariantViolation("projective point count mismatch")
    edges = []
    for i, p in enumerate(classes):
        for j, l in enumerate(classes):
            if (p[0] * l[0] + p[1] * l[1] + p[2] * l[2]) % q == 0:
                edges.append((i, count + j))
    return Graph(2 * count, tuple(edges), f"PG2({q})-incidence")


def tensor_product(g1: Graph, g2: Graph) -> Graph:
    """Product with ((i,j),(k,l)) adjacent iff (i,k) and (j,l) are edges."""
    _guard_vertices(g1.n * g2.n, "graph product")
    n2 = g2.n
    edges = set()
    for a, b in g1.edges:
        for c, d in g2.edges:
            for (x, y) in (((a, c), (b, d)), ((a, d), (b, c))):
                u = x[0] * n2 + x[1]
                v = y[0] * n2 + y[1]
                edges.add((min(u, v), max(u, v)))
    return Graph(g1.n * g2.n, tuple(sorted(edges)),
                 f"({g1.name or 'G'})x({g2.name or 'H'})")


def graph_power(g: Graph, i: int) -> Graph:
    """i-fold tensor power of the graph."""
    if i < 1:
        raise UsageError("power must be >= 1")
    _guard_vertices(g.n ** i, "graph power")
    out = g
    for _ in range(i - 1):
        out = tensor_product(out, g)
    return Graph(out.n, out.edges, f"({g.name or 'G'})^{i}")


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    if not (0.0 <= p <= 1.0):
        raise UsageError("edge probability outside [0,1]")
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    mask = rng.random(iu[0].size) < p
    edges = tuple(zip(iu[0][mask].tolist(), iu[1][mask].tolist()))
    return Graph(n, edges, f"G({n},{p})")


def random_connected_graph(n: int, seed: int, extra_edges: int = 0) -> Graph:
    """Uniform random tree plus extra random edges; always connected."""
    rng = np.random.default_rng(seed)
    edges = set()
    if n > 1:
        order = rng.permutation(n)
        for i in range(1, n):
            j = int(rng.integers(0, i))
            u, v = int(order[i]), int(order[j])
            edges.add((min(u, v), max(u, v)))
    tries = 0
    while len(edges) < n - 1 + extra_edges and tries < 50 * (extra_edges + 1):
        u, v = rng.integers(0, n, size=2)
        tries += 1
        if u != v:
            edges.add((min(int(u), int(v)), max(int(u), int(v))))
    return Graph(n, tuple(sorted(edges)), f"connected-{n}-{seed}")


def random_bounded_degree_graph(n: int, max_degree: int, seed: int,
                                tries: int = 200) -> Graph:
    rng = np.random.default_rng(seed)
    deg = np.zeros(n, dtype=int)
    edges = set()
    for _ in range(tries):
        u, v = rng.integers(0, n, size=2)
        u, v = int(u), int(v)
        e = (min(u, v), max(u, v))
        if u != v and e not in edges and deg[u] < max_degree \
                and deg[v] < max_degree:
            edges.add(e)
            deg[u] += 1
            deg[v] += 1
    return Graph(n, tuple(sorted(edges)), f"bounded-{n}-d{max_degree}-{seed}")


# ---------------------------------------------------------------------------
# operator representations


def adjacency_op(g: Graph, scaling="none") -> Operator:
    """Adjacency action on the uniform space, with optional scaling.

    `scaling` is "none", "by_vertex_count", ("by_constant", c) or
    ("by_norm", p, q); norm scaling uses the exact norm where available and
    the heuristic lower bound otherwise.
    """
    base = SparseOperator(uniform_space(g.n), g.adjacency_sparse(),
                          f"A({g.name or 'G'})")
    if scaling == "none" or scaling is None:
        return base
    if scaling == "by_vertex_count":
        return ScaledOperator(base, 1.0 / g.n, base.metadata + f"/{g.n}")
    kind = scaling[0]
    if kind == "by_constant":
        return ScaledOperator(base, 1.0 / float(scaling[1]),
                              base.metadata + f"/{scaling[1]}")
    if kind == "by_norm":
        if g.edge_count == 0:
            raise UsageError("norm scaling undefined on an edgeless graph")
        p, q = float(scaling[1]), float(scaling[2])
        if p == 2.0 and q == 2.0:
            nrm = norm_pq(base, 2, 2, mode="exact")
        elif p == float("inf") and q == 1.0 and g.n <= 22:
            nrm = norm_pq(base, p, q, mode="exact")
        else:
            nrm = norm_pq(base, p, q, mode="heuristic", seed=0)
        return ScaledOperator(base, 1.0 / nrm,
                              base.metadata + f"/norm({p},{q})")
    raise UsageError(f"unknown scaling {scaling!r}")


def stationary_space(g: Graph) -> FiniteSpace:
    """Degree-proportional weights; isolated vertices get weight zero."""
    if g.edge_count == 0:
        raise UsageError("stationary measure undefined on an edgeless graph")
    return make_space(g.degrees().astype(np.float64))


def markov_op(g: Graph):
    """Random-walk kernel on the stationary space: (vM)(i) is the neighbour
    average.  Returns (operator, space)."""
    space = stationary_space(g)
    op = MarkovKernelOperator(space, g.adjacency_sparse(),
                              g.degrees().astype(np.float64),
                              f"M({g.name or 'G'})")
    return op, space


def laplace_op(g: Graph) -> DenseOperator:
    """(vL)(i) = d(i) v(i) - neighbour sum, on the uniform space."""
    lap = np.diag(g.degrees().astype(np.float64)) - g.adjacency_dense()
    return DenseOperator(uniform_space(g.n), lap, f"L({g.name or 'G'})")


def degree_weighted_op(g: Graph):
    """(vF)(i) = sum over neighbours j of v(j) d(j), on the stationary space."""
    space = stationary_space(g)
    deg = g.degrees().astype(np.float64)
    kernel = sp.diags(deg) @ g.adjacency_sparse()
    return SparseOperator(space, kernel, f"F({g.name or 'G'})"), space


# ---------------------------------------------------------------------------
# uniform maps


@dataclass(frozen=True, eq=False)
class UniformMap:
    """Candidate (a,b)-uniform map from source onto target vertices."""

    source: Graph
    target: Graph
    mapping: np.ndarray
    a: int
    b: int

    def __post_init__(self):
        m = np.asarray(self.mapping, dtype=np.int64)
        if m.shape != (self.source.n,):
            raise UsageError("mapping length must equal source vertex count")
        if m.min() < 0 or m.max() >= self.target.n:
            raise UsageError("mapping image out of range")
        object.__setattr__(self, "mapping", m)


@dataclass(frozen=True)
class UniformMapReport:
    a: int
    b: int
    homomorphism_violations: tuple
    preimage_violations: tuple
    multiplicity_violations: tuple

    @property
    def is_uniform(self) -> bool:
        return not (self.homomorphism_violations or self.preimage_violations
                    or self.multiplicity_violations)


def check_uniform_map(m: UniformMap) -> UniformMapReport:
    """Exhaustively verify the three uniformity conditions; violations are
    listed, never raised."""
    f = m.mapping
    target_edges = set(m.target.edges)
    hom = tuple((u, v) for u, v in m.source.edges
                if f[u] == f[v]
                or (min(f[u], f[v]), max(f[u], f[v])) not in target_edges)
    counts = np.bincount(f, minlength=m.target.n)
    pre = tuple((int(v), int(counts[v])) for v in range(m.target.n)
                if counts[v] != m.a)
    nbrs_s = m.source.neighbors()
    nbrs_t = m.target.neighbors()
    mult = []
    for v in range(m.source.n):
        got = {}
        for u in nbrs_s[v]:
            got[f[u]] = got.get(f[u], 0) + 1
        for w in nbrs_t[f[v]]:
            if got.get(w, 0) != m.b:
                mult.append((v, int(w), got.get(w, 0)))
    return UniformMapReport(m.a, m.b, hom, pre, tuple(mult))


def tensor_square_projection(g: Graph) -> UniformMap:
    """First-coordinate projection G x G -> G; (n, d)-uniform for d-regular G."""
    deg = g.degrees()
    if deg.min() != deg.max():
        raise UsageError("projection map is uniform only for regular graphs")
    square = tensor_product(g, g)
    mapping = np.repeat(np.arange(g.n), g.n)
    return UniformMap(square, g, mapping, g.n, int(deg[0]))


def hypercube_halving_map() -> UniformMap:
    """The parity map Q_2 -> Q_1, the smallest doubling-tower step; (2,2)-uniform."""
    q2, q1 = hypercube(2), hypercube(1)
    mapping = np.array([bin(v).count("1") % 2 for v in range(4)])
    return UniformMap(q2, q1, mapping, 2, 2)


def pullback_profile_check(m: UniformMap, tuples) -> bool:
    """Atom-level equality of D_{A(G1)}(v_i) and D_{A(G2)/b}(v_i o f).

    Evaluated in exact rational arithmetic (floats are dyadic rationals), so
    "exact" means exact, not within a float tolerance.
    """
    nbrs_t = m.target.neighbors()
    nbrs_s = m.source.neighbors()
    f = m.mapping
    n1, n2 = m.target.n, m.source.n
    b = Fraction(m.b)
    for tup in tuples:
        tup = np.atleast_2d(np.asarray(tup, dtype=np.float64))
        frac = [[Fraction(x) for x in row] for row in tup]
        lhs = {}
        for x in range(n1):
            col = tuple(r[x] for r in frac) + tuple(
                sum(r[y] for y in nbrs_t[x]) for r in frac)
            lhs[col] = lhs.get(col, Fraction(0)) + Fraction(1, n1)
        rhs = {}
        for x in range(n2):
            col = tuple(r[f[x]] for r in frac) + tuple(
                sum(r[f[y]] for y in nbrs_s[x]) / b for r in frac)
            rhs[col] = rhs.get(col, Fraction(0)) + Fraction(1, n2)
        if lhs != rhs:
            return False
    return True


# ---------------------------------------------------------------------------
# colored stars


@dataclass(frozen=True, eq=False)
class ColoredStarDistribution:
    """Radius-1 colored neighbourhood statistics of one coloring.

    Star types are (root color, per-color neighbour counts); weights are the
    probabilities of types at a uniform random root.
    """

    d: int
    k: int
    weights: dict

    def __post_init__(self):
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise UsageError(f"star weights sum to {total}, not 1")
        for (root, counts) in self.weights:
            if not (0 <= root < self.k) or len(counts) != self.k \
                    or sum(counts) > self.d:
                raise UsageError("star type outside the (d,k) bounds")


def colored_star_stats(g: Graph, coloring, d: int | None = None,
                       k: int | None = None) -> ColoredStarDistribution:
    coloring = [int(c) for c in coloring]
    if len(coloring) != g.n:
        raise UsageError("coloring length must equal vertex count")
    k = k if k is not None else (max(coloring) + 1 if coloring else 1)
    deg = g.degrees()
    d = d if d is not None else int(deg.max())
    if deg.max() > d:
        raise UsageError(f"degree {int(deg.max())} exceeds bound {d}")
    weights = {}
    for v, nbrs in enumerate(g.neighbors()):
        counts = [0] * k
        for u in nbrs:
            counts[coloring[u]] += 1
        key = (coloring[v], tuple(counts))
        weights[key] = weights.get(key, 0.0) + 1.0 / g.n
    return ColoredStarDistribution(d, k, weights)


def star_profile_bijection_check(g: Graph, k: int) -> bool:
    """Exact set equality of the colored-star statistics and the partition
    profile pushed through the star bijection (full enumeration both ways)."""
    from .oracles import enumerate_colored_star_sets, enumerate_partition_measures

    star_side = enumerate_colored_star_sets(g.neighbors(), k)
    profile_side = set()
    for measure in enumerate_partition_measures(adjacency_op(g), k):
        counter = {}
        for point, mass in zip(measure.points, measure.masses):
            first, out = point[:k], point[k:]
            root = int(np.argmax(first))
            if abs(first[root] - 1.0) > 1e-9 or \
                    abs(first.sum() - 1.0) > 1e-9:  # pragma: no cover
                raise InvariantViolation("partition measure not in the "
                                         "basis-vector support")
            counts = tuple(int(round(c)) for c in out)
            if np.max(np.abs(np.array(counts) - out)) > 1e-9:  # pragma: no cover
                raise InvariantViolation("neighbour counts are not integers")
            mult = int(round(mass * g.n))
            key = (root, counts)
            counter[key] = counter.get(key, 0) + mult
        profile_side.add(frozenset(counter.items()))
    return star_side == profile_side
