"""File formats: matrices (CSV/JSON), graphs (edge CSV/JSON), measures,
profiles, distance estimates, measure representations and reports.

Floats are written with 17 significant digits so every value round-trips.
"""

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .errors import UsageError
from .graphs import Graph
from .measures import EmpiricalMeasure, MeasureSet
from .operators import (DenseOperator, Operator, SparseOperator,
                        make_space, uniform_space)
from .profiles import Profile, SamplingBudget, StrategyKind


def fmt(x) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# matrices and operators


def load_matrix_csv(path) -> np.ndarray:
    """Dense row-major matrix CSV."""
    rows = []
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            if record:
                rows.append([float(x) for x in record])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise UsageError(f"{path}: not a square dense matrix CSV")
    return np.array(rows)


def save_matrix_csv(path, matrix: np.ndarray):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in np.asarray(matrix):
            writer.writerow([fmt(x) for x in row])


def operator_from_matrix_dict(payload: dict, metadata: str = "") -> Operator:
    """The sparse/dense matrix JSON schema:
    {"n": ..., "weights": [...] | "uniform", "entries": [[i,j,value],...]}
    with "dense": [[...]] accepted in place of "entries"."""
    if "n" not in payload:
        raise UsageError("matrix payload needs a size field 'n'")
    n = int(payload["n"])
    weights = payload.get("weights", "uniform")
    space = uniform_space(n) if (weights is None or weights == "uniform") \
        else make_space(np.asarray(weights, dtype=np.float64))
    if space.size != n:
        raise UsageError("weights length disagrees with n")
    if payload.get("dense") is not None:
        dense = np.asarray(payload["dense"], dtype=np.float64)
        if dense.shape != (n, n):
            raise UsageError("dense block has the wrong shape")
        return DenseOperator(space, dense, metadata)
    entries = payload.get("entries")
    if entries is None:
        raise UsageError("matrix payload needs 'entries' or 'dense'")
    return SparseOperator(space, [(int(i), int(j), float(v))
                                  for i, j, v in entries], metadata)


def operator_to_matrix_dict(op: Operator) -> dict:
    dense = op.to_dense()
    nz = np.nonzero(dense)
    return {
        "n": op.size,
        "weights": [float(w) for w in op.space.weights],
        "entries": [[int(i), int(j), float(dense[i, j])]
                    for i, j in zip(*nz)],
    }


def load_operator(path, metadata: str = "") -> Operator:
    """Matrix file: .json in the matrix schema, otherwise dense CSV."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            return operator_from_matrix_dict(json.load(fh), metadata or path.name)
    dense = load_matrix_csv(path)
    return DenseOperator(uniform_space(dense.shape[0]), dense,
                         metadata or path.name)


# ---------------------------------------------------------------------------
# graphs


def graph_from_dict(payload: dict, name: str = "") -> Graph:
    if "n" not in payload or "edges" not in payload:
        raise UsageError("graph payload needs 'n' and 'edges'")
    return Graph(int(payload["n"]),
                 tuple((int(u), int(v)) for u, v in payload["edges"]),
                 payload.get("name", name))


def graph_to_dict(g: Graph) -> dict:
    return {"n": g.n, "edges": [[u, v] for u, v in g.edges], "name": g.name}


def load_graph(path) -> Graph:
    """Graph file: .json schema, otherwise a 0-indexed 'u,v' edge-list CSV."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            return graph_from_dict(json.load(fh), path.stem)
    edges = []
    max_v = 0
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            if not record:
                continue
            u, v = int(record[0]), int(record[1])
            edges.append((u, v))
            max_v = max(max_v, u, v)
    return Graph(max_v + 1, tuple(edges), path.stem)


def save_graph_csv(path, g: Graph):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for u, v in g.edges:
            writer.writerow([u, v])


# ---------------------------------------------------------------------------
# measures and profiles


def measure_to_dict(m: EmpiricalMeasure) -> dict:
    return {"dim": m.dim,
            "atoms": [[[float(c) for c in p], float(mass)]
                      for p, mass in zip(m.points, m.masses)],
            "norm": m.norm_kind}


def measure_from_dict(payload: dict) -> EmpiricalMeasure:
    atoms = payload["atoms"]
    points = np.array([a[0] for a in atoms], dtype=np.float64)
    masses = np.array([a[1] for a in atoms], dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != int(payload["dim"]):
        raise UsageError("measure atoms disagree with dim")
    return EmpiricalMeasure(points, masses, payload.get("norm", "euclidean"))


def budget_to_dict(budget: SamplingBudget | None) -> dict | None:
    if budget is None:
        return None
    return {"vectors_per_k": budget.vectors_per_k,
            "strategies": [s.value for s in budget.strategies],
            "seed": budget.seed}


def budget_from_dict(payload: dict | None) -> SamplingBudget | None:
    if payload is None:
        return None
    return SamplingBudget(int(payload.get("vectors_per_k", 24)),
                          tuple(StrategyKind(s)
                                for s in payload.get("strategies",
                                                     [s.value for s in
                                                      SamplingBudget().strategies])),
                          int(payload.get("seed", 0)))


def profile_to_dict(profile: Profile) -> dict:
    return {"k": profile.k,
            "operator_id": profile.operator_id,
            "extended": profile.extended,
            "budget": budget_to_dict(profile.budget),
            "measures": [measure_to_dict(m) for m in profile.measures]}


def profile_from_dict(payload: dict) -> Profile:
    measures = tuple(measure_from_dict(m) for m in payload["measures"])
    dim = measures[0].dim
    return Profile(int(payload["k"]), MeasureSet(dim, measures),
                   payload.get("operator_id", ""),
                   budget_from_dict(payload.get("budget")),
                   bool(payload.get("extended", False)))


# ---------------------------------------------------------------------------
# tabular writers


def dm_estimate_csv(est) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["k", "d_h", "weight"])
    for k, d in est.per_k:
        writer.writerow([k, fmt(d), fmt(2.0 ** (-k))])
    writer.writerow(["total", fmt(est.value),
                     f"tail_bound={fmt(est.tail_bound)}"])
    return buf.getvalue()


def curve_result_csv(result) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([f"# family={result.family}", f"seed={result.seed}"]
                    + [f"{k}={v}" for k, v in result.metadata.items()])
    extra_keys = sorted({k for row in result.rows for k in row.extras})
    writer.writerow(["size", "estimate", "per_k", "wall_time"] + extra_keys)
    for row in result.rows:
        per_k = ";".join(f"{k}:{fmt(d)}" for k, d in row.per_k)
        writer.writerow([row.size, fmt(row.estimate), per_k,
                         fmt(row.wall_time)]
                        + [row.extras.get(k, "") for k in extra_keys])
    return buf.getvalue()


def measure_rep_csv(rep) -> str:
    """Sparse triples (x, y, mass) plus marginal/degree columns."""
    buf = _io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["x", "y", "mass"])
    xs, ys = np.nonzero(rep.nu)
    for x, y in zip(xs, ys):
        writer.writerow([int(x), int(y), fmt(rep.nu[x, y])])
    writer.writerow([])
    writer.writerow(["point", "weight", "marginal", "degree"])
    for x in range(rep.space.size):
        writer.writerow([x, fmt(rep.space.weights[x]), fmt(rep.marginal[x]),
                         fmt(rep.degree_fn[x])])
    return buf.getvalue()


def write_text(path, text: str):
    Path(path).write_text(text)


def write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False))
