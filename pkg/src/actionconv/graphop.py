"""Property checks for P-operators and the finite measure representation.

On a finite space the representing measure of a graphop is built atom by
atom: nu({x} x {y}) = (1_x, 1_y)_A.  No premeasure or extension machinery is
needed; symmetry, absolute continuity of the marginal and the reconstruction
identity are all direct matrix statements.
"""

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .measures import EmpiricalMeasure
from .operators import DenseOperator, FiniteSpace, Operator, bilinear_form


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the operator property battery at one tolerance."""

    tol: float
    self_adjoint: bool
    self_adjoint_deviation: float
    positive: bool
    min_quadratic_form: float
    positivity_preserving: bool
    positivity_witness: int | None
    c_value: float
    c_deviation: float
    c_regular: bool

    @property
    def is_graphop(self) -> bool:
        return self.positivity_preserving and self.self_adjoint

    @property
    def is_markov_graphop(self) -> bool:
        return (self.is_graphop and self.c_regular
                and abs(self.c_value - 1.0) <= self.tol)


def _weighted_kernel(op: Operator):
    """Dense kernel and weights restricted to the support of the measure."""
    supp = op.space.support
    dense = op.to_dense()[np.ix_(supp, supp)]
    return dense, op.space.weights[supp], supp


def check_properties(op: Operator, tol: float = 1e-9) -> PropertyReport:
    """Decide the operator property battery on the support of the measure.

    Self-adjointness compares (e_x, e_y)_A with (e_y, e_x)_A over all basis
    pairs; positivity looks at the least eigenvalue of the symmetrized
    weighted form matrix; positivity preservation reduces to kernel entry
    signs (indicators generate the nonnegative cone on a finite space);
    c-regularity measures the deviation of 1A from its mean.
    """
    kernel, w, supp = _weighted_kernel(op)
    form = kernel * w[None, :]  # form[x, y] = (e_x, e_y)_A
    sa_dev = float(np.abs(form - form.T).max()) if supp.size else 0.0

    sym = (form + form.T) / 2.0
    eigs = np.linalg.eigvalsh(sym) if supp.size else np.array([0.0])
    min_q = float(eigs.min())

    witness = None
    if supp.size:
        worst = np.unravel_index(np.argmin(kernel), kernel.shape)
        if kernel[worst] < -tol:
            witness = int(supp[worst[0]])

    ones = np.ones(op.size)
    image = op.apply_array(ones)[supp] if supp.size else np.array([])
    c_value = float(np.dot(image, w)) if supp.size else 0.0
    c_dev = float(np.abs(image - c_value).max()) if supp.size else 0.0

    return PropertyReport(
        tol=tol,
        self_adjoint=sa_dev <= tol,
        self_adjoint_deviation=sa_dev,
        positive=min_q >= -tol,
        min_quadratic_form=min_q,
        positivity_preserving=witness is None,
        positivity_witness=witness,
        c_value=c_value,
        c_deviation=c_dev,
        c_regular=c_dev <= tol,
    )


@dataclass(frozen=True, eq=False)
class MeasureRep:
    """Symmetric measure on Omega x Omega representing a graphop.

    nu[x, y] carries the mass of {x} x {y}; the marginal is absolutely
    continuous with respect to the space weights, and the total mass equals
    (1,1)_A.
    """

    space: FiniteSpace
    nu: np.ndarray
    marginal: np.ndarray
    degree_fn: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=np.float64)
        n = self.space.size
        if nu.shape != (n, n):
            raise UsageError("nu shape mismatch")
        if np.abs(nu - nu.T).max(initial=0.0) > 1e-12:
            raise UsageError("nu is not symmetric")
        if np.any(nu < 0):
            raise UsageError("nu has negative mass")
        zero = self.space.weights == 0
        if np.any(self.marginal[zero] > 0):
            raise UsageError("marginal charges a weight-zero point")
        object.__setattr__(self, "nu", nu)

    @property
    def total_mass(self) -> float:
        return float(self.nu.sum())


class NotGraphop(UsageError):
    """The operator failed the graphop check required for representation."""


def measure_rep(op: Operator, tol: float = 1e-9) -> MeasureRep:
    """Construct the representing measure of a graphop atom by atom."""
    report = check_properties(op, tol)
    if not report.is_graphop:
        raise NotGraphop(
            f"operator is not a graphop at tolerance {tol} "
            f"(self-adjoint dev {report.self_adjoint_deviation:.3e}, "
            f"witness {report.positivity_witness})")
    n = op.size
    w = op.space.weights
    nu = np.zeros((n, n))
    supp = op.space.support
    kernel = op.to_dense()
    block = kernel[np.ix_(supp, supp)] * w[supp][None, :]
    block = np.clip((block + block.T) / 2.0, 0.0, None)  # squash sign noise
    nu[np.ix_(supp, supp)] = block
    marginal = nu.sum(axis=1)
    degree = np.zeros(n)
    degree[supp] = op.apply_array(np.ones(n))[supp]
    rep = MeasureRep(op.space, nu, marginal, degree)
    reference = bilinear_form(op, np.ones(n), np.ones(n))
    if abs(rep.total_mass - reference) > 1e-10 * max(1.0, abs(reference)):
        raise UsageError("total mass of nu disagrees with (1,1)_A")
    return rep


def rebuild_operator(rep: MeasureRep) -> DenseOperator:
    """The unique graphop represented by nu: kernel K[x,y] = nu[x,y]/w(y)."""
    w = rep.space.weights
    kernel = np.zeros_like(rep.nu)
    pos = w > 0
    kernel[:, pos] = rep.nu[:, pos] / w[pos][None, :]
    return DenseOperator(rep.space, kernel, "rebuilt-from-nu")


def reconstruction_deviation(op: Operator, rep: MeasureRep, probes: int = 100,
                             seed: int = 0) -> float:
    """Largest support-restricted difference |v A - v A_nu| over random probes."""
    rebuilt = rebuild_operator(rep)
    rng = np.random.default_rng(seed)
    supp = op.space.support
    worst = 0.0
    for _ in range(probes):
        v = rng.uniform(-1.0, 1.0, size=op.size)
        diff = np.abs(op.apply_array(v) - rebuilt.apply_array(v))[supp]
        worst = max(worst, float(diff.max()))
    return worst


def fiber_measures(rep: MeasureRep):
    """Disintegration rows: nu_x = row x of nu over its marginal.

    Returns a list aligned with the space; entries are None where the
    marginal vanishes (the fiber is undefined there).
    """
    out = []
    points = np.arange(rep.space.size, dtype=np.float64)[:, None]
    for x in range(rep.space.size):
        m = rep.marginal[x]
        if m <= 0:
            out.append(None)
            continue
        out.append(EmpiricalMeasure(points, rep.nu[x] / m))
    return out


def degree_distribution(rep: MeasureRep) -> EmpiricalMeasure:
    """Distribution of the degree function 1A over the space weights."""
    return EmpiricalMeasure(rep.degree_fn[:, None], rep.space.weights)


def edge_density(rep: MeasureRep) -> float:
    """E(1A): equals the total mass of the representing measure."""
    return float(np.dot(rep.degree_fn, rep.space.weights))
