"""States, density operators, integral kernels, and composite systems.

Grid states are function-valued: a StateVector stores psi(q_j) with
sum |psi|^2 h^d = 1 in the Lebesgue representation. Operators are stored as
matrices in the orthonormal discrete basis, which absorbs the cell volume:
the plain matrix trace is the quadrature trace, and T = |psi><psi| becomes
outer(psi, conj(psi)) * h^d. The canonical internal representation is
Lebesgue; the Gaussian-weighted one is produced on demand by the
square-root-density isomorphism and differs only by a diagonal conjugation.

All values are immutable after construction; operations are pure functions.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (InvalidDensity, NonPositiveOperator, RepresentationMismatch,
                     SpecMismatch, UnknownSubsystem, UnnormalizedState,
                     WrongRepresentation)
from .lattice import PhaseSpaceSpec
from .tolerances import DEFAULT_TOL

LEBESGUE = "lebesgue"
GAUSSIAN = "gaussian"


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LevelSpace:
    """Abstract k-level factor (truncated oscillator ladder)."""

    dim: int

    def ladder(self):
        return _frozen(np.diag(np.sqrt(np.arange(1, self.dim)), 1))

    def position_op(self):
        a = self.ladder()
        return _frozen((a + a.conj().T) / math.sqrt(2))

    def momentum_op(self):
        a = self.ladder()
        return _frozen(1j * (a.conj().T - a) / math.sqrt(2))

    def number_op(self):
        a = self.ladder()
        return _frozen(a.conj().T @ a)


def space_dim(space):
    if isinstance(space, PhaseSpaceSpec):
        return space.hilbert_dim
    if isinstance(space, (LevelSpace, CompositeSystem)):
        return space.dim
    raise SpecMismatch(f"unknown space type {type(space)!r}")


@dataclass(frozen=True)
class CompositeSystem:
    """Ordered, labeled tensor factors; ordering is fixed at construction."""

    factors: tuple  # of (label, space)

    def __post_init__(self):
        labels = [lab for lab, _ in self.factors]
        if len(set(labels)) != len(labels):
            raise SpecMismatch(f"duplicate subsystem labels: {labels}")

    @property
    def labels(self):
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self):
        return tuple(space_dim(s) for _, s in self.factors)

    @property
    def dim(self):
        return int(np.prod(self.dims))

    def space_of(self, label):
        for lab, s in self.factors:
            if lab == label:
                return s
        raise UnknownSubsystem(f"no subsystem {label!r} in {self.labels}")

    def index_of(self, label):
        for i, (lab, _) in enumerate(self.factors):
            if lab == label:
                return i
        raise UnknownSubsystem(f"no subsystem {label!r} in {self.labels}")

    def keep(self, labels):
        """Sub-composite of the kept factors, original order preserved."""
        keep_set = set(labels)
        missing = keep_set - set(self.labels)
        if missing:
            raise UnknownSubsystem(f"unknown subsystem(s) {sorted(missing)}")
        return CompositeSystem(tuple((lab, s) for lab, s in self.factors
                                     if lab in keep_set))

    def axis_geometry(self):
        """Concatenated per-axis (n, L) of all grid factors.

        Raises SpecMismatch if any factor is not grid-based.
        """
        axes = []
        for lab, s in self.factors:
            if not isinstance(s, PhaseSpaceSpec):
                raise SpecMismatch(f"subsystem {lab!r} has no phase-space grid")
            axes.extend(s.axis_geometry())
        return axes


def _collapse(space):
    """A one-factor composite collapses to its factor space."""
    if isinstance(space, CompositeSystem) and len(space.factors) == 1:
        return space.factors[0][1]
    return space


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the position grid with a representation tag."""

    values: np.ndarray
    rep: str
    space: object
    tol: object = DEFAULT_TOL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).ravel()
        if v.size != space_dim(self.space):
            raise SpecMismatch(f"state length {v.size} != dim {space_dim(self.space)}")
        object.__setattr__(self, "values", _frozen(v))
        nrm = self.norm()
        if abs(nrm - 1.0) > self.tol.state_norm:
            raise UnnormalizedState(f"norm {nrm} deviates from 1 beyond tolerance")

    def _weights(self):
        spec = self.space
        if isinstance(spec, CompositeSystem):
            w = 1.0
            for _, s in spec.factors:
                if isinstance(s, PhaseSpaceSpec):
                    w *= s.grid.position_cell
            return w
        if not isinstance(spec, PhaseSpaceSpec):
            return 1.0
        w = spec.grid.position_cell
        if self.rep == GAUSSIAN:
            return w * spec.mu_density_grid().ravel()
        return w

    def norm(self):
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2 * self._weights())))

    def inner(self, other):
        if other.rep != self.rep:
            raise RepresentationMismatch("inner product needs matching representations")
        return complex(np.sum(np.conj(self.values) * other.values * self._weights()))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian PSD trace-one matrix over the position basis."""

    matrix: np.ndarray
    rep: str
    space: object
    tol: object = DEFAULT_TOL

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        N = space_dim(self.space)
        if m.shape != (N, N):
            raise SpecMismatch(f"matrix shape {m.shape} != ({N}, {N})")
        object.__setattr__(self, "matrix", _frozen(m))

    def validate(self):
        """Check Hermiticity, unit trace, PSD floor; raise on violation."""
        herm = self._hermiticity_defect()
        if herm > self.tol.hermiticity:
            raise InvalidDensity(f"hermiticity defect {herm:.3e}")
        tr = self.trace()
        if abs(tr - 1.0) > self.tol.trace_one:
            raise InvalidDensity(f"trace {tr} deviates from 1")
        lam = self.min_eigenvalue()
        if lam < -self.tol.psd_floor:
            raise NonPositiveOperator(f"eigenvalue {lam:.3e} below the PSD floor")
        return self

    def _hermiticity_defect(self):
        if self.rep == GAUSSIAN and isinstance(self.space, PhaseSpaceSpec):
            # self-adjointness in the mu-weighted inner product
            return float(np.abs(self.matrix - _gauss_adjoint(self)).max())
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def trace(self):
        return float(np.trace(self.matrix).real)

    def purity(self):
        return float(np.trace(self.matrix @ self.matrix).real)

    def min_eigenvalue(self):
        m = self.matrix
        if self.rep == GAUSSIAN and isinstance(self.space, PhaseSpaceSpec):
            m = to_lebesgue_rep(self).matrix
        return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())


def _gauss_adjoint(T):
    g = T.space.mu_density_grid().ravel()
    return (T.matrix.conj().T * g[None, :]) / g[:, None]


def pure_density(phi):
    """T = |phi><phi| for a normalized state."""
    nrm = phi.norm()
    if abs(nrm - 1.0) > phi.tol.state_norm:
        raise UnnormalizedState(f"norm {nrm} deviates from 1")
    if phi.rep == GAUSSIAN:
        return to_gaussian_rep(pure_density(to_lebesgue_rep(phi)))
    w = phi._weights()
    m = np.outer(phi.values, phi.values.conj()) * w
    return DensityOperator(m, phi.rep, phi.space, phi.tol)


def mix(weighted_ops):
    """Convex mixture of density operators."""
    pairs = list(weighted_ops)
    total = sum(w for w, _ in pairs)
    first = pairs[0][1]
    m = sum((w / total) * op.matrix for w, op in pairs)
    return DensityOperator(m, first.rep, first.space, first.tol)


def to_gaussian_rep(x):
    """Lebesgue -> Gaussian-weighted representation (division by sqrt density)."""
    if x.rep != LEBESGUE:
        raise WrongRepresentation(f"expected lebesgue input, got {x.rep}")
    spec = x.space
    if not isinstance(spec, PhaseSpaceSpec):
        raise WrongRepresentation("representation change needs a grid space")
    s = np.sqrt(spec.mu_density_grid().ravel())
    if isinstance(x, StateVector):
        return StateVector(x.values / s, GAUSSIAN, spec, x.tol)
    m = x.matrix * (s[None, :] / s[:, None])
    return DensityOperator(m, GAUSSIAN, spec, x.tol)


def to_lebesgue_rep(x):
    """Gaussian-weighted -> Lebesgue representation."""
    if x.rep != GAUSSIAN:
        raise WrongRepresentation(f"expected gaussian input, got {x.rep}")
    spec = x.space
    s = np.sqrt(spec.mu_density_grid().ravel())
    if isinstance(x, StateVector):
        return StateVector(x.values * s, LEBESGUE, spec, x.tol)
    m = x.matrix * (s[:, None] / s[None, :])
    return DensityOperator(m, LEBESGUE, spec, x.tol)


def tensor(a, b, sys):
    """Kronecker product of two density operators in the system's order."""
    if len(sys.factors) != 2:
        raise SpecMismatch("tensor(a, b, sys) needs a two-factor system")
    for op, (lab, s) in zip((a, b), sys.factors):
        if space_dim(op.space) != space_dim(s):
            raise SpecMismatch(f"operator does not match factor {lab!r}")
    if a.rep != b.rep:
        raise RepresentationMismatch(f"{a.rep} vs {b.rep}")
    return DensityOperator(np.kron(a.matrix, b.matrix), a.rep, sys, a.tol)


def tensor_many(ops, sys):
    if len(ops) != len(sys.factors):
        raise SpecMismatch("one operator per factor required")
    m = ops[0].matrix if hasattr(ops[0], "matrix") else ops[0]
    for op in ops[1:]:
        m = np.kron(m, op.matrix if hasattr(op, "matrix") else op)
    rep = getattr(ops[0], "rep", LEBESGUE)
    return DensityOperator(m, rep, sys, DEFAULT_TOL)


def partial_trace(T, keep):
    """Reduced density operator on the kept factors (order preserved)."""
    sys = T.space
    if not isinstance(sys, CompositeSystem):
        raise UnknownSubsystem("partial_trace needs an operator on a composite system")
    if isinstance(keep, str):
        keep = (keep,)
    kept_sys = sys.keep(keep)
    dims = sys.dims
    k = len(dims)
    m = T.matrix.reshape(dims + dims)
    keep_idx = [sys.index_of(lab) for lab in sys.labels if lab in set(keep)]
    letters = "abcdefghijklmnopqrstuvwxyz"
    bra = list(letters[:k])
    ket = []
    out_bra, out_ket = [], []
    for i in range(k):
        if i in keep_idx:
            ket.append(letters[k + i])
            out_bra.append(bra[i])
            out_ket.append(letters[k + i])
        else:
            ket.append(bra[i])
    expr = "".join(bra) + "".join(ket) + "->" + "".join(out_bra) + "".join(out_ket)
    red = np.einsum(expr, m)
    nk = int(np.prod([dims[i] for i in keep_idx]))
    return DensityOperator(red.reshape(nk, nk), T.rep, _collapse(kept_sys), T.tol)


# --- integral kernels -------------------------------------------------------

RHO1 = "rho1"
RHO2 = "rho2"


@dataclass(frozen=True)
class IntegralKernel:
    """Two-point kernel of a density operator with split Gaussian weights.

    rho1 splits the Gaussian weights symmetrically and integrates against mu;
    rho2 keeps a measure in its second argument, stored as density times cell
    volume. Both act on Gaussian-representation states.
    """

    values: np.ndarray
    kind: str
    space: object

    def apply(self, phi):
        """(T phi)(q) for a Gaussian-representation state, as raw grid values."""
        if phi.rep != GAUSSIAN:
            raise WrongRepresentation("kernels act on gaussian-representation states")
        spec = self.space
        Q = _quarter_form(spec)
        cell = spec.grid.position_cell
        g = spec.mu_density_grid().ravel()
        if self.kind == RHO1:
            return np.exp(Q) * (self.values @ (np.exp(Q) * phi.values * g * cell))
        return np.exp(Q) * (self.values @ (np.exp(-Q) * phi.values * cell))


def _quarter_form(spec):
    """(1/4) <B^-1 q, q> on the position grid, flattened."""
    mesh = spec.grid.position_mesh()
    prec = spec.mu.precision
    quad = 0.0
    for i in range(spec.d):
        for j in range(spec.d):
            quad = quad + prec[i, j] * mesh[i] * mesh[j]
    return 0.25 * np.broadcast_to(quad, (spec.n_per_axis,) * spec.d).ravel()


def kernel_of(T, kind=RHO1):
    """Integral kernel of a density operator.

    rho1[u, v] = K[u, v] / c_mu with K the Lebesgue kernel (matrix / cell) and
    c_mu the Gaussian normalization constant; rho2's density equals K itself,
    so its measure values (density x cell) are the matrix entries.
    """
    spec = T.space
    if not isinstance(spec, PhaseSpaceSpec):
        raise SpecMismatch("kernels need a grid space")
    Tl = T if T.rep == LEBESGUE else to_lebesgue_rep(T)
    K = Tl.matrix / spec.grid.position_cell
    if kind == RHO1:
        c_mu = math.exp(spec.mu.log_norm)
        return IntegralKernel(_frozen(K / c_mu), RHO1, spec)
    if kind == RHO2:
        return IntegralKernel(_frozen(K), RHO2, spec)
    raise SpecMismatch(f"unknown kernel kind {kind!r}")


def apply_operator(T, phi):
    """Tphi as a function-valued state (not renormalized)."""
    if T.rep != phi.rep:
        raise RepresentationMismatch(f"{T.rep} vs {phi.rep}")
    return T.matrix @ phi.values
