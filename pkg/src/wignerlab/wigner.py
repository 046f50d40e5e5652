"""Wigner fields: transforms, Gaussian-relative densities, pairing, reduction.

wigner_from_density and inverse_wigner are exact mutual inverses (lattice
transform through the Weyl-function samples); wigner_from_weyl_function
inverts externally supplied samples of the Weyl function on the dual lattice.
The Gaussian-relative field (eta density) is produced by explicit pointwise
division at the end of the weight-invariant Lebesgue pipeline; all comparisons
between eta-relative objects use the total-variation metric, the natural norm
for densities relative to mu x nu.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import engine
from .errors import (GridMismatch, NotNormalized, NonPositiveOperator,
                     SpecMismatch, UnderflowRegion, UnknownSubsystem)
from .hilbert import (LEBESGUE, CompositeSystem, DensityOperator, _collapse,
                      to_lebesgue_rep)
from .lattice import PhaseSpaceSpec
from .tolerances import DEFAULT_TOL

WIGNER = "wigner_measure_density"
ETA = "eta_density"
SYMBOL = "symbol"
WEYL_SAMPLES = "weyl_function_samples"


def _space_axes(space):
    if isinstance(space, PhaseSpaceSpec):
        return space.axis_geometry()
    if isinstance(space, CompositeSystem):
        return space.axis_geometry()
    raise SpecMismatch("phase-space fields need grid-based spaces")


def _total_d(space):
    return len(_space_axes(space))


@dataclass(frozen=True)
class PhaseSpaceField:
    """Scalar values on the phase grid, shape (q-axes, then p-axes)."""

    values: np.ndarray
    role: str
    space: object
    measure: str = "lebesgue"
    tol: object = DEFAULT_TOL

    def __post_init__(self):
        axes = _space_axes(self.space)
        dims = tuple(n for n, _ in axes)
        v = np.asarray(self.values)
        if v.shape != dims + dims:
            raise GridMismatch(f"field shape {v.shape} != {dims + dims}")
        v = np.ascontiguousarray(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def axes(self):
        return _space_axes(self.space)

    def cell_volume(self):
        vol = 1.0
        for n, L in self.axes:
            vol *= (2.0 * L / n) * (math.pi / L)
        return vol

    def integrate(self):
        """Lebesgue quadrature over the phase grid."""
        return complex(self.values.sum() * self.cell_volume())

    def reference_density(self):
        """mu x nu density on this field's phase grid."""
        space = self.space
        if isinstance(space, PhaseSpaceSpec):
            return space.mu_nu_density_grid()
        # factorized product measure: broadcast each factor's density
        d = _total_d(space)
        out = 1.0
        qpos = 0
        for _, s in space.factors:
            sub = s.mu_nu_density_grid()
            shape = [1] * (2 * d)
            for i in range(s.d):
                shape[qpos + i] = s.n_per_axis
                shape[d + qpos + i] = s.n_per_axis
            out = out * sub.reshape(shape)
            qpos += s.d
        return out

    def eta_integrate(self):
        """Quadrature against the mu x nu reference measure (eta role)."""
        g = self.reference_density()
        return complex((self.values * g).sum() * self.cell_volume())

    def mass(self):
        if self.role == ETA:
            return self.eta_integrate().real
        return self.integrate().real

    def q_mesh(self):
        d = _total_d(self.space)
        coords = [engine.axis_coords(n, L)[0] for n, L in self.axes]
        grids = []
        for i in range(d):
            shape = [1] * (2 * d)
            shape[i] = coords[i].size
            grids.append(coords[i].reshape(shape))
        return grids

    def p_mesh(self):
        d = _total_d(self.space)
        coords = [engine.axis_coords(n, L)[1] for n, L in self.axes]
        grids = []
        for i in range(d):
            shape = [1] * (2 * d)
            shape[d + i] = coords[i].size
            grids.append(coords[i].reshape(shape))
        return grids


def _real_with_residue_check(values, tol, what):
    scale = max(float(np.abs(values.real).max()), 1e-30)
    resid = float(np.abs(values.imag).max()) / scale
    if resid > tol.imaginary_residue:
        import warnings
        warnings.warn(f"{what}: relative imaginary residue {resid:.2e}",
                      RuntimeWarning, stacklevel=3)
    return values.real


def wigner_from_density(T):
    """Wigner field of a density operator (exact lattice kernel transform)."""
    Tl = T if T.rep == LEBESGUE else to_lebesgue_rep(T)
    axes = _space_axes(T.space)
    W = engine.density_to_wigner(Tl.matrix, axes)
    vals = _real_with_residue_check(W, T.tol, "wigner_from_density")
    return PhaseSpaceField(vals, WIGNER, T.space, "lebesgue", T.tol)


def wigner_from_weyl_function(samples):
    """Wigner field from Weyl-function samples on the dual lattice.

    Accepts a PhaseSpaceField with role weyl_function_samples or a raw complex
    array shaped like the dual grid of the target space.
    """
    if isinstance(samples, PhaseSpaceField):
        if samples.role != WEYL_SAMPLES:
            raise GridMismatch(f"expected {WEYL_SAMPLES} role, got {samples.role}")
        space, vals, tol = samples.space, samples.values, samples.tol
    else:
        raise GridMismatch("wigner_from_weyl_function needs a PhaseSpaceField")
    axes = _space_axes(space)
    W = engine.chi_to_wigner(np.asarray(vals, complex), axes)
    out = _real_with_residue_check(W, tol, "wigner_from_weyl_function")
    return PhaseSpaceField(out, WIGNER, space, "lebesgue", tol)


def weyl_samples_field(T):
    """Weyl-function samples of T as a dual-lattice field."""
    Tl = T if T.rep == LEBESGUE else to_lebesgue_rep(T)
    axes = _space_axes(T.space)
    chi = engine.density_to_chi(Tl.matrix, axes)
    return PhaseSpaceField(chi, WEYL_SAMPLES, T.space, "lebesgue", T.tol)


def inverse_wigner(W, validate=True):
    """Density operator whose Wigner field is W (exact inverse transform).

    With validate=True a PSD violation beyond the floor raises
    NonPositiveOperator; with validate=False the operator is returned as is,
    reported through its min_eigenvalue, never silently fixed.
    """
    mass = W.integrate().real
    if abs(mass - 1.0) > W.tol.normalization_input:
        raise NotNormalized(f"field integrates to {mass}, expected 1")
    axes = W.axes
    T = engine.wigner_to_density(np.asarray(W.values, complex), axes)
    T = 0.5 * (T + T.conj().T)
    space = W.space
    out = DensityOperator(T, LEBESGUE, space, W.tol)
    if validate:
        lam = out.min_eigenvalue()
        if lam < -W.tol.psd_floor:
            raise NonPositiveOperator(
                f"inverse transform has eigenvalue {lam:.3e} below the PSD floor")
    return out


def symplectic_fourier(field_values, axes, sign=+1):
    """Symplectic Fourier transform with kernel exp(sign*i(<p,q'> + <p',q>)).

    Normalized by (2 pi)^-d per application; applying with sign and then -sign
    returns the input exactly (discrete duality of the grids).
    """
    d = len(axes)
    X = np.asarray(field_values, dtype=complex)
    for i, (n, L) in enumerate(axes):
        q, p, h, dp = engine.axis_coords(n, L)
        ker_qp = np.exp(sign * 1j * np.outer(q, p))
        # q-axis of input pairs with output p'-axis; p-axis with output q'-axis
        X = np.moveaxis(X, (i, d + i), (0, 1))
        Y = np.einsum('qp...,up->qu...', X, ker_qp) * dp      # p -> q' (axis u)
        Z = np.einsum('qu...,qw->uw...', Y, ker_qp) * h       # q -> p' (axis w)
        X = np.moveaxis(Z / (2.0 * math.pi), (0, 1), (i, d + i))
    return X


def eta_density(W):
    """Gaussian-relative density: Phi = W / density(mu x nu), pointwise.

    Raises UnderflowRegion if the reference density falls below the underflow
    floor where |W| is non-negligible (domain too small); where both are
    negligible the quotient is set to zero.
    """
    if W.role != WIGNER:
        raise GridMismatch(f"eta_density expects a {WIGNER} field")
    g = W.reference_density()
    floor = W.tol.underflow_floor
    bad = (g < floor) & (np.abs(W.values) > W.tol.underflow_field)
    if bad.any():
        raise UnderflowRegion(
            f"reference density below {floor:g} at {int(bad.sum())} points "
            "with non-negligible W; enlarge the domain")
    safe = np.where(g < floor, 1.0, g)
    vals = np.where(g < floor, 0.0, W.values / safe)
    return PhaseSpaceField(vals, ETA, W.space, "mu_nu", W.tol)


def eta_to_wigner(phi):
    """Inverse of eta_density: multiply by the reference density."""
    if phi.role != ETA:
        raise GridMismatch(f"expected an {ETA} field")
    return PhaseSpaceField(phi.values * phi.reference_density(), WIGNER,
                           phi.space, "lebesgue", phi.tol)


def pair_expectation(field, symbol):
    """Integral of a symbol against W (Lebesgue) or Phi (against mu x nu)."""
    space = field.space
    d = _total_d(space)
    if isinstance(space, PhaseSpaceSpec):
        G = symbol.evaluate_phase_grid(space)
    else:
        G = symbol.evaluate(field.q_mesh(), field.p_mesh())
        G = np.broadcast_to(G, field.values.shape)
    if field.role == WIGNER:
        return float((G * field.values).sum() * field.cell_volume())
    if field.role == ETA:
        g = field.reference_density()
        return float((G * field.values * g).sum() * field.cell_volume())
    raise GridMismatch(f"cannot pair against a {field.role} field")


def _dropped_axis_positions(space, keep):
    if not isinstance(space, CompositeSystem):
        raise UnknownSubsystem("reduction needs a composite-system field")
    if isinstance(keep, str):
        keep = (keep,)
    keep_set = set(keep)
    missing = keep_set - set(space.labels)
    if missing:
        raise UnknownSubsystem(f"unknown subsystem(s) {sorted(missing)}")
    d = _total_d(space)
    drop_q = []
    pos = 0
    for lab, s in space.factors:
        if lab not in keep_set:
            drop_q.extend(range(pos, pos + s.d))
        pos += s.d
    drop = tuple(drop_q) + tuple(d + i for i in drop_q)
    kept_space = _collapse(space.keep(keep))
    return drop, kept_space


def reduce_wigner(W, keep):
    """Marginal Wigner field of the kept subsystem (quadrature over the rest)."""
    drop, kept_space = _dropped_axis_positions(W.space, keep)
    cell = 1.0
    for i in drop[:len(drop) // 2]:
        n, L = W.axes[i]
        cell *= (2.0 * L / n) * (math.pi / L)
    vals = W.values.sum(axis=drop) * cell
    return PhaseSpaceField(vals, WIGNER, kept_space, "lebesgue", W.tol)


def reduce_eta(phi, keep):
    """Gaussian-relative reduction: eta-average over the dropped factors.

    Phi_1 = integral of Phi against the dropped factors' mu x nu measure,
    the weight-invariant form of the reduced-density display; it equals
    eta_density(reduce_wigner(eta_to_wigner(Phi))) by construction.
    """
    if phi.role != ETA:
        raise GridMismatch(f"expected an {ETA} field")
    drop, kept_space = _dropped_axis_positions(phi.space, keep)
    g = phi.reference_density()
    cell = 1.0
    for i in drop[:len(drop) // 2]:
        n, L = phi.axes[i]
        cell *= (2.0 * L / n) * (math.pi / L)
    num = (phi.values * g).sum(axis=drop) * cell
    reduced_w = PhaseSpaceField(num, WIGNER, kept_space, "lebesgue", phi.tol)
    return eta_density(reduced_w)


def marginal_position(W):
    """Position density: integral of W over all momenta."""
    d = _total_d(W.space)
    cell = 1.0
    for n, L in W.axes:
        cell *= math.pi / L
    return W.values.sum(axis=tuple(range(d, 2 * d))) * cell


def marginal_momentum(W):
    d = _total_d(W.space)
    cell = 1.0
    for n, L in W.axes:
        cell *= 2.0 * L / n
    return W.values.sum(axis=tuple(range(d))) * cell


def purity_estimate(W):
    """(2 pi)^d integral of W^2; equals tr T^2 for faithful states."""
    d = _total_d(W.space)
    return float((2.0 * math.pi) ** d * (W.values ** 2).sum() * W.cell_volume())


def total_variation(phi_a, phi_b):
    """TV distance between two eta densities: integral |a - b| d(mu x nu)."""
    g = phi_a.reference_density()
    diff = np.abs(np.asarray(phi_a.values) - np.asarray(phi_b.values))
    return float((diff * g).sum() * phi_a.cell_volume())
