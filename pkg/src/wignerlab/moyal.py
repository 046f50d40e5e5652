"""Moyal sine-series evolution of Wigner fields plus the density-operator oracle.

The right-hand side is the truncated sine series of iterated symplectic
contractions,

    dW/dt = sum_{j=1..K} 2 (-1)^j (1/2)^(2j-1) / (2j-1)! * {W, H}^(2j-1),

where {.,.}^(n) contracts the n-th derivative tensors through n copies of the
symplectic matrix (first order: the canonical Poisson bracket). For polynomial
H the series terminates, so K only matters beyond the terminating order. The
eta-density form acts on Phi through the Leibniz rule with Wick-formula
derivatives of the Gaussian reference measure, never dividing by the density.

One evolution run owns its field buffer; snapshots are immutable copies.
"""

import itertools
import math
import warnings
from dataclasses import dataclass, field as dc_field
from math import comb, factorial

import numpy as np

from .engine import (FiniteDifferenceDifferentiator, SpectralDifferentiator,
                     axis_coords)
from .errors import EscapeDetected, OrderOverflow, UnstableStep
from .hilbert import DensityOperator, LEBESGUE, to_lebesgue_rep
from .tolerances import DEFAULT_TOL
from .wigner import ETA, WIGNER, PhaseSpaceField
from .weyl import weyl_quantize

MAX_BRACKET_ORDER = 7

SPECTRAL = "spectral"
FD4 = "finite_difference_4th"


# --- Wick polynomial engine --------------------------------------------------

def _poly_mul_linear(poly, linear):
    """Multiply a coefficient-dict polynomial by sum_i linear[i] x_i."""
    out = {}
    for alpha, c in poly.items():
        for i, li in enumerate(linear):
            if li == 0.0:
                continue
            beta = list(alpha)
            beta[i] += 1
            beta = tuple(beta)
            out[beta] = out.get(beta, 0.0) + c * li
    return out


def _poly_dir_derivative(poly, direction):
    out = {}
    for alpha, c in poly.items():
        for i, hi in enumerate(direction):
            if hi == 0.0 or alpha[i] == 0:
                continue
            beta = list(alpha)
            beta[i] -= 1
            beta = tuple(beta)
            out[beta] = out.get(beta, 0.0) + c * alpha[i] * hi
    return out


def _poly_add(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + v
    return out


def wick_polynomial(precision, directions):
    """Polynomial w with D_{h1..hk} g = g * w for the Gaussian density g.

    Built by the recursion w' = -<P h, x> w + D_h w, the derivative version
    of the Wick formulas (first order: -<B^-1 h, x>; second order adds the
    constant -<B^-1 h1, h2>).
    """
    dim = precision.shape[0]
    w = {(0,) * dim: 1.0}
    for h in directions:
        ph = precision @ np.asarray(h, dtype=float)
        w = _poly_add(_poly_mul_linear(w, -ph), _poly_dir_derivative(w, h))
    return w


def _poly_eval_point(poly, x):
    out = 0.0
    for alpha, c in poly.items():
        term = c
        for xi, ai in zip(x, alpha):
            if ai:
                term *= xi ** ai
        out += term
    return out


def gaussian_measure_derivative(measure, directions, point):
    """k-th directional derivative of the Gaussian density at a point.

    Returns density(point) times the Wick polynomial value; k is capped at 4.
    """
    directions = list(directions)
    if len(directions) > 4:
        raise OrderOverflow(f"directional order {len(directions)} exceeds 4")
    x = np.asarray(point, dtype=float)
    w = wick_polynomial(measure.precision, directions)
    return measure.density(x) * _poly_eval_point(w, x)


# --- bracket contractions -----------------------------------------------------

def _count_vectors(total, dims):
    """All nonnegative integer vectors of the given length summing to total."""
    if dims == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _count_vectors(total - first, dims - 1):
            yield (first,) + rest


def bracket_pairs(n, d):
    """(k, m, multiplicity, sign) for {Psi, H}^(n) grouped by axis counts.

    Psi carries derivatives d_q^k d_p^m, H carries d_q^m d_p^k, the sign is
    (-1)^|m| and the multiplicity n!/(prod k! prod m!).
    """
    for km in _count_vectors(n, 2 * d):
        k, m = km[:d], km[d:]
        mult = factorial(n)
        for a in k:
            mult //= factorial(a)
        for a in m:
            mult //= factorial(a)
        yield k, m, mult, (-1) ** sum(m)


def _h_field(symbol, spec, dq, dp, sampled_diff=None):
    """Grid field of d_q^dq d_p^dp H, or None when identically zero."""
    part = symbol.derivative(dq, dp)
    poly = None
    if part.terms:
        mesh = spec.grid.phase_mesh()
        poly = np.asarray(part.evaluate(mesh[:spec.d], mesh[spec.d:]), float)
        poly = np.broadcast_to(poly, (spec.n_per_axis,) * (2 * spec.d))
    if symbol.sampled is not None and sampled_diff is not None:
        samp = sampled_diff.derivative(tuple(dq) + tuple(dp))
        poly = samp if poly is None else poly + samp
    return poly


def sine_coefficient(j):
    """Coefficient of {W, H}^(2j-1) in the sine series (alternating)."""
    n = 2 * j - 1
    return 2.0 * (-1) ** j * 0.5 ** n / factorial(n)


@dataclass
class MoyalGenerator:
    """Evolution generator: a symbol, a truncation count, precomputed fields.

    K counts the odd-order terms (term j uses bracket order 2j-1). For a
    polynomial symbol of degree deg, orders above deg vanish identically and
    the stored derivative fields are pruned to the exactly nonzero ones.
    """

    symbol: object
    spec: object
    truncation: int = 3
    scheme: str = SPECTRAL
    tol: object = DEFAULT_TOL
    _fields: dict = dc_field(default_factory=dict, repr=False)
    _wick: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.truncation < 1:
            raise OrderOverflow("K must be >= 1")
        if 2 * self.truncation - 1 > MAX_BRACKET_ORDER:
            raise OrderOverflow(
                f"bracket order {2 * self.truncation - 1} exceeds {MAX_BRACKET_ORDER}")
        self._rebuild(self.symbol.terms_at(0.0))

    def _rebuild(self, terms):
        from .weyl import HamiltonianSymbol
        sym = HamiltonianSymbol(terms, sampled=self.symbol.sampled, d=self.spec.d)
        sampled_diff = None
        if sym.sampled is not None:
            sampled_diff = SpectralDifferentiator(sym.sampled, self._spacings())
        self._fields.clear()
        for j in range(1, self.effective_truncation(sym) + 1):
            n = 2 * j - 1
            for k, m, mult, sign in bracket_pairs(n, self.spec.d):
                f = _h_field(sym, self.spec, m, k, sampled_diff)
                if f is not None:
                    self._fields[(k, m)] = f
        self._static_terms = terms

    def effective_truncation(self, sym=None):
        sym = sym if sym is not None else self.symbol
        if sym.sampled is not None:
            return self.truncation
        deg = sym.degree
        return min(self.truncation, max(1, (deg + 1) // 2))

    def _spacings(self):
        n, L = self.spec.n_per_axis, self.spec.half_width
        q, p, h, dp = axis_coords(n, L)
        return [h] * self.spec.d + [dp] * self.spec.d

    def derivative_field(self, k, m):
        """Stored field of d_q^m d_p^k H (zero fields are pruned to None)."""
        return self._fields.get((tuple(k), tuple(m)))

    def set_time(self, t):
        """Rebuild the derivative fields for the schedule segment at time t."""
        if self.symbol.schedule is None:
            return
        terms = self.symbol.terms_at(t)
        if terms != self._static_terms:
            self._rebuild(terms)

    def segment_starts(self):
        if self.symbol.schedule is None:
            return ()
        return tuple(t for t, _ in self.symbol.schedule)

    def gradient_max(self):
        """max over the grid of |grad H| (used by the CFL guard)."""
        from .weyl import HamiltonianSymbol
        d = self.spec.d
        sym = HamiltonianSymbol(self._static_terms, sampled=self.symbol.sampled,
                                d=d)
        sampled_diff = None
        if sym.sampled is not None:
            sampled_diff = SpectralDifferentiator(sym.sampled, self._spacings())
        grad_sq = 0.0
        zero = (0,) * d
        for ax in range(d):
            e = tuple(1 if i == ax else 0 for i in range(d))
            fq = _h_field(sym, self.spec, e, zero, sampled_diff)
            fp = _h_field(sym, self.spec, zero, e, sampled_diff)
            if fq is not None:
                grad_sq = grad_sq + fq ** 2
            if fp is not None:
                grad_sq = grad_sq + fp ** 2
        if np.ndim(grad_sq) == 0:
            return math.sqrt(float(grad_sq))
        return math.sqrt(float(grad_sq.max()))

    def min_spacing(self):
        q, p, h, dp = axis_coords(self.spec.n_per_axis, self.spec.half_width)
        return min(h, dp)


def classical_generator(symbol, spec, scheme=SPECTRAL, tol=DEFAULT_TOL):
    """Classical Liouville mode: the sine series truncated at its first term."""
    return MoyalGenerator(symbol, spec, truncation=1, scheme=scheme, tol=tol)


def _differentiator(values, gen):
    spac = gen._spacings()
    if gen.scheme == FD4:
        return FiniteDifferenceDifferentiator(values, spac)
    return SpectralDifferentiator(values, spac)


def poisson_power(psi, symbol, n, spec=None, scheme=SPECTRAL):
    """{Psi, H}^(n): full contraction of n-th derivative tensors through I^n.

    n = 1 is the canonical Poisson bracket dq Psi dp H - dp Psi dq H.
    Psi may be a PhaseSpaceField (grid derivatives through the chosen scheme)
    or a polynomial HamiltonianSymbol (derivatives taken analytically, exact
    for non-periodic polynomials like Psi = q).
    """
    if n > MAX_BRACKET_ORDER:
        raise OrderOverflow(f"bracket order {n} exceeds {MAX_BRACKET_ORDER}")
    if hasattr(psi, "terms"):
        out = np.zeros((spec.n_per_axis,) * (2 * spec.d))
        sampled_diff = None
        if symbol.sampled is not None:
            q, p, h, dp = axis_coords(spec.n_per_axis, spec.half_width)
            sampled_diff = SpectralDifferentiator(
                symbol.sampled, [h] * spec.d + [dp] * spec.d)
        for k, m, mult, sign in bracket_pairs(n, spec.d):
            pf = _h_field(psi, spec, k, m)
            hf = _h_field(symbol, spec, m, k, sampled_diff)
            if pf is None or hf is None:
                continue
            out = out + (mult * sign) * pf * hf
        return out
    if isinstance(psi, PhaseSpaceField):
        spec = psi.space
        values = psi.values
    else:
        values = np.asarray(psi, float)
    d = spec.d
    q, p, h, dp = axis_coords(spec.n_per_axis, spec.half_width)
    diff = (FiniteDifferenceDifferentiator(values, [h] * d + [dp] * d)
            if scheme == FD4 else
            SpectralDifferentiator(values, [h] * d + [dp] * d))
    sampled_diff = None
    if symbol.sampled is not None:
        sampled_diff = SpectralDifferentiator(
            symbol.sampled, [h] * d + [dp] * d)
    out = np.zeros_like(values, dtype=float)
    for k, m, mult, sign in bracket_pairs(n, d):
        hf = _h_field(symbol, spec, m, k, sampled_diff)
        if hf is None:
            continue
        dpsi = diff.derivative(tuple(k) + tuple(m))
        out = out + (mult * sign) * dpsi * hf
    if isinstance(psi, PhaseSpaceField):
        return PhaseSpaceField(out, "symbol", spec, "lebesgue", psi.tol)
    return out


def moyal_rhs(W, gen):
    """Truncated sine-series right-hand side on a Wigner-density field."""
    values = W.values if isinstance(W, PhaseSpaceField) else np.asarray(W, float)
    diff = _differentiator(values, gen)
    out = np.zeros_like(values, dtype=float)
    for j in range(1, gen.effective_truncation() + 1):
        n = 2 * j - 1
        coef = sine_coefficient(j)
        for k, m, mult, sign in bracket_pairs(n, gen.spec.d):
            hf = gen.derivative_field(k, m)
            if hf is None:
                continue
            dpsi = diff.derivative(tuple(k) + tuple(m))
            out = out + (coef * mult * sign) * dpsi * hf
    if isinstance(W, PhaseSpaceField):
        return PhaseSpaceField(out, W.role, W.space, W.measure, W.tol)
    return out


def eta_moyal_rhs(phi, gen):
    """Sine-series action on an eta density through the Leibniz/Wick route.

    Expands every derivative of Phi * g by the Leibniz rule, replacing
    derivatives of the Gaussian reference density by Wick polynomials, and
    never multiplies or divides by the density itself. Equals
    eta_density(moyal_rhs(eta_to_wigner(Phi))) in exact arithmetic.
    """
    values = phi.values if isinstance(phi, PhaseSpaceField) else np.asarray(phi)
    spec = phi.space if isinstance(phi, PhaseSpaceField) else gen.spec
    d = gen.spec.d
    diff = _differentiator(values, gen)
    prec2 = spec.mu_nu.precision if hasattr(spec, "mu_nu") else None
    if prec2 is None:
        raise OrderOverflow("eta_moyal_rhs needs a single grid spec")
    out = np.zeros_like(values, dtype=float)
    for j in range(1, gen.effective_truncation() + 1):
        n = 2 * j - 1
        coef = sine_coefficient(j)
        for k, m, mult, sign in bracket_pairs(n, d):
            hf = gen.derivative_field(k, m)
            if hf is None:
                continue
            # Leibniz expansion of d_q^k d_p^m (Phi g) / g over sub-indices
            tot = np.zeros_like(values, dtype=float)
            for bk in _sub_multi(k):
                for bm in _sub_multi(m):
                    dphi = diff.derivative(tuple(bk) + tuple(bm))
                    rest_q = tuple(a - b for a, b in zip(k, bk))
                    rest_p = tuple(a - b for a, b in zip(m, bm))
                    wf = _wick_field(gen, spec, rest_q, rest_p)
                    cmul = 1
                    for a, b in zip(k, bk):
                        cmul *= comb(a, b)
                    for a, b in zip(m, bm):
                        cmul *= comb(a, b)
                    tot = tot + cmul * dphi * wf
            out = out + (coef * mult * sign) * tot * hf
    if isinstance(phi, PhaseSpaceField):
        return PhaseSpaceField(out, phi.role, phi.space, phi.measure, phi.tol)
    return out


def _sub_multi(alpha):
    ranges = [range(a + 1) for a in alpha]
    if not ranges:
        yield ()
        return
    yield from itertools.product(*ranges)


def _wick_field(gen, spec, dq, dp):
    key = (tuple(dq), tuple(dp))
    if key not in gen._wick:
        d = spec.d
        directions = []
        for ax, count in enumerate(dq):
            e = [0.0] * (2 * d)
            e[ax] = 1.0
            directions.extend([e] * count)
        for ax, count in enumerate(dp):
            e = [0.0] * (2 * d)
            e[d + ax] = 1.0
            directions.extend([e] * count)
        poly = wick_polynomial(spec.mu_nu.precision, directions)
        mesh = spec.grid.phase_mesh()
        shape = (spec.n_per_axis,) * (2 * d)
        vals = np.zeros(shape)
        for alpha, c in poly.items():
            term = np.ones((1,) * (2 * d)) * c
            for i, a in enumerate(alpha):
                if a:
                    term = term * mesh[i] ** a
            vals = vals + np.broadcast_to(term, shape)
        gen._wick[key] = vals
    return gen._wick[key]


# --- time integration ---------------------------------------------------------

@dataclass(frozen=True)
class EvolutionRun:
    """Fixed-step classical Runge-Kutta run description."""

    dt: float
    t_end: float
    stride: int = 10
    enforce_cfl: bool = True
    integrator: str = "rk4"

    def __post_init__(self):
        if self.dt <= 0 or self.stride < 1:
            raise UnstableStep("dt must be positive and stride >= 1")
        if self.integrator != "rk4":
            raise UnstableStep("only the classical 4-stage Runge-Kutta is provided")

    def snapshot_times(self):
        nfull = int(math.floor(self.t_end / self.dt + 1e-12))
        times = [k * self.dt for k in range(0, nfull + 1, self.stride)]
        if not times or abs(times[-1] - self.t_end) > 1e-12:
            times.append(self.t_end)
        return times


@dataclass
class EvolutionResult:
    snapshots: list
    diagnostics: dict
    final_field: object


def _rk4_step(values, rhs, dt):
    k1 = rhs(values)
    k2 = rhs(values + 0.5 * dt * k1)
    k3 = rhs(values + 0.5 * dt * k2)
    k4 = rhs(values + dt * k3)
    return values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _boundary_mask(shape):
    mask = np.zeros(shape, dtype=bool)
    for ax in range(len(shape)):
        sl0 = [slice(None)] * len(shape)
        sl0[ax] = 0
        mask[tuple(sl0)] = True
        sl0[ax] = shape[ax] - 1
        mask[tuple(sl0)] = True
    return mask


def evolve(field0, gen, run):
    """Integrate a Wigner or eta field with fixed-step RK4.

    Snapshots are immutable copies taken every `stride` steps and at t_end
    (a final fractional step lands exactly on t_end). Aborts with
    UnstableStep on per-step mass drift and EscapeDetected on boundary mass.
    """
    role = field0.role
    spec = field0.space
    tol = field0.tol
    cell = field0.cell_volume()
    g = field0.reference_density() if role == ETA else None

    limit = gen.min_spacing() / (4.0 * max(gen.gradient_max(), 1e-300))
    if run.dt > limit:
        msg = (f"dt = {run.dt:g} exceeds the CFL guard {limit:g} "
               f"(= min spacing / (4 max|grad H|))")
        if run.enforce_cfl:
            raise UnstableStep(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    bmask = _boundary_mask(field0.values.shape)
    diags = {k: [] for k in ("t", "mass", "l2", "energy", "min_w", "purity_est")}
    snapshots = []
    hfield = _energy_field(gen)

    def rhs(vals):
        if role == WIGNER:
            return moyal_rhs(vals, gen)
        f = PhaseSpaceField(vals, ETA, spec, "mu_nu", tol)
        return eta_moyal_rhs(f, gen).values

    def record(t, vals):
        w = vals if role == WIGNER else vals * g
        d = len(field0.axes)
        diags["t"].append(t)
        diags["mass"].append(float(w.sum() * cell))
        diags["l2"].append(float(math.sqrt((w ** 2).sum() * cell)))
        diags["energy"].append(float((hfield * w).sum() * cell))
        diags["min_w"].append(float(w.min()))
        diags["purity_est"].append(
            float((2 * math.pi) ** d * (w ** 2).sum() * cell))
        return w

    def check(t, w):
        if abs(diags["mass"][-1] - diags["mass"][-2]) > tol.mass_drift_step:
            raise UnstableStep(
                f"mass drifted by {abs(diags['mass'][-1] - diags['mass'][-2]):.3e}"
                f" in one step at t={t:g}", diagnostics=diags)
        edge = float(np.abs(w[bmask]).sum() * cell)
        if edge > tol.boundary_mass:
            raise EscapeDetected(
                f"boundary mass {edge:.3e} at t={t:g}", diagnostics=diags)

    values = np.array(field0.values, dtype=float)
    t = 0.0
    gen.set_time(0.0)
    record(0.0, values)
    snapshots.append((0.0, field0))

    breakpoints = sorted(b for b in gen.segment_starts() if 0.0 < b < run.t_end)
    events = breakpoints + [run.t_end]
    step_index = 0
    for target in events:
        while t < target - 1e-12:
            dt = min(run.dt, target - t)
            values = _rk4_step(values, rhs, dt)
            t = t + dt
            step_index += 1
            w = record(t, values)
            check(t, w)
            is_snapshot = (abs(dt - run.dt) < 1e-15 and step_index % run.stride == 0)
            if is_snapshot and abs(t - run.t_end) > 1e-12:
                snapshots.append((t, PhaseSpaceField(values.copy(), role, spec,
                                                     field0.measure, tol)))
        gen.set_time(t + 1e-12)
        hfield = _energy_field(gen)

    snapshots.append((run.t_end, PhaseSpaceField(values.copy(), role, spec,
                                                 field0.measure, tol)))
    diags = {k: np.asarray(v) for k, v in diags.items()}
    return EvolutionResult(snapshots, diags, snapshots[-1][1])


def _energy_field(gen):
    spec = gen.spec
    mesh = spec.grid.phase_mesh()
    from .weyl import HamiltonianSymbol
    sym = HamiltonianSymbol(gen._static_terms, sampled=gen.symbol.sampled,
                            d=spec.d)
    vals = np.asarray(sym.evaluate(mesh[:spec.d], mesh[spec.d:]), float)
    vals = np.broadcast_to(vals, (spec.n_per_axis,) * (2 * spec.d)).copy()
    if sym.sampled is not None:
        vals = vals + sym.sampled
    return vals


def von_neumann_oracle(T0, hamiltonian, run):
    """Exact density-operator evolution T(t) = e^{-iHt} T0 e^{iHt}.

    `hamiltonian` is a Hermitian matrix or a HamiltonianSymbol (quantized on
    T0's space). Snapshots are taken at the same times evolve() would use.
    Trace and purity are conserved to eigensolver accuracy.
    """
    Tl = T0 if T0.rep == LEBESGUE else to_lebesgue_rep(T0)
    if hasattr(hamiltonian, "terms"):
        H = weyl_quantize(hamiltonian, T0.space)
        schedule = hamiltonian.schedule
    else:
        H = np.asarray(hamiltonian, dtype=complex)
        schedule = None
    out = []
    if schedule is None:
        evals, evecs = np.linalg.eigh(H)
        for t in run.snapshot_times():
            U = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
            Tt = U @ Tl.matrix @ U.conj().T
            out.append((t, DensityOperator(Tt, LEBESGUE, T0.space, T0.tol)))
        return out
    # piecewise-constant schedule: exact propagator per segment
    from .weyl import HamiltonianSymbol
    times = run.snapshot_times()
    bounds = sorted({t0 for t0, _ in schedule if 0.0 < t0 < run.t_end})
    events = sorted(set(times) | set(bounds))
    U_total = np.eye(H.shape[0], dtype=complex)
    t_prev = 0.0
    out.append((0.0, DensityOperator(Tl.matrix.copy(), LEBESGUE, T0.space, T0.tol)))
    for t in events:
        if t <= 0.0:
            continue
        seg_sym = HamiltonianSymbol(hamiltonian.terms_at(0.5 * (t_prev + t)),
                                    d=hamiltonian.d)
        Hseg = weyl_quantize(seg_sym, T0.space)
        evals, evecs = np.linalg.eigh(Hseg)
        U = (evecs * np.exp(-1j * evals * (t - t_prev))) @ evecs.conj().T
        U_total = U @ U_total
        t_prev = t
        if t in times:
            Tt = U_total @ Tl.matrix @ U_total.conj().T
            out.append((t, DensityOperator(Tt, LEBESGUE, T0.space, T0.tol)))
    return out
