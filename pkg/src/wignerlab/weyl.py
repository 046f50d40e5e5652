"""Weyl quantization, Weyl unitaries, and the Weyl (characteristic) function.

Polynomial symbols quantize term by term through symmetric (Weyl) ordering;
for a monomial q^a p^b on one axis that is McCoy's formula

    Op(q^a p^b) = 2^-a sum_k C(a, k) qhat^k phat^b qhat^(a-k),

and axes factorize because their operators commute. Sampled symbols quantize
through the exact lattice symbol calculus (engine), which sends the constant
symbol 1 to the identity exactly. The Weyl unitary of a phase point h = (a, b)
is exp(-i(a qhat + b phat)); with h on the dual lattice these unitaries obey
the exact Heisenberg group law up to the symplectic-area phase.
"""

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import engine
from .errors import (DegreeTooHigh, DomainOverflow, GridMismatch,
                     NonHermitianInput, SpecMismatch)
from .hilbert import LevelSpace
from .lattice import PhaseSpaceSpec

MAX_DEGREE = 6


@dataclass(frozen=True)
class PhasePoint:
    """A point h = (q, p) of phase space."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, float)))
        object.__setattr__(self, "p", np.atleast_1d(np.asarray(self.p, float)))

    def __neg__(self):
        return PhasePoint(-self.q, -self.p)

    def __add__(self, other):
        return PhasePoint(self.q + other.q, self.p + other.p)


def symplectic_area(h1, h2):
    """sym(h1, h2) = <q1, p2> - <p1, q2>."""
    return float(h1.q @ h2.p - h1.p @ h2.q)


def group_phase(h1, h2):
    """theta with W(h1) W(h2) = exp(i theta) W(h1 + h2).

    Half the symplectic area, oriented by the pairing convention of h-hat:
    theta = (1/2)(<q2, p1> - <q1, p2>). Exact on the dual lattice (q-slots on
    the momentum lattice, p-slots on the position lattice), spectral off it.
    """
    return -0.5 * symplectic_area(h1, h2)


@dataclass(frozen=True)
class HamiltonianSymbol:
    """Real polynomial in (q, p), optionally plus a sampled grid field.

    terms: tuple of (powers_q, powers_p, coeff) with integer multi-indices.
    sampled: optional real field on the phase grid (q-axes then p-axes).
    schedule: optional tuple of (t_start, terms) segments, piecewise constant
    in time; the static `terms` are used when no schedule is given.
    """

    terms: tuple = ()
    sampled: np.ndarray = None
    schedule: tuple = None
    d: int = 1

    def __post_init__(self):
        norm = []
        for pq, pp, c in self.terms:
            pq = tuple(int(x) for x in np.atleast_1d(pq))
            pp = tuple(int(x) for x in np.atleast_1d(pp))
            if len(pq) != self.d or len(pp) != self.d:
                raise SpecMismatch(f"term multi-index length must be d={self.d}")
            if complex(c).imag != 0.0:
                raise NonHermitianInput("symbol coefficients must be real")
            norm.append((pq, pp, float(c)))
        object.__setattr__(self, "terms", tuple(norm))
        if self.sampled is not None:
            s = np.asarray(self.sampled)
            if np.iscomplexobj(s) and np.abs(s.imag).max() > 0:
                raise NonHermitianInput("sampled symbol must be real")
            object.__setattr__(self, "sampled", s.astype(float))
        if self.schedule is not None:
            seg = tuple((float(t), tuple(ts)) for t, ts in self.schedule)
            object.__setattr__(self, "schedule", seg)

    @property
    def degree(self):
        return max((sum(pq) + sum(pp) for pq, pp, _ in self.terms), default=0)

    def terms_at(self, t):
        """Active polynomial terms at time t (piecewise-constant schedule)."""
        if self.schedule is None:
            return self.terms
        active = self.schedule[0][1]
        for t0, ts in self.schedule:
            if t >= t0 - 1e-15:
                active = ts
        return HamiltonianSymbol(active, d=self.d).terms

    def derivative(self, dq, dp):
        """Partial derivative as a new polynomial symbol (polynomial part only)."""
        out = []
        for pq, pp, c in self.terms:
            cc = c
            nq, np_ = list(pq), list(pp)
            ok = True
            for ax, k in enumerate(dq):
                for _ in range(k):
                    if nq[ax] == 0:
                        ok = False
                        break
                    cc *= nq[ax]
                    nq[ax] -= 1
                if not ok:
                    break
            if ok:
                for ax, k in enumerate(dp):
                    for _ in range(k):
                        if np_[ax] == 0:
                            ok = False
                            break
                        cc *= np_[ax]
                        np_[ax] -= 1
                    if not ok:
                        break
            if ok and cc != 0.0:
                out.append((tuple(nq), tuple(np_), cc))
        return HamiltonianSymbol(tuple(out), d=self.d)

    def evaluate(self, q_mesh, p_mesh):
        """Polynomial part on broadcastable coordinate meshes."""
        out = 0.0
        for pq, pp, c in self.terms:
            term = c
            for ax in range(self.d):
                if pq[ax]:
                    term = term * q_mesh[ax] ** pq[ax]
                if pp[ax]:
                    term = term * p_mesh[ax] ** pp[ax]
            out = out + term
        return out

    def evaluate_phase_grid(self, spec):
        mesh = spec.grid.phase_mesh()
        shape = (spec.n_per_axis,) * (2 * spec.d)
        vals = np.broadcast_to(
            np.asarray(self.evaluate(mesh[:spec.d], mesh[spec.d:]), float), shape)
        if self.sampled is not None:
            if self.sampled.shape != shape:
                raise DomainOverflow(
                    f"sampled symbol shape {self.sampled.shape} != grid {shape}")
            vals = vals + self.sampled
        return vals


def parse_symbol_terms(raw, d):
    """Terms from the config syntax [{powers_q, powers_p, coeff}, ...]."""
    terms = []
    for item in raw:
        terms.append((tuple(item["powers_q"]), tuple(item["powers_p"]),
                      float(item["coeff"])))
    return HamiltonianSymbol(tuple(terms), d=d)


# --- grid operators ---------------------------------------------------------

def _axis_ops(n, L):
    q, p, h, dp = engine.axis_coords(n, L)
    F = np.exp(-1j * np.outer(p, q)) / math.sqrt(n)
    qhat = np.diag(q.astype(complex))
    phat = F.conj().T @ (p[:, None] * F)
    return qhat, phat


def position_operator(spec, axis=0):
    return _embed_axis_op(spec, axis, _axis_ops(spec.n_per_axis, spec.half_width)[0])


def momentum_operator(spec, axis=0):
    return _embed_axis_op(spec, axis, _axis_ops(spec.n_per_axis, spec.half_width)[1])


def _embed_axis_op(spec, axis, op):
    n, d = spec.n_per_axis, spec.d
    m = np.eye(1, dtype=complex)
    for ax in range(d):
        m = np.kron(m, op if ax == axis else np.eye(n, dtype=complex))
    return m


def _mccoy_axis(a, b, qhat, phat):
    """Weyl-ordered q^a p^b on one axis."""
    if a == 0 and b == 0:
        return np.eye(qhat.shape[0], dtype=complex)
    pb = np.linalg.matrix_power(phat, b)
    out = np.zeros_like(qhat)
    for k in range(a + 1):
        out += comb(a, k) * (np.linalg.matrix_power(qhat, k) @ pb
                             @ np.linalg.matrix_power(qhat, a - k))
    return out / 2 ** a


def quantize_polynomial_on(terms, axis_ops):
    """Weyl-order polynomial terms over per-axis (qhat, phat) operator pairs."""
    dim = int(np.prod([qh.shape[0] for qh, _ in axis_ops]))
    out = np.zeros((dim, dim), dtype=complex)
    for pq, pp, c in terms:
        m = np.eye(1, dtype=complex)
        for (qh, ph), aq, ap in zip(axis_ops, pq, pp):
            m = np.kron(m, _mccoy_axis(aq, ap, qh, ph))
        out += c * m
    return out


def weyl_quantize(symbol, spec):
    """Quantize a symbol to a Hermitian operator matrix on the grid space.

    Polynomial terms go through per-axis McCoy ordering (degree cap 6);
    the sampled part goes through the exact lattice symbol calculus.
    """
    if symbol.degree > MAX_DEGREE:
        raise DegreeTooHigh(f"degree {symbol.degree} exceeds cap {MAX_DEGREE}")
    if isinstance(spec, LevelSpace):
        ops = [(spec.position_op().astype(complex),
                spec.momentum_op().astype(complex))]
        return quantize_polynomial_on(symbol.terms, ops)
    if not isinstance(spec, PhaseSpaceSpec):
        raise SpecMismatch("weyl_quantize needs a PhaseSpaceSpec or LevelSpace")
    axis_ops = [_axis_ops(spec.n_per_axis, spec.half_width)] * spec.d
    out = quantize_polynomial_on(symbol.terms, axis_ops)
    if symbol.sampled is not None:
        shape = (spec.n_per_axis,) * (2 * spec.d)
        if symbol.sampled.shape != shape:
            raise DomainOverflow(
                f"sampled symbol shape {symbol.sampled.shape} != grid {shape}")
        axes = spec.axis_geometry()
        N = spec.hilbert_dim
        chi = engine.wigner_to_chi(symbol.sampled.astype(complex), axes)
        out = out + engine.chi_to_density(chi, axes).reshape(N, N) \
            / (2.0 * math.pi) ** spec.d
    return out


def weyl_unitary(h, spec):
    """W(h) = exp(-i(<q_h, qhat> + <p_h, phat>)), factorized per axis."""
    if not isinstance(spec, PhaseSpaceSpec):
        raise SpecMismatch("weyl_unitary needs a grid space")
    if h.q.shape != (spec.d,) or h.p.shape != (spec.d,):
        raise GridMismatch(f"phase point dimension != d={spec.d}")
    m = np.eye(1, dtype=complex)
    for ax in range(spec.d):
        m = np.kron(m, engine.weyl_unitary_axis(
            h.q[ax], h.p[ax], spec.n_per_axis, spec.half_width))
    return m


def weyl_function(T, h):
    """W_T(h) = tr(T W(h)); bounded by 1, equals 1 at h = 0."""
    spec = T.space
    m = T.matrix if T.rep == "lebesgue" else None
    if m is None:
        from .hilbert import to_lebesgue_rep
        m = to_lebesgue_rep(T).matrix
    return complex(np.trace(m @ weyl_unitary(h, spec)))


def weyl_function_field(T):
    """All Weyl-function samples on the dual lattice (a-axes momentum-valued)."""
    from .hilbert import to_lebesgue_rep
    spec = T.space
    m = T.matrix if T.rep == "lebesgue" else to_lebesgue_rep(T).matrix
    axes = spec.axis_geometry() if hasattr(spec, "axis_geometry") else None
    if axes is None:
        raise SpecMismatch("weyl_function_field needs a grid space")
    return engine.density_to_chi(m, axes)


def expectation(T, symbol):
    """tr(T Ghat) for the quantized symbol; the imaginary residue is checked."""
    from .hilbert import to_lebesgue_rep
    spec = T.space
    m = T.matrix if T.rep == "lebesgue" else to_lebesgue_rep(T).matrix
    G = weyl_quantize(symbol, spec)
    val = complex(np.trace(m @ G))
    scale = max(abs(val), 1.0)
    if abs(val.imag) > 1e-10 * scale:
        raise NonHermitianInput(f"expectation has imaginary residue {val.imag:g}")
    return val.real
