"""Exact lattice transforms between density matrices, Weyl-function samples,
and Wigner fields.

Conventions (one degree of freedom; axes factorize independently):

    W(h) = exp(-i (a qhat + b phat)),  h = (a, b)
         = exp(i a b / 2) M(exp(-i a q)) S_b          (BCH, [qhat, phat] = i)

where M is pointwise multiplication and S_b translates position by b. On the
lattice a runs over the momentum grid and b over the position grid; there the
operators obey the Heisenberg group law exactly and the n^2 unitaries form an
orthogonal matrix basis, so every map below is an exact linear bijection:

    chi[alpha, beta] = tr(T W(h))                       (density -> samples)
    W = (2 pi)^-2 sum chi exp(+i(a q + b p)) da db      (samples -> Wigner)

with cell volumes da = pi/L, db = 2L/n. The sample tensor lives on the dual
lattice P x Q: the a-axis carries momentum values, the b-axis position values.
"""

import math

import numpy as np


def axis_coords(n, L):
    h = 2.0 * L / n
    dp = math.pi / L
    q = -L + h * np.arange(n)
    p = (np.arange(n) - n // 2) * dp
    return q, p, h, dp


def _phase(q, p):
    # exp(-i p_a q_l), rows l, cols a
    return np.exp(-1j * np.outer(q, p))


def density_to_chi(T, axes):
    """Weyl-function samples of a density tensor.

    Parameters
    ----------
    T : ndarray, shape (N, N) or (n1..nd, n1..nd)
        Operator matrix (orthonormal discrete basis) or its tensor reshape.
    axes : list of (n, L)
        Geometry per position axis.

    Returns
    -------
    ndarray, shape (n1..nd, n1..nd)
        chi with a-axes first (momentum-valued), b-axes second.
    """
    d = len(axes)
    dims = [n for n, _ in axes]
    X = np.asarray(T, dtype=complex).reshape(dims + dims)
    for i, (n, L) in enumerate(axes):
        X = _axis_chi(X, i, d + i, n, L)
    return X


def _axis_chi(X, ax_bra, ax_ket, n, L):
    q, p, h, dp = axis_coords(n, L)
    X = np.moveaxis(X, (ax_bra, ax_ket), (0, 1))
    l = np.arange(n)
    beta = np.arange(n)[:, None]
    bra_idx = (l[None, :] - (beta - n // 2)) % n
    A = X[bra_idx, l[None, :]]                      # (beta, l, rest)
    E = _phase(q, p)                                # exp(-i p_a q_l), (l, a)
    chi = np.einsum('bl...,la->ab...', A, E)
    chi *= np.exp(0.5j * np.outer(p, q)).reshape((n, n) + (1,) * (chi.ndim - 2))
    return np.moveaxis(chi, (0, 1), (ax_bra, ax_ket))


def chi_to_density(chi, axes):
    """Inverse of density_to_chi (exact lattice completeness)."""
    d = len(axes)
    X = np.asarray(chi, dtype=complex)
    for i, (n, L) in enumerate(axes):
        X = _axis_density(X, i, d + i, n, L)
    return X


def _axis_density(X, ax_a, ax_b, n, L):
    q, p, h, dp = axis_coords(n, L)
    C = np.moveaxis(X, (ax_a, ax_b), (0, 1))
    C = C * np.exp(-0.5j * np.outer(p, q)).reshape((n, n) + (1,) * (C.ndim - 2))
    E2 = np.exp(1j * np.outer(q, p))                # exp(+i p_a q_l), (l, a)
    G = np.einsum('ab...,la->bl...', C, E2) / n     # (beta, l', rest)
    T = np.zeros_like(G)
    l = np.arange(n)
    for b in range(n):
        k = b - n // 2
        T[(l - k) % n, l] += G[b, l]
    return np.moveaxis(T, (0, 1), (ax_a, ax_b))


def chi_to_wigner(chi, axes):
    """Wigner field from Weyl-function samples; exact inverse of wigner_to_chi."""
    d = len(axes)
    X = np.asarray(chi, dtype=complex)
    for i, (n, L) in enumerate(axes):
        X = _axis_wigner(X, i, d + i, n, L)
    return X


def _axis_wigner(X, ax_a, ax_b, n, L):
    q, p, h, dp = axis_coords(n, L)
    C = np.moveaxis(X, (ax_a, ax_b), (0, 1))
    P1 = np.exp(1j * np.outer(q, p))                # exp(+i p_a q_u), (u, a)
    P2 = np.exp(1j * np.outer(q, p))                # exp(+i q_b p_w), (b, w)
    Y = np.einsum('ab...,ua->ub...', C, P1)
    W = np.einsum('ub...,bw->uw...', Y, P2)
    W *= h * dp / (2.0 * math.pi) ** 2
    return np.moveaxis(W, (0, 1), (ax_a, ax_b))


def wigner_to_chi(W, axes):
    d = len(axes)
    X = np.asarray(W, dtype=complex)
    for i, (n, L) in enumerate(axes):
        X = _axis_chi_from_wigner(X, i, d + i, n, L)
    return X


def _axis_chi_from_wigner(X, ax_q, ax_p, n, L):
    q, p, h, dp = axis_coords(n, L)
    Wm = np.moveaxis(X, (ax_q, ax_p), (0, 1))
    P1 = np.exp(-1j * np.outer(q, p))               # exp(-i p_a q_u), (u, a)
    P2 = np.exp(-1j * np.outer(q, p))               # exp(-i q_b p_w), (b, w)
    Y = np.einsum('uw...,ua->aw...', Wm, P1)
    C = np.einsum('aw...,bw->ab...', Y, P2)
    C *= h * dp
    return np.moveaxis(C, (0, 1), (ax_q, ax_p))


def density_to_wigner(T, axes):
    return chi_to_wigner(density_to_chi(T, axes), axes)


def wigner_to_density(W, axes):
    dims = [n for n, _ in axes]
    N = int(np.prod(dims))
    return chi_to_density(wigner_to_chi(W, axes), axes).reshape(N, N)


def weyl_unitary_axis(a, b, n, L):
    """exp(-i(a qhat + b phat)) on one axis, spectral translation by b."""
    q, p, h, dp = axis_coords(n, L)
    F = np.exp(-1j * np.outer(p, q)) / math.sqrt(n)     # unitary centered DFT
    Sb = F.conj().T @ (np.exp(-1j * p * b)[:, None] * F)
    return np.exp(0.5j * a * b) * (np.exp(-1j * a * q)[:, None] * Sb)


def wavenumbers(n, spacing):
    """Spectral wavenumbers matching numpy's fft layout."""
    return 2.0 * math.pi * np.fft.fftfreq(n, d=spacing)


class SpectralDifferentiator:
    """Mixed partial derivatives of a periodic field via one cached FFT."""

    def __init__(self, field, spacings):
        self.hat = np.fft.fftn(np.asarray(field, dtype=complex))
        self.k = [wavenumbers(field.shape[i], s) for i, s in enumerate(spacings)]
        self.ndim = field.ndim

    def derivative(self, orders):
        out_hat = self.hat
        for ax, o in enumerate(orders):
            if o == 0:
                continue
            shape = [1] * self.ndim
            shape[ax] = -1
            out_hat = out_hat * (1j * self.k[ax]).reshape(shape) ** o
        return np.fft.ifftn(out_hat).real


_FD4_STENCIL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def fd4_derivative(field, axis, spacing, order):
    """Repeated 4th-order periodic central first differences along one axis."""
    out = np.asarray(field, dtype=float)
    for _ in range(order):
        acc = np.zeros_like(out)
        for shift, w in zip((-2, -1, 1, 2), (_FD4_STENCIL[0], _FD4_STENCIL[1],
                                             _FD4_STENCIL[3], _FD4_STENCIL[4])):
            acc += w * np.roll(out, -shift, axis=axis)
        out = acc / spacing
    return out


class FiniteDifferenceDifferentiator:
    """4th-order periodic finite differences; cross-check scheme."""

    def __init__(self, field, spacings):
        self.field = np.asarray(field, dtype=float)
        self.spacings = spacings

    def derivative(self, orders):
        out = self.field
        for ax, o in enumerate(orders):
            if o:
                out = fd4_derivative(out, ax, self.spacings[ax], o)
        return out
