import math

import numpy as np
import pytest

from wignerlab import (CompositeSystem, DensityOperator, LevelSpace, kernel_of,
                       make_phase_space, mix, partial_trace, pure_density,
                       tensor, to_gaussian_rep, to_lebesgue_rep)
from wignerlab.errors import (NonPositiveOperator, RepresentationMismatch,
                              SpecMismatch, UnknownSubsystem,
                              UnnormalizedState, WrongRepresentation)
from wignerlab.hilbert import (LEBESGUE, RHO1, RHO2, StateVector,
                               apply_operator)
from wignerlab.states import displaced_state, ground_state, random_mixed, \
    random_pure
from wignerlab.weyl import HamiltonianSymbol, weyl_quantize


def test_gaussian_rep_closed_form(lab64):
    psi = ground_state(lab64)
    phi = to_gaussian_rep(psi)
    q = lab64.grid.positions
    expected = math.pi ** -0.25 * (2 * math.pi) ** 0.25 * np.exp(-q ** 2 / 4)
    assert np.abs(phi.values - expected).max() < 1e-12
    assert abs(phi.norm() - 1.0) < 1e-12
    assert abs(psi.norm() - 1.0) < 1e-12


def test_rep_round_trip_random_state(lab64, rng):
    psi = random_pure(lab64, rng)
    back = to_lebesgue_rep(to_gaussian_rep(psi))
    assert np.abs(back.values - psi.values).max() < 1e-12


def test_rep_preserves_trace_and_inner_products(lab64, rng):
    T = random_mixed(lab64, rng)
    Tg = to_gaussian_rep(T)
    assert abs(Tg.trace() - 1.0) < 1e-10
    for _ in range(5):
        a = random_pure(lab64, rng)
        b = random_pure(lab64, rng)
        lhs = a.inner(b)
        rhs = to_gaussian_rep(a).inner(to_gaussian_rep(b))
        assert abs(lhs - rhs) < 1e-10


def test_wrong_representation_raises(lab64):
    psi = ground_state(lab64)
    with pytest.raises(WrongRepresentation):
        to_lebesgue_rep(psi)
    with pytest.raises(WrongRepresentation):
        to_gaussian_rep(to_gaussian_rep(psi))


def test_pure_density_properties(lab64, rng):
    T = pure_density(ground_state(lab64))
    assert abs(T.purity() - 1.0) < 1e-8
    T.validate()
    lam = np.linalg.eigvalsh(T.matrix)
    assert lam[-2] < 1e-8  # rank one

    a = pure_density(displaced_state(lab64, 2.0, 0.0))
    b = pure_density(displaced_state(lab64, -2.0, 0.0))
    mixed = mix([(0.5, a), (0.5, b)])
    # humps at +/-2 are orthogonal to ~e^(-4): purity 1/2
    assert abs(mixed.purity() - 0.5) < 1e-3

    Tr = random_mixed(lab64, rng)
    Tr.validate()


def test_unnormalized_state_rejected(lab64):
    vals = ground_state(lab64).values * 1.5
    with pytest.raises(UnnormalizedState):
        StateVector(vals, LEBESGUE, lab64)


def test_tensor_and_partial_trace_roundtrip(sys2, spec32c):
    a = pure_density(displaced_state(spec32c, 1.0, 0.0))
    b = pure_density(ground_state(spec32c))
    T = tensor(a, b, sys2)
    assert abs(T.trace() - 1.0) < 1e-12
    assert abs(T.purity() - 1.0) < 1e-10
    Ta = partial_trace(T, "A")
    assert np.abs(Ta.matrix - a.matrix).max() < 1e-10
    Tb = partial_trace(T, "B")
    assert np.abs(Tb.matrix - b.matrix).max() < 1e-10


def test_tensor_mismatches(sys2, spec32c, lab64):
    a = pure_density(ground_state(spec32c))
    wrong = pure_density(ground_state(lab64))
    with pytest.raises(SpecMismatch):
        tensor(a, wrong, sys2)
    g = to_gaussian_rep(a)
    with pytest.raises(RepresentationMismatch):
        tensor(a, g, sys2)
    T = tensor(a, a, sys2)
    with pytest.raises(UnknownSubsystem):
        partial_trace(T, "C")


def test_entangled_reduced_purity_matches_eigen_oracle(sys2, spec32c):
    n = spec32c.n_per_axis
    osc = weyl_quantize(HamiltonianSymbol((((2,), (0,), 0.5),
                                           ((0,), (2,), 0.5)), d=1), spec32c)
    qh = weyl_quantize(HamiltonianSymbol((((1,), (0,), 1.0),), d=1), spec32c)
    H = np.kron(osc, np.eye(n)) + np.kron(np.eye(n), osc) \
        + 0.6 * np.kron(qh, qh)
    _, V = np.linalg.eigh(H)
    T = DensityOperator(np.outer(V[:, 0], V[:, 0].conj()), LEBESGUE, sys2)
    TA = partial_trace(T, "A")
    lam = np.linalg.eigvalsh(TA.matrix)
    assert TA.purity() < 1.0 - 1e-3
    assert abs(TA.purity() - float((lam ** 2).sum())) < 1e-6
    TA.validate()


def test_maximally_mixed_two_level_reduction():
    lv = LevelSpace(2)
    sys = CompositeSystem((("S", lv), ("E", LevelSpace(3))))
    half = DensityOperator(np.eye(2) / 2, LEBESGUE, lv)
    e0 = np.zeros(3)
    e0[0] = 1
    pure = DensityOperator(np.outer(e0, e0), LEBESGUE, LevelSpace(3))
    T = tensor(half, pure, sys)
    red = partial_trace(T, "S")
    assert np.abs(red.matrix - np.eye(2) / 2).max() < 1e-10


def test_kernel_rho1_gaussian_and_apply(lab64):
    T = pure_density(ground_state(lab64))
    k1 = kernel_of(T, RHO1)
    # pure Gaussian state: two-variable Gaussian kernel, symmetric
    q = lab64.grid.positions
    expected = math.sqrt(2 * math.pi) / math.sqrt(math.pi) * np.exp(
        -(q[:, None] ** 2 + q[None, :] ** 2) / 2)
    assert np.abs(k1.values - expected).max() < 1e-10

    phi = to_gaussian_rep(displaced_state(lab64, 0.7, 0.2))
    direct = apply_operator(to_gaussian_rep(T), phi)
    assert np.abs(k1.apply(phi) - direct).max() < 1e-8


def test_kernel_rho2_weight_conversion(lab64):
    T = pure_density(displaced_state(lab64, 1.0, 0.5))
    k1 = kernel_of(T, RHO1)
    k2 = kernel_of(T, RHO2)
    c_mu = math.exp(lab64.mu.log_norm)
    assert np.abs(k2.values - c_mu * k1.values).max() < 1e-8
    phi = to_gaussian_rep(ground_state(lab64))
    direct = apply_operator(to_gaussian_rep(T), phi)
    assert np.abs(k2.apply(phi) - direct).max() < 1e-8


def test_normalized_projector_kernel(lab64):
    n = lab64.hilbert_dim
    T = DensityOperator(np.eye(n) / n, LEBESGUE, lab64)
    k2 = kernel_of(T, RHO2)
    off = k2.values - np.diag(np.diag(k2.values))
    assert np.abs(off).max() < 1e-12 * np.abs(np.diag(k2.values)).max()
    assert abs(T.trace() - 1.0) < 1e-12


def test_psd_floor_reported(lab64):
    T = pure_density(ground_state(lab64))
    bad = T.matrix.copy()
    bad[0, 0] -= 1e-4
    bad[1, 1] += 1e-4
    op = DensityOperator(bad, LEBESGUE, lab64)
    with pytest.raises(NonPositiveOperator):
        op.validate()
    assert op.min_eigenvalue() < -1e-8
