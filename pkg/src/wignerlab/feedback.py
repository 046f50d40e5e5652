"""Composite plant/controller Hamiltonians, the feedback classifier, scenarios.

The builders assemble Hermitian operators on H = P (x) C out of factor terms;
the classifier decides whether a coupling K splits as A (x) I + I (x) B across
the (P1 C1) | (P2 C2) cut with both witnesses non-scalar (feedback), as a
one-sided block (no feedback), or not at all (general). The decision procedure
normalizes K to a traceless unit-Frobenius representative first, so verdicts
are invariant under K -> alpha K + c I with alpha > 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionCap, FactorMismatch, NonHermitianInput,
                     SpecMismatch, UnknownSubsystem)
from .hilbert import (CompositeSystem, DensityOperator, LEBESGUE,
                      partial_trace, space_dim)
from .lattice import PhaseSpaceSpec
from .moyal import MoyalGenerator, evolve
from .tolerances import DEFAULT_TOL
from .wigner import reduce_wigner, wigner_from_density

LAYOUT_DIM_CAP = 65536
RUN_DIM_CAP = 4096

ROLE_ORDER = ("P1", "P2", "C1", "C2", "W")
PLANT_ROLES = ("P1", "P2")
CONTROLLER_ROLES = ("C1", "C2")


@dataclass(frozen=True)
class SubsystemLayout:
    """Labeled plant/controller factors in the fixed order P1, P2, C1, C2, W.

    P1 and C1 are required; P2, C2 and the perturbation factor W are optional.
    """

    roles: dict

    def __post_init__(self):
        unknown = set(self.roles) - set(ROLE_ORDER)
        if unknown:
            raise UnknownSubsystem(f"unknown role label(s) {sorted(unknown)}")
        for need in ("P1", "C1"):
            if need not in self.roles:
                raise FactorMismatch(f"role {need} is required")
        if self.dim > LAYOUT_DIM_CAP:
            raise DimensionCap(
                f"total dimension {self.dim} exceeds the cap {LAYOUT_DIM_CAP}")

    @property
    def labels(self):
        return tuple(r for r in ROLE_ORDER if r in self.roles)

    @property
    def dims(self):
        return tuple(space_dim(self.roles[r]) for r in self.labels)

    @property
    def dim(self):
        return int(np.prod(self.dims))

    def system(self):
        return CompositeSystem(tuple((r, self.roles[r]) for r in self.labels))

    def plant_labels(self):
        return tuple(r for r in PLANT_ROLES if r in self.roles)

    def controller_labels(self):
        return tuple(r for r in CONTROLLER_ROLES if r in self.roles)

    def dim_of(self, labels):
        return int(np.prod([space_dim(self.roles[r]) for r in labels]))

    def total_grid_d(self):
        d = 0
        for r in self.labels:
            s = self.roles[r]
            if not isinstance(s, PhaseSpaceSpec):
                return None
            d += s.d
        return d


def _check_hermitian(m, what, tol=DEFAULT_TOL):
    m = np.asarray(m, dtype=complex)
    scale = max(float(np.abs(m).max()), 1.0)
    if np.abs(m - m.conj().T).max() > tol.hermiticity * scale:
        raise NonHermitianInput(f"{what} is not Hermitian")
    return m


def embed_operator(op, on_labels, layout):
    """Extend an operator on a factor subset by identity on the rest."""
    if isinstance(on_labels, str):
        on_labels = (on_labels,)
    labels = layout.labels
    missing = set(on_labels) - set(labels)
    if missing:
        raise UnknownSubsystem(f"unknown subsystem(s) {sorted(missing)}")
    dims = {r: space_dim(layout.roles[r]) for r in labels}
    d_on = int(np.prod([dims[r] for r in on_labels]))
    op = np.asarray(op, dtype=complex)
    if op.shape != (d_on, d_on):
        raise FactorMismatch(
            f"operator shape {op.shape} != ({d_on}, {d_on}) for {on_labels}")
    rest = [r for r in labels if r not in set(on_labels)]
    d_rest = int(np.prod([dims[r] for r in rest])) if rest else 1
    big = np.kron(op, np.eye(d_rest, dtype=complex))
    # permute from (on_labels..., rest...) order to layout order
    order = list(on_labels) + rest
    perm = [order.index(r) for r in labels]
    k = len(labels)
    shaped = big.reshape([dims[r] for r in order] * 2)
    shaped = shaped.transpose(perm + [k + i for i in perm])
    D = layout.dim
    return shaped.reshape(D, D)


@dataclass(frozen=True)
class CouplingSpec:
    """Sum of Hermitian terms, each on a named factor subset."""

    terms: tuple  # of (labels tuple, matrix)

    def __post_init__(self):
        checked = []
        for labels, m in self.terms:
            labels = (labels,) if isinstance(labels, str) else tuple(labels)
            checked.append((labels, _check_hermitian(m, f"coupling on {labels}")))
        object.__setattr__(self, "terms", tuple(checked))

    def assemble(self, layout):
        D = layout.dim
        out = np.zeros((D, D), dtype=complex)
        for labels, m in self.terms:
            out += embed_operator(m, labels, layout)
        return out


def build_feedback_hamiltonian(h_plant, h_controller, k1, k2, layout):
    """H_P (x) I_C + I_P (x) H_C + K1 on P1C1 + K2 on P2C2 (embedded)."""
    for need in ("P1", "P2", "C1", "C2"):
        if need not in layout.roles:
            raise FactorMismatch(f"feedback form needs all four roles, missing {need}")
    hp = _check_hermitian(h_plant, "plant Hamiltonian")
    hc = _check_hermitian(h_controller, "controller Hamiltonian")
    k1 = _check_hermitian(k1, "K1")
    k2 = _check_hermitian(k2, "K2")
    if hp.shape[0] != layout.dim_of(layout.plant_labels()):
        raise FactorMismatch("plant Hamiltonian dimension mismatch")
    if hc.shape[0] != layout.dim_of(layout.controller_labels()):
        raise FactorMismatch("controller Hamiltonian dimension mismatch")
    return (embed_operator(hp, layout.plant_labels(), layout)
            + embed_operator(hc, layout.controller_labels(), layout)
            + embed_operator(k1, ("P1", "C1"), layout)
            + embed_operator(k2, ("P2", "C2"), layout))


def build_general_hamiltonian(h_plant, h_controller, coupling, layout):
    """H_P (x) I + I (x) H_C + K with K Hermitian on the full space."""
    hp = _check_hermitian(h_plant, "plant Hamiltonian")
    hc = _check_hermitian(h_controller, "controller Hamiltonian")
    K = _check_hermitian(coupling, "coupling")
    if K.shape[0] != layout.dim:
        raise FactorMismatch("coupling must act on the full composite space")
    return (embed_operator(hp, layout.plant_labels(), layout)
            + embed_operator(hc, layout.controller_labels(), layout)
            + K)


@dataclass(frozen=True)
class RefinedParts:
    """Eight-term refinement: per-part Hamiltonians and internal couplings."""

    h_p1: np.ndarray
    h_p2: np.ndarray
    h_c1: np.ndarray
    h_c2: np.ndarray
    k_p1p2: np.ndarray
    k_c1c2: np.ndarray
    k_p1c1: np.ndarray
    k_p2c2: np.ndarray


def build_refined_hamiltonian(parts, layout):
    """Refined composite Hamiltonian with internal plant/controller couplings."""
    for need in ("P1", "P2", "C1", "C2"):
        if need not in layout.roles:
            raise FactorMismatch(f"refined form needs all four roles, missing {need}")
    pieces = (
        (parts.h_p1, ("P1",)), (parts.h_p2, ("P2",)),
        (parts.h_c1, ("C1",)), (parts.h_c2, ("C2",)),
        (parts.k_p1p2, ("P1", "P2")), (parts.k_c1c2, ("C1", "C2")),
        (parts.k_p1c1, ("P1", "C1")), (parts.k_p2c2, ("P2", "C2")),
    )
    D = layout.dim
    out = np.zeros((D, D), dtype=complex)
    for m, labels in pieces:
        out += embed_operator(_check_hermitian(m, f"term on {labels}"),
                              labels, layout)
    return out


# --- classifier ---------------------------------------------------------------

FEEDBACK = "feedback"
NO_FEEDBACK = "no_feedback"
GENERAL = "general"


@dataclass(frozen=True)
class FeedbackVerdict:
    kind: str
    witness_a: np.ndarray
    witness_b: np.ndarray
    residual: float


def _cut_permuted(K, layout):
    """Reorder the composite so the cut reads (P1 C1) x (P2 C2)."""
    labels = list(layout.labels)
    want = [r for r in ("P1", "C1") if r in labels] + \
           [r for r in ("P2", "C2") if r in labels] + \
           [r for r in labels if r not in ("P1", "P2", "C1", "C2")]
    dims = [space_dim(layout.roles[r]) for r in labels]
    k = len(labels)
    perm = [labels.index(r) for r in want]
    shaped = K.reshape(dims * 2).transpose(perm + [k + i for i in perm])
    d_a = layout.dim_of([r for r in ("P1", "C1") if r in labels])
    d_b = layout.dim // d_a
    return shaped.reshape(layout.dim, layout.dim), d_a, d_b


def classify_coupling(K, layout, tol=DEFAULT_TOL):
    """Least-squares verdict on the coupling structure across the cut.

    The identity component is quotiented away and K is scaled to unit
    Frobenius norm before projecting onto the span {A (x) I, I (x) B}; the
    witnesses are returned at the original scale of K.
    """
    K = _check_hermitian(K, "coupling")
    if K.shape[0] != layout.dim:
        raise FactorMismatch("coupling must act on the full composite space")
    Kp, d_a, d_b = _cut_permuted(K, layout)
    D = layout.dim
    K0 = Kp - (np.trace(Kp) / D) * np.eye(D)
    scale = float(np.linalg.norm(K0))
    if scale < 1e-14 * max(float(np.linalg.norm(Kp)), 1.0):
        zero_a = np.zeros((d_a, d_a), dtype=complex)
        zero_b = np.zeros((d_b, d_b), dtype=complex)
        return FeedbackVerdict(NO_FEEDBACK, zero_a, zero_b, 0.0)
    Kn = K0 / scale
    Kt = Kn.reshape(d_a, d_b, d_a, d_b)
    A = np.einsum('ibjb->ij', Kt) / d_b
    B = np.einsum('aiaj->ij', Kt) / d_a
    A -= (np.trace(A) / d_a) * np.eye(d_a)
    B -= (np.trace(B) / d_b) * np.eye(d_b)
    fit = np.kron(A, np.eye(d_b)) + np.kron(np.eye(d_a), B)
    residual = float(np.linalg.norm(Kn - fit))
    a_active = float(np.linalg.norm(A)) > tol.classifier_nonscalar
    b_active = float(np.linalg.norm(B)) > tol.classifier_nonscalar
    if residual < tol.classifier_residual:
        kind = FEEDBACK if (a_active and b_active) else NO_FEEDBACK
    else:
        kind = GENERAL
    return FeedbackVerdict(kind, A * scale, B * scale, residual)


# --- scenario runner -----------------------------------------------------------

@dataclass
class ScenarioResult:
    times: np.ndarray
    plant_purity: np.ndarray
    plant_energy: np.ndarray
    plant_states: list
    plant_wigner: list          # list of (t, PhaseSpaceField) or empty
    square_residuals: np.ndarray  # reduction commuting-square cross-check, empty when skipped
    verdict: object


def run_scenario(layout, hamiltonian, T0, run, h_plant=None,
                 classical_feedback=False, hamiltonian_symbol=None):
    """Evolve the composite and observe the plant through reduction.

    The composite is propagated by the exact density-operator route
    (eigendecomposition; dimension cap 4096). When every factor is grid-based
    with total d <= 2, reduced plant Wigner snapshots are produced and the
    reduction commuting square (composite reduction vs reduced transform) is
    cross-checked at every snapshot. classical_feedback=True instead evolves
    the composite Wigner field with the first-order (Liouville) generator
    built from `hamiltonian_symbol`.
    """
    D = layout.dim
    if D > RUN_DIM_CAP:
        raise DimensionCap(f"composite dimension {D} exceeds run cap {RUN_DIM_CAP}")
    H = _check_hermitian(hamiltonian, "scenario Hamiltonian")
    system = layout.system()
    plant = layout.plant_labels()
    grid_d = layout.total_grid_d()
    times = np.asarray(run.snapshot_times())

    if classical_feedback:
        if hamiltonian_symbol is None or grid_d is None or grid_d > 2:
            raise SpecMismatch(
                "classical feedback mode needs grid factors with total d <= 2 "
                "and a Hamiltonian symbol")
        return _run_classical(layout, hamiltonian_symbol, T0, run, h_plant)

    evals, evecs = np.linalg.eigh(H)
    purity, energy, states, wigners, squares = [], [], [], [], []
    T0m = T0.matrix
    for t in times:
        U = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
        Tt = DensityOperator(U @ T0m @ U.conj().T, LEBESGUE, system, T0.tol)
        TP = partial_trace(Tt, plant)
        states.append((t, TP))
        purity.append(TP.purity())
        if h_plant is not None:
            energy.append(float(np.trace(TP.matrix @ h_plant).real))
        if grid_d is not None and grid_d <= 2:
            WP = wigner_from_density(TP)
            wigners.append((t, WP))
            Wfull = wigner_from_density(Tt)
            Wred = reduce_wigner(Wfull, plant)
            squares.append(float(np.abs(Wred.values - WP.values).max()))
    return ScenarioResult(times, np.asarray(purity), np.asarray(energy),
                          states, wigners, np.asarray(squares), None)


def _run_classical(layout, symbol, T0, run, h_plant):
    """Classical-feedback mode: Liouville flow of the composite Wigner field."""
    system = layout.system()
    W0 = wigner_from_density(T0)
    spec = _merged_spec(layout)
    gen = MoyalGenerator(symbol, spec, truncation=1)
    res = evolve(_refield(W0, spec), gen, run)
    plant = layout.plant_labels()
    wigners = []
    purity = []
    for t, f in res.snapshots:
        fc = _refield(f, system)
        Wred = reduce_wigner(fc, plant)
        wigners.append((t, Wred))
        d = len(Wred.axes)
        purity.append(float((2 * math.pi) ** d
                            * (Wred.values ** 2).sum() * Wred.cell_volume()))
    times = np.asarray([t for t, _ in res.snapshots])
    return ScenarioResult(times, np.asarray(purity), np.asarray([]),
                          [], wigners, np.asarray([]), None)


def _merged_spec(layout):
    """Single PhaseSpaceSpec covering all (identical) grid factors."""
    from .lattice import make_phase_space
    specs = [layout.roles[r] for r in layout.labels]
    first = specs[0]
    for s in specs[1:]:
        if (s.n_per_axis, s.half_width) != (first.n_per_axis, first.half_width):
            raise SpecMismatch(
                "classical mode needs identical per-axis grids across factors")
    d = sum(s.d for s in specs)
    B = np.zeros((d, d))
    pos = 0
    for s in specs:
        B[pos:pos + s.d, pos:pos + s.d] = s.covariance
        pos += s.d
    return make_phase_space(d, first.n_per_axis, first.half_width, B, first.tol)


def _refield(field, space):
    from .wigner import PhaseSpaceField
    return PhaseSpaceField(field.values, field.role, space, field.measure,
                           field.tol)
