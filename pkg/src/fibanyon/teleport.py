"""Anyonic teleportation protocols and their asymmetry diagnostics.

A qubit message (alpha, beta) is carried by the 2-anyon state
alpha |tau,e;tau> + beta |e,tau;tau>.  It is attached to a shared 4-anyon
resource on the sender's side, the 6-anyon state is regrouped so the
sender's four anyons (message + sender half of the resource) form one
subtree, the sender measures a superselection-respecting PVM on that
subtree, and the receiver applies an outcome-conditioned correction.

Internally the regrouped state is held in split form: a coefficient
matrix C[receiver tree, measured tree] within the fixed global fusion
channel.  For a projector P on the measured subsystem, D = C P^T gives
outcome probability ||D||_F^2 and the receiver's conditional operator
D D^dagger, decohered across the receiver's charge sectors (the anyonic
partial trace keeps only matrix elements with equal receiver root
charges).  Dropping that decoherence step and admitting sector-mixing
projectors reproduces ordinary qudit teleportation - the
``enforce_superselection=False`` mode, kept as an executable counterfactual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import FusionError, SuperselectionError
from .model import AnyonModel, Charge
from .recouple import shape_change
from .states import (
    AnyonState,
    BlockOperator,
    bipartition,
    embed_local,
    ket,
    partial_trace,
    pure_density,
    superpose,
    validate_cssr,
)
from .trees import FusionTree, SectorBasis, enumerate_basis, grouped_shape, join_shapes

PROB_TOL = 1e-12

# Message grid used by the verification suites: basis points, balanced,
# real-skewed, and a complex-phase case.
MESSAGE_GRID = (
    (1.0, 0.0),
    (0.0, 1.0),
    (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)),
    (0.6, 0.8),
    (1.0 / math.sqrt(2.0), 1.0j / math.sqrt(2.0)),
)


@dataclass(frozen=True)
class MessageQubit:
    """Qubit (alpha, beta) realized as alpha |tau,e;tau> + beta |e,tau;tau>."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0) > 1e-10:
            raise ValueError("message amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")

    def as_state(self, model: AnyonModel) -> AnyonState:
        basis = enumerate_basis(model, grouped_shape(1, 1))
        amplitudes = np.zeros(basis.dim, dtype=complex)
        amplitudes[basis.index_of_label("tau,e;tau")] = self.alpha
        amplitudes[basis.index_of_label("e,tau;tau")] = self.beta
        return AnyonState(basis, amplitudes)

    def target_vector(self, basis: SectorBasis, encoding: tuple[str, str]) -> np.ndarray:
        """The message re-encoded on a receiver basis pair (ket0, ket1)."""
        vec = np.zeros(basis.dim, dtype=complex)
        vec[basis.index_of_label(encoding[0])] = self.alpha
        vec[basis.index_of_label(encoding[1])] = self.beta
        return vec


def compose(
    model: AnyonModel,
    message: AnyonState,
    resource: AnyonState,
    side: str,
    channel: Charge,
) -> AnyonState:
    """Attach the message next to the resource and fix the fusion channel.

    side "A": message leaves come first (grouping M(AB)); side "B": the
    resource comes first ((AB)M).  Amplitudes multiply term by term - in a
    multiplicity-free theory the joint labeling is determined by the two
    factors plus the chosen root channel.
    """
    if side not in ("A", "B"):
        raise ValueError("side must be 'A' or 'B'")
    left, right = (message, resource) if side == "A" else (resource, message)
    return join_states(model, left, right, channel)


def join_states(model: AnyonModel, left: AnyonState, right: AnyonState, channel: Charge):
    """6 = 2 + 4 (or any split): couple two single-sector states at a new root."""
    ls, rs = left.sector, right.sector
    if ls is None or rs is None:
        raise ValueError("cannot join a zero state")
    if channel not in model.fusion_outcomes(ls, rs):
        raise FusionError(
            f"channel {channel!r} not in fusion outcomes of {ls} x {rs}"
        )
    shape = join_shapes(left.basis.shape, right.basis.shape)
    basis = enumerate_basis(model, shape)
    amplitudes = np.zeros(basis.dim, dtype=complex)
    l_nz = np.nonzero(left.amplitudes)[0]
    r_nz = np.nonzero(right.amplitudes)[0]
    for i in l_nz:
        ti = left.basis.tree_at(i)
        for j in r_nz:
            tj = right.basis.tree_at(j)
            joined = FusionTree(
                shape,
                ti.leaf_charges + tj.leaf_charges,
                (channel,) + ti.internal_charges + tj.internal_charges,
            )
            amplitudes[basis.index_of(joined)] = left.amplitudes[i] * right.amplitudes[j]
    return AnyonState(basis, amplitudes)


def validate_pvm(pvm, basis: SectorBasis, tol: float = 1e-10) -> list[str]:
    """Check PVM invariants; empty report means valid.

    Elements may be BlockOperator or raw matrices on `basis`.  Raw
    matrices with cross-sector support are flagged - projectors that
    superpose different global charges of the measured subsystem are
    unphysical, which is the headline violation here.
    """
    report = []
    mats = []
    for k, op in enumerate(pvm):
        mat = _as_full(op, basis)
        if mat.shape != (basis.dim, basis.dim):
            report.append(f"projector {k}: wrong shape {mat.shape}")
            continue
        if not validate_cssr(mat, basis, tol):
            report.append(f"projector {k}: cross-sector support (superselection violation)")
        if np.max(np.abs(mat - mat.conj().T)) > tol:
            report.append(f"projector {k}: not Hermitian")
        if np.max(np.abs(mat @ mat - mat)) > tol:
            report.append(f"projector {k}: not idempotent")
        mats.append(mat)
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            if np.max(np.abs(mats[a] @ mats[b])) > tol:
                report.append(f"projectors {a},{b}: not mutually orthogonal")
    if mats:
        residual = np.eye(basis.dim) - sum(mats)
        if float(np.min(np.linalg.eigvalsh((residual + residual.conj().T) / 2))) < -tol:
            report.append("projector sum exceeds the identity")
    return report


def _as_full(op, basis: SectorBasis) -> np.ndarray:
    if isinstance(op, BlockOperator):
        return op.to_full()
    return np.asarray(op, dtype=complex)


@dataclass(frozen=True)
class TeleportScenario:
    """Protocol configuration: resource, direction, PVM, corrections.

    direction "ab": the message enters on the A side and the first four
    anyons (message + A) are measured; the receiver is B.  direction
    "ba" is the mirror image.  `pvm` may be None for scenarios that are
    only used with sampled measurements (reachability sweeps).
    """

    name: str
    direction: str
    model: AnyonModel
    resource: AnyonState
    channel: Charge
    pvm: tuple | None
    corrections: tuple | None
    encoding: tuple[str, str]
    reachable: tuple[str, ...] | None = None

    @property
    def message_side(self) -> str:
        return "A" if self.direction == "ab" else "B"

    def with_resource(self, resource: AnyonState) -> "TeleportScenario":
        return replace(self, resource=resource)


@dataclass
class Branch:
    """One measurement outcome: probability, conditional receiver state, fidelity."""

    probability: float
    receiver_state: np.ndarray | None
    fidelity: float | None


@dataclass
class TeleportOutcome:
    branches: list[Branch]
    no_click: Branch
    average_fidelity: float
    receiver_basis: SectorBasis
    message: MessageQubit

    def probabilities(self) -> list[float]:
        return [b.probability for b in self.branches]

    def fidelities(self) -> list[float | None]:
        return [b.fidelity for b in self.branches]

    def total_probability(self) -> float:
        return sum(self.probabilities()) + self.no_click.probability


class SplitState:
    """Regrouped 6-anyon state as a receiver x measured coefficient matrix."""

    def __init__(self, scenario: TeleportScenario, message: MessageQubit):
        model = scenario.model
        composed = compose(
            model, message.as_state(model), scenario.resource, scenario.message_side,
            scenario.channel,
        )
        if scenario.direction == "ab":
            measured_shape = join_shapes(grouped_shape(2, 2), grouped_shape(1, 1))
            n_a, receiver_side = 4, "B"
        else:
            measured_shape = join_shapes(grouped_shape(1, 1), grouped_shape(2, 2))
            n_a, receiver_side = 2, "A"
        change = shape_change(model, composed.basis.shape, measured_shape)
        amplitudes = change.matrix @ composed.amplitudes
        self.basis = change.target
        self.part = bipartition(self.basis, n_a)
        self.receiver_side = receiver_side
        if receiver_side == "A":
            self.receiver_basis, self.measured_basis = self.part.a_basis, self.part.b_basis
        else:
            self.receiver_basis, self.measured_basis = self.part.b_basis, self.part.a_basis
        recv_idx = self.part.a_index if receiver_side == "A" else self.part.b_index
        meas_idx = self.part.b_index if receiver_side == "A" else self.part.a_index
        C = np.zeros((self.receiver_basis.dim, self.measured_basis.dim), dtype=complex)
        for i in np.nonzero(amplitudes)[0]:
            C[recv_idx[i], meas_idx[i]] = amplitudes[i]
        self.coefficients = C
        self.state = AnyonState(self.basis, amplitudes)
        # mask[r, r'] == True iff the receiver root charges agree
        roots = [t.global_charge for t in self.receiver_basis.trees]
        self.receiver_mask = np.equal.outer(np.array(roots), np.array(roots))

    def branch(self, projector: np.ndarray, decohere: bool) -> tuple[float, np.ndarray | None]:
        """Probability and conditional receiver operator for one projector."""
        D = self.coefficients @ projector.T
        p = float(np.sum(np.abs(D) ** 2))
        if p <= PROB_TOL:
            return max(p, 0.0), None
        rho = D @ D.conj().T / p
        if decohere:
            rho = np.where(self.receiver_mask, rho, 0.0)
        return p, rho


def run_protocol(
    scenario: TeleportScenario,
    message: MessageQubit,
    pvm=None,
    corrections=None,
    enforce_superselection: bool = True,
    tol: float = 1e-10,
) -> TeleportOutcome:
    """Execute one teleportation round for every measurement outcome.

    `pvm` / `corrections` override the scenario's own (needed for sampled
    measurements and for the superselection-disabled counterfactual).
    With enforcement on, the PVM must validate and the receiver state is
    decohered across its charge sectors, as the anyonic partial trace
    demands; corrections are then required to be block diagonal.
    """
    pvm = scenario.pvm if pvm is None else pvm
    corrections = scenario.corrections if corrections is None else corrections
    if pvm is None:
        raise ValueError(
            f"scenario {scenario.name}/{scenario.direction} has no PVM; pass one explicitly"
        )
    split = SplitState(scenario, message)
    meas_basis = split.measured_basis
    if enforce_superselection:
        problems = validate_pvm(pvm, meas_basis, tol)
        if problems:
            raise SuperselectionError("invalid PVM: " + "; ".join(problems))
    mats = [_as_full(op, meas_basis) for op in pvm]
    if corrections is not None and len(corrections) != len(mats):
        raise ValueError("one correction per projector is required (use identity to skip)")

    target = message.target_vector(split.receiver_basis, scenario.encoding)
    branches = []
    for k, mat in enumerate(mats):
        p, rho = split.branch(mat, decohere=enforce_superselection)
        if rho is None:
            branches.append(Branch(p, None, None))
            continue
        if corrections is not None:
            U = _as_full(corrections[k], split.receiver_basis)
            if enforce_superselection:
                if not validate_cssr(U, split.receiver_basis, tol):
                    raise SuperselectionError(f"correction {k} mixes receiver charge sectors")
                if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > tol:
                    raise ValueError(f"correction {k} is not unitary")
            rho = U @ rho @ U.conj().T
        branches.append(Branch(p, rho, float(np.real(target.conj() @ rho @ target))))

    residual = np.eye(meas_basis.dim, dtype=complex) - sum(mats)
    p_nc, rho_nc = split.branch(residual, decohere=enforce_superselection)
    fid_nc = None if rho_nc is None else float(np.real(target.conj() @ rho_nc @ target))
    no_click = Branch(p_nc, rho_nc, fid_nc)

    avg = sum(b.probability * b.fidelity for b in branches if b.fidelity is not None)
    if fid_nc is not None:
        avg += p_nc * fid_nc
    return TeleportOutcome(branches, no_click, float(avg), split.receiver_basis, message)


def run_protocol_via_embedding(
    scenario: TeleportScenario, message: MessageQubit, tol: float = 1e-10
) -> TeleportOutcome:
    """Reference path: embed each projector globally and partial-trace.

    Algebraically identical to :func:`run_protocol` for valid PVMs; kept
    as an independent route for consistency testing.
    """
    if scenario.pvm is None:
        raise ValueError("scenario has no PVM")
    split = SplitState(scenario, message)
    meas_basis = split.measured_basis
    measured_side = "A" if split.receiver_side == "B" else "B"
    traced = measured_side
    psi = split.state
    target = message.target_vector(split.receiver_basis, scenario.encoding)

    def receiver_branch(op_block: BlockOperator):
        embedded = embed_local(op_block, split.part, side=measured_side)
        conditional = embedded.apply(psi)
        p = float(np.real(conditional.inner(conditional)))
        if p <= PROB_TOL:
            return max(p, 0.0), None
        normalized = AnyonState(psi.basis, conditional.amplitudes / math.sqrt(p))
        return p, partial_trace(pure_density(normalized), split.part, traced=traced)

    branches = []
    total = BlockOperator.identity(meas_basis)
    for k, op in enumerate(scenario.pvm):
        block = op if isinstance(op, BlockOperator) else BlockOperator.from_full(op, meas_basis)
        total = total - block
        p, rho = receiver_branch(block)
        if rho is None:
            branches.append(Branch(p, None, None))
            continue
        rho_mat = rho.to_full()
        if scenario.corrections is not None:
            U = _as_full(scenario.corrections[k], split.receiver_basis)
            rho_mat = U @ rho_mat @ U.conj().T
        branches.append(Branch(p, rho_mat, float(np.real(target.conj() @ rho_mat @ target))))
    p_nc, rho_nc = receiver_branch(total)
    mat_nc = None if rho_nc is None else rho_nc.to_full()
    fid_nc = None if mat_nc is None else float(np.real(target.conj() @ mat_nc @ target))
    avg = sum(b.probability * b.fidelity for b in branches if b.fidelity is not None)
    if fid_nc is not None:
        avg += p_nc * fid_nc
    return TeleportOutcome(branches, Branch(p_nc, mat_nc, fid_nc), float(avg),
                           split.receiver_basis, message)


# ---------------------------------------------------------------------------
# sampled measurements and reachability


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    gin = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(gin)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases.conj()


def random_sector_pvm(basis: SectorBasis, rng: np.random.Generator) -> list[np.ndarray]:
    """Complete rank-1 PVM respecting the charge sectors of `basis`.

    One Haar unitary per sector; every column becomes a projector, so the
    sector choice is exhaustive and the elements sum to the identity.
    """
    out = []
    for g in basis.model.charges:
        sl = basis.sector_slice(g)
        d = basis.sector_dim(g)
        if d == 0:
            continue
        u = haar_unitary(rng, d)
        for col in range(d):
            vec = np.zeros(basis.dim, dtype=complex)
            vec[sl] = u[:, col]
            out.append(np.outer(vec, vec.conj()))
    return out


@dataclass
class ReachabilityReport:
    """Support sweep over sampled PVMs: how far receiver states stray."""

    scenario: str
    direction: str
    samples: int
    messages: int
    conditionals: int
    max_off_support: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_off_support <= self.tol


def receiver_reachability_check(
    scenario: TeleportScenario,
    messages,
    pvm_samples: int,
    seed: int,
    tol: float = 1e-10,
) -> ReachabilityReport:
    """Sample sector-respecting PVMs and bound receiver support leakage.

    For every sampled measurement and message, each conditional receiver
    state is decomposed in the receiver's 2-anyon basis; the report
    records the largest matrix-element magnitude outside the scenario's
    reachable diagonal set.
    """
    if scenario.reachable is None:
        raise ValueError(f"scenario {scenario.name}/{scenario.direction} declares no reachable set")
    message_list = [m if isinstance(m, MessageQubit) else MessageQubit(*m) for m in messages]
    splits = [SplitState(scenario, m) for m in message_list]
    recv_basis = splits[0].receiver_basis
    allowed = [recv_basis.index_of_label(lbl) for lbl in scenario.reachable]
    off_mask = np.ones((recv_basis.dim, recv_basis.dim), dtype=bool)
    for idx in allowed:
        off_mask[idx, idx] = False

    worst = 0.0
    conditionals = 0
    for s in range(pvm_samples):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(s,)))
        meas_basis = splits[0].measured_basis
        # One Haar unitary per sector; columns are the measurement vectors.
        columns = []
        for g in meas_basis.model.charges:
            d = meas_basis.sector_dim(g)
            if d == 0:
                continue
            u = haar_unitary(rng, d)
            block = np.zeros((meas_basis.dim, d), dtype=complex)
            block[meas_basis.sector_slice(g)] = u
            columns.append(block)
        U = np.hstack(columns)
        for split in splits:
            W = split.coefficients @ U.conj()  # column k: conditional receiver vector
            probs = np.sum(np.abs(W) ** 2, axis=0)
            for k in np.nonzero(probs > PROB_TOL)[0]:
                w = W[:, k]
                rho = np.outer(w, w.conj()) / probs[k]
                rho = np.where(split.receiver_mask, rho, 0.0)
                worst = max(worst, float(np.max(np.abs(rho[off_mask]))))
                conditionals += 1
    return ReachabilityReport(
        scenario=scenario.name,
        direction=scenario.direction,
        samples=pvm_samples,
        messages=len(message_list),
        conditionals=conditionals,
        max_off_support=worst,
        tol=tol,
    )


def diagonal_mixture_fidelity_bound(
    target: np.ndarray, basis: SectorBasis, kets: tuple[str, ...], grid: int = 4001
) -> float:
    """Brute-force oracle: best fidelity any diagonal mixture of `kets` reaches.

    Scans mixing weights on a grid (two-element sets scan one weight);
    used as the classical ceiling for one-way protocols whose receiver
    states are confined to a diagonal family.
    """
    indices = [basis.index_of_label(lbl) for lbl in kets]
    overlaps = np.array([abs(target[i]) ** 2 for i in indices])
    if len(indices) == 1:
        return float(overlaps[0])
    if len(indices) != 2:
        raise ValueError("oracle implemented for one- or two-element diagonal families")
    best = 0.0
    for p in np.linspace(0.0, 1.0, grid):
        best = max(best, p * overlaps[0] + (1.0 - p) * overlaps[1])
    return float(best)


# ---------------------------------------------------------------------------
# built-in scenarios


def pauli_correction(basis: SectorBasis, ket0: str, ket1: str, kind: str) -> BlockOperator:
    """Encoded Pauli acting on the (ket0, ket1) pair, identity elsewhere."""
    i0 = basis.index_of_label(ket0)
    i1 = basis.index_of_label(ket1)
    mat = np.eye(basis.dim, dtype=complex)
    if kind == "I":
        pass
    elif kind == "X":
        mat[i0, i0] = mat[i1, i1] = 0.0
        mat[i0, i1] = mat[i1, i0] = 1.0
    elif kind == "Y":
        mat[i0, i0] = mat[i1, i1] = 0.0
        mat[i1, i0] = 1.0j
        mat[i0, i1] = -1.0j
    elif kind == "Z":
        mat[i1, i1] = -1.0
    else:
        raise ValueError(f"unknown Pauli kind {kind!r}")
    return BlockOperator.from_full(mat, basis)


def _projector_onto(basis: SectorBasis, terms) -> BlockOperator:
    state, _ = superpose([(w, ket(basis, lbl)) for w, lbl in terms])
    return BlockOperator.from_ket_bra(state)


def builtin_scenarios(model: AnyonModel | None = None) -> dict[str, dict[str, TeleportScenario]]:
    """The three catalog scenarios, each in both directions.

    ``main-text``: resource with identical marginal spectra; perfect A->B
    teleportation, B->A limited to a classical diagonal family.
    ``appendix-d1-symmetric``: resource whose halves each carry charge e;
    teleportation works identically in both directions.
    ``appendix-d2-asymmetric``: resource with unequal marginal spectra;
    B->A succeeds on half the runs (no-click otherwise), A->B is classical.
    Directions without a useful PVM carry ``pvm=None`` plus the reachable
    diagonal set for sampling sweeps.
    """
    from .model import fibonacci_model

    model = model or fibonacci_model()
    g4 = enumerate_basis(model, grouped_shape(2, 2))
    g2 = enumerate_basis(model, grouped_shape(1, 1))
    s = 1.0 / math.sqrt(2.0)

    def res(terms):
        state, _ = superpose([(w, ket(g4, lbl)) for w, lbl in terms])
        return state

    def pvm_of(*vector_terms):
        return tuple(_projector_onto(g4, terms) for terms in vector_terms)

    def paulis(ket0, ket1):
        return tuple(pauli_correction(g2, ket0, ket1, kind) for kind in ("X", "Y", "I", "Z"))

    catalog: dict[str, dict[str, TeleportScenario]] = {}

    # --- main text: R = (|(e,e),(e,tau);e,tau;tau> + |(tau,e),(tau,e);tau,tau;tau>)/sqrt(2)
    resource_main = res([(1, "(e,e),(e,tau);e,tau;tau"), (1, "(tau,e),(tau,e);tau,tau;tau")])
    pvm_main_ab = pvm_of(
        [(s, "(tau,e),(e,e);tau,e;tau"), (s, "(e,tau),(tau,e);tau,tau;tau")],   # lambda+
        [(s, "(tau,e),(e,e);tau,e;tau"), (-s, "(e,tau),(tau,e);tau,tau;tau")],  # lambda-
        [(s, "(tau,e),(tau,e);tau,tau;tau"), (s, "(e,tau),(e,e);tau,e;tau")],   # eta+
        [(s, "(tau,e),(tau,e);tau,tau;tau"), (-s, "(e,tau),(e,e);tau,e;tau")],  # eta-
    )
    tau_pair = ("tau,e;tau", "e,tau;tau")
    catalog["main-text"] = {
        "ab": TeleportScenario(
            "main-text", "ab", model, resource_main, "e",
            pvm_main_ab, paulis(*tau_pair), tau_pair,
        ),
        "ba": TeleportScenario(
            "main-text", "ba", model, resource_main, "e",
            None, None, tau_pair, reachable=("e,e;e", "tau,e;tau"),
        ),
    }

    # --- appendix-d1-symmetric: R = (|(e,e),(e,e);e,e;e> + |(tau,tau),(tau,tau);e,e;e>)/sqrt(2)
    resource_d1 = res([(1, "(e,e),(e,e);e,e;e"), (1, "(tau,tau),(tau,tau);e,e;e")])
    e_pair = ("tau,tau;e", "e,e;e")
    pvm_d1_ab = pvm_of(
        [(s, "(tau,e),(e,e);tau,e;tau"), (s, "(e,tau),(tau,tau);tau,e;tau")],   # lambda+
        [(s, "(tau,e),(e,e);tau,e;tau"), (-s, "(e,tau),(tau,tau);tau,e;tau")],  # lambda-
        [(s, "(tau,e),(tau,tau);tau,e;tau"), (s, "(e,tau),(e,e);tau,e;tau")],   # theta+
        [(s, "(tau,e),(tau,tau);tau,e;tau"), (-s, "(e,tau),(e,e);tau,e;tau")],  # theta-
    )
    pvm_d1_ba = pvm_of(
        [(s, "(e,e),(tau,e);e,tau;tau"), (s, "(tau,tau),(e,tau);e,tau;tau")],
        [(s, "(e,e),(tau,e);e,tau;tau"), (-s, "(tau,tau),(e,tau);e,tau;tau")],
        [(s, "(tau,tau),(tau,e);e,tau;tau"), (s, "(e,e),(e,tau);e,tau;tau")],
        [(s, "(tau,tau),(tau,e);e,tau;tau"), (-s, "(e,e),(e,tau);e,tau;tau")],
    )
    catalog["appendix-d1-symmetric"] = {
        "ab": TeleportScenario(
            "appendix-d1-symmetric", "ab", model, resource_d1, "tau",
            pvm_d1_ab, paulis(*e_pair), e_pair,
        ),
        "ba": TeleportScenario(
            "appendix-d1-symmetric", "ba", model, resource_d1, "tau",
            pvm_d1_ba, paulis(*e_pair), e_pair,
        ),
    }

    # --- appendix-d2-asymmetric: R = (sqrt(2)|(e,e),(e,tau);e,tau;tau>
    #                        + |(e,tau),(e,e);tau,e;tau> + |(tau,e),(e,tau);tau,tau;tau>)/2
    resource_d2 = res([
        (math.sqrt(2.0), "(e,e),(e,tau);e,tau;tau"),
        (1, "(e,tau),(e,e);tau,e;tau"),
        (1, "(tau,e),(e,tau);tau,tau;tau"),
    ])
    pvm_d2_ba = pvm_of(
        [(s, "(e,e),(tau,e);e,tau;tau"), (s, "(e,tau),(e,tau);tau,tau;tau")],   # lambda+
        [(s, "(e,e),(tau,e);e,tau;tau"), (-s, "(e,tau),(e,tau);tau,tau;tau")],  # lambda-
        [(s, "(e,tau),(tau,e);tau,tau;tau"), (s, "(e,e),(e,tau);e,tau;tau")],   # eta+
        [(s, "(e,tau),(tau,e);tau,tau;tau"), (-s, "(e,e),(e,tau);e,tau;tau")],  # eta-
    )
    catalog["appendix-d2-asymmetric"] = {
        "ab": TeleportScenario(
            "appendix-d2-asymmetric", "ab", model, resource_d2, "e",
            None, None, tau_pair, reachable=("e,tau;tau", "e,e;e"),
        ),
        "ba": TeleportScenario(
            "appendix-d2-asymmetric", "ba", model, resource_d2, "e",
            pvm_d2_ba, paulis(*tau_pair), tau_pair,
        ),
    }
    return catalog


def d1_family_resource(model: AnyonModel, a: complex, b: complex) -> AnyonState:
    """Resource a|(e,e),(e,e);e,e;e> + b|(tau,tau),(tau,tau);e,e;e> (normalized)."""
    g4 = enumerate_basis(model, grouped_shape(2, 2))
    state, _ = superpose([(a, ket(g4, "(e,e),(e,e);e,e;e")),
                          (b, ket(g4, "(tau,tau),(tau,tau);e,e;e"))])
    return state


def superselection_violating_protocol(model: AnyonModel | None = None):
    """Counterfactual B->A measurement that ignores the superselection rule.

    Bell-type projectors pair the two charge sectors of the measured
    subsystem, and the corrections rotate across the receiver's sectors.
    Run with ``enforce_superselection=False``, this achieves unit-fidelity
    teleportation from Bob to Alice on the main-text resource - exactly
    the move the superselection rule forbids.

    Returns (scenario, pvm, corrections).
    """
    from .model import fibonacci_model

    model = model or fibonacci_model()
    scenario = builtin_scenarios(model)["main-text"]["ba"]
    g4 = enumerate_basis(model, grouped_shape(2, 2))
    g2 = enumerate_basis(model, grouped_shape(1, 1))
    s = 1.0 / math.sqrt(2.0)
    u1 = "(e,tau),(tau,e);tau,tau;e"
    u2 = "(e,tau),(e,tau);tau,tau;e"
    v1 = "(tau,e),(tau,e);tau,tau;tau"
    v2 = "(tau,e),(e,tau);tau,tau;tau"

    def raw_projector(terms):
        vec = np.zeros(g4.dim, dtype=complex)
        for w, lbl in terms:
            vec[g4.index_of_label(lbl)] = w
        return np.outer(vec, vec.conj())

    pvm = (
        raw_projector([(s, u1), (s, v2)]),
        raw_projector([(s, u1), (-s, v2)]),
        raw_projector([(s, u2), (s, v1)]),
        raw_projector([(s, u2), (-s, v1)]),
    )

    i_ee = g2.index_of_label("e,e;e")
    i_te = g2.index_of_label("tau,e;tau")
    i_et = g2.index_of_label("e,tau;tau")

    def correction(image_ee, image_te, sign_te=1.0):
        mat = np.eye(g2.dim, dtype=complex)
        for idx in (i_ee, i_te, i_et):
            mat[idx, idx] = 0.0
        used = np.zeros(g2.dim, dtype=bool)
        mat[image_ee, i_ee] = 1.0
        used[image_ee] = True
        mat[image_te, i_te] = sign_te
        used[image_te] = True
        spare = next(idx for idx in (i_ee, i_te, i_et) if not used[idx])
        mat[spare, i_et] = 1.0
        return mat

    corrections = (
        correction(i_te, i_et),          # alpha|e,e;e> + beta|tau,e;tau> -> message
        correction(i_te, i_et, -1.0),    # alpha|e,e;e> - beta|tau,e;tau>
        correction(i_et, i_te),          # beta|e,e;e> + alpha|tau,e;tau>
        correction(i_et, i_te, -1.0),    # beta|e,e;e> - alpha|tau,e;tau>
    )
    return scenario, pvm, corrections
