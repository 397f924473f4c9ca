"""Executable invariant suites, shared by the CLI and the test suite.

Each suite returns a :class:`SuiteResult` holding labeled checks with
numeric residuals; everything is seeded and deterministic, so the CLI
output is byte-stable for fixed (flags, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlations import (
    classify_pure_2anyon,
    is_uncorrelated,
    local_observable_basis,
    random_pure_2anyon,
)
from .model import AnyonModel, fibonacci_model, pentagon_residual, validate_model
from .recouple import shape_change
from .states import (
    bipartition,
    embed_local,
    is_density,
    ket,
    partial_trace,
    pure_density,
    purity,
    random_density,
    random_observable,
    random_pure_state,
    spectrum,
    trace,
)
from .teleport import (
    MESSAGE_GRID,
    MessageQubit,
    builtin_scenarios,
    d1_family_resource,
    diagonal_mixture_fidelity_bound,
    random_sector_pvm,
    receiver_reachability_check,
    run_protocol,
    run_protocol_via_embedding,
    superselection_violating_protocol,
)
from .trees import all_shapes, enumerate_basis, grouped_shape, left_comb

FIB_DIMS = (2, 5, 13, 34, 89, 233, 610, 1597)  # F_{2N+1} for N = 1..8


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


@dataclass
class Check:
    label: str
    ok: bool
    residual: float = 0.0


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)

    def add(self, label: str, ok, residual: float = 0.0):
        self.checks.append(Check(label, bool(ok), float(residual)))

    def add_residual(self, label: str, residual: float, tol: float):
        self.checks.append(Check(label, bool(residual <= tol), float(residual)))

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)


def suite_model(model: AnyonModel, tol: float = 1e-12) -> SuiteResult:
    out = SuiteResult("model")
    report = validate_model(model, tol)
    out.add("model constraints hold", not report)
    for item in report:
        out.add(f"violation: {item}", False)
    out.add_residual("pentagon residual", pentagon_residual(model), tol)
    worst = 0.0
    for a in model.charges:
        for b in model.charges:
            for c in model.charges:
                for g in model.charges:
                    _, _, mat = model.f_matrix(a, b, c, g)
                    if mat.size and mat.shape[0] == mat.shape[1]:
                        worst = max(
                            worst,
                            float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))),
                        )
    out.add_residual("F-matrix unitarity", worst, tol)
    return out


def suite_dims(model: AnyonModel, max_n: int = 8) -> SuiteResult:
    out = SuiteResult("dims")
    for n in range(1, max_n + 1):
        dim = enumerate_basis(model, left_comb(n)).dim
        expected = FIB_DIMS[n - 1] if n <= len(FIB_DIMS) else None
        label = f"N={n} dim {dim}" + (f" (expect {expected})" if expected else "")
        out.add(label, expected is None or dim == expected)
    for n in range(2, 6):
        dims = {
            tuple(enumerate_basis(model, s).sector_dim(g) for g in model.charges)
            for s in all_shapes(n)
        }
        out.add(f"N={n} sector dims shape-independent", len(dims) == 1)
    basis = enumerate_basis(model, left_comb(4))
    repeated = enumerate_basis(model, left_comb(4))
    out.add("enumeration deterministic", basis is repeated or
            [t.label() for t in basis.trees] == [t.label() for t in repeated.trees])
    return out


def suite_recoupling(model: AnyonModel, max_n: int = 5, tol: float = 1e-12) -> SuiteResult:
    out = SuiteResult("recoupling")
    worst_unitary = 0.0
    worst_sector = 0.0
    worst_roundtrip = 0.0
    worst_path = 0.0
    pairs = 0
    for n in range(2, max_n + 1):
        shapes = all_shapes(n)
        for src in shapes:
            basis = enumerate_basis(model, src)
            sector_mask = np.ones((basis.dim, basis.dim), dtype=bool)
            for g in model.charges:
                sl = basis.sector_slice(g)
                sector_mask[sl, sl] = False
            for tgt in shapes:
                pairs += 1
                fwd = shape_change(model, src, tgt)
                u = fwd.matrix
                worst_unitary = max(
                    worst_unitary, float(np.max(np.abs(u.conj().T @ u - np.eye(basis.dim))))
                )
                worst_sector = max(worst_sector, float(np.max(np.abs(u[sector_mask]), initial=0.0)))
                back = shape_change(model, tgt, src)
                worst_roundtrip = max(
                    worst_roundtrip,
                    float(np.max(np.abs(back.matrix @ u - np.eye(basis.dim)))),
                )
                alt = shape_change(model, src, tgt, via="right")
                worst_path = max(worst_path, float(np.max(np.abs(alt.matrix - u))))
    out.add_residual(f"unitarity over {pairs} shape pairs (N<={max_n})", worst_unitary, tol)
    out.add_residual("global-charge sectors never mix", worst_sector, tol)
    out.add_residual("round-trips A->B->A = identity", worst_roundtrip, tol)
    out.add_residual("path independence (left vs right comb)", worst_path, tol)
    return out


def suite_algebra(
    model: AnyonModel, seed: int = 42, pairs: int = 500, tol: float = 1e-10
) -> SuiteResult:
    out = SuiteResult("algebra")
    # partial-trace consistency Tr(O_A Tr_B rho) == Tr(embed(O_A) rho)
    for n, n_a in ((4, 2), (6, 3)):
        basis = enumerate_basis(model, grouped_shape(n_a, n - n_a))
        part = bipartition(basis, n_a)
        rng = _rng(seed, n)
        worst = 0.0
        for _ in range(pairs):
            obs = random_observable(part.a_basis, rng)
            rho = random_density(basis, rng)
            lhs = trace(obs @ partial_trace(rho, part, traced="B"))
            rhs = trace(embed_local(obs, part, side="A") @ rho)
            worst = max(worst, abs(lhs - rhs))
        out.add_residual(f"partial-trace consistency N={n} ({pairs} pairs)", worst, tol)

    basis4 = enumerate_basis(model, grouped_shape(2, 2))
    part4 = bipartition(basis4, 2)
    rng = _rng(seed, 104)
    density_ok = True
    spec_worst = 0.0
    for _ in range(50):
        rho = random_density(basis4, rng)
        for traced in ("A", "B"):
            reduced = partial_trace(rho, part4, traced=traced)
            density_ok = density_ok and is_density(reduced, tol)
            vals = spectrum(reduced)
            spec_worst = max(
                spec_worst, max(0.0, -float(vals[-1])), max(0.0, float(vals[0]) - 1.0),
                abs(float(np.sum(vals)) - 1.0),
            )
    out.add("partial trace maps densities to densities", density_ok)
    out.add_residual("marginal spectra in [0,1], sum 1", spec_worst, tol)

    hom_worst = 0.0
    for _ in range(50):
        o1 = random_observable(part4.a_basis, rng)
        o2 = random_observable(part4.a_basis, rng)
        lhs = embed_local(o1 @ o2, part4, side="A").to_full()
        rhs = (embed_local(o1, part4, side="A") @ embed_local(o2, part4, side="A")).to_full()
        hom_worst = max(hom_worst, float(np.max(np.abs(lhs - rhs))))
        adj = embed_local(o1.adjoint(), part4, side="A").to_full()
        adj2 = embed_local(o1, part4, side="A").adjoint().to_full()
        hom_worst = max(hom_worst, float(np.max(np.abs(adj - adj2))))
    out.add_residual("embedding is an algebra homomorphism", hom_worst, 1e-12)

    purity_worst = 0.0
    for n in range(1, 5):
        basis = enumerate_basis(model, left_comb(n))
        for tree in basis.trees:
            purity_worst = max(purity_worst, abs(purity(pure_density(ket(basis, tree))) - 1.0))
    rng = _rng(seed, 105)
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        basis = enumerate_basis(model, left_comb(n))
        sector = model.charges[int(rng.integers(0, len(model.charges)))]
        if basis.sector_dim(sector) == 0:
            continue
        state = random_pure_state(basis, sector, rng)
        purity_worst = max(purity_worst, abs(purity(pure_density(state)) - 1.0))
    out.add_residual("purity 1 for all kets and random sector states", purity_worst, tol)
    return out


def suite_correlations(
    model: AnyonModel,
    seed: int = 42,
    samples: int = 10000,
    random_pairs: int = 1000,
    class_tol: float = 1e-8,
    clear_margin: float = 1e-6,
) -> SuiteResult:
    out = SuiteResult("correlations")
    basis = enumerate_basis(model, grouped_shape(1, 1))
    part = bipartition(basis, 1)
    sectors = [c for c in model.charges if basis.sector_dim(c) > 0]

    rng = _rng(seed, 201)
    mismatches = 0
    boundary = 0
    redraws = 0
    n_checked = 0
    per_sector = samples // len(sectors)
    for sector in sectors:
        done = 0
        while done < per_sector:
            psi = random_pure_2anyon(model, sector, rng)
            report = is_uncorrelated(psi, part, tol=class_tol, classify=False)
            label = classify_pure_2anyon(psi)
            if label == "entangled" and report.max_violation < clear_margin:
                # degenerate near-boundary draw; log and redraw
                boundary += 1
                redraws += 1
                if redraws > 10 * per_sector:
                    break
                continue
            numeric_entangled = report.max_violation > class_tol
            if (label == "entangled") != numeric_entangled:
                mismatches += 1
            done += 1
            n_checked += 1
    out.add(
        f"classification agrees with numeric verdict on {n_checked} samples"
        f" ({boundary} boundary redraws)",
        mismatches == 0,
        float(mismatches),
    )

    # the two explicit uncorrelated families satisfy the product condition
    worst_family = 0.0
    rng = _rng(seed, 202)
    for _ in range(50):
        th = rng.uniform(0, 2 * math.pi, size=4)
        mag = math.sqrt(rng.uniform(0.05, 0.95))
        c1, c2 = mag * np.exp(1j * th[0]), math.sqrt(1 - mag**2) * np.exp(1j * th[1])
        amp = np.zeros(basis.dim, dtype=complex)
        amp[basis.index_of_label("tau,e;tau")] = c1
        amp[basis.index_of_label("tau,tau;tau")] = c2
        from .states import AnyonState

        rep1 = is_uncorrelated(AnyonState(basis, amp), part, classify=False)
        amp = np.zeros(basis.dim, dtype=complex)
        amp[basis.index_of_label("e,tau;tau")] = c1
        amp[basis.index_of_label("tau,tau;tau")] = c2
        rep2 = is_uncorrelated(AnyonState(basis, amp), part, classify=False)
        worst_family = max(worst_family, rep1.max_violation, rep2.max_violation)
    out.add_residual("both uncorrelated families satisfy the product rule", worst_family, 1e-12)

    # bilinearity: spanning-set violations reproduce random-observable ones
    ops_a = local_observable_basis(part.a_basis)
    ops_b = local_observable_basis(part.b_basis)
    rng = _rng(seed, 203)
    worst_recon = 0.0
    worst_excess = 0.0
    for which in range(3):
        if which == 0:
            psi, _ = _unequal_marginals_state(model)
        elif which == 1:
            psi = random_pure_2anyon(model, "tau", rng)
        else:
            psi = random_pure_2anyon(model, "e", rng)
        table = np.empty((len(ops_a), len(ops_b)))
        rho = pure_density(psi)
        rho_a = partial_trace(rho, part, traced="B")
        rho_b = partial_trace(rho, part, traced="A")
        rho_full = rho.to_full()
        emb_a = [embed_local(o, part, side="A").to_full() for o in ops_a]
        emb_b = [embed_local(o, part, side="B").to_full() for o in ops_b]
        ea = np.array([trace(o @ rho_a).real for o in ops_a])
        eb = np.array([trace(o @ rho_b).real for o in ops_b])
        for i in range(len(ops_a)):
            for j in range(len(ops_b)):
                lhs = np.einsum("ij,ji->", emb_b[j], emb_a[i] @ rho_full).real
                table[i, j] = lhs - ea[i] * eb[j]
        span_max = float(np.max(np.abs(table)))
        for _ in range(random_pairs // 3):
            ca = rng.standard_normal(len(ops_a))
            cb = rng.standard_normal(len(ops_b))
            ca /= np.sum(np.abs(ca))
            cb /= np.sum(np.abs(cb))
            direct_a = sum(float(w) * mat for w, mat in zip(ca, emb_a))
            direct_b = sum(float(w) * mat for w, mat in zip(cb, emb_b))
            lhs = np.einsum("ij,ji->", direct_b, direct_a @ rho_full).real
            rhs = float(ca @ ea) * float(cb @ eb)
            violation = abs(lhs - rhs)
            reconstructed = abs(float(ca @ table @ cb))
            worst_recon = max(worst_recon, abs(violation - reconstructed))
            worst_excess = max(worst_excess, violation - span_max)
    out.add_residual("random-observable violations reconstruct bilinearly", worst_recon, 1e-10)
    out.add(
        "sampled violations never exceed the spanning-set maximum",
        worst_excess <= 1e-10,
        max(worst_excess, 0.0),
    )
    return out


def _unequal_marginals_state(model: AnyonModel):
    """(|e,tau;tau> + |tau,tau;tau>)/sqrt(2): unequal marginal spectra."""
    from .states import superpose

    basis = enumerate_basis(model, grouped_shape(1, 1))
    return superpose([(1.0, ket(basis, "e,tau;tau")), (1.0, ket(basis, "tau,tau;tau"))])


def suite_teleportation(
    model: AnyonModel,
    seed: int = 42,
    pvm_samples: int = 1000,
    message_count: int = 10,
    tol: float = 1e-10,
) -> SuiteResult:
    out = SuiteResult("teleportation")
    catalog = builtin_scenarios(model)
    rng = _rng(seed, 301)

    # probability conservation + fidelity bounds over random messages
    worst_prob = 0.0
    worst_fid = 0.0
    runnable = [
        catalog["main-text"]["ab"],
        catalog["appendix-d1-symmetric"]["ab"],
        catalog["appendix-d1-symmetric"]["ba"],
        catalog["appendix-d2-asymmetric"]["ba"],
    ]
    for scenario in runnable:
        for _ in range(25):
            alpha, beta = _random_message(rng)
            outcome = run_protocol(scenario, MessageQubit(alpha, beta))
            worst_prob = max(worst_prob, abs(outcome.total_probability() - 1.0))
            for br in outcome.branches + [outcome.no_click]:
                if br.fidelity is not None:
                    worst_fid = max(worst_fid, -br.fidelity, br.fidelity - 1.0)
    out.add_residual("probabilities sum to 1 (100 random messages)", worst_prob, tol)
    out.add_residual("fidelities within [0, 1]", max(worst_fid, 0.0), tol)

    # headline asymmetry: perfect A->B ...
    worst = 0.0
    for alpha, beta in MESSAGE_GRID:
        outcome = run_protocol(catalog["main-text"]["ab"], MessageQubit(alpha, beta))
        worst = max(worst, abs(outcome.average_fidelity - 1.0))
        worst = max(worst, max(abs(b.probability - 0.25) for b in outcome.branches))
    out.add_residual("main-text A->B perfect on the message grid", worst, tol)

    # ... while B->A cannot beat the classical diagonal bound
    scenario_ba = catalog["main-text"]["ba"]
    messages = [
        MessageQubit(1 / math.sqrt(2), np.exp(1j * th) / math.sqrt(2))
        for th in np.linspace(0.0, 2.0 * math.pi, message_count, endpoint=False)
    ]
    reach = receiver_reachability_check(
        scenario_ba, messages, pvm_samples=pvm_samples, seed=seed, tol=tol
    )
    out.add_residual(
        f"B->A receiver support confined ({reach.conditionals} conditionals)",
        reach.max_off_support,
        tol,
    )
    worst_excess = 0.0
    from .teleport import SplitState

    for message in messages:
        split = SplitState(scenario_ba, message)
        target = message.target_vector(split.receiver_basis, scenario_ba.encoding)
        bound = diagonal_mixture_fidelity_bound(
            target, split.receiver_basis, scenario_ba.reachable
        )
        for s in range(max(1, pvm_samples // message_count)):
            rng_s = _rng(seed, 302, s)
            pvm = random_sector_pvm(split.measured_basis, rng_s)
            avg = 0.0
            for proj in pvm:
                p, rho = split.branch(proj, decohere=True)
                if rho is not None:
                    avg += p * float(np.real(target.conj() @ rho @ target))
            worst_excess = max(worst_excess, avg - bound)
    out.add(
        "B->A average fidelity never beats the diagonal-mixture oracle",
        worst_excess <= tol,
        max(worst_excess, 0.0),
    )

    # superselection disabled: the forbidden direction becomes perfect
    scenario_v, pvm_v, corr_v = superselection_violating_protocol(model)
    outcome = run_protocol(
        scenario_v, MessageQubit(0.6, 0.8), pvm=pvm_v, corrections=corr_v,
        enforce_superselection=False,
    )
    out.add_residual(
        "superselection off: constructed PVM teleports B->A perfectly",
        abs(outcome.average_fidelity - 1.0),
        tol,
    )

    # direction symmetry for the vacuum-sector resource family
    worst_sym = 0.0
    rng = _rng(seed, 303)
    for _ in range(10):
        vec = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        vec /= np.linalg.norm(vec)
        resource = d1_family_resource(model, vec[0], vec[1])
        for alpha, beta in MESSAGE_GRID:
            f_ab = run_protocol(
                catalog["appendix-d1-symmetric"]["ab"].with_resource(resource),
                MessageQubit(alpha, beta),
            ).average_fidelity
            f_ba = run_protocol(
                catalog["appendix-d1-symmetric"]["ba"].with_resource(resource),
                MessageQubit(alpha, beta),
            ).average_fidelity
            worst_sym = max(worst_sym, abs(f_ab - f_ba))
    out.add_residual("vacuum-sector resources teleport symmetrically", worst_sym, tol)

    # split-form engine agrees with the embedding route
    worst_agree = 0.0
    for scenario in runnable:
        outcome_a = run_protocol(scenario, MessageQubit(0.6, 0.8))
        outcome_b = run_protocol_via_embedding(scenario, MessageQubit(0.6, 0.8))
        for ba, bb in zip(outcome_a.branches + [outcome_a.no_click],
                          outcome_b.branches + [outcome_b.no_click]):
            worst_agree = max(worst_agree, abs(ba.probability - bb.probability))
            if ba.receiver_state is not None and bb.receiver_state is not None:
                worst_agree = max(
                    worst_agree, float(np.max(np.abs(ba.receiver_state - bb.receiver_state)))
                )
    out.add_residual("split engine matches global embedding route", worst_agree, tol)
    return out


def _random_message(rng) -> tuple[complex, complex]:
    vec = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    vec /= np.linalg.norm(vec)
    return complex(vec[0]), complex(vec[1])


SUITES = {
    "model": suite_model,
    "dims": suite_dims,
    "recoupling": suite_recoupling,
    "algebra": suite_algebra,
    "correlations": suite_correlations,
    "teleportation": suite_teleportation,
}


def run_suites(
    model: AnyonModel | None = None,
    names=None,
    seed: int = 42,
    quick: bool = False,
) -> list[SuiteResult]:
    """Run the named suites (all by default).  `quick` shrinks sample counts."""
    model = model or fibonacci_model()
    names = list(SUITES) if names is None else list(names)
    results = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r} (choose from {', '.join(SUITES)})")
        if name == "model":
            results.append(suite_model(model))
        elif name == "dims":
            results.append(suite_dims(model))
        elif name == "recoupling":
            results.append(suite_recoupling(model, max_n=4 if quick else 5))
        elif name == "algebra":
            results.append(suite_algebra(model, seed=seed, pairs=50 if quick else 500))
        elif name == "correlations":
            results.append(
                suite_correlations(
                    model, seed=seed,
                    samples=1000 if quick else 10000,
                    random_pairs=100 if quick else 1000,
                )
            )
        else:
            results.append(
                suite_teleportation(
                    model, seed=seed,
                    pvm_samples=100 if quick else 1000,
                    message_count=4 if quick else 10,
                )
            )
    return results
