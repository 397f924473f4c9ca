import math

import numpy as np
import pytest

from fibanyon.correlations import (
    classify_pure_2anyon,
    is_maximally_entangled_2anyon,
    is_uncorrelated,
    local_observable_basis,
    local_unitary_orbit_check,
    random_pure_2anyon,
)
from fibanyon.states import AnyonState, bipartition, ket, superpose, validate_cssr
from fibanyon.trees import enumerate_basis

SQ2 = 1.0 / math.sqrt(2.0)


def _tau_state(basis, c_te, c_et, c_tt):
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.index_of_label("tau,e;tau")] = c_te
    amps[basis.index_of_label("e,tau;tau")] = c_et
    amps[basis.index_of_label("tau,tau;tau")] = c_tt
    return AnyonState(basis, amps).normalized()


def test_spanning_set_sizes(model, basis2):
    one = enumerate_basis(model, 1)
    ops1 = local_observable_basis(one)
    assert len(ops1) == 2
    diags = sorted(tuple(np.diag(op.to_full()).real) for op in ops1)
    assert diags == [(0.0, 1.0), (1.0, 0.0)]
    ops2 = local_observable_basis(basis2)
    assert len(ops2) == 13  # 2^2 + 3^2
    assert all(validate_cssr(op) for op in ops2)
    assert all(op.is_hermitian(1e-14) for op in ops2)


def test_unequal_marginals_state_is_uncorrelated_second_class(basis2, unequal_marginals_state):
    part = bipartition(basis2, 1)
    report = is_uncorrelated(unequal_marginals_state, part)
    assert report.is_uncorrelated
    assert report.max_violation <= 1e-12
    assert report.pure_class == "class-2-tau"
    assert not report.spectra_symmetric  # spectra {1/2,1/2} vs {1,0}


def test_vacuum_bell_state_is_correlated(basis2):
    state, _ = superpose([(1.0, ket(basis2, "e,e;e")), (1.0, ket(basis2, "tau,tau;e"))])
    part = bipartition(basis2, 1)
    report = is_uncorrelated(state, part)
    assert not report.is_uncorrelated
    assert report.pure_class == "entangled"
    assert report.spectra_symmetric


def test_vacuum_product_state(basis2):
    part = bipartition(basis2, 1)
    report = is_uncorrelated(ket(basis2, "e,e;e"), part)
    assert report.is_uncorrelated
    assert report.max_violation == 0.0
    assert report.pure_class == "product-e-alpha"


def test_tau_bell_state_is_correlated(basis2):
    state, _ = superpose([(1.0, ket(basis2, "e,tau;tau")), (1.0, ket(basis2, "tau,e;tau"))])
    report = is_uncorrelated(state, bipartition(basis2, 1))
    assert not report.is_uncorrelated
    assert report.pure_class == "entangled"


def test_classify_examples(basis2):
    assert classify_pure_2anyon(_tau_state(basis2, 0.6, 0.0, 0.8)) == "class-1-tau"
    assert classify_pure_2anyon(_tau_state(basis2, 0.0, 0.6, 0.8)) == "class-2-tau"
    assert classify_pure_2anyon(_tau_state(basis2, SQ2, SQ2, 0.0)) == "entangled"
    assert (
        classify_pure_2anyon(_tau_state(basis2, 1 / math.sqrt(3), 1 / math.sqrt(3),
                                        1 / math.sqrt(3)))
        == "entangled"
    )
    assert classify_pure_2anyon(ket(basis2, "e,e;e")) == "product-e-alpha"
    assert classify_pure_2anyon(ket(basis2, "tau,tau;e")) == "product-e-beta"
    # both tau coefficients zero: the family intersection, deterministically class 1
    assert classify_pure_2anyon(ket(basis2, "tau,tau;tau")) == "class-1-tau"


def test_classification_matches_numeric_verdict(model, basis2):
    part = bipartition(basis2, 1)
    rng = np.random.default_rng(7)
    for sector in ("e", "tau"):
        for _ in range(500):
            psi = random_pure_2anyon(model, sector, rng)
            report = is_uncorrelated(psi, part, tol=1e-8)
            label = classify_pure_2anyon(psi)
            assert (label == "entangled") == (report.max_violation > 1e-8)


def test_uncorrelated_families_violation_floor(model, basis2):
    part = bipartition(basis2, 1)
    rng = np.random.default_rng(11)
    for _ in range(100):
        th = rng.uniform(0, 2 * math.pi, 2)
        c = math.sqrt(rng.uniform(0.02, 0.98))
        s = math.sqrt(1 - c * c)
        for terms in (
            (c * np.exp(1j * th[0]), 0.0, s * np.exp(1j * th[1])),
            (0.0, c * np.exp(1j * th[0]), s * np.exp(1j * th[1])),
        ):
            report = is_uncorrelated(_tau_state(basis2, *terms), part)
            assert report.max_violation <= 1e-12


def test_maximally_entangled_tau_family(basis2):
    state = _tau_state(basis2, 1j * SQ2, SQ2, 0.0)  # (|e,tau> + i|tau,e>)/sqrt(2)
    flag, phase = is_maximally_entangled_2anyon(state)
    assert flag
    assert phase == pytest.approx(math.pi / 2)


def test_maximally_entangled_vacuum_pair(basis2):
    state, _ = superpose([(1.0, ket(basis2, "e,e;e")), (1.0, ket(basis2, "tau,tau;e"))])
    flag, phase = is_maximally_entangled_2anyon(state)
    assert flag  # both marginals are diag(1/2, 1/2) by direct partial trace
    assert phase is None


def test_unequal_marginals_state_not_maximally_entangled(unequal_marginals_state):
    flag, _ = is_maximally_entangled_2anyon(unequal_marginals_state)
    assert not flag


def test_local_unitary_orbit_preserves_moduli(basis2):
    assert local_unitary_orbit_check(_tau_state(basis2, 0.0, 0.6, 0.8), samples=100, seed=3)
    assert local_unitary_orbit_check(_tau_state(basis2, 0.6, 0.0, 0.8), samples=100, seed=4)


def test_report_json_keys(basis2, unequal_marginals_state):
    report = is_uncorrelated(unequal_marginals_state, bipartition(basis2, 1))
    payload = report.to_json_dict()
    assert set(payload) == {
        "uncorrelated", "max_violation", "witness_a", "witness_b",
        "spectrum_a", "spectrum_b", "class",
    }
