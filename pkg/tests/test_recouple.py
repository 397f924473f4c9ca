import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibanyon.errors import ShapeError
from fibanyon.recouple import braid_adjacent, change_shape, elementary_fmove, shape_change
from fibanyon.states import ket, random_pure_state
from fibanyon.trees import all_shapes, enumerate_basis, left_comb, right_comb

PHI_INV = (math.sqrt(5.0) - 1.0) / 2.0


def test_fmove_block_is_f_matrix_on_all_tau(model):
    # left comb ((0 1) 2) -> right comb (0 (1 2)) at the root vertex; with
    # all-tau leaves in the tau sector the 2x2 block must be the F-matrix.
    move = elementary_fmove(model, left_comb(3), vertex=0, direction="right")
    src = move.source
    tgt = move.target
    labels_src = ["(tau,tau),tau;e;tau", "(tau,tau),tau;tau;tau"]
    labels_tgt = ["tau,(tau,tau);e;tau", "tau,(tau,tau);tau;tau"]
    block = np.empty((2, 2), dtype=complex)
    for j, ls in enumerate(labels_src):
        for i, lt in enumerate(labels_tgt):
            block[i, j] = move.matrix[tgt.index_of_label(lt), src.index_of_label(ls)]
    # rows/cols ordered (e, tau); matrix is real symmetric so transpose-free
    expected = np.array([[PHI_INV, math.sqrt(PHI_INV)], [math.sqrt(PHI_INV), -PHI_INV]])
    np.testing.assert_allclose(block, expected, atol=1e-15)


def test_fmove_vacuum_leaf_is_identity_block(model):
    move = elementary_fmove(model, left_comb(3), vertex=0, direction="right")
    src, tgt = move.source, move.target
    # leaves (e, tau, tau): single consistent labeling per global charge
    for g, src_lbl, tgt_lbl in [
        ("e", "(e,tau),tau;tau;e", "e,(tau,tau);e;e"),
        ("tau", "(e,tau),tau;tau;tau", "e,(tau,tau);tau;tau"),
    ]:
        amp = move.matrix[tgt.index_of_label(tgt_lbl), src.index_of_label(src_lbl)]
        assert amp == pytest.approx(1.0)


def test_fmove_inverse_roundtrip(model):
    move = elementary_fmove(model, left_comb(3), vertex=0, direction="right")
    back = elementary_fmove(model, move.target.shape, vertex=0, direction="left")
    np.testing.assert_allclose(back.matrix @ move.matrix, np.eye(13), atol=1e-12)


def test_fmove_requires_internal_child(model):
    with pytest.raises(ShapeError):
        elementary_fmove(model, left_comb(3), vertex=1, direction="right")  # leaf children
    with pytest.raises(ShapeError):
        elementary_fmove(model, left_comb(3), vertex=0, direction="left")  # right child is a leaf


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_shape_change_unitary_and_sector_diagonal(model, n):
    shapes = all_shapes(n)
    basis = enumerate_basis(model, shapes[0])
    mask = np.ones((basis.dim, basis.dim), dtype=bool)
    for g in model.charges:
        sl = basis.sector_slice(g)
        mask[sl, sl] = False
    for tgt in shapes:
        u = shape_change(model, shapes[0], tgt).matrix
        np.testing.assert_allclose(u.conj().T @ u, np.eye(basis.dim), atol=1e-12)
        assert np.max(np.abs(u[mask]), initial=0.0) <= 1e-12


def test_shape_change_path_independent(model):
    shapes = all_shapes(5)
    for src in shapes[::3]:
        for tgt in shapes[::4]:
            left = shape_change(model, src, tgt, via="left").matrix
            right = shape_change(model, src, tgt, via="right").matrix
            np.testing.assert_allclose(left, right, atol=1e-12)


def test_change_shape_roundtrip_identity(model):
    for src in all_shapes(4):
        for tgt in all_shapes(4):
            fwd = shape_change(model, src, tgt).matrix
            back = shape_change(model, tgt, src).matrix
            np.testing.assert_allclose(back @ fwd, np.eye(34), atol=1e-12)


def test_change_shape_leaf_count_mismatch(model):
    state = ket(enumerate_basis(model, left_comb(2)), "tau,e;tau")
    with pytest.raises(ShapeError):
        change_shape(model, state, left_comb(3))


@settings(deadline=None, max_examples=20)
@given(seed=st.integers(0, 10_000), sector=st.sampled_from(["e", "tau"]))
def test_change_shape_preserves_norm_n5(model, seed, sector):
    rng = np.random.default_rng(seed)
    basis = enumerate_basis(model, left_comb(5))
    state = random_pure_state(basis, sector, rng)
    moved = change_shape(model, state, right_comb(5))
    assert moved.norm() == pytest.approx(1.0, abs=1e-12)
    back = change_shape(model, moved, left_comb(5))
    np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)


def test_braid_tau_pair_vacuum_channel_phase(model, basis2):
    state = ket(basis2, "tau,tau;e")
    out = braid_adjacent(model, state, (0, 1), "ccw")
    expected = np.exp(-4j * math.pi / 5)
    assert out.amplitude("tau,tau;e") == pytest.approx(expected)


def test_braid_swaps_vacuum_with_trivial_phase(model, basis2):
    out = braid_adjacent(model, ket(basis2, "e,tau;tau"), (0, 1), "ccw")
    assert out.amplitude("tau,e;tau") == pytest.approx(1.0)
    assert out.amplitude("e,tau;tau") == 0.0


def test_braid_ccw_then_cw_restores(model, basis2, rng):
    state = random_pure_state(basis2, "tau", rng)
    out = braid_adjacent(model, braid_adjacent(model, state, (0, 1), "ccw"), (0, 1), "cw")
    np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-12)


def test_braid_requires_shared_vertex(model):
    basis = enumerate_basis(model, left_comb(3))
    state = ket(basis, basis.tree_at(0))
    with pytest.raises(ShapeError):
        braid_adjacent(model, state, (1, 2), "ccw")  # leaves 1,2 do not share a vertex
