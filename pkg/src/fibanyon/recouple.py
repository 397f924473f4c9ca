"""Basis changes between coupling-tree shapes, and adjacent-leaf braids.

An elementary move re-associates one vertex, ((A B) C) <-> (A (B C)),
with coefficients given by the F-symbols of the subtree root charges:

    |(a,b),c; d; g>  =  sum_f  [F^{abc}_g]_{df}  |a,(b,c); f; g>

Arbitrary shape-to-shape changes are composed from elementary moves,
routed through the left comb.  Every such matrix is unitary and block
diagonal in the global charge; two different routes between the same
shapes give the same matrix (pentagon identity), which the tests check.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .model import AnyonModel
from .trees import FusionTree, SectorBasis, TreeShape, enumerate_basis, left_comb, right_comb


@dataclass(frozen=True)
class BasisChange:
    """Unitary matrix re-expressing source-shape amplitudes in a target shape."""

    source: SectorBasis
    target: SectorBasis
    matrix: np.ndarray

    def then(self, other: "BasisChange") -> "BasisChange":
        if not other.source.compatible(self.target):
            raise ShapeError("basis changes do not compose: shape mismatch")
        return BasisChange(self.source, other.target, other.matrix @ self.matrix)

    def inverse(self) -> "BasisChange":
        return BasisChange(self.target, self.source, self.matrix.conj().T)


def _rotated_structure(shape: TreeShape, vertex: int, direction: str):
    """Structure after re-associating `vertex`; raises if not applicable."""
    nodes = shape.internal_nodes
    if not 0 <= vertex < len(nodes):
        raise ShapeError(f"no internal vertex {vertex} in shape {shape}")
    target_node = nodes[vertex]

    # Leaf indices are distinct, so no two nodes compare equal and the
    # rotation site is unambiguous.
    def walk(node):
        if node == target_node:
            left, right = node
            if direction == "right":
                if isinstance(left, int):
                    raise ShapeError("right move needs an internal left child")
                a, b = left
                return (a, (b, right))
            else:
                if isinstance(right, int):
                    raise ShapeError("left move needs an internal right child")
                b, c = right
                return ((left, b), c)
        if isinstance(node, int):
            return node
        return (walk(node[0]), walk(node[1]))

    return TreeShape(walk(shape.structure))


def elementary_fmove(
    model: AnyonModel, shape: TreeShape, vertex: int, direction: str = "right"
) -> BasisChange:
    """Single re-association at one vertex (preorder index).

    ``direction="right"`` turns ((A B) C) into (A (B C)) at the vertex,
    ``"left"`` is the inverse.  All other labels carry through unchanged.
    """
    if direction not in ("right", "left"):
        raise ShapeError(f"direction must be 'right' or 'left', got {direction!r}")
    source = enumerate_basis(model, shape)
    target_shape = _rotated_structure(shape, vertex, direction)
    target = enumerate_basis(model, target_shape)

    # Internal charges in preorder around the vertex v:
    #   right move: [.. prefix, g@v, d@(A B), A.., B.., C.., suffix ..]
    #         ->    [.. prefix, g@v, A.., f@(B C), B.., C.., suffix ..]
    # so the move splices one entry; everything else is positional.
    node = shape.internal_nodes[vertex]
    if direction == "right":
        (a_node, b_node), c_node = node
    else:
        a_node, (b_node, c_node) = node
    n_a = _count_internal(a_node)
    n_b = _count_internal(b_node)

    matrix = np.zeros((target.dim, source.dim), dtype=complex)
    for src_idx, tree in enumerate(source.trees):
        ints = tree.internal_charges
        g = ints[vertex]
        a = tree.charge_at(a_node)
        b = tree.charge_at(b_node)
        c = tree.charge_at(c_node)
        if direction == "right":
            d = ints[vertex + 1]
            for f in model.fusion_outcomes(b, c):
                coeff = model.f_symbol(a, b, c, g, d, f)
                if coeff == 0.0:
                    continue
                new_ints = (
                    ints[: vertex + 1]
                    + ints[vertex + 2 : vertex + 2 + n_a]
                    + (f,)
                    + ints[vertex + 2 + n_a :]
                )
                tgt_idx = target.index_of(FusionTree(target_shape, tree.leaf_charges, new_ints))
                matrix[tgt_idx, src_idx] = coeff
        else:
            f = ints[vertex + 1 + n_a]
            for d in model.fusion_outcomes(a, b):
                coeff = np.conj(model.f_symbol(a, b, c, g, d, f))
                if coeff == 0.0:
                    continue
                new_ints = (
                    ints[: vertex + 1]
                    + (d,)
                    + ints[vertex + 1 : vertex + 1 + n_a]
                    + ints[vertex + 2 + n_a :]
                )
                tgt_idx = target.index_of(FusionTree(target_shape, tree.leaf_charges, new_ints))
                matrix[tgt_idx, src_idx] = coeff
    return BasisChange(source, target, matrix)


def _count_internal(node) -> int:
    return 0 if isinstance(node, int) else 1 + _count_internal(node[0]) + _count_internal(node[1])


def _moves_to_comb(shape: TreeShape, comb_builder) -> list[tuple[int, str]]:
    """Rotation sequence taking `shape` to the left (or right) comb."""
    want_left = comb_builder is left_comb
    moves = []
    current = shape
    while True:
        nodes = current.internal_nodes
        pick = None
        for i, node in enumerate(nodes):
            child = node[1] if want_left else node[0]
            if not isinstance(child, int):
                pick = (i, "left" if want_left else "right")
                break
        if pick is None:
            return moves
        moves.append(pick)
        current = _rotated_structure(current, *pick)


@functools.lru_cache(maxsize=128)
def shape_change(
    model: AnyonModel, source: TreeShape, target: TreeShape, via: str = "left"
) -> BasisChange:
    """Unitary from the source-shape basis to the target-shape basis.

    Routed through the left comb by default (``via="right"`` uses the
    right comb; both give the same matrix by path independence).
    Results are cached per (model, source, target, via).
    """
    if source.n_leaves != target.n_leaves:
        raise ShapeError("source and target shapes have different leaf counts")
    if source == target:
        basis = enumerate_basis(model, source)
        return BasisChange(basis, basis, np.eye(basis.dim, dtype=complex))
    comb = left_comb if via == "left" else right_comb
    basis = enumerate_basis(model, source)
    change = BasisChange(basis, basis, np.eye(basis.dim, dtype=complex))
    current = source
    for vertex, direction in _moves_to_comb(source, comb):
        step = elementary_fmove(model, current, vertex, direction)
        change = change.then(step)
        current = step.target.shape
    # comb -> target: invert the target's route to the comb, in reverse.
    down: list[BasisChange] = []
    t_current = target
    for vertex, direction in _moves_to_comb(target, comb):
        step = elementary_fmove(model, t_current, vertex, direction)
        down.append(step)
        t_current = step.target.shape
    for step in reversed(down):
        change = change.then(step.inverse())
    return change


def change_shape(model: AnyonModel, state, target: TreeShape):
    """Re-express a state in the target-shape basis; norm is preserved."""
    from .states import AnyonState

    change = shape_change(model, state.basis.shape, target)
    return AnyonState(enumerate_basis(model, target), change.matrix @ state.amplitudes)


def braid_adjacent(model: AnyonModel, state, leaf_pair: tuple[int, int], direction: str = "ccw"):
    """Exchange two adjacent leaves that meet at a common vertex.

    Counterclockwise exchange of charges (x, y) fusing to c multiplies the
    amplitude by R^{xy}_c and swaps the two leaf labels; clockwise is the
    inverse.  If the leaves do not share a vertex, reshape first.
    """
    from .states import AnyonState

    i, j = leaf_pair
    if j != i + 1:
        raise ShapeError("braid_adjacent exchanges a pair of neighbouring leaves (i, i+1)")
    shape = state.basis.shape
    try:
        vertex = shape.internal_nodes.index((i, j))
    except ValueError:
        raise ShapeError(
            f"leaves {i},{j} do not meet at a vertex of {shape}; apply change_shape first"
        ) from None
    if direction not in ("ccw", "cw"):
        raise ShapeError(f"direction must be 'ccw' or 'cw', got {direction!r}")

    basis = state.basis
    out = np.zeros_like(state.amplitudes)
    for idx, amp in enumerate(state.amplitudes):
        if amp == 0.0:
            continue
        tree = basis.tree_at(idx)
        x, y = tree.leaf_charges[i], tree.leaf_charges[j]
        c = tree.internal_charges[vertex]
        phase = model.r_symbol(x, y, c) if direction == "ccw" else np.conj(model.r_symbol(y, x, c))
        leaves = list(tree.leaf_charges)
        leaves[i], leaves[j] = y, x
        out[basis.index_of(FusionTree(shape, tuple(leaves), tree.internal_charges))] += phase * amp
    return AnyonState(basis, out)
