import pytest

from fibanyon.errors import FusionError, ShapeError
from fibanyon.trees import (
    FusionTree,
    TreeShape,
    all_shapes,
    enumerate_basis,
    grouped_shape,
    left_comb,
    parse_tree_label,
    right_comb,
    sector_dimension,
)

FIB_DIMS = {1: 2, 2: 5, 3: 13, 4: 34, 5: 89, 6: 233, 7: 610, 8: 1597}


@pytest.mark.parametrize("n,expected", sorted(FIB_DIMS.items()))
def test_dimension_is_fibonacci(model, n, expected):
    assert enumerate_basis(model, left_comb(n)).dim == expected


def test_dimension_shape_independent(model):
    for n in range(2, 6):
        dims = {enumerate_basis(model, shape).dim for shape in all_shapes(n)}
        assert dims == {FIB_DIMS[n]}


def test_two_anyon_sector_listing(basis2):
    assert [t.label() for t in basis2.sectors["e"]] == ["e,e;e", "tau,tau;e"]
    assert [t.label() for t in basis2.sectors["tau"]] == ["e,tau;tau", "tau,e;tau", "tau,tau;tau"]
    assert basis2.sector_dim("e") == 2
    assert basis2.sector_dim("tau") == 3


def test_one_anyon_basis(model):
    basis = enumerate_basis(model, 1)
    assert [t.label() for t in basis.trees] == ["e", "tau"]
    assert sector_dimension(basis, "tau") == 1


def test_sector_dimension_unknown_charge(basis2):
    with pytest.raises(FusionError):
        sector_dimension(basis2, "sigma")


def test_index_tree_roundtrip(model):
    basis = enumerate_basis(model, grouped_shape(2, 2))
    assert basis.dim == 34
    for i in range(basis.dim):
        assert basis.index_of(basis.tree_at(i)) == i


def test_indices_cover_basis_once(basis2):
    seen = {basis2.index_of(t) for t in basis2.trees}
    assert seen == set(range(5))


def test_index_of_inconsistent_tree(basis2):
    bad = FusionTree(basis2.shape, ("e", "e"), ("tau",))  # (e,e) -> tau is not allowed
    with pytest.raises(FusionError):
        basis2.index_of(bad)


def test_index_of_wrong_shape(model, basis2):
    other = enumerate_basis(model, left_comb(3))
    with pytest.raises(ShapeError):
        basis2.index_of(other.tree_at(0))


def test_enumeration_deterministic(model):
    a = [t.label() for t in enumerate_basis(model, left_comb(4)).trees]
    b = [t.label() for t in enumerate_basis(model, left_comb(4)).trees]
    assert a == b
    # vacuum sector comes first in the flat ordering
    basis = enumerate_basis(model, left_comb(4))
    sectors = [t.global_charge for t in basis.trees]
    assert sectors == sorted(sectors, key=("e", "tau").index)


def test_shape_parse_serialize_roundtrip():
    for text in ["0", "(0 1)", "((0 1) 2)", "((0 1)((2 3)(4 5)))"]:
        assert TreeShape.parse(text).serialize() == text


def test_shape_rejects_misordered_leaves():
    with pytest.raises(ShapeError):
        TreeShape(((1, 0), 2))
    with pytest.raises(ShapeError):
        TreeShape.parse("((0 2) 1)")


def test_shape_parse_rejects_malformed():
    for text in ["(0 1", "(0 1))", "(0 (1)", "(a b)"]:
        with pytest.raises(ShapeError):
            TreeShape.parse(text)


def test_combs_and_grouped():
    assert left_comb(4).serialize() == "(((0 1) 2) 3)"
    assert right_comb(4).serialize() == "(0(1(2 3)))"
    assert grouped_shape(2, 2).serialize() == "((0 1)(2 3))"
    assert grouped_shape(2, 4).serialize() == "((0 1)(((2 3) 4) 5))"


def test_all_shapes_counts_catalan():
    assert [len(all_shapes(n)) for n in range(1, 6)] == [1, 1, 2, 5, 14]


def test_tree_label_fields_explicit(basis4):
    tree = basis4.tree_at(basis4.index_of_label("(tau,e),(e,tau);tau,tau;e"))
    assert tree.leaf_charges == ("tau", "e", "e", "tau")
    assert tree.internal_charges == ("e", "tau", "tau")
    assert tree.label() == "(tau,e),(e,tau);tau,tau;e"


def test_label_roundtrip_all_trees(model):
    for shape in (left_comb(3), grouped_shape(2, 2), grouped_shape(2, 4)):
        basis = enumerate_basis(model, shape)
        for tree in basis.trees:
            assert parse_tree_label(shape, tree.label()) == tree


def test_label_accepts_unicode_tau(basis2):
    assert basis2.index_of_label("τ,e;τ") == basis2.index_of_label("tau,e;tau")
