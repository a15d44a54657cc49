import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_tree_pairs
from covselauc.divergences import gaussian_kl
from covselauc.errors import InvalidStructure, ParseError, SingularSubmatrix
from covselauc.generators import random_correlation, toeplitz_equicorrelation
from covselauc.graph_model import (
    EdgeSet,
    ModelCovariance,
    TreeStructure,
    covariance_select,
    log_det,
    path_tree,
    read_edges,
    selection_steps,
    star_tree,
    tree_path_product,
    verify_selection_rules,
    write_edges,
)
from covselauc.matrix_core import CorrelationMatrix, validate_correlation
from covselauc.tree_sampler import uniform_spanning_tree

PRINTED_TREE_MODEL = np.array([
    [1, 0.9, 0.9, 0.63],
    [0.9, 1, 0.81, 0.567],
    [0.9, 0.81, 1, 0.7],
    [0.63, 0.567, 0.7, 1],
])


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 5)], [(0, 1), (1, 0)], [(0, 1, 2)]])
def test_edgeset_rejects_bad_edges(edges):
    with pytest.raises(InvalidStructure):
        EdgeSet(4, tuple(edges))


def test_tree_requires_acyclic_spanning():
    with pytest.raises(InvalidStructure):
        TreeStructure(4, ((0, 1), (1, 2)))
    with pytest.raises(InvalidStructure):
        TreeStructure(4, ((0, 1), (1, 2), (2, 0)))
    t = TreeStructure(4, ((1, 0), (2, 1), (3, 2)))
    assert t.canonical() == ((0, 1), (1, 2), (2, 3))
    assert (2, 1) in t and (0, 3) not in t


def test_empty_structure_gives_identity(four_node_sigma):
    model = covariance_select(four_node_sigma, EdgeSet(4, ()))
    np.testing.assert_allclose(model.values, np.eye(4), atol=1e-15)


def test_worked_example_tree_model(four_node_model):
    np.testing.assert_allclose(four_node_model.values, PRINTED_TREE_MODEL, atol=5e-4)
    assert four_node_model.values[1, 3] == pytest.approx(0.9 * 0.9 * 0.7, abs=1e-12)


def test_chain_on_toeplitz_corner():
    m = covariance_select(toeplitz_equicorrelation(4, 0.5), path_tree(4))
    assert m.values[0, 3] == pytest.approx(0.125, abs=1e-12)


def test_star_leaf_pairs_are_squared():
    rho = 0.6
    m = tree_path_product(toeplitz_equicorrelation(5, rho), star_tree(5))
    assert m.values[2, 4] == pytest.approx(rho * rho, abs=1e-15)


def test_selection_rules_and_rule_violation_report(four_node_sigma, four_node_model):
    assert four_node_model.violations.holds(1e-8)
    full = EdgeSet(4, tuple((i, j) for i in range(4) for j in range(i + 1, 4)))
    same = ModelCovariance(four_node_sigma, full)
    assert verify_selection_rules(four_node_sigma, same).max() == 0.0
    ident = ModelCovariance(validate_correlation(np.eye(4)), path_tree(4))
    v = verify_selection_rules(four_node_sigma, ident)
    assert v.in_structure >= 0.3 - 1e-12
    assert v.in_structure == pytest.approx(0.9)  # largest chain-edge correlation


def test_recursion_invariants_every_step(four_node_sigma, four_node_tree):
    s = four_node_sigma.values
    n = 4
    dets = []
    for prec in selection_steps(four_node_sigma, four_node_tree):
        cov = np.linalg.inv(prec)
        assert np.trace(cov) == pytest.approx(np.trace(s), abs=1e-10)
        assert np.trace(s @ prec) == pytest.approx(n, abs=1e-10)
        dets.append(np.linalg.det(cov))
    # |Sigma_X| <= |Sigma_r| <= |diag(Sigma_X)|, shrinking as edges are added
    assert np.all(np.diff(dets) <= 1e-15)
    assert dets[0] == pytest.approx(1.0)
    assert dets[-1] >= np.linalg.det(s) - 1e-15


def test_singular_edge_rejected():
    raw = CorrelationMatrix(np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    with pytest.raises(SingularSubmatrix):
        covariance_select(raw, path_tree(3))


def test_structure_size_mismatch(four_node_sigma):
    with pytest.raises(InvalidStructure):
        covariance_select(four_node_sigma, path_tree(5))


def test_path_product_matches_recursion_on_random_trees():
    for sigma, tree in random_tree_pairs(200, (2, 10), seed=11):
        a = covariance_select(sigma, tree).values
        b = tree_path_product(sigma, tree).values
        assert np.max(np.abs(a - b)) <= 1e-9


def test_edge_order_does_not_matter():
    rng = np.random.default_rng(5)
    sigma = random_correlation(8, rng)
    tree = uniform_spanning_tree(8, rng)
    base = covariance_select(sigma, tree).values
    for _ in range(5):
        edges = list(tree.edges)
        rng.shuffle(edges)
        shuffled = TreeStructure(8, tuple((v, u) if rng.random() < 0.5 else (u, v) for u, v in edges))
        np.testing.assert_allclose(covariance_select(sigma, shuffled).values, base, atol=1e-12)


def test_kl_identity_on_random_models():
    for sigma, tree in random_tree_pairs(40, (3, 10), seed=3):
        model = covariance_select(sigma, tree)
        shortcut = -0.5 * (log_det(sigma.values) - log_det(model.values))
        assert shortcut == pytest.approx(gaussian_kl(sigma, model), abs=1e-9)


def test_cyclic_structure_strict_and_lenient(caplog):
    # a 4-cycle is not chordal, so the edge recursion cannot be exact
    sigma = random_correlation(4, 1)
    cycle = EdgeSet(4, ((0, 1), (1, 2), (2, 3), (3, 0)))
    with pytest.raises(InvalidStructure):
        covariance_select(sigma, cycle)
    model = covariance_select(sigma, cycle, strict=False)
    assert not model.conforms
    assert "cyclic structure" in caplog.text


def test_edge_file_round_trip(tmp_path, four_node_tree):
    path = tmp_path / "tree.txt"
    write_edges(path, four_node_tree)
    back = read_edges(path)
    assert isinstance(back, TreeStructure)
    assert back.canonical() == four_node_tree.canonical()
    path.write_text("0,1\n# comment\n\n1,2 # trailing\n")
    assert read_edges(path, n=4).canonical() == ((0, 1), (1, 2))
    path.write_text("0;1\n")
    with pytest.raises(ParseError, match=":1:"):
        read_edges(path)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**31 - 1))
def test_tree_models_satisfy_selection_rules(n, seed):
    rng = np.random.default_rng(seed)
    sigma = random_correlation(n, rng)
    model = covariance_select(sigma, uniform_spanning_tree(n, rng))
    assert verify_selection_rules(sigma, model).holds(1e-8)


def test_complete_structure_returns_sigma(four_node_sigma):
    full = EdgeSet(4, tuple((i, j) for i in range(4) for j in range(i + 1, 4)))
    model = covariance_select(four_node_sigma, full)
    assert np.array_equal(model.values, four_node_sigma.values)
    assert model.violations.max() == 0.0
