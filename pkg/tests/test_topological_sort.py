import pytest

from mhdkin.core.exceptions import InvalidBlockStructureError
from mhdkin.utils.topological_sort import topological_sort, validate_dependencies


def test_dependencies_come_first():
    order = topological_sort({"c": ["a", "b"], "b": ["a"], "a": []})
    assert order == ["a", "b", "c"]


def test_priority_breaks_ties():
    dependencies = {"x": [], "y": [], "z": ["x"]}
    assert topological_sort(dependencies) == ["x", "y", "z"]
    assert topological_sort(dependencies, priority=["y", "z", "x"]) == ["y", "x", "z"]


def test_unlisted_nodes_follow_priority_nodes():
    order = topological_sort({"a": [], "b": [], "c": []}, priority=["c"])
    assert order == ["c", "a", "b"]


def test_nodes_only_named_as_dependencies():
    assert topological_sort({"b": ["a"]}) == ["a", "b"]


def test_circular_dependencies():
    with pytest.raises(InvalidBlockStructureError):
        topological_sort({"a": ["b"], "b": ["c"], "c": ["a"]})


def test_couplings_to_dependencies():
    dependencies = validate_dependencies([("J", "phi"), ("J", "A"), ("A", "r"), ("J", "A")])
    assert dependencies == {"J": ["phi", "A"], "phi": [], "A": ["r"], "r": []}


def test_self_coupling():
    with pytest.raises(InvalidBlockStructureError):
        validate_dependencies([("A", "A")])


def test_upper_triangular_block_order():
    dependencies = validate_dependencies([("J", "phi"), ("J", "A"), ("A", "r")])
    order = topological_sort(dependencies, priority=["r", "A", "phi", "J"])
    assert order == ["r", "A", "phi", "J"]
