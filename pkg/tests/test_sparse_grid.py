import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgqi.errors import DomainError, ResourceError
from sgqi.sparse_grid import (
    GridNode,
    combination_plan,
    count_full_nodes,
    count_sparse_nodes,
    enumerate_shell,
    full_plan,
    sparse_nodes,
    subgrid_axes,
    subgrid_nodes,
    subgrid_size,
)


class TestShells:
    def test_small_shell(self):
        assert enumerate_shell(4, 2) == [(1, 3), (2, 2), (3, 1)]

    def test_shell_size_is_binomial(self):
        shell = enumerate_shell(8, 2)
        assert len(shell) == 7
        assert shell[0] == (1, 7) and shell[-1] == (7, 1)

    def test_infeasible_shell(self):
        assert enumerate_shell(2, 3) == []

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 4))
    def test_members_are_sorted_and_valid(self, s, d):
        shell = enumerate_shell(s, d)
        assert shell == sorted(shell)
        assert all(sum(l) == s and min(l) >= 1 and len(l) == d for l in shell)


class TestCombinationPlan:
    def test_two_dimensional_coefficients(self):
        assert combination_plan(5, 2).shells == ((5, -1), (6, 1))

    def test_three_dimensional_coefficients(self):
        assert combination_plan(4, 3).shells == ((4, 1), (5, -2), (6, 1))

    def test_one_dimension_is_a_single_grid(self):
        plan = combination_plan(6, 1)
        assert list(plan.items()) == [(1, (6,))]

    @pytest.mark.parametrize("n,d", [(1, 1), (3, 2), (2, 4), (5, 5), (1, 6)])
    def test_coefficients_sum_to_one(self, n, d):
        assert combination_plan(n, d).coefficient_sum() == 1

    def test_finest_level(self):
        assert combination_plan(5, 3).finest_levels() == (5, 5, 5)

    def test_full_plan(self):
        plan = full_plan((3, 4))
        assert list(plan.items()) == [(1, (3, 4))]

    def test_rejects_bad_input(self):
        with pytest.raises(DomainError):
            combination_plan(0, 2)
        with pytest.raises(DomainError):
            full_plan((0, 2))


class TestSubgrids:
    def test_cube_nodes(self):
        nodes = subgrid_nodes((1, 1), "cube")
        assert len(nodes) == 9
        assert {n.coords for n in nodes} == {(a, b) for a in (0, 0.5, 1) for b in (0, 0.5, 1)}

    def test_torus_nodes(self):
        assert {n.coords for n in subgrid_nodes((1, 1), "torus")} == {(a, b) for a in (0, 0.5) for b in (0, 0.5)}

    def test_axes(self):
        assert list(subgrid_axes((2,), "cube")[0]) == [0, 0.25, 0.5, 0.75, 1]

    def test_sizes(self):
        assert subgrid_size((2, 3), "cube") == 45
        assert subgrid_size((2, 3), "torus") == 32

    def test_budget_guard(self):
        with pytest.raises(ResourceError):
            subgrid_nodes((10, 10), "cube", budget=1000)

    def test_node_coordinates(self):
        assert GridNode((3,), (5,)).coords == (0.625,)

    def test_unknown_convention(self):
        with pytest.raises(DomainError):
            subgrid_size((1,), "sphere")


class TestCounting:
    def test_figure_counts(self):
        assert count_sparse_nodes(7, 2, "cube") == 1281
        assert count_full_nodes(7, 2, "cube") == 16641

    def test_line(self):
        assert count_sparse_nodes(7, 1, "cube") == 129

    def test_smallest_sparse_grid(self):
        assert len(sparse_nodes(1, 2, "cube")) == 9

    @pytest.mark.parametrize("convention", ["cube", "torus"])
    def test_formula_matches_union(self, convention):
        for n in range(1, 6):
            for d in range(1, 4):
                assert count_sparse_nodes(n, d, convention) == \
                    count_sparse_nodes(n, d, convention, "enumerate"), (n, d)

    def test_sparse_nodes_are_distinct_and_sorted(self):
        nodes = sparse_nodes(4, 2, "torus")
        keys = [n.j for n in nodes]
        assert keys == sorted(set(keys))
        assert len(nodes) == count_sparse_nodes(4, 2, "torus")

    def test_enumeration_respects_budget(self):
        with pytest.raises(ResourceError):
            count_sparse_nodes(8, 3, "cube", "enumerate", budget=100)

    def test_unknown_method(self):
        with pytest.raises(DomainError):
            count_sparse_nodes(3, 2, method="guess")
