import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

import weightlab as wl
from weightlab.errors import ConfigError, NoParentError
from weightlab.grid import Cube, cube_containing_cell


def test_build_grid_basic():
    g = wl.build_grid(0, 3)
    assert g.ncells == 8
    assert g.cell_width == 0.125
    assert g.domain_length == 1.0

    g2 = wl.build_grid(2, 2)
    assert g2.ncells == 16
    assert g2.cell_width == 0.25
    assert g2.domain_length == 4.0


def test_build_grid_rejects_out_of_range():
    with pytest.raises(ConfigError):
        wl.build_grid(0, 25)
    with pytest.raises(ConfigError):
        wl.build_grid(-1, 3)
    with pytest.raises(ConfigError):
        wl.build_grid(15, 15)


def test_parent_examples():
    g = wl.build_grid(0, 3)
    # [1/4, 1/2) at level 2 -> [0, 1/2)
    q = Cube(2, 1)
    assert q.endpoints() == (0.25, 0.5)
    p = wl.parent(g, q)
    assert p == Cube(1, 0)
    assert p.endpoints() == (0.0, 0.5)

    g2 = wl.build_grid(2, 2)
    # [0,1) at level 0 -> [0,2)
    assert wl.parent(g2, Cube(0, 0)) == Cube(-1, 0)
    with pytest.raises(NoParentError):
        wl.parent(g2, Cube(-2, 0))  # root [0,4)


def test_dyadic_cubes_partition():
    g = wl.build_grid(0, 2)
    level1 = wl.dyadic_cubes(g, 1)
    assert [q.endpoints() for q in level1] == [(0.0, 0.5), (0.5, 1.0)]
    g2 = wl.build_grid(1, 1)
    level0 = wl.dyadic_cubes(g2, 0)
    assert [q.endpoints() for q in level0] == [(0.0, 1.0), (1.0, 2.0)]
    with pytest.raises(ConfigError):
        wl.dyadic_cubes(g, 5)


def test_total_cube_count_geometric_series():
    # enumeration oracle: levels -J..L hold 2^(J+k) cubes each
    for J, L in [(0, 3), (2, 2), (3, 4)]:
        g = wl.build_grid(J, L)
        total = sum(1 for _ in wl.all_cubes(g))
        by_levels = sum(g.ncubes(k) for k in g.levels())
        assert total == by_levels == 2 ** (J + L + 1) - 1


def test_cells_of_examples():
    g = wl.build_grid(0, 3)
    assert wl.cells_of(g, Cube(1, 0)) == range(0, 4)  # [0, 1/2)
    assert wl.cells_of(g, Cube(3, 5)) == range(5, 6)  # single cell
    assert wl.cells_of(g, g.root) == range(0, 8)


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_ancestry_invariants(data):
    J = data.draw(st.integers(0, 4))
    L = data.draw(st.integers(0, 6))
    g = wl.build_grid(J, L)
    k = data.draw(st.integers(-J + 1, L)) if J + L > 0 else 0
    if k == 0 and J == 0 and L == 0:
        return
    m = data.draw(st.integers(0, g.ncubes(k) - 1))
    q = Cube(k, m)
    p = wl.parent(g, q)
    s = wl.sibling(g, q)
    assert wl.contains(p, q)
    assert p.length == 2 * q.length
    # cells_of(parent) is the disjoint union of the children's cell ranges
    pc = wl.cells_of(g, p)
    qc = wl.cells_of(g, q)
    sc = wl.cells_of(g, s)
    assert set(pc) == set(qc) | set(sc)
    assert not (set(qc) & set(sc))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3), st.integers(0, 5))
def test_level_partition(J, L):
    g = wl.build_grid(J, L)
    for k in g.levels():
        seen = []
        for q in wl.dyadic_cubes(g, k):
            r = wl.cells_of(g, q)
            seen.extend(r)
        assert seen == list(range(g.ncells))


def test_cube_containing_cell():
    g = wl.build_grid(1, 3)
    q = cube_containing_cell(g, 11, 0)
    assert q == Cube(0, 1)
    assert 11 in wl.cells_of(g, q)
