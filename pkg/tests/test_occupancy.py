import numpy as np
import pytest

from empnav.occupancy import GridSpec, assemble_state, build_ego_map, map_to_csv_rows, state_length
from empnav.simulation import AgentState, Observable, WorldState


def agent(px, py, vx=0.0, vy=0.0):
    return AgentState(px, py, vx, vy, 0.3, 0.0, 0.0, 1.0, 0.0)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(rows=0)
    with pytest.raises(ValueError):
        GridSpec(cell_size=0.0)


def test_empty_map():
    m = build_ego_map(agent(3, -2), [], GridSpec())
    assert m.grid.shape == (4, 4, 3)
    assert np.all(m.grid == 0.0)


def test_single_neighbor_east_cell():
    # 4x4 grid of 1 m cells spans [-2, 2); +0.5 m east lands in column 2 of
    # the center row band [0, 1), carrying the occupant's velocity
    center = agent(10.0, 5.0)
    other = Observable(10.5, 5.5, -0.7, 0.3, 0.3)
    m = build_ego_map(center, [other], GridSpec())
    occupied = np.argwhere(m.grid[:, :, 0] == 1.0)
    assert occupied.shape == (1, 2)
    row, col = occupied[0]
    assert col == 2
    assert row == 2
    assert m.grid[row, col, 1] == -0.7
    assert m.grid[row, col, 2] == 0.3


def test_translation_invariance():
    spec = GridSpec()
    rng = np.random.default_rng(4)
    for _ in range(20):
        dx, dy = rng.uniform(-40, 40, 2)
        others = [Observable(*rng.uniform(-2, 2, 2), *rng.uniform(-1, 1, 2), 0.3) for _ in range(4)]
        m1 = build_ego_map(agent(0, 0), others, spec)
        shifted = [Observable(o.p_x + dx, o.p_y + dy, o.v_x, o.v_y, o.rho) for o in others]
        m2 = build_ego_map(agent(dx, dy), shifted, spec)
        assert np.array_equal(m1.grid, m2.grid)


def test_out_of_range_agents_ignored():
    m = build_ego_map(agent(0, 0), [Observable(5.0, 0.0, 1, 1, 0.3)], GridSpec())
    assert np.all(m.grid == 0.0)


def test_nearest_wins_contested_cell():
    center = agent(0, 0)
    near = Observable(0.6, 0.5, 1.0, 0.0, 0.3)
    far = Observable(0.9, 0.8, -1.0, 0.0, 0.3)  # same cell, farther away
    m = build_ego_map(center, [far, near], GridSpec())
    occupied = np.argwhere(m.grid[:, :, 0] == 1.0)
    assert occupied.shape == (1, 2)
    row, col = occupied[0]
    assert m.grid[row, col, 1] == 1.0


def test_binary_occupancy_and_zero_velocity_invariant():
    rng = np.random.default_rng(9)
    spec = GridSpec()
    for _ in range(50):
        others = [Observable(*rng.uniform(-3, 3, 2), *rng.uniform(-1, 1, 2), 0.3)
                  for _ in range(rng.integers(0, 6))]
        m = build_ego_map(agent(0, 0), others, spec)
        occ = m.grid[:, :, 0]
        assert set(np.unique(occ)) <= {0.0, 1.0}
        empty = occ == 0.0
        assert np.all(m.grid[empty, 1] == 0.0)
        assert np.all(m.grid[empty, 2] == 0.0)


def world_with(humans, robot=None):
    return WorldState(
        robot=robot if robot is not None else agent(50, 50),
        humans=humans,
        t=0,
        dt=0.25,
    )


def test_single_human_k1_is_own_map():
    w = world_with([agent(0, 0)])
    z = assemble_state(0, w, GridSpec(), k=1)
    assert z.shape == (48,)
    assert np.all(z == 0.0)  # robot far away, no other humans


def test_padding_contract():
    w = world_with([agent(0, 0), agent(1.2, 0.4)])
    z = assemble_state(0, w, GridSpec(), k=3)
    assert len(z) == 3 * 48
    assert np.all(z[96:] == 0.0)  # third slot padded


def test_robot_appears_in_maps():
    w = world_with([agent(0, 0)], robot=agent(0.5, 0.5, vx=0.9))
    z = assemble_state(0, w, GridSpec(), k=1)
    assert z.reshape(4, 4, 3)[:, :, 0].sum() == 1.0
    assert 0.9 in z


def test_neighbor_order_by_distance_with_id_tiebreak():
    # humans 1 and 2 exactly equidistant from human 0: order must not depend
    # on storage order beyond the index tiebreak
    h0 = agent(0, 0)
    h1 = agent(1.4, 0.0, vx=0.5)
    h2 = agent(-1.4, 0.0, vx=-0.5)
    za = assemble_state(0, world_with([h0, h1, h2]), GridSpec(), k=3)
    zb = assemble_state(0, world_with([h0, h1, h2]), GridSpec(), k=3)
    assert np.array_equal(za, zb)
    # distance ordering: swapping storage of a far and near neighbor keeps
    # the nearer one first
    near = agent(1.0, 0.0, vx=0.7)
    far = agent(3.0, 0.0, vx=-0.7)
    z1 = assemble_state(0, world_with([h0, near, far]), GridSpec(), k=2)
    z2 = assemble_state(0, world_with([h0, far, near]), GridSpec(), k=2)
    assert np.array_equal(z1, z2)


def test_subject_out_of_range():
    with pytest.raises(IndexError):
        assemble_state(3, world_with([agent(0, 0)]), GridSpec())


def test_state_length_constant_across_episode():
    spec = GridSpec()
    assert state_length(spec, k=2) == 96
    w = world_with([agent(0, 0), agent(1, 1)])
    for k in (1, 2, 4):
        assert len(assemble_state(0, w, spec, k=k)) == state_length(spec, k)


def test_neighbors_only_mode():
    h0 = agent(0, 0)
    h1 = agent(1.0, 0.0, vx=0.3)
    z = assemble_state(0, world_with([h0, h1]), GridSpec(), k=1, include_self=False)
    # the only map is h1's ego map, which contains h0 (and not itself)
    grid = z.reshape(4, 4, 3)
    assert grid[:, :, 0].sum() == 1.0


def test_map_csv_rows():
    m = build_ego_map(agent(0, 0), [Observable(0.5, 0.5, 1, 0, 0.3)], GridSpec())
    rows = map_to_csv_rows(2, 7, m)
    assert len(rows) == 16
    assert rows[0].startswith("2,7,0,0,")
