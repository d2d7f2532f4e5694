import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recloop import (
    INITIAL,
    RECOMMENDATION,
    SELECTION,
    BipartiteState,
    RecommenderConfig,
    WorldConfig,
    make_rng,
    new_synthetic,
    verify_against_oracle,
)
from recloop.verify import random_churn
from recloop.world import brute_force_weighted_counts, partition, read_snapshot

from conftest import brute_cooc, brute_degree


def collections_of(state):
    return [list(state.collection(u)) for u in range(state.n_users)]


def test_full_scale_initialization():
    cfg = WorldConfig(n_users=2000, n_items=100, n_genres=10, k=7)
    state, tastes = new_synthetic(cfg, make_rng(0, 0))
    assert np.bincount(tastes.item_genre).tolist() == [10] * 10
    assert (state.degree == 7).all()
    assert (state.provenance[:, :7] == INITIAL).all()
    assert verify_against_oracle(state)


def test_single_genre_world():
    cfg = WorldConfig(n_users=5, n_items=8, n_genres=1, k=3)
    state, tastes = new_synthetic(cfg, make_rng(1, 0))
    assert (tastes.item_genre == 0).all()
    assert (tastes.user_tastes[:, 0] == 0).all()
    assert (tastes.user_tastes[:, 1] == -1).all()


def test_tiny_world_matches_loop_oracle():
    cfg = WorldConfig(n_users=4, n_items=6, n_genres=3, k=2)
    state, _ = new_synthetic(cfg, make_rng(7, 0))
    colls = collections_of(state)
    assert np.array_equal(state.cooccurrence, brute_cooc(colls, 6))
    assert np.array_equal(state.item_degree, brute_degree(colls, 6))


def test_two_taste_pairs_are_distinct():
    cfg = WorldConfig(n_users=300, n_items=20, n_genres=5, k=3, mode="two_taste")
    _, tastes = new_synthetic(cfg, make_rng(3, 0))
    t = tastes.user_tastes
    assert (t >= 0).all() and (t < 5).all()
    assert (t[:, 0] != t[:, 1]).all()
    # every ordered pair shows up with 300 users and 20 pairs
    assert len({tuple(r) for r in t}) == 20


def test_taste_matched_init():
    cfg = WorldConfig(n_users=20, n_items=20, n_genres=4, k=3, init="taste_matched")
    state, tastes = new_synthetic(cfg, make_rng(0, 0))
    for u in range(20):
        assert all(tastes.matches(u, a) for a in state.collection(u))


@pytest.mark.parametrize("kw", [dict(k=20, n_items=20), dict(k=25, n_items=20),
                                dict(n_genres=21, n_items=20, k=3)])
def test_invalid_synthetic_config(kw):
    base = dict(n_users=5, n_items=20, n_genres=4, k=3)
    base.update(kw)
    with pytest.raises(ValueError):
        cfg = WorldConfig(**base)
        new_synthetic(cfg, make_rng(0, 0))


@given(n=st.integers(1, 500), g=st.integers(1, 50))
def test_partition_near_equal(n, g):
    if g > n:
        return
    sizes = np.bincount(partition(n, g), minlength=g)
    assert sizes.max() - sizes.min() <= 1
    assert sizes.sum() == n
    assert (np.diff(partition(n, g)) >= 0).all()


def test_add_item_counts():
    s = BipartiteState.from_collections(10, [[2, 5], []])
    before = s.cooccurrence.copy()
    s.add_item(0, 7, SELECTION)
    diff = s.cooccurrence - before
    assert diff[7, 2] == diff[2, 7] == diff[7, 5] == diff[5, 7] == 1
    assert np.abs(diff).sum() == 4
    assert s.item_degree[7] == 1


def test_add_to_empty_collection():
    s = BipartiteState(2, 5)
    s.add_item(1, 3, RECOMMENDATION)
    assert s.cooccurrence.sum() == 0
    assert s.item_degree.tolist() == [0, 0, 0, 1, 0]


def test_remove_item_counts():
    s = BipartiteState.from_collections(5, [[1, 2, 3], [2, 3]])
    before = s.cooccurrence.copy()
    s.remove_item(0, 2)
    diff = s.cooccurrence - before
    assert diff[2, 1] == diff[2, 3] == -1
    assert np.abs(diff).sum() == 4
    assert sorted(s.collection(0)) == [1, 3]


def test_add_then_remove_is_identity():
    cfg = WorldConfig(n_users=10, n_items=12, n_genres=3, k=4,
                      recommender=RecommenderConfig(bias=2.0, bias_scope="everywhere"))
    s, _ = new_synthetic(cfg, make_rng(0, 0))
    ref = s.copy()
    free = int(np.flatnonzero(~s.held[3])[0])
    s.add_item(3, free, SELECTION)
    s.remove_item(3, free)
    assert s.equals(ref)


def test_contract_violations():
    s = BipartiteState.from_collections(4, [[0, 1]])
    with pytest.raises(ValueError):
        s.add_item(0, 1, SELECTION)
    with pytest.raises(ValueError):
        s.remove_item(0, 2)


def test_random_churn_matches_oracle():
    s = BipartiteState(25, 15)
    rng = np.random.default_rng(11)
    random_churn(s, rng, 10_000)
    colls = collections_of(s)
    assert np.array_equal(s.cooccurrence, brute_cooc(colls, 15))
    assert np.array_equal(s.item_degree, brute_degree(colls, 15))
    assert verify_against_oracle(s)


def test_weighted_counts_follow_churn():
    s = BipartiteState(15, 10, selection_weight=2.5)
    random_churn(s, np.random.default_rng(5), 3000)
    wcooc, wdeg = brute_force_weighted_counts(s, 2.5)
    np.testing.assert_allclose(s.weighted_cooccurrence, wcooc, atol=1e-9)
    np.testing.assert_allclose(s.weighted_degree, wdeg, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_users=st.integers(1, 8), n_items=st.integers(2, 9),
       n_events=st.integers(0, 300))
def test_invariants_under_any_event_sequence(seed, n_users, n_items, n_events):
    s = BipartiteState(n_users, n_items)
    random_churn(s, np.random.default_rng(seed), n_events)
    assert verify_against_oracle(s)
    assert np.array_equal(s.cooccurrence, s.cooccurrence.T)
    assert s.item_degree.sum() == s.degree.sum()
    bound = np.minimum.outer(s.item_degree, s.item_degree)
    assert (s.cooccurrence <= bound).all()


def test_oracle_detects_corruption():
    cfg = WorldConfig(n_users=30, n_items=12, n_genres=3, k=3)
    s, _ = new_synthetic(cfg, make_rng(0, 0))
    assert verify_against_oracle(s)
    s.cooccurrence[1, 2] += 1
    assert not verify_against_oracle(s)
    s.cooccurrence[1, 2] -= 1
    s.item_degree[4] += 1
    assert not verify_against_oracle(s)


def test_post_run_state_matches_oracle():
    from recloop import Simulation

    sim = Simulation(WorldConfig(n_users=100, n_items=30, n_genres=3, k=4, phi=0.4,
                                 updates_per_user=1000))
    sim.advance()
    assert sim.steps_done == 100_000
    assert verify_against_oracle(sim.state)


def test_snapshot_round_trip(tmp_path):
    s = BipartiteState.from_collections(6, [[0, 3], [1], [2, 4, 5]],
                                        [[SELECTION, RECOMMENDATION], [INITIAL], [1, 1, 2]])
    path = tmp_path / "snap.csv"
    s.write_snapshot(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "user_id,item_id,provenance"
    assert lines[1] == "0,0,selection"
    back = read_snapshot(path, n_items=6)
    assert back.equals(s)
