import numpy as np
import pytest

from recloop import RecommenderConfig, WorldConfig


def brute_cooc(collections, n_items):
    """Pairwise count of users holding both items, by explicit loops."""
    c = np.zeros((n_items, n_items), dtype=np.int64)
    for coll in collections:
        for a in coll:
            for b in coll:
                if a != b:
                    c[a, b] += 1
    return c


def brute_degree(collections, n_items):
    d = np.zeros(n_items, dtype=np.int64)
    for coll in collections:
        for a in coll:
            d[a] += 1
    return d


def literal_score(state, user, item, similarity="cn", bias=1.0, everywhere=False):
    """sum over held items b of w_b * s(item, b), straight from the definitions.

    With ``everywhere`` the similarity counts are weighted too: each user
    holding both items adds ``w_a * w_b``, and degrees add ``w_a``.
    """
    from recloop.world import SELECTION

    edges = []
    for u in range(state.n_users):
        w = {a: (bias if p == SELECTION and everywhere else 1.0)
             for a, p in zip(state.collection(u), state.edge_provenance(u))}
        edges.append(w)
    total = 0.0
    for b, p in zip(state.collection(user), state.edge_provenance(user)):
        shared = sum(e[item] * e[b] for e in edges if item in e and b in e)
        if similarity == "cosine":
            ka = sum(e[item] for e in edges if item in e)
            kb = sum(e[b] for e in edges if b in e)
            s = shared / np.sqrt(ka * kb) if ka and kb else 0.0
        else:
            s = shared
        total += (bias if p == SELECTION else 1.0) * s
    return total


@pytest.fixture
def small_config():
    return WorldConfig(n_users=40, n_items=20, n_genres=4, k=3, phi=0.5, updates_per_user=100)


@pytest.fixture
def cn():
    return RecommenderConfig("cn")


@pytest.fixture
def cosine():
    return RecommenderConfig("cosine")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
