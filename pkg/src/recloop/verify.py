"""Quick oracle checks behind ``recloop verify``."""

from __future__ import annotations

import time

import numpy as np

from .dynamics import Simulation, WorldConfig, make_rng
from .metrics import auc_est, auc_for_item
from .recommender import RecommenderConfig, recommend, score_vector
from .world import INITIAL, RECOMMENDATION, SELECTION, BipartiteState, verify_against_oracle


def random_churn(state: BipartiteState, rng: np.random.Generator, n_events: int):
    """Random add/remove events keeping every user between 0 and M-1 items."""
    for _ in range(n_events):
        u = int(rng.integers(state.n_users))
        coll = state.collection(u)
        if len(coll) and (rng.random() < 0.5 or len(coll) == state.n_items - 1):
            state.remove_item(u, int(coll[rng.integers(len(coll))]))
        else:
            free = np.flatnonzero(~state.held[u])
            prov = int(rng.choice([INITIAL, SELECTION, RECOMMENDATION]))
            state.add_item(u, int(free[rng.integers(len(free))]), prov)


def pairwise_auc(scores, correct, rng, samples):
    """Monte-Carlo: compare the correct score with random other candidates, ties half."""
    scores = np.asarray(scores, float)
    n = len(scores)
    others = rng.integers(n - 1, size=samples)
    others = others + (others >= correct)
    s = scores[correct]
    wins = (scores[others] < s) + 0.5 * (scores[others] == s)
    # the formula divides by n, not n - 1
    return wins.mean() * (n - 1) / n


def run_checks(seed: int = 0):
    rng = np.random.default_rng(seed)
    results = []

    state = BipartiteState(30, 12, selection_weight=2.0)
    t0 = time.perf_counter()
    random_churn(state, rng, 10_000)
    dt = time.perf_counter() - t0
    results.append(("incremental co-occurrence == brute force", verify_against_oracle(state),
                    f"10^4 events in {dt:.2f}s"))

    worst = 0.0
    for _ in range(20):
        scores = rng.integers(0, 6, size=rng.integers(5, 40)).astype(float)
        c = int(rng.integers(len(scores)))
        worst = max(worst, abs(auc_for_item(scores, c) - pairwise_auc(scores, c, rng, 100_000)))
    results.append(("AUC formula == pairwise Monte Carlo", worst < 0.01, f"max diff {worst:.4f}"))

    cfg = WorldConfig(n_users=6, n_items=9, n_genres=3, k=2, phi=0.3, updates_per_user=30)
    sim = Simulation(cfg)
    sim.advance()
    ok = True
    for sim_kind in ("cn", "cosine"):
        rc = RecommenderConfig(similarity=sim_kind)
        for u in range(cfg.n_users):
            scores = score_vector(sim.state, u, rc)
            r = recommend(sim.state, u, rc, rng)
            free = ~sim.state.held[u]
            ok &= bool(free[r]) and scores[r] >= scores[free].max() - 1e-12
    results.append(("recommend returns an argmax", ok, "exhaustive scan, N=6 M=9"))

    a = Simulation(cfg.replace(n_users=20, n_items=30, updates_per_user=200)).state
    b = a.copy()
    auc_est(a, RecommenderConfig(), make_rng(seed, 1), repetitions=3)
    results.append(("auc_est leaves the live state untouched", a.equals(b), ""))

    r1 = Simulation(cfg.replace(updates_per_user=100))
    r2 = Simulation(cfg.replace(updates_per_user=100))
    t1, t2 = r1.advance(trace=True), r2.advance(trace=True)
    same = all(np.array_equal(getattr(t1, f), getattr(t2, f)) for f in ("user", "channel", "item"))
    results.append(("seeded runs replay exactly", same and r1.state.equals(r2.state), ""))
    return results
