"""Accuracy measures: real accuracy, taste-1 fraction, real and probe-estimated AUC."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numba
import numpy as np

from .recommender import COSINE, RecommenderConfig, _check_scope, _profile_sum_into, similarity_rows
from .world import SELECTION

CSV_COLUMNS = ["phi", "G", "k", "f1", "b", "similarity", "instance", "omega", "omega1",
               "auc_real", "auc_est", "fallbacks"]


@dataclass
class MetricsReport:
    """Outcome of one run.

    ``omega`` is NaN when no recommendation fell inside the measurement
    window (see :attr:`omega_defined`); ``omega1`` is NaN outside two-taste
    mode.
    """

    omega: float
    omega1: float
    auc_real: float
    auc_est: float
    rec_events: int
    selection_events: int
    fallback_events: int
    skipped_events: int
    auc_real_skipped: int
    auc_est_skipped: int
    config: Any
    instance_index: int

    @property
    def omega_defined(self) -> bool:
        return self.rec_events > 0

    @property
    def off_taste(self) -> float:
        return 1.0 - self.omega

    def row(self) -> dict:
        c = self.config
        return {
            "phi": c.phi, "G": c.n_genres, "k": c.k, "f1": c.f1, "b": c.recommender.bias,
            "similarity": c.recommender.similarity, "instance": self.instance_index,
            "omega": self.omega, "omega1": self.omega1, "auc_real": self.auc_real,
            "auc_est": self.auc_est, "fallbacks": self.fallback_events,
        }


def auc_for_item(scores, correct: int) -> float:
    """Probability that the correct candidate outranks another one, ties counting half.

    ``scores`` holds one score per candidate (every item the user does not
    hold, the correct one included).  The correct item is left out of both
    counts, and the denominator is the number of candidates.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise ValueError("empty candidate set")
    s = scores[correct]
    lower = np.count_nonzero(scores < s)
    ties = np.count_nonzero(scores == s) - 1
    return (lower + 0.5 * ties) / scores.size


@numba.njit(cache=True)
def _auc_sum(cand_sorted, target_scores):
    # sum of per-target AUCs; every target is itself among the candidates
    n_cand = cand_sorted.shape[0]
    total = 0.0
    for s in target_scores:
        lo = np.searchsorted(cand_sorted, s, side="left")
        hi = np.searchsorted(cand_sorted, s, side="right")
        total += (lo + 0.5 * (hi - lo - 1)) / n_cand
    return total


@numba.njit(cache=True)
def _auc_real_kernel(users, items, degree, prov, held, rows, isd, bias, cosine,
                     set_member, user_set1, user_set2):
    m = held.shape[1]
    scores = np.zeros(m)
    total = 0.0
    count = 0
    skipped = 0
    for u in users:
        _profile_sum_into(scores, u, items, degree, prov, rows, isd, bias, cosine)
        cand = ~held[u]
        correct = cand & set_member[user_set1[u]]
        if user_set2[u] >= 0:
            correct = correct | (cand & set_member[user_set2[u]])
        if not correct.any():
            skipped += 1
            continue
        cand_sorted = np.sort(scores[cand])
        total += _auc_sum(cand_sorted, scores[correct])
        count += correct.sum()
    return total, count, skipped


def auc_real(state, targets, config: RecommenderConfig, users=None):
    """Mean AUC over all (user, un-collected matching item) pairs.

    Returns ``(auc, skipped_users)``; users with no un-collected matching
    item are skipped.
    """
    _check_scope(state, config)
    users = targets.active_users if users is None else np.asarray(users, np.int64)
    rows, isd = similarity_rows(state, config.scope_code)
    total, count, skipped = _auc_real_kernel(
        users, state.items, state.degree, state.provenance, state.held, rows, isd,
        float(config.bias), config.similarity_code == COSINE,
        targets.set_member, targets.user_set1, targets.user_set2)
    return (total / count if count else float("nan")), int(skipped)


@numba.njit(cache=True)
def _auc_probe_kernel(users, slots, items, degree, prov, held, rows, counts, isd, bias, cosine,
                      weighted_rows, rebuild):
    """Sum of leave-one-out AUCs, one probe edge per user.

    For user ``u`` with probe ``a = items[u, slot]`` the profile is the
    rest of the collection.  With ``rebuild`` the counts are corrected for
    the missing edge, which gives the same scores as recounting from an
    adjacency without ``(u, a)``: only ``rows[b, a]`` for the user's other
    items ``b`` and the degree of ``a`` change.
    """
    m = held.shape[1]
    scores = np.zeros(m)
    total = 0.0
    for i in range(users.shape[0]):
        u = users[i]
        j = slots[i]
        a = items[u, j]
        wa = bias if (weighted_rows and prov[u, j] == SELECTION) else 1.0
        scores[:] = 0.0
        sa = 0.0
        for t in range(degree[u]):
            if t == j:
                continue
            b = items[u, t]
            coef = bias if prov[u, t] == SELECTION else 1.0
            if cosine:
                coef = coef * isd[b]
            for x in range(m):
                scores[x] += coef * rows[b, x]
            # term by term so that a count dropping to zero gives an exact zero
            wb = bias if (weighted_rows and prov[u, t] == SELECTION) else 1.0
            sa += coef * (rows[b, a] - wa * wb) if rebuild else coef * rows[b, a]
        isd_a = isd[a]
        if rebuild:
            rest = counts[a] - wa
            isd_a = 1.0 / np.sqrt(rest) if rest > 1e-9 else 0.0
        if cosine:
            for x in range(m):
                scores[x] = scores[x] * isd[x]
            sa = sa * isd_a
        scores[a] = sa
        s = scores[a]
        lower = 0
        ties = 0
        for x in range(m):
            if held[u, x] or x == a:
                continue
            lower += scores[x] < s
            ties += scores[x] == s
        total += (lower + 0.5 * ties) / (m - degree[u] + 1)
    return total


def auc_est(state, config: RecommenderConfig, rng: np.random.Generator, repetitions: int = 10,
            users=None, reuse_similarity: bool = False):
    """Leave-one-out AUC: hide one random edge of a user and rank it under that user's training scores.

    Each repetition draws one uniform per evaluated user (in user order) to
    pick the probe slot.  Only the probe edge of the user being scored is
    withheld; the counts match a recount without that edge, or stay live
    with ``reuse_similarity``.  The state is not modified.  Returns
    ``(auc, skipped_users)``; users holding fewer than two items are skipped.
    """
    _check_scope(state, config)
    users = np.arange(state.n_users) if users is None else np.asarray(users, np.int64)
    ok = state.degree[users] >= 2
    skipped = int((~ok).sum())
    users = users[ok]
    if len(users) == 0 or repetitions == 0:
        return float("nan"), skipped
    everywhere = config.bias_scope == "everywhere"
    rows, isd = similarity_rows(state, config.scope_code)
    counts = np.asarray(state.weighted_degree if everywhere else state.item_degree, dtype=float)
    deg = state.degree[users]
    total = 0.0
    for _ in range(repetitions):
        slots = np.minimum((rng.random(len(users)) * deg).astype(np.int64), deg - 1)
        total += _auc_probe_kernel(users, slots, state.items, state.degree, state.provenance,
                                   state.held, rows, counts, isd, float(config.bias),
                                   config.similarity_code == COSINE, everywhere,
                                   not reuse_similarity)
    return total / (repetitions * len(users)), skipped


def accumulate_omega(users, channels, items, targets, steps=None, window_start: int = 0):
    """Recount omega and omega1 from an event record.

    ``channels`` uses 1 for recommendation events.  Returns
    ``(omega, omega1, n_events)`` with NaNs when the window holds no
    recommendation.
    """
    users = np.asarray(users)
    channels = np.asarray(channels)
    items = np.asarray(items)
    sel = channels == 1
    if steps is not None:
        sel &= np.asarray(steps) >= window_start
    u, a = users[sel], items[sel]
    n = int(sel.sum())
    if n == 0:
        return math.nan, math.nan, 0
    in1 = targets.set_member[targets.user_set1[u], a]
    s2 = targets.user_set2[u]
    in2 = (s2 >= 0) & targets.set_member[np.maximum(s2, 0), a]
    return float((in1 | in2).mean()), float(in1.mean()), n
