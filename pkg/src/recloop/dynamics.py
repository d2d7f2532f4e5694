"""Event loop: random user activation, deliberate selection or recommendation, turnover.

Random stream contract
----------------------
Each run owns one ``numpy.random.Generator`` (PCG64) seeded with
``SeedSequence(master_seed, spawn_key=(instance_index,))``.  All draws come
from it in this order:

1. initialization (:func:`recloop.world.new_synthetic` or
   :func:`recloop.movielens.init_replay`);
2. per event: active user; channel (``U < phi`` means selection); for a
   two-taste user on the selection channel, the taste (``U < f1`` means
   taste 1); the item (index into the un-collected members of the target
   set, or one tie-break uniform on the recommendation channel); the slot
   of the item to drop among the pre-acquisition collection;
3. the probe draws of the estimated AUC.

The acquired item takes the collection slot of the dropped one.

Uniform integers below ``n`` are ``min(floor(U * n), n - 1)`` with ``U``
from ``Generator.random``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numba
import numpy as np

from . import metrics
from .recommender import (
    COMMON_NEIGHBOR,
    COSINE,
    EVERYWHERE,
    SCORE_ONLY,
    RecommenderConfig,
    _argmax_random,
    _cn_into,
    _inv_sqrt,
    _profile_sum_into,
    similarity_rows,
)
from .world import RECOMMENDATION, SELECTION, new_synthetic

MODES = ("single_taste", "two_taste", "replay")

# selection fallback when the target set is exhausted
FALLBACK_ANY_ITEM = 0
FALLBACK_SKIP = 1

CHANNEL_SELECTION = 0
CHANNEL_RECOMMENDATION = 1

STATUS_OK = 0
STATUS_FALLBACK = 1
STATUS_SKIPPED = 2

# counter slots
C_SELECTION, C_FALLBACK, C_SKIPPED, C_REC, C_REC_WINDOW, C_MATCH_WINDOW, C_TASTE1_WINDOW = range(7)


@dataclass(frozen=True)
class WorldConfig:
    n_users: int = 500
    n_items: int = 100
    n_genres: int = 10
    k: int = 7
    phi: float = 0.5
    f1: float = 0.5
    updates_per_user: int = 20_000
    burn_in: float = 0.5
    mode: str = "single_taste"
    recommender: RecommenderConfig = field(default_factory=RecommenderConfig)
    master_seed: int = 0
    instance_index: int = 0
    init: str = "uniform"
    probe_repetitions: int = 10
    probe_reuse_similarity: bool = False
    ratings_path: str | None = None
    exclude_ineligible_edges: bool = False

    def __post_init__(self):
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError(f"phi must lie in [0, 1], got {self.phi}")
        if not 0.0 <= self.f1 <= 1.0:
            raise ValueError(f"f1 must lie in [0, 1], got {self.f1}")
        if not 0.0 <= self.burn_in < 1.0:
            raise ValueError(f"burn_in must lie in [0, 1), got {self.burn_in}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.updates_per_user < 0 or self.probe_repetitions < 0:
            raise ValueError("counts must be non-negative")
        if self.mode == "replay":
            if self.ratings_path is None:
                raise ValueError("replay mode needs ratings_path")
        elif self.k >= self.n_items:
            raise ValueError(f"need k < M, got k={self.k}, M={self.n_items}")

    def replace(self, **changes) -> WorldConfig:
        rec = {k: changes.pop(k) for k in ("similarity", "bias", "bias_scope") if k in changes}
        if rec:
            changes["recommender"] = dataclasses.replace(self.recommender, **rec)
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> WorldConfig:
        d = dict(d)
        rec = d.pop("recommender", None) or {}
        for key in ("similarity", "bias", "bias_scope"):
            if key in d:
                rec[key] = d.pop(key)
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(recommender=RecommenderConfig(**rec), **d)


def make_rng(master_seed: int, instance_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(master_seed, spawn_key=(instance_index,))))


@dataclass
class Targets:
    """Item sets a user can deliberately select from, in CSR form.

    Synthetic worlds have one set per genre; replay has one set per user
    (the movies the user rated 3 or more).  ``user_set2`` is -1 unless the
    user has a second taste.
    """

    set_ptr: np.ndarray
    set_items: np.ndarray
    set_member: np.ndarray
    user_set1: np.ndarray
    user_set2: np.ndarray
    active_users: np.ndarray
    fallback: int

    @classmethod
    def from_sets(cls, sets, n_items, user_set1, user_set2, active_users, fallback):
        sizes = [len(s) for s in sets]
        ptr = np.zeros(len(sets) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum(sizes)
        flat = np.concatenate([np.asarray(s, dtype=np.int32) for s in sets]) if sets else \
            np.zeros(0, np.int32)
        member = np.zeros((len(sets), n_items), dtype=np.bool_)
        for i, s in enumerate(sets):
            member[i, np.asarray(s, dtype=np.int64)] = True
        return cls(ptr, flat, member, np.asarray(user_set1, np.int64),
                   np.asarray(user_set2, np.int64), np.asarray(active_users, np.int64), fallback)

    @classmethod
    def from_taste_map(cls, taste_map):
        sets = [taste_map.genre_items(g) for g in range(taste_map.n_genres)]
        n = len(taste_map.user_tastes)
        return cls.from_sets(sets, len(taste_map.item_genre), taste_map.user_tastes[:, 0],
                             taste_map.user_tastes[:, 1], np.arange(n), FALLBACK_ANY_ITEM)

    def correct_mask(self, user: int) -> np.ndarray:
        mask = self.set_member[self.user_set1[user]].copy()
        if self.user_set2[user] >= 0:
            mask |= self.set_member[self.user_set2[user]]
        return mask


@numba.njit(cache=True)
def _randbelow(rng, n):
    return min(int(rng.random() * n), n - 1)


@numba.njit(cache=True)
def _turnover(items, prov, held, item_degree, cooc, wcooc, wdeg, bias, u, d, slot, item, p):
    # the new item takes the slot of the dropped one
    old = items[u, slot]
    if wcooc.shape[0] > 0:
        wo = bias if prov[u, slot] == SELECTION else 1.0
        wa = bias if p == SELECTION else 1.0
        for j in range(d):
            if j != slot:
                b = items[u, j]
                wb = bias if prov[u, j] == SELECTION else 1.0
                wcooc[old, b] -= wo * wb
                wcooc[b, old] -= wo * wb
                wcooc[item, b] += wa * wb
                wcooc[b, item] += wa * wb
        wdeg[old] -= wo
        wdeg[item] += wa
    for j in range(d):
        if j != slot:
            b = items[u, j]
            cooc[old, b] -= 1
            cooc[b, old] -= 1
            cooc[item, b] += 1
            cooc[b, item] += 1
    items[u, slot] = item
    prov[u, slot] = p
    held[u, old] = False
    held[u, item] = True
    item_degree[old] -= 1
    item_degree[item] += 1


@numba.njit(cache=True)
def _advance(rng, start, stop, window_start, forced_user, phi, f1, fallback, sim, bias, scope,
             items, degree, prov, held, item_degree, cooc, wcooc, wdeg, isd,
             set_ptr, set_items, set_member, user_set1, user_set2, active,
             counters, trace_user, trace_channel, trace_item, trace_status):
    """Run events ``start..stop-1``; the whole step lives here to keep the loop tight."""
    m = held.shape[1]
    iscores = np.zeros(m, np.int32)
    fscores = np.zeros(m)
    ties = np.zeros(m, np.int64)
    fast_cn = sim == COMMON_NEIGHBOR and scope == SCORE_ONLY and bias == 1.0
    cosine = sim == COSINE
    tracing = trace_user.shape[0] > 0
    n_active = active.shape[0]
    for s in range(start, stop):
        u = forced_user if forced_user >= 0 else active[_randbelow(rng, n_active)]
        d = degree[u]
        status = STATUS_OK
        item = -1
        if rng.random() < phi:
            channel = CHANNEL_SELECTION
            g = user_set1[u]
            if user_set2[u] >= 0 and not rng.random() < f1:
                g = user_set2[u]
            lo = set_ptr[g]
            hi = set_ptr[g + 1]
            free = 0
            for j in range(lo, hi):
                free += not held[u, set_items[j]]
            if free > 0:
                pick = _randbelow(rng, free)
                for j in range(lo, hi):
                    a = set_items[j]
                    if not held[u, a]:
                        if pick == 0:
                            item = a
                            break
                        pick -= 1
            elif fallback == FALLBACK_ANY_ITEM:
                status = STATUS_FALLBACK
                pick = _randbelow(rng, m - d)
                for a in range(m):
                    if not held[u, a]:
                        if pick == 0:
                            item = a
                            break
                        pick -= 1
            else:
                status = STATUS_SKIPPED
            p = SELECTION
        else:
            channel = CHANNEL_RECOMMENDATION
            if fast_cn and d > 0:
                _cn_into(iscores, u, items, degree, cooc)
                item = _argmax_random(iscores, u, items, degree, ties, rng)
            else:
                if scope == EVERYWHERE:
                    _profile_sum_into(fscores, u, items, degree, prov, wcooc, isd, bias, cosine)
                else:
                    _profile_sum_into(fscores, u, items, degree, prov, cooc, isd, bias, cosine)
                item = _argmax_random(fscores, u, items, degree, ties, rng)
            p = RECOMMENDATION

        if status == STATUS_SKIPPED:
            counters[C_SKIPPED] += 1
        else:
            slot = _randbelow(rng, d)
            old = items[u, slot]
            _turnover(items, prov, held, item_degree, cooc, wcooc, wdeg, bias, u, d, slot, item, p)
            if scope == EVERYWHERE:
                isd[old] = _inv_sqrt(wdeg[old])
                isd[item] = _inv_sqrt(wdeg[item])
            else:
                isd[old] = _inv_sqrt(item_degree[old])
                isd[item] = _inv_sqrt(item_degree[item])
            if channel == CHANNEL_SELECTION:
                counters[C_SELECTION] += 1
                counters[C_FALLBACK] += status == STATUS_FALLBACK
            else:
                counters[C_REC] += 1
                if s >= window_start:
                    counters[C_REC_WINDOW] += 1
                    in1 = set_member[user_set1[u], item]
                    in2 = user_set2[u] >= 0 and set_member[user_set2[u], item]
                    counters[C_MATCH_WINDOW] += in1 or in2
                    counters[C_TASTE1_WINDOW] += in1
        if tracing:
            i = s - start
            trace_user[i] = u
            trace_channel[i] = channel
            trace_item[i] = item
            trace_status[i] = status


@dataclass
class StepOutcome:
    channel: str
    item: int
    genre: int
    match: bool
    taste1: bool
    status: str


_STATUS_NAMES = {STATUS_OK: "ok", STATUS_FALLBACK: "fallback", STATUS_SKIPPED: "skipped"}
_CHANNEL_NAMES = {CHANNEL_SELECTION: "selection", CHANNEL_RECOMMENDATION: "recommendation"}


def _kernel_args(config: WorldConfig):
    rc = config.recommender
    return float(config.phi), float(config.f1), rc.similarity_code, float(rc.bias), rc.scope_code


def _state_args(state):
    return (state.items, state.degree, state.provenance, state.held, state.item_degree,
            state.cooccurrence, state.weighted_cooccurrence, state.weighted_degree)


def step(state, targets: Targets, user: int, config: WorldConfig, rng: np.random.Generator,
         item_genre: np.ndarray | None = None) -> StepOutcome:
    """Run one event for ``user`` and report what happened."""
    if state.degree[user] >= state.n_items or state.degree[user] < 1:
        raise ValueError(f"user {user} must hold between 1 and M-1 items")
    phi, f1, sim, bias, scope = _kernel_args(config)
    counters = np.zeros(7, np.int64)
    t_user, t_channel = np.zeros(1, np.int64), np.zeros(1, np.int8)
    t_item, t_status = np.zeros(1, np.int64), np.zeros(1, np.int8)
    _advance(rng, 0, 1, 0, user, phi, f1, targets.fallback, sim, bias, scope, *_state_args(state),
             similarity_rows(state, scope)[1], targets.set_ptr, targets.set_items, targets.set_member, targets.user_set1,
             targets.user_set2, targets.active_users, counters, t_user, t_channel, t_item, t_status)
    channel, item, status = int(t_channel[0]), int(t_item[0]), int(t_status[0])
    if status == STATUS_SKIPPED:
        return StepOutcome(_CHANNEL_NAMES[channel], -1, -1, False, False, "skipped")
    mask = targets.correct_mask(user)
    genre = int(item_genre[item]) if item_genre is not None else -1
    return StepOutcome(_CHANNEL_NAMES[channel], item, genre, bool(mask[item]),
                       bool(targets.set_member[targets.user_set1[user], item]),
                       _STATUS_NAMES[status])


@dataclass
class Trace:
    step: np.ndarray
    user: np.ndarray
    channel: np.ndarray
    item: np.ndarray
    status: np.ndarray


class Simulation:
    """One seeded instance: state, targets, RNG and running counters.

    ``advance`` may be called repeatedly; the run is identical to a single
    call covering the same steps.
    """

    def __init__(self, config: WorldConfig, table=None):
        self.config = config
        self.rng = make_rng(config.master_seed, config.instance_index)
        if config.mode == "replay":
            from .movielens import init_replay, load_ratings
            if table is None:
                table = load_ratings(config.ratings_path)
            self.table = table
            self.state, self.targets = init_replay(
                table, self.rng, recommender=config.recommender,
                exclude_ineligible_edges=config.exclude_ineligible_edges)
            self.taste_map = None
            self.item_genre = None
        else:
            self.table = None
            self.state, self.taste_map = new_synthetic(config, self.rng)
            self.targets = Targets.from_taste_map(self.taste_map)
            self.item_genre = self.taste_map.item_genre
        self.n_steps = len(self.targets.active_users) * config.updates_per_user
        self.window_start = int(np.floor(config.burn_in * self.n_steps))
        self.steps_done = 0
        self.counters = np.zeros(7, dtype=np.int64)

    def advance(self, n: int | None = None, trace: bool = False) -> Trace | None:
        """Run ``n`` more events (default: to the end of the schedule)."""
        stop = self.n_steps if n is None else min(self.n_steps, self.steps_done + n)
        start = self.steps_done
        size = stop - start if trace else 0
        t_user = np.zeros(size, np.int64)
        t_channel = np.zeros(size, np.int8)
        t_item = np.zeros(size, np.int64)
        t_status = np.zeros(size, np.int8)
        tg = self.targets
        phi, f1, sim, bias, scope = _kernel_args(self.config)
        if stop > start and len(tg.active_users) > 0:
            _advance(self.rng, start, stop, self.window_start, -1, phi, f1, tg.fallback, sim, bias,
                     scope, *_state_args(self.state), similarity_rows(self.state, scope)[1],
                     tg.set_ptr, tg.set_items, tg.set_member, tg.user_set1, tg.user_set2,
                     tg.active_users, self.counters, t_user, t_channel, t_item, t_status)
        self.steps_done = stop
        if trace:
            return Trace(np.arange(start, stop), t_user, t_channel, t_item, t_status)
        return None

    @property
    def finished(self) -> bool:
        return self.steps_done >= self.n_steps

    def report(self, with_auc: bool = True) -> metrics.MetricsReport:
        c = self.counters
        omega = c[C_MATCH_WINDOW] / c[C_REC_WINDOW] if c[C_REC_WINDOW] else float("nan")
        two = self.config.mode == "two_taste"
        omega1 = c[C_TASTE1_WINDOW] / c[C_REC_WINDOW] if two and c[C_REC_WINDOW] else float("nan")
        auc_real = auc_est = float("nan")
        real_skipped = est_skipped = 0
        if with_auc:
            auc_real, real_skipped = metrics.auc_real(self.state, self.targets, self.config.recommender)
            auc_est, est_skipped = metrics.auc_est(
                self.state, self.config.recommender, self.rng, self.config.probe_repetitions,
                users=self.targets.active_users,
                reuse_similarity=self.config.probe_reuse_similarity)
        return metrics.MetricsReport(
            omega=float(omega), omega1=float(omega1), auc_real=float(auc_real),
            auc_est=float(auc_est), rec_events=int(c[C_REC_WINDOW]),
            selection_events=int(c[C_SELECTION]), fallback_events=int(c[C_FALLBACK]),
            skipped_events=int(c[C_SKIPPED]), auc_real_skipped=int(real_skipped),
            auc_est_skipped=int(est_skipped), config=self.config,
            instance_index=self.config.instance_index)


def run(config: WorldConfig, table=None, with_auc: bool = True) -> metrics.MetricsReport:
    """Execute a full run and return its metrics; deterministic in (config, seed, instance)."""
    sim = Simulation(config, table)
    sim.advance()
    return sim.report(with_auc=with_auc)
