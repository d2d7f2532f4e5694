"""Item-based collaborative filtering: similarities, scores, top-1 recommendation."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .world import SELECTION, BipartiteState

COMMON_NEIGHBOR = 0
COSINE = 1

SCORE_ONLY = 0
EVERYWHERE = 1

SIMILARITY_CODES = {"cn": COMMON_NEIGHBOR, "cosine": COSINE}
SCOPE_CODES = {"score": SCORE_ONLY, "everywhere": EVERYWHERE}


@dataclass(frozen=True)
class RecommenderConfig:
    """ICF settings.

    ``bias`` weights items the user picked by deliberate selection; 1 turns
    the weighting off.  ``bias_scope="score"`` applies the weight to the
    user's profile only, ``"everywhere"`` also to the adjacency the
    similarities are built from.
    """

    similarity: str = "cn"
    bias: float = 1.0
    bias_scope: str = "score"

    def __post_init__(self):
        if self.similarity not in SIMILARITY_CODES:
            raise ValueError(f"unknown similarity {self.similarity!r}")
        if self.bias_scope not in SCOPE_CODES:
            raise ValueError(f"unknown bias_scope {self.bias_scope!r}")
        if not self.bias >= 1.0:
            raise ValueError(f"bias must be >= 1, got {self.bias}")

    @property
    def similarity_code(self) -> int:
        return SIMILARITY_CODES[self.similarity]

    @property
    def scope_code(self) -> int:
        return SCOPE_CODES[self.bias_scope]


@numba.njit(cache=True)
def _inv_sqrt(d):
    return 1.0 / np.sqrt(d) if d > 0 else 0.0


def inverse_sqrt_degrees(deg) -> np.ndarray:
    """``1/sqrt(d)`` per item, 0 for degree 0 (same rounding as the kernels)."""
    deg = np.asarray(deg, dtype=float)
    out = np.zeros(len(deg))
    pos = deg > 0
    out[pos] = 1.0 / np.sqrt(deg[pos])
    return out


@numba.njit(cache=True)
def _profile_sum_into(out, u, items, degree, prov, rows, row_scale, bias, cosine):
    """``out[a] = sum_j w_j s(a, b_j)`` over the user's items ``b_j``.

    Similarities are ``rows[b, a]`` for common neighbours and
    ``rows[b, a] * row_scale[b] * row_scale[a]`` for cosine, where
    ``row_scale`` holds inverse square-root degrees.  ``w_j`` is ``bias``
    for items acquired by selection and 1 otherwise.  Entries of items the
    user holds are meaningless.
    """
    m = out.shape[0]
    out[:] = 0.0
    for j in range(degree[u]):
        b = items[u, j]
        coef = bias if prov[u, j] == SELECTION else 1.0
        if cosine:
            coef = coef * row_scale[b]
        for a in range(m):
            out[a] += coef * rows[b, a]
    if cosine:
        for a in range(m):
            out[a] = out[a] * row_scale[a]


def similarity_rows(state, scope):
    """Co-occurrence matrix and its inverse square-root degrees for the given bias scope."""
    if scope == EVERYWHERE:
        return state.weighted_cooccurrence, inverse_sqrt_degrees(state.weighted_degree)
    return state.cooccurrence, inverse_sqrt_degrees(state.item_degree)


def _score_into(out, state, u, sim, bias, scope):
    rows, isd = similarity_rows(state, scope)
    _profile_sum_into(out, u, state.items, state.degree, state.provenance, rows, isd,
                      float(bias), sim == COSINE)


@numba.njit(cache=True)
def _cn_into(out, u, items, degree, cooc):
    m = out.shape[0]
    c0 = items[u, 0]
    for a in range(m):
        out[a] = cooc[c0, a]
    for j in range(1, degree[u]):
        b = items[u, j]
        for a in range(m):
            out[a] += cooc[b, a]


@numba.njit(cache=True)
def _argmax_random(scores, u, items, degree, ties, rng):
    # scores are >= 0, so held items are masked with -1; one uniform is always drawn
    for j in range(degree[u]):
        scores[items[u, j]] = -1
    best = scores[0]
    for a in range(scores.shape[0]):
        best = max(best, scores[a])
    nt = 0
    for a in range(scores.shape[0]):
        ties[nt] = a
        nt += scores[a] == best
    pick = min(int(rng.random() * nt), nt - 1)
    return ties[pick]


def _check_scope(state: BipartiteState, config: RecommenderConfig):
    if config.bias_scope == "everywhere" and state.selection_weight != config.bias:
        raise ValueError("bias_scope='everywhere' needs a state tracking weights with the same bias")


def score_vector(state: BipartiteState, user: int, config: RecommenderConfig) -> np.ndarray:
    """Scores of all items for ``user`` (entries for held items are not meaningful)."""
    _check_scope(state, config)
    out = np.zeros(state.n_items)
    _score_into(out, state, user, config.similarity_code, config.bias, config.scope_code)
    return out


def similarity(state: BipartiteState, a: int, b: int, config: RecommenderConfig) -> float:
    if a == b:
        raise ValueError("self-similarity is not defined")
    _check_scope(state, config)
    if config.bias_scope == "everywhere":
        c, da, db = (state.weighted_cooccurrence[a, b], state.weighted_degree[a],
                     state.weighted_degree[b])
    else:
        c, da, db = state.cooccurrence[a, b], state.item_degree[a], state.item_degree[b]
    if config.similarity == "cn":
        return float(c)
    if da == 0 or db == 0:
        return 0.0
    return float(c / np.sqrt(da * db))


def score(state: BipartiteState, user: int, item: int, config: RecommenderConfig) -> float:
    """Recommendation score of an item the user does not hold."""
    if state.held[user, item]:
        raise ValueError(f"user {user} already holds item {item}")
    return float(score_vector(state, user, config)[item])


def recommend(state: BipartiteState, user: int, config: RecommenderConfig,
              rng: np.random.Generator) -> int:
    """Highest-scoring item the user does not hold; ties broken uniformly with ``rng``."""
    _check_scope(state, config)
    if state.degree[user] >= state.n_items:
        raise ValueError(f"user {user} holds every item; nothing to recommend")
    scores = score_vector(state, user, config)
    return int(_argmax_random(scores, user, state.items, state.degree,
                              np.zeros(state.n_items, np.int64), rng))
