"""Reference recommenders: TidalTrust, MoleTrust, simple average, correlation CF.

TidalTrust searches breadth-first for the nearest raters and weights them by a
recursively averaged trust restricted to strongest shortest paths. MoleTrust
levels the graph from the source (dropping non-forward edges) and pushes trust
scores level by level. Both feed the usual mean-centered weighted prediction.
"""

from __future__ import annotations

import math
import weakref
from collections import deque
from dataclasses import dataclass, field

from .model import Dataset, NoRatingsError, RATING_MAX, RATING_MIN


@dataclass(slots=True)
class TidalResult:
    predicted: float | None
    depth: int  # -1 when no reachable rater
    raters_considered: set = field(default_factory=set)  # (user, trust, rating)
    queries_issued: int = 0


@dataclass(slots=True)
class MoleScores:
    source: int
    horizon: int
    scores: dict[int, float] = field(default_factory=dict)


_adjacency_cache = weakref.WeakKeyDictionary()


def _positive_adjacency(dataset: Dataset) -> dict[int, list[tuple[int, float]]]:
    # negative trust does not conduct a search path; cached per dataset since
    # every query rebuilds the same structure
    cached = _adjacency_cache.get(dataset)
    if cached is not None:
        return cached[0]
    adj: dict[int, list[tuple[int, float]]] = {}
    radj: dict[int, list[tuple[int, float]]] = {}
    for s, t, v in dataset.trust_edge_list():
        if v > 0.0:
            adj.setdefault(s, []).append((t, v))
            radj.setdefault(t, []).append((s, v))
    _adjacency_cache[dataset] = (adj, radj)
    return adj


def _positive_reverse_adjacency(dataset: Dataset) -> dict[int, list[tuple[int, float]]]:
    _positive_adjacency(dataset)
    return _adjacency_cache[dataset][1]


def _bfs_distances(adj, start):
    dist = {start: 0}
    queue = deque([start])
    expansions = 0
    while queue:
        u = queue.popleft()
        expansions += 1
        for v, _ in adj.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist, expansions


def tidal_trust_infer(source: int, sink: int, dataset: Dataset,
                      _counter: list | None = None) -> float | None:
    """Inferred trust from source to sink along minimum-depth paths.

    The threshold `max` is the strongest shortest path, where path strength is
    its minimum edge weight; each node then averages only over successors it
    trusts at or above that threshold. None when the sink is unreachable
    through positive edges.
    """
    if source == sink:
        raise ValueError("source and sink must differ")
    adj = _positive_adjacency(dataset)
    dist, expansions = _bfs_distances(adj, source)
    if _counter is not None:
        _counter[0] += expansions
    if sink not in dist:
        return None
    depth = dist[sink]

    rdist, expansions = _bfs_distances(_positive_reverse_adjacency(dataset), sink)
    if _counter is not None:
        _counter[0] += expansions

    # nodes lying on some minimum-depth path
    on_dag = {u for u in dist
              if u in rdist and dist[u] + rdist[u] == depth}

    # strongest-path strength via DP in level order
    strength = {source: math.inf}
    by_level: dict[int, list[int]] = {}
    for u in on_dag:
        by_level.setdefault(dist[u], []).append(u)
    for level in range(depth):
        for u in sorted(by_level.get(level, ())):
            if u not in strength:
                continue
            for v, w in adj.get(u, ()):
                if v in on_dag and dist[v] == level + 1:
                    s = min(strength[u], w)
                    if s > strength.get(v, -math.inf):
                        strength[v] = s
    max_threshold = strength[sink]

    # recursive weighted average, computed backwards level by level
    trust: dict[int, float] = {}
    for level in range(depth - 1, -1, -1):
        for u in sorted(by_level.get(level, ())):
            num = 0.0
            den = 0.0
            for v, w in adj.get(u, ()):
                if v == sink and level == depth - 1:
                    value = w
                    num += w * value
                    den += w
                    continue
                if (v in on_dag and dist[v] == level + 1
                        and v in trust and w >= max_threshold):
                    num += w * trust[v]
                    den += w
            if den > 0.0:
                trust[u] = num / den
    return trust.get(source)


def tidal_trust_recommend(source: int, item: int, dataset: Dataset) -> TidalResult:
    """Trust-weighted average over the max-trust raters at the minimum depth.

    The source's own rating is never used. queries_issued counts BFS node
    expansions, mirroring the per-recommendation query cost of the original
    algorithm.
    """
    counter = [0]
    raters = dataset.item_raters(item)
    adj = _positive_adjacency(dataset)

    # breadth-first search for the closest raters
    dist = {source: 0}
    queue = deque([source])
    found_depth = None
    at_depth = []
    while queue:
        u = queue.popleft()
        counter[0] += 1
        if found_depth is not None and dist[u] >= found_depth:
            break
        for v, _ in adj.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                if v != source and v in raters:
                    if found_depth is None:
                        found_depth = dist[v]
                    if dist[v] == found_depth:
                        at_depth.append(v)
                queue.append(v)

    if found_depth is None:
        return TidalResult(None, -1, set(), counter[0])

    trusts = {}
    for rater in sorted(at_depth):
        t = tidal_trust_infer(source, rater, dataset, _counter=counter)
        if t is not None:
            trusts[rater] = t
    if not trusts:
        return TidalResult(None, -1, set(), counter[0])

    best = max(trusts.values())
    selected = {(u, t, raters[u]) for u, t in trusts.items() if t == best}
    num = sum(t * r for _, t, r in selected)
    den = sum(t for _, t, _ in selected)
    if den > 0.0:
        predicted = num / den
    else:
        predicted = sum(r for _, _, r in selected) / len(selected)
    return TidalResult(predicted, found_depth, selected, counter[0])


def mole_trust_scores(source: int, dataset: Dataset, horizon: int = 3) -> MoleScores:
    """Per-node trust scores within `horizon` BFS levels of the source.

    Levels are first-visit BFS distances; only forward edges (level i to i+1)
    survive the cycle-removal step. A node's score is the weighted average of
    its positively-scored predecessors' edge statements.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    adj: dict[int, list[tuple[int, float]]] = {}
    for s, t, v in dataset.trust_edge_list():
        adj.setdefault(s, []).append((t, v))

    dist, _ = _bfs_distances(
        {u: [(v, w) for v, w in nbrs] for u, nbrs in adj.items()}, source)
    levels: dict[int, list[int]] = {}
    for u, d in dist.items():
        if 0 < d <= horizon:
            levels.setdefault(d, []).append(u)

    scores = {source: 1.0}
    for level in range(1, horizon + 1):
        incoming: dict[int, list[tuple[float, float]]] = {}
        for p in ([source] if level == 1 else levels.get(level - 1, [])):
            sp = scores.get(p)
            if sp is None or sp <= 0.0:
                continue
            for w_node, edge in adj.get(p, ()):
                if dist.get(w_node) == level:
                    incoming.setdefault(w_node, []).append((sp, edge))
        for w_node in sorted(levels.get(level, ())):
            preds = incoming.get(w_node)
            if not preds:
                continue
            num = sum(sp * edge for sp, edge in preds)
            den = sum(sp for sp, _ in preds)
            scores[w_node] = num / den

    del scores[source]
    return MoleScores(source, horizon, scores)


def mole_trust_predict(a: int, item: int, weights: dict[int, float],
                       dataset: Dataset, exclude_item: int | None = None) -> float | None:
    """Mean-centered weighted prediction of user a's rating on `item`.

    weights maps neighbor user -> positive weight (trust score or similarity).
    `exclude_item` is dropped from a's own profile before computing the mean
    (leave-one-out support). None when no weighted user rated the item or a's
    mean is undefined. Result clamped to the rating scale.
    """
    raters = dataset.item_raters(item)
    contributors = [(u, w) for u, w in sorted(weights.items())
                    if u != a and u in raters]
    if not contributors:
        return None
    try:
        a_mean = dataset.mean_rating(a, exclude_item=exclude_item)
    except NoRatingsError:
        return None
    num = sum(w * (raters[u] - dataset.mean_rating(u)) for u, w in contributors)
    den = sum(w for _, w in contributors)
    if den == 0.0:
        return None
    return min(RATING_MAX, max(RATING_MIN, a_mean + num / den))


def pearson_similarity(u: int, v: int, dataset: Dataset,
                       exclude_item: int | None = None) -> float | None:
    """Pearson correlation over co-rated items; None below 2 overlapping items
    or when either user's overlap ratings have zero variance."""
    pu = dataset.user_ratings(u)
    pv = dataset.user_ratings(v)
    common = [i for i in pu if i in pv and i != exclude_item]
    if len(common) < 2:
        return None
    mu = sum(pu[i] for i in common) / len(common)
    mv = sum(pv[i] for i in common) / len(common)
    cov = sum((pu[i] - mu) * (pv[i] - mv) for i in common)
    var_u = sum((pu[i] - mu) ** 2 for i in common)
    var_v = sum((pv[i] - mv) ** 2 for i in common)
    if var_u == 0.0 or var_v == 0.0:
        return None
    r = cov / math.sqrt(var_u * var_v)
    return min(1.0, max(-1.0, r))


def correlation_cf_predict(a: int, item: int, dataset: Dataset,
                           exclude_item: int | None = None) -> float | None:
    """Correlation-based CF: mean-centered prediction weighted by positive
    Pearson similarity between a and the item's raters."""
    weights = {}
    for u in dataset.item_raters(item):
        if u == a:
            continue
        sim = pearson_similarity(a, u, dataset, exclude_item=exclude_item)
        if sim is not None and sim > 0.0:
            weights[u] = sim
    if not weights:
        return None
    return mole_trust_predict(a, item, weights, dataset, exclude_item=exclude_item)


def simple_average(item: int, dataset: Dataset,
                   exclude: int | None = None) -> float | None:
    """Plain mean of the item's ratings, optionally excluding one rater."""
    raters = dataset.item_raters(item)
    values = [v for u, v in raters.items() if u != exclude]
    if not values:
        return None
    return sum(values) / len(values)
