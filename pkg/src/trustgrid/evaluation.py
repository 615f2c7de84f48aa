"""Leave-one-out evaluation harness and metrics.

For each held-out rating the chosen method predicts it from the remaining
data; misses count against coverage. Reports bundle MAE, MAUE, coverages,
rating-recall, a per-attempt depth histogram, and the delta curve comparing
the method against the item average and correlation CF at increasing
disagreement thresholds.
"""

from __future__ import annotations

import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import baselines
from .model import Dataset, TrustgridError
from .propagation import NetworkState, PropagationConfig, propagate
from .recommender import recommend

METHODS = ("proposed", "tidal", "mole", "avg", "cf")
VIEW_NAMES = ("all", "cold_start", "heavy_raters", "opinionated",
              "niche_items", "controversial_items")
DEFAULT_DELTA_THRESHOLDS = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)


class UnknownMethodError(TrustgridError):
    pass


class EmptyInputError(TrustgridError):
    pass


@dataclass(slots=True)
class HeldOutResult:
    """Outcome of predicting one hidden rating."""

    user: int
    item: int
    actual: int
    predicted: float | None
    depth: int | None          # search/propagation depth, where the method has one
    rating_recall: float | None
    delta_a: float | None      # |actual - item average without this user|
    delta_cf: float | None     # |actual - correlation-CF prediction|


@dataclass(slots=True)
class DeltaCurvePoint:
    min_delta_a: float
    n: int
    mean_delta_r: float | None
    mean_delta_a: float | None
    mean_delta_cf: float | None


@dataclass(slots=True)
class EvalReport:
    method: str
    view: str
    n_attempted: int
    n_predicted: int
    mae: float | None
    maue: float | None
    ratings_coverage: float | None
    users_coverage: float | None
    mean_rating_recall: float | None
    depth_histogram: dict[int, int] = field(default_factory=dict)
    delta_curve: list[DeltaCurvePoint] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "method", "view", "n_attempted", "n_predicted", "mae", "maue",
            "ratings_coverage", "users_coverage", "mean_rating_recall")}
        d["depth_histogram"] = {str(k): v for k, v in sorted(self.depth_histogram.items())}
        d["delta_curve"] = [{
            "min_delta_a": p.min_delta_a, "n": p.n,
            "mean_delta_r": p.mean_delta_r, "mean_delta_a": p.mean_delta_a,
            "mean_delta_cf": p.mean_delta_cf} for p in self.delta_curve]
        return d


# -- views ----------------------------------------------------------------

def view_predicates(dataset: Dataset):
    """Per-view (user, item) predicates, computed from the full dataset."""
    user_stats = {}
    for u in dataset.users:
        values = list(dataset.user_ratings(u).values())
        user_stats[u] = (len(values),
                         statistics.pstdev(values) if len(values) > 1 else 0.0)
    item_stats = {}
    for i in dataset.items:
        values = list(dataset.item_raters(i).values())
        item_stats[i] = (len(values),
                         statistics.pstdev(values) if len(values) > 1 else 0.0)

    return {
        "all": lambda u, i: True,
        "cold_start": lambda u, i: 1 <= user_stats[u][0] <= 4,
        "heavy_raters": lambda u, i: user_stats[u][0] > 10,
        "opinionated": lambda u, i: user_stats[u][0] > 4 and user_stats[u][1] > 1.5,
        "niche_items": lambda u, i: item_stats[i][0] < 5,
        "controversial_items": lambda u, i: item_stats[i][1] > 1.5,
    }


# -- metric primitives ----------------------------------------------------

def mae(errors) -> float:
    errors = list(errors)
    if not errors:
        raise EmptyInputError("mae of empty input")
    return sum(errors) / len(errors)


def maue(per_user_errors) -> float:
    """Unweighted mean of per-user MAEs, so heavy raters do not dominate."""
    if not per_user_errors:
        raise EmptyInputError("maue of empty input")
    return sum(mae(errs) for errs in per_user_errors.values()) / len(per_user_errors)


def coverage_metrics(results):
    """(ratings_coverage, users_coverage); users with zero attempts are
    excluded from the users-coverage denominator. (None, None) if no attempts."""
    results = list(results)
    if not results:
        return None, None
    predicted = sum(1 for r in results if r.predicted is not None)
    users_attempted = {r.user for r in results}
    users_predicted = {r.user for r in results if r.predicted is not None}
    return predicted / len(results), len(users_predicted) / len(users_attempted)


def delta_curve(triples, thresholds=DEFAULT_DELTA_THRESHOLDS):
    """Mean deltas restricted to held-out ratings with delta_a >= threshold.

    `triples` holds (delta_a, delta_r, delta_cf) rows; delta_cf may be None
    and is then skipped in its own mean only.
    """
    triples = list(triples)
    points = []
    for tau in thresholds:
        bucket = [t for t in triples if t[0] >= tau]
        cf_values = [t[2] for t in bucket if t[2] is not None]
        points.append(DeltaCurvePoint(
            min_delta_a=tau,
            n=len(bucket),
            mean_delta_r=mae(t[1] for t in bucket) if bucket else None,
            mean_delta_a=mae(t[0] for t in bucket) if bucket else None,
            mean_delta_cf=mae(cf_values) if cf_values else None,
        ))
    return points


def max_depth_per_user(results) -> dict[int, int]:
    """Histogram over users of the maximum depth needed to find any rating;
    users with no found depth are excluded."""
    per_user: dict[int, int] = {}
    for r in results:
        if r.predicted is not None and r.depth is not None and r.depth >= 0:
            per_user[r.user] = max(per_user.get(r.user, -1), r.depth)
    histogram: dict[int, int] = {}
    for depth in per_user.values():
        histogram[depth] = histogram.get(depth, 0) + 1
    return histogram


# -- leave-one-out over ratings -------------------------------------------

def _predict_one(dataset, state, method, horizon, user, item):
    """(predicted, depth, rating_recall) for one held-out rating."""
    if method == "proposed":
        rec = recommend(state, user, item, dataset)
        if rec is None:
            return None, None, None
        depth = min(state.tables[user].entries[y].hops for y, _, _ in rec.contributors)
        return rec.predicted, depth, rec.rating_recall
    if method == "tidal":
        res = baselines.tidal_trust_recommend(user, item, dataset)
        if res.predicted is None:
            return None, None, None
        others = sum(1 for u in dataset.item_raters(item) if u != user)
        recall = len(res.raters_considered) / others if others else None
        return res.predicted, res.depth, recall
    if method == "mole":
        scores = baselines.mole_trust_scores(user, dataset, horizon)
        weights = {u: s for u, s in scores.scores.items() if s > 0.0}
        return baselines.mole_trust_predict(
            user, item, weights, dataset, exclude_item=item), None, None
    if method == "avg":
        return baselines.simple_average(item, dataset, exclude=user), None, None
    if method == "cf":
        return baselines.correlation_cf_predict(
            user, item, dataset, exclude_item=item), None, None
    raise UnknownMethodError(f"unknown method {method!r}")


def _evaluate_record(dataset, state, method, horizon, record):
    user, item, actual = record
    predicted, depth, recall = _predict_one(dataset, state, method, horizon,
                                            user, item)
    avg = baselines.simple_average(item, dataset, exclude=user)
    cf = baselines.correlation_cf_predict(user, item, dataset, exclude_item=item)
    return HeldOutResult(
        user=user, item=item, actual=actual, predicted=predicted,
        depth=depth, rating_recall=recall,
        delta_a=abs(actual - avg) if avg is not None else None,
        delta_cf=abs(actual - cf) if cf is not None else None,
    )


_worker_ctx = {}


def _init_worker(dataset, state, method, horizon):
    _worker_ctx["args"] = (dataset, state, method, horizon)


def _worker_task(record):
    dataset, state, method, horizon = _worker_ctx["args"]
    return _evaluate_record(dataset, state, method, horizon, record)


def sample_ratings(dataset: Dataset, fraction: float | None, seed: int):
    """Deterministic uniform sample of (user, item, value) records."""
    population = dataset.rating_list()
    if fraction is None or fraction >= 1.0:
        return population
    k = max(1, round(fraction * len(population)))
    rng = random.Random(seed)
    return sorted(rng.sample(population, k))


def evaluate_ratings(dataset: Dataset, method: str,
                     config: PropagationConfig | None = None,
                     sample: float | None = None, seed: int = 0,
                     horizon: int = 3, state: NetworkState | None = None,
                     jobs: int = 1) -> list[HeldOutResult]:
    """Run leave-one-out prediction over (sampled) ratings for one method.

    For `proposed`, propagation runs once on the full trust graph (hiding a
    rating leaves trust edges untouched); a precomputed `state` skips it.
    """
    if method not in METHODS:
        raise UnknownMethodError(f"unknown method {method!r}")
    if method == "proposed" and state is None:
        state = propagate(dataset, config or PropagationConfig())
    records = sample_ratings(dataset, sample, seed)
    if jobs > 1:
        import multiprocessing
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx,
                                 initializer=_init_worker,
                                 initargs=(dataset, state, method, horizon)) as pool:
            return list(pool.map(_worker_task, records, chunksize=64))
    return [_evaluate_record(dataset, state, method, horizon, r) for r in records]


def build_report(results, method: str, view: str, dataset: Dataset,
                 thresholds=DEFAULT_DELTA_THRESHOLDS) -> EvalReport:
    """Aggregate held-out results into the metric bundle for one view."""
    predicates = view_predicates(dataset)
    if view not in predicates:
        raise ValueError(f"unknown view {view!r}")
    keep = predicates[view]
    rows = [r for r in results if keep(r.user, r.item)]

    hits = [r for r in rows if r.predicted is not None]
    errors = [abs(r.actual - r.predicted) for r in hits]
    per_user: dict[int, list[float]] = {}
    for r in hits:
        per_user.setdefault(r.user, []).append(abs(r.actual - r.predicted))
    recalls = [r.rating_recall for r in hits if r.rating_recall is not None]

    histogram: dict[int, int] = {}
    for r in rows:
        if r.predicted is None:
            key = -1
        else:
            key = r.depth if r.depth is not None else 0
        histogram[key] = histogram.get(key, 0) + 1

    triples = [(r.delta_a, abs(r.actual - r.predicted), r.delta_cf)
               for r in hits if r.delta_a is not None]
    ratings_cov, users_cov = coverage_metrics(rows)

    return EvalReport(
        method=method,
        view=view,
        n_attempted=len(rows),
        n_predicted=len(hits),
        mae=mae(errors) if errors else None,
        maue=maue(per_user) if per_user else None,
        ratings_coverage=ratings_cov,
        users_coverage=users_cov,
        mean_rating_recall=mae(recalls) if recalls else None,
        depth_histogram=histogram,
        delta_curve=delta_curve(triples, thresholds),
    )


def leave_one_out_ratings(dataset: Dataset, method: str,
                          config: PropagationConfig | None = None,
                          sample: float | None = None, seed: int = 0,
                          view: str = "all", horizon: int = 3,
                          state: NetworkState | None = None,
                          jobs: int = 1) -> EvalReport:
    """Leave-one-out evaluation of one method, reported for one view."""
    results = evaluate_ratings(dataset, method, config, sample, seed,
                               horizon, state, jobs)
    return build_report(results, method, view, dataset)


# -- leave-one-out over trust edges ---------------------------------------

def leave_one_out_trust(dataset: Dataset,
                        config: PropagationConfig | None = None,
                        sample: float | None = None, seed: int = 0):
    """Hide each (sampled) trust edge, re-propagate, and try to re-infer it.

    Returns (coverage, mae): the fraction of hidden edges for which an
    inferred value exists, and the mean absolute error over those. Either is
    None when undefined.
    """
    config = config or PropagationConfig()
    edges = dataset.trust_edge_list()
    if sample is not None and sample < 1.0 and edges:
        k = max(1, round(sample * len(edges)))
        edges = sorted(random.Random(seed).sample(edges, k))
    if not edges:
        return None, None

    all_edges = dataset.trust_edge_list()
    errors = []
    for held_out in edges:
        remaining = [e for e in all_edges if e != held_out]
        state = propagate(Dataset((), remaining), config)
        source, target, value = held_out
        entry = state.tables.get(source)
        inferred = entry.entries.get(target) if entry else None
        if inferred is not None:
            errors.append(abs(inferred.trust - value))
    coverage = len(errors) / len(edges)
    return coverage, (mae(errors) if errors else None)
