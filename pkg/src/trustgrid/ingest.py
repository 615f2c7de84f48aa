"""File ingestion, synthetic dataset generation, and trust-table snapshots.

Rating and trust files are whitespace-delimited text, one record per line,
with `#` comment lines allowed (the layout of the public Epinions dumps).
Snapshots persist a propagated network state as versioned text so expensive
propagation runs can be cached and reloaded bit-exactly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import Dataset, RATING_MAX, RATING_MIN, TrustgridError
from .propagation import DIRECT, INFERRED, NetworkState, TrustEntry, TrustTable

SNAPSHOT_MAGIC = "trustgrid-snapshot"
SNAPSHOT_VERSION = "v1"


class ParseError(TrustgridError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class VersionError(TrustgridError):
    pass


def _data_lines(stream):
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield line_no, line


def parse_ratings(stream) -> list[tuple[int, int, int]]:
    """Parse `user item rating` lines into (user, item, value) tuples."""
    records = []
    for line_no, line in _data_lines(stream):
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(line_no, f"expected 3 fields, got {len(fields)}")
        try:
            user, item, value = int(fields[0]), int(fields[1]), int(fields[2])
        except ValueError:
            raise ParseError(line_no, f"non-integer field in {line!r}") from None
        if user < 0 or item < 0:
            raise ParseError(line_no, "negative user or item id")
        if not RATING_MIN <= value <= RATING_MAX:
            raise ParseError(
                line_no, f"rating {value} outside [{RATING_MIN},{RATING_MAX}]")
        records.append((user, item, value))
    return records


def parse_trust(stream) -> list[tuple[int, int, float]]:
    """Parse `source target trust` lines into (source, target, value) tuples."""
    records = []
    for line_no, line in _data_lines(stream):
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(line_no, f"expected 3 fields, got {len(fields)}")
        try:
            source, target, value = int(fields[0]), int(fields[1]), float(fields[2])
        except ValueError:
            raise ParseError(line_no, f"malformed field in {line!r}") from None
        if source < 0 or target < 0:
            raise ParseError(line_no, "negative user id")
        if not -1.0 <= value <= 1.0:
            raise ParseError(line_no, f"trust value {value} outside [-1,1]")
        records.append((source, target, value))
    return records


def load_dataset(ratings_path=None, trust_path=None) -> Dataset:
    """Build a Dataset from rating and/or trust files."""
    ratings = []
    trust = []
    if ratings_path is not None:
        with open(ratings_path, encoding="utf-8") as fh:
            ratings = parse_ratings(fh)
    if trust_path is not None:
        with open(trust_path, encoding="utf-8") as fh:
            trust = parse_trust(fh)
    return Dataset(ratings, trust)


# -- synthetic data -------------------------------------------------------

@dataclass(slots=True)
class SyntheticSpec:
    """Parameters for a seeded synthetic dataset.

    Defaults mirror the large Epinions crawl's shape: ~10 trust neighbors and
    ~15 ratings per user, items outnumbering users roughly 3:1. Users are
    grouped into small taste communities; trust edges stay mostly inside a
    community and ratings are drawn around a per-(community, item) mean, so
    trust links correlate with rating agreement.
    """

    n_users: int = 1000
    n_items: int = 3000
    avg_out_degree: float = 10.0
    avg_ratings_per_user: float = 15.0
    trust_value_mode: str = "binary"  # or "uniform_signed"
    rng_seed: int = 0
    community_size: int = 50
    in_community_bias: float = 0.9
    rating_noise: float = 0.8

    def __post_init__(self):
        if self.n_users <= 0 or self.n_items <= 0:
            raise ValueError("user and item counts must be positive")
        if self.avg_out_degree <= 0 or self.avg_ratings_per_user <= 0:
            raise ValueError("averages must be positive")
        if self.trust_value_mode not in ("binary", "uniform_signed"):
            raise ValueError(f"unknown trust_value_mode {self.trust_value_mode!r}")
        if self.community_size <= 0:
            raise ValueError("community_size must be positive")


def _poisson(rng: random.Random, mean: float) -> int:
    # Knuth's method; fine for the small means used here
    limit = math.exp(-mean)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Deterministic synthetic dataset for a given spec and seed."""
    rng = random.Random(spec.rng_seed)
    n = spec.n_users
    n_comm = max(1, n // spec.community_size)
    community = [u * n_comm // n for u in range(n)]
    members = {}
    for u in range(n):
        members.setdefault(community[u], []).append(u)

    def trust_value():
        if spec.trust_value_mode == "binary":
            return 1.0
        v = 0.0
        while v == 0.0:
            v = rng.uniform(-1.0, 1.0)
        return v

    edges = []
    for u in range(n):
        degree = _poisson(rng, spec.avg_out_degree)
        targets: set[int] = set()
        attempts = 0
        while len(targets) < degree and attempts < degree * 20:
            attempts += 1
            if n > 1 and rng.random() < spec.in_community_bias:
                pool = members[community[u]]
                t = pool[rng.randrange(len(pool))]
            else:
                t = rng.randrange(n)
            if t != u:
                targets.add(t)
        for t in sorted(targets):
            edges.append((u, t, trust_value()))

    item_means: dict[tuple[int, int], float] = {}
    ratings = []
    for u in range(n):
        count = _poisson(rng, spec.avg_ratings_per_user)
        items: set[int] = set()
        while len(items) < min(count, spec.n_items):
            items.add(rng.randrange(spec.n_items))
        for item in sorted(items):
            key = (community[u], item)
            if key not in item_means:
                item_means[key] = rng.uniform(RATING_MIN, RATING_MAX)
            value = round(rng.gauss(item_means[key], spec.rating_noise))
            ratings.append((u, item, min(RATING_MAX, max(RATING_MIN, value))))

    return Dataset(ratings, edges, users=range(n), items=range(spec.n_items))


# -- statistics -----------------------------------------------------------

@dataclass(slots=True)
class DatasetStats:
    n_users: int
    n_items: int
    n_ratings: int
    n_trust_edges: int
    avg_neighbors: float
    avg_ratings_per_user: float
    avg_ratings_per_item: float


def dataset_stats(dataset: Dataset) -> DatasetStats:
    n_users = len(dataset.users)
    n_items = len(dataset.items)
    n_ratings = dataset.n_ratings
    n_edges = dataset.n_trust_edges
    return DatasetStats(
        n_users=n_users,
        n_items=n_items,
        n_ratings=n_ratings,
        n_trust_edges=n_edges,
        avg_neighbors=n_edges / n_users if n_users else 0.0,
        avg_ratings_per_user=n_ratings / n_users if n_users else 0.0,
        avg_ratings_per_item=n_ratings / n_items if n_items else 0.0,
    )


# -- snapshots ------------------------------------------------------------

def save_snapshot(state: NetworkState, path, config=None) -> None:
    """Write a network state as versioned text; floats keep full precision."""
    damping = getattr(config, "damping", None)
    threshold = getattr(config, "store_threshold", None)
    header = (f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} round={state.round} "
              f"lambda={'na' if damping is None else repr(damping)} "
              f"threshold={'na' if threshold is None else repr(threshold)} "
              f"converged={int(state.converged)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for owner in sorted(state.tables):
            table = state.tables[owner]
            fh.write(f"node {owner}\n")
            for target in sorted(table.entries):
                e = table.entries[target]
                fh.write(f"{owner} {target} {e.trust!r} {e.origin} {e.hops}\n")


def load_snapshot(path) -> NetworkState:
    """Reload a snapshot written by save_snapshot; round-trip is bit-exact."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) < 3 or header[0] != SNAPSHOT_MAGIC:
            raise VersionError(f"{path}: not a trustgrid snapshot")
        if header[1] != SNAPSHOT_VERSION:
            raise VersionError(f"{path}: unsupported snapshot version {header[1]}")
        meta = dict(tok.split("=", 1) for tok in header[2:] if "=" in tok)
        tables: dict[int, TrustTable] = {}
        for line_no, line in _data_lines(fh):
            fields = line.split()
            if fields[0] == "node" and len(fields) == 2:
                tables.setdefault(int(fields[1]), TrustTable(int(fields[1])))
                continue
            if len(fields) != 5:
                raise ParseError(line_no, f"expected 5 fields, got {len(fields)}")
            owner, target = int(fields[0]), int(fields[1])
            trust = float(fields[2])
            origin = fields[3]
            hops = int(fields[4])
            if origin not in (DIRECT, INFERRED):
                raise ParseError(line_no, f"unknown entry origin {origin!r}")
            table = tables.setdefault(owner, TrustTable(owner))
            table.entries[target] = TrustEntry(target, trust, origin, hops)
    return NetworkState(tables,
                        round=int(meta.get("round", 0)),
                        converged=bool(int(meta.get("converged", 0))))
