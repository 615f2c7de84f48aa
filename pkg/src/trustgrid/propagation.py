"""Node-local iterative trust propagation over synchronous gossip rounds.

Each user keeps a trust table (direct plus inferred neighbors). In every
round a node reads only its positively-trusted direct neighbors' tables from
the previous round and recomputes damped weighted-average trust values for
every target those tables mention. Rounds repeat until the largest value
change drops below a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .model import Dataset, UnknownUserError

DIRECT = "direct"
INFERRED = "inferred"


@dataclass(frozen=True, slots=True)
class TrustEntry:
    target: int
    trust: float
    origin: str  # DIRECT or INFERRED
    hops: int    # 1 for direct entries


@dataclass(slots=True)
class TrustTable:
    owner: int
    entries: dict[int, TrustEntry] = field(default_factory=dict)


@dataclass(slots=True)
class PropagationConfig:
    damping: float = 0.8          # per-hop penalty on propagated trust
    store_threshold: float = 0.7  # positive inferred values below this are discarded
    max_rounds: int = 50
    tolerance: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must be in (0,1]")
        if not 0.0 <= self.store_threshold <= 1.0:
            raise ValueError("store_threshold must be in [0,1]")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be >= 0")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")


@dataclass(slots=True)
class NetworkState:
    """All nodes' trust tables after some number of rounds."""

    tables: dict[int, TrustTable]
    round: int = 0
    converged: bool = False


def init_network(dataset: Dataset) -> NetworkState:
    """One table per user, holding exactly the user's direct edges (hops=1)."""
    tables = {}
    for user in sorted(dataset.users):
        entries = {t: TrustEntry(t, v, DIRECT, 1)
                   for t, v in sorted(dataset.trust_neighbors(user).items())}
        tables[user] = TrustTable(user, entries)
    return NetworkState(tables)


def infer_trust(x: int, y: int, tables: dict[int, TrustTable],
                damping: float) -> float | None:
    """Damped weighted-average trust from x to y through x's trusted neighbors.

    Contributors are x's direct neighbors i with direct trust(x,i) > 0 whose
    table holds an entry for y (direct or inferred, signed values included).
    Returns None when no neighbor can report on y.
    """
    num = 0.0
    den = 0.0
    for i, entry in tables[x].entries.items():
        if entry.origin != DIRECT or entry.trust <= 0.0:
            continue
        reported = tables[i].entries.get(y)
        if reported is None:
            continue
        num += entry.trust * damping * reported.trust
        den += entry.trust
    if den == 0.0:
        return None
    return num / den


def _recompute_pair(x, y, tables, config):
    """Inferred entry for (x, y) from round-k tables, or None if not storable."""
    num = 0.0
    den = 0.0
    min_hops = None
    for i, entry in tables[x].entries.items():
        if entry.origin != DIRECT or entry.trust <= 0.0:
            continue
        reported = tables[i].entries.get(y)
        if reported is None:
            continue
        num += entry.trust * config.damping * reported.trust
        den += entry.trust
        if min_hops is None or reported.hops < min_hops:
            min_hops = reported.hops
    if den == 0.0:
        return None
    value = num / den
    if value >= config.store_threshold or value < 0.0:
        return TrustEntry(y, value, INFERRED, 1 + min_hops)
    return None


def _candidate_pairs(state: NetworkState) -> set[tuple[int, int]]:
    """All (x, y) pairs eligible for inference: y appears in some positively
    trusted direct neighbor's table, y != x, and y is not x's direct neighbor."""
    pairs = set()
    for x, table in state.tables.items():
        direct = {t for t, e in table.entries.items() if e.origin == DIRECT}
        for i, entry in table.entries.items():
            if entry.origin != DIRECT or entry.trust <= 0.0:
                continue
            for y in state.tables[i].entries:
                if y != x and y not in direct:
                    pairs.add((x, y))
        # previously inferred targets stay under recomputation even if they
        # dropped out of every neighbor table
        for y, entry in table.entries.items():
            if entry.origin == INFERRED:
                pairs.add((x, y))
    return pairs


def _apply_round(state: NetworkState, config: PropagationConfig, pairs):
    """Synchronously recompute `pairs` against round-k tables; returns the
    round-(k+1) state plus (max_change, entries_added, changed_pairs)."""
    tables = state.tables
    updates: dict[int, dict[int, TrustEntry | None]] = {}
    max_change = 0.0
    entries_added = 0
    changed: set[tuple[int, int]] = set()

    for x, y in pairs:
        new = _recompute_pair(x, y, tables, config)
        old = tables[x].entries.get(y)
        if old is not None and old.origin == DIRECT:
            continue  # direct entries are authoritative, never recomputed
        if old is None and new is None:
            continue
        if old is not None and new is not None and old == new:
            continue
        change = abs((old.trust if old else 0.0) - (new.trust if new else 0.0))
        if change > max_change:
            max_change = change
        if old is None and new is not None:
            entries_added += 1
        updates.setdefault(x, {})[y] = new
        changed.add((x, y))

    new_tables = {}
    for x, table in tables.items():
        if x not in updates:
            new_tables[x] = table
            continue
        entries = dict(table.entries)
        for y, entry in updates[x].items():
            if entry is None:
                entries.pop(y, None)
            else:
                entries[y] = entry
        new_tables[x] = TrustTable(x, entries)

    next_state = NetworkState(new_tables, state.round + 1, state.converged)
    return next_state, max_change, entries_added, changed


def run_round(state: NetworkState, dataset: Dataset, config: PropagationConfig):
    """One full synchronous round; every node recomputes every candidate target.

    Returns (new_state, max_change, entries_added). max_change is the largest
    absolute difference between an inferred entry's old and new value, where
    appearing/disappearing entries count as change from/to 0.
    """
    next_state, max_change, entries_added, _ = _apply_round(
        state, config, sorted(_candidate_pairs(state)))
    return next_state, max_change, entries_added


def propagate(dataset: Dataset, config: PropagationConfig | None = None) -> NetworkState:
    """Run rounds until max_change <= tolerance or max_rounds is reached.

    Incremental bookkeeping recomputes only pairs whose inputs changed in the
    previous round; results are identical to repeated full run_round calls.
    """
    if config is None:
        config = PropagationConfig()
    state = init_network(dataset)
    if config.max_rounds == 0:
        return state

    # reverse positive adjacency: who reads node i's table
    readers: dict[int, list[int]] = {}
    for x in state.tables:
        for i, v in dataset.trust_neighbors(x).items():
            if v > 0.0:
                readers.setdefault(i, []).append(x)

    pairs = sorted(_candidate_pairs(state))
    for _ in range(config.max_rounds):
        state, max_change, _, changed = _apply_round(state, config, pairs)
        if max_change <= config.tolerance:
            state.converged = True
            break
        dirty = set()
        for i, y in changed:
            for x in readers.get(i, ()):
                if y != x and dataset.direct_trust(x, y) is None:
                    dirty.add((x, y))
            # the pair itself stays live: its entry may need re-removal
            dirty.add((i, y))
        pairs = sorted(dirty)
    return state


def query_trust(state: NetworkState, x: int, y: int):
    """Entry from x's table as (trust, origin, hops), or None if absent."""
    if x not in state.tables:
        raise UnknownUserError(f"unknown user {x}")
    entry = state.tables[x].entries.get(y)
    if entry is None:
        return None
    return entry.trust, entry.origin, entry.hops
