import io

import pytest

from trustgrid.ingest import (DatasetStats, ParseError, SyntheticSpec,
                              VersionError, dataset_stats, generate_synthetic,
                              load_snapshot, parse_ratings, parse_trust,
                              save_snapshot)
from trustgrid.model import Dataset
from trustgrid.propagation import PropagationConfig, init_network, propagate


def test_parse_ratings_basic():
    text = "# comment\n1 100 5\n2 100 3\n"
    assert parse_ratings(io.StringIO(text)) == [(1, 100, 5), (2, 100, 3)]


def test_parse_ratings_empty():
    assert parse_ratings(io.StringIO("")) == []


def test_parse_ratings_out_of_range():
    with pytest.raises(ParseError, match="line 1"):
        parse_ratings(io.StringIO("1 100 9\n"))


def test_parse_ratings_malformed():
    with pytest.raises(ParseError, match="line 2"):
        parse_ratings(io.StringIO("1 100 5\n1 100\n"))


def test_parse_trust_binary_and_signed():
    assert parse_trust(io.StringIO("7 9 1\n")) == [(7, 9, 1.0)]
    assert parse_trust(io.StringIO("7 9 -0.5\n")) == [(7, 9, -0.5)]


def test_parse_trust_out_of_range():
    with pytest.raises(ParseError):
        parse_trust(io.StringIO("7 9 2\n"))


def test_parse_totality():
    lines = ["# header"] + [f"{u} {u + 1} 1" for u in range(50)]
    assert len(parse_trust(io.StringIO("\n".join(lines)))) == 50


def test_synthetic_deterministic():
    spec = SyntheticSpec(n_users=200, n_items=400, rng_seed=7)
    a = generate_synthetic(spec)
    b = generate_synthetic(spec)
    assert a.rating_list() == b.rating_list()
    assert a.trust_edge_list() == b.trust_edge_list()


def test_synthetic_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(n_users=0)
    with pytest.raises(ValueError):
        SyntheticSpec(avg_out_degree=-1)
    with pytest.raises(ValueError):
        SyntheticSpec(trust_value_mode="nope")


def test_synthetic_degree_close_to_spec():
    spec = SyntheticSpec(n_users=2000, n_items=4000, avg_out_degree=10.0,
                         rng_seed=1)
    stats = dataset_stats(generate_synthetic(spec))
    assert 8.0 <= stats.avg_neighbors <= 12.0


def test_synthetic_no_self_edges_no_duplicates_in_range():
    ds = generate_synthetic(SyntheticSpec(n_users=300, n_items=300,
                                          trust_value_mode="uniform_signed",
                                          rng_seed=3))
    edges = ds.trust_edge_list()
    assert len(edges) == len({(s, t) for s, t, _ in edges})
    assert all(s != t and -1.0 <= v <= 1.0 and v != 0.0 for s, t, v in edges)
    assert all(1 <= v <= 5 for _, _, v in ds.rating_list())
    assert ds.warnings.self_trust_edges == 0


def test_dataset_stats_simple():
    ds = Dataset([(1, 10, 4), (2, 11, 3)])
    stats = dataset_stats(ds)
    assert stats.n_users == 2 and stats.n_ratings == 2
    assert stats.avg_ratings_per_user == 1.0


def test_dataset_stats_empty():
    stats = dataset_stats(Dataset())
    assert stats == DatasetStats(0, 0, 0, 0, 0.0, 0.0, 0.0)


def test_snapshot_round_trip(tmp_path):
    ds = Dataset([], [(0, 1, 1.0), (1, 2, 0.813772), (2, 0, -0.25),
                      (0, 3, 0.9), (3, 4, 1.0)])
    config = PropagationConfig(store_threshold=0.3)
    state = propagate(ds, config)
    path = tmp_path / "state.snap"
    save_snapshot(state, path, config)
    loaded = load_snapshot(path)
    assert loaded == state


def test_snapshot_round_trip_init_state(tmp_path):
    ds = Dataset([], [(0, 1, -0.3)])
    state = init_network(ds)
    path = tmp_path / "init.snap"
    save_snapshot(state, path)
    loaded = load_snapshot(path)
    assert loaded == state
    assert all(e.origin == "direct" for t in loaded.tables.values()
               for e in t.entries.values())


def test_snapshot_unknown_version(tmp_path):
    path = tmp_path / "bad.snap"
    path.write_text("trustgrid-snapshot v999 round=0\n")
    with pytest.raises(VersionError):
        load_snapshot(path)


def test_snapshot_not_a_snapshot(tmp_path):
    path = tmp_path / "junk.txt"
    path.write_text("1 2 3\n")
    with pytest.raises(VersionError):
        load_snapshot(path)
