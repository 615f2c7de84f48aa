import pytest

from trustgrid.model import (Dataset, NoRatingsError, UnknownItemError,
                             UnknownUserError)


def test_mean_rating():
    ds = Dataset([(1, 10, 4), (1, 11, 5), (2, 10, 3)])
    assert ds.mean_rating(1) == 4.5
    assert ds.mean_rating(2) == 3.0


def test_mean_rating_no_ratings():
    ds = Dataset([(1, 10, 4)], [(1, 2, 1.0)])
    with pytest.raises(NoRatingsError):
        ds.mean_rating(2)


def test_item_raters():
    ds = Dataset([(1, 10, 4), (2, 10, 2), (1, 11, 5)])
    assert set(ds.item_raters(10).items()) == {(1, 4), (2, 2)}
    assert ds.item_raters(11) == {1: 5}


def test_item_raters_unknown_item():
    ds = Dataset([(1, 10, 4)])
    with pytest.raises(UnknownItemError):
        ds.item_raters(999)


def test_empty_item_has_no_raters():
    ds = Dataset([(1, 10, 4)], items=[11])
    assert ds.item_raters(11) == {}


def test_direct_trust_directedness():
    ds = Dataset([], [(1, 2, 1.0)])
    assert ds.direct_trust(1, 2) == 1.0
    assert ds.direct_trust(2, 1) is None


def test_direct_trust_unknown_user():
    ds = Dataset([], [(1, 2, 1.0)])
    with pytest.raises(UnknownUserError):
        ds.direct_trust(1, 99)


def test_rating_value_range_rejected():
    with pytest.raises(ValueError):
        Dataset([(1, 10, 6)])
    with pytest.raises(ValueError):
        Dataset([(1, 10, 0)])


def test_trust_value_range_rejected():
    with pytest.raises(ValueError):
        Dataset([], [(1, 2, 1.5)])


def test_duplicate_rating_last_wins():
    ds = Dataset([(1, 10, 4), (1, 10, 2)])
    assert ds.user_ratings(1) == {10: 2}
    assert ds.warnings.duplicate_ratings == 1


def test_self_trust_dropped_with_warning():
    ds = Dataset([], [(1, 1, 1.0), (1, 2, 0.5)])
    assert ds.trust_neighbors(1) == {2: 0.5}
    assert ds.warnings.self_trust_edges == 1


def test_index_consistency():
    records = [(u, i, (u + i) % 5 + 1) for u in range(8) for i in range(u % 4)]
    ds = Dataset(records)
    per_user_total = sum(len(ds.user_ratings(u)) for u in ds.users)
    per_item_total = sum(len(ds.item_raters(i)) for i in ds.items)
    assert per_user_total == ds.n_ratings == per_item_total == len(records)
