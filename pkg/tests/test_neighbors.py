import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_cloud
from nhpd.errors import DuplicatePointError
from nhpd.neighbors import candidate_pairs, nearest_distances


def brute_force_dmin(xy):
    d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def brute_force_pairs(xy, radii):
    d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    keep = d <= np.maximum(radii[:, None], radii[None, :])
    np.fill_diagonal(keep, False)
    ii, jj = np.nonzero(np.triu(keep))
    return ii, jj


def test_collinear_example():
    xy = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    assert nearest_distances(xy).tolist() == [1.0, 1.0, 2.0]


def test_two_points_symmetric():
    xy = np.array([[0.0, 0.0], [0.3, 0.4]])
    assert nearest_distances(xy).tolist() == [0.5, 0.5]


def test_duplicate_points_rejected():
    xy = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]])
    with pytest.raises(DuplicatePointError):
        nearest_distances(xy)


def test_single_point_rejected():
    with pytest.raises(ValueError):
        nearest_distances(np.array([[0.0, 0.0]]))


def test_dmin_matches_brute_force_500(rng):
    xy = random_cloud(rng, 500)
    assert np.array_equal(nearest_distances(xy), brute_force_dmin(xy))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(5, 120))
def test_dmin_matches_brute_force_property(seed, n):
    xy = random_cloud(np.random.default_rng(seed), n)
    assert np.array_equal(nearest_distances(xy), brute_force_dmin(xy))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(5, 120), scale=st.floats(0.5, 4.0))
def test_pairs_match_brute_force_property(seed, n, scale):
    rng = np.random.default_rng(seed)
    xy = random_cloud(rng, n)
    radii = scale * nearest_distances(xy)
    ii, jj = candidate_pairs(xy, radii)
    bi, bj = brute_force_pairs(xy, radii)
    got = set(zip(ii.tolist(), jj.tolist()))
    # candidate set may be a superset only outside the radius; within it must match
    assert got >= set(zip(bi.tolist(), bj.tolist()))
    d = np.hypot(xy[jj, 0] - xy[ii, 0], xy[jj, 1] - xy[ii, 1])
    inside = d <= np.maximum(radii[ii], radii[jj])
    assert set(zip(ii[inside].tolist(), jj[inside].tolist())) == set(
        zip(bi.tolist(), bj.tolist())
    )
