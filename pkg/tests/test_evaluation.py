import io
import json
from fractions import Fraction

import numpy as np
import pytest

from critset.bigraph import GraphError, load_edge_list
from critset.evaluation import CoverageCurve, auc_of, cov, coverage_curve
from critset.ranking import Ranking, RankingError, read_ranking, write_ranking
from critset.rankcore import mincov, shapley_rank

from conftest import random_bigraph


@pytest.fixture
def xy():
    # x:{a}, y:{a,b}
    return load_edge_list(["a x", "a y", "b y"])


def test_cov_basic(xy):
    assert cov(xy, []) == 0
    assert cov(xy, [0]) == 1
    assert cov(xy, [1]) == 0
    assert cov(xy, [0, 1]) == 2 == xy.num_items


def test_cov_unknown_id(xy):
    with pytest.raises(GraphError):
        cov(xy, [5])


def test_curve_single_shared_item():
    g = load_edge_list(["a x", "b x"])
    for order in ([0, 1], [1, 0]):
        c = coverage_curve(g, np.array(order))
        assert c.covered.tolist() == [0, 1]
        assert c.auc == 0.5


def test_curve_five_sixths():
    # x:{a}, y:{b}, z:{b}; ranking [b, a]
    g = load_edge_list(["a x", "b y", "b z"])
    c = coverage_curve(g, Ranking(np.array([1, 0]), "hand"))
    assert c.covered.tolist() == [2, 3]
    assert Fraction(c.auc).limit_denominator(100) == Fraction(5, 6)
    assert auc_of(c) == pytest.approx(5 / 6, abs=1e-15)


def test_auc_extremes():
    assert auc_of(CoverageCurve(np.array([0, 0, 0, 4]), 4)) == 0.25
    assert auc_of(CoverageCurve(np.array([4, 4, 4, 4]), 4)) == 1.0


def test_curve_rejects_non_permutation(xy):
    with pytest.raises(RankingError):
        coverage_curve(xy, np.array([0, 0]))
    with pytest.raises(RankingError):
        coverage_curve(xy, np.array([0]))


def test_curve_prefixes_match_from_scratch(rng):
    for _ in range(20):
        g = random_bigraph(rng, 30, 40, 0.08)
        order = rng.permutation(30)
        c = coverage_curve(g, order)
        expected = [cov(g, order[:k]) for k in range(1, 31)]
        assert c.covered.tolist() == expected
        assert c.covered[-1] == g.num_items
        assert (np.diff(c.covered) >= 0).all()


def test_curve_csv_and_summary(xy):
    c = coverage_curve(xy, mincov(xy))
    buf = io.StringIO()
    c.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "k,covered,fraction"
    assert lines[1] == "0,0,0.0"
    assert lines[-1] == "2,2,1.0"
    out = io.StringIO()
    c.write_summary(out)
    s = json.loads(out.getvalue())
    assert s == {"method": "mincov", "auc": 0.75, "num_contributors": 2, "num_items": 2}
    assert out.getvalue().endswith("\n")


def test_ranking_serialization_round_trip(rng):
    g = random_bigraph(rng, 12, 15, 0.2)
    r = shapley_rank(g)
    for fmt in ("csv", "text"):
        buf = io.StringIO()
        write_ranking(g, r, buf, fmt)
        back = read_ranking(g, io.StringIO(buf.getvalue()))
        assert np.array_equal(back.order, r.order)
        if fmt == "csv":
            assert np.array_equal(back.scores, r.scores)


def test_read_ranking_label_mismatch(xy):
    with pytest.raises(RankingError, match="'zz'"):
        read_ranking(xy, io.StringIO("a\nzz\n"))
    with pytest.raises(RankingError, match="missing contributor 'b'"):
        read_ranking(xy, io.StringIO("a\n"))
