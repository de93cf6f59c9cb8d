"""Tests for the local lattice tree and its orbit counts."""

import collections
from fractions import Fraction as Q

import pytest

from atrpoints.bttree import (
    LocalEmbeddingData,
    TreeVertex,
    atkin_lehner_image,
    ball,
    base_vertex,
    distance,
    embedding_level,
    level_zero_vertices,
    neighbors,
    orbit_count,
    _act,
)
from atrpoints.errors import DepthExceeded, TruncationInsufficient

SPLIT_DATA = {2: (2, 1, 0), 3: (3, 1, 0), 5: (5, 1, 0)}
INERT_DATA = {2: (2, -1, 1), 3: (3, 0, 1), 5: (5, 0, -2)}
RAMIFIED_DATA = {2: (2, 0, -2), 3: (3, 0, -3), 5: (5, 0, -5)}


# -- tree combinatorics ---------------------------------------------------


@pytest.mark.parametrize("p", [2, 3, 5])
def test_base_vertex_has_q_plus_one_neighbors(p):
    ns = neighbors(base_vertex(p))
    assert len(ns) == p + 1
    assert len(set(ns)) == p + 1


@pytest.mark.parametrize("p", [2, 3, 5])
def test_neighbor_relation_is_symmetric(p):
    for v in ball(p, 2):
        for w in neighbors(v):
            assert v in neighbors(w)
            assert distance(v, w) == 1


@pytest.mark.parametrize("p", [2, 3])
def test_distance_matches_bfs(p):
    b0 = base_vertex(p)
    B = ball(p, 4)
    dist = {b0: 0}
    queue = collections.deque([b0])
    while queue:
        v = queue.popleft()
        for w in neighbors(v):
            if w in B and w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    assert len(dist) == len(B)
    for v, d in dist.items():
        assert distance(b0, v) == d
        assert distance(v, b0) == d


@pytest.mark.parametrize("p", [2, 3, 5])
def test_ball_sizes_are_those_of_a_q_plus_one_regular_tree(p):
    # 1 + (q+1)(q^d - 1)/(q - 1) vertices within distance d
    for d in range(4):
        expect = 1 + (p + 1) * (p ** d - 1) // (p - 1) if d else 1
        assert len(ball(p, d)) == expect


def test_two_step_neighbors_are_at_distance_two():
    b0 = base_vertex(2)
    for v in neighbors(b0):
        for w in neighbors(v):
            if w != b0:
                assert distance(b0, w) == 2


def test_depth_bound_is_enforced():
    v = TreeVertex(2, 3, Q(0))
    with pytest.raises(DepthExceeded):
        neighbors(v, depth_bound=3)


def test_canonical_form_reduces_u():
    v = TreeVertex(5, 2, Q(27))
    assert v.u == Q(2)
    w = TreeVertex(5, 1, Q(1, 2))
    assert 0 <= w.u < 5 and (2 * w.u - 1) % 5 == 0


# -- embedding levels and the level-zero shapes ---------------------------


@pytest.mark.parametrize("p", [2, 3, 5])
def test_split_level_zero_set_is_a_line(p):
    emb = LocalEmbeddingData(*SPLIT_DATA[p])
    assert emb.splitting == "split"
    zv = level_zero_vertices(emb, 3)
    assert len(zv) == 7  # 2 * depth + 1 points of the apartment
    # a path: degree <= 2 within the set, exactly two ends of degree 1
    degs = sorted(sum(1 for w in zv if distance(v, w) == 1) for v in zv)
    assert degs == [1, 1, 2, 2, 2, 2, 2]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_inert_level_zero_set_is_the_base_point(p):
    emb = LocalEmbeddingData(*INERT_DATA[p])
    assert emb.splitting == "inert"
    assert level_zero_vertices(emb, 3) == [base_vertex(p)]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_ramified_level_zero_set_is_an_adjacent_pair(p):
    emb = LocalEmbeddingData(*RAMIFIED_DATA[p])
    assert emb.splitting == "ramified"
    zv = level_zero_vertices(emb, 3)
    assert len(zv) == 2
    assert distance(zv[0], zv[1]) == 1


@pytest.mark.parametrize("p", [2, 3, 5])
def test_level_changes_by_at_most_one_along_edges(p):
    for key in ("SPLIT", "INERT", "RAMIFIED"):
        emb = LocalEmbeddingData(*globals()[key + "_DATA"][p])
        for v in ball(p, 3):
            lv = embedding_level(v, emb)
            for w in neighbors(v):
                assert abs(embedding_level(w, emb) - lv) <= 1


def test_level_grows_with_distance_from_the_apartment():
    emb = LocalEmbeddingData(5, 0, -2)  # inert
    b0 = base_vertex(5)
    for v in ball(5, 4):
        assert embedding_level(v, emb) == distance(b0, v)


def test_theta_satisfies_its_polynomial():
    emb = LocalEmbeddingData(7, 3, 1)
    t = emb.theta()
    lhs = (
        (t[0][0] * t[0][0] + t[0][1] * t[1][0],
         t[0][0] * t[0][1] + t[0][1] * t[1][1]),
        (t[1][0] * t[0][0] + t[1][1] * t[1][0],
         t[1][0] * t[0][1] + t[1][1] * t[1][1]),
    )
    rhs = ((emb.s * t[0][0] - emb.n, emb.s * t[0][1]),
           (emb.s * t[1][0], emb.s * t[1][1] - emb.n))
    assert lhs == rhs


def test_degenerate_and_non_maximal_generators_are_rejected():
    with pytest.raises(ValueError):
        LocalEmbeddingData(5, 2, 1)  # disc 0
    with pytest.raises(ValueError):
        LocalEmbeddingData(5, 0, -25).splitting  # disc 100, even valuation


def test_truncation_guard():
    emb = LocalEmbeddingData(3, 0, 1)
    far = TreeVertex(3, 6, Q(0))
    with pytest.raises(TruncationInsufficient):
        embedding_level(far, emb, max_level=4)
    with pytest.raises(TruncationInsufficient):
        orbit_count(emb, 2, 3)


# -- orbit counts ----------------------------------------------------------


@pytest.mark.parametrize("p", [2, 3, 5])
def test_split_delta_zero_gives_one_orbit(p):
    emb = LocalEmbeddingData(*SPLIT_DATA[p])
    assert orbit_count(emb, 0, 4) == 1


@pytest.mark.parametrize("p", [2, 3, 5])
def test_split_positive_delta_gives_two_orbits(p):
    emb = LocalEmbeddingData(*SPLIT_DATA[p])
    for delta in (1, 2):
        assert orbit_count(emb, delta, max(4, delta + 2)) == 2


def test_generic_split_generator_gives_the_same_counts():
    emb = LocalEmbeddingData(5, 6, 5)
    assert [orbit_count(emb, d, 4) for d in (0, 1, 2)] == [1, 2, 2]


def test_atkin_lehner_swaps_the_two_oriented_orbits():
    # delta = 1, split: the two orbits are the two orientations along the
    # apartment; conjugation by [[0, p], [1, 0]] must exchange them
    p = 3
    emb = LocalEmbeddingData(*SPLIT_DATA[p])
    zv = set(level_zero_vertices(emb, 4))
    pairs = [(v, w) for v in zv for w in zv if distance(v, w) == 1]
    # orientation along the apartment: sign of the k-step
    def orient(pair):
        return 1 if pair[1].k > pair[0].k else -1

    for v, w in pairs:
        iv, iw = atkin_lehner_image(v, 1), atkin_lehner_image(w, 1)
        assert distance(iv, iw) == 1
        if embedding_level(iv, emb) == 0 and embedding_level(iw, emb) == 0:
            assert orient((iv, iw)) == -orient((v, w))


def test_action_preserves_distances_and_levels():
    emb = LocalEmbeddingData(3, 1, 0)
    g = ((Q(1), Q(-3)), (Q(3), Q(1)))  # some element of GL2(Q_3)
    B = list(ball(3, 3))
    for v in B[:10]:
        for w in B[:10]:
            assert distance(_act(g, v), _act(g, w)) == distance(v, w)
