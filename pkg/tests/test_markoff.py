import math
from fractions import Fraction

import pytest

from valq import (
    DomainError,
    is_equivalent,
    make,
    neighbor_sequences,
    observation_report,
    parse_surd,
    theta,
    tree,
    val,
)

from conftest import assert_close


def node_by_m(nodes, m):
    return next(nd for nd in nodes if nd.m == m)


def test_tree_smallest_numbers():
    ms = sorted(nd.m for nd in tree(4))
    assert ms[:10] == [1, 2, 5, 13, 29, 34, 89, 169, 194, 233]


def test_tree_orientation_anchors():
    nodes = tree(3)
    n194 = node_by_m(nodes, 194)
    assert (n194.a, n194.b) == (13, 5)
    n433 = node_by_m(nodes, 433)
    assert (n433.a, n433.b) == (5, 29)


def test_all_triples_satisfy_markoff_equation():
    for nd in tree(6):
        a, b, m = nd.triple
        assert a * a + b * b + m * m == 3 * a * b * m


def test_nodes_keyed_by_path():
    nodes = tree(3)
    paths = [nd.path for nd in nodes]
    assert len(paths) == len(set(paths))
    assert node_by_m(nodes, 5).path == ""
    assert node_by_m(nodes, 13).path == "L"
    assert node_by_m(nodes, 194).path == "LR"


def test_theta_small_cases():
    nodes = tree(2)
    th1 = theta(node_by_m(nodes, 1))
    assert th1.theta1 == parse_surd("(-3+sqrt(5))/2")
    th2 = theta(node_by_m(nodes, 2))
    assert th2.theta1 == parse_surd("-1+sqrt(2)")
    th5 = theta(node_by_m(nodes, 5))
    assert (th5.k1, th5.k2) == (2, 3)
    assert th5.theta1 == parse_surd("(-11+sqrt(221))/10")
    assert th5.theta2 == parse_surd("(-9+sqrt(221))/10")


def test_theta_table_rows():
    # the printed irrationalities for i = 4..10
    expected = {
        13: "(-29+sqrt(1517))/26",
        29: "(-63+sqrt(7565))/58",
        34: "(-19+5*sqrt(26))/17",
        89: "(-199+sqrt(71285))/178",
        169: "(-367+sqrt(257045))/338",
        194: "(-108+sqrt(21170))/97",
        233: "(-521+sqrt(488597))/466",
    }
    nodes = tree(4)
    for m, surd in expected.items():
        th = theta(node_by_m(nodes, m))
        assert th.theta1 == parse_surd(surd), m


def test_theta_residues_in_range_and_disc():
    for nd in tree(4):
        th = theta(nd)
        assert 0 <= th.k1 < max(nd.m, 1) or nd.m == 1
        assert 0 <= th.k2 < max(nd.m, 1) or nd.m == 1
        # the defining congruences
        assert (nd.a * th.k1 - nd.b) % nd.m == 0
        assert (nd.b * th.k2 - nd.a) % nd.m == 0
        # the raw form has discriminant 9m^2-4 (content may shed a square)
        assert th.disc == 9 * nd.m ** 2 - 4
        assert th.disc % th.theta1.disc == 0


def test_hurwitz_constants_increase_to_three():
    nodes = sorted(tree(4), key=lambda nd: nd.m)[:10]
    prev = Fraction(0)
    for nd in nodes:
        L2 = 9 - Fraction(4, nd.m ** 2)  # exact L^2
        assert prev < L2 < 9
        prev = L2
    th = theta(node_by_m(nodes, 5))
    assert_close(th.hurwitz_constant(96), str(math.sqrt(9 - 4 / 25)), 1e-12)


def test_theta_k_shift_is_gamma_move():
    # replacing k by k+m translates theta by 1: same class, same value
    nodes = tree(2)
    nd = node_by_m(nodes, 5)
    th = theta(nd)
    shifted = make(nd.m, 3 * nd.m - 2 * (th.k1 + nd.m),
                   ((th.k1 + nd.m) ** 2 - 3 * nd.m * (th.k1 + nd.m) + 1) // nd.m)
    assert is_equivalent(th.theta1, shifted)
    v1 = val(th.theta1, 80).value
    v2 = val(shifted, 80).value
    assert abs(float(v1.real - v2.real)) < 2 ** -70
    assert abs(float(v1.imag - v2.imag)) < 2 ** -70


def test_theta_pair_is_conjugate_class():
    # theta2 is equivalent to -theta1', making the two values conjugates
    for nd in tree(3):
        th = theta(nd)
        assert is_equivalent(th.theta2, th.theta1.neg_conjugate()), nd.m


def test_neighbor_sequences_m1_m2():
    nodes = tree(1)
    one = node_by_m(nodes, 1)
    nL, nR = neighbor_sequences(one, 5)
    assert nL == []
    assert [nd.m for nd in nR] == [2, 5, 13, 34, 89]
    two = node_by_m(nodes, 2)
    nL, nR = neighbor_sequences(two, 5)
    assert [nd.m for nd in nL] == [1, 5, 29, 169, 985]
    assert nR == []


def test_neighbor_sequences_generic():
    nodes = tree(1)
    five = node_by_m(nodes, 5)
    nL, nR = neighbor_sequences(five, 4)
    assert [nd.m for nd in nL] == [13, 194, 2897, 43261]
    assert [nd.m for nd in nR] == [29, 433, 6466, 96557]
    # each chain element is adjacent to region 5: its (a,b) pair contains 5
    for nd in nL + nR:
        assert 5 in (nd.a, nd.b)
    assert len(neighbor_sequences(five, 7)[0]) == 7
    with pytest.raises(DomainError):
        neighbor_sequences(five, 0)


def test_observation_report_table7_values():
    rep = observation_report(4, 80, top=10)
    rows = {r.thetas.m: r for r in rep.rows}
    assert_close(rows[5].val1.real, "708.909919720708747", 1e-12, "Re val theta_3,1")
    assert_close(rows[5].val1.imag, "0.267039735460289", 1e-12, "Im val theta_3,1")
    assert_close(rows[233].val1.real, "707.408028846873175", 1e-12, "Re val theta_10,1")
    assert_close(rows[233].val1.imag, "0.130903420887032", 1e-12, "Im val theta_10,1")
    # realness: only m=1, m=2 are real
    for m, r in rows.items():
        assert r.real1 == (m in (1, 2)), m
    # sign pattern for the refined pair
    for m, r in rows.items():
        if m > 2:
            assert r.im1_positive and r.im2_negative, m


def test_observation_betweenness_exceptional_triple():
    rep = observation_report(2, 64)
    exc = [b for b in rep.betweenness if b.exceptional]
    assert len(exc) == 1 and exc[0].child.m == 5
    # the (1,2,5) triple: real parts still lie between
    assert all(exc[0].ok_re)
    # all other triples satisfy betweenness in both parts here
    for b in rep.betweenness:
        if not b.exceptional:
            assert all(b.ok_re) and all(b.ok_im), b.child.m


def test_observation_neighbor_limit_deltas_decrease():
    rep = observation_report(1, 64, neighbor_K=4, neighbor_m=5)
    assert rep.neighbor_limits
    for nl in rep.neighbor_limits:
        assert all(b < a for a, b in zip(nl.deltas, nl.deltas[1:])), (nl.side, nl.deltas)


def test_tree_validation():
    with pytest.raises(DomainError):
        tree(-1)
    one = tree(0)[0]
    with pytest.raises(DomainError):
        one.children()
