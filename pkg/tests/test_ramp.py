import math

import pytest

from orleak.algorithms import convergecast, dummy_convergecast, silent_convergecast
from orleak.graph import named_graph, path_graph, star_graph
from orleak.ramp import (JointDistribution, PartialAccessStructure, SchemeError,
                         average_subset_leakage, check_star_bound, disconnecting_sets,
                         histories_as_scheme, packed_shamir, ramp_structure, share_entropy_sum,
                         share_size_lower_bound, verify_scheme)

IDENTITY = JointDistribution(1, {(0, (0,)): 0.5, (1, (1,)): 0.5})
ONE_OF_ONE = PartialAccessStructure(1, frozenset({frozenset()}), frozenset({frozenset({0})}))


def test_joint_distribution_validation():
    with pytest.raises(SchemeError):
        JointDistribution(1, {(0, (0,)): 0.6})
    with pytest.raises(SchemeError):
        JointDistribution(2, {(0, (0,)): 1.0})


def test_access_structure_validation():
    with pytest.raises(SchemeError):
        PartialAccessStructure(2, frozenset({frozenset()}), frozenset({frozenset({0})}))
    with pytest.raises(SchemeError):
        PartialAccessStructure(2, frozenset({frozenset({0})}), frozenset({frozenset({0, 1})}))
    with pytest.raises(SchemeError):
        ramp_structure(2, 2, 3)


def test_verify_trivial_schemes():
    assert verify_scheme(IDENTITY, ONE_OF_ONE).ok
    noise = JointDistribution(1, {(s, (x,)): 0.25 for s in (0, 1) for x in (0, 1)})
    rep = verify_scheme(noise, ONE_OF_ONE)
    assert not rep.ok and rep.failures[0][0] == "reconstruction"


def test_packed_shamir_examples():
    j = packed_shamir(0, 1, 2, 3)
    assert all(s == (sh[0],) == (sh[1],) for (s, sh) in j.table)
    assert verify_scheme(j, ramp_structure(0, 1, 2)).ok
    j = packed_shamir(1, 2, 3, 5)
    assert verify_scheme(j, ramp_structure(1, 2, 3)).ok
    assert j.share_entropies() == pytest.approx([math.log2(5)] * 3, abs=1e-9)
    j = packed_shamir(1, 3, 4, 5)
    assert j.secret_entropy() == pytest.approx(2 * math.log2(5))
    assert verify_scheme(j, ramp_structure(1, 3, 4)).ok


@pytest.mark.parametrize("args", [(1, 2, 3, 4), (1, 2, 6, 5), (2, 2, 3, 5), (1, 9, 9, 11)])
def test_packed_shamir_errors(args):
    with pytest.raises(SchemeError):
        packed_shamir(*args)


def test_star_bound_examples():
    j = packed_shamir(1, 2, 2, 2)
    chk = check_star_bound(j, 1)
    assert chk.ok and chk.equality and chk.share_sum == 2.0 and chk.bound == 2.0
    assert share_entropy_sum(j) == 2.0
    assert check_star_bound(IDENTITY, 0).equality
    with pytest.raises(SchemeError):
        check_star_bound(packed_shamir(0, 2, 2, 3), 1)


def test_two_edge_multigraph_secrecy():
    # two parallel channels carrying XOR shares: either one alone is silent
    j = packed_shamir(1, 2, 2, 2)
    assert average_subset_leakage(j, 1) == 0.0
    assert average_subset_leakage(j, 2) == 1.0


def test_share_size_lower_bound():
    assert share_size_lower_bound(1, 2, 3) == pytest.approx(math.log2(3))
    assert share_size_lower_bound(1, 2, 4) == 2.0
    for r in range(2, 6):
        assert share_size_lower_bound(r - 1, r, r + 1) == pytest.approx(max(math.log2(3), math.log2(r + 1)))
    with pytest.raises(SchemeError):
        share_size_lower_bound(0, 1, 3)


def test_json_round_trip():
    j = packed_shamir(1, 3, 4, 5)
    back = JointDistribution.from_obj(j.to_obj())
    assert back.table == pytest.approx(j.table)
    with pytest.raises(SchemeError):
        JointDistribution.from_obj({"parties": 1})


def test_disconnecting_sets():
    g = path_graph(3)
    sets = disconnecting_sets(g, 0, 2)
    assert frozenset() not in sets
    assert set(sets) == {frozenset({(0, 1)}), frozenset({(1, 2)}), frozenset({(0, 1), (1, 2)})}


@pytest.mark.parametrize("g, make, bits", [
    (named_graph("K2"), convergecast, 0),
    (star_graph(4), silent_convergecast, 0),
    (star_graph(4), dummy_convergecast, 1),
    (named_graph("cycle:4"), convergecast, 0),
])
def test_histories_reconstruct_on_disconnecting_sets(g, make, bits):
    for u in range(g.n):
        for v in range(u + 1, g.n):
            hs = histories_as_scheme(make(g), g, u, v, bits)
            assert hs.ok, hs.reconstruction_failures
            assert frozenset() in hs.secrecy_sets


def test_k2_history_is_the_secret():
    g = named_graph("K2")
    hs = histories_as_scheme(convergecast(g), g, 0, 1)
    assert hs.qualified == [frozenset({(0, 1)})]
    assert hs.joint.conditional_entropy([0]) == 0.0
    with pytest.raises(SchemeError):
        histories_as_scheme(convergecast(g), g, 1, 1)
