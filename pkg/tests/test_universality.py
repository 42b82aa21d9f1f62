import json
import math

import numpy as np
import pytest

from liediam.constants import BETA
from liediam.errors import DomainError, ValidationError
from liediam.groups import (
    GroupElement,
    make_group_element,
    op_norm_batch,
    product,
    rot_x,
    rot_z,
    so,
    su,
)
from liediam.universality import (
    INCONCLUSIVE,
    NOT_UNIVERSAL,
    GateSet,
    UniversalityConfig,
    _algebra_matrices,
    _algebra_norms,
    ball_net,
    coverage_check,
    generate_words,
    icosahedral_gate_set,
    nearest_word_distances,
    random_ball_points,
    test_universality as run_universality,
    two_rotations_gate_set,
)


def brute_nearest(points, mats, kind):
    out = np.empty(len(points))
    for i, p in enumerate(points):
        out[i] = op_norm_batch(p.conj().T[None] @ mats, kind).min()
    return out


# --- gate sets and words --------------------------------------------------------


def test_gate_set_validation():
    with pytest.raises(ValidationError):
        GateSet(so(3), (), ())
    with pytest.raises(ValidationError):
        GateSet(so(3), (rot_z(1.0),), ("a", "b"))
    with pytest.raises(ValidationError):
        GateSet(so(3), (rot_z(1.0), rot_x(1.0)), ("a", "a"))
    with pytest.raises(ValidationError):
        GateSet(su(2), (rot_z(1.0),), ("a",))


def test_letters_include_inverses():
    names, mats = two_rotations_gate_set().letters()
    assert names == ["Rz", "Rx", "Rz^-1", "Rx^-1"]
    assert np.allclose(mats[0] @ mats[2], np.eye(3))
    names, _ = GateSet(so(3), (rot_z(1.0),), ("a",), include_inverses=False).letters()
    assert names == ["a"]


def test_cyclic_group_closure():
    words = generate_words(GateSet(so(3), (rot_z(2 * math.pi / 5),), ("r",)), 10)
    assert words.closure_detected and words.group_order == 5
    assert words.max_length == 2
    assert words.level_sizes == [1, 2, 2]


def test_central_gate_closes_immediately():
    # -1 in SU(2) is a global phase, invisible to the adjoint keys
    words = generate_words(GateSet(su(2), (make_group_element(-np.eye(2), su(2)),), ("m",)), 5)
    assert words.group_order == 1


def test_icosahedral_words():
    words = generate_words(icosahedral_gate_set(), 12)
    assert words.closure_detected and words.group_order == 60
    assert words.max_length <= 12
    assert sum(words.level_sizes) == 60
    for i in range(len(words)):
        assert np.allclose(words.multiply_out(i), words.matrices[i], atol=1e-10)
        assert len(words.word(i)) == words.lengths[i]


def test_free_growth_of_two_rotations():
    # no short relations between rotations by 1 radian about z and x
    words = generate_words(two_rotations_gate_set(), 5)
    assert words.level_sizes == [1, 4, 12, 36, 108, 324]
    assert not words.closure_detected and not words.truncated
    assert words.group_order is None


def test_word_cap_truncates():
    words = generate_words(two_rotations_gate_set(), 8, cap=100)
    assert words.truncated and len(words) == 100


def test_word_argument_checks():
    with pytest.raises(DomainError):
        generate_words(two_rotations_gate_set(), 0)
    with pytest.raises(DomainError):
        generate_words(two_rotations_gate_set(), 3, dedup_tol=0.1)


# --- nets ---------------------------------------------------------------------


@pytest.mark.parametrize("kind, spacing", [(so(3), 0.05), (su(2), 0.05), (product(so(3), so(3)), 0.35)], ids=str)
def test_net_points_lie_in_ball(kind, spacing):
    net = ball_net(kind, 2 * BETA, spacing)
    norms = _algebra_norms(_algebra_matrices(net.coords, kind), kind)
    assert norms.max() <= 2 * BETA + 1e-12
    assert np.allclose(op_norm_batch(net.matrices, kind), norms, atol=1e-10)


@pytest.mark.parametrize("kind, spacing", [(so(3), 0.05), (su(2), 0.05)], ids=str)
def test_net_covers_ball(kind, spacing):
    net = ball_net(kind, 2 * BETA, spacing)
    pts = random_ball_points(kind, 2 * BETA, 300, 0)
    # worst distance from a random ball point to its nearest net point
    assert brute_nearest(pts, net.matrices, kind).max() <= spacing


def test_net_of_radius_zero():
    net = ball_net(so(3), 0.0, 0.05)
    assert len(net) == 1
    assert np.allclose(net[0].matrix, np.eye(3))


def test_net_argument_checks():
    with pytest.raises(DomainError):
        ball_net(so(3), 0.2, 0.0)
    with pytest.raises(DomainError):
        ball_net(so(3), 2.1, 0.05)
    with pytest.raises(DomainError):
        ball_net(so(3), 2 * BETA, 0.01, cap=1000)


# --- coverage -----------------------------------------------------------------


@pytest.mark.parametrize("gates", [two_rotations_gate_set(), icosahedral_gate_set()], ids=["two", "ico"])
def test_nearest_word_matches_brute_force(gates):
    words = generate_words(gates, 6)
    pts = random_ball_points(so(3), 2 * BETA, 200, 1)
    dist, idx = nearest_word_distances(pts, words, 2 * BETA, BETA)
    assert np.allclose(dist, brute_nearest(pts, words.matrices, so(3)), atol=1e-12)
    own = op_norm_batch(pts.transpose(0, 2, 1) @ words.matrices[idx], so(3))
    assert np.allclose(own, dist, atol=1e-12)


def test_coverage_fields():
    net = ball_net(so(3), 2 * BETA, 0.05)
    cov = coverage_check(net, generate_words(icosahedral_gate_set(), 12), BETA)
    assert cov.threshold == pytest.approx(BETA - 0.05)
    assert cov.worst_distance == pytest.approx(2 * BETA, abs=0.05)
    assert not cov.all_covered and cov.uncovered > 0
    with pytest.raises(DomainError):
        coverage_check(net, generate_words(icosahedral_gate_set(), 2), BETA, spacing=0.2)


def test_short_words_are_inconclusive():
    rep = run_universality(two_rotations_gate_set(), UniversalityConfig(max_length=4, spacing=0.05))
    assert rep.verdict == INCONCLUSIVE
    assert rep.certified_margin < 0 and rep.spot_check_max is None


def test_finite_group_is_not_universal():
    rep = run_universality(icosahedral_gate_set(), UniversalityConfig(max_length=12, spacing=0.05))
    assert rep.verdict == NOT_UNIVERSAL and rep.group_order == 60
    doc = json.loads(json.dumps(rep.to_json()))
    assert doc["verdict"] == NOT_UNIVERSAL
    assert doc["words"]["count"] == 60
    assert doc["worst_point"]["kind"] == "so"


def test_phase_blind_coverage():
    had = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    t = np.diag([1, np.exp(1j * math.pi / 4)])
    net = ball_net(su(2), 2 * BETA, 0.05)
    dists = []
    for ph in ((0.0, 0.0), (0.3, 1.9)):
        gates = (GroupElement(np.exp(1j * ph[0]) * had, su(2)), GroupElement(np.exp(1j * ph[1]) * t, su(2)))
        words = generate_words(GateSet(su(2), gates, ("H", "T")), 5)
        dists.append(coverage_check(net, words, BETA).distances)
    assert np.max(np.abs(dists[0] - dists[1])) <= 1e-10


def test_random_ball_points_norms():
    pts = random_ball_points(su(2), 0.3, 500, 0)
    n = op_norm_batch(pts, su(2))
    assert n.max() <= 0.3 + 1e-12
    assert np.array_equal(pts, random_ball_points(su(2), 0.3, 500, 0))
