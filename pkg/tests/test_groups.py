import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liediam.errors import DomainError, ValidationError
from liediam.groups import (
    AlgebraVector,
    GroupElement,
    adjoint_matrix,
    algebra_basis,
    algebra_norm_constant,
    block_diag,
    distance,
    exp_map,
    factor,
    haar_batch,
    log_map,
    make_algebra_vector,
    make_group_element,
    op_norm_algebra,
    op_norm_algebra_eigenphases,
    op_norm_group,
    op_norm_group_eigenphases,
    parse_kind,
    path_length,
    product,
    random_algebra_vector,
    rotation,
    rot_x,
    rot_z,
    so,
    su,
)

KINDS = [su(2), su(3), su(4), so(3), so(4), so(5), product(so(3), so(3)), product(su(2), so(3))]


def haar(kind, n, seed):
    return [GroupElement(m, kind) for m in haar_batch(kind, n, seed)]


# --- kinds and validation ---------------------------------------------------


def test_kind_ranges():
    with pytest.raises(ValidationError):
        su(1)
    with pytest.raises(ValidationError):
        so(9)
    with pytest.raises(ValidationError):
        product(so(3))


@pytest.mark.parametrize(
    "text, expected",
    [("su2", su(2)), ("SO(3)", so(3)), ("so3xso3", product(so(3), so(3))), ("su2*so4", product(su(2), so(4)))],
)
def test_parse_kind(text, expected):
    assert parse_kind(text) == expected


def test_algebra_dims():
    assert su(3).algebra_dim == 8
    assert so(4).algebra_dim == 6
    assert product(so(3), su(2)).algebra_dim == 6


def test_make_group_element_rejects_bad_input():
    with pytest.raises(ValidationError):
        make_group_element(np.ones((3, 3)), so(3))
    with pytest.raises(ValidationError):
        make_group_element(np.diag([1.0, 1.0, -1.0]), so(3))
    with pytest.raises(ValidationError):
        make_group_element(np.eye(2), so(3))
    with pytest.raises(ValidationError):
        make_group_element(np.diag([1, 1j, -1j]), so(3))


def test_su_determinant_is_normalized():
    g = make_group_element(np.diag([1j, 1j]), su(2))
    assert np.linalg.det(g.matrix) == pytest.approx(1)
    assert op_norm_group(g) == pytest.approx(0, abs=1e-12)


def test_elements_are_read_only():
    g = rot_z(0.3)
    with pytest.raises(ValueError):
        g.matrix[0, 0] = 2.0


def test_algebra_validation():
    with pytest.raises(ValidationError):
        make_algebra_vector(np.eye(2), su(2))
    with pytest.raises(ValidationError):
        make_algebra_vector(1j * np.eye(2), su(2))
    x = make_algebra_vector(np.array([[0, -1], [1, 0]]) * 0.1j * 1j, su(2))
    assert isinstance(x, AlgebraVector)


def test_product_block_helpers():
    a, b = rot_z(0.4), rot_x(1.1)
    g = block_diag(a, b)
    assert g.kind == product(so(3), so(3))
    assert np.allclose(factor(g, 1).matrix, b.matrix)
    # |(a, b)| is the larger factor norm
    assert op_norm_group(g) == pytest.approx(1.1)


# --- basis and adjoint --------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_basis_is_orthonormal(kind):
    mats = np.array([e.matrix for e in algebra_basis(kind)])
    gram = -np.einsum("aij,bji->ab", mats, mats).real
    assert np.allclose(gram, np.eye(kind.algebra_dim), atol=1e-12)


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_adjoint_matches_hand_conjugation(kind):
    g = haar(kind, 1, 3)[0]
    ad = adjoint_matrix(g)
    for j, e in enumerate(algebra_basis(kind)):
        moved = AlgebraVector(g.matrix @ e.matrix @ g.matrix.conj().T, kind)
        assert np.allclose(ad[:, j], moved.coords(), atol=1e-12)
    assert np.allclose(ad.T @ ad, np.eye(kind.algebra_dim), atol=1e-12)


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_adjoint_is_homomorphism(kind):
    g, h = haar(kind, 2, 5)
    assert np.allclose(adjoint_matrix(g @ h), adjoint_matrix(g) @ adjoint_matrix(h), atol=1e-12)


def test_adjoint_of_z_rotation_is_the_rotation():
    # on so(3) with the standard generator ordering, Ad is the defining action
    g = rot_z(0.7)
    ad = adjoint_matrix(g)
    assert np.allclose(np.sort(np.linalg.eigvals(ad).real), np.sort(np.linalg.eigvals(g.matrix).real))


# --- norms --------------------------------------------------------------------


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.0, 2.0, math.pi - 1e-3])
def test_so3_norm_matches_sphere_grid(theta):
    # |g| for a rotation is the largest angle it moves any unit vector
    rng = np.random.default_rng(11)
    axis = rng.standard_normal(3)
    g = rotation(axis, theta)
    u, v = np.meshgrid(np.linspace(0, 2 * math.pi, 400), np.linspace(0, math.pi, 200))
    pts = np.stack([np.cos(u) * np.sin(v), np.sin(u) * np.sin(v), np.cos(v)], -1).reshape(-1, 3)
    moved = pts @ g.matrix.T
    brute = np.max(np.arccos(np.clip(np.sum(pts * moved, 1), -1, 1)))
    assert op_norm_group(g) == pytest.approx(theta, abs=1e-9)
    assert brute == pytest.approx(theta, abs=0.02)


@pytest.mark.parametrize("phi", [0.1, 0.5, 1.2, 2.0])
def test_su2_diagonal_norm(phi):
    # diag(e^{i phi}, e^{-i phi}) acts on the adjoint with phases 0, +-2 phi
    g = make_group_element(np.diag([np.exp(1j * phi), np.exp(-1j * phi)]), su(2))
    expected = min(2 * phi, 2 * math.pi - 2 * phi)
    assert op_norm_group(g) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_norm_methods_agree(kind):
    for g in haar(kind, 200, 1):
        assert op_norm_group(g) == pytest.approx(op_norm_group_eigenphases(g), abs=1e-9)
        assert 0 <= op_norm_group(g) <= math.pi + 1e-12


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_algebra_norm_methods_and_constant(kind):
    rng = np.random.default_rng(2)
    c = algebra_norm_constant(kind)
    worst = 0.0
    for _ in range(300):
        coords = rng.standard_normal(kind.algebra_dim)
        x = AlgebraVector.from_coords(coords, kind)
        assert op_norm_algebra(x) == pytest.approx(op_norm_algebra_eigenphases(x), abs=1e-10)
        worst = max(worst, op_norm_algebra(x) / np.linalg.norm(coords))
    assert worst <= c + 1e-12
    # the constant is attained: by a basis vector for su and so(3); for
    # so(d >= 4) by two commuting generators (E12 - E21 + E34 - E43) / 2
    best_basis = max(op_norm_algebra(e) for e in algebra_basis(kind))
    assert best_basis <= c + 1e-12
    f = kind.simple_factors[0]
    if f.family == "so" and f.d >= 4 and kind.family != "product":
        m = np.zeros((f.d, f.d))
        m[1, 0], m[3, 2] = 0.5, 0.5
        best_basis = op_norm_algebra(AlgebraVector(m - m.T, kind))
    assert best_basis == pytest.approx(c)


def test_identity_and_central_elements_have_norm_zero():
    assert op_norm_group(GroupElement.identity(su(3))) == 0
    assert op_norm_group(make_group_element(-np.eye(2), su(2))) == pytest.approx(0, abs=1e-12)
    assert op_norm_group(make_group_element(-np.eye(4), so(4))) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("kind", [su(2), su(3), so(3), so(4)], ids=str)
def test_triangle_and_bi_invariance(kind):
    gs, hs, us = haar(kind, 50, 1), haar(kind, 50, 2), haar(kind, 50, 3)
    for g, h, u in zip(gs, hs, us):
        assert op_norm_group(g @ h) <= op_norm_group(g) + op_norm_group(h) + 1e-9
        d = distance(g, h)
        assert distance(u @ g, u @ h) == pytest.approx(d, abs=1e-9)
        assert distance(g @ u, h @ u) == pytest.approx(d, abs=1e-9)
        assert op_norm_group(g.inverse()) == pytest.approx(op_norm_group(g), abs=1e-12)


def test_distance_kind_mismatch():
    with pytest.raises(ValidationError):
        distance(rot_z(0.1), GroupElement.identity(su(2)))


# --- exp and log -------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(
    kind=st.sampled_from([su(2), su(3), so(3), so(4), product(so(3), su(2))]),
    seed=st.integers(0, 2**32 - 1),
    frac=st.floats(0.0, 0.999),
)
def test_exp_log_roundtrip(kind, seed, frac):
    norm = frac * (2 * math.pi / 3 - 1e-3)
    x = random_algebra_vector(kind, seed, norm=norm) if norm > 0 else AlgebraVector(np.zeros((kind.d, kind.d)), kind)
    g = exp_map(x)
    assert op_norm_group(g) == pytest.approx(op_norm_algebra(x), abs=1e-8)
    assert np.max(np.abs(log_map(g).matrix - x.matrix)) < 1e-8


def test_log_of_central_element_is_zero():
    x = log_map(make_group_element(-np.eye(2), su(2)))
    assert np.allclose(x.matrix, 0)
    w = np.exp(2j * math.pi / 3)
    y = log_map(make_group_element(w * np.eye(3), su(3)))
    assert np.allclose(y.matrix, 0, atol=1e-12)


def test_log_outside_domain():
    with pytest.raises(DomainError):
        log_map(rot_z(2 * math.pi / 3))
    log_map(rot_z(2 * math.pi / 3 - 1e-3))


def test_exp_of_large_vector_wraps():
    # exp is defined everywhere; the norm only agrees inside the ball
    x = random_algebra_vector(so(3), 0, norm=3.0)
    assert op_norm_group(exp_map(x)) == pytest.approx(3.0)
    x = random_algebra_vector(so(3), 0, norm=4.0)
    assert op_norm_group(exp_map(x)) == pytest.approx(2 * math.pi - 4.0)


def test_path_length_bounds_norm():
    rng = np.random.default_rng(4)
    for kind in (su(2), so(3), su(3)):
        pts = [GroupElement.identity(kind)]
        for _ in range(30):
            pts.append(pts[-1] @ exp_map(random_algebra_vector(kind, rng, norm=0.2)))
        assert path_length(pts) >= op_norm_group(pts[-1]) - 1e-9
        # a one-parameter subgroup has length exactly the parameter range
        x = random_algebra_vector(kind, rng, norm=1.0)
        line = [exp_map(x * t) for t in np.linspace(0, 2.5, 26)]
        assert path_length(line) == pytest.approx(2.5, abs=1e-9)


def test_path_length_rejects_big_gaps():
    with pytest.raises(DomainError):
        path_length([GroupElement.identity(so(3)), rot_z(2.5)])


# --- Haar sampling -----------------------------------------------------------


@pytest.mark.parametrize("kind", [su(2), su(3), so(3), so(4)], ids=str)
def test_haar_moments(kind):
    mats = haar_batch(kind, 20000, 0)
    assert np.max(np.abs(mats.mean(axis=0))) < 0.05
    # the defining representation is irreducible, so E|tr g|^2 = 1
    assert np.mean(np.abs(np.trace(mats, axis1=1, axis2=2)) ** 2) == pytest.approx(1, abs=0.06)
    dets = np.linalg.det(mats)
    assert np.allclose(dets, 1, atol=1e-9)


def test_haar_is_seeded():
    assert np.array_equal(haar_batch(su(3), 5, 7), haar_batch(su(3), 5, 7))
    assert not np.allclose(haar_batch(su(3), 5, 7), haar_batch(su(3), 5, 8))
