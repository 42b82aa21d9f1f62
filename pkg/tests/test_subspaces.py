import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liediam.errors import DomainError, ValidationError
from liediam.groups import GroupElement, adjoint_matrix, haar_batch, op_norm_group, product, so, su
from liediam.subspaces import (
    LargeAngleNotFound,
    Subspace,
    adjoint_representation,
    angle_between,
    defining_representation,
    find_large_angle,
    perp,
    random_subspace,
    schur_average,
    trace_of_product,
    vector_angle,
)


def brute_angle(U: Subspace, W: Subspace, n_samples=20000, seed=0) -> float:
    # max over sampled unit u in U (and w in W) of arccos |P u|
    rng = np.random.default_rng(seed)
    best = 0.0
    for A, B in ((U, W), (W, U)):
        c = rng.standard_normal((A.dim, n_samples))
        vecs = A.basis @ (c / np.linalg.norm(c, axis=0))
        cos = np.linalg.norm(B.basis.conj().T @ vecs, axis=0)
        best = max(best, float(np.arccos(np.clip(cos, 0, 1)).max()))
    return best


def test_subspace_validation():
    with pytest.raises(ValidationError):
        Subspace(np.eye(3))
    with pytest.raises(ValidationError):
        Subspace(np.array([[1.0], [1.0], [0.0]]))
    W = Subspace.span(np.array([[1.0], [1.0], [0.0]]))
    assert W.dim == 1 and W.ambient_dim == 3


def test_line_angles():
    u = Subspace.span(np.array([1.0, 0.0]))
    for t in np.linspace(0, math.pi, 13):
        w = Subspace.span(np.array([math.cos(t), math.sin(t)]))
        expected = min(t, math.pi - t)
        assert angle_between(u, w) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n, k, l", [(3, 1, 2), (3, 2, 2), (4, 2, 2), (5, 2, 3)])
def test_angle_matches_brute_force(n, k, l):
    rng = np.random.default_rng(n * 100 + k * 10 + l)
    for _ in range(5):
        U, W = random_subspace(n, k, rng), random_subspace(n, l, rng)
        brute = brute_angle(U, W)
        assert brute <= angle_between(U, W) + 1e-12
        assert angle_between(U, W) - brute < 0.03


def test_different_dimensions_give_right_angle():
    rng = np.random.default_rng(1)
    U, W = random_subspace(5, 2, rng), random_subspace(5, 3, rng)
    assert angle_between(U, W) == pytest.approx(math.pi / 2)


def test_vector_angle_accuracy():
    u = np.array([1.0, 0.0])
    assert vector_angle(u, np.array([1.0, 1e-10])) == pytest.approx(1e-10, rel=1e-6)
    assert vector_angle(u, -u) == pytest.approx(math.pi)
    with pytest.raises(ValidationError):
        vector_angle(u, np.zeros(2))


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(2, 10),
    seed=st.integers(0, 2**32 - 1),
    cplx=st.booleans(),
    data=st.data(),
)
def test_symmetry_and_perp(n, seed, cplx, data):
    k = data.draw(st.integers(1, n - 1))
    l = data.draw(st.integers(1, n - 1))
    rng = np.random.default_rng(seed)
    U, W = random_subspace(n, k, rng, cplx), random_subspace(n, l, rng, cplx)
    a = angle_between(U, W)
    assert 0 <= a <= math.pi / 2 + 1e-12
    assert a == angle_between(W, U)
    assert a == pytest.approx(angle_between(perp(U), perp(W)), abs=1e-8)


def test_perp_is_complement():
    W = random_subspace(6, 2, 3, complex_=True)
    P = perp(W)
    assert P.dim == 4
    assert np.allclose(W.basis.conj().T @ P.basis, 0, atol=1e-12)


def test_angle_invariant_under_isometries():
    rng = np.random.default_rng(5)
    for _ in range(20):
        U, W = random_subspace(6, 3, rng), random_subspace(6, 3, rng)
        q = np.linalg.qr(rng.standard_normal((6, 6)))[0]
        assert angle_between(U.transformed(q), W.transformed(q)) == pytest.approx(angle_between(U, W), abs=1e-10)


def test_trace_of_product():
    rng = np.random.default_rng(0)
    A, B = rng.standard_normal((3, 5)), rng.standard_normal((5, 3))
    assert trace_of_product(A, B) == pytest.approx(np.trace(A @ B))
    with pytest.raises(ValidationError):
        trace_of_product(A, A)


def test_trace_bounded_by_rank_times_norm():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n, r = 8, int(rng.integers(1, 9))
        A = rng.standard_normal((n, r)) @ rng.standard_normal((r, n))
        assert abs(np.trace(A)) <= r * np.linalg.norm(A, 2) * (1 + 1e-12)


# --- representations ------------------------------------------------------------


@pytest.mark.parametrize("kind", [su(2), su(3), so(3), so(4), product(so(3), so(3))], ids=str)
def test_representations_are_homomorphisms(kind):
    for rep in (adjoint_representation(kind), defining_representation(kind)):
        assert rep.homomorphism_error(0) < 1e-12


def test_adjoint_angle_bounded_by_norm():
    rng = np.random.default_rng(2)
    for kind in (su(2), su(3), so(3)):
        rep = adjoint_representation(kind)
        for m in haar_batch(kind, 50, rng):
            g = GroupElement(m, kind)
            W = random_subspace(rep.dim, int(rng.integers(1, rep.dim)), rng)
            assert angle_between(W, W.transformed(adjoint_matrix(g))) <= op_norm_group(g) + 1e-9


def test_schur_average_identity_only():
    # averaging over {e} gives the projection onto W itself
    rep = adjoint_representation(su(2))
    W = random_subspace(3, 1, 0)
    M, dev = schur_average(rep, W, 0, 0, samples=[GroupElement.identity(su(2))])
    assert np.allclose(M, W.projection)
    assert dev == pytest.approx(np.linalg.norm(W.projection - np.eye(3) / 3, 2))


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_schur_average_converges(seed):
    rep = adjoint_representation(su(2))
    W = random_subspace(3, 1, seed)
    M, dev = schur_average(rep, W, 20000, seed)
    assert dev <= 0.02
    assert np.trace(M) == pytest.approx(1.0)


def test_schur_average_complex_rep():
    rep = defining_representation(su(3))
    W = random_subspace(3, 1, 4, complex_=True)
    _, dev = schur_average(rep, W, 20000, 4)
    assert dev <= 0.02


def test_schur_average_preconditions():
    rep = adjoint_representation(su(2))
    W = random_subspace(3, 1, 0)
    with pytest.raises(DomainError):
        schur_average(rep, W, 50, 0)
    with pytest.raises(DomainError):
        schur_average(adjoint_representation(product(so(3), so(3))), random_subspace(6, 1, 0), 1000, 0)
    with pytest.raises(ValidationError):
        schur_average(rep, random_subspace(4, 1, 0), 1000, 0)


@pytest.mark.parametrize("kind", [su(2), su(3), so(3)], ids=str)
def test_find_large_angle(kind):
    rep = adjoint_representation(kind)
    rng = np.random.default_rng(9)
    for _ in range(4):
        W = random_subspace(rep.dim, int(rng.integers(1, rep.dim)), rng)
        g, a = find_large_angle(rep, W, 2000, rng)
        assert a >= math.pi / 4 - 1e-3
        assert angle_between(W, W.transformed(rep.action(g))) == pytest.approx(a)


def test_large_angle_failure_is_reported():
    # one Haar draw and no refinement: find a seed whose draw falls short
    rep = adjoint_representation(su(2))
    W = random_subspace(3, 1, 0)
    seed = next(s for s in range(100) if find_large_angle(rep, W, 1, s, 0, require=False)[1] < math.pi / 4 - 1e-3)
    with pytest.raises(LargeAngleNotFound) as info:
        find_large_angle(rep, W, 1, seed, refine_steps=0)
    assert info.value.angle < math.pi / 4 - 1e-3
