"""Angles between subspaces, Schur averaging and the large-angle search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, ValidationError
from .groups import (
    AlgebraVector,
    GroupElement,
    GroupKind,
    adjoint_batch,
    exp_map,
    haar_batch,
    make_group_element,
)

TOL_ORTHONORMAL = 1e-10


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace spanned by the orthonormal columns of ``basis`` (n x k)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis)
        if b.ndim != 2 or b.shape[1] < 1:
            raise ValidationError("basis must be an n x k matrix with k >= 1")
        if b.shape[1] >= b.shape[0]:
            raise ValidationError(f"subspace must be proper: k={b.shape[1]}, n={b.shape[0]}")
        err = np.max(np.abs(b.conj().T @ b - np.eye(b.shape[1])))
        if err > TOL_ORTHONORMAL:
            raise ValidationError(f"basis columns are not orthonormal (deviation {err:.3g})")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projection(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @classmethod
    def span(cls, vectors) -> "Subspace":
        """Subspace spanned by the columns of ``vectors`` (any full-rank set)."""
        v = np.asarray(vectors)
        if v.ndim == 1:
            v = v[:, None]
        return cls(scipy.linalg.orth(v))

    def transformed(self, matrix: np.ndarray) -> "Subspace":
        """Image under a unitary (or orthogonal) matrix."""
        return Subspace(np.asarray(matrix) @ self.basis)


def random_subspace(n: int, k: int, rng, complex_: bool = False) -> Subspace:
    rng = np.random.default_rng(rng)
    z = rng.standard_normal((n, k))
    if complex_:
        z = z + 1j * rng.standard_normal((n, k))
    q, _ = np.linalg.qr(z)
    return Subspace(q)


def vector_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Euclidean angle in [0, pi] between two nonzero vectors."""
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValidationError("angle with a zero vector is undefined")
    a, b = u / nu, v / nv
    return float(2 * np.arctan2(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def _one_sided(u: np.ndarray, w: np.ndarray) -> float:
    # sup over unit u in U of the angle to W.  sine = |(1 - P_W) U|_op and
    # cosine = smallest singular value of W^H U; atan2 keeps both ends accurate.
    resid = u - w @ (w.conj().T @ u)
    s = np.linalg.norm(resid, 2)
    if u.shape[1] > w.shape[1]:
        c = 0.0
    else:
        c = np.linalg.svd(w.conj().T @ u, compute_uv=False)[-1]
    return float(np.arctan2(s, c))


def angle_between(U: Subspace, W: Subspace) -> float:
    """Largest angle from either subspace to the other, in [0, pi/2]."""
    if U.ambient_dim != W.ambient_dim:
        raise ValidationError("subspaces live in different ambient spaces")
    return max(_one_sided(U.basis, W.basis), _one_sided(W.basis, U.basis))


def perp(W: Subspace) -> Subspace:
    """Orthogonal complement."""
    return Subspace(scipy.linalg.null_space(W.basis.conj().T))


def trace_of_product(A: np.ndarray, B: np.ndarray):
    A, B = np.asarray(A), np.asarray(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0] or A.shape[0] != B.shape[1]:
        raise ValidationError(f"incompatible shapes {A.shape} and {B.shape}")
    # sum_ij A_ij B_ji without forming the product
    t = np.einsum("ij,ji->", A, B)
    return float(t.real) if np.isrealobj(t) or abs(t.imag) == 0 else complex(t)


# --------------------------------------------------------------------------
# representations


@dataclass(frozen=True)
class Representation:
    """A representation of ``kind`` on an ``dim``-dimensional space.

    ``action_batch`` maps a stack of defining matrices (n, d, d) to the
    representing matrices (n, dim, dim).
    """

    kind: GroupKind
    dim: int
    action_batch: Callable[[np.ndarray], np.ndarray]
    irreducible: bool = False
    name: str = ""

    def action(self, g: GroupElement) -> np.ndarray:
        return self.action_batch(g.matrix[None])[0]

    def homomorphism_error(self, rng, trials: int = 20) -> float:
        """max |rho(gh) - rho(g) rho(h)| over random pairs, and |rho(e) - 1|."""
        a = haar_batch(self.kind, trials, rng)
        b = haar_batch(self.kind, trials, rng)
        lhs = self.action_batch(a @ b)
        rhs = self.action_batch(a) @ self.action_batch(b)
        ident = self.action_batch(np.eye(self.kind.d)[None])[0]
        return float(max(np.abs(lhs - rhs).max(), np.abs(ident - np.eye(self.dim)).max()))


def adjoint_representation(kind: GroupKind) -> Representation:
    # the adjoint rep of a simple factor has irreducible complexification
    simple = kind.family != "product"
    return Representation(
        kind,
        kind.algebra_dim,
        lambda mats: adjoint_batch(mats, kind),
        irreducible=simple,
        name=f"Ad[{kind}]",
    )


def defining_representation(kind: GroupKind) -> Representation:
    simple = kind.family != "product"
    return Representation(kind, kind.d, lambda mats: np.asarray(mats), irreducible=simple, name=f"def[{kind}]")


def _sample_projections(rep: Representation, W: Subspace, mats: np.ndarray) -> np.ndarray:
    moved = rep.action_batch(mats) @ W.basis
    return moved @ moved.conj().transpose(0, 2, 1)


def schur_average(
    rep: Representation,
    W: Subspace,
    num_samples: int,
    seed,
    samples: Sequence[GroupElement] | None = None,
    chunk: int = 4096,
) -> tuple[np.ndarray, float]:
    """Monte-Carlo average of the projections onto gW over the group.

    Returns ``(M, |M - (k/n) 1|_op)``.  For an irreducible representation the
    exact average is ``(k/n) 1``, so the deviation shrinks like
    ``1/sqrt(num_samples)``.  Passing explicit ``samples`` replaces the Haar
    draws (used to check the degenerate single-sample average).
    """
    if W.ambient_dim != rep.dim:
        raise ValidationError("subspace does not live in the representation space")
    if samples is not None:
        mats = np.array([g.matrix for g in samples])
        M = _sample_projections(rep, W, mats).mean(axis=0)
    else:
        if not rep.irreducible:
            raise DomainError("schur_average needs an irreducible representation")
        if num_samples < 100:
            raise DomainError("schur_average needs at least 100 samples")
        total = np.zeros((rep.dim, rep.dim), complex)
        done = 0
        task = 0
        while done < num_samples:
            m = min(chunk, num_samples - done)
            mats = haar_batch(rep.kind, m, np.random.default_rng([int(seed), task]))
            total += _sample_projections(rep, W, mats).sum(axis=0)
            done += m
            task += 1
        M = total / num_samples
    if np.isrealobj(W.basis) and np.max(np.abs(np.imag(M))) < 1e-14:
        M = np.real(M)
    deviation = float(np.linalg.norm(M - W.dim / rep.dim * np.eye(rep.dim), 2))
    return M, deviation


# --------------------------------------------------------------------------
# large-angle search


class LargeAngleNotFound(RuntimeError):
    """The search budget ran out before an angle of at least pi/4 was reached."""

    def __init__(self, element: GroupElement, angle: float):
        super().__init__(f"best angle {angle:.6f} is below pi/4 - 1e-3")
        self.element = element
        self.angle = angle


def _batch_angles(rep: Representation, W: Subspace, mats: np.ndarray) -> np.ndarray:
    moved = rep.action_batch(mats) @ W.basis
    b = W.basis
    # one side: vectors of gW measured against W
    r1 = moved - b @ (b.conj().T @ moved)
    r2 = b - moved @ (moved.conj().transpose(0, 2, 1) @ b)
    s = np.maximum(np.linalg.norm(r1, 2, axis=(1, 2)), np.linalg.norm(r2, 2, axis=(1, 2)))
    c1 = np.linalg.svd(b.conj().T @ moved, compute_uv=False)[:, -1]
    return np.arctan2(s, c1)


def refine_on_group(
    objective_batch: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    kind: GroupKind,
    steps: int = 200,
    initial_step: float = 0.1,
    min_step: float = 1e-6,
) -> tuple[np.ndarray, float]:
    """Coordinate search maximizing ``objective_batch`` along g exp(+-eps e_i).

    Each step evaluates all 2N multiplicative perturbations of the current
    point, moves to the best one if it improves, and halves ``eps`` otherwise.
    """
    n = kind.algebra_dim
    directions = []
    for i in range(n):
        c = np.zeros(n)
        c[i] = 1.0
        directions.append(AlgebraVector.from_coords(c, kind))
    current = np.asarray(start)
    best = float(objective_batch(current[None])[0])
    eps = initial_step
    for _ in range(steps):
        if eps < min_step:
            break
        moves = []
        for e in directions:
            moves.append(exp_map(e * eps).matrix)
            moves.append(exp_map(e * -eps).matrix)
        cand = current[None] @ np.array(moves)
        vals = objective_batch(cand)
        i = int(np.argmax(vals))
        if vals[i] > best:
            current, best = cand[i], float(vals[i])
        else:
            eps /= 2
    return current, best


def find_large_angle(
    rep: Representation,
    W: Subspace,
    budget: int,
    seed,
    refine_steps: int = 200,
    require: bool = True,
) -> tuple[GroupElement, float]:
    """Search for g with angle(W, gW) >= pi/4.

    Draws ``budget`` Haar samples, keeps the best, then refines it with
    multiplicative coordinate steps.  Raises :class:`LargeAngleNotFound` when
    the result stays below ``pi/4 - 1e-3`` and ``require`` is set.
    """
    if W.ambient_dim != rep.dim:
        raise ValidationError("subspace does not live in the representation space")
    if not rep.irreducible:
        raise DomainError("find_large_angle needs an irreducible representation")
    rng = np.random.default_rng(seed)
    best_mat, best = None, -1.0
    done = 0
    while done < budget:
        m = min(4096, budget - done)
        mats = haar_batch(rep.kind, m, rng)
        vals = _batch_angles(rep, W, mats)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best_mat, best = mats[i], float(vals[i])
        done += m
    if best < np.pi / 2 - 1e-12:
        best_mat, best = refine_on_group(
            lambda mats: _batch_angles(rep, W, mats), best_mat, rep.kind, steps=refine_steps
        )
    g = make_group_element(best_mat, rep.kind)
    angle = angle_between(W, W.transformed(rep.action(g)))
    if require and angle < np.pi / 4 - 1e-3:
        raise LargeAngleNotFound(g, angle)
    return g, angle
