"""Iterated commutators and the witness pair of noncommuting nearby elements."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ALPHA, BETA, BetaSolution, contraction_constant
from .errors import BoundViolation, DomainError, ValidationError
from .groups import (
    AlgebraVector,
    GroupElement,
    adjoint_matrix,
    distance,
    exp_map,
    op_norm_group,
    so,
)
from .subspaces import vector_angle


def commutator(a: GroupElement, b: GroupElement) -> GroupElement:
    """a b a^-1 b^-1."""
    return a @ b @ a.inverse() @ b.inverse()


@dataclass
class CommutatorTrace:
    elements: list[GroupElement]
    norms: list[float]
    contraction_ratios: list[float]
    converged: bool
    contraction: float = field(default=float("nan"))

    def decay_violations(self, slack: float = 0.0) -> list[int]:
        """Indices n where norms[n] > C^n pi/2 + slack."""
        return [
            n for n, v in enumerate(self.norms) if v > self.contraction**n * math.pi / 2 + slack
        ]


def commutator_sequence(
    h: GroupElement, k: GroupElement, max_iter: int = 200, halt_tol: float = 1e-12
) -> CommutatorTrace:
    """h_0 = h, h_{n+1} = [h_n, k] until |h_n| < halt_tol or max_iter steps.

    Requires |h| < pi/2 and |k| < alpha, where every ratio |h_{n+1}|/|h_n|
    is bounded by C(|k|) < 1.
    """
    nh, nk = op_norm_group(h), op_norm_group(k)
    if nh >= math.pi / 2:
        raise DomainError(f"|h|_G = {nh:.6f} must be below pi/2")
    if nk >= ALPHA:
        raise DomainError(f"|k|_G = {nk:.6f} must be below alpha")
    elements, norms, ratios = [h], [nh], []
    converged = nh < halt_tol
    while not converged and len(elements) <= max_iter:
        nxt = commutator(elements[-1], k)
        n = op_norm_group(nxt)
        ratios.append(n / norms[-1])
        elements.append(nxt)
        norms.append(n)
        converged = n < halt_tol
    return CommutatorTrace(elements, norms, ratios, converged, contraction_constant(nk))


def _so3_generator(axis: int, angle: float) -> AlgebraVector:
    # infinitesimal rotation by `angle` about coordinate axis 0, 1 or 2
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    m = np.zeros((3, 3))
    m[j, i], m[i, j] = angle, -angle
    return AlgebraVector(m, so(3))


def construct_witness_pair(sol: BetaSolution) -> tuple[GroupElement, GroupElement, np.ndarray]:
    """Rotations h (by pi/2 - beta about z) and k (by alpha - beta about x) in SO(3).

    ``v`` is the unit algebra vector of the z-axis generator, in the
    coordinates of :func:`~liediam.groups.algebra_basis`; it is fixed by
    Ad_h and moved by an angle alpha - beta under Ad_k.
    """
    x = _so3_generator(2, math.pi / 2 - sol.beta)
    y = _so3_generator(0, sol.alpha - sol.beta)
    h, k = exp_map(x), exp_map(y)
    v = x.coords()
    return h, k, v / np.linalg.norm(v)


def _act(g: GroupElement, v: np.ndarray) -> np.ndarray:
    return adjoint_matrix(g) @ v


def witness_angle(h: GroupElement, k: GroupElement, v: np.ndarray) -> float:
    """Angle between Ad_h Ad_k v and Ad_k Ad_h v."""
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) == 0:
        raise ValidationError("v must be nonzero")
    return vector_angle(_act(h, _act(k, v)), _act(k, _act(h, v)))


def perturbation_noncommutation_check(
    h: GroupElement,
    k: GroupElement,
    v: np.ndarray,
    h_pert: GroupElement,
    k_pert: GroupElement,
    beta: float = BETA,
) -> float:
    """Noncommutation angle of a pair within beta of the witness pair.

    Raises :class:`DomainError` if either perturbation is beta or more away,
    and :class:`BoundViolation` if the triangle-inequality consequences
    |h'| < pi/2 and |k'| < alpha fail.
    """
    if distance(h, h_pert) >= beta or distance(k, k_pert) >= beta:
        raise DomainError("perturbation is not within beta of the witness pair")
    if op_norm_group(h_pert) >= math.pi / 2:
        raise BoundViolation("|h'|_G must stay below pi/2")
    if op_norm_group(k_pert) >= ALPHA:
        raise BoundViolation("|k'|_G must stay below alpha")
    return witness_angle(h_pert, k_pert, v)
