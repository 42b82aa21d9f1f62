"""Quotient metrics on G/H: coset distances and diameter estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BoundViolation, NumericalError, ValidationError
from .groups import (
    GroupElement,
    GroupKind,
    algebra_basis,
    block_diag,
    exp_map,
    haar_batch,
    log_map,
    op_norm_algebra,
    op_norm_batch,
    op_norm_group,
    rotation,
    so,
)
from .subspaces import Subspace, refine_on_group

DEDUP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SubgroupSample:
    """Finite list of elements of a closed subgroup H.

    ``exact`` means the list is all of H; otherwise it is a sample of an
    infinite subgroup and coset distances computed from it are upper bounds.
    """

    elements: tuple[GroupElement, ...]
    exact: bool
    name: str = ""

    def __post_init__(self):
        els = tuple(self.elements)
        if not els:
            raise ValidationError("subgroup sample is empty")
        kind = els[0].kind
        if any(e.kind != kind for e in els):
            raise ValidationError("subgroup sample mixes group kinds")
        object.__setattr__(self, "elements", els)
        stack = self.stack
        if _nearest(stack, np.eye(kind.d)) > DEDUP_TOL:
            raise ValidationError("subgroup sample does not contain the identity")
        for m in stack:
            if _nearest(stack, m.conj().T) > DEDUP_TOL:
                raise ValidationError("subgroup sample is not closed under inversion")

    @property
    def kind(self) -> GroupKind:
        return self.elements[0].kind

    @property
    def stack(self) -> np.ndarray:
        return np.array([e.matrix for e in self.elements])

    def __len__(self) -> int:
        return len(self.elements)


def _nearest(stack: np.ndarray, m: np.ndarray) -> float:
    return float(np.min(np.max(np.abs(stack - m), axis=(1, 2))))


def close_under_products(
    generators: Sequence[GroupElement], dedup_tol: float = DEDUP_TOL, max_size: int = 10_000
) -> list[GroupElement]:
    """All products of the generators (a finite group), deduplicated entrywise."""
    kind = generators[0].kind
    found = [np.eye(kind.d, dtype=kind.dtype)]
    frontier = list(found)
    gens = [g.matrix for g in generators]
    while frontier:
        nxt = []
        for a in frontier:
            for b in gens:
                c = a @ b
                if _nearest(np.array(found), c) > dedup_tol:
                    found.append(c)
                    nxt.append(c)
                    if len(found) > max_size:
                        raise NumericalError("closure did not stabilize; generators may not be finite order")
        frontier = nxt
    return [GroupElement(m, kind) for m in found]


def icosahedral_generators() -> tuple[GroupElement, GroupElement]:
    """Rotation by 2pi/5 about a vertex (z axis) and by pi about an adjacent edge midpoint."""
    ring = np.array([2 / math.sqrt(5), 0.0, 1 / math.sqrt(5)])
    mid = np.array([0.0, 0.0, 1.0]) + ring
    return rotation((0, 0, 1), 2 * math.pi / 5), rotation(mid, math.pi)


def icosahedral_group() -> SubgroupSample:
    """The 60 rotations of the icosahedron, with a 5-fold axis along z."""
    els = close_under_products(icosahedral_generators())
    if len(els) != 60:
        raise NumericalError(f"icosahedral closure produced {len(els)} elements, expected 60")
    return SubgroupSample(tuple(els), exact=True, name="icosahedral")


def trivial_subgroup(kind: GroupKind) -> SubgroupSample:
    return SubgroupSample((GroupElement.identity(kind),), exact=True, name="trivial")


def diagonal_subgroup_sample(factor_kind: GroupKind, num: int, seed) -> SubgroupSample:
    """Identity, Haar samples h and their inverses, embedded as (h, h)."""
    mats = haar_batch(factor_kind, num, seed)
    els = [GroupElement.identity(factor_kind)]
    for m in mats:
        g = GroupElement(m, factor_kind)
        els += [g, g.inverse()]
    pairs = tuple(block_diag(e, e) for e in els)
    return SubgroupSample(pairs, exact=False, name=f"diagonal {factor_kind}")


def diagonal_subalgebra(factor_kind: GroupKind) -> Subspace:
    """Lie algebra {(x, x)} of the diagonal, in product-algebra coordinates."""
    n = factor_kind.algebra_dim
    basis = np.vstack([np.eye(n), np.eye(n)]) / math.sqrt(2)
    return Subspace(basis)


# --------------------------------------------------------------------------
# coset distances and diameters


def _coset_distances(mats: np.ndarray, H: SubgroupSample) -> np.ndarray:
    # min over h of |g h| for each g in the stack
    hs = H.stack
    prods = (mats[:, None] @ hs[None]).reshape(-1, H.kind.d, H.kind.d)
    return op_norm_batch(prods, H.kind).reshape(len(mats), len(hs)).min(axis=1)


def coset_distance(g: GroupElement, H: SubgroupSample) -> float:
    """min over the sample of |g h|_G: the distance from gH to H when exact."""
    if g.kind != H.kind:
        raise ValidationError(f"kind mismatch: {g.kind} vs {H.kind}")
    return float(_coset_distances(g.matrix[None], H)[0])


def diameter_lower_estimate(
    kind: GroupKind,
    H: SubgroupSample,
    num_probes: int,
    seed,
    refine_top: int = 16,
    refine_steps: int = 200,
) -> float:
    """Largest coset distance found from Haar probes plus local refinement.

    Every probe value is an actual coset distance when ``H.exact``, so the
    result is a lower bound on diam(G/H).
    """
    if num_probes < 100:
        raise ValidationError("num_probes must be at least 100")
    if H.kind != kind:
        raise ValidationError(f"kind mismatch: {kind} vs {H.kind}")
    rng = np.random.default_rng(seed)
    probes = haar_batch(kind, num_probes, rng)
    vals = np.concatenate([_coset_distances(probes[i : i + 512], H) for i in range(0, num_probes, 512)])
    best = float(vals.max())
    for i in np.argsort(vals)[::-1][:refine_top]:
        _, v = refine_on_group(lambda m: _coset_distances(m, H), probes[i], kind, steps=refine_steps)
        best = max(best, v)
    return best


def so3_grid_diameter(H: SubgroupSample, resolution: float = 0.05, chunk: int = 200_000) -> float:
    """Brute-force max over a ZYZ Euler-angle grid of SO(3) of the coset distance.

    Uses cos(angle) = (trace - 1)/2, so each grid point costs one row of a
    matrix product against the subgroup.
    """
    if H.kind != so(3):
        raise ValidationError("grid brute force is only available for SO(3)")
    a = np.arange(0, 2 * math.pi, resolution)
    b = np.append(np.arange(0, math.pi, resolution), math.pi)
    # tr(g h) = sum_ij g_ij h_ji
    hflat = H.stack.transpose(0, 2, 1).reshape(len(H), 9)
    best = 0.0
    ca, sa = np.cos(a), np.sin(a)
    for bj in b:
        cb, sb = math.cos(bj), math.sin(bj)
        # R = Rz(a) Ry(b) Rz(c) over the (a, c) grid at fixed b
        A, C = np.meshgrid(np.arange(len(a)), np.arange(len(a)), indexing="ij")
        A, C = A.ravel(), C.ravel()
        c1, s1, c3, s3 = ca[A], sa[A], ca[C], sa[C]
        R = np.empty((len(A), 9))
        R[:, 0] = c1 * cb * c3 - s1 * s3
        R[:, 1] = -c1 * cb * s3 - s1 * c3
        R[:, 2] = c1 * sb
        R[:, 3] = s1 * cb * c3 + c1 * s3
        R[:, 4] = -s1 * cb * s3 + c1 * c3
        R[:, 5] = s1 * sb
        R[:, 6] = -sb * c3
        R[:, 7] = sb * s3
        R[:, 8] = cb
        for i in range(0, len(R), chunk):
            tr = R[i : i + chunk] @ hflat.T
            cos_min = np.clip((tr.max(axis=1) - 1) / 2, -1, 1)
            best = max(best, float(np.arccos(cos_min).max()))
    return best


def diagonal_quotient_estimate(factor_kind: GroupKind, num_probes: int, seed, refine_steps: int = 200) -> float:
    """min over h' of max(d(h, h'), |h'|) for an h with |h| = pi.

    This is the distance in H x H from (h, e) to the diagonal, which the
    triangle inequality bounds below by pi/2.
    """
    e0 = algebra_basis(factor_kind)[0]
    h = exp_map(e0 * (math.pi / op_norm_algebra(e0)))
    if abs(op_norm_group(h) - math.pi) > 1e-9:
        raise NumericalError("failed to build an element of norm pi")
    hinv = h.inverse().matrix

    def neg_objective(mats):
        return -np.maximum(op_norm_batch(hinv[None] @ mats, factor_kind), op_norm_batch(mats, factor_kind))

    probes = haar_batch(factor_kind, num_probes, seed)
    vals = np.concatenate([neg_objective(probes[i : i + 4096]) for i in range(0, num_probes, 4096)])
    best = -float(vals.max())
    for i in np.argsort(vals)[::-1][:4]:
        _, v = refine_on_group(neg_objective, probes[i], factor_kind, steps=refine_steps)
        best = min(best, -v)
    return best


def projection_monotonicity_check(g_pair: GroupElement, H: SubgroupSample) -> tuple[float, float]:
    """(distance of g to H in the product, distance after projecting to factor 0)."""
    if g_pair.kind.family != "product" or len(g_pair.kind.factors) != 2:
        raise ValidationError("projection check needs a two-factor product element")
    sl, f = g_pair.kind.blocks()[0]
    projected = SubgroupSample(
        tuple(GroupElement(e.matrix[sl, sl], f) for e in H.elements), exact=H.exact
    )
    return coset_distance(g_pair, H), coset_distance(GroupElement(g_pair.matrix[sl, sl], f), projected)


def killing_scale(f: GroupKind) -> float:
    """B(x, y) = scale * trace(x y) on a simple factor."""
    return 2.0 * f.d if f.family == "su" else float(f.d - 2)


def killing_comparison(g: GroupElement, tol: float = 1e-9) -> tuple[float, float, int]:
    """(|g|_G, Killing length of log g, dim g) with d <= d_K <= (3 sqrt(N)/2) d checked."""
    d = op_norm_group(g)
    x = log_map(g)
    total = 0.0
    for sl, f in g.kind.blocks():
        block = x.matrix[sl, sl]
        total += -killing_scale(f) * float(np.trace(block @ block).real)
    d_k = math.sqrt(max(total, 0.0))
    n = g.kind.algebra_dim
    if d > d_k + tol or d_k > 1.5 * math.sqrt(n) * d + tol:
        raise BoundViolation(f"Killing comparison failed: d={d}, d_K={d_k}, N={n}")
    return d, d_k, n

