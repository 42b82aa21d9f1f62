"""Gate-set universality testing by word enumeration and ball coverage.

A gate set generating a closed subgroup H is declared universal once every
point of the 2*beta ball around the identity is within beta of H.  The
ball is replaced by a finite net; a net point covered with distance at most
``beta - spacing`` certifies every ball point within ``spacing`` of it.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .constants import BETA
from .errors import DomainError, ValidationError
from .groups import (
    LOG_RADIUS,
    AlgebraVector,
    GroupElement,
    GroupKind,
    adjoint_batch,
    algebra_norm_constant,
    op_norm_batch,
    rot_x,
    rot_z,
    so,
    _basis_stack,
)
from .quotient import icosahedral_generators

UNIVERSAL = "Universal"
NOT_UNIVERSAL = "NotUniversal"
INCONCLUSIVE = "Inconclusive"

DEFAULT_WORD_CAP = 2_000_000
DEFAULT_NET_CAP = 2_000_000


@dataclass(frozen=True)
class GateSet:
    kind: GroupKind
    gates: tuple[GroupElement, ...]
    labels: tuple[str, ...]
    include_inverses: bool = True

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.gates:
            raise ValidationError("a gate set needs at least one gate")
        if len(self.labels) != len(self.gates):
            raise ValidationError("labels and gates differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("gate labels must be distinct")
        if any(g.kind != self.kind for g in self.gates):
            raise ValidationError("all gates must belong to the gate set's group kind")

    def letters(self) -> tuple[list[str], list[np.ndarray]]:
        names = list(self.labels)
        mats = [g.matrix for g in self.gates]
        if self.include_inverses:
            names += [f"{lab}^-1" for lab in self.labels]
            mats += [g.matrix.conj().T for g in self.gates]
        return names, mats


def two_rotations_gate_set(angle: float = 1.0) -> GateSet:
    """Rotations by ``angle`` radians about z and about x in SO(3)."""
    return GateSet(so(3), (rot_z(angle), rot_x(angle)), ("Rz", "Rx"))


def icosahedral_gate_set() -> GateSet:
    five, two = icosahedral_generators()
    return GateSet(so(3), (five, two), ("R5", "R2"))


# --------------------------------------------------------------------------
# word enumeration


@dataclass
class WordStore:
    """Deduplicated elements reached by words in the generators.

    Words are kept as parent pointers: element ``i`` equals element
    ``parent[i]`` times letter ``letter[i]`` on the right.
    """

    kind: GroupKind
    letter_names: list[str]
    letter_matrices: list[np.ndarray]
    matrices: np.ndarray
    keys: np.ndarray
    parent: np.ndarray
    letter: np.ndarray
    lengths: np.ndarray
    levels_explored: int
    closure_detected: bool
    truncated: bool
    level_sizes: list[int] = field(default_factory=list)
    dedup_tol: float = 1e-6

    def __len__(self) -> int:
        return len(self.matrices)

    @property
    def max_length(self) -> int:
        """Length of the longest stored (shortest-representative) word."""
        return int(self.lengths.max())

    @property
    def group_order(self) -> int | None:
        return len(self) if self.closure_detected else None

    def word_indices(self, i: int) -> list[int]:
        out = []
        while self.parent[i] >= 0:
            out.append(int(self.letter[i]))
            i = int(self.parent[i])
        return out[::-1]

    def word(self, i: int) -> list[str]:
        return [self.letter_names[j] for j in self.word_indices(i)]

    def multiply_out(self, i: int) -> np.ndarray:
        m = np.eye(self.kind.d, dtype=self.kind.dtype)
        for j in self.word_indices(i):
            m = m @ self.letter_matrices[j]
        return m

    def element(self, i: int) -> GroupElement:
        return GroupElement(self.matrices[i], self.kind)


def _dedup_new(keys: np.ndarray, store_tree: cKDTree | None, tol: float) -> np.ndarray:
    """Indices of rows not within tol of the store or of an earlier kept row."""
    if store_tree is not None and len(keys):
        dist, _ = store_tree.query(keys, k=1)
        fresh = np.flatnonzero(dist > tol)
    else:
        fresh = np.arange(len(keys))
    if len(fresh) < 2:
        return fresh
    pairs = cKDTree(keys[fresh]).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return fresh
    keep = np.ones(len(fresh), dtype=bool)
    # lexicographic order settles every pair (h, i) before any pair (i, j)
    for i, j in pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]:
        if keep[i]:
            keep[j] = False
    return fresh[keep]


def generate_words(
    gates: GateSet, max_length: int, dedup_tol: float = 1e-6, cap: int = DEFAULT_WORD_CAP
) -> WordStore:
    """Breadth-first enumeration of words up to ``max_length``.

    Elements are deduplicated by Euclidean distance between adjoint
    matrices, which ignores global phases.  If a whole level adds nothing new
    the generated group is finite and equal to the store.
    """
    if max_length < 1:
        raise DomainError("max_length must be at least 1")
    if not 1e-9 <= dedup_tol <= 1e-3:
        raise DomainError("dedup_tol must lie in [1e-9, 1e-3]")
    kind = gates.kind
    names, mats = gates.letters()
    letter_ad = adjoint_batch(np.array(mats), kind)
    n_ad = kind.algebra_dim

    matrices = [np.eye(kind.d, dtype=kind.dtype)[None]]
    ads = [np.eye(n_ad)[None]]
    parents = [np.array([-1])]
    letters = [np.array([-1])]
    lengths = [np.array([0])]
    size = 1
    frontier = np.array([0])
    all_mats = matrices[0]
    all_ads = ads[0]
    closure = truncated = False
    level_sizes = [1]
    reached = 0

    for length in range(1, max_length + 1):
        tree = cKDTree(all_ads.reshape(size, -1))
        cand_m = (all_mats[frontier][:, None] @ np.array(mats)[None]).reshape(-1, kind.d, kind.d)
        cand_a = (all_ads[frontier][:, None] @ letter_ad[None]).reshape(-1, n_ad, n_ad)
        cand_p = np.repeat(frontier, len(mats))
        cand_l = np.tile(np.arange(len(mats)), len(frontier))
        new = _dedup_new(cand_a.reshape(len(cand_a), -1), tree, dedup_tol)
        reached = length
        if len(new) == 0:
            closure = True
            break
        if size + len(new) > cap:
            new = new[: cap - size]
            truncated = True
        matrices.append(cand_m[new])
        ads.append(cand_a[new])
        parents.append(cand_p[new])
        letters.append(cand_l[new])
        lengths.append(np.full(len(new), length))
        frontier = np.arange(size, size + len(new))
        size += len(new)
        all_mats = np.concatenate(matrices)
        all_ads = np.concatenate(ads)
        matrices, ads = [all_mats], [all_ads]
        level_sizes.append(len(new))
        if truncated:
            break

    return WordStore(
        kind=kind,
        letter_names=names,
        letter_matrices=mats,
        matrices=all_mats,
        keys=all_ads.reshape(size, -1),
        parent=np.concatenate(parents),
        letter=np.concatenate(letters),
        lengths=np.concatenate(lengths),
        levels_explored=reached,
        closure_detected=closure,
        truncated=truncated,
        level_sizes=level_sizes,
        dedup_tol=dedup_tol,
    )


# --------------------------------------------------------------------------
# ball nets


@dataclass(frozen=True, eq=False)
class BallNet(Sequence):
    """Net of the ball |g|_G <= radius: every ball point is within ``spacing``."""

    kind: GroupKind
    radius: float
    spacing: float
    coords: np.ndarray
    matrices: np.ndarray
    lattice_step: float

    def __len__(self) -> int:
        return len(self.matrices)

    def __getitem__(self, i):
        return GroupElement(self.matrices[i], self.kind)


def _algebra_matrices(coords: np.ndarray, kind: GroupKind) -> np.ndarray:
    return np.tensordot(coords, _basis_stack(kind), axes=1)


def _algebra_norms(xs: np.ndarray, kind: GroupKind) -> np.ndarray:
    out = np.zeros(len(xs))
    for sl, f in kind.blocks():
        theta = np.linalg.eigvalsh(-1j * xs[:, sl, sl])
        if f.family == "su":
            out = np.maximum(out, theta[:, -1] - theta[:, 0])
        else:
            j, k = np.triu_indices(theta.shape[1], 1)
            out = np.maximum(out, np.abs(theta[:, j] + theta[:, k]).max(axis=1))
    return out


def _exp_batch(xs: np.ndarray, kind: GroupKind) -> np.ndarray:
    out = np.zeros(xs.shape, complex)
    for sl, _ in kind.blocks():
        theta, u = np.linalg.eigh(-1j * xs[:, sl, sl])
        out[:, sl, sl] = (u * np.exp(1j * theta)[:, None, :]) @ u.conj().transpose(0, 2, 1)
    return out.real if kind.is_real else out


def ball_net(kind: GroupKind, radius: float, spacing: float, cap: int = DEFAULT_NET_CAP) -> BallNet:
    """Lattice net of the operator-norm ball, built in logarithmic coordinates.

    With c = sup |x|_g / |x| over the algebra, a cubic lattice of step
    ``spacing / (max(1, c) sqrt(N))`` has covering radius at most spacing/2
    in |.|_g.  Lattice points up to that far outside the ball are pulled
    radially onto its boundary, which costs at most another spacing/2, and
    exp does not increase |.|_g-distances.  So every point of the ball lies
    within ``spacing`` of a net point, and every net point has norm <= radius.
    """
    if spacing <= 0:
        raise DomainError("spacing must be positive")
    if radius < 0 or radius + spacing >= LOG_RADIUS:
        raise DomainError("radius + spacing must stay below 2pi/3")
    n = kind.algebra_dim
    c = algebra_norm_constant(kind)
    step = spacing / (max(1.0, c) * math.sqrt(n))
    cover = c * step * math.sqrt(n) / 2
    # |x|_g >= |x| / sqrt(d) bounds the Euclidean extent of the enlarged ball
    reach = (radius + cover) * math.sqrt(kind.d)
    m = int(math.floor(reach / step))
    if (2 * m + 1) ** n > 50 * cap:
        raise DomainError(f"net for {kind} at spacing {spacing} is too large")
    axis = np.arange(-m, m + 1) * step
    keep_coords = []
    for head in itertools.product(axis, repeat=max(n - 3, 0)):
        tail = np.stack(np.meshgrid(*([axis] * min(n, 3)), indexing="ij"), -1).reshape(-1, min(n, 3))
        pts = np.hstack([np.tile(head, (len(tail), 1)), tail]) if n > 3 else tail
        pts = pts[np.einsum("ij,ij->i", pts, pts) <= reach**2 + 1e-15]
        if not len(pts):
            continue
        norms = _algebra_norms(_algebra_matrices(pts, kind), kind)
        sel = norms <= radius + cover
        pts, norms = pts[sel], norms[sel]
        scale = np.where(norms > radius, radius / np.where(norms > 0, norms, 1), 1.0)
        keep_coords.append(pts * scale[:, None])
        if sum(len(k) for k in keep_coords) > cap:
            raise DomainError(f"net exceeds cap of {cap} points")
    coords = np.concatenate(keep_coords)
    coords = np.unique(np.round(coords, 14), axis=0)
    mats = _exp_batch(_algebra_matrices(coords, kind), kind)
    return BallNet(kind, radius, spacing, coords, mats, step)


def random_ball_points(kind: GroupKind, radius: float, num: int, seed) -> np.ndarray:
    """Random points of the ball |x|_g <= radius in log coordinates, mapped by exp.

    Directions are Gaussian and the radial profile is that of a uniform ball,
    so the sample reaches the boundary shell where coverage is hardest.
    """
    rng = np.random.default_rng(seed)
    n = kind.algebra_dim
    xs = _algebra_matrices(rng.standard_normal((num, n)), kind)
    r = radius * rng.random(num) ** (1 / n)
    xs = xs * (r / _algebra_norms(xs, kind))[:, None, None]
    return _exp_batch(xs, kind)


# --------------------------------------------------------------------------
# coverage


@dataclass
class Coverage:
    distances: np.ndarray
    nearest_word: np.ndarray
    threshold: float
    worst_index: int

    @property
    def worst_distance(self) -> float:
        return float(self.distances[self.worst_index])

    @property
    def all_covered(self) -> bool:
        return bool(np.all(self.distances <= self.threshold))

    @property
    def uncovered(self) -> int:
        return int(np.sum(self.distances > self.threshold))


def nearest_word_distances(points: np.ndarray, words: WordStore, max_point_norm: float, beta: float):
    """Exact min over stored words of d_G(point, word), and the minimizing index.

    Since |Ad_b - Ad_w|_op = 2 sin(d_G(b, w) / 2), a Frobenius k-nearest
    query gives an upper bound d0; every word that could beat d0 lies in a
    Frobenius ball of radius sqrt(N) 2 sin(d0 / 2), which is then searched.
    """
    kind = words.kind
    n_ad = kind.algebra_dim
    word_norms = op_norm_batch(words.matrices, kind)
    pool = np.flatnonzero(word_norms <= max_point_norm + beta + 1e-9)
    if len(pool) == 0:
        pool = np.arange(len(words))
    keys = words.keys[pool]
    tree = cKDTree(keys)
    p_ad = adjoint_batch(points, kind).reshape(len(points), -1)
    k = min(4, len(pool))
    _, idx = tree.query(p_ad, k=k)
    idx = idx.reshape(len(points), k)

    def exact(pt_idx, word_idx):
        prods = points[pt_idx].conj().transpose(0, 2, 1) @ words.matrices[pool[word_idx]]
        return op_norm_batch(prods, kind)

    d0 = exact(np.repeat(np.arange(len(points)), k), idx.ravel()).reshape(len(points), k)
    best = d0.min(axis=1)
    best_word = idx[np.arange(len(points)), d0.argmin(axis=1)]
    radii = math.sqrt(n_ad) * 2 * np.sin(np.minimum(best, math.pi) / 2) * (1 + 1e-9) + 1e-12
    hits = tree.query_ball_point(p_ad, radii)
    counts = np.array([len(h) for h in hits])
    if counts.sum():
        pt = np.repeat(np.arange(len(points)), counts)
        wd = np.concatenate([np.asarray(h, dtype=int) for h in hits if len(h)])
        for lo in range(0, len(pt), 1_000_000):
            sl = slice(lo, lo + 1_000_000)
            dist = exact(pt[sl], wd[sl])
            better = dist < best[pt[sl]]
            # several candidates per point: resolve with minimum.at, then match words
            np.minimum.at(best, pt[sl], dist)
            ok = better & (dist <= best[pt[sl]])
            best_word[pt[sl][ok]] = wd[sl][ok]
    return best, pool[best_word]


def coverage_check(net: BallNet, words: WordStore, beta: float = BETA, spacing: float | None = None) -> Coverage:
    """Distance from each net point to the word set; covered iff <= beta - spacing."""
    spacing = net.spacing if spacing is None else spacing
    if not spacing < beta:
        raise DomainError("spacing must be smaller than beta")
    dist, nearest = nearest_word_distances(net.matrices, words, net.radius, beta)
    return Coverage(dist, nearest, beta - spacing, int(np.argmax(dist)))


@dataclass
class UniversalityConfig:
    max_length: int = 10
    spacing: float = 0.02
    dedup_tol: float = 1e-6
    word_cap: int = DEFAULT_WORD_CAP
    net_cap: int = DEFAULT_NET_CAP
    spot_checks: int = 1000
    seed: int = 0


@dataclass
class CoverageReport:
    verdict: str
    beta: float
    net_spacing: float
    net_size: int
    certified_margin: float
    worst_point: GroupElement
    worst_distance: float
    uncovered_points: int
    words_count: int
    max_word_length: int
    worst_point_word: list[str]
    closure_detected: bool
    truncated: bool
    group_order: int | None
    level_sizes: list[int]
    spot_check_max: float | None
    timing: dict

    def to_json(self) -> dict:
        from .serialization import element_to_json

        return {
            "verdict": self.verdict,
            "beta": self.beta,
            "net_spacing": self.net_spacing,
            "net_size": self.net_size,
            "certified_margin": self.certified_margin,
            "worst_point": element_to_json(self.worst_point),
            "worst_distance": self.worst_distance,
            "worst_point_nearest_word": self.worst_point_word,
            "uncovered_points": self.uncovered_points,
            "words": {
                "count": self.words_count,
                "max_length": self.max_word_length,
                "level_sizes": self.level_sizes,
            },
            "closure_detected": self.closure_detected,
            "truncated": self.truncated,
            "group_order": self.group_order,
            "spot_check_max": self.spot_check_max,
            "timing": self.timing,
        }


def test_universality(gates: GateSet, config: UniversalityConfig | None = None, beta: float = BETA) -> CoverageReport:
    """Words -> 2 beta ball net -> coverage, with a verdict.

    ``NotUniversal`` is only returned when the words close up into a finite
    group; ``Universal`` needs every net point within ``beta - spacing`` of a
    word; anything else is ``Inconclusive``.
    """
    cfg = config or UniversalityConfig()
    timing = {}
    t0 = time.perf_counter()
    words = generate_words(gates, cfg.max_length, cfg.dedup_tol, cfg.word_cap)
    timing["words_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    net = ball_net(gates.kind, 2 * beta, cfg.spacing, cfg.net_cap)
    timing["net_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    cov = coverage_check(net, words, beta, cfg.spacing)
    timing["coverage_s"] = time.perf_counter() - t0

    margin = beta - cfg.spacing - cov.worst_distance
    if words.closure_detected:
        verdict = NOT_UNIVERSAL
    elif cov.all_covered and margin > 0:
        verdict = UNIVERSAL
    else:
        verdict = INCONCLUSIVE

    spot = None
    if verdict == UNIVERSAL and cfg.spot_checks:
        t0 = time.perf_counter()
        pts = random_ball_points(gates.kind, 2 * beta, cfg.spot_checks, cfg.seed)
        spot = float(nearest_word_distances(pts, words, 2 * beta, beta)[0].max())
        timing["spot_check_s"] = time.perf_counter() - t0

    return CoverageReport(
        verdict=verdict,
        beta=beta,
        net_spacing=cfg.spacing,
        net_size=len(net),
        certified_margin=margin,
        worst_point=net[cov.worst_index],
        worst_distance=cov.worst_distance,
        uncovered_points=cov.uncovered,
        words_count=len(words),
        max_word_length=words.max_length,
        worst_point_word=words.word(int(cov.nearest_word[cov.worst_index])),
        closure_detected=words.closure_detected,
        truncated=words.truncated,
        group_order=words.group_order,
        level_sizes=words.level_sizes,
        spot_check_max=spot,
        timing=timing,
    )


# keep pytest from collecting the library function when imported into tests
test_universality.__test__ = False
