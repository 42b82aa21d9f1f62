"""Group and algebra arithmetic for SU(d), SO(d) and their finite products.

Elements are stored in the defining representation.  The Lie algebra carries
the invariant inner product ``<x, y> = -trace(x y)``, for which the bases
returned by :func:`algebra_basis` are orthonormal.  The operator norm of a
group element is the largest angle by which its adjoint action rotates a
vector of the algebra; it only depends on the image of the element in the
centerless quotient (phases and other central factors are invisible).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericalError, ValidationError

TOL_UNITARY = 1e-10
TOL_DET = 1e-9
TOL_REAL = 1e-12
TOL_ALGEBRA = 1e-12

#: log_map is only defined strictly inside this operator-norm radius.
LOG_RADIUS = 2 * np.pi / 3
LOG_MARGIN = 1e-6


@dataclass(frozen=True)
class GroupKind:
    """Which group a matrix belongs to.

    ``family`` is ``"su"``, ``"so"`` or ``"product"``; ``d`` is the size of
    the defining matrices (for products, the sum of the factor sizes).
    """

    family: str
    d: int
    factors: tuple["GroupKind", ...] = ()

    def __str__(self) -> str:
        if self.family == "product":
            return " x ".join(str(f) for f in self.factors)
        return f"{self.family.upper()}({self.d})"

    @property
    def simple_factors(self) -> tuple["GroupKind", ...]:
        return self.factors if self.family == "product" else (self,)

    @property
    def is_real(self) -> bool:
        return all(f.family == "so" for f in self.simple_factors)

    @property
    def dtype(self):
        return np.float64 if self.is_real else np.complex128

    @property
    def algebra_dim(self) -> int:
        total = 0
        for f in self.simple_factors:
            total += f.d * f.d - 1 if f.family == "su" else f.d * (f.d - 1) // 2
        return total

    def blocks(self) -> list[tuple[slice, "GroupKind"]]:
        """Diagonal block slices of the defining matrix, one per simple factor."""
        out = []
        start = 0
        for f in self.simple_factors:
            out.append((slice(start, start + f.d), f))
            start += f.d
        return out


def su(d: int) -> GroupKind:
    if not 2 <= d <= 8:
        raise ValidationError(f"su(d) supported for 2 <= d <= 8, got d={d}")
    return GroupKind("su", d)


def so(d: int) -> GroupKind:
    if not 3 <= d <= 8:
        raise ValidationError(f"so(d) supported for 3 <= d <= 8, got d={d}")
    return GroupKind("so", d)


def product(*kinds: GroupKind) -> GroupKind:
    flat: list[GroupKind] = []
    for k in kinds:
        flat.extend(k.simple_factors)
    if len(flat) < 2:
        raise ValidationError("a product kind needs at least two factors")
    return GroupKind("product", sum(f.d for f in flat), tuple(flat))


def parse_kind(text: str) -> GroupKind:
    """Parse ``"su2"``, ``"SO(3)"``, ``"so3xso3"`` and similar spellings."""
    parts = [p.strip() for p in text.lower().replace("*", "x").split("x") if p.strip()]
    kinds = []
    for p in parts:
        p = p.replace("(", "").replace(")", "")
        if p[:2] not in ("su", "so") or not p[2:].isdigit():
            raise ValidationError(f"cannot parse group kind {text!r}")
        kinds.append(su(int(p[2:])) if p[:2] == "su" else so(int(p[2:])))
    return kinds[0] if len(kinds) == 1 else product(*kinds)


# --------------------------------------------------------------------------
# elements


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A validated matrix in the defining representation of ``kind``.

    Build instances with :func:`make_group_element`; the bare constructor
    does not validate.  ``a @ b`` multiplies elements.
    """

    matrix: np.ndarray
    kind: GroupKind

    def __post_init__(self):
        m = np.array(self.matrix, dtype=self.kind.dtype)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        _same_kind(self.kind, other.kind)
        return GroupElement(self.matrix @ other.matrix, self.kind)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.matrix.conj().T, self.kind)

    @classmethod
    def identity(cls, kind: GroupKind) -> "GroupElement":
        return cls(np.eye(kind.d), kind)

    def __repr__(self) -> str:
        return f"GroupElement({self.kind}, norm={op_norm_group(self):.6f})"


@dataclass(frozen=True, eq=False)
class AlgebraVector:
    """A traceless skew-Hermitian matrix (block diagonal for products)."""

    matrix: np.ndarray
    kind: GroupKind

    def __post_init__(self):
        m = np.array(self.matrix, dtype=self.kind.dtype)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __add__(self, other: "AlgebraVector") -> "AlgebraVector":
        _same_kind(self.kind, other.kind)
        return AlgebraVector(self.matrix + other.matrix, self.kind)

    def __sub__(self, other: "AlgebraVector") -> "AlgebraVector":
        _same_kind(self.kind, other.kind)
        return AlgebraVector(self.matrix - other.matrix, self.kind)

    def __mul__(self, scalar: float) -> "AlgebraVector":
        return AlgebraVector(float(scalar) * self.matrix, self.kind)

    __rmul__ = __mul__

    def coords(self) -> np.ndarray:
        """Coordinates in the orthonormal basis of :func:`algebra_basis`."""
        return _coords(self.matrix[None], self.kind)[0]

    @classmethod
    def from_coords(cls, coords: Sequence[float], kind: GroupKind) -> "AlgebraVector":
        c = np.asarray(coords, dtype=float)
        if c.shape != (kind.algebra_dim,):
            raise ValidationError(f"expected {kind.algebra_dim} coordinates, got {c.shape}")
        return cls(np.tensordot(c, _basis_stack(kind), axes=1), kind)


def _same_kind(a: GroupKind, b: GroupKind) -> None:
    if a != b:
        raise ValidationError(f"kind mismatch: {a} vs {b}")


def _off_block_max(m: np.ndarray, kind: GroupKind) -> float:
    if kind.family != "product":
        return 0.0
    mask = np.ones(m.shape, dtype=bool)
    for sl, _ in kind.blocks():
        mask[sl, sl] = False
    return float(np.max(np.abs(m[mask]), initial=0.0))


def make_group_element(matrix, kind: GroupKind) -> GroupElement:
    """Validate ``matrix`` as an element of ``kind``.

    Special-unitary blocks are rescaled by the principal d-th root of their
    determinant so that ``det = 1``; this does not change the operator norm.
    """
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape != (kind.d, kind.d):
        raise ValidationError(f"expected a {kind.d}x{kind.d} matrix for {kind}, got shape {m.shape}")
    m = m.astype(np.complex128)
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    err = np.max(np.abs(m.conj().T @ m - np.eye(kind.d)))
    if err > TOL_UNITARY:
        raise ValidationError(f"matrix is not unitary (max deviation {err:.3g})")
    if _off_block_max(m, kind) > TOL_UNITARY:
        raise ValidationError("product element is not block diagonal")
    out = np.zeros_like(m)
    for sl, f in kind.blocks():
        block = m[sl, sl]
        det = np.linalg.det(block)
        if f.family == "su":
            block = block / np.exp(1j * np.angle(det) / f.d)
            if abs(np.linalg.det(block) - 1) > TOL_DET:
                raise NumericalError("determinant normalization failed")
        else:
            if np.max(np.abs(block.imag)) > TOL_REAL:
                raise ValidationError("special-orthogonal block has non-real entries")
            if abs(det - 1) > TOL_DET:
                raise ValidationError(f"orthogonal block has det {det.real:.6g}, expected +1")
        out[sl, sl] = block
    if kind.is_real:
        out = out.real
    return GroupElement(out, kind)


def make_algebra_vector(matrix, kind: GroupKind) -> AlgebraVector:
    m = np.asarray(matrix)
    if m.shape != (kind.d, kind.d):
        raise ValidationError(f"expected a {kind.d}x{kind.d} matrix for {kind}, got shape {m.shape}")
    m = m.astype(np.complex128)
    if np.max(np.abs(m + m.conj().T)) > TOL_ALGEBRA:
        raise ValidationError("matrix is not skew-Hermitian")
    if _off_block_max(m, kind) > TOL_ALGEBRA:
        raise ValidationError("product algebra vector is not block diagonal")
    for sl, f in kind.blocks():
        if abs(np.trace(m[sl, sl])) > TOL_ALGEBRA:
            raise ValidationError("matrix is not traceless")
        if f.family == "so" and np.max(np.abs(m[sl, sl].imag)) > TOL_REAL:
            raise ValidationError("so(d) vectors must be real")
    return AlgebraVector(m.real if kind.is_real else m, kind)


def block_diag(*elements: GroupElement) -> GroupElement:
    """Product element built from one element per factor."""
    kind = product(*(e.kind for e in elements))
    return GroupElement(scipy.linalg.block_diag(*(e.matrix for e in elements)), kind)


def factor(g: GroupElement, index: int) -> GroupElement:
    """Projection of a product element onto one simple factor."""
    sl, f = g.kind.blocks()[index]
    return GroupElement(g.matrix[sl, sl], f)


# --------------------------------------------------------------------------
# bases and the adjoint representation


def _simple_basis(kind: GroupKind) -> np.ndarray:
    d = kind.d
    mats = []
    if kind.family == "su":
        # Gell-Mann order: for each pair j<k the symmetric then antisymmetric
        # generator, then the d-1 diagonal generators.
        for j in range(d):
            for k in range(j + 1, d):
                s = np.zeros((d, d), complex)
                s[j, k] = s[k, j] = 1
                a = np.zeros((d, d), complex)
                a[j, k], a[k, j] = -1j, 1j
                mats += [s, a]
        for l in range(1, d):
            h = np.zeros((d, d), complex)
            h[np.arange(l), np.arange(l)] = 1
            h[l, l] = -l
            mats.append(h * np.sqrt(2 / (l * (l + 1))))
        # Hermitian lambda with tr(lambda^2) = 2  ->  i*lambda/sqrt(2) is unit
        return 1j * np.array(mats) / np.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d))
            e[j, k], e[k, j] = 1, -1
            mats.append(e / np.sqrt(2))
    return np.array(mats, dtype=complex)


@functools.lru_cache(maxsize=None)
def _basis_stack(kind: GroupKind) -> np.ndarray:
    parts = []
    for sl, f in kind.blocks():
        sub = _simple_basis(f)
        full = np.zeros((len(sub), kind.d, kind.d), complex)
        full[:, sl, sl] = sub
        parts.append(full)
    stack = np.concatenate(parts)
    if kind.is_real:
        stack = stack.real
    stack.setflags(write=False)
    return stack


@functools.lru_cache(maxsize=None)
def _coord_map(kind: GroupKind) -> np.ndarray:
    # <e_i, y> = -Re tr(e_i y) = -Re sum_ab (e_i^T)_ab y_ab
    b = _basis_stack(kind)
    m = -b.transpose(0, 2, 1).reshape(len(b), -1)
    m.setflags(write=False)
    return m


def _coords(mats: np.ndarray, kind: GroupKind) -> np.ndarray:
    flat = mats.reshape(mats.shape[:-2] + (kind.d * kind.d,))
    return np.real(flat @ _coord_map(kind).T)


def algebra_basis(kind: GroupKind) -> list[AlgebraVector]:
    """Orthonormal basis of the Lie algebra under ``<x, y> = -trace(x y)``.

    su(d): for each index pair j<k (lexicographic) the symmetric and then
    the antisymmetric off-diagonal generator, followed by the d-1 diagonal
    generators, each ``i * lambda / sqrt(2)`` for the generalized Gell-Mann
    matrix ``lambda``.  so(d): ``(E_jk - E_kj) / sqrt(2)`` for j<k.
    Products concatenate the factor bases in factor order.
    """
    return [AlgebraVector(b, kind) for b in _basis_stack(kind)]


def _as_matrix(g) -> np.ndarray:
    return g.matrix if isinstance(g, (GroupElement, AlgebraVector)) else np.asarray(g)


def adjoint_batch(mats: np.ndarray, kind: GroupKind) -> np.ndarray:
    """Adjoint matrices for a stack of defining matrices, shape (n, N, N)."""
    mats = np.asarray(mats)
    b = _basis_stack(kind)
    conj = mats[:, None] @ b[None] @ mats.conj().transpose(0, 2, 1)[:, None]
    # coords of g e_j g^-1 land in row j; transpose to put them in column j
    return _coords(conj, kind).transpose(0, 2, 1)


def adjoint_matrix(g) -> np.ndarray:
    """Real N x N matrix of Ad_g: entry (i, j) is <e_i, g e_j g^-1>.

    Accepts a :class:`GroupElement` or, for convenience, a raw unitary
    matrix together with its kind via ``adjoint_matrix((matrix, kind))``.
    """
    if isinstance(g, tuple):
        mat, kind = g
    else:
        mat, kind = g.matrix, g.kind
    return adjoint_batch(np.asarray(mat)[None], kind)[0]


def ad_matrix(x: AlgebraVector) -> np.ndarray:
    """Real N x N matrix of y -> [x, y] in the orthonormal basis."""
    b = _basis_stack(x.kind)
    brackets = x.matrix @ b - b @ x.matrix
    return _coords(brackets, x.kind).T


# --------------------------------------------------------------------------
# operator norms


def _max_abs_arg(eigs: np.ndarray) -> float:
    return float(np.max(np.abs(np.angle(eigs)), initial=0.0))


def op_norm_group(g: GroupElement) -> float:
    """Largest |arg| of the eigenvalues of Ad_g, in [0, pi]."""
    return _max_abs_arg(np.linalg.eigvals(adjoint_matrix(g)))


def _pair_products(eigs: np.ndarray, family: str) -> np.ndarray:
    # eigenvalues of the adjoint action on the complexified algebra
    if family == "su":
        return (eigs[..., :, None] * eigs[..., None, :].conj()).reshape(eigs.shape[:-1] + (-1,))
    n = eigs.shape[-1]
    j, k = np.triu_indices(n, 1)
    return eigs[..., j] * eigs[..., k]


def op_norm_group_eigenphases(g: GroupElement) -> float:
    """Operator norm from the defining-representation eigenvalues.

    For su blocks the adjoint eigenvalues are ``l_j conj(l_k)``; for so
    blocks they are ``l_j l_k`` with j<k.  Independent of Ad's construction.
    """
    return float(op_norm_batch(g.matrix[None], g.kind)[0])


def op_norm_batch(mats: np.ndarray, kind: GroupKind) -> np.ndarray:
    """Operator norms of a stack of defining matrices (eigenphase method)."""
    mats = np.asarray(mats)
    out = np.zeros(len(mats))
    for sl, f in kind.blocks():
        eigs = np.linalg.eigvals(mats[:, sl, sl])
        phases = np.abs(np.angle(_pair_products(eigs, f.family)))
        out = np.maximum(out, phases.max(axis=-1))
    return out


def op_norm_algebra(x: AlgebraVector) -> float:
    """Largest singular value of ad_x."""
    return float(np.linalg.norm(ad_matrix(x), 2))


def op_norm_algebra_eigenphases(x: AlgebraVector) -> float:
    """Same norm from the eigenvalues i*theta_j of x.

    su blocks: spread max(theta) - min(theta).  so blocks: max |theta_j + theta_k|, j<k.
    """
    best = 0.0
    for sl, f in x.kind.blocks():
        theta = np.linalg.eigvalsh(-1j * x.matrix[sl, sl])
        if f.family == "su":
            best = max(best, theta[-1] - theta[0])
        else:
            j, k = np.triu_indices(len(theta), 1)
            best = max(best, float(np.max(np.abs(theta[j] + theta[k]))))
    return float(best)


def algebra_norm_constant(kind: GroupKind) -> float:
    """sup of |x|_g over Euclidean-unit x: sqrt(2) for su, 1/sqrt(2) for so(3), 1 for so(d>=4)."""
    vals = []
    for f in kind.simple_factors:
        if f.family == "su":
            vals.append(np.sqrt(2.0))
        else:
            vals.append(1 / np.sqrt(2.0) if f.d == 3 else 1.0)
    return float(max(vals))


def distance(g: GroupElement, h: GroupElement) -> float:
    """Bi-invariant distance |g^-1 h|_G."""
    _same_kind(g.kind, h.kind)
    return op_norm_group(g.inverse() @ h)


# --------------------------------------------------------------------------
# exponential and logarithm


def exp_map(x: AlgebraVector) -> GroupElement:
    out = np.zeros((x.kind.d, x.kind.d), complex)
    for sl, f in x.kind.blocks():
        theta, u = np.linalg.eigh(-1j * x.matrix[sl, sl])
        out[sl, sl] = (u * np.exp(1j * theta)) @ u.conj().T
    return make_group_element(out, x.kind)


def _central_multipliers(f: GroupKind) -> list[complex]:
    if f.family == "su":
        return [np.exp(2j * np.pi * m / f.d) for m in range(f.d)]
    return [1.0, -1.0] if f.d % 2 == 0 else [1.0]


def _principal_log(block: np.ndarray) -> np.ndarray:
    t, z = scipy.linalg.schur(block.astype(complex), output="complex")
    phases = np.angle(np.diag(t))
    return (z * (1j * phases)) @ z.conj().T


def _block_log(block: np.ndarray, f: GroupKind) -> np.ndarray:
    best, best_norm = None, np.inf
    for c in _central_multipliers(f):
        cand = _principal_log(c * block)
        if f.family == "su":
            cand = cand - np.trace(cand) / f.d * np.eye(f.d)
        else:
            cand = cand.real
            cand = (cand - cand.T) / 2
        n = op_norm_algebra_eigenphases(AlgebraVector(cand, f))
        if n < best_norm:
            best, best_norm = cand, n
    return best


def log_map(g: GroupElement) -> AlgebraVector:
    """The norm-preserving logarithm on the ball |g|_G < 2pi/3.

    Returns the unique x with |x|_g = |g|_G and exp(x) equal to g up to a
    central factor (a d-th root of unity for su, -1 for even so).  Within
    the domain this x is unique; central factors are invisible to every
    norm and distance in the toolkit.
    """
    norm_g = op_norm_group(g)
    if norm_g >= LOG_RADIUS - LOG_MARGIN:
        raise DomainError(f"log_map needs |g|_G < 2pi/3 - 1e-6, got {norm_g:.9f}")
    out = np.zeros((g.kind.d, g.kind.d), g.kind.dtype)
    for sl, f in g.kind.blocks():
        try:
            out[sl, sl] = _block_log(g.matrix[sl, sl], f)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"eigensolver failed: {exc}") from exc
    x = AlgebraVector(out, g.kind)
    if abs(op_norm_algebra_eigenphases(x) - norm_g) > 1e-8:
        raise NumericalError("logarithm does not preserve the operator norm")
    return x


def path_length(samples: Sequence[GroupElement]) -> float:
    """Sum of |log(p_i^-1 p_{i+1})|_g over consecutive samples."""
    total = 0.0
    for a, b in zip(samples, samples[1:]):
        step = a.inverse() @ b
        if op_norm_group(step) >= LOG_RADIUS - LOG_MARGIN:
            raise DomainError("consecutive samples are too far apart for the logarithm")
        total += op_norm_algebra(log_map(step))
    return total


# --------------------------------------------------------------------------
# sampling


def _haar_simple(f: GroupKind, n: int, rng: np.random.Generator) -> np.ndarray:
    d = f.d
    if f.family == "su":
        z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2)
    else:
        z = rng.standard_normal((n, d, d))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    q = q * (diag / np.abs(diag))[:, None, :]
    det = np.linalg.det(q)
    if f.family == "su":
        q = q / np.exp(1j * np.angle(det) / d)[:, None, None]
    else:
        # Haar on O(d) -> Haar on SO(d) by flipping one column of the det -1 half
        q[det < 0, :, 0] *= -1
    return q


def haar_batch(kind: GroupKind, n: int, rng) -> np.ndarray:
    """Stack of n Haar-distributed defining matrices, shape (n, d, d)."""
    rng = np.random.default_rng(rng)
    out = np.zeros((n, kind.d, kind.d), kind.dtype)
    for sl, f in kind.blocks():
        out[:, sl, sl] = _haar_simple(f, n, rng)
    return out


def haar_sample(kind: GroupKind, seed) -> GroupElement:
    """Haar-distributed element; a pure function of ``seed`` (int or Generator)."""
    return GroupElement(haar_batch(kind, 1, seed)[0], kind)


def haar_samples(kind: GroupKind, n: int, seed) -> list[GroupElement]:
    return [GroupElement(m, kind) for m in haar_batch(kind, n, seed)]


def random_algebra_vector(kind: GroupKind, rng, norm: float | None = None) -> AlgebraVector:
    """Gaussian direction in the algebra, optionally rescaled to a given |x|_g."""
    rng = np.random.default_rng(rng)
    x = AlgebraVector.from_coords(rng.standard_normal(kind.algebra_dim), kind)
    if norm is not None:
        x = x * (norm / op_norm_algebra(x))
    return x


def split_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Per-task seed for data-parallel loops: SeedSequence([seed, index])."""
    return np.random.SeedSequence([int(seed), int(index)])


# --------------------------------------------------------------------------
# SO(3) helpers


def rotation(axis: Iterable[float], angle: float) -> GroupElement:
    """Right-handed rotation about ``axis`` by ``angle`` in SO(3)."""
    a = np.asarray(list(axis), dtype=float)
    a = a / np.linalg.norm(a)
    k = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    m = np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)
    return GroupElement(m, so(3))


def rot_x(angle: float) -> GroupElement:
    return rotation((1, 0, 0), angle)


def rot_z(angle: float) -> GroupElement:
    return rotation((0, 0, 1), angle)
