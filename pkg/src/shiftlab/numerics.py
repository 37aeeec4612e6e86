"""Dense complex matrices and Hilbert-Schmidt subspaces.

Every matrix is a square ``complex128`` array.  Subspaces of ``M_d`` are
carried as :class:`HSBasis` objects whose vectors are orthonormal for the
tracial inner product ``<a, b> = tau(a^* b)`` with ``tau = Tr / d``, so a
basis vector has Frobenius norm ``sqrt(d)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

__all__ = [
    "DEFAULT_TOL",
    "ResourceLimitError",
    "HSBasis",
    "as_matrix",
    "kron",
    "kron_all",
    "normalized_trace",
    "hs_inner",
    "hs_norm",
    "dagger",
    "commutator",
    "max_dev",
    "orthonormalize_span",
    "extend_span",
    "subspace_intersect",
    "null_combinations",
]

DEFAULT_TOL = 1e-9


class ResourceLimitError(RuntimeError):
    """Raised when a computation would exceed a configured size cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what} = {size} exceeds the resource cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Sequence) -> np.ndarray:
    if not mats:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, [as_matrix(m) for m in mats])


def normalized_trace(a) -> complex:
    a = np.asarray(a)
    return complex(np.trace(a) / a.shape[0])


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hs_inner(a, b) -> complex:
    """``tau(a^* b)``."""
    a = np.asarray(a)
    return complex(np.vdot(a, b) / a.shape[0])


def hs_norm(a) -> float:
    """The 2-norm ``sqrt(tau(a^* a))``."""
    a = np.asarray(a)
    return float(np.linalg.norm(a) / np.sqrt(a.shape[0]))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def max_dev(a, b=None) -> float:
    """Largest entrywise modulus of ``a - b`` (or of ``a``)."""
    d = np.asarray(a) if b is None else np.asarray(a) - np.asarray(b)
    return float(np.max(np.abs(d))) if d.size else 0.0


@dataclass(frozen=True, eq=False)
class HSBasis:
    """Orthonormal basis of a linear subspace of ``M_d``.

    ``vectors`` has shape ``(size, d, d)``.
    """

    ambient_dim: int
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.size == 0:
            v = np.zeros((0, self.ambient_dim, self.ambient_dim), dtype=complex)
        if v.shape[1:] != (self.ambient_dim, self.ambient_dim):
            raise ValueError(f"basis vectors of shape {v.shape[1:]} in ambient {self.ambient_dim}")
        object.__setattr__(self, "vectors", v)

    @classmethod
    def empty(cls, d: int) -> "HSBasis":
        return cls(d, np.zeros((0, d, d), dtype=complex))

    @classmethod
    def from_rows(cls, d: int, rows: np.ndarray) -> "HSBasis":
        """Build from Euclidean-orthonormal flattened rows."""
        rows = np.asarray(rows, dtype=complex).reshape(-1, d, d)
        return cls(d, rows * np.sqrt(d))

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return len(self)

    def rows(self) -> np.ndarray:
        """Flattened vectors with unit Euclidean norm, shape ``(size, d*d)``."""
        d = self.ambient_dim
        return self.vectors.reshape(len(self), d * d) / np.sqrt(d)

    def coefficients(self, x) -> np.ndarray:
        """``tau(v_i^* x)`` for each basis vector."""
        x = np.asarray(x, dtype=complex)
        d = self.ambient_dim
        return np.conj(self.vectors.reshape(len(self), -1)) @ x.reshape(-1) / d

    def combine(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=complex), self.vectors, axes=(0, 0))

    def project(self, x) -> np.ndarray:
        if len(self) == 0:
            return np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        return self.combine(self.coefficients(x))

    def residual(self, x) -> float:
        """2-norm distance from ``x`` to the span."""
        return hs_norm(np.asarray(x) - self.project(x))

    def contains(self, x, tol: float = 1e-8) -> bool:
        scale = max(hs_norm(x), 1.0)
        return self.residual(x) <= tol * scale

    def gram_deviation(self) -> float:
        r = self.rows()
        return max_dev(r.conj() @ r.T, np.eye(len(self)))


def _stack_rows(mats, d: int | None) -> tuple[np.ndarray, int]:
    if isinstance(mats, np.ndarray) and mats.ndim == 3:
        arr = mats.astype(complex, copy=False)
    else:
        mats = [as_matrix(m) for m in mats]
        if not mats:
            if d is None:
                raise ValueError("ambient_dim is required for an empty list")
            arr = np.zeros((0, d, d), dtype=complex)
        else:
            dims = {m.shape[0] for m in mats}
            if len(dims) != 1:
                raise ValueError(f"mixed ambient dimensions {sorted(dims)}")
            arr = np.stack(mats)
    dd = arr.shape[-1] if arr.shape[0] else d
    if d is not None and dd != d:
        raise ValueError(f"matrices of size {dd} in ambient {d}")
    return arr.reshape(arr.shape[0], dd * dd), dd


def _row_space(rows: np.ndarray, thresh_rel: float, scale: float | None = None) -> np.ndarray:
    """Orthonormal rows spanning the row space, dropping singular values <= thresh."""
    if rows.shape[0] == 0:
        return rows
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    ref = s[0] if scale is None else scale
    if ref == 0:
        return rows[:0]
    keep = s > thresh_rel * ref
    return vh[keep]


def orthonormalize_span(mats, tol: float = DEFAULT_TOL, ambient_dim: int | None = None) -> HSBasis:
    """Orthonormal basis of the linear span of ``mats``.

    Rank is decided by singular values above ``tol`` times the largest one.
    An empty input gives an empty basis (of side 0 unless ``ambient_dim`` is set).
    """
    if ambient_dim is None and not isinstance(mats, np.ndarray) and len(mats) == 0:
        return HSBasis(0, np.zeros((0, 0, 0), dtype=complex))
    rows, d = _stack_rows(mats, ambient_dim)
    return HSBasis.from_rows(d, _row_space(rows, tol))


def extend_span(basis: HSBasis, mats, tol: float = DEFAULT_TOL) -> tuple[HSBasis, HSBasis]:
    """Add the span of ``mats`` to ``basis``.

    Returns ``(enlarged, new_part)`` where ``new_part`` spans the directions that
    were added.  A candidate counts as new when its residual after projection
    exceeds ``tol`` times the largest candidate norm.
    """
    d = basis.ambient_dim
    rows, _ = _stack_rows(mats, d)
    if rows.shape[0] == 0:
        return basis, HSBasis.empty(d)
    scale = float(np.max(np.linalg.norm(rows, axis=1)))
    if scale == 0:
        return basis, HSBasis.empty(d)
    q = basis.rows()
    res = rows
    # two passes of classical Gram-Schmidt
    for _ in range(2):
        if len(q):
            res = res - (res @ q.conj().T) @ q
    new = _row_space(res, tol, scale=scale)
    if len(new) and len(q):
        new = new - (new @ q.conj().T) @ q
        new, _ = np.linalg.qr(new.T)
        new = new.T
    new_basis = HSBasis.from_rows(d, new)
    if len(new_basis) == 0:
        return basis, new_basis
    return HSBasis(d, np.concatenate([basis.vectors, new_basis.vectors])), new_basis


def subspace_intersect(x: HSBasis, y: HSBasis, tol: float = DEFAULT_TOL) -> HSBasis:
    """Orthonormal basis of ``span(x) ∩ span(y)``.

    Principal vectors of ``x`` whose sine of principal angle to ``y`` is at most
    ``tol`` are kept; the sines come from the residual of ``x`` after projecting
    onto ``y``, which avoids cancellation in ``1 - cos``.
    """
    if x.ambient_dim != y.ambient_dim:
        raise ValueError(f"ambient mismatch: {x.ambient_dim} vs {y.ambient_dim}")
    d = x.ambient_dim
    if len(x) == 0 or len(y) == 0:
        return HSBasis.empty(d)
    qx, qy = x.rows(), y.rows()
    res = qx - (qx @ qy.conj().T) @ qy
    u, s, _ = np.linalg.svd(res, full_matrices=False)
    sines = np.zeros(len(x))
    sines[: len(s)] = s
    keep = sines <= tol
    coeffs = np.conj(u[:, keep]).T
    if coeffs.shape[0] == 0:
        return HSBasis.empty(d)
    return HSBasis.from_rows(d, coeffs @ qx)


def null_combinations(residuals: np.ndarray, tol: float, scale: float | None = None) -> np.ndarray:
    """Orthonormal coefficient vectors ``c`` with ``c @ residuals ~ 0``.

    ``residuals`` has one row per candidate.  Singular values at most
    ``tol * max(sigma_max, scale)`` count as zero.  Returns shape ``(r, n_rows)``.
    """
    n, width = residuals.shape
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    if not np.any(residuals):
        return np.eye(n, dtype=complex)
    u, s, _ = np.linalg.svd(residuals, full_matrices=n > width)
    sv = np.zeros(u.shape[1])
    sv[: len(s)] = s
    keep = sv <= tol * max(s[0], scale or 0.0)
    return np.conj(u[:, keep]).T
