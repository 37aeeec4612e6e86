"""Finite-dimensional *-algebras as concrete subspaces of ``M_d``.

A :class:`Subalgebra` is known either by an explicit orthonormal basis or by
a generating set whose basis is produced on demand.  Large algebras such as
``⊗^m M_n`` are handled through their generators only: commutants are solved
in the eigenframe of a generic self-adjoint element of the generated algebra,
which shrinks the unknowns from ``d^2`` to the sum of squared eigenvalue
multiplicities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import (
    DEFAULT_TOL,
    HSBasis,
    ResourceLimitError,
    as_matrix,
    dagger,
    extend_span,
    hs_norm,
    max_dev,
    normalized_trace,
    null_combinations,
    orthonormalize_span,
    subspace_intersect,
)

__all__ = [
    "Subalgebra",
    "BlockStructure",
    "generate_algebra",
    "full_algebra",
    "scalars",
    "algebra_from_basis",
    "tensor_product",
    "tensor_power",
    "commutant",
    "relative_commutant",
    "center",
    "block_structure",
    "conditional_expectation",
    "trace_density_spectrum",
    "entropy_of_trace",
    "star_algebra_defect",
    "clock_and_shift",
]

# eigenvalue grouping for generic self-adjoint elements
GROUP_TOL = 1e-6
# explicit bases larger than this stay lazy in tensor products
MATERIALIZE_LIMIT = 4096
# default cap on the number of unknowns in a commutant nullspace
UNKNOWNS_CAP = 4096
_CHUNK = 256


def clock_and_shift(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Weyl pair generating ``M_d``."""
    zeta = np.exp(2j * np.pi / d)
    clock = np.diag(zeta ** np.arange(d))
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    return clock, shift


class Subalgebra:
    """A *-closed linear subspace of ``M_d`` closed under multiplication.

    Parameters
    ----------
    ambient_dim
        Side ``d`` of the ambient matrix algebra.
    generators
        Matrices generating the algebra.  When the algebra is ``unital`` the
        identity is implicitly adjoined.
    basis
        Explicit orthonormal basis; if omitted it is computed from the
        generators on first access (or from ``basis_factory``).
    full
        Marks the whole of ``M_d``; several operations shortcut on it.
    """

    def __init__(
        self,
        ambient_dim: int,
        generators: Sequence[np.ndarray] = (),
        *,
        basis: HSBasis | None = None,
        unital: bool = True,
        basis_factory: Callable[[], HSBasis] | None = None,
        full: bool = False,
        tol: float = DEFAULT_TOL,
    ):
        self.ambient_dim = int(ambient_dim)
        gens = tuple(as_matrix(g) for g in generators)
        if basis is not None and basis.ambient_dim != self.ambient_dim:
            raise ValueError("basis ambient dimension mismatch")
        if not gens and basis is not None:
            gens = tuple(basis.vectors)
        for g in gens:
            if g.shape[0] != self.ambient_dim:
                raise ValueError(f"generator of size {g.shape[0]} in ambient {self.ambient_dim}")
        self.generators = gens
        self.unital = bool(unital)
        self.full = bool(full)
        self.tol = tol
        self._basis = basis
        self._factory = basis_factory
        self._cache: dict[str, object] = {}

    def __repr__(self) -> str:
        size = len(self._basis) if self._basis is not None else "lazy"
        return f"Subalgebra(ambient_dim={self.ambient_dim}, dim={size}, unital={self.unital})"

    @property
    def is_materialized(self) -> bool:
        return self._basis is not None

    @property
    def basis(self) -> HSBasis:
        if self._basis is None:
            if self._factory is not None:
                self._basis = self._factory()
            else:
                self._basis = _closure(self.generators, self.ambient_dim, self.unital, self.tol)
        return self._basis

    @property
    def dim(self) -> int:
        if self._basis is not None:
            return len(self._basis)
        if self.full:
            return self.ambient_dim**2
        return block_structure(self).dimension

    def constraint_set(self) -> list[np.ndarray]:
        """Generators together with their adjoints (a *-closed generating set)."""
        out = []
        for g in self.generators:
            out.append(g)
            if max_dev(g, dagger(g)) > 1e-14 * max(1.0, float(np.max(np.abs(g)))):
                out.append(dagger(g))
        return out

    def contains(self, x, tol: float = 1e-8) -> bool:
        x = as_matrix(x)
        if self.full:
            return True
        if self._basis is not None:
            return self.basis.contains(x, tol)
        # unital: s = s''
        comm = commutant(self)
        scale = max(hs_norm(x), 1.0)
        dev = max((hs_norm(c @ x - x @ c) for c in comm.basis.vectors), default=0.0)
        return dev <= tol * scale


@dataclass(frozen=True)
class BlockStructure:
    """Sizes of the simple summands ``M_{a_i}`` of a *-algebra.

    ``projections[i]`` is the minimal central projection of block ``i`` and
    ``multiplicities[i]`` the number of times ``M_{a_i}`` repeats inside it.
    """

    blocks: tuple[int, ...]
    multiplicities: tuple[int, ...] = ()
    projections: tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return sum(a * a for a in self.blocks)

    @property
    def sorted_blocks(self) -> tuple[int, ...]:
        return tuple(sorted(self.blocks))

    def same_type(self, other: "BlockStructure | Sequence[int]") -> bool:
        theirs = other.blocks if isinstance(other, BlockStructure) else tuple(other)
        return self.sorted_blocks == tuple(sorted(theirs))


def _closure(gens: Sequence[np.ndarray], d: int, unital: bool, tol: float) -> HSBasis:
    eye = np.eye(d, dtype=complex)
    mults = []
    for g in gens:
        mults.append(g)
        if max_dev(g, dagger(g)) > 1e-14:
            mults.append(dagger(g))
    seeds = ([eye] if unital else []) + mults
    if not seeds:
        return HSBasis.empty(d)
    basis = orthonormalize_span(seeds, tol, ambient_dim=d)
    frontier = basis
    mstack = np.stack(mults) if mults else np.zeros((0, d, d), dtype=complex)
    while len(frontier) and len(mults) and len(basis) < d * d:
        fresh = []
        for start in range(0, len(frontier), _CHUNK):
            block = frontier.vectors[start : start + _CHUNK]
            cands = (block[:, None] @ mstack[None]).reshape(-1, d, d)
            basis, new = extend_span(basis, cands, tol)
            if len(new):
                fresh.append(new.vectors)
            if len(basis) == d * d:
                break
        frontier = HSBasis(d, np.concatenate(fresh)) if fresh else HSBasis.empty(d)
    return basis


def generate_algebra(gens: Sequence, ambient_dim: int | None = None, tol: float = DEFAULT_TOL,
                     *, lazy: bool = False) -> Subalgebra:
    """Smallest unital *-subalgebra of ``M_d`` containing ``gens``.

    The span is grown by multiplying newly found basis vectors with the
    generators and their adjoints until the dimension stops increasing.
    With ``lazy=True`` the basis is only built when first needed.
    """
    gens = [as_matrix(g) for g in gens]
    if ambient_dim is None:
        if not gens:
            raise ValueError("ambient_dim is required without generators")
        ambient_dim = gens[0].shape[0]
    alg = Subalgebra(ambient_dim, gens, unital=True, tol=tol)
    if not lazy:
        alg.basis  # noqa: B018
    return alg


def full_algebra(d: int) -> Subalgebra:
    def units() -> HSBasis:
        return HSBasis(d, np.eye(d * d, dtype=complex).reshape(d * d, d, d) * np.sqrt(d))

    return Subalgebra(d, clock_and_shift(d) if d > 1 else (), basis_factory=units, full=True)


def scalars(d: int) -> Subalgebra:
    eye = np.eye(d, dtype=complex)
    return Subalgebra(d, [eye], basis=HSBasis(d, eye[None]))


def algebra_from_basis(basis: HSBasis, tol: float = 1e-8) -> Subalgebra:
    eye = np.eye(basis.ambient_dim, dtype=complex)
    return Subalgebra(basis.ambient_dim, basis=basis, unital=basis.contains(eye, tol))


def tensor_product(s: Subalgebra, t: Subalgebra) -> Subalgebra:
    """``s ⊗ t`` inside ``M_{d_s} ⊗ M_{d_t}``."""
    ds, dt = s.ambient_dim, t.ambient_dim
    d = ds * dt

    def pairs() -> HSBasis:
        a, b = s.basis.vectors, t.basis.vectors
        prod = np.einsum("aij,bkl->abikjl", a, b).reshape(len(a) * len(b), d, d)
        return HSBasis(d, prod)

    if s.unital and t.unital:
        eye_s, eye_t = np.eye(ds), np.eye(dt)
        gens = [np.kron(g, eye_t) for g in s.generators] + [np.kron(eye_s, h) for h in t.generators]
        small = s.is_materialized and t.is_materialized and len(s.basis) * len(t.basis) <= MATERIALIZE_LIMIT
        return Subalgebra(d, gens, basis=pairs() if small else None, basis_factory=pairs,
                          full=s.full and t.full)
    basis = pairs()
    return Subalgebra(d, basis=basis, unital=False)


def tensor_power(s: Subalgebra, m: int) -> Subalgebra:
    if m < 1:
        return scalars(1)
    out = s
    for _ in range(m - 1):
        out = tensor_product(out, s)
    return out


def _constrain(xs: np.ndarray, gens: Sequence[np.ndarray], tol: float) -> np.ndarray:
    """Orthonormal combinations of ``xs`` commuting with every generator.

    ``xs`` has shape ``(r, d, d)`` with Frobenius-orthonormal slices.
    """
    d = xs.shape[-1]
    for g in gens:
        if xs.shape[0] == 0:
            break
        res = (g[None] @ xs - xs @ g[None]).reshape(xs.shape[0], d * d)
        gscale = float(np.linalg.norm(g, 2))
        if gscale == 0 or float(np.max(np.abs(res))) <= tol * gscale * 1e-3:
            continue
        coeffs = null_combinations(res, tol, scale=gscale)
        xs = np.tensordot(coeffs, xs, axes=(1, 0))
    return xs


def _generic_frame(gens: Sequence[np.ndarray], d: int, seed: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Eigenframe of a random self-adjoint combination of ``gens``.

    Returns the unitary of eigenvectors and the index groups of (numerically)
    equal eigenvalues.  Merging close eigenvalues is always safe: it only
    enlarges the search space.
    """
    rng = np.random.default_rng(seed)
    h = np.zeros((d, d), dtype=complex)
    for g in gens:
        nrm = np.linalg.norm(g)
        if nrm == 0:
            continue
        g = g / nrm
        re, im = (g + dagger(g)) / 2, (g - dagger(g)) / 2j
        h += rng.normal() * re + rng.normal() * im
    h = (h + dagger(h)) / 2
    evals, vecs = np.linalg.eigh(h)
    groups, current = [], [0]
    for i in range(1, d):
        if evals[i] - evals[i - 1] > GROUP_TOL:
            groups.append(np.array(current))
            current = []
        current.append(i)
    groups.append(np.array(current))
    return vecs, groups


def commutant(s: Subalgebra, tol: float = DEFAULT_TOL, *, cap: int = UNKNOWNS_CAP, seed: int = 0) -> Subalgebra:
    """``s' ∩ M_d``: the matrices commuting with every element of ``s``.

    Solved as the joint nullspace of ``x -> g x - x g`` over a *-closed
    generating set of ``s``.
    """
    key = ("commutant", tol, seed)
    if key in s._cache:
        return s._cache[key]
    d = s.ambient_dim
    gens = s.constraint_set()
    if s.full:
        out = scalars(d)
    else:
        vecs, groups = _generic_frame(gens, d, seed)
        unknowns = sum(len(g) ** 2 for g in groups)
        if unknowns > cap:
            raise ResourceLimitError("commutant unknowns", unknowns, cap)
        xs = np.zeros((unknowns, d, d), dtype=complex)
        row = 0
        for grp in groups:
            for p in grp:
                for q in grp:
                    xs[row, p, q] = 1.0
                    row += 1
        framed = [dagger(vecs) @ g @ vecs for g in gens]
        xs = _constrain(xs, framed, tol)
        xs = vecs[None] @ xs @ dagger(vecs)[None]
        basis = HSBasis(d, xs * np.sqrt(d))
        out = Subalgebra(d, basis=basis, unital=True, tol=tol)
    s._cache[key] = out
    return out


def relative_commutant(b: Subalgebra, c: Subalgebra, tol: float = DEFAULT_TOL, **kw) -> Subalgebra:
    """``b' ∩ c``, solved in the coordinates of ``c``'s basis."""
    if b.ambient_dim != c.ambient_dim:
        raise ValueError(f"ambient mismatch: {b.ambient_dim} vs {c.ambient_dim}")
    if c.full:
        return commutant(b, tol, **kw)
    d = c.ambient_dim
    xs = c.basis.vectors / np.sqrt(d)
    xs = _constrain(xs, b.constraint_set(), tol)
    return algebra_from_basis(HSBasis(d, xs * np.sqrt(d)))


def relative_commutant_by_intersection(b: Subalgebra, c: Subalgebra, tol: float = DEFAULT_TOL) -> Subalgebra:
    """Same as :func:`relative_commutant` but literally ``commutant(b) ∩ c``."""
    return algebra_from_basis(subspace_intersect(commutant(b, tol).basis, c.basis, tol))


def center(s: Subalgebra, tol: float = DEFAULT_TOL, *, seed: int = 0) -> Subalgebra:
    """``s ∩ s'``.

    Small explicit algebras are handled in their own coordinates; otherwise
    the center is read off the commutant, using ``Z(s) = Z(s')`` for unital s.
    """
    key = ("center", tol, seed)
    if key in s._cache:
        return s._cache[key]
    d = s.ambient_dim
    if s.full:
        out = scalars(d)
    else:
        own = s.is_materialized and (len(s.basis) <= 256 or not s.unital)
        if not own and s.is_materialized:
            _, groups = _generic_frame(s.constraint_set(), d, seed)
            own = sum(len(g) ** 2 for g in groups) >= len(s.basis)
        if own:
            out = relative_commutant(s, s, tol)
        else:
            comm = commutant(s, tol, seed=seed)
            out = relative_commutant(comm, comm, tol)
    s._cache[key] = out
    return out


def _hermitian_basis(basis: HSBasis) -> list[np.ndarray]:
    mats = []
    for z in basis.vectors:
        mats.append((z + dagger(z)) / 2)
        mats.append((z - dagger(z)) / 2j)
    return list(orthonormalize_span(mats, 1e-9, ambient_dim=basis.ambient_dim).vectors)


def _integral(x: float) -> int:
    k = round(x)
    if abs(x - k) > 1e-6:
        raise ValueError(f"expected an integral dimension, got {x:.9f}")
    return int(k)


def block_structure(s: Subalgebra, tol: float = GROUP_TOL, *, seed: int = 0) -> BlockStructure:
    """Simple-summand sizes of ``s``.

    A pseudorandom self-adjoint central element is diagonalized; its
    eigenspaces are the minimal central projections ``z_i`` and each block
    size is ``sqrt(dim z_i s z_i)``.  For algebras known only by generators
    the same number is obtained as ``rank(z_i) / sqrt(dim z_i s' z_i)``.

    Raises ``ValueError`` if the numbers are inconsistent with ``s`` being a
    *-algebra.
    """
    key = ("blocks", tol, seed)
    if key in s._cache:
        return s._cache[key]
    d = s.ambient_dim
    if s.full:
        out = BlockStructure((d,), (1,), (np.eye(d, dtype=complex),))
        s._cache[key] = out
        return out
    z = center(s, seed=seed)
    herm = _hermitian_basis(z.basis)
    rng = np.random.default_rng(seed)
    c = sum((rng.normal() * h for h in herm), np.zeros((d, d), dtype=complex))
    evals, vecs = np.linalg.eigh((c + dagger(c)) / 2)
    groups, current = [], [0]
    for i in range(1, d):
        if evals[i] - evals[i - 1] > tol:
            groups.append(current)
            current = []
        current.append(i)
    groups.append(current)

    # for central z, x -> z x is an HS-orthogonal projection of s onto z s z,
    # so dim(z s z) = sum_i tau(b_i^* z b_i) = tau(K z) with K = sum_i b_i b_i^*
    use_own = s.is_materialized
    span = s.basis.vectors if use_own else commutant(s, seed=seed).basis.vectors
    gram = np.einsum("aij,akj->ik", span, np.conj(span))
    blocks, mults, projs = [], [], []
    for grp in groups:
        v = vecs[:, grp]
        p = v @ dagger(v)
        rank = len(grp)
        dim_i = _integral(normalized_trace(gram @ p).real)
        if use_own:
            if dim_i == 0:
                continue
            a = math.isqrt(dim_i)
            if a * a != dim_i or rank % a:
                raise ValueError(f"compressed dimension {dim_i} (rank {rank}) is not that of a full matrix block")
        else:
            m = math.isqrt(dim_i)
            if m == 0 or m * m != dim_i or rank % m:
                raise ValueError(f"commutant block dimension {dim_i} inconsistent with rank {rank}")
            a = rank // m
        blocks.append(a)
        mults.append(rank // a)
        projs.append(p)
    out = BlockStructure(tuple(blocks), tuple(mults), tuple(projs))
    if use_own and out.dimension != len(s.basis):
        raise ValueError(f"block sizes {out.blocks} do not account for dimension {len(s.basis)}")
    s._cache[key] = out
    return out


def conditional_expectation(x, b: Subalgebra) -> np.ndarray:
    """Trace-preserving orthogonal projection of ``x`` onto ``b``."""
    x = as_matrix(x)
    if x.shape[0] != b.ambient_dim:
        raise ValueError("ambient mismatch")
    if b.full:
        return x.copy()
    return b.basis.project(x)


def trace_density_spectrum(s: Subalgebra) -> np.ndarray:
    """Eigenvalues of the density of ``tau|_s`` w.r.t. the canonical trace of ``s``.

    On block ``i`` the density is ``tau(z_i) / a_i`` times the block identity.
    """
    if not s.unital:
        raise ValueError("the tracial density needs a unital subalgebra")
    bs = block_structure(s)
    vals = []
    for a, p in zip(bs.blocks, bs.projections):
        weight = normalized_trace(p).real
        vals.extend([weight / a] * a)
    return np.array(vals)


def entropy_of_trace(s: Subalgebra) -> float:
    """Von Neumann entropy (nats) of the density of the normalized trace on ``s``."""
    lam = trace_density_spectrum(s)
    lam = lam[lam > 1e-14]
    return float(-np.sum(lam * np.log(lam)))


def star_algebra_defect(s: Subalgebra) -> dict[str, float]:
    """Worst residuals of the *-algebra axioms over the basis (quadratic cost)."""
    b = s.basis
    adj = max((b.residual(dagger(v)) for v in b.vectors), default=0.0)
    mul = 0.0
    for v in b.vectors:
        prods = v[None] @ b.vectors
        proj = np.tensordot(
            np.conj(b.vectors.reshape(len(b), -1)) @ prods.reshape(len(b), -1).T / b.ambient_dim,
            b.vectors, axes=(0, 0))
        mul = max(mul, float(np.max(np.linalg.norm((prods - proj).reshape(len(b), -1), axis=1))))
    out = {"adjoint": adj, "product": mul / np.sqrt(b.ambient_dim)}
    if s.unital:
        out["unit"] = b.residual(np.eye(b.ambient_dim))
    return out
