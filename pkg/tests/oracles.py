"""Independent reference computations used to derive and cross-check test values.

These deliberately avoid the package's own span and commutant machinery:
commutants come from the full Kronecker-form nullspace, spans from matrix
rank, and group computations from exhaustive enumeration.
"""
from __future__ import annotations

import itertools

import numpy as np


def rank_of(mats, tol=1e-9) -> int:
    if len(mats) == 0:
        return 0
    flat = np.stack([np.asarray(m, dtype=complex).ravel() for m in mats])
    return int(np.linalg.matrix_rank(flat, tol=tol * max(1.0, np.abs(flat).max())))


def _commutation_system(gens) -> np.ndarray:
    d = gens[0].shape[0]
    eye = np.eye(d)
    return np.vstack([np.kron(g, eye) - np.kron(eye, g.T) for g in gens])


def commutant_basis(gens, tol=1e-8) -> list[np.ndarray]:
    """Basis of {x : gx = xg for all g}, from the d^2 x d^2 linear system."""
    d = gens[0].shape[0]
    sys_ = _commutation_system(gens)
    # absolute cutoff: a relative one misreads a system that is numerically zero
    _, s, vh = np.linalg.svd(sys_)
    rank = int(np.sum(s > tol))
    ns = vh[rank:].conj().T
    return [ns[:, i].reshape(d, d) for i in range(ns.shape[1])]


def commutant_dim(gens, tol=1e-8) -> int:
    return len(commutant_basis(gens, tol))


def intersection_dim(xs, ys) -> int:
    """dim(X ∩ Y) = dim X + dim Y - dim(X + Y)."""
    return rank_of(xs) + rank_of(ys) - rank_of(list(xs) + list(ys))


def span_closure_dim(gens, d) -> int:
    """Dimension of the unital algebra generated by ``gens`` by naive word growth."""
    words = [np.eye(d, dtype=complex)]
    span_rank = 1
    frontier = words
    gens = list(gens) + [g.conj().T for g in gens]
    while frontier:
        cand = [w @ g for w in frontier for g in gens]
        new = []
        for c in cand:
            if rank_of(words + [c]) > span_rank:
                words.append(c)
                new.append(c)
                span_rank += 1
        frontier = new
    return span_rank


def kernel_by_enumeration(rows, n: int, m: int) -> set[tuple[int, ...]]:
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, m)
    out = set()
    for g in itertools.product(range(n), repeat=m):
        if not len(rows) or np.all(rows @ np.array(g) % n == 0):
            out.add(g)
    return out


def pairing(e: np.ndarray, g, h) -> int:
    return int(np.asarray(g) @ e @ np.asarray(h))
