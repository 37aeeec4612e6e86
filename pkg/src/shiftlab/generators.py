"""Concrete generators of ``A = ⊕ M_{a_i} ⊆ M_n`` and of ``M_n = <A, r>``.

Permutation convention: the cycle ``(c_1 c_2 ... c_t)`` is the matrix sending
``e_{c_1} -> e_{c_2} -> ... -> e_{c_t} -> e_{c_1}``.  In particular the full
cycle ``u`` satisfies ``u e_i = e_{i+1 mod n}``, and with this convention
``u = v_1 v_2 ... v_j v`` holds for every block pattern.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import Subalgebra, algebra_from_basis, center, generate_algebra
from .numerics import (
    HSBasis,
    commutator,
    dagger,
    max_dev,
    normalized_trace,
    orthonormalize_span,
)
from .report import Check, RelationReport, deviation_check

__all__ = [
    "AlgebraSpec",
    "GeneratorSet",
    "build_generators",
    "cycle_matrix",
    "verify_generator_relations",
    "filtration_dimensions",
    "verify_filtration",
]


@dataclass(frozen=True)
class AlgebraSpec:
    """Block sizes ``(a_1, ..., a_j)`` of ``A = ⊕ M_{a_i}``, embedded in ``M_n``."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(a) for a in self.blocks)
        if not blocks:
            raise ValueError("an algebra spec needs at least one block")
        if any(a < 1 for a in blocks):
            raise ValueError(f"block sizes must be positive, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def parse(cls, text: str) -> "AlgebraSpec":
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.blocks)) + ")"

    @property
    def n(self) -> int:
        return sum(self.blocks)

    @property
    def j(self) -> int:
        return len(self.blocks)

    @property
    def gamma(self) -> complex:
        return np.exp(2j * np.pi / self.j)

    @property
    def block_gammas(self) -> tuple[complex, ...]:
        return tuple(np.exp(2j * np.pi / a) for a in self.blocks)

    @property
    def dim_A(self) -> int:
        return sum(a * a for a in self.blocks)

    @property
    def starts(self) -> tuple[int, ...]:
        """0-based first index of each block."""
        return tuple(int(x) for x in np.cumsum((0,) + self.blocks[:-1]))

    @property
    def ends(self) -> tuple[int, ...]:
        """1-based last position of each block: ``a_1, a_1 + a_2, ..., n``."""
        return tuple(int(x) for x in np.cumsum(self.blocks))

    def block_slice(self, i: int) -> slice:
        return slice(self.starts[i], self.starts[i] + self.blocks[i])


def cycle_matrix(n: int, cycle: Sequence[int]) -> np.ndarray:
    """Permutation matrix of a cycle given in 1-based positions."""
    perm = np.arange(n)
    cyc = [c - 1 for c in cycle]
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        perm[a] = b
    m = np.zeros((n, n), dtype=complex)
    m[perm, np.arange(n)] = 1.0
    return m


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    spec: AlgebraSpec
    p: tuple[np.ndarray, ...]
    q: tuple[np.ndarray, ...]
    u: np.ndarray
    v: np.ndarray
    v_blocks: tuple[np.ndarray, ...]
    s: np.ndarray
    r: np.ndarray
    w: np.ndarray
    basis_A: HSBasis
    basis_D: HSBasis

    @cached_property
    def algebra_A(self) -> Subalgebra:
        return algebra_from_basis(self.basis_A)

    @property
    def block_identities(self) -> list[np.ndarray]:
        out = []
        for i in range(self.spec.j):
            e = np.zeros((self.spec.n, self.spec.n), dtype=complex)
            sl = self.spec.block_slice(i)
            e[sl, sl] = np.eye(self.spec.blocks[i])
            out.append(e)
        return out


def build_generators(spec: AlgebraSpec) -> GeneratorSet:
    n, j = spec.n, spec.j
    eye = np.eye(n, dtype=complex)
    p, q, v_blocks, units = [], [], [], []
    for i, a in enumerate(spec.blocks):
        sl = spec.block_slice(i)
        gi = spec.block_gammas[i]
        pi = np.zeros((n, n), dtype=complex)
        pi[sl, sl] = np.diag(gi ** np.arange(a))
        qi = np.zeros((n, n), dtype=complex)
        qi[sl, sl] = np.roll(np.eye(a, dtype=complex), 1, axis=0)
        blk = np.zeros((n, n), dtype=complex)
        blk[sl, sl] = np.eye(a)
        p.append(pi)
        q.append(qi)
        v_blocks.append(qi + eye - blk)
        for x in range(a):
            for y in range(a):
                e = np.zeros((n, n), dtype=complex)
                e[spec.starts[i] + x, spec.starts[i] + y] = 1.0
                units.append(e)
    u = cycle_matrix(n, list(range(1, n + 1)))
    v = cycle_matrix(n, list(spec.ends))
    s = np.zeros((n, n), dtype=complex)
    for c in spec.ends:
        s[c - 1, c - 1] = 1.0
    r = s @ v @ s
    w = np.zeros((n, n), dtype=complex)
    for i in range(j):
        sl = spec.block_slice(i)
        w[sl, sl] = spec.gamma**i * np.eye(spec.blocks[i])
    diag_units = [np.diag(row) for row in np.eye(n, dtype=complex)]
    return GeneratorSet(
        spec=spec,
        p=tuple(p),
        q=tuple(q),
        u=u,
        v=v,
        v_blocks=tuple(v_blocks),
        s=s,
        r=r,
        w=w,
        basis_A=orthonormalize_span(units),
        basis_D=orthonormalize_span(diag_units),
    )


def _power(m: np.ndarray, k: int) -> np.ndarray:
    return np.linalg.matrix_power(m, k)


def verify_generator_relations(g: GeneratorSet, tol: float = 1e-12) -> RelationReport:
    """Check every stated relation among ``p_i, q_i, u, v, s, r, w``.

    Each record holds the largest entrywise deviation.
    """
    spec = g.spec
    n, j, gamma = spec.n, spec.j, spec.gamma
    eye = np.eye(n)
    rep = RelationReport()
    add = lambda name, dev, **data: rep.add(deviation_check(name, dev, tol, **data))  # noqa: E731

    add("u^n = 1", max_dev(_power(g.u, n), eye))
    add("v^j = 1", max_dev(_power(g.v, j), eye))
    blk = g.block_identities
    add("p_i^a_i = q_i^a_i = 1_i", max(
        max(max_dev(_power(pi, a), e), max_dev(_power(qi, a), e))
        for pi, qi, a, e in zip(g.p, g.q, spec.blocks, blk)))
    add("p_i q_i = gamma_i q_i p_i", max(
        max_dev(pi @ qi, gi * qi @ pi) for pi, qi, gi in zip(g.p, g.q, spec.block_gammas)))
    add("r = s v s", max_dev(g.r, g.s @ g.v @ g.s))
    add("r = v s = s v", max(max_dev(g.r, g.v @ g.s), max_dev(g.r, g.s @ g.v)))
    add("[s, v] = [s, r] = 0", max(max_dev(commutator(g.s, g.v)), max_dev(commutator(g.s, g.r))))
    add("r r* = r* r = s", max(max_dev(g.r @ dagger(g.r), g.s), max_dev(dagger(g.r) @ g.r, g.s)))
    add("r^j = s", max_dev(_power(g.r, j), g.s))
    add("r* = r^(j-1)", max_dev(dagger(g.r), _power(g.r, j - 1) if j > 1 else g.s))
    prod = eye.astype(complex)
    for vi in g.v_blocks:
        prod = prod @ vi
    add("u = v_1 ... v_j v", max_dev(g.u, prod @ g.v))
    add("Ad w(r) = gamma r", max_dev(g.w @ g.r @ dagger(g.w), gamma * g.r))
    add("Ad w acts trivially on A", max(
        (max_dev(g.w @ a @ dagger(g.w), a) for a in g.basis_A.vectors), default=0.0))
    add("w unitary", max_dev(g.w @ dagger(g.w), eye))
    add("w^j = 1", max_dev(_power(g.w, j), eye))

    A = g.algebra_A
    z = center(A)
    in_center = max(z.basis.residual(g.w), max((max_dev(commutator(g.w, a)) for a in A.basis.vectors), default=0.0))
    add("w central in A", in_center)

    s_diag = np.diag(g.s)
    s_ok = max_dev(g.s, np.diag(s_diag)) + max_dev(g.s @ g.s, g.s)
    positions = tuple(int(i) + 1 for i in np.flatnonzero(np.abs(s_diag) > 0.5))
    rep.add(Check("s diagonal projection at block ends", s_ok < tol and positions == spec.ends,
                  s_ok, {"positions": list(positions)}))
    add("tau(s) = j/n", abs(normalized_trace(g.s) - j / n), j=j, n=n)

    def preserves_D(x: np.ndarray) -> float:
        return max(g.basis_D.residual(x @ d @ dagger(x)) for d in g.basis_D.vectors)

    add("Ad u maps D to D", preserves_D(g.u))
    add("Ad v maps D to D", preserves_D(g.v))
    add("A spanned by words in p_i, q_i", _p_q_generation_defect(g))
    return rep


def _p_q_generation_defect(g: GeneratorSet) -> float:
    """Distance of the span of words in ``p_i, q_i`` (per block) from ``A``."""
    words = []
    for pi, qi, a in zip(g.p, g.q, g.spec.blocks):
        for x in range(a):
            for y in range(a):
                words.append(_power(pi, x) @ _power(qi, y) if (x or y) else pi @ dagger(pi))
    span = orthonormalize_span(words)
    return float(abs(len(span) - g.spec.dim_A)) + max(span.residual(b) for b in g.basis_A.vectors)


def filtration_dimensions(g: GeneratorSet) -> dict[str, object]:
    """Dimensions of ``A + A r A + ... + A r^{t} A`` for ``t = 0..j-1`` and of ``<A, r>``."""
    n = g.spec.n
    A = g.basis_A.vectors
    cumulative = []
    basis = HSBasis.empty(n)
    rt = np.eye(n, dtype=complex)
    for t in range(g.spec.j):
        term = (A[:, None] @ rt[None, None] @ A[None]).reshape(-1, n, n)
        basis = orthonormalize_span(np.concatenate([basis.vectors, term]), ambient_dim=n)
        cumulative.append(len(basis))
        rt = rt @ g.r
    full = generate_algebra(list(A) + [g.r])
    return {"cumulative": cumulative, "filtration": cumulative[-1], "generated": full.dim, "n_squared": n * n}


def verify_filtration(g: GeneratorSet) -> Check:
    dims = filtration_dimensions(g)
    n2 = dims["n_squared"]
    ok = dims["filtration"] == n2 and dims["generated"] == n2
    return Check("A + ArA + ... + Ar^(j-1)A = <A, r> = M_n", ok, float(abs(dims["filtration"] - n2)), dims)
