"""The finite tower ``M_k ⊂ ⊗^k M_n`` and its shift.

Level ``l`` carries a copy ``A_l`` of ``A`` in tensor slot ``l`` and the
partial isometry

    r_l = w^{b_1} ⊗ ... ⊗ w^{b_{l-1}} ⊗ r ⊗ 1 ⊗ ... ⊗ 1,   b_m = [l - m ∈ S],

so that ``r_l`` and ``r_m`` pick up a factor ``γ`` exactly when their level
distance lies in the shift set ``S``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .algebra import (
    Subalgebra,
    block_structure,
    commutant,
    generate_algebra,
)
from .generators import AlgebraSpec, GeneratorSet, build_generators
from .numerics import (
    HSBasis,
    ResourceLimitError,
    commutator,
    dagger,
    kron_all,
    max_dev,
    normalized_trace,
    orthonormalize_span,
)
from .report import Check, RelationReport, deviation_check

__all__ = [
    "ShiftSet",
    "triangular_set",
    "validate_shift_set",
    "Tower",
    "build_tower",
    "DEFAULT_CAP",
    "verify_tower_relations",
    "verify_phase_pattern",
    "level_dimensions",
    "level_word_span",
    "reordering_check",
    "tensor_independence_check",
    "tensor_power_basis",
    "index_proxy",
    "GeneratorCorrespondence",
    "shift_map",
    "CommutantRow",
    "CommutantReport",
    "commutant_experiment",
]

DEFAULT_CAP = 256


def _is_triangular(d: int) -> bool:
    if d < 1:
        return False
    t = (int(np.sqrt(8 * d + 1)) - 1) // 2
    return any(x * (x + 1) // 2 == d for x in (t - 1, t, t + 1))


@dataclass(frozen=True)
class ShiftSet:
    """Set of level distances at which the ``r`` generators ``γ``-commute.

    ``rule="triangular"`` makes membership follow the triangular numbers for
    every distance; ``elements`` then holds only a displayed prefix.  Without
    a rule the set is exactly ``elements``.
    """

    elements: tuple[int, ...]
    rule: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(int(x) for x in self.elements))
        if self.rule not in (None, "triangular"):
            raise ValueError(f"unknown shift-set rule {self.rule!r}")

    @property
    def is_infinite(self) -> bool:
        return self.rule is not None

    def contains(self, d: int) -> bool:
        if self.rule == "triangular":
            return _is_triangular(int(d))
        return int(d) in self.elements

    __contains__ = contains

    def iter_elements(self) -> Iterator[int]:
        if self.rule == "triangular":
            for i in itertools.count(1):
                yield i * (i + 1) // 2
        else:
            yield from self.elements

    def stream(self, length: int, start: int = 1) -> list[int]:
        """Characteristic function over distances ``start, ..., start + length - 1``."""
        return [int(self.contains(d)) for d in range(start, start + length)]

    def window_horizon(self, width: int) -> int:
        """A distance ``L`` such that every pattern ``S ∩ [t - width + 1, t]``
        (shifted to the window) with ``t > L`` already occurs for some ``t <= L``.

        Past the point where consecutive gaps exceed ``width`` each window
        holds at most one element, and all such single-element windows occur
        right after the first element that follows such a gap.
        """
        width = max(int(width), 1)
        if not self.is_infinite:
            return (max(self.elements) if self.elements else 0) + width
        it = self.iter_elements()
        prev = next(it)
        for cur in it:
            if cur - prev > width:
                nxt = next(it)
                return nxt + width
            prev = cur
        raise AssertionError("unreachable")

    def describe(self) -> str:
        return self.rule if self.rule else ",".join(map(str, self.elements))


def triangular_set(count: int = 5) -> ShiftSet:
    if count < 1:
        raise ValueError("count must be at least 1")
    return ShiftSet(tuple(i * (i + 1) // 2 for i in range(1, count + 1)), rule="triangular")


def validate_shift_set(elements) -> bool:
    """Strictly increasing positive integers with strictly increasing gaps."""
    xs = [int(x) for x in (elements.elements if isinstance(elements, ShiftSet) else elements)]
    if any(x < 1 for x in xs):
        return False
    gaps = np.diff(xs)
    return bool(np.all(gaps > 0) and np.all(np.diff(gaps) > 0))


def parse_shift_set(text: str) -> ShiftSet:
    text = text.strip()
    if text == "triangular":
        return triangular_set(5)
    elements = tuple(int(t) for t in text.split(",") if t.strip())
    if not validate_shift_set(elements):
        raise ValueError(f"shift set {elements} needs strictly increasing elements and gaps")
    return ShiftSet(elements)


class Tower:
    """Generators of ``M_k`` as concrete ``n^k x n^k`` matrices (built on demand)."""

    def __init__(self, spec: AlgebraSpec, depth: int, sset: ShiftSet, gens: GeneratorSet | None = None):
        if depth < 1:
            raise ValueError("tower depth must be at least 1")
        self.spec = spec
        self.depth = int(depth)
        self.sset = sset
        self.g = gens if gens is not None else build_generators(spec)
        self.n = spec.n
        self.ambient_dim = self.n**self.depth
        self._mats: dict[tuple, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"Tower(spec={self.spec}, depth={self.depth}, sset={self.sset.describe()})"

    def _check_level(self, l: int) -> None:
        if not 1 <= l <= self.depth:
            raise IndexError(f"level {l} outside 1..{self.depth}")

    def embed(self, x: np.ndarray, l: int) -> np.ndarray:
        """``1^{⊗(l-1)} ⊗ x ⊗ 1^{⊗(k-l)}``."""
        self._check_level(l)
        left, right = self.n ** (l - 1), self.n ** (self.depth - l)
        return np.kron(np.kron(np.eye(left), x), np.eye(right))

    def exponents(self, l: int) -> list[int]:
        """``b_1, ..., b_{l-1}`` of the tail of ``r_l``."""
        return [int(self.sset.contains(l - m)) for m in range(1, l)]

    def _slots(self, l: int, head: np.ndarray) -> list[np.ndarray]:
        w, eye = self.g.w, np.eye(self.n)
        tail = [w if b else eye for b in self.exponents(l)]
        return tail + [head] + [eye] * (self.depth - l)

    def r(self, l: int) -> np.ndarray:
        self._check_level(l)
        key = ("r", l)
        if key not in self._mats:
            self._mats[key] = kron_all(self._slots(l, self.g.r))
        return self._mats[key]

    def s(self, l: int) -> np.ndarray:
        key = ("s", l)
        if key not in self._mats:
            r = self.r(l)
            self._mats[key] = r @ dagger(r)
        return self._mats[key]

    def w(self, l: int) -> np.ndarray:
        return self.embed(self.g.w, l)

    def A_generators(self, l: int) -> list[np.ndarray]:
        return [self.embed(x, l) for x in list(self.g.p) + list(self.g.q)]

    def A_basis(self, l: int) -> HSBasis:
        vecs = np.stack([self.embed(b, l) for b in self.g.basis_A.vectors])
        # embedding preserves the normalized trace, hence orthonormality
        return HSBasis(self.ambient_dim, vecs)

    def A_algebra(self, l: int) -> Subalgebra:
        return Subalgebra(self.ambient_dim, self.A_generators(l), basis=self.A_basis(l))

    def head(self, l: int) -> np.ndarray:
        """The part of ``r_l`` (``l > depth``) living in slots ``1..depth``."""
        if l <= self.depth:
            raise ValueError("heads are defined for levels beyond the depth")
        w, eye = self.g.w, np.eye(self.n)
        return kron_all([w if self.sset.contains(l - m) else eye for m in range(1, self.depth + 1)])

    def level_generators(self, levels: Sequence[int]) -> list[np.ndarray]:
        out = []
        for l in levels:
            out.extend(self.A_generators(l))
            out.append(self.r(l))
        return out

    def algebra(self, levels: Sequence[int] | None = None, *, lazy: bool = True) -> Subalgebra:
        """The algebra generated by ``A_l`` and ``r_l`` for the given levels."""
        levels = range(1, self.depth + 1) if levels is None else levels
        return generate_algebra(self.level_generators(levels), self.ambient_dim, lazy=lazy)

    @property
    def trace(self):
        return normalized_trace


def build_tower(spec: AlgebraSpec, k: int, sset: ShiftSet | None = None, cap: int = DEFAULT_CAP) -> Tower:
    """Tower of depth ``k``; the ambient side ``n^k`` must not exceed ``cap``."""
    sset = triangular_set() if sset is None else sset
    if k < 1:
        raise ValueError("tower depth must be at least 1")
    if spec.n**k > cap:
        raise ResourceLimitError("ambient dimension n^k", spec.n**k, cap)
    return Tower(spec, k, sset)


# ---------------------------------------------------------------- relations


def verify_phase_pattern(t: Tower, tol: float = 1e-12) -> RelationReport:
    """``r_l r_m = γ r_m r_l`` for ``l > m`` with ``l - m ∈ S``, commuting otherwise."""
    rep = RelationReport()
    gamma = t.spec.gamma
    worst, pattern = 0.0, {}
    for l in range(1, t.depth + 1):
        for m in range(1, l):
            phase = gamma if t.sset.contains(l - m) else 1.0
            dev = max_dev(t.r(l) @ t.r(m), phase * t.r(m) @ t.r(l))
            worst = max(worst, dev)
            pattern[f"{l},{m}"] = int(t.sset.contains(l - m))
    rep.add(deviation_check("phase pattern r_l r_m = γ^[l-m ∈ S] r_m r_l", worst, tol,
                            depth=t.depth, gamma_pairs=pattern))
    return rep


def verify_tower_relations(t: Tower, tol: float = 1e-12) -> RelationReport:
    """All finite-stage tower identities, one record per family."""
    rep = RelationReport()
    k, spec = t.depth, t.spec
    j, gamma = spec.j, spec.gamma
    eye = np.eye(t.ambient_dim)

    def worst(vals) -> float:
        return max(vals, default=0.0)

    rep.add(deviation_check("[A_l, A_m] = 0 for l != m", worst(
        max_dev(commutator(x, y))
        for l, m in itertools.combinations(range(1, k + 1), 2)
        for x in t.A_generators(l) for y in t.A_generators(m)), tol))
    rep.add(deviation_check("[r_l, A_m] = 0 for l != m", worst(
        max_dev(commutator(t.r(l), y))
        for l in range(1, k + 1) for m in range(1, k + 1) if m != l
        for y in t.A_generators(m)), tol))
    rep.extend(verify_phase_pattern(t, tol))
    rep.add(deviation_check("r_l r_l* = s_l, r_l* r_l = s_l", worst(
        max(max_dev(t.r(l) @ dagger(t.r(l)), t.s(l)), max_dev(dagger(t.r(l)) @ t.r(l), t.s(l)))
        for l in range(1, k + 1)), tol))
    rep.add(deviation_check("tau(s_l) = j/n", worst(
        abs(normalized_trace(t.s(l)) - j / spec.n) for l in range(1, k + 1)), tol))
    rep.add(deviation_check("[s_l, r_m] = 0 for l != m", worst(
        max_dev(commutator(t.s(l), t.r(m)))
        for l in range(1, k + 1) for m in range(1, k + 1) if m != l), tol))

    # conjugation r_L^m r_l^c (r_L*)^m = γ^{cm} r_l^c s_L, L > l, L - l ∈ S, m >= 1
    conj = 0.0
    for L in range(1, k + 1):
        for l in range(1, L):
            if not t.sset.contains(L - l):
                continue
            for m in range(1, j):
                rm = np.linalg.matrix_power(t.r(L), m)
                for c in range(1, j):
                    rc = np.linalg.matrix_power(t.r(l), c)
                    conj = max(conj, max_dev(rm @ rc @ dagger(rm), gamma ** (c * m) * rc @ t.s(L)))
    rep.add(deviation_check("r_L^m r_l^c (r_L*)^m = γ^(cm) r_l^c s_L", conj, tol))

    # averaging over powers of r_l
    avg_dev, uncorrected_dev = 0.0, 0.0
    for l in range(1, k + 1):
        acc = np.zeros_like(eye, dtype=complex)
        for m in range(j):
            rm = np.linalg.matrix_power(t.r(l), m)
            acc += rm @ dagger(rm)
        acc /= j
        avg_dev = max(avg_dev, max_dev(acc, (eye + (j - 1) * t.s(l)) / j))
        uncorrected_dev = max(uncorrected_dev, max_dev(acc, t.s(l)))
    rep.add(deviation_check("(1/j) sum_{m<j} r_l^m (r_l*)^m = (1 + (j-1) s_l)/j", avg_dev, tol))
    rep.add(Check("s_l = (1/j) sum_{m<j} r_l^m (r_l*)^m (uncorrected form; the m = 0 term gives 1)",
                  uncorrected_dev < tol, uncorrected_dev,
                  {"note": "holds only when s_l = 1; the corrected identity is checked above"},
                  informational=True))

    # each level algebra has only n^2 basis elements, so its blocks are read in its own coordinates
    levels = [block_structure(generate_algebra(t.A_generators(l) + [t.r(l)], t.ambient_dim))
              for l in range(1, k + 1)]
    simple = all(bs.blocks == (spec.n,) for bs in levels)
    rep.add(Check("<A_l, r_l> is a copy of M_n", simple,
                  float(max(abs(bs.dimension - spec.n**2) for bs in levels)),
                  {"blocks": [list(bs.blocks) for bs in levels]}))
    return rep


def level_dimensions(t: Tower, *, explicit: bool = True) -> dict[str, int]:
    """``dim M_k`` from the generated algebra versus ``n^{2k}``.

    With ``explicit`` the basis is built by closure; otherwise the dimension
    is read off the block structure.
    """
    alg = t.algebra(lazy=not explicit)
    dim = len(alg.basis) if explicit else alg.dim
    return {"dim": dim, "expected": t.n ** (2 * t.depth)}


def _level_span(t: Tower, l: int) -> HSBasis:
    """``A_l + A_l r_l A_l + ... + A_l r_l^{j-1} A_l``."""
    A = t.A_basis(l).vectors
    d = t.ambient_dim
    terms, rc = [], np.eye(d, dtype=complex)
    for _ in range(t.spec.j):
        terms.append((A[:, None] @ rc[None, None] @ A[None]).reshape(-1, d, d))
        rc = rc @ t.r(l)
    return orthonormalize_span(np.concatenate(terms), ambient_dim=d)


def level_word_span(t: Tower) -> dict[str, int]:
    """Dimension spanned by level-ordered products ``x_1 x_2 ... x_k``."""
    d = t.ambient_dim
    prods = np.eye(d, dtype=complex)[None]
    for l in range(1, t.depth + 1):
        span = _level_span(t, l).vectors
        prods = (prods[:, None] @ span[None]).reshape(-1, d, d)
    return {"dim": len(orthonormalize_span(prods, ambient_dim=d)), "expected": t.n ** (2 * t.depth)}


def reordering_check(t: Tower, tol: float = 1e-9) -> Check:
    """``(A_l r_l + A_l)(A_i r_i + A_i) ⊆ (A_i r_i + A_i)(A_l r_l + A_l)`` for ``i < l``."""
    d = t.ambient_dim

    def piece(l: int) -> np.ndarray:
        A = t.A_basis(l).vectors
        return np.concatenate([A @ t.r(l)[None], A])

    worst = 0.0
    for i, l in itertools.combinations(range(1, t.depth + 1), 2):
        left = (piece(l)[:, None] @ piece(i)[None]).reshape(-1, d, d)
        right = orthonormalize_span((piece(i)[:, None] @ piece(l)[None]).reshape(-1, d, d), ambient_dim=d)
        left_span = orthonormalize_span(left, ambient_dim=d)
        worst = max(worst, max(right.residual(x) for x in left_span.vectors))
    return deviation_check("(A_l r_l + A_l)(A_i r_i + A_i) ⊆ (A_i r_i + A_i)(A_l r_l + A_l)", worst, tol)


def tensor_power_basis(t: Tower, k: int) -> HSBasis:
    """Orthonormal spanning set of the products ``x_1 ... x_k``, ``x_l ∈ A_l``."""
    if not 1 <= k <= t.depth:
        raise ValueError(f"k = {k} outside 1..{t.depth}")
    d = t.ambient_dim
    prods = t.A_basis(1).vectors
    for l in range(2, k + 1):
        # slot-disjoint orthonormal families multiply to an orthonormal family
        prods = (prods[:, None] @ t.A_basis(l).vectors[None]).reshape(-1, d, d)
    return HSBasis(d, prods)


def tensor_independence_check(t: Tower, k: int) -> Check:
    """The products ``x_1 ... x_k`` with ``x_l`` running over a basis of ``A_l``
    span a space of dimension ``(dim A)^k``."""
    if not 1 <= k <= t.depth:
        raise ValueError(f"k = {k} outside 1..{t.depth}")
    prods = tensor_power_basis(t, k).vectors
    dim = len(orthonormalize_span(prods, ambient_dim=t.ambient_dim))
    expected = t.spec.dim_A**k
    return Check(f"dim span A_1...A_{k} products = (dim A)^{k}", dim == expected,
                 float(abs(dim - expected)), {"dim": dim, "expected": expected})


def index_proxy(spec: AlgebraSpec, sset: ShiftSet, kmax: int, cap: int = DEFAULT_CAP) -> Check:
    """``dim M_{k+1} / dim M_k = n^2`` for ``k = 1..kmax-1``."""
    dims = [level_dimensions(build_tower(spec, k, sset, cap), explicit=False)["dim"] for k in range(1, kmax + 1)]
    ratios = [b / a for a, b in zip(dims, dims[1:])]
    ok = all(r == spec.n**2 for r in ratios) and dims[0] == spec.n**2
    return Check("dim M_{k+1} / dim M_k = n^2", ok,
                 float(max((abs(r - spec.n**2) for r in ratios), default=0.0)),
                 {"dims": dims, "ratios": ratios, "n_squared": spec.n**2})


# ---------------------------------------------------------------- shift map


@dataclass
class GeneratorCorrespondence:
    """Generator-level map ``A_l -> A_{l+1}``, ``r_l -> r_{l+1}`` between towers."""

    source: Tower
    target: Tower
    names: list[tuple]

    def source_matrix(self, name: tuple) -> np.ndarray:
        return _named(self.source, name, 0)

    def target_matrix(self, name: tuple) -> np.ndarray:
        return _named(self.target, name, 1)

    def word(self, word: Sequence[tuple], image: bool = False) -> np.ndarray:
        tower = self.target if image else self.source
        out = np.eye(tower.ambient_dim, dtype=complex)
        for name in word:
            out = out @ _named(tower, name, 1 if image else 0)
        return out

    def verify(self, max_length: int = 4, samples: int = 300, pairs: int = 40, seed: int = 0,
               tol: float = 1e-10) -> RelationReport:
        """Check that the map extends to a trace-preserving *-homomorphism on words.

        The domain is the span of random words of length at most
        ``max_length`` together with the concatenations of sampled word pairs.
        Equal Gram matrices of the words and of their images make the linear
        extension well defined; the extension applied to a concatenation
        ``xy`` is then compared with ``Phi(x) Phi(y)``.
        """
        rng = np.random.default_rng(seed)
        names = self.names
        dx, dy = self.source.ambient_dim, self.target.ambient_dim
        words: list[tuple] = [()] + [(x,) for x in names]
        while len(words) < samples:
            length = int(rng.integers(1, max_length + 1))
            words.append(tuple(names[i] for i in rng.integers(0, len(names), length)))
        half = [w for w in words if len(w) <= max_length // 2]
        chosen = [(half[i], half[j]) for i, j in rng.integers(0, len(half), (pairs, 2))]
        words.extend(a + b for a, b in chosen)
        X = np.stack([self.word(w) for w in words])
        Y = np.stack([self.word(w, image=True) for w in words])
        gx = np.conj(X.reshape(len(X), -1)) @ X.reshape(len(X), -1).T / dx
        gy = np.conj(Y.reshape(len(Y), -1)) @ Y.reshape(len(Y), -1).T / dy
        rep = RelationReport()
        rep.add(deviation_check("Gram matrix of words preserved (trace-preserving, well defined)",
                                max_dev(gx, gy), tol, words=len(words)))

        flat = X.reshape(len(X), -1).T
        mult, resid = 0.0, 0.0
        for a, b in chosen:
            xy = self.word(a) @ self.word(b)
            coef, *_ = np.linalg.lstsq(flat, xy.reshape(-1), rcond=None)
            resid = max(resid, max_dev(flat @ coef, xy.reshape(-1)))
            linear_image = np.tensordot(coef, Y, axes=(0, 0))
            mult = max(mult, max_dev(linear_image, self.word(a, True) @ self.word(b, True)))
        rep.add(Check("Phi(xy) = Phi(x) Phi(y) on sampled word pairs", mult < tol and resid < tol, mult,
                      {"source_residual": resid}))
        star = max(max_dev(_named(self.target, _adjoint_name(x), 1), dagger(self.target_matrix(x)))
                   for x in names)
        rep.add(deviation_check("Phi(x*) = Phi(x)* on generators", star, tol))
        rep.add(deviation_check("Phi(1) = 1", max_dev(self.word((), True), np.eye(dy)), tol))
        src = verify_phase_pattern(self.source)
        tgt_pairs = {f"{l + 1},{m + 1}": self.target.sset.contains(l - m)
                     for l in range(1, self.source.depth + 1) for m in range(1, l)}
        same = all(bool(v) == tgt_pairs[_shift_key(key)]
                   for key, v in src.checks[0].data["gamma_pairs"].items())
        img = max((max_dev(self.target.r(l + 1) @ self.target.r(m + 1),
                           (self.target.spec.gamma if self.source.sset.contains(l - m) else 1)
                           * self.target.r(m + 1) @ self.target.r(l + 1))
                   for l in range(1, self.source.depth + 1) for m in range(1, l)), default=0.0)
        rep.add(Check("phase pattern preserved by the shift", same and img < tol, img))
        return rep


def _shift_key(key: str) -> str:
    l, m = (int(x) for x in key.split(","))
    return f"{l + 1},{m + 1}"


def _adjoint_name(name: tuple) -> tuple:
    kind = name[0]
    if kind == "r":
        return ("r*", name[1])
    if kind == "r*":
        return ("r", name[1])
    _, l, (a, b) = name
    return ("E", l, (b, a))


def _named(t: Tower, name: tuple, offset: int) -> np.ndarray:
    kind, l = name[0], name[1] + offset
    if kind == "r":
        return t.r(l)
    if kind == "r*":
        return dagger(t.r(l))
    a, b = name[2]
    e = np.zeros((t.n, t.n), dtype=complex)
    e[a, b] = 1.0
    return t.embed(e, l)


def _matrix_units(spec: AlgebraSpec) -> list[tuple[int, int]]:
    units = []
    for i, a in enumerate(spec.blocks):
        s0 = spec.starts[i]
        units.extend((s0 + x, s0 + y) for x in range(a) for y in range(a))
    return units


def shift_map(t_from: Tower, t_to: Tower) -> GeneratorCorrespondence:
    """One-step shift from depth ``k`` to depth ``k + 1`` on generators."""
    if t_from.spec != t_to.spec:
        raise ValueError(f"spec mismatch: {t_from.spec} vs {t_to.spec}")
    if t_from.sset != t_to.sset:
        raise ValueError("shift-set mismatch")
    if t_to.depth != t_from.depth + 1:
        raise ValueError("target tower must be one level deeper")
    names = []
    for l in range(1, t_from.depth + 1):
        names.extend(("E", l, u) for u in _matrix_units(t_from.spec))
        names.extend([("r", l), ("r*", l)])
    return GeneratorCorrespondence(t_from, t_to, names)


# ---------------------------------------------------------------- commutants


@dataclass
class CommutantRow:
    m: int
    literal_dim: int
    literal_blocks: tuple[int, ...]
    stabilized_dim: int
    stabilized_blocks: tuple[int, ...]
    literal_contains_tensor_A: bool
    stabilized_contains_tensor_A: bool
    heads: int

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "literal": {"dim": self.literal_dim, "blocks": list(self.literal_blocks),
                        "contains_tensor_A": self.literal_contains_tensor_A},
            "stabilized": {"dim": self.stabilized_dim, "blocks": list(self.stabilized_blocks),
                           "contains_tensor_A": self.stabilized_contains_tensor_A, "heads": self.heads},
        }


@dataclass
class CommutantReport:
    """Finite-stage relative commutants ``Φ^k(M_m)' ∩ M_{k+m}`` over a range of ``m``.

    ``literal`` rows commute only with ``Φ^k(M_m)``.  ``stabilized`` rows also
    commute with the parts of ``r_l`` (``l > k + m``) that reach into
    ``M_{k+m}``, which is exactly ``Φ^k(R)' ∩ M_{k+m}``.
    """

    spec: AlgebraSpec
    sset: ShiftSet
    k: int
    rows: list[CommutantRow] = field(default_factory=list)
    target_dim: int = 0
    target_blocks: tuple[int, ...] = ()

    @property
    def dims(self) -> list[int]:
        return [r.stabilized_dim for r in self.rows]

    @property
    def literal_dims(self) -> list[int]:
        return [r.literal_dim for r in self.rows]

    @property
    def contains_tensor_A(self) -> bool:
        return all(r.literal_contains_tensor_A and r.stabilized_contains_tensor_A for r in self.rows)

    @property
    def non_increasing(self) -> bool:
        return all(b <= a for a, b in zip(self.dims, self.dims[1:]))

    @property
    def converged(self) -> bool:
        if not self.rows:
            return False
        last = self.rows[-1]
        return (last.stabilized_dim == self.target_dim
                and tuple(sorted(last.stabilized_blocks)) == tuple(sorted(self.target_blocks)))

    def to_dict(self) -> dict:
        return {
            "spec": list(self.spec.blocks),
            "set": self.sset.describe(),
            "k": self.k,
            "rows": [r.to_dict() for r in self.rows],
            "target": {"dim": self.target_dim, "blocks": sorted(self.target_blocks)},
            "contains_tensor_A": self.contains_tensor_A,
            "non_increasing": self.non_increasing,
            "converged": self.converged,
        }


def _tensor_A_blocks(spec: AlgebraSpec, k: int) -> tuple[int, ...]:
    out = [1]
    for _ in range(k):
        out = [x * a for x in out for a in spec.blocks]
    return tuple(sorted(out))


def commutant_experiment(spec: AlgebraSpec, k: int, m_range: Sequence[int], sset: ShiftSet | None = None,
                         cap: int = DEFAULT_CAP, tol: float = 1e-9, seed: int = 0) -> CommutantReport:
    """Relative commutants of ``Φ^k(M_m)`` inside ``M_{k+m}`` for each ``m``."""
    sset = triangular_set() if sset is None else sset
    if k < 1:
        raise ValueError("k must be at least 1")
    m_range = list(m_range)
    if not m_range or min(m_range) < 1:
        raise ValueError("m values must be positive")
    if spec.n ** (k + max(m_range)) > cap:
        raise ResourceLimitError("ambient dimension n^(k+m)", spec.n ** (k + max(m_range)), cap)
    report = CommutantReport(spec, sset, k, target_dim=spec.dim_A**k, target_blocks=_tensor_A_blocks(spec, k))
    for m in m_range:
        t = build_tower(spec, k + m, sset, cap)
        d = t.ambient_dim
        image_gens = t.level_generators(range(k + 1, k + m + 1))
        literal = commutant(Subalgebra(d, image_gens), tol, seed=seed)
        horizon = t.depth + sset.window_horizon(t.depth)
        heads, seen = [], set()
        for l in range(t.depth + 1, horizon + 1):
            pattern = tuple(int(sset.contains(l - q)) for q in range(1, t.depth + 1))
            if pattern not in seen and any(pattern):
                seen.add(pattern)
                heads.append(t.head(l))
        stabilized = commutant(Subalgebra(d, image_gens + heads), tol, seed=seed)
        tA = tensor_power_basis(t, k)
        row = CommutantRow(
            m=m,
            literal_dim=literal.dim,
            literal_blocks=block_structure(literal).sorted_blocks,
            stabilized_dim=stabilized.dim,
            stabilized_blocks=block_structure(stabilized).sorted_blocks,
            literal_contains_tensor_A=all(literal.basis.contains(x) for x in tA.vectors),
            stabilized_contains_tensor_A=all(stabilized.basis.contains(x) for x in tA.vectors),
            heads=len(heads),
        )
        report.rows.append(row)
    return report
