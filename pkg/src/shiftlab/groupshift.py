"""Twisted group algebra of ``G = ⊕ Z_n`` with an antisymmetric bicharacter.

Generators ``u_1, u_2, ...`` satisfy ``u_i^n = 1`` and
``u_i u_j = γ^{e(i,j)} u_j u_i`` with ``γ = exp(2πi/n)``.  Group elements are
exponent vectors ``g`` and ``u^g = u_1^{g_1} u_2^{g_2} ...`` (ascending order).
Phases of word products are computed as exact integers mod ``n`` and only
turned into roots of unity when coefficients are combined.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .numerics import ResourceLimitError
from .tower import ShiftSet

__all__ = [
    "Bicharacter",
    "bures_yin_bicharacter",
    "stream_bicharacter",
    "explicit_bicharacter",
    "TwistedElement",
    "word_product",
    "commutator_phase",
    "smith_normal_form",
    "Subgroup",
    "kernel_mod_n",
    "SolverResult",
    "commutant_congruence_solver",
    "definition1_phase",
    "check_definition1",
    "Definition1Result",
    "matrix_realization",
]


@dataclass(frozen=True)
class Bicharacter:
    """Exponent rule ``e(i, j) ∈ Z_n`` on 1-based generator indices.

    ``kind`` is ``"explicit"`` (a matrix up to ``size``), ``"bures-yin"`` or
    ``"stream"``; the last two are defined for every index via ``sset``.
    """

    n: int
    kind: str
    sset: ShiftSet | None = None
    table: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("modulus must be positive")
        if self.kind == "explicit":
            t = np.asarray(self.table, dtype=np.int64) % self.n
            if t.ndim != 2 or t.shape[0] != t.shape[1]:
                raise ValueError("explicit table must be square")
            if np.any(np.diag(t) != 0) or np.any((t + t.T) % self.n != 0):
                raise ValueError("explicit table must be antisymmetric mod n with zero diagonal")
            object.__setattr__(self, "table", tuple(tuple(int(x) for x in row) for row in t))
        elif self.kind in ("bures-yin", "stream"):
            if self.sset is None:
                raise ValueError(f"{self.kind} bicharacter needs a shift set")
        else:
            raise ValueError(f"unknown bicharacter kind {self.kind!r}")

    @property
    def size(self) -> int | None:
        return len(self.table) if self.kind == "explicit" else None

    @property
    def step(self) -> int:
        """Index shift realizing one application of the endomorphism."""
        return 2 if self.kind == "bures-yin" else 1

    def _upper(self, i: int, j: int) -> int:
        # value for i < j
        if self.kind == "stream":
            # the later generator picks up γ: u_j u_i = γ u_i u_j
            return -1 if self.sset.contains(j - i) else 0
        if i % 2 == 1:
            return 1 if j == i + 1 else 0
        if j % 2 == 0 and (j - i) % 2 == 0:
            return 1 if self.sset.contains((j - i) // 2) else 0
        return 0

    def exponent(self, i: int, j: int) -> int:
        if i < 1 or j < 1:
            raise IndexError("generator indices are 1-based")
        if self.kind == "explicit":
            if max(i, j) > self.size:
                raise IndexError(f"index beyond explicit size {self.size}")
            return self.table[i - 1][j - 1]
        if i == j:
            return 0
        if i < j:
            return self._upper(i, j) % self.n
        return (-self._upper(j, i)) % self.n

    def matrix(self, m: int) -> np.ndarray:
        """``e(i, j)`` for ``1 <= i, j <= m`` as an integer array."""
        return np.array([[self.exponent(i, j) for j in range(1, m + 1)] for i in range(1, m + 1)],
                        dtype=np.int64)

    def horizon(self, m: int) -> int | None:
        """An index ``T`` such that the equations of generators ``t > T``
        restricted to ``u_1..u_m`` repeat ones with ``m < t <= T``.

        ``None`` for explicit tables, which carry no data past their size.
        """
        if self.kind == "explicit":
            return None
        return m + self.step * (self.sset.window_horizon(m) + 2)


def bures_yin_bicharacter(n: int, sset: ShiftSet) -> Bicharacter:
    """``e(2i-1, 2i) = 1``, ``e(2i, 2i+2d) = 1`` iff ``d ∈ S``, zero otherwise."""
    return Bicharacter(n, "bures-yin", sset=sset)


def stream_bicharacter(n: int, sset: ShiftSet) -> Bicharacter:
    """One-step stream: ``u_{i+d} u_i = γ u_i u_{i+d}`` iff ``d ∈ S``."""
    return Bicharacter(n, "stream", sset=sset)


def explicit_bicharacter(n: int, table) -> Bicharacter:
    t = np.asarray(table, dtype=np.int64)
    return Bicharacter(n, "explicit", table=tuple(map(tuple, t)))


def _as_word(g, n: int) -> tuple[int, ...]:
    g = tuple(int(x) % n for x in g)
    while g and g[-1] == 0:
        g = g[:-1]
    return g


def _normal_phase(bc: Bicharacter, g: Sequence[int], h: Sequence[int]) -> int:
    """Exponent of ``φ(g, h)`` in ``u^g u^h = φ(g, h) u^{g+h}``:
    ``Σ_{i > j} e(i, j) g_i h_j``."""
    total = 0
    for i, gi in enumerate(g, start=1):
        if gi == 0:
            continue
        for j, hj in enumerate(h[: i - 1], start=1):
            if hj:
                total += bc.exponent(i, j) * gi * hj
    return total % bc.n


def word_product(bc: Bicharacter, g: Sequence[int], h: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """``u^g u^h = γ^c u^{g+h}``; returns ``(c, g + h)`` exactly."""
    width = max(len(g), len(h))
    gg = tuple(g) + (0,) * (width - len(g))
    hh = tuple(h) + (0,) * (width - len(h))
    return _normal_phase(bc, gg, hh), _as_word([x + y for x, y in zip(gg, hh)], bc.n)


def commutator_phase(bc: Bicharacter, g: Sequence[int], h: Sequence[int]) -> int:
    """Exponent ``c`` with ``u^g u^h = γ^c u^h u^g``, namely ``Σ_{i,j} e(i,j) g_i h_j``."""
    total = 0
    for i, gi in enumerate(g, start=1):
        if gi == 0:
            continue
        for j, hj in enumerate(h, start=1):
            if hj:
                total += bc.exponent(i, j) * gi * hj
    return total % bc.n


@dataclass(frozen=True)
class TwistedElement:
    """Finite combination ``Σ c_g u^g``.

    ``terms`` maps trimmed exponent words to complex coefficients.  The phase
    of every word product is first computed as an exact exponent mod ``n``
    (see :func:`word_product`) and only then turned into a root of unity.
    """

    bc: Bicharacter
    terms: dict = field(default_factory=dict)

    @classmethod
    def word(cls, bc: Bicharacter, g: Sequence[int], coeff: complex = 1.0) -> "TwistedElement":
        return cls(bc, {_as_word(g, bc.n): complex(coeff)}) if coeff != 0 else cls(bc, {})

    @classmethod
    def one(cls, bc: Bicharacter) -> "TwistedElement":
        return cls.word(bc, ())

    @classmethod
    def generator(cls, bc: Bicharacter, i: int, power: int = 1) -> "TwistedElement":
        g = [0] * i
        g[i - 1] = power
        return cls.word(bc, g)

    def _check(self, other: "TwistedElement") -> None:
        if other.bc != self.bc:
            raise ValueError("bicharacter mismatch")

    def __add__(self, other: "TwistedElement") -> "TwistedElement":
        self._check(other)
        out = dict(self.terms)
        for g, c in other.terms.items():
            out[g] = out.get(g, 0) + c
        return TwistedElement(self.bc, {g: c for g, c in out.items() if abs(c) > 1e-15})

    def scale(self, c: complex) -> "TwistedElement":
        return TwistedElement(self.bc, {g: c * v for g, v in self.terms.items() if c * v != 0})

    def __mul__(self, other: "TwistedElement") -> "TwistedElement":
        self._check(other)
        n = self.bc.n
        gamma = np.exp(2j * np.pi / n)
        out: dict = {}
        for g, a in self.terms.items():
            for h, b in other.terms.items():
                c, key = word_product(self.bc, g, h)
                out[key] = out.get(key, 0) + a * b * gamma**c
        return TwistedElement(self.bc, {g: c for g, c in out.items() if abs(c) > 1e-15})

    def multiply(self, other: "TwistedElement") -> "TwistedElement":
        return self * other

    def trace(self) -> complex:
        """Coefficient of the identity word."""
        return complex(self.terms.get((), 0.0))

    def adjoint(self) -> "TwistedElement":
        # (u^g)^* = u_k^{-g_k} ... u_1^{-g_1}, reordered into normal form
        out = TwistedElement(self.bc, {})
        for g, c in self.terms.items():
            acc = TwistedElement.one(self.bc)
            for i in reversed(range(len(g))):
                if g[i]:
                    acc = acc * TwistedElement.generator(self.bc, i + 1, -g[i])
            out = out + acc.scale(np.conj(c))
        return out

    def coefficient(self, g: Sequence[int]) -> complex:
        return complex(self.terms.get(_as_word(g, self.bc.n), 0.0))


# ---------------------------------------------------------------- integer linear algebra


def smith_normal_form(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(D, U, V)`` with ``U @ a @ V = D`` diagonal, ``U``, ``V`` unimodular.

    Exact integer arithmetic on Python ints (object arrays).
    """
    a = np.array(a, dtype=object)
    rows, cols = a.shape
    d = a.copy()
    u = np.array([[int(i == j) for j in range(rows)] for i in range(rows)], dtype=object)
    v = np.array([[int(i == j) for j in range(cols)] for i in range(cols)], dtype=object)
    for t in range(min(rows, cols)):
        while True:
            nz = [(abs(d[i, j]), i, j) for i in range(t, rows) for j in range(t, cols) if d[i, j] != 0]
            if not nz:
                return d, u, v
            _, i, j = min(nz)
            d[[t, i]] = d[[i, t]]
            u[[t, i]] = u[[i, t]]
            d[:, [t, j]] = d[:, [j, t]]
            v[:, [t, j]] = v[:, [j, t]]
            done = True
            for i in range(t + 1, rows):
                q = d[i, t] // d[t, t]
                if q:
                    d[i] -= q * d[t]
                    u[i] -= q * u[t]
                if d[i, t]:
                    done = False
            for j in range(t + 1, cols):
                q = d[t, j] // d[t, t]
                if q:
                    d[:, j] -= q * d[:, t]
                    v[:, j] -= q * v[:, t]
                if d[t, j]:
                    done = False
            if not done:
                continue
            bad = [(i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if d[i, j] % d[t, t]]
            if bad:
                i, _ = bad[0]
                d[t] += d[i]
                u[t] += u[i]
                continue
            if d[t, t] < 0:
                d[t] = -d[t]
                u[t] = -u[t]
            break
    return d, u, v


@dataclass(frozen=True)
class Subgroup:
    """Subgroup of ``Z_n^m`` given by generators (rows)."""

    n: int
    m: int
    generators: tuple[tuple[int, ...], ...]

    @classmethod
    def from_vectors(cls, n: int, m: int, vectors: Iterable[Sequence[int]]) -> "Subgroup":
        gens = []
        for v in vectors:
            v = tuple(int(x) % n for x in v)
            if len(v) != m:
                raise ValueError("vector length mismatch")
            if any(v) and v not in gens:
                gens.append(v)
        return cls(n, m, tuple(gens))

    @classmethod
    def spanned_by_units(cls, n: int, m: int, indices: Iterable[int]) -> "Subgroup":
        return cls.from_vectors(n, m, [[int(i == j) for i in range(1, m + 1)] for j in indices])

    def _decomp(self):
        if not self.generators:
            return None
        return smith_normal_form(np.array(self.generators, dtype=object).T)

    @property
    def order(self) -> int:
        dec = self._decomp()
        if dec is None:
            return 1
        d = dec[0]
        out = 1
        for i in range(min(d.shape)):
            out *= self.n // gcd(int(d[i, i]), self.n)
        return out

    def contains(self, g: Sequence[int]) -> bool:
        g = [int(x) % self.n for x in g]
        if not any(g):
            return True
        dec = self._decomp()
        if dec is None:
            return False
        d, u, _ = dec
        rhs = [int(x) % self.n for x in u.dot(np.array(g, dtype=object))]
        for i, val in enumerate(rhs):
            di = int(d[i, i]) if i < min(d.shape) else 0
            if val % gcd(di, self.n):
                return False
        return True

    def issubset(self, other: "Subgroup") -> bool:
        return all(other.contains(g) for g in self.generators)

    def same_as(self, other: "Subgroup") -> bool:
        return self.n == other.n and self.m == other.m and self.issubset(other) and other.issubset(self)

    def support(self) -> list[int]:
        """1-based indices on which some element is nonzero."""
        return [i + 1 for i in range(self.m) if any(g[i] for g in self.generators)]

    def elements(self, limit: int = 1 << 16) -> set[tuple[int, ...]]:
        if self.order > limit:
            raise ResourceLimitError("subgroup order", self.order, limit)
        out = {tuple([0] * self.m)}
        frontier = list(out)
        while frontier:
            nxt = []
            for x in frontier:
                for g in self.generators:
                    y = tuple((a + b) % self.n for a, b in zip(x, g))
                    if y not in out:
                        out.add(y)
                        nxt.append(y)
            frontier = nxt
        return out

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "order": self.order, "generators": [list(g) for g in self.generators]}


def kernel_mod_n(rows, n: int, m: int) -> Subgroup:
    """``{g ∈ Z_n^m : rows @ g ≡ 0 (mod n)}``."""
    rows = np.array(rows, dtype=object).reshape(-1, m)
    if rows.shape[0] == 0:
        return Subgroup.spanned_by_units(n, m, range(1, m + 1))
    d, _, v = smith_normal_form(rows)
    gens = []
    for i in range(m):
        di = int(d[i, i]) if i < min(d.shape) else 0
        mult = n // gcd(di, n)
        if mult % n:
            gens.append([int(x) * mult for x in v[:, i]])
    return Subgroup.from_vectors(n, m, gens)


# ---------------------------------------------------------------- commutant solver


@dataclass
class SolverResult:
    """Commutant subgroups for ``Ψ^k`` at truncation ``m``.

    ``raw``: commutes with the shifted generators up to index ``m``.
    ``consecutive``: additionally with those up to ``m + step``.
    ``stable``: additionally with every later generator (exact, via the horizon).
    """

    n: int
    step: int
    k: int
    m: int
    raw: Subgroup
    consecutive: Subgroup
    stable: Subgroup
    horizon: int | None

    @property
    def algebra_dim(self) -> int:
        return self.stable.order

    def to_dict(self) -> dict:
        return {
            "n": self.n, "shift_step": self.step, "k": self.k, "truncation": self.m,
            "horizon": self.horizon,
            "raw": self.raw.to_dict(),
            "consecutive": self.consecutive.to_dict(),
            "stable": self.stable.to_dict(),
            "stable_support": self.stable.support(),
            "algebra_dim": self.algebra_dim,
        }


def _equations(bc: Bicharacter, first: int, last: int, m: int) -> list[list[int]]:
    return [[bc.exponent(i, t) for i in range(1, m + 1)] for t in range(first, last + 1)]


def commutant_congruence_solver(bc: Bicharacter, shift_step: int, k: int, m: int,
                                n: int | None = None) -> SolverResult:
    """Exponent vectors ``g ∈ Z_n^m`` with ``u^g`` commuting with every ``u_t``, ``t > shift_step * k``.

    Commutation with ``u_t`` is the congruence ``Σ_i e(i, t) g_i ≡ 0 (mod n)``.
    """
    if n is not None and n != bc.n:
        raise ValueError(f"modulus {n} does not match the bicharacter modulus {bc.n}")
    if k < 0 or shift_step < 1:
        raise ValueError("need k >= 0 and shift_step >= 1")
    if m <= shift_step * k:
        raise ValueError(f"truncation m = {m} must exceed shift_step * k = {shift_step * k}")
    first = shift_step * k + 1
    raw = kernel_mod_n(_equations(bc, first, m, m), bc.n, m)
    horizon = bc.horizon(m)
    if horizon is None:
        # explicit table: nothing is known past its size
        horizon = bc.size
        cons = kernel_mod_n(_equations(bc, first, min(m + shift_step, bc.size), m), bc.n, m)
    else:
        cons = kernel_mod_n(_equations(bc, first, m + shift_step, m), bc.n, m)
    stable = kernel_mod_n(_equations(bc, first, max(horizon, m), m), bc.n, m)
    return SolverResult(bc.n, shift_step, k, m, raw, cons, stable, horizon)


# ---------------------------------------------------------------- n-unitary shift words


def _validate_word(n: int, Q: Sequence[int], S: Sequence[int]) -> None:
    if len(Q) != len(S) or not Q:
        raise ValueError("Q and S must be non-empty and of equal length")
    if Q[0] < 0 or any(b <= a for a, b in zip(Q, Q[1:])):
        raise ValueError(f"Q = {tuple(Q)} must be strictly increasing and non-negative")
    if any(not 1 <= s <= n - 1 for s in S):
        raise ValueError(f"exponents S = {tuple(S)} must lie in 1..{n - 1}")


def definition1_phase(bc: Bicharacter, Q: Sequence[int], S: Sequence[int], k: int) -> int:
    """Exponent ``c`` with ``Ψ^k(u) u(Q,S) = γ^c u(Q,S) Ψ^k(u)`` for a 1-step shift."""
    _validate_word(bc.n, Q, S)
    return sum(bc.exponent(k + 1, q + 1) * s for q, s in zip(Q, S)) % bc.n


@dataclass
class Definition1Result:
    k: int | None
    phase_exponent: int | None
    n: int
    commutation_ok: bool
    unitary_order_ok: bool

    @property
    def lam(self) -> complex | None:
        if self.phase_exponent is None:
            return None
        return complex(np.exp(2j * np.pi * self.phase_exponent / self.n))

    def to_dict(self) -> dict:
        lam = self.lam
        return {
            "k": self.k,
            "phase_exponent": self.phase_exponent,
            "lambda": None if lam is None else [lam.real, lam.imag],
            "generator_order_n": self.unitary_order_ok,
            "shifted_commute_or_gamma": self.commutation_ok,
        }


def check_definition1(bc: Bicharacter, Q: Sequence[int], S: Sequence[int], k_bound: int,
                      truncation: int | None = None, k_min: int = 1) -> Definition1Result:
    """Smallest ``k_min <= k <= k_bound`` with a nontrivial phase between ``Ψ^k(u)`` and ``u(Q,S)``.

    Also reports whether ``u^n = 1`` and whether ``Ψ^k(u) u ∈ {u Ψ^k(u), γ u Ψ^k(u)}``
    for every ``k <= k_bound``.  ``truncation`` bounds the generator indices used.
    """
    _validate_word(bc.n, Q, S)
    if truncation is not None and max(max(Q) + 1, k_bound + 1) > truncation:
        raise ValueError("word or k_bound exceeds the truncation")
    u = TwistedElement.generator(bc, 1)
    power = TwistedElement.one(bc)
    for _ in range(bc.n):
        power = power * u
    unitary_ok = power.terms.keys() == {()} and abs(power.trace() - 1) < 1e-12
    commutation_ok = all(bc.exponent(k + 1, 1) in (0, 1 % bc.n) for k in range(1, k_bound + 1))
    for k in range(k_min, k_bound + 1):
        c = definition1_phase(bc, Q, S, k)
        if c:
            return Definition1Result(k, c, bc.n, commutation_ok, unitary_ok)
    return Definition1Result(None, None, bc.n, commutation_ok, unitary_ok)


# ---------------------------------------------------------------- matrices


def matrix_realization(bc: Bicharacter, m: int, cap: int = 4096) -> list[np.ndarray]:
    """Left-regular matrices ``U_1..U_m`` on ``ℓ^2(Z_n^m)``.

    Basis vectors are indexed by exponent words in lexicographic order with
    ``g_1`` most significant.
    """
    n = bc.n
    size = n**m
    if size > cap:
        raise ResourceLimitError("representation dimension n^m", size, cap)
    gamma = np.exp(2j * np.pi / n)
    e = bc.matrix(m)
    words = list(itertools.product(range(n), repeat=m))
    index = {w: i for i, w in enumerate(words)}
    mats = []
    for i in range(m):
        U = np.zeros((size, size), dtype=complex)
        for h in words:
            # u_i u^h = γ^{Σ_{b<i} e(i,b) h_b} u^{h + e_i}
            ph = int(sum(e[i, b] * h[b] for b in range(i))) % n
            target = list(h)
            target[i] = (target[i] + 1) % n
            U[index[tuple(target)], index[h]] = gamma**ph
        mats.append(U)
    return mats
