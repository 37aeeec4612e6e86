"""Experiment batteries returning :class:`~shiftlab.report.Check` records."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .algebra import (
    Subalgebra,
    algebra_from_basis,
    conditional_expectation,
    entropy_of_trace,
    full_algebra,
    generate_algebra,
    relative_commutant,
    tensor_power,
)
from .generators import AlgebraSpec, build_generators, verify_filtration, verify_generator_relations
from .groupshift import (
    bures_yin_bicharacter,
    check_definition1,
    commutant_congruence_solver,
    definition1_phase,
    matrix_realization,
    stream_bicharacter,
    Subgroup,
)
from .numerics import HSBasis, kron, max_dev
from .report import Check, deviation_check
from .tower import (
    DEFAULT_CAP,
    ShiftSet,
    build_tower,
    commutant_experiment,
    index_proxy,
    level_dimensions,
    level_word_span,
    reordering_check,
    shift_map,
    tensor_independence_check,
    verify_tower_relations,
)

__all__ = [
    "generator_checks",
    "tower_checks",
    "commutant_checks",
    "entropy_values",
    "entropy_checks",
    "conditional_expectation_checks",
    "groupshift_checks",
    "realization_agreement",
    "definition1_checks",
    "paired_bicharacter_for",
]


def _prefixed(prefix: str, checks) -> list[Check]:
    out = []
    for c in checks:
        out.append(Check(f"{prefix}: {c.name}", c.passed, c.deviation, c.data, c.informational))
    return out


def generator_checks(spec: AlgebraSpec, tol: float = 1e-12) -> list[Check]:
    g = build_generators(spec)
    rep = verify_generator_relations(g, tol)
    rep.add(verify_filtration(g))
    return _prefixed(f"generators {spec}", rep)


def tower_checks(spec: AlgebraSpec, depth: int, sset: ShiftSet, cap: int = DEFAULT_CAP,
                 tol: float = 1e-12, seed: int = 0, word_limit: int = 64) -> list[Check]:
    """Relations, dimension counts and the shift for one tower.

    Explicit spans (level words, full closure) are only built while the
    ambient side is at most ``word_limit``.
    """
    t = build_tower(spec, depth, sset, cap)
    prefix = f"tower {spec} depth {depth}"
    rep = verify_tower_relations(t, tol)
    explicit = t.ambient_dim <= word_limit
    dims = level_dimensions(t, explicit=explicit)
    rep.add(Check("dim M_k = n^(2k)", dims["dim"] == dims["expected"],
                  float(abs(dims["dim"] - dims["expected"])), dict(dims, explicit=explicit)))
    if explicit:
        words = level_word_span(t)
        rep.add(Check("level-ordered words span M_k", words["dim"] == words["expected"],
                      float(abs(words["dim"] - words["expected"])), words))
        rep.add(reordering_check(t))
        rep.add(tensor_independence_check(t, depth))
    rep.add(index_proxy(spec, sset, depth, cap))
    if depth >= 2:
        corr = shift_map(build_tower(spec, depth - 1, sset, cap), t)
        rep.extend(_prefixed("shift", corr.verify(seed=seed)))
    return _prefixed(prefix, rep)


def paired_bicharacter_for(spec: AlgebraSpec, sset: ShiftSet):
    """Twisted-group model of the tower when ``A`` is spanned by powers of ``w``.

    For ``spec = (1, 1)`` the tower is generated by ``w_l`` and ``r_l`` with
    ``w_l r_l = -r_l w_l`` and ``r_l r_m = ± r_m r_l``, i.e. the two-step
    bicharacter on ``u_{2l-1} = w_l``, ``u_{2l} = r_l``.
    """
    if spec.blocks == (1, 1):
        return bures_yin_bicharacter(2, sset)
    return None


def commutant_checks(spec: AlgebraSpec, k: int, m_values: Sequence[int], sset: ShiftSet,
                     cap: int = DEFAULT_CAP, seed: int = 0) -> tuple[list[Check], dict]:
    rep = commutant_experiment(spec, k, m_values, sset, cap=cap, seed=seed)
    data = rep.to_dict()
    prefix = f"commutant {spec} k={k}"
    out = [
        Check(f"{prefix}: tensor power of A contained in every commutant", rep.contains_tensor_A, None,
              {"target_dim": rep.target_dim}),
        Check(f"{prefix}: dimensions at least (dim A)^k", all(d >= rep.target_dim for d in rep.dims), None,
              {"dims": rep.dims, "lower_bound": rep.target_dim}),
        Check(f"{prefix}: dimensions at most n^(2k)", all(d <= spec.n ** (2 * k) for d in rep.literal_dims), None,
              {"literal_dims": rep.literal_dims, "upper_bound": spec.n ** (2 * k)}),
        Check(f"{prefix}: dimensions non-increasing in m", rep.non_increasing, None, {"dims": rep.dims}),
        Check(f"{prefix}: converged to the tensor power of A", rep.converged, None,
              {"final_dim": rep.dims[-1], "final_blocks": list(rep.rows[-1].stabilized_blocks),
               "target_blocks": sorted(rep.target_blocks)}),
        Check(f"{prefix}: commutant of the finite image alone (literal)", True, None,
              {"literal_dims": rep.literal_dims,
               "literal_blocks": [list(r.literal_blocks) for r in rep.rows]}, informational=True),
    ]
    bc = paired_bicharacter_for(spec, sset)
    if bc is not None:
        m_solver = 2 * (k + max(m_values))
        sol = commutant_congruence_solver(bc, 2, k, m_solver)
        out.append(Check(f"{prefix}: agrees with the congruence solver", sol.algebra_dim == rep.dims[-1],
                         float(abs(sol.algebra_dim - rep.dims[-1])),
                         {"solver_dim": sol.algebra_dim, "solver_truncation": m_solver,
                          "solver_support": sol.stable.support(), "tower_dim": rep.dims[-1]}))
    return out, data


def entropy_values(spec: AlgebraSpec, max_power: int) -> dict[str, list[float]]:
    g = build_generators(spec)
    A = algebra_from_basis(g.basis_A)
    Mn = full_algebra(spec.n)
    return {
        "tensor_A": [entropy_of_trace(tensor_power(A, m)) for m in range(1, max_power + 1)],
        "tensor_Mn": [entropy_of_trace(tensor_power(Mn, m)) for m in range(1, max_power + 1)],
    }


def entropy_checks(spec: AlgebraSpec, max_power: int, tol: float = 1e-10) -> tuple[list[Check], dict]:
    """``H(⊗^m A) = H(⊗^m M_n) = m ln n`` and the averaged sequence toward ``ln n``."""
    vals = entropy_values(spec, max_power)
    ln_n = math.log(spec.n)
    expected = [m * ln_n for m in range(1, max_power + 1)]
    prefix = f"entropy {spec}"
    dev_a = max(abs(a - b) for a, b in zip(vals["tensor_A"], expected))
    dev_m = max(abs(a - b) for a, b in zip(vals["tensor_Mn"], expected))
    j = spec.j
    seq, worst = [], 0.0
    for k in range(1, max_power - j + 2):
        h = vals["tensor_A"][j + k - 2]
        avg = h / k
        seq.append({"k": k, "power": j + k - 1, "H": h, "H_over_k": avg, "gap_to_ln_n": avg - ln_n})
        worst = max(worst, abs(h - (j + k - 1) * ln_n) / (j + k))
    gaps = [abs(s["gap_to_ln_n"]) for s in seq]
    closed = max((abs(s["gap_to_ln_n"] - (j - 1) * ln_n / s["k"]) for s in seq), default=0.0)
    checks = [
        deviation_check(f"{prefix}: H(tensor^m A) = m ln n", dev_a, tol, values=vals["tensor_A"], expected=expected),
        deviation_check(f"{prefix}: H(tensor^m M_n) = m ln n", dev_m, tol, values=vals["tensor_Mn"]),
        deviation_check(f"{prefix}: H(tensor^(j+k-1) A) = (j+k-1) ln n, error per (j+k)", worst, tol, sequence=seq),
        Check(f"{prefix}: (1/k) H(tensor^(j+k-1) A) approaches ln n",
              all(b <= a + tol for a, b in zip(gaps, gaps[1:])) and closed < tol,
              closed, {"gaps": gaps, "closed_form_gap": "(j-1) ln n / k"}),
    ]
    return checks, vals


def conditional_expectation_checks(spec: AlgebraSpec, tol: float = 1e-12) -> list[Check]:
    """``y = 1 ⊗ [[0,1],[1,0]]`` is orthogonal to ``A ⊗ 1`` inside ``M_n ⊗ M_2``."""
    g = build_generators(spec)
    n = spec.n
    flip = np.array([[0, 1], [1, 0]], dtype=complex)
    A2 = Subalgebra(2 * n, basis=_tensor_with_unit(g.basis_A, 2))
    y = kron(np.eye(n), flip)
    e_y = conditional_expectation(y, A2)
    e_yy = conditional_expectation(y.conj().T @ y, A2)
    prefix = f"conditional expectation {spec}"
    return [
        deviation_check(f"{prefix}: E_A(y) = 0", max_dev(e_y), tol),
        deviation_check(f"{prefix}: E_A(y* y) = 1", max_dev(e_yy, np.eye(2 * n)), tol),
    ]


def _tensor_with_unit(basis: HSBasis, m: int) -> HSBasis:
    d = basis.ambient_dim
    return HSBasis(d * m, np.stack([np.kron(v, np.eye(m)) for v in basis.vectors]))


def realization_agreement(bc, step: int, k: int, m: int, cap: int = 4096) -> Check:
    """Congruence solver versus commutants of the left-regular matrices."""
    mats = matrix_realization(bc, m, cap)
    whole = generate_algebra(mats)
    image = Subalgebra(whole.ambient_dim, mats[step * k:]) if step * k < m else None
    sol = commutant_congruence_solver(bc, step, k, m)
    if image is None:
        dim = len(whole.basis)
    else:
        dim = relative_commutant(image, whole).dim
    return Check(f"groupshift n={bc.n} {bc.kind} k={k} m={m}: matrix commutant = solver",
                 dim == sol.raw.order and len(whole.basis) == bc.n**m, float(abs(dim - sol.raw.order)),
                 {"matrix_dim": dim, "solver_order": sol.raw.order, "algebra_dim": len(whole.basis),
                  "expected_algebra_dim": bc.n**m})


def groupshift_checks(n: int, ks: Sequence[int], truncations: Sequence[int], sset: ShiftSet,
                      cap: int = 4096) -> tuple[list[Check], dict]:
    bc = bures_yin_bicharacter(n, sset)
    out, data = [], {"bures_yin": [], "stream": []}
    for k in ks:
        results = [commutant_congruence_solver(bc, 2, k, m) for m in truncations]
        data["bures_yin"].extend(r.to_dict() for r in results)
        odd = [2 * i - 1 for i in range(1, k + 1)]
        ok = all(r.stable.same_as(Subgroup.spanned_by_units(n, r.m, odd)) for r in results)
        out.append(Check(f"bures-yin n={n} k={k}: stable commutant generated by odd generators u_1..u_{2 * k - 1}",
                         ok, None,
                         {"truncations": list(truncations), "orders": [r.stable.order for r in results],
                          "supports": [r.stable.support() for r in results],
                          "raw_orders": [r.raw.order for r in results],
                          "consecutive_orders": [r.consecutive.order for r in results]}))
        claimed = k * n
        out.append(Check(f"bures-yin n={n} k={k}: stated dimension kn versus computed n^k",
                         claimed == n**k, None,
                         {"computed": n**k, "stated_kn": claimed, "diverges": claimed != n**k},
                         informational=True))
    st = stream_bicharacter(n, sset)
    for k in ks:
        for m in truncations:
            r = commutant_congruence_solver(st, 1, k, m)
            data["stream"].append(r.to_dict())
            out.append(Check(f"stream n={n} k={k} m={m}: stable commutant trivial", r.stable.order == 1, None,
                             {"raw_order": r.raw.order, "stable_order": r.stable.order}))
    return out, data


def definition1_checks(n: int, sset: ShiftSet, Q: Sequence[int], S: Sequence[int], k_bound: int,
                       truncation: int | None = None) -> tuple[list[Check], dict]:
    bc = stream_bicharacter(n, sset)
    res = check_definition1(bc, Q, S, k_bound, truncation)
    data = res.to_dict()
    data["phases"] = {k: definition1_phase(bc, Q, S, k) for k in range(0, k_bound + 1)}
    checks = [
        Check(f"shift word n={n} Q={tuple(Q)} S={tuple(S)}: nontrivial phase found", res.k is not None,
              None, data),
        Check(f"shift word n={n}: u^n = 1", res.unitary_order_ok, None, {}),
        Check(f"shift word n={n}: shifted generators commute or gamma-commute", res.commutation_ok, None, {}),
    ]
    return checks, data
