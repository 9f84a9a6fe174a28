"""Numerical validation suites.

Each suite returns a list of :class:`Check` records. A check with
``passed=None`` is informational: it reports a quantity (typically a printed
closed form that disagrees with direct computation) without gating the
suite.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import admissible as adm
from . import asymptotics as asy
from . import dirichlet as dir_
from .action import occupation_interaction
from .core import ModelParams, NodeId
from .errors import Infeasible
from .mcmc import (
    detailed_balance_residual,
    estimate_partition,
    lattice_transition_matrix,
    partition_function_one_generation,
)
from .oracle import OracleConfig, brute_force_minimum, oracle_minimum, verify_structural_claims


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    measured: float
    tolerance: float
    passed: Optional[bool]
    detail: str = ""

    @property
    def status(self) -> str:
        return {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]

    def line(self) -> str:
        extra = f" [{self.detail}]" if self.detail else ""
        return f"{self.name}: {self.status} (measured={self.measured:.6g}, tol={self.tolerance:.3g}){extra}"


def _check(suite, name, measured, tol, ok, detail="") -> Check:
    return Check(suite, name, float(measured), float(tol), None if ok is None else bool(ok), detail)


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# --- reference enumerator ----------------------------------------------------

def exhaustive_smooth_minimum(L: int, total: int) -> Optional[int]:
    """Minimum of ``sum c (c - 1)`` over smooth length-``L`` vectors with ``sum c = total``.

    Smoothness includes the zero padding outside, so the ends are 1. Interior
    zeros are allowed. Returns ``None`` if no such vector exists.
    """
    best = [None]

    def rec(k, prev, s, acc):
        if s > total:
            return
        remaining = L - k
        if remaining == 0:
            if prev == 1 and s == total and (best[0] is None or acc < best[0]):
                best[0] = acc
            return
        # the largest mass the remaining sites can still take (must come back down to 1)
        cap = sum(min(prev + t, remaining - t + 1) for t in range(1, remaining + 1))
        if s + cap < total:
            return
        for c in (prev - 1, prev, prev + 1):
            if c >= 0 and c <= remaining:
                rec(k + 1, c, s + c, acc + c * (c - 1))

    if L >= 1:
        rec(1, 1, 1, 0)
    return best[0]


# --- suites ------------------------------------------------------------------

def suite_dirichlet(eps: float = 1.0) -> list[Check]:
    S = "dirichlet"
    out = []
    t0 = time.perf_counter()
    worst_agree = 0.0
    for M in range(2, 17):
        b = dir_.standard_boundary(M, eps)
        s1 = dir_.solve_recursive(b)
        s2 = dir_.solve_closed_form(b)
        s3 = dir_.solve_quadratic_min(b)
        res = dir_.harmonicity_residual(s1) / (eps * 2.0 ** M)
        out.append(_check(S, f"harmonicity residual M={M}", res, 1e-9, res <= 1e-9))
        scale = eps * 2.0 ** M
        for other in (s2, s3):
            diff = max(float(np.max(np.abs(x - y))) for x, y in zip(s1.profile.values, other.profile.values))
            worst_agree = max(worst_agree, diff / scale)
        err = _rel(float(s1.subtree_sums[1][1]), eps * 2.0 ** (2 * M - 3))
        out.append(_check(S, f"subtree-sum identity M={M}", err, 1e-12, err <= 1e-12))
        lo, hi = dir_.spreading_bounds(M, eps)
        cost = dir_.dirichlet_spreading_cost(s1)
        out.append(_check(S, f"spreading bounds M={M}", cost, 0.0, lo <= cost <= hi,
                          f"{lo:.6g} <= S <= {hi:.6g}"))
    elapsed = time.perf_counter() - t0
    out.append(_check(S, "recursive/closed-form/CG agreement M=2..16", worst_agree, 1e-10, worst_agree <= 1e-10))
    out.append(_check(S, "dirichlet solve time M=2..16 (s)", elapsed, 5.0, elapsed < 5.0))

    for M in range(1, 15):
        sol = dir_.solve_recursive(dir_.standard_boundary(M, eps))
        gaps = dir_.generation_gaps(sol)
        out.append(_check(S, f"minimum gap M={M}", gaps[1:].min() / eps, 1.0, gaps[1:].min() >= eps * (1 - 1e-12)))
        if M >= 2:
            inner = gaps[1:M].min() / eps
            out.append(_check(S, f"interior gap M={M}", inner, 4 / 3, inner >= 4 / 3 - 1e-9))

    for M, exact in ((1, 0.25), (2, 7 / 6)):
        c = dir_.dirichlet_spreading_cost(dir_.solve_recursive(dir_.standard_boundary(M, eps)))
        out.append(_check(S, f"exact spreading cost M={M}", _rel(c, exact * eps ** 2), 1e-12,
                          _rel(c, exact * eps ** 2) <= 1e-12))

    c20 = dir_.dirichlet_spreading_cost(dir_.solve_recursive(dir_.standard_boundary(20, eps)))
    corrected = c20 / (eps ** 2 * 2.0 ** (2 * 20 - 4))
    out.append(_check(S, "spreading asymptotics M=20, S/(eps^2 2^(2M-4)) -> 1", abs(corrected - 1), 0.01,
                      abs(corrected - 1) <= 0.01))
    out.append(_check(S, "spreading asymptotics M=20, S/(eps^2 2^(2M-3)) (printed scale)", c20 / (eps ** 2 * 2.0 ** 37),
                      0.0, None, "tends to 1/2"))

    # explicit closed-form profile against the recursion
    M = 10
    sol = dir_.solve_recursive(dir_.standard_boundary(M, eps))
    err = 0.0
    for n in range(1, M + 1):
        for j in range(1 << n):
            err = max(err, abs(dir_.explicit_standard_profile(M, n, NodeId(n, j), eps) - sol.profile.generation(n)[j]))
    out.append(_check(S, "explicit profile vs recursion M=10", err / (eps * 2 ** M), 1e-12, err / (eps * 2 ** M) <= 1e-12))

    # right-most particle, exact formula at large M
    worst_c, printed = 0.0, []
    for n in range(1, 7):
        h = dir_.explicit_standard_profile(40, n, NodeId(n, (1 << n) - 1), eps)
        worst_c = max(worst_c, abs(h / dir_.rightmost_asymptotic(40, n, eps) - 1))
        printed.append(h / dir_.rightmost_asymptotic(40, n, eps, printed=True))
    out.append(_check(S, "right-most particle h(1^n)/(eps 2^(M-1)(1-(n+2)2^(-n-1))), M=40", worst_c, 1e-6, worst_c <= 1e-6))
    out.append(_check(S, "right-most particle vs form with n 2^(-n-1), n=2", printed[1], 0.0, None,
                      "ratios " + ", ".join(f"{p:.3f}" for p in printed)))

    worst_alpha = max(_rel(*dir_.alpha_identity(12, n, k)) for n in range(2, 12) for k in range(1, n))
    out.append(_check(S, "alpha identity M=12", worst_alpha, 1e-12, worst_alpha <= 1e-12))

    out.extend(errata_dirichlet())
    return out


def errata_dirichlet() -> list[Check]:
    S = "dirichlet"
    worst_c = worst_p = 0.0
    for M in range(3, 14):
        for n in range(2, M):
            for ell in range(1, n):
                r = dir_.b_ratio_difference(M, n, ell)
                worst_c = max(worst_c, _rel(r["direct"], r["corrected"]))
                worst_p = max(worst_p, _rel(r["direct"], r["printed"]))
    worst_sum = 0.0
    for M in range(1, 16):
        direct = 0.5 * sum(float(np.sum(dir_.approx_increments(M, n, 1.0) ** 2)) for n in range(1, M + 1))
        worst_sum = max(worst_sum, _rel(direct, dir_.approx_increment_sum(M, 1.0)))
    printed_ratio = dir_.approx_increment_sum_printed(40, 1.0) / dir_.approx_increment_sum(40, 1.0)
    return [
        _check(S, "errata: (1/2) sum of approximate increments^2 = eps^2 2^(2M-5)(2 - (M+2)2^-M)", worst_sum, 1e-12,
               worst_sum <= 1e-12),
        _check(S, "errata: form eps^2 2^(2M-4)(2 - 2^(-M-1)(3M+4)) over the direct sum, M=40", printed_ratio, 0.0, None),
        _check(S, "errata: b-ratio difference carries a minus sign", worst_c, 1e-12, worst_c <= 1e-12),
        _check(S, "errata: b-ratio difference without the minus sign", worst_p, 0.0, None, "relative error 2"),
    ]


def suite_admissible() -> list[Check]:
    S = "admissible"
    out = []
    t0 = time.perf_counter()
    mismatches = cases = 0
    for L in range(1, 13):
        for n in range(0, 8):
            try:
                shape = adm.restricted_minimiser(L, n)
            except Infeasible:
                continue
            cases += 1
            ref = exhaustive_smooth_minimum(L, 1 << n)
            if ref is None or shape.interaction() != ref or not shape.is_smooth():
                mismatches += 1
    elapsed = time.perf_counter() - t0
    out.append(_check(S, f"restricted minimiser = exhaustive minimum, L<=12 ({cases} cases)", mismatches, 0,
                      mismatches == 0))
    out.append(_check(S, "restricted minimiser oracle time (s)", elapsed, 30.0, elapsed < 30.0))

    bad = 0
    for N in (9, 12, 15):
        for K in adm.feasible_K(N):
            ev = adm.staircase_evolution(N, K)
            M = N - K
            for n in range(M, N + 1):
                sh = ev.shapes[n - M]
                r_n = 1 << (n - M)
                rd = adm.is_admissible(sh.counts, n)
                ok = rd is not None and rd[0] == r_n and sh.is_smooth() and int(sh.counts.sum()) == 1 << n
                ok = ok and r_n * (r_n + 1) + rd[1] * r_n == 1 << n if rd else False
                if n > M:
                    ok = ok and ev.shapes[n - M - 1].L == sh.L - r_n // 2
                bad += not ok
    out.append(_check(S, "trajectory generations are H_(2^(n-M), d_n, n) with L_(n-1) = L_n - r_n/2", bad, 0, bad == 0))

    t0 = time.perf_counter()
    bad = 0
    for N in range(1, 25):
        for K in adm.feasible_K(N):
            if K > 8:
                continue
            ev = adm.staircase_evolution(N, K)
            exact, _ = asy.analytic_interaction_cost(1 << K, N)
            measured = sum(occupation_interaction(s.counts) for s in ev.shapes)
            bad += exact != measured
    out.append(_check(S, "analytic interaction = measured along trajectory, N<=24, K<=8", bad, 0, bad == 0,
                      f"{time.perf_counter() - t0:.1f}s"))

    for N in (3, 6, 9):
        p = ModelParams(N, 1.0, 1.0)
        got = asy.hstarstar_cost(p).J
        want = asy.hstarstar_interaction_formula(N)
        out.append(_check(S, f"frozen benchmark interaction N={N}", got - want, 0, got == want, f"{got} vs {want}"))

    out.extend(errata_admissible())
    return out


def errata_admissible() -> list[Check]:
    S = "admissible"
    bad_drec = bad_stmt = 0
    for N in (9, 12, 15, 18):
        for K in adm.feasible_K(N):
            ev = adm.staircase_evolution(N, K)
            for k in range(1, K + 1):
                cur, prev = ev.shapes[k], ev.shapes[k - 1]
                n, r, d = cur.n, cur.r, cur.d
                # shape one generation earlier, (drec) form: H_(r/2, d + r/2, n-1)
                bad_drec += (prev.r, prev.d) != (r // 2, d + r // 2)
                # the form H_(r/2, d + r, n-1) does not hold 2^(n-1) particles
                bad_stmt += (r // 2) * (r // 2 + 1) + (d + r) * (r // 2) == 1 << (n - 1)
    bad_range = 0
    for N in (12, 15, 18):
        for K in adm.feasible_K(N):
            ev = adm.staircase_evolution(N, K)
            L_N = ev.shapes[-1].L
            r_N = 1 << K
            for n in range(N - K, N + 1):
                want = L_N - r_N * (1 - 2.0 ** (-(N - n)))
                bad_range += ev.shapes[n - (N - K)].L != want
    return [
        _check(S, "errata: staircase one step back is H_(r/2, d + r/2, n-1)", bad_drec, 0, bad_drec == 0),
        _check(S, "errata: H_(r/2, d + r, n-1) conserves mass (count of cases)", bad_stmt, 0, None, "never"),
        _check(S, "errata: ranges L_n = L_N - r_N (1 - 2^-(N-n))", bad_range, 0, bad_range == 0),
    ]


def _criterion_grid():
    for N in range(12, 31):
        for be in (0.5, 1.0, 3.0, 10.0):
            for eps in (0.25, 0.5, 1.0):
                beta = be / eps
                if beta > eps ** 2 / 2:
                    yield ModelParams(N, beta, eps)


def suite_asymptotics() -> list[Check]:
    S = "asymptotics"
    out = []
    worst = 0
    for p in _criterion_grid():
        K, _ = adm.optimal_K(p)
        worst = max(worst, abs(K - round(adm.predicted_K(p))))
    out.append(_check(S, "optimal K within 1 of round((N-4)/3 + log2(3 eps^2/beta)/3)", worst, 1, worst <= 1))

    p30 = ModelParams(30, 1.0, 1.0)
    r = asy.r_star(p30)
    d_int, d_spr = asy.marginal_costs(r, p30)
    out.append(_check(S, "first-order condition at r*", _rel(d_int, d_spr), 1e-9, _rel(d_int, d_spr) <= 1e-9))
    ratio = asy.total_cost_model(r, p30) / asy.theorem4_value(p30)
    out.append(_check(S, "model cost at r* over 2^(5/3) 3^(-2/3) (beta eps)^(2/3) 2^(4N/3), N=30", ratio, 0.0, None,
                      "tends to 3/4"))
    c_model = asy.model_minimum_constant(3)
    got = asy.total_cost_model(r, p30) / ((p30.beta * p30.eps) ** (2 / 3) * 2.0 ** 40)
    out.append(_check(S, "model cost at r* over (3/2)^(1/3) (beta eps)^(2/3) 2^(4N/3), N=30", _rel(got, c_model), 0.02,
                      _rel(got, c_model) <= 0.02))

    p18 = ModelParams(18, 1.0, 1.0)
    K18, _ = adm.optimal_K(p18)
    tr = adm.build_trajectory(p18, K18)
    direct = tr.costs.S_total
    model = asy.measured_cost_model(float(1 << K18), p18)
    out.append(_check(S, "direct summation N=18 vs cost model with eps^2 2^(2N-4) r^-2", _rel(direct, model), 0.01,
                      _rel(direct, model) <= 0.01))

    h20 = asy.heuristic_optimum(20, 1.0, 1.0)
    out.append(_check(S, "heuristic r(1)^3 = beta eps 2^(2N-2), N=20", h20.r1_rel_diff, 0.01, h20.r1_rel_diff <= 0.01))
    h30 = asy.heuristic_optimum(30, 1.0, 1.0)
    scaled = h30.S_heur / 2.0 ** 40
    out.append(_check(S, "heuristic optimum / (beta eps)^(2/3) 2^(4N/3) = 2^(2/3), N=30",
                      _rel(scaled, asy.HEURISTIC_CONSTANT), 0.02, _rel(scaled, asy.HEURISTIC_CONSTANT) <= 0.02))
    out.append(_check(S, "heuristic optimum vs (2/3) 2^(2/3)", scaled / asy.HEURISTIC_CONSTANT_PRINTED, 0.0, None,
                      "interaction term alone"))

    out.extend(errata_asymptotics())
    return out


def errata_asymptotics() -> list[Check]:
    S = "asymptotics"
    bad = 0
    worst_stmt = 0.0
    bad_bound = 0
    for N in range(2, 25):
        for K in adm.feasible_K(N):
            if K > 8:
                continue
            r = 1 << K
            exact, _ = asy.analytic_interaction_cost(r, N)
            bad += exact != asy.interaction_closed_form(r, N)
            if K >= 2:
                worst_stmt = max(worst_stmt, _rel(asy.interaction_statement_form(r, N), exact))
            forms = asy.staircase_bound_closed_forms(r, N)
            bad_bound += forms["direct"] != forms["corrected"]
    transport_ok = 0
    for N in (9, 12, 15):
        for K in adm.feasible_K(N):
            ev = adm.staircase_evolution(N, K)
            transport_ok += sum(ev.squared_displacements()) / 2 > asy.staircase_spreading_bound(1 << K, N)
    return [
        _check(S, "errata: interaction sum = proof form (4/3)2^N r - 2^(N+1) - (8/21)r^3 + (2/3)r + (2/3)2^M - 2/7",
               bad, 0, bad == 0),
        _check(S, "errata: form (1/3)2^(N+2) + 2r - 2^(N+1), worst relative error", worst_stmt, 0.0, None),
        _check(S, "errata: no-move bound = (1/3)2^(N+2) r - 2^(N+1) + (2/3)2^M", bad_bound, 0, bad_bound == 0),
        _check(S, "staircase transport cost within no-move bound (beta = eps = 1)", transport_ok, 0, transport_ok == 0),
    ]


def suite_oracle() -> list[Check]:
    S = "oracle"
    out = []
    p = ModelParams(3, 1.0, 1.0)
    candidates = {f"K={K}": adm.build_trajectory(p, K).costs.S_total for K in adm.feasible_K(3)}
    candidates["frozen benchmark"] = asy.hstarstar_cost(p).S_total
    best_name = min(candidates, key=candidates.get)
    for q in (1, 2):
        res = oracle_minimum(OracleConfig(p, window=4, refine=q))
        out.append(_check(S, f"oracle N=3 q={q} time (s)", res.elapsed, 60.0, res.elapsed < 60.0,
                          f"value {res.value:.6g}"))
        structural = [verify_structural_claims(g, p.eps) for g in res.argmin]
        out.append(_check(S, f"oracle N=3 q={q} minimiser final generation on grid and smooth",
                          sum(not (s.grid_supported and s.smooth) for s in structural), 0,
                          all(s.grid_supported and s.smooth for s in structural) and not res.touches_window))
        gap = (candidates[best_name] - res.value) / res.value
        out.append(_check(S, f"best constructed candidate vs oracle N=3 q={q}", gap, 0.05, gap <= 0.05,
                          f"{best_name}: {candidates[best_name]:.6g}, signed gap {gap:+.2%}"))
    for N, q, w in ((1, 1, 2), (2, 1, 2), (2, 2, 1)):
        cfg = OracleConfig(ModelParams(N, 1.0, 1.0), window=w, refine=q, budget=10 ** 8)
        a, b = oracle_minimum(cfg).value, brute_force_minimum(cfg)
        out.append(_check(S, f"oracle = labelling brute force N={N} q={q} w={w}", abs(a - b), 1e-12, abs(a - b) <= 1e-12))
    return out


def suite_mcmc(seed: int = 0) -> list[Check]:
    S = "mcmc"
    out = []
    t0 = time.perf_counter()
    p = ModelParams.relaxed(1, 1.0, 1.0)
    est = estimate_partition(p, 10 ** 6, seed=seed)
    exact = partition_function_one_generation(1.0, 1.0)
    z = abs(est.Z_hat - exact) / est.std_err
    out.append(_check(S, "partition function N=1 within 3 standard errors", z, 3.0, z <= 3.0,
                      f"Z_hat={est.Z_hat:.6f} +- {est.std_err:.2g}, exact {exact:.6f}"))
    P, pi = lattice_transition_matrix(p, np.arange(-2, 3) * 0.5)
    res = detailed_balance_residual(P, pi)
    out.append(_check(S, "detailed balance on 5-point lattice, N=1", res, 1e-12, res <= 1e-12))
    elapsed = time.perf_counter() - t0
    out.append(_check(S, "sampler checks time (s)", elapsed, 30.0, elapsed < 30.0))
    return out


SUITES: dict[str, Callable[..., list[Check]]] = {
    "dirichlet": suite_dirichlet,
    "admissible": suite_admissible,
    "asymptotics": suite_asymptotics,
    "oracle": suite_oracle,
    "mcmc": suite_mcmc,
}


def run_suite(name: str, seed: int = 0) -> list[Check]:
    """Run one suite by name, or every suite for ``"all"``."""
    if name == "all":
        out = []
        for key in SUITES:
            out.extend(run_suite(key, seed))
        return out
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    if name == "mcmc":
        return suite_mcmc(seed)
    return SUITES[name]()


def all_passed(checks) -> bool:
    return all(c.passed is not False for c in checks)
