"""Property suite behind ``timeschwarz validate``.

Each check returns a :class:`Check`; the suite passes when all of them do.
Iteration counts on the heat problem are measured against the calibrated
round-off threshold (see :func:`timeschwarz.experiments.calibrate_threshold`).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
import numpy as np

from .discretize import (BoundaryPair, InitialState, TerminalRobin, extract_interface,
                         solve_monolithic, solve_subdomain)
from .experiments import ExperimentSpec, fig_right, theorem_sweeps
from .model import (Decomposition, InterfaceCondition, TimeGrid, Variant,
                    build_problem, heat_problem_1d, transmission_table)
from .numerics import sym_eigen
from .schwarz import scalar_contraction_oracle
from .spectral import SpectralParams, optimal_theta, rho, rho_max, rho_relaxed

BASE = SpectralParams(0.1, 10.0, 1.0, 0.4)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def analytic_scalar_trajectory(d, nu, gamma, T, y0, zhat, t):
    """Exact solution of the scalar system with constant target ``zhat``.

    Homogeneous part from the modes ``exp(+-sigma t)`` with eigenvectors
    ``(1, nu (d +- sigma))``, plus the constant particular solution.
    """
    s = math.sqrt(d * d + 1.0 / nu)
    # constant solution: -d y + lam/nu = 0 and y + d lam = zhat
    lam_p = zhat / (d + 1.0 / (nu * d)) if d != 0 else 0.0
    y_p = lam_p / (nu * d) if d != 0 else zhat
    vp = (1.0, nu * (d + s))
    vm = (1.0, nu * (d - s))
    eT = math.exp(-s * T)
    # unknowns c1 (mode e^{s(t-T)}), c2 (mode e^{-s t})
    M = np.array([[vp[0] * eT, vm[0]],
                  [vp[1] + gamma * vp[0], (vm[1] + gamma * vm[0]) * eT]])
    rhs = np.array([y0 - y_p, gamma * zhat - lam_p - gamma * y_p])
    c1, c2 = np.linalg.solve(M, rhs)
    t = np.asarray(t, dtype=float)
    ep, em = np.exp(s * (t - T)), np.exp(-s * t)
    y = y_p + c1 * vp[0] * ep + c2 * vm[0] * em
    lam = lam_p + c1 * vp[1] * ep + c2 * vm[1] * em
    return y, lam


def cn_refinement_ratios(nts=(16, 32, 64, 128), d=1.0, nu=0.1, gamma=10.0, T=1.0,
                         y0=1.0, zhat=2.0):
    prob = build_problem([[d]], [y0], [zhat], nu, gamma, T)
    errs = []
    for nt in nts:
        grid = TimeGrid(0.0, T, nt)
        tr = solve_monolithic(prob, grid)
        y, lam = analytic_scalar_trajectory(d, nu, gamma, T, y0, zhat, grid.nodes)
        errs.append(max(np.abs(tr.y[:, 0] - y).max(), np.abs(tr.lam[:, 0] - lam).max()))
    errs = np.array(errs)
    return errs[:-1] / errs[1:]


def fixed_point_deviation(prob, grid: TimeGrid, alpha: float, variant) -> float:
    """Max deviation of subdomain solves seeded with reference interface data."""
    ref = solve_monolithic(prob, grid)
    dec = Decomposition.from_grid(grid, alpha)
    r1, r2 = ref.restrict(dec.grid1), ref.restrict(dec.grid2)
    kinds = transmission_table(variant)
    g1 = extract_interface(r2, kinds.at_I1, prob, "first")
    g2 = extract_interface(r1, kinds.at_I2, prob, "last")
    s1 = solve_subdomain(prob, dec.grid1,
                         BoundaryPair(InitialState(prob.y0), InterfaceCondition(kinds.at_I1, g1)))
    s2 = solve_subdomain(prob, dec.grid2,
                         BoundaryPair(InterfaceCondition(kinds.at_I2, g2), TerminalRobin()))
    return float(max(np.abs(s1.y - r1.y).max(), np.abs(s1.lam - r1.lam).max(),
                     np.abs(s2.y - r2.y).max(), np.abs(s2.lam - r2.lam).max()))


def _checks_spectral() -> list[Check]:
    out = []
    pairs = {(t.at_I1, t.at_I2) for t in map(transmission_table, Variant)}
    out.append(Check("transmission table is a bijection", len(pairs) == 8,
                     f"{len(pairs)} distinct pairs"))
    th_sd, th_sn = optimal_theta("SD1", BASE), optimal_theta("SN1", BASE)
    out.append(Check("optimal theta", abs(th_sd - 0.692) <= 5e-4 and abs(th_sn - 0.640) <= 5e-4,
                     f"SD1={th_sd:.5f} SN1={th_sn:.5f}"))
    d = np.linspace(1, 100, 100)
    lo = min(np.min(rho("SD2", d, BASE)), np.min(rho("SN2", d, BASE)))
    out.append(Check("SD2/SN2 diverge on [1, 100]", lo > 1, f"min rho={lo:.4f}"))
    ones = all(np.all(np.asarray(rho(v, d, BASE)) == 1.0) for v in ("SD3", "SD4", "SN3", "SN4"))
    out.append(Check("single-field variants have rho = 1", ones))
    ds = np.array([0, 0.5, 1, 10, 100, 1e3])
    inv = max(np.max(np.abs(rho("SD2", ds, BASE) * rho("SD1", ds, BASE) - 1)),
              np.max(np.abs(rho("SN2", ds, BASE) * rho("SN1", ds, BASE) - 1)))
    out.append(Check("inverse identities", inv <= 1e-12, f"max |product - 1|={inv:.2e}"))
    eq = 0.0
    for v in ("SD1", "SN1"):
        th = optimal_theta(v, BASE)
        eq = max(eq, abs(abs(1 - th) - rho_relaxed(v, 0.0, th, BASE)))
        if np.any(rho_relaxed(v, ds, 1.0, BASE) != rho(v, ds, BASE)):
            eq = math.inf
    out.append(Check("relaxation consistency and equioscillation", eq <= 1e-10, f"{eq:.2e}"))
    p0 = dataclasses.replace(BASE, gamma=0.0)
    grid = np.linspace(0, 1e3, 2001)
    mono = all(np.all(np.diff(rho(v, grid, p0)) <= 0) for v in ("SD1", "SN1"))
    out.append(Check("gamma = 0 factors are non-increasing", mono))
    sweeps = theorem_sweeps()
    bad = {k: v["violations"] for k, v in sweeps["summary"].items()
           if k != "outside_hypotheses" and v["violations"]}
    out.append(Check("theorem sweeps", sweeps["passed"], str(bad or "0 violations")))
    return out


def _checks_discrete(with_oracle: bool = True) -> list[Check]:
    out = []
    prob, _ = heat_problem_1d()
    A = prob.A
    dmin = sym_eigen(A).eigenvalues[0]
    exact = (2 * 32**2) * (1 - math.cos(math.pi / 32))
    out.append(Check("Laplacian symmetric, smallest eigenvalue", np.array_equal(A, A.T)
                     and abs(dmin - 9.86) <= 0.01 and abs(dmin - exact) <= 1e-9,
                     f"{dmin:.6f}"))
    ratios = cn_refinement_ratios()
    out.append(Check("Crank-Nicolson second order", bool(np.all((ratios >= 3.7) & (ratios <= 4.3))),
                     " ".join(f"{r:.3f}" for r in ratios)))
    small = build_problem(np.array([[2.0, -1.0], [-1.0, 2.0]]), [1.0, 0.5],
                          lambda t: np.array([np.sin(t), t]), 0.1, 10.0, 1.0)
    dev = max(fixed_point_deviation(small, TimeGrid(0, 1, 40), 0.4, v) for v in Variant)
    dev_heat = max(fixed_point_deviation(prob, TimeGrid(0, 1, 32), 13 / 32, v) for v in Variant)
    out.append(Check("monolithic fixed point, all variants", max(dev, dev_heat) <= 1e-8,
                     f"{max(dev, dev_heat):.2e}"))
    if with_oracle:
        worst = 0.0
        for v in ("SD1", "SD2", "SN1", "SN2"):
            for d in (0.0, 1.0, 10.0, 100.0):
                m, a = scalar_contraction_oracle(d, BASE, v, nt=4096)
                worst = max(worst, abs(m - a) / a if a >= 1e-2 else abs(m - a))
        out.append(Check("scalar oracle matches analytic factors", worst <= 1e-3, f"{worst:.2e}"))
    res = fig_right(ExperimentSpec("validate", init="zeros"))
    it = res.iterations
    counts_ok = (all(8 <= (it[k] or 0) <= 12 for k in ("SD1", "SN1"))
                 and all(4 <= (it[k] or 0) <= 8 for k in ("SD1_theta0.975", "SN1_theta0.975")))
    out.append(Check("heat problem iteration counts", counts_ok,
                     f"threshold={res.threshold:g} {it}"))
    rep = res.reports
    stag = all(np.abs(np.asarray(rep[v].payloads_I1[1:]) - rep[v].payloads_I1[1]).max() <= 1e-12
               for v in ("SD3", "SD4", "SN3", "SN4"))
    out.append(Check("stagnating variants hold their payload", stag))
    out.append(Check("SD2 and SN2 diverge", rep["SD2"].diverged and rep["SN2"].diverged))
    p_eff = dataclasses.replace(BASE, alpha=res.alpha)
    errs = np.asarray(rep["SD1"].errors)
    e = errs[: int(np.argmax(errs / errs[0] <= 1e-9)) + 1]
    meas = float(np.exp(np.mean(np.diff(np.log(e[1:])))))
    pred = rho_max("SD1", res.spectrum, p_eff)
    out.append(Check("SD1 contraction vs spectral prediction", abs(meas - pred) <= 0.15 * pred,
                     f"measured={meas:.5f} predicted={pred:.5f}"))
    return out


def validate(quick: bool = False) -> list[Check]:
    checks = _checks_spectral()
    checks += _checks_discrete(with_oracle=not quick)
    return checks
