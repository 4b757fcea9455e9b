"""Two-subdomain Schwarz iteration in time for all eight transmission variants."""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .discretize import (BoundaryPair, InitialState, SubdomainSystem, TerminalRobin,
                         Trajectory, extract_interface)
from .model import (ControlProblem, Decomposition, InterfaceCondition, TimeGrid, Variant,
                    build_problem, transmission_table)
from .spectral import SpectralParams, rho, rho_relaxed

DEFAULT_SEED = 20240401
DIVERGENCE_FACTOR = 1e12


@dataclass(frozen=True)
class SchwarzConfig:
    variant: Variant
    theta: float = 1.0
    max_iter: int = 30
    tol: float = 1e-6
    sweep_order: str = "sequential"
    init: str = "random"
    init_scale: float = 1.0
    seed: int = DEFAULT_SEED
    relax_both: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if not 0 < self.theta <= 1:
            raise ValueError("theta must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.sweep_order not in ("sequential", "parallel"):
            raise ValueError("sweep_order must be 'sequential' or 'parallel'")
        if self.init not in ("zeros", "random"):
            raise ValueError("init must be 'zeros' or 'random'")


@dataclass
class SchwarzReport:
    """Per-iteration history of one run.

    ``errors[k-1]`` is the max-norm deviation of iterate ``k`` from the
    reference over both subdomains and both fields. Convergence is declared
    once ``errors[k-1] <= tol * errors[0]``.
    """

    variant: Variant
    theta: float
    tol: float
    errors: list = field(default_factory=list)
    payloads_I1: list = field(default_factory=list)
    payloads_I2: list = field(default_factory=list)
    converged: bool = False
    diverged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.errors)

    @property
    def relative_errors(self) -> np.ndarray:
        e = np.asarray(self.errors)
        return e / e[0] if e.size and e[0] > 0 else e

    def iterations_to(self, rel_tol: float) -> int | None:
        """First iteration whose error is below ``rel_tol`` times the first error."""
        hits = np.nonzero(self.relative_errors <= rel_tol)[0]
        return int(hits[0]) + 1 if hits.size else None

    @property
    def measured_contraction(self) -> float:
        return measured_contraction(self)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "error", "payload_norm_I1", "payload_norm_I2"])
            for k, (e, p1, p2) in enumerate(zip(self.errors, self.payloads_I1, self.payloads_I2), 1):
                w.writerow([k, f"{e:.17g}", f"{np.abs(p1).max():.17g}", f"{np.abs(p2).max():.17g}"])


def measured_contraction(report: SchwarzReport, skip: int = 2) -> float:
    """Geometric mean of successive error ratios, ignoring the first ``skip`` iterations."""
    e = np.asarray(report.errors, dtype=float)
    if e.size < 4:
        raise ValueError("need at least 4 recorded iterations")
    tail = e[skip - 1:] if skip > 0 else e
    if np.any(tail <= 0) or not np.all(np.isfinite(tail)):
        raise ValueError("errors must be positive and finite to measure a contraction")
    return float(np.exp(np.mean(np.diff(np.log(tail)))))


def initial_payload(cfg: SchwarzConfig, prob: ControlProblem) -> tuple[np.ndarray, np.ndarray]:
    """Starting interface data for subdomain 1 and subdomain 2."""
    n = prob.dim
    if cfg.init == "zeros":
        return np.zeros(n), np.zeros(n)
    rng = np.random.default_rng(cfg.seed)
    return cfg.init_scale * rng.standard_normal(n), cfg.init_scale * rng.standard_normal(n)


class SchwarzSolver:
    """Factored subdomain systems for one problem, decomposition and variant."""

    def __init__(self, prob: ControlProblem, decomp: Decomposition, variant):
        self.prob, self.decomp = prob, decomp
        self.variant = Variant.parse(variant)
        self.kinds = transmission_table(self.variant)
        self.sys1 = SubdomainSystem(prob, decomp.grid1, None, self.kinds.at_I1)
        self.sys2 = SubdomainSystem(prob, decomp.grid2, self.kinds.at_I2, None)

    def solve1(self, f) -> Trajectory:
        return self.sys1.solve(BoundaryPair(InitialState(self.prob.y0),
                                            InterfaceCondition(self.kinds.at_I1, f)))

    def solve2(self, g) -> Trajectory:
        return self.sys2.solve(BoundaryPair(InterfaceCondition(self.kinds.at_I2, g),
                                            TerminalRobin()))

    def send_to_2(self, tr1: Trajectory) -> np.ndarray:
        return extract_interface(tr1, self.kinds.at_I2, self.prob, end="last")

    def send_to_1(self, tr2: Trajectory) -> np.ndarray:
        return extract_interface(tr2, self.kinds.at_I1, self.prob, end="first")

    def step(self, f, g, cfg: SchwarzConfig):
        """One iteration from payloads ``(f, g)``; returns trajectories and new payloads.

        Sequential order feeds subdomain 2 with the fresh datum from subdomain 1
        (``g`` is then only used as relaxation memory).
        """
        th = cfg.theta
        tr1 = self.solve1(f)
        if cfg.sweep_order == "sequential":
            g_used = self.send_to_2(tr1)
            if cfg.relax_both:
                g_used = (1 - th) * g + th * g_used
            tr2 = self.solve2(g_used)
            g_next = g_used
        else:
            g_used = g
            tr2 = self.solve2(g)
            g_next = self.send_to_2(tr1)
            if cfg.relax_both:
                g_next = (1 - th) * g + th * g_next
        f_next = (1 - th) * f + th * self.send_to_1(tr2)
        return tr1, tr2, g_used, f_next, g_next


def _error(tr1, tr2, ref1, ref2) -> float:
    return float(max(np.abs(tr1.y - ref1.y).max(), np.abs(tr1.lam - ref1.lam).max(),
                     np.abs(tr2.y - ref2.y).max(), np.abs(tr2.lam - ref2.lam).max()))


def run_schwarz(prob: ControlProblem, decomp: Decomposition, cfg: SchwarzConfig,
                reference: Trajectory, payloads=None) -> SchwarzReport:
    """Iterate until ``tol`` (relative to the first error), divergence or ``max_iter``.

    ``payloads`` overrides the configured initial interface data.
    """
    if abs(reference.grid.h_t - decomp.grid1.h_t) > 1e-12 * reference.grid.h_t:
        raise ValueError("reference grid and decomposition use different time steps")
    solver = SchwarzSolver(prob, decomp, cfg.variant)
    f, g = initial_payload(cfg, prob) if payloads is None else payloads
    f, g = np.asarray(f, dtype=float), np.asarray(g, dtype=float)
    if f.shape != (prob.dim,) or g.shape != (prob.dim,):
        raise ValueError(f"payloads must have shape ({prob.dim},)")
    ref1, ref2 = reference.restrict(decomp.grid1), reference.restrict(decomp.grid2)
    report = SchwarzReport(cfg.variant, cfg.theta, cfg.tol)
    for _ in range(cfg.max_iter):
        f_used = f
        tr1, tr2, g_used, f, g = solver.step(f, g, cfg)
        err = _error(tr1, tr2, ref1, ref2)
        report.errors.append(err)
        report.payloads_I1.append(f_used.copy())
        report.payloads_I2.append(g_used.copy())
        if not math.isfinite(err) or err > DIVERGENCE_FACTOR * max(report.errors[0], 1e-300):
            report.diverged = True
            break
        if err <= cfg.tol * report.errors[0] and report.iterations > 1:
            report.converged = True
            break
    return report


def scalar_problem(d: float, p: SpectralParams) -> ControlProblem:
    """Scalar mode ``A = [d]`` with zero data: its Schwarz iterates are pure error."""
    return build_problem([[d]], [0.0], [0.0], p.nu, p.gamma, p.horizon)


def scalar_interface_ratios(d: float, p: SpectralParams, variant, nt: int,
                            theta: float = 1.0, iterations: int = 8,
                            sweep_order: str = "sequential",
                            seed: int = DEFAULT_SEED) -> tuple[np.ndarray, float]:
    """Signed ratios of successive subdomain-1 payloads for the scalar mode ``d``.

    The payload is renormalized after every iteration, so divergent variants
    never overflow. Returns the ratios and the interface time actually used
    (``alpha`` snapped to the nearest node of the ``nt``-interval grid).
    """
    decomp = Decomposition.nearest(TimeGrid(0.0, p.horizon, nt), p.alpha)
    prob = scalar_problem(d, p)
    solver = SchwarzSolver(prob, decomp, variant)
    cfg = SchwarzConfig(variant, theta=theta, sweep_order=sweep_order)
    rng = np.random.default_rng(seed)
    f = np.array([1.0 + rng.random()])
    g = np.array([1.0 + rng.random()])
    ratios = []
    for _ in range(iterations):
        _, _, _, f_next, g_next = solver.step(f, g, cfg)
        ratios.append(f_next[0] / f[0])
        scale = abs(f_next[0]) or 1.0
        f, g = f_next / scale, g_next / scale
    return np.array(ratios), decomp.alpha


def scalar_contraction_oracle(d: float, p: SpectralParams, variant, nt: int = 4096,
                              theta: float = 1.0, iterations: int = 8,
                              seed: int = DEFAULT_SEED) -> tuple[float, float]:
    """Measured interface contraction of the discrete scalar iteration and its analytic value.

    Both use the interface node actually realised on the grid.
    """
    v = Variant.parse(variant)
    if v not in (Variant.SD1, Variant.SD2, Variant.SN1, Variant.SN2):
        raise ValueError("the oracle covers SD1, SD2, SN1 and SN2")
    ratios, alpha = scalar_interface_ratios(d, p, v, nt, theta, iterations, seed=seed)
    measured = float(np.exp(np.mean(np.log(np.abs(ratios[2:])))))
    p_eff = dataclasses.replace(p, alpha=alpha)
    analytic = rho(v, d, p_eff) if theta == 1 else rho_relaxed(v, d, theta, p_eff)
    return measured, float(analytic)
