"""Canned experiments: convergence-factor curves, heat-control error decay, theorem sweeps.

Each experiment writes ``<outdir>/<name>/<curve>.csv`` plus a ``manifest.json``
with the parameters, seed and (for the error-decay runs) the calibrated
iteration-count threshold.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .discretize import solve_monolithic
from .model import Decomposition, TimeGrid, Variant, heat_problem_1d
from .numerics import sym_eigen
from .schwarz import DEFAULT_SEED, SchwarzConfig, run_schwarz
from .spectral import (RhoTable, SpectralParams, optimal_theta, rho, rho_bound, sd1_loose_bound,
                       sweep)

log = logging.getLogger(__name__)

FIXED_THETA = 0.975
ALL_VARIANTS = tuple(Variant)


@dataclass
class ExperimentSpec:
    name: str
    nu: float = 0.1
    gamma: float = 10.0
    T: float = 1.0
    alpha: float = 0.4
    L: float = 1.0
    nx: int = 32
    nt: int = 32
    variants: tuple = ALL_VARIANTS
    theta_policy: str = "fixed"
    outdir: Path | None = None
    seed: int = DEFAULT_SEED
    init: str = "zeros"
    max_iter: int = 15

    def __post_init__(self):
        self.variants = tuple(Variant.parse(v) for v in self.variants)
        if self.theta_policy not in ("none", "fixed", "optimal"):
            raise ValueError("theta_policy must be 'none', 'fixed' or 'optimal'")
        self.params  # validates nu, gamma, T, alpha

    @property
    def params(self) -> SpectralParams:
        return SpectralParams(self.nu, self.gamma, self.T, self.alpha)

    def directory(self) -> Path | None:
        if self.outdir is None:
            return None
        d = Path(self.outdir) / self.name
        d.mkdir(parents=True, exist_ok=True)
        return d

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["variants"] = [v.value for v in self.variants]
        out["outdir"] = None if self.outdir is None else str(self.outdir)
        return out


def _versions() -> dict:
    return {"timeschwarz": __version__, "numpy": np.__version__,
            "python": platform.python_version(), "platform": sys.platform}


def write_manifest(directory: Path, params: dict, seed, threshold=None, **extra) -> Path:
    path = directory / "manifest.json"
    payload = {"params": params, "seed": seed, "threshold": threshold,
               "versions": _versions(), **extra}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def left_grid(points: int = 400) -> np.ndarray:
    """``d = 0`` followed by ``points`` log-spaced values on [1e-2, 1e4]."""
    return np.concatenate([[0.0], np.logspace(-2, 4, points)])


def fig_left(spec: ExperimentSpec) -> dict[str, RhoTable]:
    """Factor curves of the requested variants plus relaxed SD1/SN1 at their optimum."""
    p = spec.params
    d = left_grid()
    curves = {v.value: sweep(v, d, p) for v in spec.variants}
    for v in (Variant.SD1, Variant.SN1):
        th = optimal_theta(v, p)
        curves[f"{v.value}_relaxed"] = sweep(v, d, p, theta=th)
    out = spec.directory()
    if out is not None:
        for name, table in curves.items():
            table.to_csv(out / f"{name}.csv")
        thetas = {f"{v.value}": optimal_theta(v, p) for v in (Variant.SD1, Variant.SN1)}
        write_manifest(out, spec.as_dict(), spec.seed, optimal_theta=thetas,
                       d_grid={"zero_prepended": True, "logspace": [1e-2, 1e4, len(d) - 1]})
    return curves


def calibrate_threshold(errors, margin: float = 10.0) -> float:
    """Power of ten (relative to the first error) just above the run's round-off floor.

    The floor is the smallest relative error the run attains; the threshold is
    the smallest power of ten at least ``margin`` times above it, so noise at
    the floor cannot decide an iteration count.
    """
    rel = np.asarray(errors, dtype=float) / errors[0]
    if rel.size < 2:
        raise ValueError("need at least two iterations to calibrate")
    floor = float(np.min(rel[1:]))
    if not floor > 0:
        raise ValueError("error reached exactly zero; nothing to calibrate")
    threshold = 10.0 ** np.ceil(np.log10(margin * floor))
    if threshold >= 1:
        raise ValueError("run never reduced its error enough to calibrate")
    return float(threshold)


@dataclass
class RightResult:
    reports: dict
    threshold: float
    iterations: dict
    spectrum: np.ndarray
    alpha: float
    extra: dict = field(default_factory=dict)


def fig_right(spec: ExperimentSpec) -> RightResult:
    """Heat-control error decay for each variant, unrelaxed and (SD1/SN1) relaxed."""
    prob, _ = heat_problem_1d(spec.L, spec.nx, spec.nu, spec.gamma, spec.T)
    grid = TimeGrid(0.0, spec.T, spec.nt)
    decomp = Decomposition.nearest(grid, spec.alpha)
    if abs(decomp.alpha - spec.alpha) > 1e-12:
        log.info("interface alpha=%g snapped to node %g", spec.alpha, decomp.alpha)
    reference = solve_monolithic(prob, grid)
    spectrum = sym_eigen(prob.A).eigenvalues
    p_eff = dataclasses.replace(spec.params, alpha=decomp.alpha)

    runs = [(v, 1.0) for v in spec.variants]
    if spec.theta_policy != "none":
        for v in (Variant.SD1, Variant.SN1):
            if v in spec.variants:
                th = FIXED_THETA if spec.theta_policy == "fixed" else optimal_theta(v, p_eff)
                runs.append((v, th))
    reports = {}
    for v, th in runs:
        cfg = SchwarzConfig(v, theta=th, max_iter=spec.max_iter, tol=1e-300,
                            init=spec.init, seed=spec.seed)
        key = v.value if th == 1.0 else f"{v.value}_theta{th:g}"
        reports[key] = run_schwarz(prob, decomp, cfg, reference)

    base = reports.get("SD1")
    threshold = calibrate_threshold(base.errors) if base is not None else 1e-6
    iterations = {k: r.iterations_to(threshold) for k, r in reports.items()}
    result = RightResult(reports, threshold, iterations, spectrum, decomp.alpha)

    out = spec.directory()
    if out is not None:
        for k, r in reports.items():
            r.to_csv(out / f"{k}.csv")
        write_manifest(out, spec.as_dict(), spec.seed, threshold,
                       threshold_basis="error relative to the first iterate's error",
                       alpha_used=decomp.alpha, smallest_eigenvalue=float(spectrum[0]),
                       iterations=iterations,
                       diverged={k: r.diverged for k, r in reports.items()},
                       rho_max={v.value: float(np.max(rho(v, spectrum, p_eff)))
                                for v in spec.variants})
    return result


def theorem_sweeps(seed: int = DEFAULT_SEED, count: int = 200, bound_count: int = 50,
                   outdir=None) -> dict:
    """Randomized checks of the SD1 convergence theorem and the gamma = 0 estimates.

    The last section samples outside the theorem hypotheses (``alpha > T/2``,
    large ``gamma``); violations there are reported, not counted as failures.
    """
    if count < 1 or bound_count < 1:
        raise ValueError("counts must be at least 1")
    rng = np.random.default_rng(seed)

    def draw(gamma=None, half=True):
        nu = 10.0 ** rng.uniform(-3, 1)
        g = rng.uniform(0, 100) if gamma is None else gamma
        T = rng.uniform(0.1, 10)
        alpha = rng.uniform(0, 0.5 if half else 1.0) * T
        alpha = min(max(alpha, 1e-6 * T), (1 - 1e-6) * T)
        return SpectralParams(nu, g, T, alpha)

    rows = []

    def check(section, p, d, value, limit, ok):
        rows.append({"section": section, "nu": p.nu, "gamma": p.gamma, "T": p.horizon,
                     "alpha": p.alpha, "d": d, "value": value, "limit": limit, "ok": bool(ok)})

    for _ in range(count):
        p, d = draw(), rng.uniform(0, 1e3)
        r = rho(Variant.SD1, d, p)
        check("theorem1_alpha_half", p, d, r, 1.0, r < 1)
    for _ in range(count):
        p, d = draw(gamma=0.0, half=False), rng.uniform(0, 1e3)
        r = rho(Variant.SD1, d, p)
        check("theorem1_gamma_zero", p, d, r, 1.0, r < 1)

    d_probe = None
    for _ in range(bound_count):
        p = draw(gamma=0.0, half=False)
        d_min = rng.uniform(0, 100)
        d_probe = np.concatenate([[d_min], np.geomspace(max(d_min, 1e-3), 1e4, 200)])
        for variant, section in ((Variant.SD1, "theorem2_bound"), (Variant.SN1, "theorem3_bound")):
            bound = rho_bound(variant, d_min, p)
            worst = float(np.max(rho(variant, d_probe, p)))
            check(section, p, d_min, worst, bound, worst <= bound * (1 + 1e-12))
        loose = sd1_loose_bound(d_min, p)
        tight = rho_bound(Variant.SD1, d_min, p)
        # strictness is invisible once coth rounds to 1; compare to a few ulps
        check("theorem2_loose_bound", p, d_min, tight, loose, tight <= loose * (1 + 1e-12))

    p4 = SpectralParams()
    for variant in (Variant.SD1, Variant.SN1):
        scaled = rho(variant, 1e3, p4) * 4 * p4.nu * 1e6
        check(f"asymptotic_{variant.value}", p4, 1e3, scaled, 0.01, abs(scaled - 1) <= 0.01)

    outside = []
    for _ in range(count):
        T = rng.uniform(0.1, 10)
        p = SpectralParams(10.0 ** rng.uniform(-3, 1), rng.uniform(10, 1e3), T,
                           rng.uniform(0.5, 0.999) * T)
        d = 10.0 ** rng.uniform(-3, 3)
        r = rho(Variant.SD1, d, p)
        if not r < 1:
            outside.append({"nu": p.nu, "gamma": p.gamma, "T": p.horizon, "alpha": p.alpha,
                            "d": d, "rho": r})

    summary = {}
    for row in rows:
        s = summary.setdefault(row["section"], {"samples": 0, "violations": 0})
        s["samples"] += 1
        s["violations"] += 0 if row["ok"] else 1
    summary["outside_hypotheses"] = {"samples": count, "violations": len(outside)}
    report = {"summary": summary, "rows": rows, "outside": outside,
              "passed": all(r["ok"] for r in rows)}

    if outdir is not None:
        out = Path(outdir) / "theorems"
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "samples.csv", "w") as fh:
            keys = list(rows[0])
            fh.write(",".join(keys) + "\n")
            for row in rows:
                fh.write(",".join(f"{row[k]:.17g}" if isinstance(row[k], float) else str(row[k])
                                  for k in keys) + "\n")
        write_manifest(out, {"count": count, "bound_count": bound_count}, seed,
                       summary=summary, outside_violations=outside)
    return report
