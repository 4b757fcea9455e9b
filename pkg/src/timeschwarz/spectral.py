"""Closed-form convergence factors of the two-subdomain Schwarz methods in time.

For a symmetric ``A`` each eigenvalue ``d`` gives an independent scalar
forward-backward system. With ``sigma = sqrt(d^2 + 1/nu)``, ``a = sigma*alpha``
and ``b = sigma*(T - alpha)`` the Dirichlet variant SD1 contracts the interface
error of that mode by

    F_SD1 = (1 + gamma(sigma coth b - d)) / (nu (sigma coth a + d)(sigma coth b + d + gamma/nu))

and the Neumann variant SN1 by the same expression with ``tanh`` in place of
``coth``. The reversed variants (SD2, SN2) invert these factors, and the
single-field variants (SD3, SD4, SN3, SN4) have factor 1 for every mode.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .model import Variant

# beyond this argument tanh and coth are 1 to far below double precision
HYPERBOLIC_CLAMP = 350.0


@dataclass(frozen=True)
class SpectralParams:
    nu: float = 0.1
    gamma: float = 10.0
    horizon: float = 1.0
    alpha: float = 0.4

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not 0 < self.alpha < self.horizon:
            raise ValueError("alpha must lie strictly inside (0, horizon)")

    def as_dict(self) -> dict:
        return {"nu": self.nu, "gamma": self.gamma, "T": self.horizon, "alpha": self.alpha}


def _tanh(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > HYPERBOLIC_CLAMP, 1.0, np.tanh(np.minimum(x, HYPERBOLIC_CLAMP)))


def _coth(x):
    return 1.0 / _tanh(x)


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def sigma(d, nu):
    if not nu > 0:
        raise ValueError("nu must be positive")
    d = np.asarray(d, dtype=float)
    return _out(np.sqrt(d * d + 1.0 / nu))


def _core(d, p: SpectralParams, hyp):
    d = np.asarray(d, dtype=float)
    s = np.sqrt(d * d + 1.0 / p.nu)
    ha = s * hyp(s * p.alpha)
    hb = s * hyp(s * (p.horizon - p.alpha))
    num = 1.0 + p.gamma * (hb - d)
    den = p.nu * (ha + d) * (hb + d + p.gamma / p.nu)
    return _out(num / den)


def rho_core_sd1(d, p: SpectralParams):
    """Signed SD1 fraction ``F_SD1(d)`` before taking the modulus."""
    return _core(d, p, _coth)


def rho_core_sn1(d, p: SpectralParams):
    """Signed SN1 fraction ``F_SN1(d)``: the SD1 fraction with tanh for coth."""
    return _core(d, p, _tanh)


def rho(variant, d, p: SpectralParams):
    v = Variant.parse(variant)
    if v in (Variant.SD1, Variant.SD2):
        f = np.abs(rho_core_sd1(d, p))
    elif v in (Variant.SN1, Variant.SN2):
        f = np.abs(rho_core_sn1(d, p))
    else:
        return _out(np.ones_like(np.asarray(d, dtype=float)))
    if v in (Variant.SD2, Variant.SN2):
        f = 1.0 / f
    return _out(f)


def rho_max(variant, eigenvalues, p: SpectralParams) -> float:
    d = np.asarray(eigenvalues, dtype=float).ravel()
    if d.size == 0:
        raise ValueError("spectrum is empty")
    return float(np.max(rho(variant, d, p)))


def _core_for(variant):
    v = Variant.parse(variant)
    if v is Variant.SD1:
        return rho_core_sd1
    if v is Variant.SN1:
        return rho_core_sn1
    raise ValueError(f"relaxation is only analysed for SD1 and SN1, not {v.value}")


def rho_relaxed(variant, d, theta: float, p: SpectralParams, literal: bool = False):
    """Relaxed factor ``|1 - theta (1 + F(d))|``.

    The one-step interface map of SD1/SN1 multiplies the error by ``-F``, so
    averaging with weight ``theta`` gives ``(1 - theta) - theta F``. With
    ``literal=True`` the variant ``|1 - theta F|`` is returned instead, for
    comparison only; it is not the factor of the relaxed iteration.
    """
    core = _core_for(variant)
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    f = np.asarray(core(d, p))
    if literal:
        return _out(np.abs(1.0 - theta * f))
    if theta == 1:
        return _out(np.abs(f))
    return _out(np.abs(1.0 - theta * (1.0 + f)))


def rho_at_zero(variant, p: SpectralParams) -> float:
    """Closed-form factor for the zero eigenvalue (SD1, SD2 or SN1)."""
    v = Variant.parse(variant)
    s = math.sqrt(1.0 / p.nu)
    gs = p.gamma * s
    a, b = s * p.alpha, s * (p.horizon - p.alpha)
    ta, tb = float(_tanh(a)), float(_tanh(b))
    if v is Variant.SD1:
        cb = 1.0 / tb
        return ta * (gs * cb + 1.0) / (cb + gs)
    if v is Variant.SD2:
        cb = 1.0 / tb
        return (1.0 / ta) * (cb + gs) / (gs * cb + 1.0)
    if v is Variant.SN1:
        return (1.0 / ta) * (gs * tb + 1.0) / (tb + gs)
    if v is Variant.SN2:
        return ta * (tb + gs) / (gs * tb + 1.0)
    raise ValueError(f"no zero-eigenvalue closed form for {v.value}")


def optimal_theta(variant, p: SpectralParams) -> float:
    """Equioscillation optimum ``2 / (2 + rho(0))`` for SD1 or SN1."""
    _core_for(variant)
    return 2.0 / (2.0 + rho_at_zero(variant, p))


def rho_bound(variant, d_min: float, p: SpectralParams) -> float:
    """Upper bound on the factor over ``d >= d_min`` when ``gamma = 0``."""
    core = _core_for(variant)
    if p.gamma != 0:
        raise ValueError("the estimate holds only for gamma = 0")
    if d_min < 0:
        raise ValueError("d_min must be non-negative")
    hyp = _coth if core is rho_core_sd1 else _tanh
    s = math.sqrt(d_min**2 + 1.0 / p.nu)
    first = s * float(hyp(s * p.alpha)) + d_min
    second = s * float(hyp(s * (p.horizon - p.alpha))) + d_min
    return 1.0 / (p.nu * first * second)


def sd1_loose_bound(d_min: float, p: SpectralParams) -> float:
    """The cruder SD1 estimate ``1 / (nu (sigma_min + d_min)^2)``."""
    s = math.sqrt(d_min**2 + 1.0 / p.nu)
    return 1.0 / (p.nu * (s + d_min) ** 2)


@dataclass
class RhoTable:
    variant: Variant
    params: SpectralParams
    d: np.ndarray
    rho: np.ndarray
    theta: float | None = None
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["d", "rho"])
            for d, r in zip(self.d, self.rho):
                w.writerow([f"{d:.17g}", f"{r:.17g}"])


def sweep(variant, d_grid, p: SpectralParams, theta: float | None = None,
          literal: bool = False) -> RhoTable:
    v = Variant.parse(variant)
    d = np.asarray(d_grid, dtype=float).ravel()
    if np.any(np.diff(d) < 0):
        raise ValueError("d grid must be ascending")
    if theta is None:
        values = np.asarray(rho(v, d, p), dtype=float)
    else:
        values = np.asarray(rho_relaxed(v, d, theta, p, literal=literal), dtype=float)
    return RhoTable(v, p, d, np.atleast_1d(values), theta)
