"""Optimal control problem data, time grids and the transmission table.

The reduced optimality system couples a state ``y`` (forward in time, initial
value ``y0``) with an adjoint ``lam`` (backward in time, terminal Robin
condition ``lam(T) + gamma*y(T) = gamma*target(T)``):

    y'   + A y   - lam / nu = 0
    lam' - y - A^T lam      = -target(t)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

TargetFn = Callable[[float], np.ndarray]

# relative node-snapping tolerance for the interface time
NODE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class ControlProblem:
    A: np.ndarray
    y0: np.ndarray
    target: TargetFn
    nu: float
    gamma: float
    horizon: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise ValueError(f"A must be a non-empty square matrix, got shape {A.shape}")
        if y0.shape != (A.shape[0],):
            raise ValueError(f"y0 has shape {y0.shape}, expected ({A.shape[0]},)")
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        A.flags.writeable = False
        y0.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def target_at(self, t: float) -> np.ndarray:
        v = np.atleast_1d(np.asarray(self.target(t), dtype=float))
        if v.shape != (self.dim,):
            raise ValueError(f"target returned shape {v.shape}, expected ({self.dim},)")
        return v


def build_problem(A, y0, target, nu, gamma, horizon) -> ControlProblem:
    """Validate and bundle problem data.

    ``target`` may be a callable ``t -> vector`` or a constant vector.
    """
    if not callable(target):
        const = np.atleast_1d(np.asarray(target, dtype=float)).copy()
        target = lambda t: const  # noqa: E731
    return ControlProblem(A, y0, target, nu, gamma, horizon)


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    nt: int

    def __post_init__(self):
        if self.nt < 1:
            raise ValueError("nt must be at least 1")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")

    @property
    def h_t(self) -> float:
        return (self.t_end - self.t_start) / self.nt

    @property
    def nodes(self) -> np.ndarray:
        return self.t_start + self.h_t * np.arange(self.nt + 1)


@dataclass(frozen=True)
class Decomposition:
    """Two non-overlapping time subdomains ``(0, alpha)`` and ``(alpha, T)``."""

    alpha: float
    grid1: TimeGrid
    grid2: TimeGrid

    @classmethod
    def from_grid(cls, grid: TimeGrid, alpha: float) -> Decomposition:
        """Split ``grid`` at ``alpha``, which must be an interior grid node."""
        h = grid.h_t
        m = round((alpha - grid.t_start) / h)
        node = grid.t_start + m * h
        if abs(alpha - node) > 0.5 * NODE_RTOL * h:
            raise ValueError(f"alpha={alpha} is not a node of the time grid (h_t={h})")
        if not 0 < m < grid.nt:
            raise ValueError(f"alpha={alpha} must lie strictly inside ({grid.t_start}, {grid.t_end})")
        return cls(node, TimeGrid(grid.t_start, node, m), TimeGrid(node, grid.t_end, grid.nt - m))

    @classmethod
    def nearest(cls, grid: TimeGrid, alpha: float) -> Decomposition:
        """Split at the interior node closest to ``alpha``."""
        m = min(max(round((alpha - grid.t_start) / grid.h_t), 1), grid.nt - 1)
        return cls.from_grid(grid, grid.t_start + m * grid.h_t)

    @property
    def split_index(self) -> int:
        return self.grid1.nt


class Variant(enum.Enum):
    SD1 = "SD1"
    SD2 = "SD2"
    SD3 = "SD3"
    SD4 = "SD4"
    SN1 = "SN1"
    SN2 = "SN2"
    SN3 = "SN3"
    SN4 = "SN4"

    @classmethod
    def parse(cls, value) -> Variant:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown variant {value!r}; expected one of "
                             f"{', '.join(v.value for v in cls)}") from None


class InterfaceKind(enum.Enum):
    STATE_VALUE = "y"
    ADJOINT_VALUE = "lambda"
    STATE_DERIVATIVE = "dy"
    ADJOINT_DERIVATIVE = "dlambda"

    @property
    def is_derivative(self) -> bool:
        return self in (InterfaceKind.STATE_DERIVATIVE, InterfaceKind.ADJOINT_DERIVATIVE)


@dataclass(frozen=True, eq=False)
class InterfaceCondition:
    kind: InterfaceKind
    data: np.ndarray


@dataclass(frozen=True)
class TransmissionSpec:
    """Kinds of data received by subdomain 1 and subdomain 2 at the interface."""

    at_I1: InterfaceKind
    at_I2: InterfaceKind


_Y, _L = InterfaceKind.STATE_VALUE, InterfaceKind.ADJOINT_VALUE
_DY, _DL = InterfaceKind.STATE_DERIVATIVE, InterfaceKind.ADJOINT_DERIVATIVE

_TABLE = {
    Variant.SD1: TransmissionSpec(_L, _Y),
    Variant.SD2: TransmissionSpec(_Y, _L),
    Variant.SD3: TransmissionSpec(_Y, _Y),
    Variant.SD4: TransmissionSpec(_L, _L),
    Variant.SN1: TransmissionSpec(_DL, _DY),
    Variant.SN2: TransmissionSpec(_DY, _DL),
    Variant.SN3: TransmissionSpec(_DY, _DY),
    Variant.SN4: TransmissionSpec(_DL, _DL),
}


def transmission_table(variant) -> TransmissionSpec:
    return _TABLE[Variant.parse(variant)]


@dataclass(frozen=True)
class SpatialMesh:
    length: float
    nx: int

    @property
    def h_x(self) -> float:
        return self.length / self.nx

    @property
    def interior(self) -> np.ndarray:
        return self.h_x * np.arange(1, self.nx)


def laplacian_1d(nx: int, length: float = 1.0) -> np.ndarray:
    """Second-order FD matrix of ``-d^2/dx^2`` with homogeneous Dirichlet ends."""
    h = length / nx
    m = nx - 1
    return (2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)) / h**2


def heat_target(x, t):
    """Desired state ``sin(pi x)(2 t^2 + t)`` of the heat control test case."""
    return np.sin(np.pi * x) * (2.0 * t**2 + t)


def heat_problem_1d(L=1.0, nx=32, nu=0.1, gamma=10.0, horizon=1.0,
                    target_fn=heat_target) -> tuple[ControlProblem, SpatialMesh]:
    """Semi-discrete 1D heat control problem with zero initial state."""
    if nx < 2:
        raise ValueError("nx must be at least 2")
    mesh = SpatialMesh(float(L), int(nx))
    x = mesh.interior
    A = laplacian_1d(nx, L)
    prob = ControlProblem(A, np.zeros(nx - 1), lambda t: target_fn(x, t), nu, gamma, horizon)
    return prob, mesh


def recover_control(lam, nu: float) -> np.ndarray:
    """Control ``u = lam / nu`` nodewise; accepts a Trajectory or an array."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    values = getattr(lam, "lam", lam)
    return np.asarray(values, dtype=float) / nu
