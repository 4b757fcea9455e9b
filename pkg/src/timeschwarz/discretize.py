"""Crank-Nicolson all-at-once systems for the forward-backward optimality system.

Unknowns are ordered node-major, ``(y_m, lam_m)`` per time node, which keeps
the matrix banded with ``bl = bu = 3n - 1``. Rows are ordered as: ``n`` rows
for the left condition, ``2n`` rows per time interval, ``n`` rows for the
right condition. Interval rows are stored multiplied by ``h_t``; this changes
nothing but the round-off floor of the solve (about ten times lower).

Derivative interface data is imposed through the ODE itself,
``y' = -A y + lam/nu`` and ``lam' = y + A^T lam - target``, so it is exact
with respect to the semi-discrete dynamics at the interface node.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Union

import numpy as np

from .model import ControlProblem, InterfaceCondition, InterfaceKind, TimeGrid
from .numerics import BandedLU, BandedMatrix

RESIDUAL_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: TimeGrid
    y: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        if self.y.shape != self.lam.shape or self.y.shape[0] != self.grid.nt + 1:
            raise ValueError("trajectory arrays must have shape (nt + 1, n)")

    @property
    def dim(self) -> int:
        return self.y.shape[1]

    def restrict(self, sub: TimeGrid) -> Trajectory:
        """Nodes of ``self`` lying on the sub-grid ``sub`` (same step)."""
        start = round((sub.t_start - self.grid.t_start) / self.grid.h_t)
        sl = slice(start, start + sub.nt + 1)
        return Trajectory(sub, self.y[sl], self.lam[sl])

    def to_csv(self, path) -> None:
        n = self.dim
        header = ["t"] + [f"y_{i + 1}" for i in range(n)] + [f"lambda_{i + 1}" for i in range(n)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for t, y, l in zip(self.grid.nodes, self.y, self.lam):
                w.writerow([f"{v:.17g}" for v in (t, *y, *l)])


@dataclass(frozen=True, eq=False)
class InitialState:
    y0: np.ndarray


@dataclass(frozen=True)
class TerminalRobin:
    """``lam(T) + gamma y(T) = gamma target(T)``; gamma and target come from the problem."""


LeftCondition = Union[InitialState, InterfaceCondition]
RightCondition = Union[TerminalRobin, InterfaceCondition]


@dataclass(frozen=True)
class BoundaryPair:
    left: LeftCondition
    right: RightCondition


def _interval_block(prob: ControlProblem, h: float) -> np.ndarray:
    """The ``2n x 4n`` CN block acting on ``(y_m, lam_m, y_{m+1}, lam_{m+1})``."""
    n, A = prob.dim, prob.A
    I = np.eye(n)
    inv_nu = 1.0 / prob.nu
    blk = np.zeros((2 * n, 4 * n))
    # state rows
    blk[:n, 0:n] = -I / h + A / 2
    blk[:n, n:2 * n] = -inv_nu * I / 2
    blk[:n, 2 * n:3 * n] = I / h + A / 2
    blk[:n, 3 * n:] = -inv_nu * I / 2
    # adjoint rows
    blk[n:, 0:n] = -I / 2
    blk[n:, n:2 * n] = -I / h - A.T / 2
    blk[n:, 2 * n:3 * n] = -I / 2
    blk[n:, 3 * n:] = I / h - A.T / 2
    return blk


def interface_row(kind: InterfaceKind, prob: ControlProblem, t: float,
                  g=None) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``(C, r)`` with ``C @ [y; lam] = r`` imposing ``kind`` data ``g`` at ``t``.

    ``C`` is ``n x 2n`` over the interface node's unknowns.
    """
    n = prob.dim
    g = np.zeros(n) if g is None else np.asarray(g, dtype=float)
    C = np.zeros((n, 2 * n))
    I = np.eye(n)
    if kind is InterfaceKind.STATE_VALUE:
        C[:, :n] = I
        r = g.copy()
    elif kind is InterfaceKind.ADJOINT_VALUE:
        C[:, n:] = I
        r = g.copy()
    elif kind is InterfaceKind.STATE_DERIVATIVE:
        C[:, :n] = -prob.A
        C[:, n:] = I / prob.nu
        r = g.copy()
    elif kind is InterfaceKind.ADJOINT_DERIVATIVE:
        C[:, :n] = I
        C[:, n:] = prob.A.T
        r = g + prob.target_at(t)
    else:
        raise ValueError(f"unknown interface kind {kind!r}")
    return C, r


def extract_interface(traj: Trajectory, kind: InterfaceKind, prob: ControlProblem,
                      end: str = "last") -> np.ndarray:
    """Interface datum of ``kind`` at the first or last node of ``traj``."""
    if end not in ("first", "last"):
        raise ValueError("end must be 'first' or 'last'")
    m = 0 if end == "first" else -1
    y, lam = traj.y[m], traj.lam[m]
    if kind is InterfaceKind.STATE_VALUE:
        return y.copy()
    if kind is InterfaceKind.ADJOINT_VALUE:
        return lam.copy()
    # derivative data cancel large terms of size |A||lam|; evaluate in extended precision
    A = prob.A.astype(np.longdouble)
    y, lam = y.astype(np.longdouble), lam.astype(np.longdouble)
    if kind is InterfaceKind.STATE_DERIVATIVE:
        return (-(A @ y) + lam / prob.nu).astype(float)
    if kind is InterfaceKind.ADJOINT_DERIVATIVE:
        t = traj.grid.nodes[m]
        return (y + A.T @ lam - prob.target_at(t)).astype(float)
    raise ValueError(f"unknown interface kind {kind!r}")


class SubdomainSystem:
    """Assembled and factored CN system on one grid; only the rhs changes per solve."""

    def __init__(self, prob: ControlProblem, grid: TimeGrid, left_kind, right_kind):
        n, nt, h = prob.dim, grid.nt, grid.h_t
        N = 2 * n * (nt + 1)
        bw = 3 * n - 1
        M = BandedMatrix.zeros(N, bw, bw)
        blk = _interval_block(prob, h)
        m = np.arange(nt)
        k = np.arange(2 * n)
        j = np.arange(4 * n)
        rows = n + 2 * n * m[:, None] + k[None, :]
        offs = j[None, :] - k[:, None] - n + bw
        M.band[rows[:, :, None], offs[None, :, :]] = h * blk[None, :, :]

        self.prob, self.grid = prob, grid
        self.left_kind, self.right_kind = left_kind, right_kind
        self.n, self.N = n, N
        self._set_rows(M, np.arange(n), 0, self._left_rows())
        self._set_rows(M, np.arange(N - n, N), N - 2 * n, self._right_rows())
        self.matrix = M
        self.lu = BandedLU(M)

        # interior rhs: trapezoidal average of the target over each interval
        yh = np.array([prob.target_at(t) for t in grid.nodes])
        self._interior_rhs = np.zeros((nt, 2 * n))
        self._interior_rhs[:, n:] = -0.5 * h * (yh[1:] + yh[:-1])

    def _left_rows(self):
        if self.left_kind is None:
            C = np.zeros((self.n, 2 * self.n))
            C[:, :self.n] = np.eye(self.n)
            return C
        return interface_row(self.left_kind, self.prob, self.grid.t_start)[0]

    def _right_rows(self):
        if self.right_kind is None:
            C = np.zeros((self.n, 2 * self.n))
            C[:, :self.n] = self.prob.gamma * np.eye(self.n)
            C[:, self.n:] = np.eye(self.n)
            return C
        return interface_row(self.right_kind, self.prob, self.grid.t_end)[0]

    @staticmethod
    def _set_rows(M: BandedMatrix, rows, col0, C):
        cols = col0 + np.arange(C.shape[1])
        M.band[rows[:, None], cols[None, :] - rows[:, None] + M.bl] = C

    def rhs(self, left: LeftCondition, right: RightCondition) -> np.ndarray:
        n, prob = self.n, self.prob
        b = np.empty(self.N)
        b[n:self.N - n] = self._interior_rhs.ravel()
        if isinstance(left, InitialState):
            b[:n] = left.y0
        else:
            b[:n] = interface_row(left.kind, prob, self.grid.t_start, left.data)[1]
        if isinstance(right, TerminalRobin):
            b[self.N - n:] = prob.gamma * prob.target_at(self.grid.t_end)
        else:
            b[self.N - n:] = interface_row(right.kind, prob, self.grid.t_end, right.data)[1]
        return b

    def solve(self, bc: BoundaryPair) -> Trajectory:
        if _kind_of(bc.left) != self.left_kind or _kind_of(bc.right) != self.right_kind:
            raise ValueError("boundary condition kinds differ from the assembled system")
        b = self.rhs(bc.left, bc.right)
        x = self.lu.solve(b)
        # one refinement step with an extended-precision residual keeps the
        # imposed interface rows exact to round-off of the datum itself
        r = b.astype(np.longdouble) - self.matrix.matvec(x, dtype=np.longdouble)
        x = x + self.lu.solve(r.astype(float))
        res = np.abs(self.matrix.matvec(x) - b).max()
        scale = self.matrix.norm_inf() * np.abs(x).max() + np.abs(b).max()
        if res > RESIDUAL_RTOL * scale:
            raise np.linalg.LinAlgError(f"solve residual {res:.3e} exceeds tolerance")
        u = x.reshape(self.grid.nt + 1, 2, self.n)
        return Trajectory(self.grid, u[:, 0, :].copy(), u[:, 1, :].copy())


def _kind_of(cond):
    if isinstance(cond, (InitialState, TerminalRobin)):
        return None
    if isinstance(cond, InterfaceCondition):
        return cond.kind
    raise TypeError(f"unsupported boundary condition {cond!r}")


def assemble_monolithic(prob: ControlProblem, grid: TimeGrid) -> tuple[BandedMatrix, np.ndarray]:
    sysm = SubdomainSystem(prob, grid, None, None)
    return sysm.matrix, sysm.rhs(InitialState(prob.y0), TerminalRobin())


def solve_monolithic(prob: ControlProblem, grid: TimeGrid) -> Trajectory:
    if abs(grid.t_start) > 0 or abs(grid.t_end - prob.horizon) > 1e-12 * prob.horizon:
        raise ValueError("monolithic grid must span (0, T)")
    return SubdomainSystem(prob, grid, None, None).solve(
        BoundaryPair(InitialState(prob.y0), TerminalRobin()))


def solve_subdomain(prob: ControlProblem, subgrid: TimeGrid, bc: BoundaryPair) -> Trajectory:
    """One subdomain solve; the physical conditions must sit at the physical ends."""
    tol = 1e-12 * prob.horizon
    if isinstance(bc.left, InitialState) and abs(subgrid.t_start) > tol:
        raise ValueError("the initial state can only be imposed at t = 0")
    if isinstance(bc.right, TerminalRobin) and abs(subgrid.t_end - prob.horizon) > tol:
        raise ValueError("the terminal condition can only be imposed at t = T")
    if isinstance(bc.left, InterfaceCondition) and abs(subgrid.t_start) <= tol:
        raise ValueError("subdomain starting at t = 0 needs the initial state on the left")
    if isinstance(bc.right, InterfaceCondition) and abs(subgrid.t_end - prob.horizon) <= tol:
        raise ValueError("subdomain ending at t = T needs the terminal condition on the right")
    return SubdomainSystem(prob, subgrid, _kind_of(bc.left), _kind_of(bc.right)).solve(bc)
