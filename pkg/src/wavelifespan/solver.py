"""Time marching of u_t = eps*u_t0 + L'(|u_t|^p) on the characteristic lattice.

With dx = dt = h both backward characteristics through a node pass through
earlier nodes exactly, so the Duhamel integral is a trapezoid sum of node
values.  Running prefix sums along both characteristic families make each
node update O(1) amortized; the s = t endpoint couples the node to itself
and is resolved by a damped fixed-point iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import (
    CharField,
    Cause,
    GridSpec,
    InitialData,
    LifespanEstimate,
    ModelParams,
    Status,
    validate,
)
from .kernels import free_solution_dt, nonlinear_weight, weight_w

DAMPING = 0.5


def default_blow_threshold(params: ModelParams, data: InitialData) -> float:
    sup_free = params.epsilon * (data.sup_f_prime() + data.sup_g())
    return 1e6 * (1.0 + sup_free)


def _solve_level(
    base: np.ndarray,
    gamma: np.ndarray,
    p: float,
    inner_tol: float,
    inner_max: int,
    blow_threshold: float,
) -> tuple[np.ndarray, str]:
    """Solve z = base + gamma*|z|^p nodewise; returns (z, flag).

    flag: "ok" (all nodes resolved), "blowup" (some node has no finite
    solution or escaped the threshold), "failed" (finite but unconverged).

    Strategy: damped fixed-point first (contraction while far from the
    fold), then an existence check - for base > 0 the scalar equation has a
    root iff base <= z_m (1 - 1/p) with z_m = (p*gamma)^{-1/(p-1)} - and a
    bracketed bisection for roots the plain iteration approaches too slowly.
    """
    z = base.copy()
    for _ in range(inner_max):
        rhs = base + gamma * np.abs(z) ** p
        resid = np.max(np.abs(z - rhs))
        z = (1.0 - DAMPING) * z + DAMPING * rhs
        scale = np.max(np.abs(z))
        if not np.isfinite(scale) or scale > blow_threshold:
            return z, "blowup"
        if resid <= inner_tol * max(1.0, scale):
            return z, "ok"

    # no finite fixed point once base crosses the fold of z - gamma*z^p
    z_m = (p * gamma) ** (-1.0 / (p - 1.0))
    cap = z_m * (1.0 - 1.0 / p)
    if np.any(base > cap * (1.0 + 1e-12)):
        return z, "blowup"

    # remaining roots are bracketed: [0, z_m] for base > 0 (smallest root,
    # phi changes sign there once base <= cap), [base, 0] for base <= 0
    lo = np.minimum(base, 0.0)
    hi = np.where(base > 0.0, np.minimum(z_m, np.full_like(z, np.inf)), 0.0)
    for _ in range(110):
        z = 0.5 * (lo + hi)
        phi = base + gamma * np.abs(z) ** p - z
        lo = np.where(phi > 0.0, z, lo)
        hi = np.where(phi > 0.0, hi, z)
    z = 0.5 * (lo + hi)
    scale = np.max(np.abs(z))
    resid = np.max(np.abs(z - base - gamma * np.abs(z) ** p))
    if resid <= 100.0 * inner_tol * max(1.0, scale):
        return z, "ok"
    return z, "failed"


def _active_slice(grid: GridSpec, n: int, R: float) -> tuple[int, int]:
    """Index range [lo, hi] of nodes with |x_i| <= t_n + R."""
    t = n * grid.h
    lo = math.ceil((-(t + R) - grid.x_min) / grid.h - 1e-9)
    hi = math.floor(((t + R) - grid.x_min) / grid.h + 1e-9)
    return max(lo, 0), min(hi, grid.n_x - 1)


def _masked_weighted_sup(U: np.ndarray, w: np.ndarray) -> float:
    """sup |w*U| treating w*0 as 0 even where the weight is singular."""
    prod = np.where(U == 0.0, 0.0, w) * np.abs(U)
    return float(np.max(prod)) if prod.size else 0.0


def march(
    params: ModelParams,
    data: InitialData,
    grid: GridSpec,
    blow_threshold: Optional[float] = None,
    inner_tol: float = 1e-12,
    inner_max: int = 50,
    keep_field: bool = True,
    track_weighted_sup: bool = False,
) -> tuple[CharField, LifespanEstimate]:
    """March the integral equation level by level until blow-up or t_max."""
    violations = validate(params, data, grid)
    if violations:
        raise ValueError("invalid configuration: " + "; ".join(violations))
    if blow_threshold is None:
        blow_threshold = default_blow_threshold(params, data)
    if inner_tol <= 0:
        raise ValueError("inner_tol must be positive")

    h, eps, p, R = grid.h, params.epsilon, params.p, params.R
    n_x, n_t = grid.n_x, grid.n_t
    x = grid.x_nodes()

    # accumulators indexed by characteristic diagonal: plus diagonals c = i+n,
    # minus diagonals d = i-n (offset by n_t to stay nonnegative)
    plus_sums = np.zeros(n_x + n_t)
    minus_sums = np.zeros(n_x + n_t)
    off = n_t

    levels = np.zeros((n_t + 1, n_x)) if keep_field else None

    lo, hi = _active_slice(grid, 0, R)
    xa = x[lo : hi + 1]
    U0 = free_solution_dt(xa, 0.0, data, eps)
    W0 = nonlinear_weight(xa, 0.0, params)
    F0 = np.abs(U0) ** p * W0
    idx = np.arange(lo, hi + 1)
    plus_sums[idx] += 0.5 * F0
    minus_sums[idx + off] += 0.5 * F0
    if keep_field:
        levels[0, lo : hi + 1] = U0

    sup_history = [float(np.max(np.abs(U0))) if U0.size else 0.0]
    wsup_history = None
    if track_weighted_sup:
        wsup_history = [_masked_weighted_sup(U0, weight_w(xa, 0.0, params))]

    status = Status.survived
    cause = None
    T_blow = None
    n_done = 0

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_t + 1):
            t = n * h
            lo, hi = _active_slice(grid, n, R)
            xa = x[lo : hi + 1]
            W = nonlinear_weight(xa, t, params)
            A = free_solution_dt(xa, t, data, eps)
            K = 0.5 * h * (
                plus_sums[lo + n : hi + n + 1] + minus_sums[lo - n + off : hi - n + off + 1]
            )
            base = A + K
            gamma = 0.5 * h * W

            z, flag = _solve_level(base, gamma, p, inner_tol, inner_max, blow_threshold)
            sup_z = float(np.max(np.abs(z)))
            if flag == "blowup":
                status = Status.blowup
                cause = Cause.threshold_exceeded
                T_blow = t - 0.5 * h
                sup_history.append(sup_z)
                break
            if flag == "failed":
                status = Status.inner_iteration_failed
                cause = Cause.fixed_point_diverged
                T_blow = t - 0.5 * h
                sup_history.append(sup_z)
                break

            F = np.abs(z) ** p * W
            idx_p = np.arange(lo + n, hi + n + 1)
            plus_sums[idx_p] += F
            minus_sums[idx_p - 2 * n + off] += F
            if keep_field:
                levels[n, lo : hi + 1] = z
            sup_history.append(sup_z)
            if track_weighted_sup:
                wsup_history.append(_masked_weighted_sup(z, weight_w(xa, t, params)))
            n_done = n

    if keep_field and status is not Status.survived:
        levels = levels[: n_done + 1, :]  # drop the unresolved detection level
    field_out = CharField(
        grid=grid,
        levels=levels,
        plus_sums=plus_sums,
        minus_sums=minus_sums,
        n_levels_done=n_done,
    )
    estimate = LifespanEstimate(
        status=status,
        T_blow=T_blow,
        h=h,
        sup_history=sup_history,
        cause=cause,
        weighted_sup_history=wsup_history,
    )
    return field_out, estimate


def weighted_sup_norm(field: CharField, params: ModelParams, T: float) -> float:
    """Lattice version of sup_{t<=T} |w(x,t) U(x,t)|.

    Nodes where the weight is singular (a = 0 with t+|x|+R = 1) contribute
    only through nonzero U; w * 0 is counted as 0.
    """
    if field.levels is None:
        raise ValueError("field values were not stored for this run")
    grid = field.grid
    n_T = grid.index_of_t(T)
    if n_T > field.levels.shape[0] - 1:
        raise ValueError("T exceeds the computed horizon")
    x = grid.x_nodes()
    best = 0.0
    for n in range(n_T + 1):
        lo, hi = _active_slice(grid, n, params.R)
        U = field.levels[n, lo : hi + 1]
        w = weight_w(x[lo : hi + 1], n * grid.h, params)
        best = max(best, _masked_weighted_sup(U, w))
    return best


def apply_duhamel_field(
    source: np.ndarray, grid: GridSpec, params: ModelParams, R: float
) -> np.ndarray:
    """L' applied to a lattice source field (|v|^p already taken by caller).

    source[n, i] is the full integrand numerator v(x_i, t_n); the weight is
    applied here.  Explicit trapezoid: no endpoint implicitness.
    """
    n_levels, n_x = source.shape
    h = grid.h
    x = grid.x_nodes()
    n_t = n_levels - 1
    plus = np.zeros(n_x + n_t)
    minus = np.zeros(n_x + n_t)
    off = n_t
    out = np.zeros_like(source)
    for n in range(n_levels):
        lo, hi = _active_slice(grid, n, R)
        xa = x[lo : hi + 1]
        W = nonlinear_weight(xa, n * h, params)
        G = source[n, lo : hi + 1] * W
        if n > 0:
            out[n, lo : hi + 1] = 0.5 * h * (
                plus[lo + n : hi + n + 1] + minus[lo - n + off : hi - n + off + 1] + G
            )
        weight = 0.5 if n == 0 else 1.0
        idx = np.arange(lo + n, hi + n + 1)
        plus[idx] += weight * G
        minus[idx - 2 * n + off] += weight * G
    return out


@dataclass
class PicardReport:
    """Weighted norms of the Picard sequence U_{j+1} = L'(|U_j + eps u_t0|^p)."""

    norms: list = field(default_factory=list)  # ||U_j|| for j = 1..j_max
    diff_norms: list = field(default_factory=list)  # ||U_{j+1} - U_j|| for j = 1..j_max-1
    final: Optional[np.ndarray] = None
    grid: Optional[GridSpec] = None
    diverged_at: Optional[int] = None

    def contraction_ratios(self) -> list[float]:
        out = []
        for j in range(1, len(self.diff_norms)):
            prev = self.diff_norms[j - 1]
            if prev > 0:
                out.append(self.diff_norms[j] / prev)
        return out


def _weighted_norm_field(U: np.ndarray, grid: GridSpec, params: ModelParams) -> float:
    x = grid.x_nodes()
    best = 0.0
    for n in range(U.shape[0]):
        lo, hi = _active_slice(grid, n, params.R)
        w = weight_w(x[lo : hi + 1], n * grid.h, params)
        best = max(best, _masked_weighted_sup(U[n, lo : hi + 1], w))
    return best


def picard_iterate(
    params: ModelParams,
    data: InitialData,
    grid: GridSpec,
    T: float,
    j_max: int,
) -> PicardReport:
    """Materialize the Picard sequence on [0, T] and record its weighted norms."""
    if j_max < 2:
        raise ValueError("j_max must be >= 2")
    n_T = grid.index_of_t(T)
    if n_T > grid.n_t:
        raise ValueError("T exceeds the grid horizon")
    x = grid.x_nodes()
    h = grid.h
    free = np.zeros((n_T + 1, grid.n_x))
    for n in range(n_T + 1):
        lo, hi = _active_slice(grid, n, params.R)
        free[n, lo : hi + 1] = free_solution_dt(x[lo : hi + 1], n * h, data, params.epsilon)

    sub = GridSpec(h=h, t_max=n_T * h, pad=grid.pad + (grid.t_max - n_T * h))
    report = PicardReport(grid=sub)
    U = np.zeros_like(free)  # U_1 = 0
    report.norms.append(0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(1, j_max):
            source = np.abs(U + free) ** params.p
            if not np.all(np.isfinite(source)):
                report.diverged_at = j
                break
            U_next = apply_duhamel_field(source, sub, params, params.R)
            if not np.all(np.isfinite(U_next)):
                report.diverged_at = j + 1
                break
            report.diff_norms.append(_weighted_norm_field(U_next - U, sub, params))
            U = U_next
            report.norms.append(_weighted_norm_field(U, sub, params))
    report.final = U
    return report


def reconstruct_u(field: CharField, data: InitialData, epsilon: float) -> np.ndarray:
    """Per-column trapezoid time-integral of U plus eps*f(x)."""
    if field.levels is None:
        raise ValueError("field values were not stored for this run")
    U = field.levels
    h = field.grid.h
    u = cumulative_trapezoid(U, dx=h, axis=0, initial=0.0)
    u += epsilon * data.f(field.grid.x_nodes())[None, :]
    return u


def pde_residual(u: np.ndarray, field: CharField, params: ModelParams) -> float:
    """sup over interior nodes of |D_tt u - D_xx u - |U|^p * weight|."""
    if field.levels is None:
        raise ValueError("field values were not stored for this run")
    grid = field.grid
    h = grid.h
    if u.shape[0] < 3:
        raise ValueError("need at least three time levels")
    U = field.levels
    x = grid.x_nodes()[1:-1]
    t = (h * np.arange(u.shape[0]))[1:-1]
    d_tt = (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / h**2
    d_xx = (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / h**2
    W = nonlinear_weight(x[None, :], t[:, None], params)
    res = d_tt - d_xx - np.abs(U[1:-1, 1:-1]) ** params.p * W
    return float(np.max(np.abs(res)))


def dump_field_csv(field: CharField, path: str) -> None:
    """CSV dump with header t,x,u_t in row-major time order."""
    if field.levels is None:
        raise ValueError("field values were not stored for this run")
    grid = field.grid
    x = grid.x_nodes()
    with open(path, "w") as fh:
        fh.write("t,x,u_t\n")
        for n in range(field.levels.shape[0]):
            t = n * grid.h
            for i in range(grid.n_x):
                fh.write(f"{t:.10g},{x[i]:.10g},{field.levels[n, i]:.17g}\n")
