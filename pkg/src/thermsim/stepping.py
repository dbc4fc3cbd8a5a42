"""Implicit time stepping for the regularized evolution problem.

One backward-Euler step solves, at every interior vertex,

    alpha(v+) - alpha(v) = dt * (Lap_m_r v+ + c * f(v+) + forcing)

with the nonlocal coefficient c frozen during each Newton solve and
recomputed between outer Picard sweeps; at the Picard fixed point c is
self-consistent with v+. The Newton matrix uses the exact derivative of the
face flux with respect to its own normal gradient (same stencil as the
operator) while tangential coupling and c stay lagged, so the iteration is
still quasi-Newton; convergence is enforced by the residual test, with dt
halving as the fallback.

brute_force_step solves the same coupled system without any lagging by
dense damped Newton with a numerically differenced Jacobian; it is the
verification oracle for tiny grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import solve_banded

from .errors import OracleFailure, StepFailure
from .grid import Field, Grid, integrate, m_laplacian_apply, \
    newton_face_coefficients, norms, operator_matrix_from_coefficients
from .model import ProblemSpec, legendre_psi_star_of_alpha, nonlocal_coefficient


@dataclass(frozen=True)
class StepperConfig:
    dt: float = 0.01
    newton_tol: float = 1e-10
    newton_max_iters: int = 50
    picard_tol: float = 1e-10
    picard_max_iters: int = 20
    dt_halving_max: int = 6

    def __post_init__(self):
        if min(self.dt, self.newton_tol, self.picard_tol) <= 0:
            raise ValueError("dt and tolerances must be positive")
        if max(self.newton_tol, self.picard_tol) >= 1:
            raise ValueError("tolerances must be < 1")
        if min(self.newton_max_iters, self.picard_max_iters) < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.dt_halving_max < 0:
            raise ValueError("dt_halving_max must be >= 0")


@dataclass(frozen=True)
class StepReport:
    dt: float
    newton_iters: int
    picard_iters: int
    residual: float
    halvings: int


def _forcing_values(spec: ProblemSpec, grid: Grid, t_new: float):
    if spec.mms_forcing is None:
        return 0.0
    return np.asarray(spec.mms_forcing(grid.interior_mesh(), t_new), dtype=float)


def _residual(w: np.ndarray, alpha_old: np.ndarray, spec: ProblemSpec,
              grid: Grid, dt: float, c: float, forcing) -> np.ndarray:
    fld = Field(grid, w)
    lap = m_laplacian_apply(fld, spec.m, spec.reg_r).values
    return (spec.material.alpha(w) - alpha_old
            - dt * (lap + c * spec.source.f(w) + forcing))


def _newton_solve(w0: np.ndarray, alpha_old: np.ndarray, spec: ProblemSpec,
                  grid: Grid, cfg: StepperConfig, dt: float, c: float,
                  forcing):
    """Quasi-Newton on the frozen-coefficient system. Returns (w, iters, res, ok)."""
    w = w0.copy()
    res = _residual(w, alpha_old, spec, grid, dt, c, forcing)
    res_norm = float(np.max(np.abs(res)))
    for it in range(1, cfg.newton_max_iters + 1):
        if res_norm <= cfg.newton_tol:
            return w, it - 1, res_norm, True
        delta = _jacobian_solve(w, spec, grid, dt, c, -res)
        # backtracking keeps the quasi-Newton iteration from overshooting
        scale = 1.0
        for _ in range(25):
            w_try = w + scale * delta
            res_try = _residual(w_try, alpha_old, spec, grid, dt, c, forcing)
            norm_try = float(np.max(np.abs(res_try)))
            if norm_try < res_norm or scale < 1e-6:
                break
            scale *= 0.5
        if norm_try >= res_norm and res_norm > cfg.newton_tol:
            return w, it, res_norm, False
        w, res, res_norm = w_try, res_try, norm_try
    return w, cfg.newton_max_iters, res_norm, res_norm <= cfg.newton_tol


def _jacobian_solve(w: np.ndarray, spec: ProblemSpec, grid: Grid, dt: float,
                    c: float, rhs: np.ndarray) -> np.ndarray:
    ap = spec.material.alpha_prime(w)
    fp = spec.source.f_prime(w)
    coeffs = newton_face_coefficients(Field(grid, w), spec.m, spec.reg_r)
    if grid.dim == 1:
        (h,) = grid.spacing
        coeff = coeffs[0]
        diag = ap + dt * ((coeff[:-1] + coeff[1:]) / h**2 - c * fp)
        off = -dt * coeff[1:-1] / h**2
        n = w.size
        ab = np.zeros((3, n))
        ab[0, 1:] = off
        ab[1, :] = diag
        ab[2, :-1] = off
        return solve_banded((1, 1), ab, rhs)
    a_op = operator_matrix_from_coefficients(grid, coeffs)
    jac = sp.diags((ap - dt * c * fp).reshape(-1)) - dt * a_op
    return spla.spsolve(jac.tocsr(), rhs.reshape(-1)).reshape(w.shape)


def _attempt_step(state: Field, spec: ProblemSpec, cfg: StepperConfig,
                  dt: float, t_new: float):
    grid = state.grid
    alpha_old = spec.material.alpha(state.values)
    forcing = _forcing_values(spec, grid, t_new)
    w = state.values.copy()
    newton_total = 0
    for sweep in range(1, cfg.picard_max_iters + 1):
        c = nonlocal_coefficient(spec, Field(grid, w))
        w, iters, res, ok = _newton_solve(w, alpha_old, spec, grid, cfg, dt, c, forcing)
        newton_total += iters
        if not ok:
            return None, newton_total, sweep, res
        c_next = nonlocal_coefficient(spec, Field(grid, w))
        if abs(c_next - c) <= cfg.picard_tol * max(1.0, abs(c)):
            return Field(grid, w), newton_total, sweep, res
    return None, newton_total, cfg.picard_max_iters, res


def implicit_step(state: Field, spec: ProblemSpec, cfg: StepperConfig,
                  t: float = 0.0) -> tuple[Field, StepReport]:
    """Advance one backward-Euler step of nominal size cfg.dt from time t.

    The accepted dt may be smaller: failed Newton/Picard iterations halve dt
    up to cfg.dt_halving_max times before raising StepFailure.
    """
    dt = cfg.dt
    halvings = 0
    while True:
        result, n_newton, n_picard, res = _attempt_step(state, spec, cfg, dt, t + dt)
        if result is not None:
            return result, StepReport(dt=dt, newton_iters=n_newton,
                                      picard_iters=n_picard, residual=res,
                                      halvings=halvings)
        halvings += 1
        if halvings > cfg.dt_halving_max:
            raise StepFailure(
                f"no convergence after {halvings - 1} halvings "
                f"(residual {res:.3e} at dt {dt:.3e})",
                time=t, dt=dt, residual=res, halvings=halvings - 1)
        dt *= 0.5


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _oracle_residual(w: np.ndarray, alpha_old: np.ndarray, spec: ProblemSpec,
                     grid: Grid, dt: float, forcing) -> np.ndarray:
    fld = Field(grid, w.reshape(grid.interior_shape))
    c = nonlocal_coefficient(spec, fld)
    lap = m_laplacian_apply(fld, spec.m, spec.reg_r).values
    out = (spec.material.alpha(fld.values) - alpha_old
           - dt * (lap + c * spec.source.f(fld.values) + forcing))
    return out.reshape(-1)


def brute_force_step(state: Field, spec: ProblemSpec, dt: float,
                     t: float = 0.0, tol: float = 1e-13) -> Field:
    """Reference solve of the fully coupled step on grids of <= 8 unknowns.

    The nonlocal coefficient is not lagged: it is part of the residual, so
    the Newton system is dense and the Jacobian is finite-differenced.
    Falls back to coordinatewise bisection sweeps when Newton stalls.
    Raises OracleFailure if the residual cannot be pushed below 1e-12.
    """
    grid = state.grid
    n = grid.n_interior
    if n > 8:
        raise ValueError("oracle is restricted to at most 8 interior nodes")
    alpha_old = spec.material.alpha(state.values)
    forcing = _forcing_values(spec, grid, t + dt)

    def res_of(w):
        return _oracle_residual(w, alpha_old, spec, grid, dt, forcing)

    w = state.values.reshape(-1).copy()
    r = res_of(w)
    for _ in range(60):
        if np.max(np.abs(r)) <= tol:
            break
        jac = np.zeros((n, n))
        for j in range(n):
            dh = 1e-7 * (1.0 + abs(w[j]))
            wp, wm = w.copy(), w.copy()
            wp[j] += dh
            wm[j] -= dh
            jac[:, j] = (res_of(wp) - res_of(wm)) / (2.0 * dh)
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        base = np.max(np.abs(r))
        for _ in range(40):
            w_try = w + scale * delta
            r_try = res_of(w_try)
            if np.max(np.abs(r_try)) < base or scale < 1e-8:
                break
            scale *= 0.5
        if np.max(np.abs(r_try)) >= base:
            break
        w, r = w_try, r_try

    if np.max(np.abs(r)) > tol:
        w, r = _bisection_sweeps(res_of, w, tol)
    if np.max(np.abs(r)) > 1e-12:
        raise OracleFailure(
            f"oracle residual stuck at {np.max(np.abs(r)):.3e}")
    return Field(grid, w.reshape(grid.interior_shape))


def _bisection_sweeps(res_of, w, tol, max_sweeps=300):
    n = w.size
    r = res_of(w)
    for _ in range(max_sweeps):
        if np.max(np.abs(r)) <= tol:
            break
        for i in range(n):
            def component(x):
                wx = w.copy()
                wx[i] = x
                return res_of(wx)[i]

            span = 0.5 * (1.0 + abs(w[i]))
            lo, hi = w[i] - span, w[i] + span
            f_lo, f_hi = component(lo), component(hi)
            grow = 0
            while f_lo * f_hi > 0 and grow < 60:
                lo -= span
                hi += span
                span *= 2.0
                f_lo, f_hi = component(lo), component(hi)
                grow += 1
            if f_lo * f_hi > 0:
                continue
            for _ in range(90):
                mid = 0.5 * (lo + hi)
                f_mid = component(mid)
                if f_lo * f_mid <= 0:
                    hi = mid
                else:
                    lo, f_lo = mid, f_mid
            w[i] = 0.5 * (lo + hi)
        r = res_of(w)
    return w, r


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryRecord:
    """Functional time series of one run plus state snapshots at record times."""

    run_id: int
    m: float
    reg_r: float
    times: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    linf: list = field(default_factory=list)
    l1: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    lp_max: list = field(default_factory=list)
    w1m_seminorm: list = field(default_factory=list)
    energy_psi_star: list = field(default_factory=list)
    dalpha_dt_l2: list = field(default_factory=list)
    nonlocal_coeff: list = field(default_factory=list)
    newton_iters: list = field(default_factory=list)
    picard_iters: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def validate(self):
        t = np.asarray(self.times)
        if t.size and np.any(np.diff(t) <= 0):
            raise ValueError("record times must be strictly increasing")
        for name in ("linf", "l1", "l2", "lp_max", "w1m_seminorm",
                     "energy_psi_star", "dalpha_dt_l2", "nonlocal_coeff"):
            if not np.all(np.isfinite(np.asarray(getattr(self, name)))):
                raise ValueError(f"non-finite entries in {name}")

    def rows(self):
        for k in range(len(self.times)):
            yield {
                "run_id": self.run_id,
                "step": self.steps[k],
                "time": self.times[k],
                "linf": self.linf[k],
                "l1": self.l1[k],
                "l2": self.l2[k],
                "lp_max": self.lp_max[k],
                "w1m_seminorm": self.w1m_seminorm[k],
                "energy_psi_star": self.energy_psi_star[k],
                "dalpha_dt_l2": self.dalpha_dt_l2[k],
                "nonlocal_coeff": self.nonlocal_coeff[k],
                "newton_iters": self.newton_iters[k],
                "picard_iters": self.picard_iters[k],
                "r": self.reg_r,
                "m": self.m,
            }


def _record_point(rec: TrajectoryRecord, spec: ProblemSpec, state: Field,
                  t: float, step_count: int, last_report: Optional[StepReport],
                  dalpha_sq: float):
    nm = norms(state, spec.m)
    energy = integrate(legendre_psi_star_of_alpha(spec.material, state.values),
                       state.grid)
    rec.times.append(t)
    rec.steps.append(step_count)
    rec.linf.append(nm["linf"])
    rec.l1.append(nm["l1"])
    rec.l2.append(nm["l2"])
    rec.lp_max.append(nm["lp_max"])
    rec.w1m_seminorm.append(nm["w1m_seminorm"])
    rec.energy_psi_star.append(energy)
    rec.dalpha_dt_l2.append(dalpha_sq)
    rec.nonlocal_coeff.append(nonlocal_coefficient(spec, state))
    rec.newton_iters.append(0 if last_report is None else last_report.newton_iters)
    rec.picard_iters.append(0 if last_report is None else last_report.picard_iters)
    rec.snapshots.append(state.copy())


def integrate_trajectory(spec: ProblemSpec, grid: Grid, cfg: StepperConfig,
                         record_times=None, run_id: int = 0) -> TrajectoryRecord:
    """March from 0 to the horizon, recording functionals at the given times.

    record_times must lie in [0, horizon]; None records every nominal step.
    Steps are clipped so every record time is hit exactly. Deterministic:
    identical inputs give bit-identical records.
    """
    if spec.initial is None:
        raise ValueError("spec carries no initial data")
    horizon = spec.horizon
    if record_times is None:
        n_steps = int(np.ceil(horizon / cfg.dt - 1e-12)) if horizon > 0 else 0
        record_times = [min(k * cfg.dt, horizon) for k in range(n_steps + 1)]
    targets = sorted(set(float(t) for t in record_times))
    if targets and (targets[0] < 0 or targets[-1] > horizon + 1e-12):
        raise ValueError("record times must lie within [0, horizon]")

    state = spec.initial.build(grid)
    rec = TrajectoryRecord(run_id=run_id, m=spec.m, reg_r=spec.reg_r)
    t = 0.0
    step_count = 0
    last_report = None
    dalpha_sq = 0.0
    if targets and targets[0] <= 1e-14:
        _record_point(rec, spec, state, 0.0, 0, None, 0.0)
        targets = targets[1:]

    for target in targets:
        while t < target - 1e-12 * max(1.0, target):
            dt_want = min(cfg.dt, target - t)
            try:
                new_state, report = implicit_step(
                    state, spec, replace(cfg, dt=dt_want), t)
            except StepFailure as exc:
                exc.time = t
                raise
            d_alpha = (spec.material.alpha(new_state.values)
                       - spec.material.alpha(state.values)) / report.dt
            dalpha_sq = integrate(d_alpha**2, grid)
            state = new_state
            t += report.dt
            step_count += 1
            last_report = report
        t = target
        _record_point(rec, spec, state, t, step_count, last_report, dalpha_sq)

    rec.validate()
    return rec
