"""Batch scenarios: run simulations, evaluate verdicts, persist CSV artifacts.

Every scenario writes trajectory.csv, constants.csv, verdicts.csv, and a
manifest echoing the resolved configuration; some add scenario-specific
CSVs consumed by the plotting frontend. CSV bodies are deterministic for a
fixed config and seed; only the manifest carries a timestamp. Ensemble
members may run in parallel, but results are merged in run-id order so the
artifacts do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp, trapezoid

from .analysis import (SnapshotSet, compute_theory_constants, contraction_estimate,
                       fit_decay_envelope, ghidaglia_envelope, gronwall_check,
                       hausdorff_semidistance, omega_limit_estimate,
                       tartar_check_batch)
from .config import ExperimentConfig
from .errors import ConfigError
from .grid import Field, integrate, lp_norm, w1m_seminorm
from .initial import BumpInitial, ConstantInitial, FourierInitial
from .model import (ProblemSpec, check_material_hypotheses, check_source_hypotheses,
                    legendre_psi, legendre_psi_star_of_alpha, material_law,
                    regularize, source_law)
from .stepping import integrate_trajectory

TRAJECTORY_COLUMNS = ("run_id", "step", "time", "linf", "l1", "l2", "lp_max",
                      "w1m_seminorm", "energy_psi_star", "dalpha_dt_l2",
                      "nonlocal_coeff", "newton_iters", "picard_iters", "r", "m")
VERDICT_COLUMNS = ("check", "parameters", "lhs", "rhs", "margin", "pass")
CONSTANT_COLUMNS = ("name", "value", "formula")


@dataclass(frozen=True)
class Verdict:
    check: str
    parameters: str
    lhs: float
    rhs: float
    margin: float
    passed: bool


def verdict_le(check, parameters, lhs, rhs) -> Verdict:
    """Pass when lhs <= rhs; margin is the headroom."""
    return Verdict(check, parameters, float(lhs), float(rhs),
                   float(rhs - lhs), bool(lhs <= rhs))


def verdict_ge(check, parameters, lhs, rhs) -> Verdict:
    """Pass when lhs >= rhs."""
    return Verdict(check, parameters, float(lhs), float(rhs),
                   float(lhs - rhs), bool(lhs >= rhs))


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[col]) for col in header))
    path.write_text("\n".join(lines) + "\n")


def _trajectory_rows(records):
    rows = []
    for rec in sorted(records, key=lambda r: r.run_id):
        rows.extend(rec.rows())
    return rows


def _verdict_rows(verdicts):
    return [{
        "check": v.check, "parameters": v.parameters, "lhs": v.lhs,
        "rhs": v.rhs, "margin": v.margin, "pass": v.passed,
    } for v in verdicts]


def _constants_rows(consts):
    if consts is None:
        return []
    rows = []
    for name in ("poincare", "decay_rate", "source_bound", "transient_cutoff",
                 "fitted_rate"):
        rows.append({
            "name": name,
            "value": getattr(consts, name),
            "formula": consts.formulas.get(name, "reported"),
        })
    return rows


# ---------------------------------------------------------------------------
# Parallel trajectory execution
# ---------------------------------------------------------------------------

def _run_one(args):
    spec, grid, cfg, record_times, run_id = args
    return integrate_trajectory(spec, grid, cfg, record_times, run_id=run_id)


def run_trajectories(jobs_args, jobs: int = 1):
    """Run (spec, grid, cfg, record_times, run_id) tuples, merged by run id."""
    if jobs <= 1 or len(jobs_args) <= 1:
        results = [_run_one(a) for a in jobs_args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, jobs_args))
    return sorted(results, key=lambda r: r.run_id)


def _draw_ensemble(config: ExperimentConfig, section: str, count: int, rng):
    """Initial-data descriptors for ensemble members, drawn before dispatch."""
    family = config.text(section, "family", "bump")
    amp_lo = config.fnum(section, "amplitude_min",
                         config.fnum(section, "amplitude", 1.0))
    amp_hi = config.fnum(section, "amplitude_max", amp_lo)
    members = []
    for _ in range(count):
        amp = float(rng.uniform(amp_lo, amp_hi)) if amp_hi > amp_lo else amp_lo
        if family == "bump":
            members.append(BumpInitial(
                amplitude=amp,
                center=config.fnum(section, "center", 0.5),
                width=config.fnum(section, "width", 0.25)))
        elif family == "constant":
            members.append(ConstantInitial(value=amp))
        elif family == "fourier":
            members.append(FourierInitial(
                amplitude=amp,
                modes=config.inum(section, "modes", 4),
                seed=int(rng.integers(0, 2**31 - 1))))
        else:
            raise ConfigError(f"unsupported ensemble family {family!r}")
    return members


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

def scenario_simulate(config: ExperimentConfig, jobs: int):
    spec = config.problem()
    grid = config.grid()
    cfg = config.stepper()
    times = config.record_times(spec.horizon)
    count = config.inum("ensemble", "count", 1)
    rng = np.random.default_rng(config.seed)
    if count == 1:
        initials = [spec.initial]
    else:
        initials = _draw_ensemble(config, "ensemble", count, rng)
    args = []
    for run_id, init in enumerate(initials):
        args.append((replace(spec, initial=init), grid, cfg, times, run_id))
    records = run_trajectories(args, jobs)
    # the m != 2 constant estimator does descent; keep it to desk-size grids
    cheap = spec.m == 2 or grid.n_interior <= 4096
    consts = compute_theory_constants(spec, grid) if cheap else None
    return {"trajectories": records, "verdicts": [], "constants": consts, "extra": {}}


def _mms_forcing(mesh, t, kappa, source_value, measure):
    x = mesh[0]
    nonlocal_const = kappa * source_value / (source_value * measure) ** 2
    return (np.pi**2 - 1.0) * np.exp(-t) * np.sin(np.pi * x) - nonlocal_const


class _MmsForcing:
    """Picklable forcing for the manufactured solution e^{-t} sin(pi x)."""

    def __init__(self, kappa, source_value, measure):
        self.kappa = kappa
        self.source_value = source_value
        self.measure = measure

    def __call__(self, mesh, t):
        return _mms_forcing(mesh, t, self.kappa, self.source_value, self.measure)


def _mms_exact(grid, t):
    (x,) = grid.interior_mesh()
    return np.exp(-t) * np.sin(np.pi * x)


def scenario_mms(config: ExperimentConfig, jobs: int):
    del jobs  # levels must run in a fixed order anyway; cost is trivial
    kappa = config.fnum("problem", "kappa", 1.0)
    source_value = config.fnum("source", "value", 1.0)
    horizon = config.fnum("problem", "horizon", 0.25)
    levels = config.inum("mms", "levels", 4)
    fine_cells = config.inum("mms", "fine_cells", 256)
    base_dt = config.fnum("mms", "base_dt", 0.025)
    base_cells = config.inum("mms", "base_cells", 8)
    order_t_min = config.fnum("mms", "temporal_order_min", 0.9)
    order_x_min = config.fnum("mms", "spatial_order_min", 1.9)

    material = material_law("identity")
    source = source_law("constant-floor", material, value=source_value)
    forcing = _MmsForcing(kappa, source_value, 1.0)

    def run_case(cells, dt, run_id):
        from .grid import Grid
        from .stepping import StepperConfig
        grid = Grid((1.0,), (cells,))
        spec = ProblemSpec(m=2.0, kappa=kappa, domain=(1.0,), horizon=horizon,
                           material=material, source=source, reg_r=0.0,
                           initial=_MmsInitial(), mms_forcing=forcing)
        cfg = StepperConfig(dt=dt)
        rec = integrate_trajectory(spec, grid, cfg, [0.0, horizon], run_id=run_id)
        err = rec.snapshots[-1].values - _mms_exact(grid, horizon)
        l2_err = float(np.sqrt(integrate(err * err, grid)))
        return rec, l2_err

    extra_rows = []
    records = []
    run_id = 0
    temporal_errors, temporal_dts = [], []
    for k in range(levels):
        dt = base_dt / 2**k
        rec, err = run_case(fine_cells, dt, run_id)
        records.append(rec)
        temporal_errors.append(err)
        temporal_dts.append(dt)
        run_id += 1
    order_t = _loglog_slope(temporal_dts, temporal_errors)
    for k in range(levels):
        extra_rows.append({"axis": "dt", "level": k, "cells": fine_cells,
                           "dt": temporal_dts[k], "h": 1.0 / fine_cells,
                           "l2_error": temporal_errors[k], "fitted_order": order_t})

    spatial_errors, spatial_hs = [], []
    for k in range(levels):
        cells = base_cells * 2**k
        h = 1.0 / cells
        dt = h * h
        rec, err = run_case(cells, dt, run_id)
        records.append(rec)
        spatial_errors.append(err)
        spatial_hs.append(h)
        run_id += 1
    order_x = _loglog_slope(spatial_hs, spatial_errors)
    for k in range(levels):
        extra_rows.append({"axis": "h", "level": k, "cells": base_cells * 2**k,
                           "dt": spatial_hs[k] ** 2, "h": spatial_hs[k],
                           "l2_error": spatial_errors[k], "fitted_order": order_x})

    verdicts = [
        verdict_ge("mms_temporal_order", f"levels={levels};cells={fine_cells}",
                   order_t, order_t_min),
        verdict_ge("mms_spatial_order", f"levels={levels};base_cells={base_cells}",
                   order_x, order_x_min),
    ]
    extra = {"mms_convergence.csv": (
        ("axis", "level", "cells", "dt", "h", "l2_error", "fitted_order"),
        extra_rows)}
    return {"trajectories": records, "verdicts": verdicts, "constants": None,
            "extra": extra}


class _MmsInitial:
    """sin(pi x), the manufactured profile at t = 0."""

    family = "mms"

    def build(self, grid):
        (x,) = grid.interior_mesh()
        return Field(grid, np.sin(np.pi * x))


def _loglog_slope(x, y):
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.maximum(np.asarray(y, dtype=float), 1e-300))
    design = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    return float(coef[0])


def scenario_reg_sweep(config: ExperimentConfig, jobs: int):
    spec = config.problem()
    grid = config.grid()
    cfg = config.stepper()
    r_values = config.flist("sweep", "r_values", [1e-1, 1e-2, 1e-3, 1e-4])
    spread_tol = config.fnum("sweep", "spread_tol", 0.05)
    headroom = config.fnum("sweep", "headroom", 1.10)
    energy_ratio_tol = config.fnum("sweep", "energy_ratio_tol", 1.5)
    times = config.record_times(spec.horizon)
    if times is None:
        times = list(np.linspace(0.0, spec.horizon, 65))

    args = [(regularize(spec, r), grid, cfg, times, k)
            for k, r in enumerate(r_values)]
    records = run_trajectories(args, jobs)

    sups = [max(rec.linf) for rec in records]
    spread = (max(sups) - min(sups)) / max(min(sups), 1e-300)
    energies = [float(trapezoid(rec.w1m_seminorm, rec.times)) for rec in records]

    cauchy = []
    for ra, rb in zip(records[:-1], records[1:]):
        total = 0.0
        dists = []
        for sa, sb in zip(ra.snapshots, rb.snapshots):
            diff = Field(grid, sa.values - sb.values)
            dists.append(lp_norm(diff, spec.m) ** spec.m
                         + w1m_seminorm(diff, spec.m))
        total = float(trapezoid(dists, ra.times)) ** (1.0 / spec.m)
        cauchy.append(total)
    ratios = [b / max(a, 1e-300) for a, b in zip(cauchy[:-1], cauchy[1:])]

    params = "r=" + ";".join(f"{r:g}" for r in r_values)
    verdicts = [
        verdict_le("supnorm_spread", params, spread, spread_tol),
        verdict_le("supnorm_uniform_bound", params, max(sups), headroom * sups[0]),
        verdict_le("energy_uniform", params, max(energies),
                   energy_ratio_tol * min(energies)),
        verdict_le("cauchy_monotone", params, max(ratios) if ratios else 0.0, 1.0),
    ]
    consts = compute_theory_constants(spec, grid) if spec.m > 2 else None
    return {"trajectories": records, "verdicts": verdicts, "constants": consts,
            "extra": {}}


def scenario_uniqueness(config: ExperimentConfig, jobs: int):
    spec = config.problem()
    grid = config.grid()
    cfg = config.stepper()
    times = config.record_times(spec.horizon)
    if times is None:
        times = list(np.linspace(0.0, spec.horizon, 33))
    offset = config.fnum("uniqueness", "offset", 0.3)
    perturbation = config.fnum("uniqueness", "perturbation", 0.1)
    slack = 10.0 * cfg.newton_tol

    base_init = spec.initial
    raised = _ShiftedInitial(base_init, offset)
    perturbed = _ShiftedInitial(base_init, perturbation)

    args = [
        (spec, grid, cfg, times, 0),
        (replace(spec, initial=raised), grid, cfg, times, 1),
        (replace(spec, initial=perturbed), grid, cfg, times, 2),
        (spec, grid, cfg, times, 3),
    ]
    rec_v, rec_u, rec_p, rec_v2 = run_trajectories(args, jobs)

    order_worst = max(
        float(np.max(sv.values - su.values))
        for sv, su in zip(rec_v.snapshots, rec_u.snapshots))
    contraction = contraction_estimate(rec_p, rec_v, spec.material)
    identical = contraction_estimate(rec_v2, rec_v, spec.material,
                                     degenerate_tol=slack)

    verdicts = [
        verdict_le("order_preservation", f"offset={offset:g}", order_worst, slack),
        verdict_le("contraction_bound", f"k_hat={contraction.fitted_k:.6g}",
                   contraction.sup_violation,
                   1e-12 * (1.0 + contraction.d0)),
        verdict_le("identical_data_distance", "degenerate_branch",
                   identical.max_distance, slack),
    ]
    rows = [{"time": t, "distance": d,
             "bound": contraction.d0 * math.exp(contraction.fitted_k * t),
             "k_hat": contraction.fitted_k}
            for t, d in zip(contraction.times, contraction.distances)]
    extra = {"contraction.csv": (("time", "distance", "bound", "k_hat"), rows)}
    return {"trajectories": [rec_v, rec_u, rec_p, rec_v2], "verdicts": verdicts,
            "constants": None, "extra": extra}


class _ShiftedInitial:
    """Base data plus a nonnegative bump scaled by the shift."""

    def __init__(self, base, shift):
        self.base = base
        self.shift = shift

    family = "shifted"

    def build(self, grid):
        base = self.base.build(grid)
        bump = BumpInitial(amplitude=self.shift, center=0.5, width=0.45).build(grid)
        return Field(grid, base.values + bump.values)


def scenario_absorbing(config: ExperimentConfig, jobs: int):
    spec = config.problem()
    grid = config.grid()
    cfg = config.stepper()
    if spec.m <= 2:
        raise ConfigError("absorbing scenario requires m > 2")
    amplitudes = config.flist("absorbing", "amplitudes", [1.0, 10.0, 100.0])
    transient = config.fnum("absorbing", "transient", 1.0)
    ball_factor = config.fnum("absorbing", "ball_factor", 2.0)
    times = config.record_times(spec.horizon)
    if times is None:
        early = np.geomspace(cfg.dt / 100.0, spec.horizon, 41)
        late = np.linspace(0.0, spec.horizon, 41)
        times = sorted(set(np.round(np.concatenate([early, late]), 12)))

    width = config.fnum("initial", "width", 0.25)
    center = config.fnum("initial", "center", 0.5)
    args = [
        (replace(spec, initial=BumpInitial(amplitude=a, center=center, width=width)),
         grid, cfg, times, k)
        for k, a in enumerate(amplitudes)
    ]
    records = run_trajectories(args, jobs)

    final_radius = max(rec.linf[-1] for rec in records)
    ball = ball_factor * final_radius
    entries = []
    for rec in records:
        linf = np.asarray(rec.linf)
        t_arr = np.asarray(rec.times)
        inside = linf <= ball
        entry = math.inf
        for k in range(len(t_arr)):
            if inside[k:].all():
                entry = float(t_arr[k])
                break
        entries.append(entry)

    shared = records[0].times
    running_sup = np.max([np.asarray(rec.linf) for rec in records], axis=0)
    a_fit, b_fit, margin, n_pts = fit_decay_envelope(shared, running_sup,
                                                     spec.m, transient)

    params = "amps=" + ";".join(f"{a:g}" for a in amplitudes)
    verdicts = [
        verdict_le("common_ball_entry", params + f";ball={ball:.6g}",
                   max(entries), spec.horizon),
        verdict_ge("envelope_margin", f"A={a_fit:.6g};B={b_fit:.6g};n={n_pts}",
                   margin, 0.0),
        verdict_ge("envelope_tail_weight", "fit", b_fit, 0.0),
    ]
    consts = compute_theory_constants(spec, grid, transient_cutoff=transient)
    rows = [{"m": spec.m, "transient": transient, "coeff_const": a_fit,
             "coeff_tail": b_fit, "margin": margin, "n_points": n_pts}]
    extra = {"envelope_fit.csv": (
        ("m", "transient", "coeff_const", "coeff_tail", "margin", "n_points"),
        rows)}
    return {"trajectories": records, "verdicts": verdicts, "constants": consts,
            "extra": extra}


def scenario_attractor(config: ExperimentConfig, jobs: int):
    spec = config.problem()
    grid = config.grid()
    cfg = config.stepper()
    count = config.inum("attractor", "count", 8)
    cutoff = config.fnum("attractor", "cutoff", 0.75 * spec.horizon)
    threshold = config.fnum("attractor", "threshold", 1e-2)
    ratio_min = config.fnum("attractor", "ratio_min", 10.0)
    merge_tol = config.fnum("attractor", "merge_tol", 1e-12)
    times = config.record_times(spec.horizon)
    if times is None:
        times = list(np.linspace(0.0, spec.horizon, 33))

    rng = np.random.default_rng(config.seed)
    fam_a = _draw_ensemble(config, "ensemble_a", count, rng)
    fam_b = _draw_ensemble(config, "ensemble_b", count, rng)

    args = [(replace(spec, initial=init), grid, cfg, times, k)
            for k, init in enumerate(fam_a + fam_b)]
    records = run_trajectories(args, jobs)
    recs_a, recs_b = records[:count], records[count:]

    set_a = omega_limit_estimate(recs_a, cutoff, merge_tol)
    set_b = omega_limit_estimate(recs_b, cutoff, merge_tol)
    init_a = SnapshotSet([r.snapshots[0] for r in recs_a],
                         [r.run_id for r in recs_a], [0.0] * count)
    init_b = SnapshotSet([r.snapshots[0] for r in recs_b],
                         [r.run_id for r in recs_b], [0.0] * count)

    d_ab = hausdorff_semidistance(set_a, set_b)
    d_ba = hausdorff_semidistance(set_b, set_a)
    d0 = max(hausdorff_semidistance(init_a, init_b),
             hausdorff_semidistance(init_b, init_a))
    ratio = d0 / max(d_ab, d_ba, 1e-300)

    params = f"count={count};cutoff={cutoff:g}"
    verdicts = [
        verdict_le("omega_semidistance_ab", params, d_ab, threshold),
        verdict_le("omega_semidistance_ba", params, d_ba, threshold),
        verdict_ge("omega_separation_ratio", params + f";d0={d0:.6g}",
                   ratio, ratio_min),
    ]
    rows = [
        {"pair": "late", "direction": "a_to_b", "cutoff": cutoff,
         "semidistance": d_ab, "initial_semidistance": d0, "ratio": ratio},
        {"pair": "late", "direction": "b_to_a", "cutoff": cutoff,
         "semidistance": d_ba, "initial_semidistance": d0, "ratio": ratio},
    ]
    extra = {"omega_distance.csv": (
        ("pair", "direction", "cutoff", "semidistance", "initial_semidistance",
         "ratio"), rows)}
    return {"trajectories": records, "verdicts": verdicts, "constants": None,
            "extra": extra}


# ---------------------------------------------------------------------------
# Verify scenario: law hypotheses and standalone inequality suites
# ---------------------------------------------------------------------------

def legendre_conjugate_numeric(law, y, lo=-12.0, hi=12.0, iters=160):
    """Conjugate of the alpha antiderivative by direct maximization.

    Ternary search on r -> r y - psi(r), vectorized over y. The objective
    is strictly concave because psi is strictly convex, so the maximizer is
    unique and the bracket shrinks geometrically.
    """
    y = np.asarray(y, dtype=float)
    lo = np.full_like(y, lo)
    hi = np.full_like(y, hi)

    def objective(r):
        return r * y - legendre_psi(law, r)

    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        keep_left = objective(m1) > objective(m2)
        hi = np.where(keep_left, m2, hi)
        lo = np.where(keep_left, lo, m1)
    return objective(0.5 * (lo + hi))


def _verify_laws():
    verdicts = []
    laws = [material_law("identity"),
            material_law("smoothed-piecewise", slope_neg=0.5, slope_pos=2.0, width=1.0),
            material_law("cubic-affine", linear=1.0, cubic=1.0, box=10.0)]
    rng = np.random.default_rng(2024)
    for law in laws:
        t = rng.uniform(-10.0, 10.0, 10000)
        conj = legendre_conjugate_numeric(law, law.alpha(t))
        defect = np.abs(legendre_psi_star_of_alpha(law, t) - conj)
        scaled = defect / (1.0 + np.abs(t) ** 4)
        verdicts.append(verdict_le(f"legendre_identity_{law.family}",
                                   "samples=10000;oracle=ternary-search",
                                   float(np.max(scaled)), 1e-10))
        margins = check_material_hypotheses(law)
        worst = min(margins["min_increment"], margins["slope_low_margin"],
                    margins["slope_high_margin"], -margins["alpha_at_zero"])
        verdicts.append(verdict_ge(f"material_hypotheses_{law.family}",
                                   "samples=4001", worst, -1e-12))
        source = source_law("gaussian-bump-over-floor", law,
                            floor=1.0, amplitude=2.0, center=0.0, width=1.5)
        s_marg = check_source_hypotheses(source, law)
        verdicts.append(verdict_ge(f"source_hypotheses_{law.family}",
                                   "gaussian-bump",
                                   min(s_marg.values()), -1e-12))
    return verdicts


def tartar_suite(n_samples: int, seed: int = 7,
                 m_values=(2.0, 2.5, 3.0, 4.0, 6.0)) -> float:
    """Worst relative violation over random vector pairs in dims 1..3."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    per_cell = max(1, n_samples // (3 * len(m_values)))
    for dim in (1, 2, 3):
        for m in m_values:
            a = rng.uniform(-5.0, 5.0, (per_cell, dim))
            b = rng.uniform(-5.0, 5.0, (per_cell, dim))
            lhs, rhs, _ = tartar_check_batch(a, b, float(m))
            worst = max(worst, float(np.max((rhs - lhs) / (1.0 + np.abs(rhs)))))
    return worst


def ghidaglia_domination_suite(n_draws: int, seed: int = 5) -> float:
    """Max (integrated z - envelope) over random decay problems; <= 0 is good."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    s_grid = np.geomspace(1e-3, 10.0, 40)
    for _ in range(n_draws):
        delta = float(rng.uniform(0.1, 10.0))
        eta = float(rng.uniform(0.0, 10.0))
        q = float(rng.uniform(1.1, 5.0))
        z0 = float(rng.uniform(0.0, 50.0))
        sol = solve_ivp(lambda t, z: eta - delta * np.maximum(z, 0.0) ** q,
                        (0.0, 10.0), [z0], t_eval=s_grid,
                        method="LSODA", rtol=1e-10, atol=1e-12)
        env = np.array([ghidaglia_envelope(delta, eta, q, s) for s in sol.t])
        worst = max(worst, float(np.max(sol.y[0] - env)))
    return worst


def _verify_gronwall():
    ts = np.linspace(0.0, 2.0, 201)
    cases = [
        ("exponential", ts, np.exp(ts), np.ones_like(ts), np.zeros_like(ts)),
        ("constant", ts, np.full_like(ts, 3.0), np.zeros_like(ts), np.zeros_like(ts)),
    ]
    sol = solve_ivp(lambda t, z: 0.5 * z + np.sin(t) ** 2, (0.0, 2.0), [1.0],
                    t_eval=ts, rtol=1e-10, atol=1e-12)
    cases.append(("forced", ts, sol.y[0], np.full_like(ts, 0.5), np.sin(ts) ** 2))
    verdicts = []
    for name, t, z, h, g in cases:
        res = gronwall_check(t, z, h, g)
        verdicts.append(verdict_le(f"gronwall_{name}", "trapezoid",
                                   res.max_bound_violation, 0.0))
    return verdicts


def scenario_verify(config: ExperimentConfig, jobs: int):
    del jobs
    n_tartar = config.inum("verify", "tartar_samples", 100000)
    n_ghid = config.inum("verify", "ghidaglia_draws", 1000)
    verdicts = _verify_laws()
    worst = tartar_suite(n_tartar, seed=config.seed or 7)
    verdicts.append(verdict_le("tartar_suite", f"samples={n_tartar};dims=1-3",
                               worst, 1e-12))
    worst_sub = tartar_suite(20000, seed=config.seed or 7, m_values=(1.3, 1.7))
    verdicts.append(verdict_le("tartar_subquadratic", "samples=20000",
                               worst_sub, 1e-12))
    worst_g = ghidaglia_domination_suite(n_ghid, seed=config.seed or 5)
    verdicts.append(verdict_le("ghidaglia_domination", f"draws={n_ghid}",
                               worst_g, 1e-8))
    verdicts.extend(_verify_gronwall())
    return {"trajectories": [], "verdicts": verdicts, "constants": None,
            "extra": {}}


SCENARIOS = {
    "simulate": scenario_simulate,
    "mms": scenario_mms,
    "reg-sweep": scenario_reg_sweep,
    "uniqueness": scenario_uniqueness,
    "absorbing": scenario_absorbing,
    "attractor": scenario_attractor,
    "verify": scenario_verify,
}


def run_scenario(config: ExperimentConfig, out_dir, jobs: int = 1) -> int:
    """Run one scenario and persist its artifacts. Returns the exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = SCENARIOS[config.scenario](config, jobs)

    write_csv(out / "trajectory.csv", TRAJECTORY_COLUMNS,
              _trajectory_rows(result["trajectories"]))
    write_csv(out / "constants.csv", CONSTANT_COLUMNS,
              _constants_rows(result["constants"]))
    write_csv(out / "verdicts.csv", VERDICT_COLUMNS,
              _verdict_rows(result["verdicts"]))
    for name, (header, rows) in result["extra"].items():
        write_csv(out / name, header, rows)

    stamp = datetime.now(timezone.utc).isoformat()
    manifest = [f"generated_at = {stamp}", f"out_dir = {out}"]
    manifest.extend(config.manifest_lines())
    (out / "manifest.txt").write_text("\n".join(manifest) + "\n")

    return 0 if all(v.passed for v in result["verdicts"]) else 1
