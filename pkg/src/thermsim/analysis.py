"""Checkable inequalities and set-valued estimators for trajectories.

Everything here is a standalone verifier: it takes numbers, fields, or
trajectory records and measures how well a bound holds, without touching the
solver. Fitted quantities (contraction rate, decay envelope) are consistency
checks against data, not proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import EmptySet, HypothesisViolated, InvalidExponent
from .grid import Field, Grid, integrate, poincare_constant
from .model import MaterialLaw, ProblemSpec


# ---------------------------------------------------------------------------
# Pointwise inequalities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TartarResult:
    lhs: float
    rhs: float
    holds: bool


def tartar_check(a, b, m: float, slack: float = 1e-12) -> TartarResult:
    """Monotonicity inequality of the m-power vector map.

    lhs = (|a|^{m-2} a - |b|^{m-2} b) . (a - b); the lower bound is
    2^{2-m} |a-b|^m for m >= 2 and (m-1) |a-b|^2 / (|a|+|b|)^{2-m} for
    1 < m < 2 (0 when a = b = 0). Verified with relative slack.
    """
    if m <= 1:
        raise InvalidExponent("tartar bound needs m > 1")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    diff = a - b
    nd = np.linalg.norm(diff)
    lhs = _tartar_lhs_safe(a, b, m)
    if m >= 2:
        rhs = 2.0 ** (2.0 - m) * nd**m
    else:
        rhs = 0.0 if na + nb == 0 else (m - 1.0) * nd**2 / (na + nb) ** (2.0 - m)
    return TartarResult(lhs, rhs, lhs >= rhs - slack * (1.0 + abs(rhs)))


def _tartar_lhs_safe(a, b, m):
    # |x|^{m-2} x with the convention 0 at x = 0 (continuous limit for m > 1)
    def phi(x):
        n = np.linalg.norm(x)
        return np.zeros_like(x) if n == 0 else n ** (m - 2.0) * x
    return float((phi(a) - phi(b)) @ (a - b))


def tartar_check_batch(a: np.ndarray, b: np.ndarray, m: float,
                       slack: float = 1e-12):
    """Vectorized twin of tartar_check over rows of (n, dim) arrays.

    Returns (lhs, rhs, holds) arrays; agrees with tartar_check pairwise.
    """
    if m <= 1:
        raise InvalidExponent("tartar bound needs m > 1")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    nd = np.linalg.norm(a - b, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        pa = np.where(na > 0, na ** (m - 2.0), 0.0)[:, None] * a
        pb = np.where(nb > 0, nb ** (m - 2.0), 0.0)[:, None] * b
    lhs = np.sum((pa - pb) * (a - b), axis=1)
    if m >= 2:
        rhs = 2.0 ** (2.0 - m) * nd**m
    else:
        denom = na + nb
        with np.errstate(divide="ignore", invalid="ignore"):
            rhs = np.where(denom > 0,
                           (m - 1.0) * nd**2 / denom ** (2.0 - m), 0.0)
    return lhs, rhs, lhs >= rhs - slack * (1.0 + np.abs(rhs))


def ghidaglia_envelope(delta: float, eta: float, q: float, s: float) -> float:
    """Uniform-in-initial-data bound for z' + delta z^q <= eta at time s > 0."""
    if q <= 1 or delta <= 0 or eta < 0 or s <= 0:
        raise ValueError("need q > 1, delta > 0, eta >= 0, s > 0")
    return (eta / delta) ** (1.0 / q) + (delta * (q - 1.0) * s) ** (-1.0 / (q - 1.0))


@dataclass(frozen=True)
class GronwallResult:
    holds: bool
    max_bound_violation: float


def gronwall_check(times, z, h, g, *, hyp_tol: float = 1e-8,
                   bound_tol: float = 1e-8) -> GronwallResult:
    """Differential-inequality check z' <= h z + g implies the integral bound.

    The discrete derivative of z over each interval is compared with the
    trapezoid average of h z + g at its endpoints; the allowed slack scales
    with hyp_tol plus the squared sample spacing (the trapezoid consistency
    order), and a violation beyond it raises HypothesisViolated. The
    conclusion z(s) <= exp(int h) (z(0) + int g) is then verified at every
    sample with trapezoid quadrature.
    """
    times = np.asarray(times, dtype=float)
    z = np.asarray(z, dtype=float)
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float)
    if not (times.shape == z.shape == h.shape == g.shape):
        raise ValueError("series must share one time grid")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if min(z.min(), h.min(), g.min()) < 0:
        raise ValueError("series must be nonnegative")

    rate = h * z + g
    dt = np.diff(times)
    slopes = np.diff(z) / dt
    allowed = 0.5 * (rate[:-1] + rate[1:])
    worst = float(np.max(slopes - allowed, initial=-np.inf))
    scale = 1.0 + float(np.max(np.abs(rate)))
    slack = (hyp_tol + float(np.max(dt)) ** 2) * scale
    if worst > slack:
        raise HypothesisViolated(
            f"z' exceeds h z + g by {worst:.3e} (allowed {slack:.3e})")

    int_h = cumulative_trapezoid(h, times, initial=0.0)
    int_g = cumulative_trapezoid(g, times, initial=0.0)
    bound = np.exp(int_h) * (z[0] + int_g)
    violation = float(np.max(z - bound * (1.0 + bound_tol)))
    return GronwallResult(holds=violation <= 0.0, max_bound_violation=violation)


# ---------------------------------------------------------------------------
# Theory constants and the absorbing radius
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TheoryConstants:
    """Constants entering the decay inequality for the state amplitude.

    poincare: largest c with c int |v|^m <= int |grad v|^m on the grid.
    decay_rate: min(slope_min * poincare / slope_max, slope_min).
    source_bound: uniform bound on the nonlocal source contribution.
    transient_cutoff: time after which envelope fits are trusted.
    fitted_rate: empirical contraction exponent, nan until a fit ran.
    """

    poincare: float
    decay_rate: float
    source_bound: float
    transient_cutoff: float = 1.0
    fitted_rate: float = math.nan
    formulas: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.poincare <= 0 or self.decay_rate <= 0:
            raise ValueError("poincare and decay_rate must be positive")
        if self.source_bound < 0:
            raise ValueError("source_bound must be nonnegative")


def compute_theory_constants(spec: ProblemSpec, grid: Grid, *,
                             transient_cutoff: float = 1.0) -> TheoryConstants:
    """Assemble the decay-inequality constants for one problem and grid."""
    c_p = poincare_constant(grid, spec.m)
    law = spec.material
    decay = min(law.slope_min * c_p / law.slope_max, law.slope_min)
    omega = spec.measure
    src = spec.kappa * spec.source.f_max * max(1.0, omega) / (spec.source.sigma * omega) ** 2
    formulas = {
        "poincare": f"poincare_constant(grid, m={spec.m})",
        "decay_rate": "min(slope_min * poincare / slope_max, slope_min)",
        "source_bound": "kappa * f_max * max(1, |domain|) / (sigma * |domain|)^2",
    }
    return TheoryConstants(poincare=c_p, decay_rate=decay, source_bound=src,
                           transient_cutoff=transient_cutoff, formulas=formulas)


def radius_envelope(consts: TheoryConstants, m: float, s: float) -> float:
    """Amplitude envelope (source_bound/decay_rate)^{1/(m-1)} + algebraic tail.

    Valid for m > 2; the tail decays like s^{-1/(m-2)}.
    """
    if m <= 2:
        raise InvalidExponent("radius envelope requires m > 2")
    if s <= 0:
        raise ValueError("need s > 0")
    head = (consts.source_bound / consts.decay_rate) ** (1.0 / (m - 1.0))
    tail = (consts.decay_rate * (m - 2.0) * s) ** (-1.0 / (m - 2.0))
    return head + tail


def absorbing_radius(law: MaterialLaw, amplitude_bound: float) -> float:
    """Radius of the state ball given a bound on |alpha(v)|."""
    lo = law.alpha_inverse(-amplitude_bound)
    hi = law.alpha_inverse(amplitude_bound)
    return max(abs(float(lo)), abs(float(hi)))


def fit_decay_envelope(times, values, m: float, transient: float):
    """Constrained fit of an A + B s^{-1/(m-2)} curve dominating the data.

    Least squares on samples past the transient, B clipped nonnegative, then
    A shifted up so the curve dominates every sample. Returns
    (A, B, margin, n_points) with margin = min(curve - data) >= 0.
    """
    if m <= 2:
        raise InvalidExponent("envelope shape requires m > 2")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = times >= max(transient, 1e-12)
    if mask.sum() < 2:
        raise ValueError("not enough samples past the transient")
    s = times[mask]
    y = values[mask]
    basis = s ** (-1.0 / (m - 2.0))
    design = np.column_stack([np.ones_like(s), basis])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    a0, b0 = float(coef[0]), float(coef[1])
    if b0 < 0:
        b0 = 0.0
        a0 = float(np.mean(y))
    deficit = float(np.max(y - (a0 + b0 * basis)))
    if deficit > -np.inf:
        # rounding guard keeps the recomputed margin nonnegative
        a0 += max(0.0, deficit) + 1e-12 * (1.0 + abs(deficit))
    margin = float(np.min(a0 + b0 * basis - y))
    return a0, b0, margin, int(mask.sum())


# ---------------------------------------------------------------------------
# Two-trajectory contraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionResult:
    times: np.ndarray
    distances: np.ndarray
    d0: float
    degenerate: bool
    k_least_squares: float
    fitted_k: float
    sup_violation: float
    max_distance: float


def contraction_estimate(rec_v, rec_u, law: MaterialLaw, *,
                         degenerate_tol: float = 0.0) -> ContractionResult:
    """L1 distance of alpha(states) over time with a fitted exponential bound.

    fitted_k is the least-squares slope of log d(s) - log d(0), raised if
    necessary to the smallest exponent whose bound d(s) <= e^{k s} d(0)
    holds at every record time (so sup_violation <= 0 whenever d(0) > 0).
    With d(0) <= degenerate_tol the fit is skipped and only max_distance is
    meaningful.
    """
    tv = np.asarray(rec_v.times, dtype=float)
    tu = np.asarray(rec_u.times, dtype=float)
    if tv.shape != tu.shape or np.max(np.abs(tv - tu), initial=0.0) > 1e-12:
        raise ValueError("records must share their record times")
    if len(rec_v.snapshots) != len(tv):
        raise ValueError("records must carry snapshots at every record time")
    grid = rec_v.snapshots[0].grid
    if rec_u.snapshots and rec_u.snapshots[0].grid != grid:
        raise ValueError("records must share one grid")
    dist = np.array([
        integrate(np.abs(law.alpha(sv.values) - law.alpha(su.values)), grid)
        for sv, su in zip(rec_v.snapshots, rec_u.snapshots)
    ])
    d0 = float(dist[0])
    if d0 <= degenerate_tol:
        return ContractionResult(times=tv, distances=dist, d0=d0, degenerate=True,
                                 k_least_squares=math.nan, fitted_k=math.nan,
                                 sup_violation=math.nan,
                                 max_distance=float(np.max(dist)))
    later = tv > 0
    s = tv[later]
    with np.errstate(divide="ignore"):
        logratio = np.log(np.maximum(dist[later], 1e-300) / d0)
    k_ls = float(np.sum(s * logratio) / np.sum(s * s))
    k_env = float(np.max(logratio / s))
    k_hat = max(k_ls, k_env)
    sup_violation = float(np.max(dist - d0 * np.exp(k_hat * tv)))
    return ContractionResult(times=tv, distances=dist, d0=d0, degenerate=False,
                             k_least_squares=k_ls, fitted_k=k_hat,
                             sup_violation=sup_violation,
                             max_distance=float(np.max(dist)))


# ---------------------------------------------------------------------------
# Snapshot sets, semidistance, limit-set estimate
# ---------------------------------------------------------------------------

@dataclass
class SnapshotSet:
    """Late-time states with their source run ids and times, on one grid."""

    members: list
    run_ids: list
    times: list

    def __post_init__(self):
        if not self.members:
            raise EmptySet("snapshot set must not be empty")
        grid = self.members[0].grid
        if any(m.grid != grid for m in self.members):
            raise ValueError("snapshots must share one grid")

    @property
    def grid(self) -> Grid:
        return self.members[0].grid

    def __len__(self):
        return len(self.members)


def _field_distance(a: Field, b: Field, norm: str) -> float:
    diff = a.values - b.values
    if norm == "linf":
        return float(np.max(np.abs(diff))) if diff.size else 0.0
    if norm == "l2":
        return float(np.sqrt(integrate(diff * diff, a.grid)))
    if norm == "l1":
        return float(integrate(np.abs(diff), a.grid))
    raise ValueError(f"unknown norm tag {norm!r}")


def hausdorff_semidistance(a: SnapshotSet, b: SnapshotSet,
                           norm: str = "linf") -> float:
    """sup over members of a of the distance to the nearest member of b."""
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("semidistance needs nonempty sets")
    if a.grid != b.grid:
        raise ValueError("sets must share one grid")
    worst = 0.0
    for fa in a.members:
        best = min(_field_distance(fa, fb, norm) for fb in b.members)
        worst = max(worst, best)
    return worst


def omega_limit_estimate(records, cutoff: float, merge_tol: float) -> SnapshotSet:
    """Snapshots at times >= cutoff, deduplicated within merge_tol in sup norm.

    A larger cutoff yields a subset of a smaller one up to merge_tol. The
    collection order is fixed (by run id, then time) so the result is
    deterministic.
    """
    picked = []
    for rec in sorted(records, key=lambda r: r.run_id):
        for t, snap in zip(rec.times, rec.snapshots):
            if t >= cutoff - 1e-12:
                picked.append((rec.run_id, float(t), snap))
    if not picked:
        raise EmptySet(f"no snapshots at or past cutoff {cutoff}")
    members, run_ids, times = [], [], []
    for run_id, t, snap in picked:
        is_new = all(
            float(np.max(np.abs(snap.values - kept.values))) > merge_tol
            for kept in members
        )
        if is_new:
            members.append(snap)
            run_ids.append(run_id)
            times.append(t)
    return SnapshotSet(members=members, run_ids=run_ids, times=times)
