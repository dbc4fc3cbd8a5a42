"""Material and source laws, the problem description, and its regularization.

The continuous model couples a nonlinear storage law alpha, an m-Laplacian
diffusion term, and a source f scaled by the nonlocal coefficient
kappa / (int_domain f(v) dx)^2. All built-in law families are C^1 with
closed-form derivative and antiderivative, so no numeric integration is
needed anywhere in the model layer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DenominatorTooSmall, InvalidR
from .grid import Field, integrate
from .initial import InitialData, MollifiedInitial


# ---------------------------------------------------------------------------
# Material laws (the storage nonlinearity alpha)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityLaw:
    """alpha(t) = t. Derivative bounds are 1 on both sides."""

    family = "identity"
    slope_min: float = 1.0
    slope_max: float = 1.0

    def alpha(self, t):
        return np.asarray(t, dtype=float) + 0.0

    def alpha_prime(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        return 0.5 * t * t

    def alpha_inverse(self, y):
        return np.asarray(y, dtype=float) + 0.0


@dataclass(frozen=True)
class SmoothedPiecewiseLaw:
    """Smooth two-slope law: slope_neg far left, slope_pos far right.

    alpha(t) = s_avg * t + s_diff * (sqrt(t^2 + w^2) - w) blends the slopes
    over a transition of width w around 0. Strictly increasing whenever both
    slopes are positive; alpha(0) = 0 by construction.
    """

    slope_neg: float = 0.5
    slope_pos: float = 2.0
    width: float = 1.0

    family = "smoothed-piecewise"

    def __post_init__(self):
        if min(self.slope_neg, self.slope_pos) <= 0 or self.width <= 0:
            raise ValueError("slopes and width must be positive")

    @property
    def slope_min(self) -> float:
        return min(self.slope_neg, self.slope_pos)

    @property
    def slope_max(self) -> float:
        return max(self.slope_neg, self.slope_pos)

    def _parts(self):
        return (0.5 * (self.slope_pos + self.slope_neg),
                0.5 * (self.slope_pos - self.slope_neg))

    def alpha(self, t):
        t = np.asarray(t, dtype=float)
        s_avg, s_diff = self._parts()
        w = self.width
        return s_avg * t + s_diff * (np.sqrt(t * t + w * w) - w)

    def alpha_prime(self, t):
        t = np.asarray(t, dtype=float)
        s_avg, s_diff = self._parts()
        return s_avg + s_diff * t / np.sqrt(t * t + self.width**2)

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        s_avg, s_diff = self._parts()
        w = self.width
        root = np.sqrt(t * t + w * w)
        return (0.5 * s_avg * t * t
                + s_diff * (0.5 * t * root + 0.5 * w * w * np.arcsinh(t / w) - w * t))

    def alpha_inverse(self, y):
        return _invert_increasing(self.alpha, y, self.slope_min)


@dataclass(frozen=True)
class CubicAffineLaw:
    """alpha(t) = a t + b t^3.

    Globally increasing for a > 0, b >= 0, but only Lipschitz on a bounded
    box; slope_max certifies the derivative bound on [-box, box], which is
    where the hypothesis checks sample.
    """

    linear: float = 1.0
    cubic: float = 1.0
    box: float = 10.0

    family = "cubic-affine"

    def __post_init__(self):
        if self.linear <= 0 or self.cubic < 0 or self.box <= 0:
            raise ValueError("need linear > 0, cubic >= 0, box > 0")

    @property
    def slope_min(self) -> float:
        return self.linear

    @property
    def slope_max(self) -> float:
        return self.linear + 3.0 * self.cubic * self.box**2

    def alpha(self, t):
        t = np.asarray(t, dtype=float)
        return self.linear * t + self.cubic * t**3

    def alpha_prime(self, t):
        t = np.asarray(t, dtype=float)
        return self.linear + 3.0 * self.cubic * t * t

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        return 0.5 * self.linear * t * t + 0.25 * self.cubic * t**4

    def alpha_inverse(self, y):
        return _invert_increasing(self.alpha, y, self.slope_min)


MaterialLaw = IdentityLaw | SmoothedPiecewiseLaw | CubicAffineLaw


def _invert_increasing(fn, y, slope_min):
    y_arr = np.asarray(y, dtype=float)

    def solve_one(target):
        if target == 0.0:
            return 0.0
        hi = max(1.0, abs(target) / slope_min)
        while fn(np.sign(target) * hi) * np.sign(target) < abs(target):
            hi *= 2.0
        lo, hi = (-hi, hi)
        return brentq(lambda t: float(fn(t)) - target, lo, hi, xtol=1e-14, rtol=1e-15)

    if y_arr.ndim == 0:
        return solve_one(float(y_arr))
    return np.array([solve_one(float(t)) for t in y_arr.reshape(-1)]).reshape(y_arr.shape)


def legendre_psi(law: MaterialLaw, t):
    """Antiderivative of alpha vanishing at 0; convex since alpha increases."""
    return law.psi(t)


def legendre_psi_star_of_alpha(law: MaterialLaw, t):
    """Convex conjugate of psi evaluated at alpha(t): t*alpha(t) - psi(t).

    Nonnegative for every t because alpha is increasing with alpha(0) = 0.
    """
    t = np.asarray(t, dtype=float)
    return t * law.alpha(t) - law.psi(t)


def material_law(family: str, **params) -> MaterialLaw:
    table = {
        "identity": IdentityLaw,
        "smoothed-piecewise": SmoothedPiecewiseLaw,
        "cubic-affine": CubicAffineLaw,
    }
    if family not in table:
        raise ValueError(f"unknown material family {family!r}")
    return table[family](**params)


def check_material_hypotheses(law: MaterialLaw, *, box: float | None = None,
                              samples: int = 4001) -> dict:
    """Sample-grid check of alpha(0)=0, strict monotonicity, and slope bounds.

    Returns worst-case margins; all must be >= -1e-12 for the law to pass.
    """
    box = box if box is not None else getattr(law, "box", 10.0)
    t = np.linspace(-box, box, samples)
    a = law.alpha(t)
    ap = law.alpha_prime(t)
    diffs = np.diff(a)
    return {
        "alpha_at_zero": float(abs(law.alpha(0.0))),
        "min_increment": float(np.min(diffs)),
        "slope_low_margin": float(np.min(ap - law.slope_min)),
        "slope_high_margin": float(np.min(law.slope_max - ap)),
    }


# ---------------------------------------------------------------------------
# Source laws (the heating term f)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantSource:
    """f identically equal to its floor."""

    value: float = 1.0

    family = "constant-floor"

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("constant source must be positive")

    @property
    def sigma(self) -> float:
        return self.value

    @property
    def f_max(self) -> float:
        return self.value

    # |f(u)-f(v)| = 0, so any constant works; 0 is the sharp one.
    lip_vs_alpha: float = 0.0

    def f(self, s):
        return np.full_like(np.asarray(s, dtype=float), self.value)

    def f_prime(self, s):
        return np.zeros_like(np.asarray(s, dtype=float))


@dataclass(frozen=True)
class GaussianBumpSource:
    """Positive floor plus a Gaussian bump.

    lip_vs_alpha bounds |f(u)-f(v)| <= lip_vs_alpha * |alpha(u)-alpha(v)|;
    it must be supplied for the material the source is paired with (the
    gaussian_bump_source factory computes it from the material's slope_min).
    """

    floor: float = 1.0
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0
    lip_vs_alpha: float = 1.0

    family = "gaussian-bump-over-floor"

    def __post_init__(self):
        if self.floor <= 0 or self.amplitude < 0 or self.width <= 0:
            raise ValueError("need floor > 0, amplitude >= 0, width > 0")

    @property
    def sigma(self) -> float:
        return self.floor

    @property
    def f_max(self) -> float:
        return self.floor + self.amplitude

    @property
    def lip_f(self) -> float:
        # max |f'| of a Gaussian bump
        return self.amplitude * np.exp(-0.5) / self.width

    def f(self, s):
        s = np.asarray(s, dtype=float)
        z = (s - self.center) / self.width
        return self.floor + self.amplitude * np.exp(-0.5 * z * z)

    def f_prime(self, s):
        s = np.asarray(s, dtype=float)
        z = (s - self.center) / self.width
        return -self.amplitude * z / self.width * np.exp(-0.5 * z * z)


SourceLaw = ConstantSource | GaussianBumpSource


def gaussian_bump_source(floor: float, amplitude: float, center: float,
                         width: float, material: MaterialLaw) -> GaussianBumpSource:
    """Bump source with its Lipschitz-versus-alpha constant filled in."""
    lip_f = amplitude * np.exp(-0.5) / width
    return GaussianBumpSource(floor, amplitude, center, width,
                              lip_vs_alpha=float(lip_f / material.slope_min))


def source_law(family: str, material: MaterialLaw, **params) -> SourceLaw:
    if family == "constant-floor":
        return ConstantSource(**params)
    if family == "gaussian-bump-over-floor":
        return gaussian_bump_source(material=material, **params)
    raise ValueError(f"unknown source family {family!r}")


def check_source_hypotheses(source: SourceLaw, material: MaterialLaw, *,
                            box: float = 10.0, n_pairs: int = 2000,
                            seed: int = 11) -> dict:
    """Floor/ceiling bounds plus the Lipschitz-versus-alpha inequality on pairs."""
    rng = np.random.default_rng(seed)
    s = np.linspace(-box, box, 4001)
    fs = source.f(s)
    u = rng.uniform(-box, box, n_pairs)
    v = rng.uniform(-box, box, n_pairs)
    lhs = np.abs(source.f(u) - source.f(v))
    rhs = source.lip_vs_alpha * np.abs(material.alpha(u) - material.alpha(v))
    return {
        "floor_margin": float(np.min(fs - source.sigma)),
        "ceiling_margin": float(np.min(source.f_max - fs)),
        "lipschitz_margin": float(np.min(rhs - lhs)),
    }


# ---------------------------------------------------------------------------
# Problem description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    """Everything that defines one evolution problem, grid resolution aside.

    kappa may be given directly or derived from a supply current and the
    domain area as current^2 / area^2. mms_forcing is an extra source
    channel used only by verification runs; it receives the interior
    coordinate mesh and the evaluation time.
    """

    m: float
    kappa: float
    domain: tuple[float, ...]
    horizon: float
    material: MaterialLaw
    source: SourceLaw
    reg_r: float = 0.0
    initial: Optional[InitialData] = None
    mms_forcing: Optional[Callable] = None
    current: Optional[float] = None
    area: Optional[float] = None

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("diffusion exponent m must be >= 2")
        # kappa = 0 is allowed so tests can switch the source off entirely
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.reg_r < 0:
            raise ValueError("reg_r must be nonnegative")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if self.current is not None and self.area is not None:
            derived = self.current**2 / self.area**2
            if not np.isclose(derived, self.kappa, rtol=1e-12):
                raise ValueError("kappa inconsistent with current^2 / area^2")

    @property
    def measure(self) -> float:
        return float(np.prod(self.domain))


def kappa_from_supply(current: float, area: float) -> float:
    return current**2 / area**2


def nonlocal_coefficient(spec: ProblemSpec, fld: Field) -> float:
    """Scalar kappa / (int f(v) dx)^2 multiplying the source pointwise.

    Uses the boundary value v = 0 in the quadrature so the weights sum to
    the full domain measure. Raises DenominatorTooSmall when the source
    integral drops below half its guaranteed floor, which signals a law
    violating the floor hypothesis.
    """
    full = spec.source.f(fld.padded())
    total = integrate(full, fld.grid)
    floor = spec.source.sigma * spec.measure
    if total < 0.5 * floor:
        raise DenominatorTooSmall(
            f"source integral {total} below half the floor {floor}")
    return spec.kappa / total**2


def regularize(spec: ProblemSpec, r: float) -> ProblemSpec:
    """Spec with regularization r and initial data mollified at width r.

    The built-in law families are already C^1 with the required slope
    bounds, so the laws themselves are unchanged; only reg_r and the
    initial-data smoothing differ. The mollified data keep the sup bound
    ||v_0||_inf + 1 (the convolution kernel is a probability weight, so the
    bound holds with margin).
    """
    if r <= 0:
        raise InvalidR(f"regularization parameter must be positive, got {r}")
    base = spec.initial
    mollified = MollifiedInitial(base=base, width=r) if base is not None else None
    return replace(spec, reg_r=r, initial=mollified)
