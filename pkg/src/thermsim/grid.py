"""Uniform tensor grids, Dirichlet fields, quadrature, and the discrete m-Laplacian.

Unknowns live on interior vertices of a uniform grid over an interval or an
axis-aligned rectangle. The boundary ring carries the homogeneous Dirichlet
value 0 implicitly and is never stored. The diffusion operator is kept in
flux form (face gradients, face coefficients, divergence of fluxes) so that
the discrete integration-by-parts identity holds exactly:

    integrate(m_laplacian_apply(v) * v) == -sum_faces coeff * grad_n^2 * vol
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import minimize

from .errors import NonConvergence

DEFAULT_P_SWEEP = (2, 4, 8, 16, 32)


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid with at least 2 cells (1 interior vertex) per axis."""

    extents: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.extents) <= 2:
            raise ValueError("only 1D intervals and 2D rectangles are supported")
        if len(self.cells) != len(self.extents):
            raise ValueError("cells and extents must have the same dimension")
        if any(int(n) != n or n < 2 for n in self.cells):
            raise ValueError("need at least 2 cells per axis")
        if any(e <= 0 for e in self.extents):
            raise ValueError("extents must be positive")
        object.__setattr__(self, "extents", tuple(float(e) for e in self.extents))
        object.__setattr__(self, "cells", tuple(int(n) for n in self.cells))

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / n for e, n in zip(self.extents, self.cells))

    @property
    def interior_shape(self) -> tuple[int, ...]:
        return tuple(n - 1 for n in self.cells)

    @property
    def n_interior(self) -> int:
        return int(np.prod(self.interior_shape))

    @property
    def measure(self) -> float:
        return float(np.prod(self.extents))

    def interior_axes(self) -> tuple[np.ndarray, ...]:
        """Interior vertex coordinates along each axis."""
        return tuple(
            np.arange(1, n) * h for n, h in zip(self.cells, self.spacing)
        )

    def interior_mesh(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays shaped like the interior (meshgrid, 'ij')."""
        axes = self.interior_axes()
        if self.dim == 1:
            return axes
        return tuple(np.meshgrid(*axes, indexing="ij"))


def interval(length: float, cells: int) -> Grid:
    return Grid((length,), (cells,))


def rectangle(lx: float, ly: float, nx: int, ny: int) -> Grid:
    return Grid((lx, ly), (nx, ny))


@dataclass
class Field:
    """Real values on the interior vertices of a grid; zero on the boundary."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.interior_shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match interior "
                f"{self.grid.interior_shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    @staticmethod
    def zeros(grid: Grid) -> "Field":
        return Field(grid, np.zeros(grid.interior_shape))

    def padded(self) -> np.ndarray:
        """Values extended by the zero Dirichlet ring."""
        return np.pad(self.values, 1)


def trapezoid_weights(grid: Grid) -> np.ndarray:
    """Tensor trapezoid weights over all vertices; they sum exactly to |domain|."""
    axes = []
    for n, h in zip(grid.cells, grid.spacing):
        w = np.full(n + 1, h)
        w[0] = w[-1] = h / 2
        axes.append(w)
    if grid.dim == 1:
        return axes[0]
    return np.outer(axes[0], axes[1])


def integrate(samples, grid: Grid) -> float:
    """Quadrature of vertex samples over the domain.

    Accepts a Field (boundary zeros implied), a full vertex array including
    the boundary ring, or an interior-shaped array (zero boundary assumed).
    """
    if isinstance(samples, Field):
        full = samples.padded()
    else:
        arr = np.asarray(samples, dtype=float)
        if arr.shape == grid.interior_shape:
            full = np.pad(arr, 1)
        elif arr.shape == tuple(n + 1 for n in grid.cells):
            full = arr
        else:
            raise ValueError(f"sample shape {arr.shape} matches neither the "
                             "interior nor the full vertex layout")
    return float(np.sum(trapezoid_weights(grid) * full))


def _face_gradients_1d(padded: np.ndarray, h: float) -> np.ndarray:
    return np.diff(padded) / h


def face_coefficients(fld: Field, m: float, r: float):
    """Face-normal gradients and diffusivities of the regularized operator.

    Returns (grads, coeffs) where each entry is a per-axis list. The face
    diffusivity is (|grad|^2 + r)^((m-2)/2) with |grad|^2 the normal
    difference squared plus, in 2D, the averaged tangential central
    differences squared.
    """
    if m < 2:
        raise ValueError("diffusion exponent must be >= 2")
    g = fld.grid
    p = fld.padded()
    expo = (m - 2.0) / 2.0
    if g.dim == 1:
        (h,) = g.spacing
        gn = _face_gradients_1d(p, h)
        coeff = (gn * gn + r) ** expo
        return [gn], [coeff]

    hx, hy = g.spacing
    # x-faces: between vertex columns, at interior rows
    gx = (p[1:, 1:-1] - p[:-1, 1:-1]) / hx
    dyc = (p[:, 2:] - p[:, :-2]) / (2.0 * hy)      # d/dy at every vertex, interior rows
    gx_t = 0.5 * (dyc[1:, :] + dyc[:-1, :])
    cx = (gx * gx + gx_t * gx_t + r) ** expo
    # y-faces: between vertex rows, at interior columns
    gy = (p[1:-1, 1:] - p[1:-1, :-1]) / hy
    dxc = (p[2:, :] - p[:-2, :]) / (2.0 * hx)
    gy_t = 0.5 * (dxc[:, 1:] + dxc[:, :-1])
    cy = (gy * gy + gy_t * gy_t + r) ** expo
    return [gx, gy], [cx, cy]


def m_laplacian_apply(fld: Field, m: float, r: float) -> Field:
    """Flux-form divergence of (|grad v|^2 + r)^((m-2)/2) grad v.

    Reduces exactly to the 3-point (1D) / 5-point (2D) Laplacian at m = 2.
    Legal but degenerate at r = 0, m > 2 where face gradients vanish.
    """
    g = fld.grid
    grads, coeffs = face_coefficients(fld, m, r)
    if g.dim == 1:
        (h,) = g.spacing
        flux = coeffs[0] * grads[0]
        return Field(g, np.diff(flux) / h)
    hx, hy = g.spacing
    fx = coeffs[0] * grads[0]
    fy = coeffs[1] * grads[1]
    out = (fx[1:, :] - fx[:-1, :]) / hx + (fy[:, 1:] - fy[:, :-1]) / hy
    return Field(g, out)


def dissipation(fld: Field, m: float, r: float) -> float:
    """Discrete integral of (|grad v|^2 + r)^((m-2)/2) |grad v|^2.

    Exactly equals -integrate(m_laplacian_apply(v) * v) by summation by parts.
    """
    g = fld.grid
    grads, coeffs = face_coefficients(fld, m, r)
    vol = float(np.prod(g.spacing))
    return vol * float(sum(np.sum(c * gr * gr) for c, gr in zip(coeffs, grads)))


def w1m_seminorm(fld: Field, m: float) -> float:
    """Quadrature of |grad v|^m over the domain.

    1D: per-face gradient magnitudes with weight h (the exact dual of the
    operator). 2D: cell-centered gradients (edge differences averaged onto
    cell midpoints) with the cells tiling the domain exactly; midpoint
    sampling is second-order accurate on smooth fields but can underread
    grid-frequency oscillation.
    """
    g = fld.grid
    vol = float(np.prod(g.spacing))
    p = fld.padded()
    if g.dim == 1:
        gn = _face_gradients_1d(p, g.spacing[0])
        return vol * float(np.sum(np.abs(gn) ** m))
    hx, hy = g.spacing
    dx = (p[1:, :] - p[:-1, :]) / hx
    gx = 0.5 * (dx[:, 1:] + dx[:, :-1])
    dy = (p[:, 1:] - p[:, :-1]) / hy
    gy = 0.5 * (dy[1:, :] + dy[:-1, :])
    return vol * float(np.sum((gx * gx + gy * gy) ** (m / 2.0)))


def lp_norm(fld: Field, p: float) -> float:
    return integrate(np.abs(fld.values) ** p, fld.grid) ** (1.0 / p)


def norms(fld: Field, m: float, p_values=DEFAULT_P_SWEEP) -> dict:
    """Standard discrete norms plus the W^{1,m} seminorm.

    lp maps each requested exponent to its norm; lp_max is their maximum,
    the finite-p stand-in for the sup norm.
    """
    lp = {p: lp_norm(fld, p) for p in p_values}
    linf = float(np.max(np.abs(fld.values))) if fld.values.size else 0.0
    return {
        "linf": linf,
        "l1": integrate(np.abs(fld.values), fld.grid),
        "l2": lp_norm(fld, 2),
        "lp": lp,
        "lp_max": max(lp.values()) if lp else 0.0,
        "w1m_seminorm": w1m_seminorm(fld, m),
    }


def _difference_matrix(n_cells: int, h: float) -> sp.csr_matrix:
    """Face gradient operator: interior vertex values -> per-face differences."""
    rows, cols, vals = [], [], []
    for f in range(n_cells):
        if f + 1 <= n_cells - 1:
            rows.append(f)
            cols.append(f)
            vals.append(1.0 / h)
        if f >= 1:
            rows.append(f)
            cols.append(f - 1)
            vals.append(-1.0 / h)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_cells, n_cells - 1))


def gradient_operators(grid: Grid) -> list[sp.csr_matrix]:
    """Sparse normal-gradient maps, one per face family, on flattened interiors."""
    if grid.dim == 1:
        return [_difference_matrix(grid.cells[0], grid.spacing[0])]
    nx, ny = grid.cells
    dx = _difference_matrix(nx, grid.spacing[0])
    dy = _difference_matrix(ny, grid.spacing[1])
    ix = sp.identity(nx - 1, format="csr")
    iy = sp.identity(ny - 1, format="csr")
    return [sp.kron(dx, iy, format="csr"), sp.kron(ix, dy, format="csr")]


def newton_face_coefficients(fld: Field, m: float, r: float):
    """Exact derivative of the face flux with respect to its normal gradient.

    With S = gn^2 + gt^2 + r the flux is S^{(m-2)/2} gn, so
    dF/dgn = S^{(m-4)/2} ((m-1) gn^2 + gt^2 + r). Tangential coupling is
    left out (lagged), which keeps the Newton matrix on the same stencil as
    the operator itself. Reduces to 1 at m = 2.
    """
    def dflux(gn2, gt2):
        s = gn2 + gt2 + r
        with np.errstate(divide="ignore", invalid="ignore"):
            out = s ** ((m - 4.0) / 2.0) * ((m - 1.0) * gn2 + gt2 + r)
        # degenerate faces (r = 0, zero gradient): the flux derivative limit
        return np.where(s > 0, out, 1.0 if m == 2.0 else 0.0)

    g = fld.grid
    p = fld.padded()
    if g.dim == 1:
        (h,) = g.spacing
        gn = _face_gradients_1d(p, h)
        return [dflux(gn * gn, 0.0)]
    hx, hy = g.spacing
    gx = (p[1:, 1:-1] - p[:-1, 1:-1]) / hx
    dyc = (p[:, 2:] - p[:, :-2]) / (2.0 * hy)
    gx_t = 0.5 * (dyc[1:, :] + dyc[:-1, :])
    gy = (p[1:-1, 1:] - p[1:-1, :-1]) / hy
    dxc = (p[2:, :] - p[:-2, :]) / (2.0 * hx)
    gy_t = 0.5 * (dxc[:, 1:] + dxc[:, :-1])
    return [dflux(gx * gx, gx_t * gx_t), dflux(gy * gy, gy_t * gy_t)]


def operator_matrix_from_coefficients(grid: Grid, coeffs) -> sp.csr_matrix:
    """div(coeff grad .) as a sparse matrix: -G^T diag(coeff) G per family."""
    ops = gradient_operators(grid)
    n = grid.n_interior
    out = sp.csr_matrix((n, n))
    for grad_op, coeff in zip(ops, coeffs):
        out = out - grad_op.T @ sp.diags(coeff.reshape(-1)) @ grad_op
    return out.tocsr()


def frozen_operator_matrix(fld: Field, m: float, r: float) -> sp.csr_matrix:
    """Linearization of the m-Laplacian with face diffusivities frozen at fld."""
    _, coeffs = face_coefficients(fld, m, r)
    return operator_matrix_from_coefficients(fld.grid, coeffs)


def _dirichlet_laplacian(grid: Grid) -> sp.csr_matrix:
    """Standard 3/5-point -Laplacian (positive definite)."""
    zero = Field.zeros(grid)
    return (-frozen_operator_matrix(zero, 2.0, 0.0)).tocsr()


def _inverse_power_smallest(a: sp.csr_matrix, tol: float, max_iters: int) -> float:
    rng = np.random.default_rng(1905)
    x = rng.standard_normal(a.shape[0])
    x /= np.linalg.norm(x)
    lu = spla.splu(a.tocsc())
    lam_prev = np.inf
    for _ in range(max_iters):
        y = lu.solve(x)
        y /= np.linalg.norm(y)
        lam = float(y @ (a @ y))
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            return lam
        lam_prev = lam
        x = y
    raise NonConvergence(f"inverse power iteration stalled at {lam_prev}")


def poincare_constant(grid: Grid, m: float, *, n_starts: int = 6,
                      tol: float = 1e-12, max_iters: int = 2000,
                      seed: int = 23) -> float:
    """Largest discrete constant c with c * int |v|^m <= int |grad v|^m.

    m = 2 is solved exactly as the smallest eigenvalue of the Dirichlet
    Laplacian (inverse power iteration). Other m are estimated by
    Rayleigh-quotient minimization from random starts with local descent;
    the result is the best quotient found, an upper estimate of the true
    discrete constant.
    """
    if m == 2:
        return _inverse_power_smallest(_dirichlet_laplacian(grid), tol, max_iters)

    ops = gradient_operators(grid)
    w_node = trapezoid_weights(grid)
    inner = w_node[tuple(slice(1, -1) for _ in range(grid.dim))].reshape(-1)
    vol = float(np.prod(grid.spacing))
    n_fams = len(ops)

    def quotient_and_grad(v):
        num = 0.0
        gnum = np.zeros_like(v)
        for op in ops:
            gv = op @ v
            mag = np.abs(gv)
            num += vol / n_fams * np.sum(mag ** m)
            gnum += vol / n_fams * m * (op.T @ (mag ** (m - 2.0) * gv))
        den = float(np.sum(inner * np.abs(v) ** m))
        gden = m * inner * np.abs(v) ** (m - 2.0) * v
        q = num / den
        return q, (gnum * den - num * gden) / den**2

    rng = np.random.default_rng(seed)
    best = np.inf
    failures = 0
    for _ in range(n_starts):
        v0 = rng.standard_normal(grid.n_interior)
        v0 /= np.linalg.norm(v0)
        res = minimize(quotient_and_grad, v0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 500, "ftol": 1e-14, "gtol": 1e-12})
        if np.isfinite(res.fun):
            best = min(best, float(res.fun))
        else:
            failures += 1
    if not np.isfinite(best) or failures == n_starts:
        raise NonConvergence(
            f"Rayleigh minimization failed from all {n_starts} starts (m={m})")
    return best
