"""Desk-scale simulator and estimate checker for a triply nonlinear,
nonlocal m-Laplacian heat model with homogeneous Dirichlet boundary."""

from .analysis import (ContractionResult, SnapshotSet, TheoryConstants,
                       absorbing_radius, compute_theory_constants,
                       contraction_estimate, fit_decay_envelope,
                       ghidaglia_envelope, gronwall_check,
                       hausdorff_semidistance, omega_limit_estimate,
                       radius_envelope, tartar_check)
from .errors import (ConfigError, DenominatorTooSmall, EmptySet,
                     HypothesisViolated, InvalidExponent, InvalidR,
                     NonConvergence, OracleFailure, StepFailure, ThermsimError)
from .grid import (Field, Grid, dissipation, integrate, interval,
                   m_laplacian_apply, norms, poincare_constant, rectangle,
                   w1m_seminorm)
from .initial import (BumpInitial, ConstantInitial, FourierInitial,
                      MollifiedInitial, StepInitial, initial_data)
from .model import (ConstantSource, CubicAffineLaw, GaussianBumpSource,
                    IdentityLaw, ProblemSpec, SmoothedPiecewiseLaw,
                    check_material_hypotheses, check_source_hypotheses,
                    gaussian_bump_source, kappa_from_supply, legendre_psi,
                    legendre_psi_star_of_alpha, material_law,
                    nonlocal_coefficient, regularize, source_law)
from .stepping import (StepReport, StepperConfig, TrajectoryRecord,
                       brute_force_step, implicit_step, integrate_trajectory)

__version__ = "0.1.0"
