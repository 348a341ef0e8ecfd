"""Numerical tolerances shared by every module and by the test-suite."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # geometry
    skew: float = 1e-9
    unit: float = 1e-9
    so3_orthogonality: float = 1e-10
    so3_det: float = 1e-10
    renormalize_ball: float = 0.1
    exp_series: float = 1e-8
    # states
    tangency: float = 1e-9
    # models
    axisymmetry: float = 1e-12
    balanced_rho: float = 1e-12
    blowup: float = 1e6
    # equilibria
    equilibrium_residual: float = 1e-10
    alpha_guard: float = 1e-9
    degeneracy: float = 1e-12
    # reduction
    initial_mismatch: float = 1e-8
    loop_closure: float = 1e-8
    vertical_rotation: float = 1e-6
    # poincare
    crossing: float = 1e-10
    pole_exclusion: float = 1e-6
    bisection_iterations: int = 40


TOL = Tolerances()
