"""Quadratic operators, their polarized bilinear forms, and a Mathieu-function
pair of distinct solutions to u * Laplace(u) = g on a square."""

from .quadratic import (
    BilinearMap,
    ProbeVerdict,
    QuadraticMap,
    additivity_residual_F,
    collision_from_witness,
    homogeneity_residual,
    nondegeneracy_probe,
    parallelogram_residual,
    polarize,
    quadratic_from_bilinear,
    scalar_residual_f,
    witness_from_collision,
)
from .mathieu import (
    SineSeries,
    char_value_b2,
    find_qstar,
    mathieu_ode_residual,
    se2_coefficients,
    se2_eval,
    se2_eval_dd,
)

__version__ = "0.1.0"
