"""Contravariant Riemann-Poisson geometry on Lie-Poisson spaces and the
curvature-derived metriplectic dynamics of the rigid body and heavy top."""

from .algebra import (
    IncompatibleDimensions,
    InvalidStructureConstants,
    Metric,
    StructureConstants,
    abelian_constants,
    heavy_top_constants,
    lie_poisson_bivector,
    poisson_bracket,
    so3_constants,
)
from .dynamics import IntegratorOptions, Trajectory, detect_relaxation, integrate, monitor_report
from .geometry import (
    ConnectionCoefficients,
    CurvatureTensor,
    connection_euclidean,
    curvature_euclidean,
    four_bracket,
    metriplectic_matrix,
)
from .models import BRACKET_NORMALIZATION, DomainError, Generator, TopParams, heavy_top_rhs
from .stability import Classification, Equilibrium, analyze, closed_form_AB, linearize, spectrum

__version__ = "0.1.0"
