"""siegelab: a numerical laboratory for Siegel disks of polynomial germs.

Exact continued fractions and Brjuno-type sums, linearization power series
with certified small-divisor handling, conformal radius estimation by two
independent routes, and scan experiments relating arithmetic to geometry.
"""

__version__ = "0.1.0"

from .angles import Angle, CFExpansion, Convergents, angle_reduce, cf_expand, convergents, frac, mul_mod1, parse_angle
from .brjuno import BrjunoValue, brjuno_B, lemma_gap, yoccoz_Y
from .errors import (
    BoundedTypeRequired,
    CenterOnBoundary,
    DegenerateAngle,
    DegenerateSample,
    OrbitEscaped,
    PrecisionExhausted,
    Resonance,
    SiegelabError,
    TooFewCoefficients,
    ZeroScale,
)
from .series import (
    GermSeries,
    LinearizationResult,
    RadiusEstimate,
    compose_oracle,
    conjugate_germ,
    germ_from_coeffs,
    hadamard_radius,
    lambda_of,
    linearization_residual,
    linearize,
    revert_series,
)
from .families import (
    CONSTANTS,
    UNIVALENT_WHITELIST,
    GfSpec,
    binomial_conjugate_germ,
    dstar_germ,
    geyer_germ,
    mobius_conjugate_germ,
    perturbed,
    quad_germ,
    rescale,
    semiconjugacy_residual,
    unicritical_boundary_germ,
    whitelist_germ,
)
from .capacity import (
    BoundarySample,
    CapacityEstimate,
    conformal_radius_capacity,
    invert_about,
    leja_fekete,
    siegel_boundary_sample,
    transfinite_diameter,
)
from .experiments import (
    CircleAverage,
    ScanReport,
    circle_average,
    conjecture_scan,
    dstar_bounds_scan,
    fatou_check,
    harmonicity_check,
    lemma_scan,
    quadratic_angles,
)
