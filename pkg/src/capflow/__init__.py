"""capflow: curvature flows and quermassintegral inequalities for capillary
hypersurfaces in the unit ball.

The package simulates inverse-curvature and mean-curvature flows of
hypersurfaces meeting the unit sphere at a constant contact angle, computes
their quermassintegrals, and verifies the monotone quantities, limit values,
and Alexandrov-Fenchel-type inequalities governing them, at desk scale.
"""

from .flow import FlowConfig, FlowTrace, run  # noqa: F401
from .geometry import GeometryFields, HalfSphereGrid  # noqa: F401
from .mobius import CapSpec  # noqa: F401
from .quermass import CapTable, QuermassVector, assemble_W  # noqa: F401
from .symfunc import CurvatureSpec, KappaVector  # noqa: F401
from .verify import CheckReport, run_suite  # noqa: F401

__version__ = "0.1.0"
