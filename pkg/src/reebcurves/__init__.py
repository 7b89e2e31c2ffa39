"""Biharmonic Frenet curves in Sasakian model manifolds.

Model manifolds live in :mod:`reebcurves.models`; structure checks in
:mod:`reebcurves.contact`; curves and the Frenet apparatus in
:mod:`reebcurves.curves`; tension and bitension fields in
:mod:`reebcurves.biharmonic`; helix integration and residual scans in
:mod:`reebcurves.helix_lab`.
"""

from .biharmonic import (
    analyze_series,
    bitension_aligned,
    bitension_direct,
    bitension_frenet,
    bitension_report,
    check_characterization,
    tension,
)
from .contact import check_xi_curvature, verify_all, verify_almost_contact, verify_sasakian
from .curves import (
    AnalyticCurve,
    SampledCurve,
    arc_length_reparametrize,
    clifford_helix,
    frenet_apparatus,
    is_helix,
    reeb_alignment,
)
from .errors import (
    DegenerateMetricError,
    DerivativeOrderError,
    DomainError,
    GeodesicPointError,
    PreconditionError,
    RegularityError,
    StepSizeError,
)
from .geometry import christoffel, curvature, metric
from .helix_lab import HelixSpec, find_biharmonic, integrate_helix, reeb_aligned_frame, scan
from .models import MODEL_NAMES, get_model

__version__ = "0.1.0"
