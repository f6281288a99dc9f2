"""N-bein geometry of parametrised quantum systems.

Spectral and finite-difference routes to the quantum geometric tensor, the
two-state tensor and its torsion, Berry-type connections and curvatures,
gauge-invariant scalars, and the Riemannian curvature of the quantum metric.
"""

from .errors import *  # noqa: F401,F403
from .geometry import (
    TORSION_ROUTES,
    berry_connection_fd,
    berry_curvature_fd,
    bianchi_residuals,
    first_order_overlap_check,
    gamma_connection,
    nbein_fd,
    nbein_spectral,
    nbein_tensor,
    qgt,
    r_curvature,
    theta_eta_split,
    torsion,
    two_state,
)
from .hamdsl import BUILTIN_FAMILIES, FamilySpec, assemble, builtin_family, parse_coeff, parse_family
from .invariants import invariant_report, metric_inverse, pair_tensor, scalar_invariant
from .linalg import hermitian_eigendecompose
from .oracles import compare, oracle_example1, oracle_example2
from .riemann import sample_metric, scalar_curvature
from .spectrum import EigenBundle, GaugePolicy, apply_gauge, converge_truncation, match_states, dressed_gauge, solve_at

__version__ = "0.1.0"
