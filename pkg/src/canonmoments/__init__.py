"""Canonical variables for quantum moments: brackets, realizations, effective dynamics."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .moments import MomentIndex, MomentPolynomial, MomentState, bracket_single_dof, k_coefficient, truncate  # noqa: E402
from .weyl import weyl_bracket_oracle  # noqa: E402
from .realizations import (  # noqa: E402
    closure_certificate,
    get_realization,
    moment_function,
    realization_names,
    realize_order2,
    realize_order3_ansatz,
    realize_order3_systematic,
    realize_order4_ansatz,
    realize_twodof,
)
from .effective import EffectiveModel, exact_ground_state, ground_state_estimate  # noqa: E402
from .dynamics import BarrierSpec, integrate, tunneling_run, tunneling_sweep  # noqa: E402
from .thermo import ensemble_averages, partition_function, two_point_function  # noqa: E402
from .effpot2 import effective_potential_2dof, minimize_moment_sector  # noqa: E402
from .reconstruction import density_from_moments, impurity_candidates, phase_from_moments  # noqa: E402
