"""Finite-temperature quantum friction and decoherence of a particle moving past a plate.

Frequencies are measured in units of ``1/a`` (``w_tilde = a * omega``,
``o_tilde = a * Omega``), velocities in units of ``c`` and inverse
temperatures in units of ``a``; ``beta = ZERO_TEMPERATURE`` is ``T = 0``.
"""
__version__ = "0.1.0"

from .kernels import (  # noqa: E402
    ZERO_TEMPERATURE,
    ModelParams,
    bose_occupation,
    f_thermal,
    f_thermal_consistent,
    vartheta,
    zeta_1,
    zeta_2d,
    zeta_pm,
)
from .quadrature import (  # noqa: E402
    DEFAULT_TOLERANCE,
    PVPole,
    QuadratureResult,
    Region,
    Tolerance,
    integrate_1d,
    integrate_2d_region,
    integrate_oscillatory,
    integrate_semi_infinite,
    principal_value_1d,
)
from .friction import (  # noqa: E402
    ForceBreakdown,
    f1_window_is_open,
    force_term_f1,
    force_term_f2,
    force_term_f3,
    force_term_f3_plus,
    friction_force,
    velocity_sweep,
)
from .decoherence import (  # noqa: E402
    DecoherenceBreakdown,
    PerturbativeBreakdown,
    decoherence_time,
    decoherence_velocity_sweep,
    global_factor,
    im_s1_exact,
    im_s1_smallv,
    plate_term_s1,
    plate_term_s2,
    plate_term_s3,
    resonance_sweep,
)
from .sweep import SweepTable  # noqa: E402

__all__ = [
    "ZERO_TEMPERATURE", "ModelParams", "bose_occupation", "f_thermal",
    "f_thermal_consistent", "vartheta", "zeta_1", "zeta_2d", "zeta_pm",
    "DEFAULT_TOLERANCE", "PVPole", "QuadratureResult", "Region", "Tolerance",
    "integrate_1d", "integrate_2d_region", "integrate_oscillatory",
    "integrate_semi_infinite", "principal_value_1d",
    "ForceBreakdown", "f1_window_is_open", "force_term_f1", "force_term_f2",
    "force_term_f3", "force_term_f3_plus", "friction_force", "velocity_sweep",
    "DecoherenceBreakdown", "PerturbativeBreakdown", "decoherence_time",
    "decoherence_velocity_sweep", "global_factor", "im_s1_exact", "im_s1_smallv",
    "plate_term_s1", "plate_term_s2", "plate_term_s3", "resonance_sweep",
    "SweepTable",
]
