"""Second-moment asymptotics for strictly regular and 2-regular profiles."""

from .overlap import SaddlePoint3D, OverlapCurve, solve_curve, solve_overlap_saddle, center_C_f
from .strict import (
    OverlapScan,
    ProbabilityBound,
    SecondMomentReport,
    dominance_scan_strict,
    find_r_star,
    prob_lower_bound_strict,
    s_gamma,
    sigma_s_sq,
    stationarity_residual,
)
from .two_regular import (
    dominance_scan_2reg,
    g_gamma_2reg,
    lower_bound_alpha_2reg,
    sigma_matrix_2reg,
    stationarity_2reg,
)
