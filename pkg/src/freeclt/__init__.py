"""Free central limit theorem toolkit.

Free additive convolution powers by subordination, free Meixner and
expansion approximants, an exact formal expansion engine, and free
entropy / Fisher information functionals.
"""
from ._backend import BACKEND
from .edgeworth import (
    ExpansionApproximant,
    b1_closed,
    b2_closed,
    chebyshev_u,
    density_expansion,
    expansion1_cdf,
    expansion2_cdf,
    expansion2_shifted_cdf,
    expansion2_symmetric_cdf,
    q1_sup,
    semicircle_cdf,
    semicircle_density,
    semicircle_G,
)
from .entropy import (
    EntropyReport,
    clt_entropy_sweep,
    fisher_info,
    free_entropy,
    l1_distance,
    l1_measures,
    log_energy,
    log_potential,
)
from .errors import (
    AccuracyError,
    DegenerateMeasureError,
    DomainError,
    FreeCLTError,
    InvalidArgumentError,
    MomentInequalityError,
    NoConvergenceError,
    SingularInputError,
    SingularParameterError,
    TruncationOrderError,
)
from .formal_series import (
    CumulantPolynomial,
    FormalLaurentSeries,
    collect_Bk,
    phi_series,
    revert_g,
    solve_g,
    verify_closed_forms,
)
from .measure import (
    Measure,
    MomentSummary,
    SignedDensity,
    abs_moment,
    affine,
    arcsine,
    bernoulli,
    cumulants_from_moments,
    dirac,
    eta_qs,
    load_measure,
    lyapunov_fraction,
    measure_from_json,
    moment,
    moment_summary,
    preset,
    scale,
    semicircle,
    standardize,
    tail_moment,
    tilted_bernoulli,
)
from .meixner import (
    CltParams,
    MeixnerParams,
    clt_params,
    kappa_measure,
    meixner_atoms,
    meixner_density,
    meixner_F,
    meixner_G,
    meixner_measure,
    varsigma_density,
    varsigma_measure,
)
from .subordination import Subordination, clt_measure, convolution_power_G, free_power, solve_Z
from .transform import (
    cauchy_transform,
    invert_density,
    kolmogorov,
    kolmogorov_distance,
    kolmogorov_grid,
    reciprocal_transform,
    voiculescu_transform,
)

__version__ = "0.1.0"
