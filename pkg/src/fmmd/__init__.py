"""Kernel two-sample tests for functional data."""

from ._core import BACKEND
from .errors import (
    DataError,
    DegenerateBandwidth,
    DegenerateSNR,
    DegenerateSpectrum,
    FmmdError,
    IncompatibleMesh,
    InsufficientData,
    InvalidArgument,
    InvalidOperator,
    NumericalFailure,
)
from .estimators import (
    PowerReport,
    TestResult,
    mmd_linear,
    mmd_u_statistic,
    permutation_test,
    power_harness,
)
from .features import (
    Fpca,
    Identity,
    IntegralOp,
    Spectral,
    Square,
    apply,
    fit_fpca,
    mapped_sq_distance,
)
from .gaussian import (
    GaussianSpec,
    OperatorTriple,
    closed_form_mmd,
    mean_embedding,
    median_lemma,
    sample_gp,
    scaling_rhs,
    snr_ratio,
    xi_general,
    xi_mean_shift,
)
from .ground import (
    Cosine,
    CosineExponential,
    Dirac,
    Matern15,
    SquaredExponential,
    covariance_operator_matrix,
)
from .kernels import Cov, ImqT, MedianRule, RandomFeature, SeT, gram_matrices, median_heuristic
from .mesh import (
    FunctionSample,
    FunctionSet,
    Mesh,
    inner_product,
    norm,
    read_function_set,
    uniform_mesh,
    write_function_set,
)
from .reconstruction import (
    BasisProjection,
    KernelInterp,
    LinearInterp,
    Observation,
    approx_mmd_bound,
    discretise,
    reconstruct,
)

__version__ = "0.1.0"
