"""Layer-wise NTK spectra: analytic two-layer kernels and empirical per-layer grams."""
from ._accel import backend
from .errors import (
    ConfigError,
    DegenerateError,
    DivergenceError,
    DomainError,
    IDXFormatError,
    LayerNTKError,
    QuadratureAccuracyWarning,
    TruncationWarning,
)
from .gegenbauer import (
    BetaMatrix,
    GegenbauerSeries,
    beta_matrix,
    check_ratio_monotonicity,
    layerwise_eigen_ratio,
    ratio_table,
    to_gegenbauer,
)
from .kernel_series import (
    ActivationSpec,
    HermiteCoefficients,
    PowerSeries,
    eval_series,
    expand_activation,
    get_activation,
    layer_kernel_series,
    two_layer_series,
)
from .ntk import GramSet, MLPModel, contributions, gram_set, init_model, per_layer_gradients
from .specfun import (
    GegenbauerBasis,
    HermiteBasis,
    gauss_hermite_rule,
    gegenbauer_rule,
    harmonic_space_dim,
)
from .targets import (
    TargetFunction,
    gram_eigenvector,
    harmonic_2d,
    harmonic_highd,
    pca_sinusoid,
    radial_noise,
    sample_sphere,
)

__version__ = "0.1.0"
