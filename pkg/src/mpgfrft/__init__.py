"""Multiple-parameter fractional graph Fourier transforms.

Two families of fractional graph transforms (per-eigenvalue orders and
per-coefficient orders), their analytical gradients and training loops,
plus compression, denoising, and chaotic image encryption pipelines.
"""

from .errors import (
    ConstructionFailedError,
    DegenerateOrbitError,
    DegenerateSpectrumError,
    DivergedError,
    FormatError,
    InvalidKeyError,
    InvalidParameterError,
    MalformedCiphertextError,
    MpgfrftError,
    NotInvertibleError,
    ParseError,
    UndefinedMetricError,
    UnsupportedKindError,
    ZeroEigenvalueError,
)
from .graphs import (
    Graph,
    ShiftOperator,
    build_cycle_graph,
    build_knn_graph,
    build_random_sensor_graph,
    shift_operator,
)
from .spectral import (
    KIND_GFRFT,
    KIND_I,
    KIND_II,
    FractionalOperator,
    SpectralBasis,
    build_operator,
    cycle_shift_basis,
    gfrft,
    gft_basis,
    grad_mpgfrft_i,
    grad_mpgfrft_ii,
    inverse_apply,
    mpgfrft_i,
    mpgfrft_ii,
    type_ii_invertibility,
)
from .learn import (
    LearnResult,
    TrainConfig,
    train_compression_orders,
    train_order_and_filter,
    train_transform_layers,
)
from .compression import (
    AdaptedBasis,
    CompressionReport,
    block_compress_image,
    compress,
    compress_adapted,
    corr_coeff,
    grid_search_orders,
    nrms,
    relative_error,
    signal_adapted_basis,
    truncate_top,
)
from .denoise import (
    NoiseSpec,
    QualityReport,
    block_denoise_image,
    make_bandlimited_signal,
    make_structured_noise,
    psnr_db,
    snr_db,
    spectral_filter,
    ssim,
)
from .crypto import (
    ChaosKey,
    CipherKey,
    Ciphertext,
    adjacent_correlation,
    chaotic_permutation,
    decrypt_image,
    dna_decode,
    dna_encode,
    dna_xor,
    encrypt_image,
    logistic_sequence,
    sensitivity_sweep,
)
from .estimators import FractionalGraphTransformer, LearnedCompressor, SpectralDenoiser

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
