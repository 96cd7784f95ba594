"""Gaussian-mixture transform coding toolkit.

Fits zero-mean Gaussian mixtures to correlated vector sources, builds a
shared eigenbasis dictionary, codes vectors as a lossless state label
plus reverse-waterfilled entropy-coded transform coefficients, and
evaluates the analytic rate-distortion bounds the scheme approaches.
"""

from .backend import BACKEND_NAME
from .channel import (
    ArrayConfig,
    MixtureSpec,
    PathGeometry,
    delay_vector,
    dft_eigensystem,
    geometry_covariance,
    steering_vector,
    synth_mixture_dataset,
)
from .codec import (
    EncodedBatch,
    EncodedBlock,
    EncoderConfig,
    allocation_for,
    count_encoder_flops,
    decode,
    decode_batch,
    encode,
    encode_batch,
    map_select,
    segment_vector,
    stack_real,
    tc_baseline_fit_encode,
)
from .coder import (
    Bitstream,
    SymbolModel,
    categorical_model,
    decode_symbols,
    discretized_gaussian_model,
    encode_symbols,
)
from .linalg import EigenSystem, FieldMode, hermitian_eig, sample_gaussian, \
    whiten_score
from .mixture import (
    EmConfig,
    MixtureModel,
    TransformDictionary,
    build_dictionary,
    dictionary_from_spec,
    em_fit,
    kmeans_energy_init,
    responsibilities,
)
from .rdtheory import (
    PooledSpectrum,
    RateAllocation,
    RdPoint,
    conditional_rd_curve,
    gmtc_upper_bound,
    label_entropy,
    label_overhead,
    mismatched_tc_distortion,
    solve_water_level,
    waterfill_at_level,
)

__version__ = "0.1.0"
