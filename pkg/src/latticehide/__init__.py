"""Lattice-based minimum-distortion data hiding.

Nested-lattice coset coding, QIM and MD-QIM embedding, distortion theory
with independent oracles, signal I/O for CSV and WFDB format-212 records,
and a reproducible simulation harness with a CLI front end.
"""

__version__ = "0.1.0"

from .lattices import (  # noqa: F401
    Lattice,
    LatticeGeometry,
    LatticePoint,
    checkerboard_d4,
    estimate_second_moment_mc,
    from_generator,
    from_name,
    geometry,
    gosset_e8,
    hexagonal_a2,
    integer_lattice,
    nearest_point,
    nearest_point_exhaustive,
    nearest_points,
)
from .coset import (  # noqa: F401
    NestedCode,
    build_general,
    build_self_similar,
    parse_code_spec,
    rep_to_index,
)
from .embed import (  # noqa: F401
    DecodeOutcome,
    EmbedOutcome,
    decode,
    default_epsilon,
    embed_blocks,
    decode_blocks,
    embed_stream,
    extract_stream,
    mdqim_embed,
    qim_embed,
)
from .analysis import (  # noqa: F401
    AttackModel,
    MetricsReport,
    TheoryReport,
    awgn_attack,
    distortion_saving_mc,
    mdqim_mse_exact_scalar,
    mdqim_mse_lower_bound,
    message_error_rate,
    metrics,
    mse,
    prd,
    psnr,
    qim_mse_theoretical,
)
from .simulate import ExperimentConfig, run_simulation, run_sweep  # noqa: F401
