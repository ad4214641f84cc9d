"""Black-box post-processing attack toolkit.

Images are H x W x 3 float32 arrays in [0, 1]. Oracles are either spec
strings ("synthetic:composite", "remote:http://host:port") or callables
returning a fake probability.
"""

from ._fusionattack import (
    DECISION_THRESHOLD,
    AttackOutcome,
    BudgetExhausted,
    InvalidArgument,
    IoError,
    PostProcParams,
    ProtocolError,
    PsoConfig,
    TransportError,
    add_gaussian_noise,
    apply_fusion,
    apply_light_spot,
    compute_asr,
    gaussian_blur,
    jpeg_roundtrip,
    psnr,
    quantize8,
    read_png,
    run_attack,
    run_random_search,
    score,
    ssim,
    write_png,
)

__all__ = [name for name in dir() if not name.startswith("_")]
