from .composite import (
    ARCHITECTURES,
    MOD_DOT_CONV_COUNT,
    MOD_DOT_FC_COUNT,
    Cascade,
    ReconstructionModel,
    build_model,
    compose_e2e,
    compose_mod_dot,
)
from .networks import (
    NetworkSpec,
    build_bridge,
    build_data_ae,
    build_denoiser,
    build_signal_ae_conv,
    build_signal_ae_fc,
    conv_latent_shape,
)
