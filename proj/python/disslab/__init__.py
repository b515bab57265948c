"""Python access to the disslab library."""

from ._disslab import (
    DisslabError,
    __version__,
    checkerboard,
    config_hash,
    construction1,
    construction2,
    cutoffs,
    hm1_norm,
    low_pass,
    lp_analyze,
    lp_norm,
    mix,
    mix_stage,
    q_max,
    schedule,
    shell,
    shell_spectrum,
    weights,
)
