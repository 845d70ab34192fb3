"""Steady rotational capillary-gravity waves on a doubly periodic lattice."""

from ._lortz import (  # noqa: F401
    ConfigError,
    LatticeSpec,
    NumericalError,
    OutOfRegimeError,
    __version__,
    c_star,
    classify,
    continue_branch,
    dump_config,
    ell,
    expand,
    kernel_scan,
    level_surface_q2,
    parse_config,
    tori_conditions,
)
