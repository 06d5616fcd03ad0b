"""xorshift128+ generators and tools for measuring their plane structure."""

from xsplanes.f2word import MASK64, apply_shift, msb_decompose, msb_eq
from xsplanes.generators import (
    PRESETS,
    ControlGenerator,
    XorShift128Plus,
    XsParams,
    XsState,
    control_next,
    seed_state,
    xs_linearized_next,
    xs_next,
)

__all__ = [
    "MASK64",
    "PRESETS",
    "ControlGenerator",
    "XorShift128Plus",
    "XsParams",
    "XsState",
    "apply_shift",
    "control_next",
    "msb_decompose",
    "msb_eq",
    "seed_state",
    "xs_linearized_next",
    "xs_next",
]
