"""xorshift128+, its F2-linear output variant, seeding, and a control generator.

Both generator classes share one contract: ``next_u64()`` returns the next
64-bit output and ``fill(count)`` returns the next ``count`` outputs as a
``numpy.uint64`` array. Everything downstream (plane scans, point clouds,
Monte Carlo) only relies on that contract plus a ``label``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from xsplanes import _kernels
from xsplanes.f2word import MASK64, apply_shift

GOLDEN = _kernels.GOLDEN

# The eight parameter sets that pass TestU01, in the order they are usually listed.
PRESETS = (
    (23, 17, 26),
    (26, 19, 5),
    (23, 18, 5),
    (41, 11, 34),
    (23, 31, 18),
    (21, 23, 28),
    (21, 16, 37),
    (20, 21, 11),
)


@dataclass(frozen=True)
class XsParams:
    a: int
    b: int
    c: int

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 1 <= v <= 63:
                raise ValueError(f"shift {name} must be an integer in [1, 63], got {v!r}")

    @classmethod
    def recommended(cls, a, b, c):
        """Build one of the eight recommended triples; anything else is rejected."""
        if (a, b, c) not in PRESETS:
            raise ValueError(f"({a},{b},{c}) is not a recommended xorshift128+ parameter set")
        return cls(a, b, c)

    @classmethod
    def preset(cls, k):
        """Preset ``k`` in 1..8."""
        if not 1 <= k <= len(PRESETS):
            raise ValueError(f"preset index must be in 1..{len(PRESETS)}, got {k}")
        return cls(*PRESETS[k - 1])

    @property
    def m(self):
        return min(self.b, self.c)

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"


class XsState(NamedTuple):
    s0: int
    s1: int


def xs_transition(state, params):
    """s_{i+2} = s_i (I+L^a)(I+R^b) xor s_{i+1} (I+R^c)."""
    s0, s1 = state
    t = apply_shift(apply_shift(s0, "IL", params.a), "IR", params.b)
    return XsState(s1, t ^ apply_shift(s1, "IR", params.c))


def xs_next(state, params):
    """Return ``(o_i, next_state)`` with o_i = s_i + s_{i+1} mod 2**64."""
    return (state.s0 + state.s1) & MASK64, xs_transition(state, params)


def xs_linearized_next(state, params):
    """Same transition as :func:`xs_next`, output s_i xor s_{i+1}."""
    return state.s0 ^ state.s1, xs_transition(state, params)


def mix64(z):
    """The SplitMix64 finalizer: a bijective avalanche mixer on 64-bit words."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_state(seed):
    """Expand a 64-bit seed into an xorshift128+ state.

    ``s0 = mix64(seed)`` and ``s1 = mix64(s0)``. The mixer is a bijection
    fixing 0, so only ``seed == 0`` yields (0, 0); that state is replaced by
    ``(0, GOLDEN)``.
    """
    seed &= MASK64
    s0 = mix64(seed)
    s1 = mix64(s0)
    if s0 == 0 and s1 == 0:
        s1 = GOLDEN
    return XsState(s0, s1)


def seed_schedule(seed, count):
    """``count`` derived 64-bit seeds: the SplitMix64 stream started at ``seed``."""
    seed &= MASK64
    return [mix64((seed + (j + 1) * GOLDEN) & MASK64) for j in range(count)]


# Control generator: SplitMix64. A Weyl sequence pushed through mix64, so the
# output map is nonlinear over F2 and carries no plane structure.

def control_next(state):
    state = (state + GOLDEN) & MASK64
    return mix64(state), state


class XorShift128Plus:
    """Stateful xorshift128+ stream.

    With ``linear=True`` the outputs are s_i xor s_{i+1} instead of the sum.
    """

    def __init__(self, params, seed=0, state=None, linear=False):
        self.params = params
        self.linear = linear
        st = seed_state(seed) if state is None else XsState(*state)
        self._s0, self._s1 = st
        self.label = f"xorshift128+{params}" + (" linearized" if linear else "")

    @property
    def state(self):
        return XsState(self._s0, self._s1)

    def next_u64(self):
        step = xs_linearized_next if self.linear else xs_next
        out, st = step(self.state, self.params)
        self._s0, self._s1 = st
        return out

    def fill(self, count):
        p = self.params
        out, s0, s1 = _kernels.xs_fill(np.uint64(self._s0), np.uint64(self._s1),
                                       p.a, p.b, p.c, count, self.linear)
        self._s0, self._s1 = int(s0), int(s1)
        return out

    def states(self, count, stride=3):
        """States at the start of ``count`` windows ``stride`` steps apart.

        Advances the stream by ``count * stride`` steps.
        """
        p = self.params
        first, second, s0, s1 = _kernels.xs_states(
            np.uint64(self._s0), np.uint64(self._s1), p.a, p.b, p.c, count, stride)
        self._s0, self._s1 = int(s0), int(s1)
        return first, second


class ControlGenerator:
    """SplitMix64 stream used as the structure-free baseline."""

    label = "control"

    def __init__(self, seed=0):
        self.state = seed & MASK64

    def next_u64(self):
        out, self.state = control_next(self.state)
        return out

    def fill(self, count):
        out, st = _kernels.ctl_fill(np.uint64(self.state), count)
        self.state = int(st)
        return out


def lane_seeds(seed, lanes):
    """Seeds for ``lanes`` independent instances; one lane keeps ``seed`` itself."""
    if lanes < 1:
        raise ValueError("need at least one lane")
    return [seed & MASK64] if lanes == 1 else seed_schedule(seed, lanes)


class GenSpec(NamedTuple):
    """Which generator to run: ``params`` is None for the control."""

    params: XsParams | None

    @property
    def label(self):
        return "control" if self.params is None else f"xorshift128+{self.params}"

    def make(self, seed):
        if self.params is None:
            return ControlGenerator(seed)
        return XorShift128Plus(self.params, seed)

    def lane_arrays(self, seed, lanes):
        """Initial states of ``lanes`` instances as uint64 arrays for the kernels.

        Returns ``(state,)`` for the control and ``(s0, s1)`` for xorshift128+.
        """
        seeds = lane_seeds(seed, lanes)
        if self.params is None:
            return (np.array(seeds, dtype=np.uint64),)
        states = [seed_state(s) for s in seeds]
        return (np.array([st.s0 for st in states], dtype=np.uint64),
                np.array([st.s1 for st in states], dtype=np.uint64))


def parse_gen_spec(text):
    """Parse ``control``, ``xs:preset-K`` or ``xs:A,B,C``."""
    text = text.strip()
    if text == "control":
        return GenSpec(None)
    if text.startswith("xs:"):
        body = text[3:]
        if body.startswith("preset-"):
            return GenSpec(XsParams.preset(int(body[len("preset-"):])))
        parts = body.split(",")
        if len(parts) == 3:
            return GenSpec(XsParams(*(int(p) for p in parts)))
    raise ValueError(f"bad generator spec {text!r}; use control, xs:preset-K or xs:A,B,C")
