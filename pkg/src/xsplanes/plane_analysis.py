"""Plane structure of consecutive xorshift128+ output triples.

For a sign triple (p, q, r) and shift ``a`` the plane is

    z = (q + r * 2**a) * x + p * y   (mod 2**64).

Whenever the two MSB-level conditions A1 and A2 hold at depth ``n`` with
exactly one minus sign, the triple lies within ``4 * (2**(64-n) - 1)`` of
its plane. Residuals are signed representatives in [-2**63, 2**63).

Bulk routines take ``numpy.uint64`` arrays and rely on numpy's wrapping
uint64 arithmetic for everything mod 2**64.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from xsplanes.f2word import MASK64, WIDTH, msb_decompose, msb_keep
from xsplanes.generators import XorShift128Plus, xs_transition, XsState
from xsplanes.xor_arith import ALL_SIGNS, SignTriple, joint_closed_form

NOT_DERIVED = "no closed form"

DEFAULT_DEPTH = 5
_CHUNK = 1 << 20


def residual_bound(n):
    return 4 * ((1 << (WIDTH - n)) - 1)


def chance_fraction(n):
    """Chance that a uniform residual has |r| <= residual_bound(n)."""
    return Fraction(2 * residual_bound(n) + 1, 1 << WIDTH)


@dataclass(frozen=True)
class PlaneSpec:
    signs: SignTriple
    a: int

    @property
    def c1(self):
        p, q, r = self.signs
        return (q + r * (1 << self.a)) & MASK64

    @property
    def c2(self):
        return self.signs.p & MASK64

    @classmethod
    def all_for(cls, a):
        return [cls(s, a) for s in ALL_SIGNS]

    def __str__(self):
        p, q, r = self.signs
        coef = f"{'' if q == 1 else '-'}1{'+' if r == 1 else '-'}2^{self.a}"
        return f"z = ({coef})x {'+' if p == 1 else '-'} y"


def signed(v):
    """Map a residue mod 2**64 to [-2**63, 2**63)."""
    v &= MASK64
    return v - (1 << WIDTH) if v >> 63 else v


def plane_residual(x, y, z, plane):
    return signed(z - plane.c1 * x - plane.c2 * y)


def plane_residuals(x, y, z, plane):
    """Vectorized :func:`plane_residual`; returns int64."""
    r = z - np.uint64(plane.c1) * x - np.uint64(plane.c2) * y
    return r.view(np.int64)


def _check_depth(params, n):
    if not 1 <= n <= params.m:
        raise ValueError(f"depth n={n} must satisfy 1 <= n <= min(b, c) = {params.m}")


def conditions_hold(s_i, s_i1, params, n, signs):
    """Evaluate A1 and A2 for the state (s_i, s_{i+1}).

    A1: [s_{i+1}] ^ [s_i] ^ [s_i L^a] == p[s_{i+1}] + q[s_i] + r[s_i L^a]
    A2: the same with the state advanced by one step;
    all brackets are [.]_n and the sums are mod 2**64.
    """
    _check_depth(params, n)
    p, q, r = SignTriple(*signs).validate()
    s_i2 = xs_transition(XsState(s_i, s_i1), params).s1

    def holds(first, second):
        f = msb_keep(first, n)
        g = msb_keep(second, n)
        h = msb_keep((second << params.a) & MASK64, n)
        return (f ^ g ^ h) == (p * f + q * g + r * h) & MASK64

    return holds(s_i1, s_i), holds(s_i2, s_i1)


def _keep_mask(n):
    return np.uint64(MASK64 ^ ((1 << (WIDTH - n)) - 1))


def _xs_step_arr(s0, s1, params):
    t = s0 ^ (s0 << np.uint64(params.a))
    t ^= t >> np.uint64(params.b)
    return t ^ s1 ^ (s1 >> np.uint64(params.c))


def conditions_arrays(s0, s1, params, n, signs, s2=None):
    """Vectorized :func:`conditions_hold`; returns two bool arrays."""
    _check_depth(params, n)
    p, q, r = SignTriple(*signs).validate()
    if s2 is None:
        s2 = _xs_step_arr(s0, s1, params)
    keep = _keep_mask(n)
    sa = np.uint64(params.a)
    P, Q, R = (np.uint64(v & MASK64) for v in (p, q, r))

    def holds(first, second):
        f = first & keep
        g = second & keep
        h = (second << sa) & keep
        return (f ^ g ^ h) == P * f + Q * g + R * h

    return holds(s1, s0), holds(s2, s1)


def epsilons(s_i, s_i1, params, n):
    """The eight low-bit error terms of the residual decomposition.

    eps1..eps6 are Delta_n of s_{i+1}, s_i, s_i L^a, s_{i+2}, s_{i+1},
    s_{i+1} L^a; eps7 and eps8 are Delta_n of the two xor-combinations whose
    sum forms z.
    """
    _check_depth(params, n)
    a, b, c = params.a, params.b, params.c
    s_i2 = xs_transition(XsState(s_i, s_i1), params).s1
    rest = lambda u: msb_decompose(u & MASK64, n).rest  # noqa: E731

    def combo(first, second):
        t = second ^ ((second << a) & MASK64)
        t ^= t >> b
        return (first ^ (first >> c)) ^ t

    return (rest(s_i1), rest(s_i), rest(s_i << a), rest(s_i2), rest(s_i1),
            rest(s_i1 << a), rest(combo(s_i1, s_i)), rest(combo(s_i2, s_i1)))


def epsilon_residual(eps, signs):
    """-p(e1+e4) - q(e2+e5) - r(e3+e6) + e7 + e8 as a plain integer."""
    p, q, r = signs
    e1, e2, e3, e4, e5, e6, e7, e8 = eps
    return -p * (e1 + e4) - q * (e2 + e5) - r * (e3 + e6) + e7 + e8


def predicted_probability(n, signs):
    """Probability that A1 and A2 both hold for a uniform state.

    The top-n-bit words entering A1/A2 are (s_i, s_i L^a, s_{i+1},
    s_{i+1} L^a, s_{i+2}); relabelled as the (u, v, w, s, t) of the
    quadruple model, plane signs (p, q, r) become (q, r, p) there. Returns
    :data:`NOT_DERIVED` for sign patterns without a closed form.
    """
    if n < 1:
        raise ValueError(f"depth must be >= 1, got {n}")
    p, q, r = SignTriple(*signs).validate()
    model = SignTriple(q, r, p)
    if not model.two_plus_one_minus:
        return NOT_DERIVED
    return joint_closed_form(n, model)


@dataclass
class PlaneRow:
    plane: PlaneSpec
    predicted: object
    condition_count: int = 0
    max_abs_residual: int = 0
    violations: int = 0
    near_count: int = 0

    @property
    def admissible(self):
        return self.plane.signs.two_plus_one_minus


@dataclass
class ConcentrationReport:
    params: object
    seed: int
    samples: int
    n: int
    overlapping: bool
    rows: list = field(default_factory=list)

    @property
    def bound(self):
        return residual_bound(self.n)

    @property
    def compliant(self):
        return all(row.violations == 0 for row in self.rows if row.admissible)

    def frequency(self, row):
        return row.condition_count / self.samples

    def near_fraction(self, row):
        return row.near_count / self.samples

    def row_for(self, signs):
        for row in self.rows:
            if tuple(row.plane.signs) == tuple(signs):
                return row
        raise KeyError(signs)


def _triples_from_states(s0, s1, params):
    s2 = _xs_step_arr(s0, s1, params)
    s3 = _xs_step_arr(s1, s2, params)
    return s2, (s0 + s1, s1 + s2, s2 + s3)


def scan_concentration(params, seed, samples, n=DEFAULT_DEPTH, overlapping=False):
    """Stream ``samples`` output triples and tally every plane.

    Triples are (o_3m, o_3m+1, o_3m+2) by default and (o_m, o_m+1, o_m+2)
    when ``overlapping``. Condition frequencies and the residual bound are
    tracked for every sign triple; only the three one-minus patterns are
    covered by the bound, so violations are counted for those alone.
    Predictions need n <= a as well (the shifted top bits must not overlap
    the unshifted ones) and are left out otherwise.
    """
    _check_depth(params, n)
    if samples < 1:
        raise ValueError("need at least one sample")
    cap = np.uint64(min(residual_bound(n), MASK64))
    rows = []
    for plane in PlaneSpec.all_for(params.a):
        pred = predicted_probability(n, plane.signs) if n <= params.a else NOT_DERIVED
        rows.append(PlaneRow(plane, pred))
    gen = XorShift128Plus(params, seed)
    stride = 1 if overlapping else 3
    left = samples
    while left:
        size = min(left, _CHUNK)
        s0, s1 = gen.states(size, stride)
        s2, (x, y, z) = _triples_from_states(s0, s1, params)
        for row in rows:
            a1, a2 = conditions_arrays(s0, s1, params, n, row.plane.signs, s2)
            both = a1 & a2
            dist = abs_residuals(plane_residuals(x, y, z, row.plane))
            row.near_count += int(np.count_nonzero(dist <= cap))
            hit = dist[both]
            row.condition_count += int(hit.size)
            if hit.size:
                row.max_abs_residual = max(row.max_abs_residual, int(hit.max()))
                if row.admissible:
                    row.violations += int(np.count_nonzero(hit > cap))
        left -= size
    return ConcentrationReport(params=params, seed=seed, samples=samples, n=n,
                               overlapping=overlapping, rows=rows)


def abs_residuals(res):
    """|res| for int64 residuals, as uint64 so that -2**63 stays exact."""
    u = res.view(np.uint64)
    return np.where(res < 0, ~u + np.uint64(1), u)


def nearest_plane_distance(x, y, z, a):
    """Smallest |residual| over the eight planes (vectorized, uint64)."""
    best = None
    for plane in PlaneSpec.all_for(a):
        d = abs_residuals(plane_residuals(x, y, z, plane))
        best = d if best is None else np.minimum(best, d)
    return best
