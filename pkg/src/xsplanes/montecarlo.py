"""Hit-or-miss volume estimation over a box in [0,1)^3.

Box membership is decided on raw 64-bit outputs: ``o / 2**64 in [lo, hi)``
is rewritten as ``ceil(lo * 2**64) <= o <= ceil(hi * 2**64) - 1`` with exact
rationals, so no float rounding is involved.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special, stats

from xsplanes import _kernels
from xsplanes.f2word import WIDTH
from xsplanes.generators import seed_schedule

DEFAULT_LANES = 64
EXACT_MAX_N = 10**6
POISSON_MAX_MEAN = 10**6

# [0, 0.1/2^22) x [0, 0.1) x [0.45, 0.55)
DEFAULT_REGION_TEXT = "0,0.1/2^22,0,0.1,0.45,0.55"

_TOKEN = re.compile(r"\s*(\*\*|[*/^])\s*")


def parse_rational(text):
    """Exact value of a decimal/rational product such as ``0.1/2^22`` or ``3/4``."""
    parts = _TOKEN.split(text.strip())
    if not parts or parts[0] == "":
        raise ValueError(f"empty number in {text!r}")
    factors = [parts[0]]
    ops = []
    i = 1
    while i < len(parts):
        op, operand = parts[i], parts[i + 1]
        if op in ("^", "**"):
            factors[-1] = (factors[-1], operand)
        else:
            ops.append(op)
            factors.append(operand)
        i += 2

    def value(f):
        if isinstance(f, tuple):
            base, exp = f
            e = int(exp)
            return value(base) ** e
        return Fraction(f)

    try:
        result = value(factors[0])
        for op, f in zip(ops, factors[1:]):
            result = result * value(f) if op == "*" else result / value(f)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse {text!r} as a rational: {exc}") from None
    return result


@dataclass(frozen=True)
class BoxRegion:
    """Half-open box [x0,x1) x [y0,y1) x [z0,z1) with exact rational bounds."""

    bounds: tuple  # ((lo, hi), (lo, hi), (lo, hi)) as Fractions

    def __post_init__(self):
        if len(self.bounds) != 3:
            raise ValueError("a box needs three intervals")
        for lo, hi in self.bounds:
            if not 0 <= lo <= hi <= 1:
                raise ValueError(f"interval [{lo}, {hi}) must satisfy 0 <= lo <= hi <= 1")

    @classmethod
    def parse(cls, text):
        vals = [parse_rational(v) for v in text.split(",")]
        if len(vals) != 6:
            raise ValueError(f"region needs six bounds x0,x1,y0,y1,z0,z1; got {len(vals)}")
        return cls(tuple((vals[i], vals[i + 1]) for i in (0, 2, 4)))

    @property
    def volume(self):
        return math.prod(hi - lo for lo, hi in self.bounds)

    def word_limits(self):
        """Inclusive integer limits per axis, or None if the box holds no word."""
        lo_w, hi_w = [], []
        scale = 1 << WIDTH
        for lo, hi in self.bounds:
            lo_i = math.ceil(lo * scale)
            hi_i = math.ceil(hi * scale) - 1
            if lo_i > hi_i:
                return None
            lo_w.append(lo_i)
            hi_w.append(hi_i)
        return np.array(lo_w, dtype=np.uint64), np.array(hi_w, dtype=np.uint64)

    def contains_words(self, x, y, z):
        """Exact membership for raw words (Python ints)."""
        scale = 1 << WIDTH
        return all(lo * scale <= o < hi * scale for o, (lo, hi) in zip((x, y, z), self.bounds))

    def __str__(self):
        return " x ".join(f"[{float(lo):.7g}, {float(hi):.7g})" for lo, hi in self.bounds)


DEFAULT_REGION = BoxRegion.parse(DEFAULT_REGION_TEXT)


def box_hits(gen_spec, seed, region, n, lanes=DEFAULT_LANES):
    """Count how many of ``n`` non-overlapping output triples land in ``region``.

    The triples come from ``lanes`` independent instances (see
    :meth:`GenSpec.lane_arrays`), lane ``j`` contributing ``n // lanes``
    triples plus one more when ``j < n % lanes``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    limits = region.word_limits()
    if limits is None:
        return 0
    lo, hi = limits
    lanes = max(1, min(lanes, n))
    state = gen_spec.lane_arrays(seed, lanes)
    rounds, extra = divmod(n, lanes)
    if gen_spec.params is None:
        return int(_kernels.ctl_box_hits(state[0], rounds, extra, lo, hi))
    p = gen_spec.params
    return int(_kernels.xs_box_hits(state[0], state[1], p.a, p.b, p.c, rounds, extra, lo, hi))


def _binomial_cdf_exact(n, h, p):
    """Sum of binomial terms; sums the shorter tail to keep precision.

    Terms come from a ratio recurrence started in log space; the upper
    tail stops once terms fall below 1e-18 of the running sum.
    """
    logp, logq = math.log(p), math.log1p(-p)
    odds = p / (1.0 - p)

    def start(i):
        return math.exp(math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)
                        + i * logp + (n - i) * logq)

    if h < n * p:
        # walk down from h; terms shrink towards 0
        t = start(h)
        terms = [t]
        for i in range(h, 0, -1):
            t *= i / ((n - i + 1) * odds)
            terms.append(t)
            if t <= 1e-18 * terms[0]:
                break
        return math.fsum(terms)
    t = start(h + 1) if h < n else 0.0
    terms = [t]
    for i in range(h + 1, n):
        t *= (n - i) / (i + 1) * odds
        terms.append(t)
        if t <= 1e-18 * terms[0] or t == 0.0:
            break
    return 1.0 - math.fsum(terms)


def poisson_cdf(h, lam):
    """P(X <= h) for X ~ Poisson(lam), via the regularized upper gamma function."""
    return float(special.gammaincc(h + 1, lam))


def lower_tail_pvalue(n, h, p):
    """P(X <= h) for X ~ Binomial(n, p).

    n <= 10**6: direct sum of binomial terms. Larger n with n*p <= 10**6:
    Poisson(n*p); the absolute error of that substitution is at most
    min(p, n*p**2) (total variation bound). Anything else falls back to
    scipy's incomplete-beta evaluation.
    """
    if n < 1 or not 0 <= h <= n:
        raise ValueError(f"need 0 <= h <= n and n >= 1, got n={n}, h={h}")
    p = float(p)
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if h == n:
        return 1.0
    if n <= EXACT_MAX_N:
        v = _binomial_cdf_exact(n, h, p)
    elif n * p <= POISSON_MAX_MEAN:
        v = poisson_cdf(h, n * p)
    else:
        v = float(stats.binom.cdf(h, n, p))
    return min(1.0, max(0.0, v))


@dataclass
class McReport:
    label: str
    seed: int
    n: int
    hits: int
    volume: Fraction

    @property
    def estimate(self):
        return self.hits / self.n

    @property
    def expected(self):
        return self.n * float(self.volume)

    @property
    def pvalue(self):
        return lower_tail_pvalue(self.n, self.hits, self.volume)


def mc_report(gen_spec, region, n, repeats=3, seed=0, lanes=DEFAULT_LANES):
    """``repeats`` independent runs; run ``r`` uses ``seed_schedule(seed, repeats)[r]``."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if not 0 < region.volume < 1:
        raise ValueError("region volume must lie strictly between 0 and 1")
    reports = []
    for run_seed in seed_schedule(seed, repeats):
        hits = box_hits(gen_spec, run_seed, region, n, lanes)
        reports.append(McReport(gen_spec.label, run_seed, n, hits, region.volume))
    return reports


def _ordinal(k):
    return {1: "1st", 2: "2nd", 3: "3rd"}.get(k, f"{k}th")


def format_table(reports, region=None):
    """Plain-text table with one column per run: hits, volume estimate, p-value."""
    if not reports:
        return ""
    head = [reports[0].label] + [_ordinal(i + 1) for i in range(len(reports))]
    rows = [
        ["# of points"] + [str(r.hits) for r in reports],
        ["volume"] + [f"{r.estimate:.6e}" for r in reports],
        ["p-value"] + [f"{r.pvalue:.2g}" for r in reports],
        ["seed"] + [f"{r.seed:#018x}" for r in reports],
    ]
    widths = [max(len(row[i]) for row in [head] + rows) for i in range(len(head))]
    fmt = lambda row: " | ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip()  # noqa: E731
    lines = []
    r0 = reports[0]
    if region is not None:
        lines.append(f"region {region}, exact volume {float(r0.volume):.6e}")
    lines.append(f"N = {r0.n} triples per run, expected hits {r0.expected:.4g}")
    lines.append(fmt(head))
    lines.append("-+-".join("-" * w for w in widths))
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines) + "\n"


def format_csv(reports):
    lines = ["generator,run,seed,n,hits,volume_estimate,exact_volume,pvalue"]
    for i, r in enumerate(reports, 1):
        lines.append(f"{r.label},{i},{r.seed},{r.n},{r.hits},{r.estimate:.17g},"
                     f"{float(r.volume):.17g},{r.pvalue:.17g}")
    return "\n".join(lines) + "\n"
