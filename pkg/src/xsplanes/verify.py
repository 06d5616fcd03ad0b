"""Self-checks behind ``xsplanes verify``.

Each check returns ``(ok, detail)``; :func:`run_all` prints one line per
check. Sizes are kept small enough for the whole run to finish in well
under a minute.
"""

import math
import random

import numpy as np

from xsplanes import f2word, plane_analysis as pa, xor_arith as xa
from xsplanes.generators import PRESETS, XorShift128Plus, XsParams, XsState, xs_next
from xsplanes.montecarlo import DEFAULT_REGION, lower_tail_pvalue


def check_shifts():
    ok = (f2word.apply_shift(1, "L", 23) == 0x800000
          and f2word.apply_shift(1, "IL", 23) == 0x800001
          and f2word.apply_shift(0x800001, "IR", 17) == 0x800041)
    out, st = xs_next(XsState(1, 0), XsParams(23, 17, 26))
    ok = ok and out == 1 and st == (0, 0x800041)
    return ok, "shift matrices and one xorshift128+ step"


def check_pairs():
    bad = []
    for n in range(1, 9):
        rep = xa.pair_counts(n)
        if rep.plain != xa.pair_closed_form(n) or rep.modular != xa.pair_closed_form(n, True):
            bad.append(n)
    u3, u4 = xa.pair_counts(3).plain.union, xa.pair_counts(4).plain.union
    return not bad and (u3, u4) == (58, 196), f"pair counts n=1..8, union(3)={u3}/64, union(4)={u4}/256"


def check_triples():
    bad = [(n, tuple(s), m) for n in range(1, 7) for s in xa.ALL_SIGNS for m in (False, True)
           if xa.triple_closed_form(n, s, m) is not None
           and xa.triple_count(n, s, m) != xa.triple_closed_form(n, s, m)]
    return not bad, "triple counts n=1..6: 4^n, 6^n, 4^n (modular 8*4^(n-1), 8*6^(n-1))"


def check_joint():
    bad = [(n, tuple(s)) for n in range(1, 6) for s in xa.ADMISSIBLE_SIGNS
           if xa.joint_condition_count(n, s)[1] != xa.joint_closed_form(n, s)]
    return not bad, "joint A1/A2 probabilities n=1..5 (exact rationals)"


def check_linearized(steps=10**5):
    bad = []
    for preset in PRESETS:
        p = XsParams(*preset)
        o = XorShift128Plus(p, seed=7, linear=True).fill(steps + 2)
        rhs = o[:-2] ^ (o[:-2] << np.uint64(p.a)) ^ o[1:-1]
        shift = np.uint64(64 - p.m)
        if not np.array_equal(o[2:] >> shift, rhs >> shift):
            bad.append(preset)
    return not bad, f"linearized recursion on top min(b,c) bits, {steps} steps x 8 presets"


def check_bound(samples=10**5):
    worst = 0
    for preset in PRESETS:
        p = XsParams(*preset)
        for n in sorted({2, 5, p.m}):
            rep = pa.scan_concentration(p, seed=11, samples=samples, n=n)
            worst += sum(r.violations for r in rep.rows if r.admissible)
    return worst == 0, f"conditional residual bound, {samples} triples x 8 presets x n in {{2,5,m}}: {worst} violations"


def check_epsilons(count=2000):
    rng = random.Random(5)
    p = XsParams(23, 17, 26)
    checked = 0
    for _ in range(count):
        s0, s1 = rng.getrandbits(64), rng.getrandbits(64)
        for signs in xa.ADMISSIBLE_SIGNS:
            a1, a2 = pa.conditions_hold(s0, s1, p, 5, signs)
            if not (a1 and a2):
                continue
            st = XsState(s0, s1)
            x, st = xs_next(st, p)
            y, st = xs_next(st, p)
            z, st = xs_next(st, p)
            res = pa.plane_residual(x, y, z, pa.PlaneSpec(signs, p.a))
            err = pa.epsilon_residual(pa.epsilons(s0, s1, p, 5), signs)
            if (res - err) % 2**64 != 0 or abs(err) > pa.residual_bound(5):
                return False, f"decomposition mismatch at state {(s0, s1)}"
            checked += 1
    return checked > 0, f"error-term decomposition reproduces {checked} residuals exactly"


def check_frequencies(samples=10**6, n=5):
    rep = pa.scan_concentration(XsParams(23, 17, 26), seed=3, samples=samples, n=n)
    worst = 0.0
    for row in rep.rows:
        if not row.admissible:
            continue
        prob = float(row.predicted)
        sigma = math.sqrt(prob * (1 - prob) / samples)
        worst = max(worst, abs(rep.frequency(row) - prob) / sigma)
    return worst <= 4, f"A1/A2 frequencies vs predictions at n={n}, worst {worst:.2f} sigma"


def check_pvalue():
    v = lower_tail_pvalue(10**6, 1, 1e-6)
    ok = abs(v - 2 * math.exp(-1)) < 1e-5 and lower_tail_pvalue(7_200_000_000_000, 5, DEFAULT_REGION.volume) == 0.0
    return ok, f"binomial lower tail: P(X<=1 | 1e6, 1e-6) = {v:.4f}"


CHECKS = [
    ("shifts", check_shifts),
    ("pairs", check_pairs),
    ("triples", check_triples),
    ("joint", check_joint),
    ("linearized", check_linearized),
    ("bound", check_bound),
    ("epsilons", check_epsilons),
    ("frequencies", check_frequencies),
    ("pvalue", check_pvalue),
]


def run_all(out):
    failures = 0
    for name, fn in CHECKS:
        ok, detail = fn()
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:<12} {detail}", file=out)
    print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed", file=out)
    return failures == 0
