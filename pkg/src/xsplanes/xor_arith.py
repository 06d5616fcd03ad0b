"""When does xor agree with a signed sum?

Exact predicates on pairs and triples of n-bit integers, exhaustive counters
and the closed forms those counts must match. Every predicate is computed
twice: once arithmetically and once from its digitwise characterization,
and the two must agree.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

PAIR_MAX_N = 12
TRIPLE_MAX_N = 8
QUAD_MAX_N = 6

PAIR_RELATIONS = ("sum", "sub", "rsub")


class CapacityError(ValueError):
    """Requested exhaustive enumeration is too large."""


class UnsupportedSigns(ValueError):
    """Sign pattern has no closed form in this analysis."""


class SignTriple(NamedTuple):
    p: int
    q: int
    r: int

    def validate(self):
        if any(s not in (1, -1) for s in self):
            raise ValueError(f"signs must be +1 or -1, got {tuple(self)}")
        return self

    @property
    def minus_count(self):
        return sum(1 for s in self if s == -1)

    @property
    def two_plus_one_minus(self):
        return self.minus_count == 1

    def __str__(self):
        return "(" + ",".join("+1" if s == 1 else "-1" for s in self) + ")"


ALL_SIGNS = tuple(SignTriple(p, q, r) for p in (1, -1) for q in (1, -1) for r in (1, -1))
ADMISSIBLE_SIGNS = (SignTriple(-1, 1, 1), SignTriple(1, -1, 1), SignTriple(1, 1, -1))


def parse_signs(text):
    """``"-1,1,1"`` or ``"-++"`` to a :class:`SignTriple`."""
    text = text.strip()
    if len(text) == 3 and set(text) <= {"+", "-"}:
        vals = [1 if ch == "+" else -1 for ch in text]
    else:
        vals = [int(v) for v in text.split(",")]
    if len(vals) != 3:
        raise ValueError(f"need three signs, got {text!r}")
    return SignTriple(*vals).validate()


def _check_operands(n, *vals):
    if not 1 <= n <= 64:
        raise ValueError(f"bit width must be in [1, 64], got {n}")
    for v in vals:
        if not 0 <= v < (1 << n):
            raise ValueError(f"{v} is not an {n}-bit unsigned integer")


# -- pairs -------------------------------------------------------------------

def _pair_rhs(x, y, rel):
    if rel == "sum":
        return x + y
    if rel == "sub":
        return x - y
    if rel == "rsub":
        return y - x
    raise ValueError(f"unknown relation {rel!r}; expected one of {PAIR_RELATIONS}")


# bit pairs (x_i, y_i) forbidden for each relation
_PAIR_FORBIDDEN = {"sum": (1, 1), "sub": (0, 1), "rsub": (1, 0)}


def pair_digitwise(x, y, n, rel, modular=False):
    """Digit test: no forbidden bit pair at positions 1..n (1..n-1 if modular)."""
    fx, fy = _PAIR_FORBIDDEN[rel]
    top = n - 1 if modular else n
    for i in range(top):
        if ((x >> i) & 1, (y >> i) & 1) == (fx, fy):
            return False
    return True


def pair_relation(x, y, n, rel, modular=False):
    """Does x xor y equal x+y (``sum``), x-y (``sub``) or y-x (``rsub``)?

    Without ``modular`` the right side is an unbounded integer, so a negative
    difference never matches. With ``modular`` both sides are taken mod 2**n.
    """
    _check_operands(n, x, y)
    rhs = _pair_rhs(x, y, rel)
    if modular:
        rhs %= 1 << n
    ok = (x ^ y) == rhs
    if ok != pair_digitwise(x, y, n, rel, modular):
        raise AssertionError(f"digitwise test disagrees for x={x}, y={y}, n={n}, {rel}")
    return ok


@dataclass(frozen=True)
class SetCounts:
    a: int
    b: int
    c: int
    ab: int
    bc: int
    ca: int
    abc: int
    union: int

    def inclusion_exclusion_ok(self):
        return self.union == (self.a + self.b + self.c - self.ab - self.bc - self.ca + self.abc)


@dataclass(frozen=True)
class PairCountReport:
    """Counts over all 4**n pairs; ``plain`` is A, B, C and ``modular`` is A', B', C'."""

    n: int
    total: int
    plain: SetCounts
    modular: SetCounts


def pair_closed_form(n, modular=False):
    if modular:
        return SetCounts(a=4 * 3 ** (n - 1), b=4 * 3 ** (n - 1), c=4 * 3 ** (n - 1),
                         ab=4 * 2 ** (n - 1), bc=4 * 2 ** (n - 1), ca=4 * 2 ** (n - 1),
                         abc=4, union=4 * (3 * 3 ** (n - 1) - 3 * 2 ** (n - 1) + 1))
    return SetCounts(a=3 ** n, b=3 ** n, c=3 ** n, ab=2 ** n, bc=2 ** n, ca=2 ** n,
                     abc=1, union=3 * 3 ** n - 3 * 2 ** n + 1)


def _set_counts(ina, inb, inc):
    return SetCounts(
        a=int(ina.sum()), b=int(inb.sum()), c=int(inc.sum()),
        ab=int((ina & inb).sum()), bc=int((inb & inc).sum()), ca=int((inc & ina).sum()),
        abc=int((ina & inb & inc).sum()), union=int((ina | inb | inc).sum()),
    )


def pair_counts(n):
    """Exhaustively count A, B, C and A', B', C' with all intersections."""
    if not 1 <= n <= PAIR_MAX_N:
        raise CapacityError(f"pair enumeration supports 1 <= n <= {PAIR_MAX_N}, got {n}")
    size = 1 << n
    mask = size - 1
    x = np.arange(size, dtype=np.int64)[:, None]
    y = np.arange(size, dtype=np.int64)[None, :]
    plain = np.zeros(8, dtype=np.int64)
    modular = np.zeros(8, dtype=np.int64)
    rows = max(1, (1 << 22) // size)
    for start in range(0, size, rows):
        xs = x[start:start + rows]
        xor = xs ^ y
        s, d = xs + y, xs - y
        ina, inb, inc = xor == s, xor == d, xor == -d
        plain += np.array(list(_set_counts(ina, inb, inc).__dict__.values()))
        ina, inb, inc = xor == (s & mask), xor == (d & mask), xor == (-d & mask)
        modular += np.array(list(_set_counts(ina, inb, inc).__dict__.values()))
    return PairCountReport(n=n, total=size * size,
                           plain=SetCounts(*map(int, plain)),
                           modular=SetCounts(*map(int, modular)))


# -- triples -----------------------------------------------------------------

def triple_digitwise(u, v, w, signs, n, modular=False):
    """p*u_i + q*v_i + r*w_i in {0, 1} for i = 1..n (1..n-1 if modular)."""
    p, q, r = signs
    top = n - 1 if modular else n
    for i in range(top):
        d = p * ((u >> i) & 1) + q * ((v >> i) & 1) + r * ((w >> i) & 1)
        if d not in (0, 1):
            return False
    return True


def triple_relation(u, v, w, signs, n, modular=False):
    """Does u xor v xor w equal p*u + q*v + r*w (mod 2**n if ``modular``)?

    The digitwise characterization is checked alongside, except for the
    all-minus pattern in modular mode: there a position can borrow 2, so
    the digit test does not characterize the equality.
    """
    signs = SignTriple(*signs).validate()
    _check_operands(n, u, v, w)
    p, q, r = signs
    rhs = p * u + q * v + r * w
    if modular:
        rhs %= 1 << n
    ok = (u ^ v ^ w) == rhs
    if not (modular and signs.minus_count == 3):
        if ok != triple_digitwise(u, v, w, signs, n, modular):
            raise AssertionError(
                f"digitwise test disagrees for {(u, v, w)}, signs {tuple(signs)}, n={n}")
    return ok


def triple_closed_form(n, signs, modular=False):
    """Closed-form count of satisfying triples, or None when not derived.

    The count is (digits allowed per position)**n, with the top position
    free (8 choices) in modular mode.
    """
    signs = SignTriple(*signs).validate()
    per_digit = {0: 4, 1: 6, 2: 4}.get(signs.minus_count)
    if per_digit is None:
        return None
    if modular:
        return 8 * per_digit ** (n - 1)
    return per_digit ** n


def triple_count(n, signs, modular=False):
    if not 1 <= n <= TRIPLE_MAX_N:
        raise CapacityError(f"triple enumeration supports 1 <= n <= {TRIPLE_MAX_N}, got {n}")
    p, q, r = SignTriple(*signs).validate()
    size = 1 << n
    vw = np.arange(size, dtype=np.int64)
    v = vw[:, None]
    w = vw[None, :]
    base = q * v + r * w
    vxw = v ^ w
    total = 0
    for u in range(size):
        rhs = p * u + base
        if modular:
            rhs = rhs & (size - 1)
        total += int(np.count_nonzero((u ^ vxw) == rhs))
    return total


# -- quadruples --------------------------------------------------------------

def joint_closed_form(n, signs):
    """Probability that A1 and A2 both hold for uniform n-bit u, v, w, s.

    (5/8)**(n-1) for (-1,1,1); (1/2)**(n-1) for (1,-1,1) and (1,1,-1).
    The last value comes out of exhaustive enumeration (see
    :func:`joint_condition_count`).
    """
    signs = SignTriple(*signs).validate()
    if not signs.two_plus_one_minus:
        raise UnsupportedSigns(f"no closed form for signs {tuple(signs)}")
    base = Fraction(5, 8) if signs == (-1, 1, 1) else Fraction(1, 2)
    return base ** (n - 1)


def joint_condition_count(n, signs):
    """Count quadruples (u, v, w, s) of n-bit integers where both

    A1: u^v^w == p*u + q*v + r*w  (mod 2**n)
    A2: w^s^t == p*w + q*s + r*t  (mod 2**n),  t = u^v^w

    hold. Returns ``(count, Fraction(count, 16**n))``.
    """
    if not 1 <= n <= QUAD_MAX_N:
        raise CapacityError(f"quadruple enumeration supports 1 <= n <= {QUAD_MAX_N}, got {n}")
    signs = SignTriple(*signs).validate()
    if not signs.two_plus_one_minus:
        raise UnsupportedSigns(f"signs {tuple(signs)} are outside the two-plus-one-minus cases")
    p, q, r = signs
    size = 1 << n
    mask = size - 1
    vals = np.arange(size, dtype=np.int64)
    v = vals[:, None, None]
    w = vals[None, :, None]
    s = vals[None, None, :]
    count = 0
    for u in range(size):
        t = u ^ v ^ w
        a1 = t == ((p * u + q * v + r * w) & mask)
        a2 = (w ^ s ^ t) == ((p * w + q * s + r * t) & mask)
        count += int(np.count_nonzero(a1 & a2))
    return count, Fraction(count, size ** 4)
