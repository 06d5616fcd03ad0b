"""64-bit word algebra.

A word is a plain Python ``int`` in ``[0, 2**64)``. It is read both as an
integer mod 2**64 and as a row vector over F2; bit 1 is the least
significant bit and bit 64 the most significant one, so bit ``i`` carries
the coefficient of ``2**(i-1)``.
"""

from typing import NamedTuple

WIDTH = 64
MASK64 = (1 << WIDTH) - 1

SHIFT_KINDS = ("L", "R", "IL", "IR")


def _check_word(u):
    if not 0 <= u <= MASK64:
        raise ValueError(f"not a 64-bit word: {u!r}")


def _check_depth(n):
    if not 1 <= n <= WIDTH:
        raise ValueError(f"MSB depth must be in [1, 64], got {n}")


def apply_shift(u, kind, amount):
    """Multiply ``u`` by one of the shift matrices ``L^a``, ``R^b``,
    ``I+L^a`` or ``I+R^b`` (kinds ``"L"``, ``"R"``, ``"IL"``, ``"IR"``).
    """
    _check_word(u)
    if not 0 <= amount <= WIDTH:
        raise ValueError(f"shift amount must be in [0, 64], got {amount}")
    if kind == "L":
        return (u << amount) & MASK64
    if kind == "R":
        return u >> amount
    if kind == "IL":
        return u ^ ((u << amount) & MASK64)
    if kind == "IR":
        return u ^ (u >> amount)
    raise ValueError(f"unknown shift kind {kind!r}; expected one of {SHIFT_KINDS}")


class MsbDecomposition(NamedTuple):
    """``kept`` is [u]_n, ``top`` is (u)_n and ``rest`` is Delta_n(u)."""

    kept: int
    top: int
    rest: int
    n: int


def msb_decompose(u, n):
    _check_word(u)
    _check_depth(n)
    low_bits = WIDTH - n
    rest = u & ((1 << low_bits) - 1)
    kept = u - rest
    return MsbDecomposition(kept=kept, top=kept >> low_bits, rest=rest, n=n)


def msb_keep(u, n):
    """[u]_n: the top ``n`` bits of ``u`` with the rest zeroed."""
    _check_depth(n)
    return u & ~((1 << (WIDTH - n)) - 1) & MASK64


def msb_eq(u, v, n):
    """True iff the ``n`` most significant bits of ``u`` and ``v`` agree."""
    _check_word(u)
    _check_word(v)
    _check_depth(n)
    return (u >> (WIDTH - n)) == (v >> (WIDTH - n))


def to_unit(u):
    """Round ``u / 2**64`` to the nearest double."""
    return u / 2.0**64
