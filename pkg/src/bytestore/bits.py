"""Scalar bit kernels used by the scan and lookup inner loops.

All kernels operate on unsigned words (32-bit unless stated otherwise) held
in plain Python ints.  The bit loops below are the semantic contract; callers
may substitute hardware equivalents as long as outputs match bit for bit.
"""

from __future__ import annotations

WORD_BITS = 32
WORD_MASK = 0xFFFFFFFF

__all__ = [
    "pdep",
    "pext",
    "erase_rightmost",
    "propagate_rightmost",
    "popcount",
    "lowest_set_index",
]


def popcount(x: int) -> int:
    """Number of set bits in a nonnegative int."""
    return x.bit_count()


def pdep(src: int, mask: int) -> int:
    """Deposit the low bits of src into the set-bit positions of mask.

    The k-th lowest bit of src lands at the position of the k-th lowest set
    bit of mask; all other result bits are zero.
    """
    src &= WORD_MASK
    mask &= WORD_MASK
    out = 0
    k = 0
    while mask:
        low = mask & -mask
        if (src >> k) & 1:
            out |= low
        mask &= mask - 1
        k += 1
    return out


def pext(src: int, mask: int) -> int:
    """Extract the bits of src at the set-bit positions of mask.

    Inverse of pdep over the masked subspace: the bit of src at the k-th
    lowest set position of mask becomes bit k of the result.
    """
    src &= WORD_MASK
    mask &= WORD_MASK
    out = 0
    k = 0
    while mask:
        low = mask & -mask
        if src & low:
            out |= 1 << k
        mask &= mask - 1
        k += 1
    return out


def erase_rightmost(x: int) -> int:
    """Clear the lowest set bit: x AND (x - 1)."""
    if x == 0:
        return 0
    return x & (x - 1)


def propagate_rightmost(x: int, width: int = WORD_BITS) -> int:
    """Set every bit strictly above the lowest set bit, clearing the rest.

    Computed as x XOR -x in two's complement, truncated to the word width.
    Zero maps to zero.
    """
    limit = (1 << width) - 1
    if x == 0:
        return 0
    return (x ^ -x) & limit


def lowest_set_index(x: int, width: int = WORD_BITS) -> int:
    """0-based index of the lowest set bit, derived from propagate_rightmost."""
    if x == 0:
        raise ValueError("word has no set bit")
    return width - 1 - popcount(propagate_rightmost(x, width))
