"""Integer bitsets.

Python ints are used as arbitrary-width bitsets: bit ``i`` set means index
``i`` is a member.  Width is unbounded, so contexts with more than 64
objects or attributes simply use longer ints.
"""


def to_bits(indices):
    b = 0
    for i in indices:
        b |= 1 << i
    return b


def from_bits(bits):
    """Yield the set indices of ``bits`` in increasing order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def bit_list(bits):
    return list(from_bits(bits))


def full(n):
    return (1 << n) - 1


def lectic_key(bits, n):
    # attribute 0 is the most significant position in lectic order
    return int(format(bits, f"0{n}b")[::-1], 2) if n else 0
