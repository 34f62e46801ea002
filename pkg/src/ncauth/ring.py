"""Arithmetic for the concrete non-commutative ring M_d(Z_q).

Elements are d x d matrices with entries reduced mod q, stored as flat
row-major tuples. Everything is immutable and every operation is a pure
function, so elements can be shared freely between threads. Scalar
multiplication (k)r is the k-fold additive self-sum, which in
characteristic q collapses to (k mod q) * r entrywise.

The canonical byte encoding (see ``encode_element``) is the single
source of truth for hashing and for the wire: 4-byte big-endian entries,
which is why the modulus is capped below 2^31.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from random import Random

ENCODING_MAGIC = b"NCRE"
ENCODING_VERSION = 1
DIGEST_SIZE = 32
MODULUS_LIMIT = 1 << 31  # entries travel as 4-byte big-endian words
MAX_DIMENSION = 255  # dimension travels as a single byte


class RingError(ValueError):
    """Base class for ring-level failures."""


class DescriptorMismatchError(RingError):
    """Two elements from incompatible rings were combined."""


class ElementEncodingError(RingError):
    """Canonical element bytes are malformed."""


@dataclass(frozen=True)
class RingDescriptor:
    """Shape of a matrix ring: dimension d and entry modulus q."""

    dimension: int
    modulus: int

    def __post_init__(self):
        if self.dimension < 2:
            raise RingError(
                f"dimension must be >= 2 for a non-commutative ring, got {self.dimension}"
            )
        if self.dimension > MAX_DIMENSION:
            raise RingError(f"dimension must be <= {MAX_DIMENSION}, got {self.dimension}")
        if not 2 <= self.modulus < MODULUS_LIMIT:
            raise RingError(
                f"modulus must satisfy 2 <= q < 2**31, got {self.modulus}"
            )

    @property
    def encoded_length(self) -> int:
        """Byte length of a canonically encoded element: 10 + 4*d^2."""
        return 10 + 4 * self.dimension * self.dimension


@dataclass(frozen=True)
class DigestValue:
    """A 32-byte hash digest (the message space of the hash H: R -> M)."""

    value: bytes

    def __post_init__(self):
        if len(self.value) != DIGEST_SIZE:
            raise RingError(f"digest must be exactly {DIGEST_SIZE} bytes, got {len(self.value)}")

    def hex(self) -> str:
        return self.value.hex()


# -- flat-tuple kernels -------------------------------------------------
#
# Hot paths (the statistical experiments run millions of rounds) work on
# bare tuples; d=2 and d=3 are unrolled. Python ints never overflow, so
# no intermediate-width concerns.

def _mul_flat(a, b, d, q):
    if d == 2:
        a0, a1, a2, a3 = a
        b0, b1, b2, b3 = b
        return (
            (a0 * b0 + a1 * b2) % q,
            (a0 * b1 + a1 * b3) % q,
            (a2 * b0 + a3 * b2) % q,
            (a2 * b1 + a3 * b3) % q,
        )
    if d == 3:
        a0, a1, a2, a3, a4, a5, a6, a7, a8 = a
        b0, b1, b2, b3, b4, b5, b6, b7, b8 = b
        return (
            (a0 * b0 + a1 * b3 + a2 * b6) % q,
            (a0 * b1 + a1 * b4 + a2 * b7) % q,
            (a0 * b2 + a1 * b5 + a2 * b8) % q,
            (a3 * b0 + a4 * b3 + a5 * b6) % q,
            (a3 * b1 + a4 * b4 + a5 * b7) % q,
            (a3 * b2 + a4 * b5 + a5 * b8) % q,
            (a6 * b0 + a7 * b3 + a8 * b6) % q,
            (a6 * b1 + a7 * b4 + a8 * b7) % q,
            (a6 * b2 + a7 * b5 + a8 * b8) % q,
        )
    out = []
    for i in range(d):
        row = a[i * d : i * d + d]
        for j in range(d):
            s = 0
            for k in range(d):
                s += row[k] * b[k * d + j]
            out.append(s % q)
    return tuple(out)


def _add_flat(a, b, q):
    return tuple((x + y) % q for x, y in zip(a, b))


def _scale_flat(k, a, q):
    k %= q
    return tuple((k * x) % q for x in a)


def _identity_flat(d):
    return tuple(1 if i % (d + 1) == 0 else 0 for i in range(d * d))


def _pow_flat(a, e, d, q):
    result = _identity_flat(d)
    base = a
    while e:
        if e & 1:
            result = _mul_flat(result, base, d, q)
        base = _mul_flat(base, base, d, q)
        e >>= 1
    return result


def _sandwich_flat(z, m, x, n, d, q):
    """z^m * x * z^n on flat tuples; shares the z^min(m,n) prefix."""
    lo, hi = (m, n) if m <= n else (n, m)
    zlo = _pow_flat(z, lo, d, q)
    zhi = _mul_flat(zlo, _pow_flat(z, hi - lo, d, q), d, q) if hi > lo else zlo
    zm, zn = (zlo, zhi) if m <= n else (zhi, zlo)
    return _mul_flat(_mul_flat(zm, x, d, q), zn, d, q)


class RingElement:
    """An immutable element of M_d(Z_q).

    Supports ``+``, ``*`` and ``**`` with the obvious meanings; mixing
    elements from different descriptors raises DescriptorMismatchError.
    """

    __slots__ = ("descriptor", "entries")

    def __init__(self, descriptor: RingDescriptor, entries):
        q = descriptor.modulus
        ent = tuple(int(e) % q for e in entries)
        if len(ent) != descriptor.dimension * descriptor.dimension:
            raise RingError(
                f"expected {descriptor.dimension ** 2} entries, got {len(ent)}"
            )
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "entries", ent)

    def __setattr__(self, name, value):
        raise AttributeError("RingElement is immutable")

    @classmethod
    def from_rows(cls, descriptor: RingDescriptor, rows) -> "RingElement":
        flat = [e for row in rows for e in row]
        return cls(descriptor, flat)

    @classmethod
    def _wrap(cls, descriptor, flat):
        # internal fast path: flat is already reduced
        obj = object.__new__(cls)
        object.__setattr__(obj, "descriptor", descriptor)
        object.__setattr__(obj, "entries", flat)
        return obj

    def rows(self) -> tuple:
        d = self.descriptor.dimension
        return tuple(self.entries[i * d : i * d + d] for i in range(d))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def _check_compatible(self, other: "RingElement"):
        if self.descriptor != other.descriptor:
            raise DescriptorMismatchError(
                f"incompatible ring parameters: {self.descriptor} vs {other.descriptor}"
            )

    def __add__(self, other: "RingElement") -> "RingElement":
        self._check_compatible(other)
        return RingElement._wrap(
            self.descriptor, _add_flat(self.entries, other.entries, self.descriptor.modulus)
        )

    def __mul__(self, other: "RingElement") -> "RingElement":
        self._check_compatible(other)
        d = self.descriptor.dimension
        return RingElement._wrap(
            self.descriptor, _mul_flat(self.entries, other.entries, d, self.descriptor.modulus)
        )

    def __pow__(self, exponent: int) -> "RingElement":
        if exponent < 0:
            raise RingError(f"exponent must be >= 0, got {exponent}")
        d = self.descriptor.dimension
        return RingElement._wrap(
            self.descriptor, _pow_flat(self.entries, exponent, d, self.descriptor.modulus)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.descriptor == other.descriptor and self.entries == other.entries

    def __hash__(self):
        return hash((self.descriptor, self.entries))

    def __repr__(self):
        return f"RingElement(d={self.descriptor.dimension}, q={self.descriptor.modulus}, {list(self.rows())})"


def zero(descriptor: RingDescriptor) -> RingElement:
    return RingElement._wrap(descriptor, (0,) * descriptor.dimension ** 2)


def one(descriptor: RingDescriptor) -> RingElement:
    return RingElement._wrap(descriptor, _identity_flat(descriptor.dimension))


def scalar_mul(k: int, r: RingElement) -> RingElement:
    """(k)r, the k-fold additive self-sum; (0)r is the zero element."""
    if k < 0:
        raise RingError(f"scalar multiplier must be >= 0, got {k}")
    return RingElement._wrap(
        r.descriptor, _scale_flat(k, r.entries, r.descriptor.modulus)
    )


def sandwich(z: RingElement, m: int, x: RingElement, n: int) -> RingElement:
    """z^m * x * z^n, the decomposition pattern every protocol value uses."""
    z._check_compatible(x)
    if m < 0 or n < 0:
        raise RingError(f"exponents must be >= 0, got m={m}, n={n}")
    d = z.descriptor.dimension
    return RingElement._wrap(
        z.descriptor, _sandwich_flat(z.entries, m, x.entries, n, d, z.descriptor.modulus)
    )


def random_element(descriptor: RingDescriptor, rng: Random) -> RingElement:
    """Uniform element: entries i.i.d. uniform in [0, q-1]."""
    q = descriptor.modulus
    n = descriptor.dimension * descriptor.dimension
    return RingElement._wrap(descriptor, tuple(rng.randrange(q) for _ in range(n)))


def noncommuting_witness(descriptor: RingDescriptor) -> tuple[RingElement, RingElement]:
    """The canonical pair r, s with r*s != s*r (exists for every d >= 2).

    r has a single 1 at position (0, 1) and s at (1, 0); r*s and s*r land
    on different diagonal cells.
    """
    d = descriptor.dimension
    r = [0] * d * d
    s = [0] * d * d
    r[1] = 1
    s[d] = 1
    return RingElement(descriptor, r), RingElement(descriptor, s)


def encode_element(r: RingElement) -> bytes:
    """Canonical bytes: "NCRE" | version | d | q (4 BE) | d^2 entries (4 BE each)."""
    desc = r.descriptor
    parts = [
        ENCODING_MAGIC,
        bytes((ENCODING_VERSION, desc.dimension)),
        desc.modulus.to_bytes(4, "big"),
    ]
    parts.extend(e.to_bytes(4, "big") for e in r.entries)
    return b"".join(parts)


def decode_element(data: bytes) -> RingElement:
    """Inverse of encode_element; rejects anything non-canonical."""
    if len(data) < 10:
        raise ElementEncodingError(f"element blob too short: {len(data)} bytes")
    if data[:4] != ENCODING_MAGIC:
        raise ElementEncodingError(f"bad element magic {data[:4]!r}")
    if data[4] != ENCODING_VERSION:
        raise ElementEncodingError(f"unsupported element encoding version {data[4]}")
    d = data[5]
    q = int.from_bytes(data[6:10], "big")
    descriptor = RingDescriptor(d, q)
    if len(data) != descriptor.encoded_length:
        raise ElementEncodingError(
            f"expected {descriptor.encoded_length} bytes for d={d}, got {len(data)}"
        )
    entries = []
    for i in range(10, len(data), 4):
        e = int.from_bytes(data[i : i + 4], "big")
        if e >= q:
            raise ElementEncodingError(f"entry {e} not reduced mod {q}")
        entries.append(e)
    return RingElement._wrap(descriptor, tuple(entries))


def hash_element(r: RingElement) -> DigestValue:
    """SHA-256 of the canonical encoding; the protocol hash H: R -> M."""
    return DigestValue(hashlib.sha256(encode_element(r)).digest())
