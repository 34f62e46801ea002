"""Symmetrical decomposition over the polynomial evaluation set.

The problem this package's schemes lean on: given base a, pair (x, y)
and exponents m, n >= 1, find z = g(a) for some non-negative integer
polynomial g with y = z^m * x * z^n. ``brute_force_psd`` realizes the
problem statement directly by exhausting a bounded polynomial space; it
doubles as the test-vector oracle and as a desk-scale demonstration
that toy parameters are insecure.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from .polynomials import (
    IntPolynomial,
    PolynomialSamplerConfig,
    enumerate_polynomials,
    poly_eval,
    sample_polynomial,
)
from .ring import (
    DescriptorMismatchError,
    RingDescriptor,
    RingElement,
    RingError,
    _mul_flat,
    _pow_flat,
    decode_element,
    encode_element,
    random_element,
    sandwich,
)

DEFAULT_SEARCH_BUDGET = 10 ** 6

INSTANCE_TRAILER_LEN = 8  # m and n, 4-byte big-endian each


@dataclass(frozen=True)
class PsdInstance:
    """A decomposition challenge: find z in the evaluation set of ``base``
    with y = z^m * x * z^n."""

    base: RingElement
    x: RingElement
    y: RingElement
    m: int
    n: int

    def __post_init__(self):
        if not (self.base.descriptor == self.x.descriptor == self.y.descriptor):
            raise DescriptorMismatchError("instance elements must share one descriptor")
        if self.m < 1 or self.n < 1:
            raise RingError(f"exponents must be >= 1, got m={self.m}, n={self.n}")


@dataclass(frozen=True)
class PsdSolution:
    witness_poly: IntPolynomial
    witness_element: RingElement


def check_decomposition(instance: PsdInstance, z: RingElement) -> bool:
    """True iff z^m * x * z^n equals the instance's y."""
    if z.descriptor != instance.base.descriptor:
        raise DescriptorMismatchError("candidate z lives in a different ring")
    return sandwich(z, instance.m, instance.x, instance.n) == instance.y


def brute_force_psd(
    instance: PsdInstance,
    max_degree: int,
    max_coefficient: int,
    budget: int = DEFAULT_SEARCH_BUDGET,
) -> PsdSolution | None:
    """Exhaust all candidate polynomials up to (max_degree, max_coefficient).

    Returns the first hit in enumeration order (lexicographic on the
    coefficient vector, constant term fastest), so results are stable
    golden values; None if no witness exists within the bounds. Raises
    EnumerationBudgetError when the space exceeds ``budget``.
    """
    desc = instance.base.descriptor
    d, q = desc.dimension, desc.modulus
    # all candidates share the base: precompute its power ladder once
    powers = [tuple(1 if i % (d + 1) == 0 else 0 for i in range(d * d))]
    for _ in range(max_degree):
        powers.append(_mul_flat(powers[-1], instance.base.entries, d, q))
    x_flat = instance.x.entries
    y_flat = instance.y.entries
    m, n = instance.m, instance.n
    for g in enumerate_polynomials(max_degree, max_coefficient, budget=budget):
        acc = None
        for i, a in enumerate(g.coefficients):
            if a == 0:
                continue
            term = tuple((a * e) % q for e in powers[i])
            acc = term if acc is None else tuple((u + v) % q for u, v in zip(acc, term))
        z_flat = acc if acc is not None else (0,) * (d * d)
        zm = _pow_flat(z_flat, m, d, q)
        zn = _pow_flat(z_flat, n, d, q) if n != m else zm
        if _mul_flat(_mul_flat(zm, x_flat, d, q), zn, d, q) == y_flat:
            z = RingElement(desc, z_flat)
            solution = PsdSolution(witness_poly=g, witness_element=z)
            # soundness is machine-checked on every return
            assert check_decomposition(instance, z)
            return solution
    return None


def generate_planted_instance(
    descriptor: RingDescriptor,
    m: int,
    n: int,
    cfg: PolynomialSamplerConfig,
    rng: Random,
) -> tuple[PsdInstance, PsdSolution]:
    """Build an instance from a known witness: y = f(base)^m * x * f(base)^n."""
    base = random_element(descriptor, rng)
    x = random_element(descriptor, rng)
    f = sample_polynomial(cfg, base, rng)
    z = poly_eval(f, base)
    y = sandwich(z, m, x, n)
    instance = PsdInstance(base=base, x=x, y=y, m=m, n=n)
    return instance, PsdSolution(witness_poly=f, witness_element=z)


def encode_instance(instance: PsdInstance) -> bytes:
    """base | x | y canonical encodings, then m and n as 4-byte big-endian."""
    return (
        encode_element(instance.base)
        + encode_element(instance.x)
        + encode_element(instance.y)
        + instance.m.to_bytes(4, "big")
        + instance.n.to_bytes(4, "big")
    )


def decode_instance(data: bytes) -> PsdInstance:
    if len(data) < 10 + INSTANCE_TRAILER_LEN:
        raise RingError(f"instance blob too short: {len(data)} bytes")
    elem_len = RingDescriptor(data[5], int.from_bytes(data[6:10], "big")).encoded_length
    expected = 3 * elem_len + INSTANCE_TRAILER_LEN
    if len(data) != expected:
        raise RingError(f"expected {expected} instance bytes, got {len(data)}")
    base = decode_element(data[:elem_len])
    x = decode_element(data[elem_len : 2 * elem_len])
    y = decode_element(data[2 * elem_len : 3 * elem_len])
    m = int.from_bytes(data[3 * elem_len : 3 * elem_len + 4], "big")
    n = int.from_bytes(data[3 * elem_len + 4 :], "big")
    return PsdInstance(base=base, x=x, y=y, m=m, n=n)
