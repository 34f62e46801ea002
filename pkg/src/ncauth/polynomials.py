"""Non-negative integer coefficient polynomials and their ring evaluation.

An IntPolynomial is a canonical coefficient tuple (index = degree, no
trailing zeros, zero polynomial = empty tuple). Evaluating f at a ring
element r yields f(r) = sum (a_i) r^i, a member of the commuting set
P_r: any two such evaluations at the same r commute, which is the
algebraic fact both authentication schemes stand on (``check_commutes``
is the executable witness).
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Iterator

from .ring import (
    RingElement,
    _add_flat,
    _identity_flat,
    _mul_flat,
    _scale_flat,
    one,
    zero,
)

SAMPLER_RETRY_LIMIT = 1000


class PolynomialError(ValueError):
    """Base class for polynomial-level failures."""


class SamplerRetryError(PolynomialError):
    """Rejection sampling could not satisfy a constraint within the retry cap."""


class EnumerationBudgetError(PolynomialError):
    """The requested enumeration exceeds the configured budget."""

    def __init__(self, count: int, budget: int):
        super().__init__(f"enumeration would yield {count} polynomials, budget is {budget}")
        self.count = count
        self.budget = budget


class IntPolynomial:
    """f(x) = a_0 + a_1 x + ... + a_n x^n with all a_i >= 0.

    Construction trims trailing zero coefficients, so equality is plain
    coefficient-tuple equality. Calling the polynomial evaluates it at a
    ring element: ``f(p)``.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients=()):
        coeffs = [int(c) for c in coefficients]
        if any(c < 0 for c in coeffs):
            raise PolynomialError(f"coefficients must be >= 0, got {coeffs}")
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("IntPolynomial is immutable")

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def __call__(self, r: RingElement) -> RingElement:
        return poly_eval(self, r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"IntPolynomial({self.to_text()!r})"

    def to_text(self) -> str:
        """Text form ``a0+a1*x+a2*x^2+...``; zero-coefficient terms omitted."""
        terms = []
        for i, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*x")
            else:
                terms.append(f"{c}*x^{i}")
        return "+".join(terms) if terms else "0"

    @classmethod
    def from_text(cls, text: str) -> "IntPolynomial":
        text = text.replace(" ", "")
        if text in ("", "0"):
            return cls()
        coeffs: dict[int, int] = {}
        for term in text.split("+"):
            if not term:
                raise PolynomialError(f"empty term in polynomial text {text!r}")
            if "*x^" in term:
                c_str, _, e_str = term.partition("*x^")
                coeff, exp = int(c_str), int(e_str)
            elif term.endswith("*x"):
                coeff, exp = int(term[:-2]), 1
            elif term == "x":
                coeff, exp = 1, 1
            elif term.startswith("x^"):
                coeff, exp = 1, int(term[2:])
            else:
                coeff, exp = int(term), 0
            if coeff < 0 or exp < 0:
                raise PolynomialError(f"bad term {term!r} in polynomial text")
            coeffs[exp] = coeffs.get(exp, 0) + coeff
        out = [0] * (max(coeffs) + 1)
        for exp, coeff in coeffs.items():
            out[exp] = coeff
        return cls(out)


@dataclass(frozen=True)
class PolynomialSamplerConfig:
    """Random polynomial drawing: degree uniform in [1, D], coefficients in [0, C]."""

    max_degree: int
    max_coefficient: int
    require_nonzero_eval: bool = True

    def __post_init__(self):
        if self.max_degree < 1:
            raise PolynomialError(f"max_degree must be >= 1, got {self.max_degree}")
        if self.max_coefficient < 1:
            raise PolynomialError(f"max_coefficient must be >= 1, got {self.max_coefficient}")


def poly_eval(f: IntPolynomial, r: RingElement) -> RingElement:
    """Horner evaluation of f at r; the constant term contributes a_0 * I."""
    desc = r.descriptor
    coeffs = f.coefficients
    if not coeffs:
        return zero(desc)
    d, q = desc.dimension, desc.modulus
    ident = _identity_flat(d)
    acc = _scale_flat(coeffs[-1], ident, q)
    for a in reversed(coeffs[:-1]):
        acc = _mul_flat(acc, r.entries, d, q)
        if a:
            acc = _add_flat(acc, _scale_flat(a, ident, q), q)
    return RingElement._wrap(desc, acc)


def sample_polynomial(
    cfg: PolynomialSamplerConfig, base: RingElement, rng: Random
) -> IntPolynomial:
    """Draw a random polynomial, optionally rejecting f with f(base) = 0."""
    for _ in range(SAMPLER_RETRY_LIMIT):
        degree = rng.randint(1, cfg.max_degree)
        coeffs = [rng.randint(0, cfg.max_coefficient) for _ in range(degree)]
        coeffs.append(rng.randint(1, cfg.max_coefficient))
        f = IntPolynomial(coeffs)
        if not cfg.require_nonzero_eval or not poly_eval(f, base).is_zero():
            return f
    raise SamplerRetryError(
        f"could not draw f with f(base) != 0 in {SAMPLER_RETRY_LIMIT} tries "
        f"(base descriptor {base.descriptor})"
    )


def check_commutes(f: IntPolynomial, h: IntPolynomial, r: RingElement) -> bool:
    """Whether f(r) * h(r) = h(r) * f(r).

    True for every input: powers of one element commute, so any two
    polynomial evaluations at the same r do too.
    """
    fr = poly_eval(f, r)
    hr = poly_eval(h, r)
    return fr * hr == hr * fr


def enumeration_count(max_degree: int, max_coefficient: int) -> int:
    """Number of distinct polynomials with degree <= D and coefficients <= C."""
    return (max_coefficient + 1) ** (max_degree + 1)


def enumerate_polynomials(
    max_degree: int, max_coefficient: int, budget: int | None = None
) -> Iterator[IntPolynomial]:
    """Every polynomial with degree <= D, coefficients <= C, exactly once.

    Order is lexicographic on the padded coefficient vector (a_0 ... a_D)
    with the constant term varying fastest; canonical trimming makes the
    stream duplicate-free because each polynomial has a unique padding.
    """
    if max_degree < 0 or max_coefficient < 1:
        raise PolynomialError(
            f"need max_degree >= 0 and max_coefficient >= 1, got D={max_degree}, C={max_coefficient}"
        )
    count = enumeration_count(max_degree, max_coefficient)
    if budget is not None and count > budget:
        raise EnumerationBudgetError(count, budget)
    radix = max_coefficient + 1
    vec = [0] * (max_degree + 1)
    while True:
        yield IntPolynomial(vec)
        pos = 0
        while pos <= max_degree:
            vec[pos] += 1
            if vec[pos] < radix:
                break
            vec[pos] = 0
            pos += 1
        else:
            return
