import random

import pytest
from hypothesis import given, strategies as st

from ncauth.polynomials import (
    EnumerationBudgetError,
    IntPolynomial,
    PolynomialError,
    PolynomialSamplerConfig,
    SamplerRetryError,
    check_commutes,
    enumerate_polynomials,
    enumeration_count,
    poly_eval,
    sample_polynomial,
)
from ncauth.ring import (
    RingDescriptor,
    RingElement,
    noncommuting_witness,
    one,
    random_element,
    scalar_mul,
    zero,
)

Z5 = RingDescriptor(2, 5)

# chi-square 99% critical value, 2 degrees of freedom (scipy.stats.chi2.ppf(0.99, 2))
CHI2_99_DF2 = 9.210340


def _naive_eval(f, r):
    total = zero(r.descriptor)
    for i, a in enumerate(f.coefficients):
        total = total + scalar_mul(a, r ** i)
    return total


def _poly_mul(f, g):
    # plain integer-polynomial product, used only as a test oracle
    if f.is_zero() or g.is_zero():
        return IntPolynomial()
    out = [0] * (f.degree + g.degree + 1)
    for i, a in enumerate(f.coefficients):
        for j, b in enumerate(g.coefficients):
            out[i + j] += a * b
    return IntPolynomial(out)


# ---------------------------------------------------------------------
# construction and canonical form
# ---------------------------------------------------------------------

def test_trailing_zeros_trimmed():
    assert IntPolynomial([1, 2, 0, 0]).coefficients == (1, 2)
    assert IntPolynomial([0, 0]).coefficients == ()


def test_zero_polynomial_degree():
    assert IntPolynomial().degree == -1
    assert IntPolynomial().is_zero()


def test_interior_zeros_allowed():
    f = IntPolynomial([0, 0, 3])
    assert f.coefficients == (0, 0, 3)
    assert f.degree == 2


def test_negative_coefficient_rejected():
    with pytest.raises(PolynomialError):
        IntPolynomial([1, -2])


def test_polynomial_immutable():
    f = IntPolynomial([1, 2])
    with pytest.raises(AttributeError):
        f.coefficients = (9,)


# ---------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------

def test_identity_polynomial_returns_argument():
    rng = random.Random(201)
    x = IntPolynomial([0, 1])
    for _ in range(20):
        r = random_element(Z5, rng)
        assert poly_eval(x, r) == r


def test_eval_affine_example():
    # f(x) = 1 + 2x at [[1,2],[3,4]] over Z_5: I + 2p entrywise mod 5
    p = RingElement.from_rows(Z5, [(1, 2), (3, 4)])
    f = IntPolynomial([1, 2])
    assert poly_eval(f, p).rows() == ((3, 4), (1, 4))


def test_constant_polynomial():
    rng = random.Random(202)
    f = IntPolynomial([3])
    for _ in range(10):
        r = random_element(Z5, rng)
        assert poly_eval(f, r) == scalar_mul(3, one(Z5))


def test_zero_polynomial_evaluates_to_zero():
    assert poly_eval(IntPolynomial(), one(Z5)) == zero(Z5)


def test_horner_matches_naive_sum():
    rng = random.Random(203)
    descriptors = [Z5, RingDescriptor(3, 7), RingDescriptor(2, (1 << 31) - 1)]
    for i in range(1000):
        desc = descriptors[i % len(descriptors)]
        r = random_element(desc, rng)
        coeffs = [rng.randrange(0, 9) for _ in range(rng.randrange(0, 6))]
        f = IntPolynomial(coeffs)
        assert poly_eval(f, r) == _naive_eval(f, r)


def test_eval_is_multiplicative_on_common_argument():
    # (f*g)(r) = f(r) * g(r): evaluations at one point commute, so the
    # integer-polynomial product maps onto the ring product
    rng = random.Random(204)
    for _ in range(300):
        r = random_element(Z5, rng)
        f = IntPolynomial([rng.randrange(0, 5) for _ in range(rng.randrange(1, 5))])
        g = IntPolynomial([rng.randrange(0, 5) for _ in range(rng.randrange(1, 5))])
        assert poly_eval(_poly_mul(f, g), r) == poly_eval(f, r) * poly_eval(g, r)


@given(st.lists(st.integers(min_value=0, max_value=6), max_size=5),
       st.lists(st.integers(min_value=0, max_value=4), min_size=4, max_size=4))
def test_eval_additive_in_coefficients_hypothesis(coeffs, entries):
    r = RingElement(Z5, entries)
    f = IntPolynomial(coeffs)
    doubled = IntPolynomial([2 * c for c in coeffs])
    assert poly_eval(doubled, r) == poly_eval(f, r) + poly_eval(f, r)


# ---------------------------------------------------------------------
# commutativity of the evaluation set
# ---------------------------------------------------------------------

def test_evaluations_at_common_point_commute():
    rng = random.Random(205)
    descriptors = [Z5, RingDescriptor(3, 4), RingDescriptor(2, 2)]
    for i in range(1000):
        desc = descriptors[i % len(descriptors)]
        r = random_element(desc, rng)
        f = IntPolynomial([rng.randrange(0, 7) for _ in range(rng.randrange(1, 6))])
        h = IntPolynomial([rng.randrange(0, 7) for _ in range(rng.randrange(1, 6))])
        assert check_commutes(f, h, r)


def test_element_commutes_with_itself():
    f = IntPolynomial([1, 2, 3])
    assert check_commutes(f, f, one(Z5))


def test_distinct_arguments_need_not_commute():
    # f(r) * h(s) != h(s) * f(r) for the canonical witness pair
    desc = RingDescriptor(2, 2)
    r, s = noncommuting_witness(desc)
    x = IntPolynomial([0, 1])
    fr = poly_eval(x, r)
    hs = poly_eval(x, s)
    assert fr * hs != hs * fr


# ---------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------

def test_sampler_deterministic_per_seed():
    cfg = PolynomialSamplerConfig(max_degree=5, max_coefficient=100)
    base = one(Z5)
    assert sample_polynomial(cfg, base, random.Random(9)) == sample_polynomial(
        cfg, base, random.Random(9)
    )


def test_sampler_respects_bounds():
    cfg = PolynomialSamplerConfig(max_degree=4, max_coefficient=6, require_nonzero_eval=False)
    rng = random.Random(206)
    base = one(Z5)
    for _ in range(500):
        f = sample_polynomial(cfg, base, rng)
        assert 1 <= f.degree <= 4
        assert all(0 <= c <= 6 for c in f.coefficients)
        assert f.coefficients[-1] >= 1


def test_sampler_never_returns_zero_eval():
    # q=2 with C=2 rejects roughly half the raw draws, so the retry loop runs
    desc = RingDescriptor(2, 2)
    cfg = PolynomialSamplerConfig(max_degree=3, max_coefficient=2, require_nonzero_eval=True)
    rng = random.Random(207)
    base = one(desc)
    for _ in range(500):
        f = sample_polynomial(cfg, base, rng)
        assert not poly_eval(f, base).is_zero()


def test_sampler_retry_exhaustion():
    class AlwaysEven:
        # every drawn coefficient is 2, so f == 0 mod 2 at any base
        def randint(self, lo, hi):
            return max(lo, 2) if hi >= 2 else lo

    desc = RingDescriptor(2, 2)
    cfg = PolynomialSamplerConfig(max_degree=2, max_coefficient=2, require_nonzero_eval=True)
    with pytest.raises(SamplerRetryError):
        sample_polynomial(cfg, one(desc), AlwaysEven())


def test_sampler_degree_histogram_uniform():
    cfg = PolynomialSamplerConfig(max_degree=3, max_coefficient=10, require_nonzero_eval=False)
    rng = random.Random(208)
    base = one(Z5)
    counts = {1: 0, 2: 0, 3: 0}
    for _ in range(10_000):
        counts[sample_polynomial(cfg, base, rng).degree] += 1
    expected = 10_000 / 3
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < CHI2_99_DF2, f"chi2={chi2:.2f}, counts={counts}"


def test_sampler_config_validation():
    with pytest.raises(PolynomialError):
        PolynomialSamplerConfig(max_degree=0, max_coefficient=5)
    with pytest.raises(PolynomialError):
        PolynomialSamplerConfig(max_degree=2, max_coefficient=0)


# ---------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------

def test_enumerate_degree_zero():
    polys = list(enumerate_polynomials(0, 1))
    assert polys == [IntPolynomial(), IntPolynomial([1])]


def test_enumerate_linear():
    polys = list(enumerate_polynomials(1, 1))
    assert polys == [
        IntPolynomial(),
        IntPolynomial([1]),
        IntPolynomial([0, 1]),
        IntPolynomial([1, 1]),
    ]


def test_enumerate_order_constant_term_fastest():
    prefix = [f.to_text() for f in enumerate_polynomials(1, 2)][:6]
    assert prefix == ["0", "1", "2", "1*x", "1+1*x", "2+1*x"]


def test_enumerate_count_and_uniqueness():
    for d_max, c_max in [(1, 2), (2, 2), (3, 1)]:
        polys = list(enumerate_polynomials(d_max, c_max))
        assert len(polys) == enumeration_count(d_max, c_max)
        assert len(set(polys)) == len(polys)
        for f in polys:
            assert f.degree <= d_max
            assert all(0 <= c <= c_max for c in f.coefficients)
            if f.degree >= 1:
                assert f.coefficients[-1] > 0


def test_enumerate_budget_error_reports_count():
    with pytest.raises(EnumerationBudgetError) as exc:
        list(enumerate_polynomials(5, 9, budget=1000))
    assert exc.value.count == 10 ** 6


# ---------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------

def test_text_form_examples():
    assert IntPolynomial().to_text() == "0"
    assert IntPolynomial([3]).to_text() == "3"
    assert IntPolynomial([0, 1]).to_text() == "1*x"
    assert IntPolynomial([3, 0, 2]).to_text() == "3+2*x^2"


def test_text_round_trip():
    rng = random.Random(209)
    for _ in range(200):
        f = IntPolynomial([rng.randrange(0, 20) for _ in range(rng.randrange(0, 7))])
        assert IntPolynomial.from_text(f.to_text()) == f


def test_from_text_accepts_bare_terms():
    assert IntPolynomial.from_text("x") == IntPolynomial([0, 1])
    assert IntPolynomial.from_text("x^3") == IntPolynomial([0, 0, 0, 1])
    assert IntPolynomial.from_text("2 + 3*x") == IntPolynomial([2, 3])


def test_from_text_rejects_garbage():
    with pytest.raises((PolynomialError, ValueError)):
        IntPolynomial.from_text("1-2")
    with pytest.raises((PolynomialError, ValueError)):
        IntPolynomial.from_text("++")
