"""Two-pass challenge-response authentication.

The verifier draws a secret polynomial h, sends u = h(p)^m * q * h(p)^n,
and expects back the digest of f(p)^m * u * f(p)^n. Because f(p) and
h(p) both evaluate the same base p they commute, so an honest prover's
pre-hash value equals h(p)^m * y * h(p)^n, which the verifier can
compute from the public key alone. That same observation makes honest
transcripts perfectly simulatable: ``simulate`` draws h identically and
outputs the digest without ever touching the private key.
"""

from __future__ import annotations

import hmac
from dataclasses import dataclass, replace
from random import Random

from .keys import HASH_ALGORITHMS, KeyPair, PublicKey
from .polynomials import IntPolynomial, SamplerRetryError, poly_eval, sample_polynomial
from .ring import DigestValue, RingElement, RingError, encode_element, sandwich

CHALLENGE_RETRY_LIMIT = 1000


@dataclass(frozen=True)
class DhChallenge:
    u: RingElement

    def __post_init__(self):
        if self.u.is_zero():
            raise RingError("challenge element must be nonzero")


@dataclass(frozen=True)
class DhVerifierState:
    challenge_poly: IntPolynomial
    expected: DigestValue


@dataclass(frozen=True)
class DhResponse:
    w: DigestValue


def _hash_for(public: PublicKey):
    return HASH_ALGORITHMS[public.params.hash_id]


def digest_element(public: PublicKey, r: RingElement) -> DigestValue:
    """The system hash H applied to the canonical encoding of r."""
    return DigestValue(_hash_for(public)(encode_element(r)).digest())


def draw_challenge_poly(
    public: PublicKey, rng: Random
) -> tuple[IntPolynomial, RingElement, RingElement]:
    """Draw h with h(p) != 0 and u = h(p)^m * q * h(p)^n != 0.

    A zero u would hash to the fixed digest of the zero element and be
    forgeable by anyone, so degenerate draws are rejected. The simulator
    uses this exact drawing, which is what makes its output distribution
    identical to the honest verifier's.
    """
    params = public.params
    sampler = replace(params.sampler, require_nonzero_eval=True)
    for _ in range(CHALLENGE_RETRY_LIMIT):
        h = sample_polynomial(sampler, public.p, rng)
        hp = poly_eval(h, public.p)
        u = sandwich(hp, params.m, public.q, params.n)
        if not u.is_zero():
            return h, hp, u
    raise SamplerRetryError(
        f"could not draw a nonzero challenge in {CHALLENGE_RETRY_LIMIT} tries "
        f"(degenerate public key, e.g. q = 0)"
    )


def challenge_from_poly(
    public: PublicKey, h: IntPolynomial
) -> tuple[DhVerifierState, DhChallenge]:
    """Deterministic challenge for an explicit h; also the replay primitive."""
    params = public.params
    hp = poly_eval(h, public.p)
    if hp.is_zero():
        raise RingError("challenge polynomial evaluates to zero at p")
    u = sandwich(hp, params.m, public.q, params.n)
    expected = digest_element(public, sandwich(hp, params.m, public.y, params.n))
    return DhVerifierState(challenge_poly=h, expected=expected), DhChallenge(u=u)


def make_challenge(public: PublicKey, rng: Random) -> tuple[DhVerifierState, DhChallenge]:
    """Verifier step: pick h, send u, precompute the expected digest."""
    h, _, _ = draw_challenge_poly(public, rng)
    return challenge_from_poly(public, h)


def respond(keypair: KeyPair, challenge: DhChallenge) -> DhResponse:
    """Prover step: w = H(f(p)^m * u * f(p)^n)."""
    params = keypair.params
    fp = keypair.private_element
    pre_hash = sandwich(fp, params.m, challenge.u, params.n)
    return DhResponse(w=digest_element(keypair.public, pre_hash))


def verify(state: DhVerifierState, response: DhResponse) -> bool:
    """Constant-pattern comparison of the response digest with the expectation."""
    return hmac.compare_digest(response.w.value, state.expected.value)


def simulate(public: PublicKey, rng: Random) -> tuple[IntPolynomial, DigestValue]:
    """Honest-verifier transcript simulator; needs only the public key.

    Uses the identical challenge drawing as ``make_challenge`` and emits
    (h, H(h(p)^m * y * h(p)^n)), which by the commutation identity is
    exactly (h, w) for an honest exchange with challenge polynomial h.
    """
    params = public.params
    h, hp, _ = draw_challenge_poly(public, rng)
    digest = digest_element(public, sandwich(hp, params.m, public.y, params.n))
    return h, digest


def expected_prehash_pair(
    keypair: KeyPair, state: DhVerifierState, challenge: DhChallenge
) -> tuple[RingElement, RingElement]:
    """Both sides of the pre-hash identity, as ring elements.

    Left: what the prover hashes, f(p)^m * u * f(p)^n. Right: what the
    verifier hashes, h(p)^m * y * h(p)^n. Completeness is their equality
    in R, before any hashing; tests compare them directly.
    """
    params = keypair.params
    prover_side = sandwich(keypair.private_element, params.m, challenge.u, params.n)
    hp = poly_eval(state.challenge_poly, keypair.public.p)
    verifier_side = sandwich(hp, params.m, keypair.public.y, params.n)
    return prover_side, verifier_side
