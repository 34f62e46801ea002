"""Iterated three-pass bit-challenge authentication.

Per round the prover draws a fresh polynomial h, commits to
u = h(p)^m * y * h(p)^n, and opens with either v = h(p) (challenge 0,
checked against y) or v = f(p) * h(p) (challenge 1, checked against q).
Both checks reduce to the same commitment because f(p) and h(p)
commute. A prover without f(p) can prepare for only one challenge
value, so k rounds push the forgery probability to 2^-k.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from random import Random

from .keys import KeyPair, PublicKey
from .polynomials import IntPolynomial, SamplerRetryError, poly_eval, sample_polynomial
from .ring import RingElement, RingError, sandwich

SIMULATOR_RETRY_LIMIT = 1000


@dataclass(frozen=True)
class FsCommitment:
    u: RingElement


@dataclass(frozen=True)
class FsChallenge:
    c: int

    def __post_init__(self):
        if self.c not in (0, 1):
            raise RingError(f"challenge must be the bit 0 or 1, got {self.c}")


@dataclass(frozen=True)
class FsResponse:
    v: RingElement


@dataclass(frozen=True)
class FsProverState:
    round_poly: IntPolynomial
    round_element: RingElement


@dataclass(frozen=True)
class FsSessionConfig:
    rounds: int

    def __post_init__(self):
        if self.rounds < 1:
            raise RingError(f"round count must be >= 1, got {self.rounds}")


@dataclass(frozen=True)
class FsRound:
    """One completed round as the verifier saw it."""

    commitment: FsCommitment
    challenge: FsChallenge
    response: FsResponse


def _draw_round_poly(public: PublicKey, rng: Random) -> tuple[IntPolynomial, RingElement]:
    sampler = replace(public.params.sampler, require_nonzero_eval=True)
    h = sample_polynomial(sampler, public.p, rng)
    return h, poly_eval(h, public.p)


def commitment_from_poly(
    public: PublicKey, h: IntPolynomial
) -> tuple[FsProverState, FsCommitment]:
    """Deterministic commitment for an explicit round polynomial."""
    params = public.params
    hp = poly_eval(h, public.p)
    if hp.is_zero():
        raise RingError("round polynomial evaluates to zero at p")
    u = sandwich(hp, params.m, public.y, params.n)
    return FsProverState(round_poly=h, round_element=hp), FsCommitment(u=u)


def commit(keypair: KeyPair, rng: Random) -> tuple[FsProverState, FsCommitment]:
    """Draw a fresh h with h(p) != 0 and commit to h(p)^m * y * h(p)^n."""
    params = keypair.params
    h, hp = _draw_round_poly(keypair.public, rng)
    u = sandwich(hp, params.m, keypair.public.y, params.n)
    return FsProverState(round_poly=h, round_element=hp), FsCommitment(u=u)


def challenge_bit(rng: Random) -> FsChallenge:
    return FsChallenge(c=rng.getrandbits(1))


def respond(keypair: KeyPair, state: FsProverState, challenge: FsChallenge) -> FsResponse:
    """c=0 opens the commitment randomness; c=1 blinds the private key with it."""
    if challenge.c == 0:
        return FsResponse(v=state.round_element)
    return FsResponse(v=keypair.private_element * state.round_element)


def verify_round(
    public: PublicKey,
    commitment: FsCommitment,
    challenge: FsChallenge,
    response: FsResponse,
) -> bool:
    """c=0: u = v^m * y * v^n; c=1: u = v^m * q * v^n."""
    if response.v.descriptor != public.params.ring:
        raise RingError("response element lives in a different ring")
    params = public.params
    target = public.y if challenge.c == 0 else public.q
    return sandwich(response.v, params.m, target, params.n) == commitment.u


def run_rounds(
    keypair: KeyPair, cfg: FsSessionConfig, rng: Random
) -> tuple[bool, list[FsRound]]:
    """Honest prover against an honest verifier, all in-process.

    The verifier aborts at the first failing round; acceptance requires
    all k rounds to pass.
    """
    public = keypair.public
    rounds = []
    for _ in range(cfg.rounds):
        state, commitment = commit(keypair, rng)
        challenge = challenge_bit(rng)
        response = respond(keypair, state, challenge)
        rounds.append(FsRound(commitment, challenge, response))
        if not verify_round(public, commitment, challenge, response):
            return False, rounds
    return True, rounds


class GuessingCheater:
    """Prover without the private key: guess the challenge, prepare one branch.

    Guess 0 commits honestly (u = h(p)^m * y * h(p)^n) and survives only
    the c=0 check; guess 1 commits u = h(p)^m * q * h(p)^n so that
    v = h(p) survives the c=1 check. Either way v = h(p) is sent, and
    the round passes exactly when the guess matched.
    """

    def __init__(self, public: PublicKey, rng: Random, forced_guess: int | None = None):
        if forced_guess not in (None, 0, 1):
            raise RingError(f"forced guess must be 0 or 1, got {forced_guess}")
        self.public = public
        self.rng = rng
        self.forced_guess = forced_guess

    def commit(self) -> tuple[FsProverState, FsCommitment]:
        params = self.public.params
        guess = self.forced_guess if self.forced_guess is not None else self.rng.getrandbits(1)
        h, hp = _draw_round_poly(self.public, self.rng)
        target = self.public.y if guess == 0 else self.public.q
        u = sandwich(hp, params.m, target, params.n)
        return FsProverState(round_poly=h, round_element=hp), FsCommitment(u=u)

    def respond(self, state: FsProverState, challenge: FsChallenge) -> FsResponse:
        return FsResponse(v=state.round_element)


def run_cheating_rounds(
    cheater: GuessingCheater, cfg: FsSessionConfig, rng: Random
) -> tuple[bool, list[FsRound]]:
    """A cheater session against an honest verifier; aborts on first failure."""
    public = cheater.public
    rounds = []
    for _ in range(cfg.rounds):
        state, commitment = cheater.commit()
        challenge = challenge_bit(rng)
        response = cheater.respond(state, challenge)
        rounds.append(FsRound(commitment, challenge, response))
        if not verify_round(public, commitment, challenge, response):
            return False, rounds
    return True, rounds


@dataclass(frozen=True)
class FsSimulation:
    """Simulator output: rounds that verify, plus per-round attempt counts."""

    rounds: tuple[FsRound, ...]
    attempts: tuple[int, ...]

    @property
    def mean_attempts(self) -> float:
        return sum(self.attempts) / len(self.attempts)


def simulate_round(public: PublicKey, rng: Random) -> tuple[FsRound, int]:
    """One simulated round: sample (c, v), derive u from the c-branch check,
    keep the triple when an honest verifier's challenge bit agrees.

    The agreement filter succeeds with probability 1/2 per attempt, so
    the attempt count is geometric with mean 2.
    """
    params = public.params
    for attempt in range(1, SIMULATOR_RETRY_LIMIT + 1):
        c = rng.getrandbits(1)
        _, vp = _draw_round_poly(public, rng)
        target = public.y if c == 0 else public.q
        u = sandwich(vp, params.m, target, params.n)
        verifier_bit = challenge_bit(rng)
        if verifier_bit.c == c:
            return (
                FsRound(FsCommitment(u=u), verifier_bit, FsResponse(v=vp)),
                attempt,
            )
    raise SamplerRetryError(
        f"simulator did not hit a matching challenge bit in {SIMULATOR_RETRY_LIMIT} attempts"
    )


def simulate_session(public: PublicKey, cfg: FsSessionConfig, rng: Random) -> FsSimulation:
    """k simulated rounds; every emitted round passes verify_round."""
    rounds = []
    attempts = []
    for _ in range(cfg.rounds):
        rnd, tries = simulate_round(public, rng)
        rounds.append(rnd)
        attempts.append(tries)
    return FsSimulation(rounds=tuple(rounds), attempts=tuple(attempts))
