"""System parameters and key material shared by both schemes.

A keypair is a private polynomial f with its evaluation f(p) at the
public base p, plus the published triple (p, q, y) where
y = f(p)^m * q * f(p)^n. The parameter tuple (ring, m, n, hash, sampler
bounds) rides along with the keys so that protocol operations are
self-contained.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from random import Random

from .polynomials import IntPolynomial, PolynomialSamplerConfig, poly_eval, sample_polynomial
from .ring import (
    RingDescriptor,
    RingElement,
    RingError,
    decode_element,
    encode_element,
    hash_element,
    random_element,
    sandwich,
)

HASH_ALGORITHMS = {"sha256": hashlib.sha256}

DEFAULT_DIMENSION = 3
DEFAULT_MODULUS = 2147483647  # 2^31 - 1, prime
DEFAULT_M = 3
DEFAULT_N = 5
DEFAULT_MAX_DEGREE = 5
DEFAULT_MAX_COEFFICIENT = 1 << 16


class KeyMaterialError(RingError):
    """Key material violates its construction invariants."""


@dataclass(frozen=True)
class SystemParams:
    """Public system tuple: ring descriptor, exponents, hash id, sampler bounds."""

    ring: RingDescriptor
    m: int
    n: int
    hash_id: str = "sha256"
    sampler: PolynomialSamplerConfig = PolynomialSamplerConfig(
        DEFAULT_MAX_DEGREE, DEFAULT_MAX_COEFFICIENT
    )

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise RingError(
                f"exponents must be >= 1 (general ring elements are not invertible), "
                f"got m={self.m}, n={self.n}"
            )
        if self.hash_id not in HASH_ALGORITHMS:
            raise RingError(f"unknown hash id {self.hash_id!r}")


def default_params() -> SystemParams:
    return SystemParams(RingDescriptor(DEFAULT_DIMENSION, DEFAULT_MODULUS), DEFAULT_M, DEFAULT_N)


@dataclass(frozen=True)
class PublicKey:
    params: SystemParams
    p: RingElement
    q: RingElement
    y: RingElement

    def __post_init__(self):
        desc = self.params.ring
        if not (self.p.descriptor == self.q.descriptor == self.y.descriptor == desc):
            raise KeyMaterialError("public key elements do not match the ring descriptor")

    def fingerprint(self) -> str:
        """Short public identity: hex digest of the canonical y encoding."""
        return hash_element(self.y).hex()


@dataclass(frozen=True)
class KeyPair:
    params: SystemParams
    private_poly: IntPolynomial
    private_element: RingElement
    public: PublicKey

    def __post_init__(self):
        if self.private_element != poly_eval(self.private_poly, self.public.p):
            raise KeyMaterialError("private element is not the private polynomial evaluated at p")
        if self.private_element.is_zero():
            raise KeyMaterialError("private element f(p) must be nonzero")
        expected_y = sandwich(
            self.private_element, self.params.m, self.public.q, self.params.n
        )
        if self.public.y != expected_y:
            raise KeyMaterialError("public y does not match f(p)^m * q * f(p)^n")


def generate_keypair(params: SystemParams, rng: Random) -> KeyPair:
    """Sample p, q uniformly and f with f(p) != 0, then publish (p, q, y)."""
    p = random_element(params.ring, rng)
    q = random_element(params.ring, rng)
    sampler = replace(params.sampler, require_nonzero_eval=True)
    f = sample_polynomial(sampler, p, rng)
    return keypair_from_parts(params, f, p, q)


def keypair_from_parts(
    params: SystemParams, f: IntPolynomial, p: RingElement, q: RingElement
) -> KeyPair:
    """Assemble (and validate) a keypair from explicit parts; test hook for
    forced private keys."""
    fp = poly_eval(f, p)
    if fp.is_zero():
        raise KeyMaterialError("forced private polynomial evaluates to zero at p")
    y = sandwich(fp, params.m, q, params.n)
    public = PublicKey(params=params, p=p, q=q, y=y)
    return KeyPair(params=params, private_poly=f, private_element=fp, public=public)


# -- key files ----------------------------------------------------------

def params_to_dict(params: SystemParams) -> dict:
    return {
        "dimension": params.ring.dimension,
        "modulus": params.ring.modulus,
        "m": params.m,
        "n": params.n,
        "hash": params.hash_id,
        "max_degree": params.sampler.max_degree,
        "max_coefficient": params.sampler.max_coefficient,
    }


def params_from_dict(blob: dict) -> SystemParams:
    return SystemParams(
        ring=RingDescriptor(int(blob["dimension"]), int(blob["modulus"])),
        m=int(blob["m"]),
        n=int(blob["n"]),
        hash_id=blob.get("hash", "sha256"),
        sampler=PolynomialSamplerConfig(
            int(blob["max_degree"]), int(blob["max_coefficient"])
        ),
    )


def save_keypair(keypair: KeyPair, path: str) -> None:
    doc = {
        "kind": "ncauth-keypair",
        "params": params_to_dict(keypair.params),
        "private": {"f": keypair.private_poly.to_text()},
        "public": {
            "p": encode_element(keypair.public.p).hex(),
            "q": encode_element(keypair.public.q).hex(),
            "y": encode_element(keypair.public.y).hex(),
        },
        "fingerprint": keypair.public.fingerprint(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_keypair(path: str) -> KeyPair:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "ncauth-keypair":
        raise KeyMaterialError(f"not a keypair file: {path}")
    params = params_from_dict(doc["params"])
    f = IntPolynomial.from_text(doc["private"]["f"])
    p = decode_element(bytes.fromhex(doc["public"]["p"]))
    q = decode_element(bytes.fromhex(doc["public"]["q"]))
    keypair = keypair_from_parts(params, f, p, q)
    stored_y = decode_element(bytes.fromhex(doc["public"]["y"]))
    if keypair.public.y != stored_y:
        raise KeyMaterialError("stored y does not match the recomputed public key")
    return keypair
