"""Bit-exact framing and transcript recording.

Frame layout: "NCRA" | version | msg_type | session_id (16) |
round_index (2 BE) | payload_len (4 BE) | payload. The 28-byte header is
fixed; payloads are scheme messages (encoded ring elements, digests, a
challenge bit) or the HELLO blob carrying system parameters, the public
key, the scheme selector and the round count.

Transcripts are ordered (direction, frame) records plus optional local
audit data; they persist to .ncrt files as length-prefixed records and
replay deterministically (see ncauth.session.replay_transcript).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import IntEnum

from .keys import PublicKey, SystemParams, params_from_dict, params_to_dict
from .polynomials import IntPolynomial
from .ring import RingElement, decode_element, encode_element

FRAME_MAGIC = b"NCRA"
FRAME_VERSION = 1
HEADER_LEN = 28
MAX_PAYLOAD = 1 << 20

TRANSCRIPT_MAGIC = b"NCRT"
TRANSCRIPT_VERSION = 1

SCHEME_DH = 1
SCHEME_FS = 2
SCHEME_NAMES = {SCHEME_DH: "dh", SCHEME_FS: "fs"}


class MsgType(IntEnum):
    HELLO = 0x00
    DH_CHALLENGE = 0x01
    DH_RESPONSE = 0x02
    FS_COMMIT = 0x10
    FS_CHALLENGE = 0x11
    FS_RESPONSE = 0x12
    ACCEPT = 0x7E
    REJECT = 0x7F


class WireError(ValueError):
    """Base class for framing failures."""


class FrameHeaderError(WireError):
    """Bad magic, version, or header shape."""


class FrameTruncatedError(WireError):
    """Declared payload length exceeds the available bytes."""


class UnknownMessageTypeError(WireError):
    """msg_type outside the registry."""


@dataclass(frozen=True)
class Frame:
    msg_type: MsgType
    session_id: bytes
    round_index: int
    payload: bytes = b""

    def __post_init__(self):
        if len(self.session_id) != 16:
            raise WireError(f"session id must be 16 bytes, got {len(self.session_id)}")
        if not 0 <= self.round_index < (1 << 16):
            raise WireError(f"round index out of range: {self.round_index}")
        if len(self.payload) > MAX_PAYLOAD:
            raise WireError(f"payload too large: {len(self.payload)}")


def encode_frame(frame: Frame) -> bytes:
    return (
        FRAME_MAGIC
        + bytes((FRAME_VERSION, frame.msg_type))
        + frame.session_id
        + frame.round_index.to_bytes(2, "big")
        + len(frame.payload).to_bytes(4, "big")
        + frame.payload
    )


def decode_frame(data: bytes) -> Frame:
    frame, used = decode_frame_prefix(data)
    if used != len(data):
        raise FrameTruncatedError(f"{len(data) - used} trailing bytes after frame")
    return frame


def parse_header(header: bytes) -> tuple[MsgType, bytes, int, int]:
    """Validate a 28-byte header; returns (msg_type, session_id, round, payload_len).

    Validation happens before any payload is read, so a garbage header can
    never commit a reader to a bogus multi-gigabyte length.
    """
    if len(header) < HEADER_LEN:
        raise FrameHeaderError(f"need {HEADER_LEN} header bytes, got {len(header)}")
    if header[:4] != FRAME_MAGIC:
        raise FrameHeaderError(f"bad frame magic {header[:4]!r}")
    if header[4] != FRAME_VERSION:
        raise FrameHeaderError(f"unsupported frame version {header[4]}")
    try:
        msg_type = MsgType(header[5])
    except ValueError:
        raise UnknownMessageTypeError(f"unknown msg_type 0x{header[5]:02x}") from None
    payload_len = int.from_bytes(header[24:28], "big")
    if payload_len > MAX_PAYLOAD:
        raise FrameHeaderError(f"declared payload length {payload_len} exceeds cap")
    return msg_type, header[6:22], int.from_bytes(header[22:24], "big"), payload_len


def decode_frame_prefix(data: bytes) -> tuple[Frame, int]:
    """Decode one frame from the head of ``data``; returns (frame, bytes used)."""
    msg_type, session_id, round_index, payload_len = parse_header(data[:HEADER_LEN])
    end = HEADER_LEN + payload_len
    if len(data) < end:
        raise FrameTruncatedError(
            f"payload declares {payload_len} bytes, only {len(data) - HEADER_LEN} present"
        )
    return (
        Frame(
            msg_type=msg_type,
            session_id=session_id,
            round_index=round_index,
            payload=data[HEADER_LEN:end],
        ),
        end,
    )


# -- HELLO payload -------------------------------------------------------
#
# scheme (1) | rounds (2 BE) | m (4 BE) | n (4 BE) | hash id (1 + ascii) |
# max_degree (4 BE) | max_coefficient (8 BE) | p | q | y (self-sized
# canonical element encodings).

def encode_hello(public: PublicKey, scheme: int, rounds: int) -> bytes:
    if scheme not in SCHEME_NAMES:
        raise WireError(f"unknown scheme code {scheme}")
    params = public.params
    hash_id = params.hash_id.encode("ascii")
    return (
        bytes((scheme,))
        + rounds.to_bytes(2, "big")
        + params.m.to_bytes(4, "big")
        + params.n.to_bytes(4, "big")
        + bytes((len(hash_id),))
        + hash_id
        + params.sampler.max_degree.to_bytes(4, "big")
        + params.sampler.max_coefficient.to_bytes(8, "big")
        + encode_element(public.p)
        + encode_element(public.q)
        + encode_element(public.y)
    )


def decode_hello(payload: bytes) -> tuple[PublicKey, int, int]:
    try:
        scheme = payload[0]
        if scheme not in SCHEME_NAMES:
            raise WireError(f"unknown scheme code {scheme}")
        rounds = int.from_bytes(payload[1:3], "big")
        m = int.from_bytes(payload[3:7], "big")
        n = int.from_bytes(payload[7:11], "big")
        id_len = payload[11]
        hash_id = payload[12 : 12 + id_len].decode("ascii")
        off = 12 + id_len
        max_degree = int.from_bytes(payload[off : off + 4], "big")
        max_coefficient = int.from_bytes(payload[off + 4 : off + 12], "big")
        off += 12
        elems = []
        for _ in range(3):
            if len(payload) < off + 10:
                raise WireError("hello payload truncated inside element block")
            d = payload[off + 5]
            elem_len = 10 + 4 * d * d
            elems.append(decode_element(payload[off : off + elem_len]))
            off += elem_len
        if off != len(payload):
            raise WireError("trailing bytes after hello payload")
        p, q, y = elems
        params = params_from_dict(
            {
                "dimension": p.descriptor.dimension,
                "modulus": p.descriptor.modulus,
                "m": m,
                "n": n,
                "hash": hash_id,
                "max_degree": max_degree,
                "max_coefficient": max_coefficient,
            }
        )
        return PublicKey(params=params, p=p, q=q, y=y), scheme, rounds
    except WireError:
        raise
    except Exception as exc:
        raise WireError(f"malformed hello payload: {exc}") from exc


def element_payload(r: RingElement) -> bytes:
    return encode_element(r)


def element_from_payload(payload: bytes) -> RingElement:
    try:
        return decode_element(payload)
    except Exception as exc:
        raise WireError(f"payload is not a canonical element: {exc}") from exc


def bit_payload(c: int) -> bytes:
    if c not in (0, 1):
        raise WireError(f"challenge payload must be bit 0 or 1, got {c}")
    return bytes((c,))


def bit_from_payload(payload: bytes) -> int:
    if len(payload) != 1 or payload[0] not in (0, 1):
        raise WireError(f"malformed challenge-bit payload {payload!r}")
    return payload[0]


# -- transcripts ----------------------------------------------------------

DIR_PROVER = "P"  # prover -> verifier
DIR_VERIFIER = "V"  # verifier -> prover

_RECORD_KINDS = {DIR_PROVER: 0x50, DIR_VERIFIER: 0x56}
_AUDIT_KIND = 0x41


@dataclass
class Transcript:
    """Ordered protocol record: parameters, public key, directed frames.

    ``audit`` holds local-only material (the DH verifier's challenge
    polynomial) that replay needs but the wire never carries.
    """

    public: PublicKey | None = None
    scheme: int | None = None
    rounds: int | None = None
    records: list[tuple[str, Frame]] = field(default_factory=list)
    audit: dict = field(default_factory=dict)

    @property
    def params(self) -> SystemParams | None:
        return self.public.params if self.public else None

    def add(self, direction: str, frame: Frame) -> None:
        if direction not in _RECORD_KINDS:
            raise WireError(f"unknown direction {direction!r}")
        if frame.msg_type == MsgType.HELLO and self.public is None:
            self.public, self.scheme, self.rounds = decode_hello(frame.payload)
        self.records.append((direction, frame))

    def frames(self, msg_type: MsgType | None = None) -> list[Frame]:
        return [f for _, f in self.records if msg_type is None or f.msg_type == msg_type]

    def decision(self) -> bool | None:
        """Recorded outcome: True/False for ACCEPT/REJECT, None if unfinished."""
        for _, frame in self.records:
            if frame.msg_type == MsgType.ACCEPT:
                return True
            if frame.msg_type == MsgType.REJECT:
                return False
        return None

    def payload_bytes(self) -> bytes:
        """Concatenation of every frame payload; the privacy scan input."""
        return b"".join(f.payload for _, f in self.records)

    def dh_audit_poly(self) -> IntPolynomial | None:
        text = self.audit.get("dh_challenge_poly")
        return IntPolynomial.from_text(text) if text is not None else None

    def fs_rounds(self) -> list[tuple[RingElement, int, RingElement]]:
        """Decode the (u, c, v) triple of every completed round, in order."""
        per_round: dict[int, dict[str, object]] = {}
        for _, frame in self.records:
            slot = per_round.setdefault(frame.round_index, {})
            if frame.msg_type == MsgType.FS_COMMIT:
                slot["u"] = element_from_payload(frame.payload)
            elif frame.msg_type == MsgType.FS_CHALLENGE:
                slot["c"] = bit_from_payload(frame.payload)
            elif frame.msg_type == MsgType.FS_RESPONSE:
                slot["v"] = element_from_payload(frame.payload)
        out = []
        for idx in sorted(per_round):
            slot = per_round[idx]
            if {"u", "c", "v"} <= slot.keys():
                out.append((slot["u"], slot["c"], slot["v"]))
        return out

    # -- persistence ------------------------------------------------------

    def save(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(TRANSCRIPT_MAGIC + bytes((TRANSCRIPT_VERSION,)))
            for direction, frame in self.records:
                blob = encode_frame(frame)
                fh.write(bytes((_RECORD_KINDS[direction],)))
                fh.write(len(blob).to_bytes(4, "big"))
                fh.write(blob)
            for key, value in sorted(self.audit.items()):
                blob = f"{key}={value}".encode("utf-8")
                fh.write(bytes((_AUDIT_KIND,)))
                fh.write(len(blob).to_bytes(4, "big"))
                fh.write(blob)

    @classmethod
    def load(cls, path: str) -> "Transcript":
        with open(path, "rb") as fh:
            data = fh.read()
        stream = io.BytesIO(data)
        head = stream.read(5)
        if head[:4] != TRANSCRIPT_MAGIC or len(head) < 5:
            raise WireError(f"not a transcript file: {path}")
        if head[4] != TRANSCRIPT_VERSION:
            raise WireError(f"unsupported transcript version {head[4]}")
        transcript = cls()
        kinds = {v: k for k, v in _RECORD_KINDS.items()}
        while True:
            kind_byte = stream.read(1)
            if not kind_byte:
                break
            length_bytes = stream.read(4)
            if len(length_bytes) != 4:
                raise WireError("truncated transcript record header")
            length = int.from_bytes(length_bytes, "big")
            blob = stream.read(length)
            if len(blob) != length:
                raise WireError("truncated transcript record body")
            kind = kind_byte[0]
            if kind == _AUDIT_KIND:
                key, _, value = blob.decode("utf-8").partition("=")
                transcript.audit[key] = value
            elif kind in kinds:
                transcript.add(kinds[kind], decode_frame(blob))
            else:
                raise WireError(f"unknown transcript record kind 0x{kind:02x}")
        return transcript
