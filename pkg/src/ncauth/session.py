"""Protocol session state machines, local runners, replay, and TCP transport.

Each side of a session is a small state machine fed one frame at a time;
illegal or out-of-order frames drive the machine into a terminal
rejected state (the transport never sees an exception). The verifier
emits a final ACCEPT or REJECT frame, which is also the recorded
decision of the session's transcript.
"""

from __future__ import annotations

import socket
import threading
from random import Random

from . import dh, fs
from .keys import KeyPair, PublicKey
from .ring import DigestValue, RingError
from .wire import (
    DIR_PROVER,
    DIR_VERIFIER,
    Frame,
    HEADER_LEN,
    MsgType,
    SCHEME_DH,
    SCHEME_FS,
    Transcript,
    WireError,
    bit_from_payload,
    bit_payload,
    element_from_payload,
    element_payload,
    encode_frame,
    encode_hello,
    parse_header,
)

REJECT_MALFORMED = b"malformed frame"
REJECT_PROTOCOL = b"protocol violation"
REJECT_FAILED = b"verification failed"


def _session_id(rng: Random) -> bytes:
    return rng.getrandbits(128).to_bytes(16, "big")


class ProverSession:
    """Prover-side machine for either scheme; a cheater may stand in for
    the honest FS prover."""

    def __init__(
        self,
        scheme: int,
        rounds: int,
        rng: Random,
        keypair: KeyPair | None = None,
        cheater: fs.GuessingCheater | None = None,
    ):
        if scheme == SCHEME_DH and keypair is None:
            raise RingError("the two-pass scheme needs the private key on the prover side")
        if scheme == SCHEME_FS and keypair is None and cheater is None:
            raise RingError("need a keypair or a cheater to run FS rounds")
        self.scheme = scheme
        self.rounds = rounds if scheme == SCHEME_FS else 1
        self.rng = rng
        self.keypair = keypair
        self.cheater = cheater
        self.public = keypair.public if keypair is not None else cheater.public
        self.session_id = _session_id(rng)
        self.transcript = Transcript()
        self.decision: bool | None = None
        self.state = "start"
        self._round = 0
        self._fs_state: fs.FsProverState | None = None

    def _emit(self, frame: Frame) -> Frame:
        self.transcript.add(DIR_PROVER, frame)
        return frame

    def _commit_frame(self) -> Frame:
        if self.cheater is not None:
            state, commitment = self.cheater.commit()
        else:
            state, commitment = fs.commit(self.keypair, self.rng)
        self._fs_state = state
        return self._emit(
            Frame(MsgType.FS_COMMIT, self.session_id, self._round,
                  element_payload(commitment.u))
        )

    def start(self) -> list[Frame]:
        hello = self._emit(
            Frame(MsgType.HELLO, self.session_id, 0,
                  encode_hello(self.public, self.scheme, self.rounds))
        )
        if self.scheme == SCHEME_DH:
            self.state = "await_challenge"
            return [hello]
        out = [hello, self._commit_frame()]
        self.state = "await_challenge"
        return out

    def step(self, frame: Frame) -> list[Frame]:
        if self.state in ("done", "rejected"):
            return []
        try:
            self.transcript.add(DIR_VERIFIER, frame)
        except WireError:
            return self._fail()
        if frame.session_id != self.session_id:
            return self._fail()
        if frame.msg_type == MsgType.ACCEPT:
            self.decision = True
            self.state = "done"
            return []
        if frame.msg_type == MsgType.REJECT:
            self.decision = False
            self.state = "done"
            return []
        if self.scheme == SCHEME_DH:
            return self._step_dh(frame)
        return self._step_fs(frame)

    def _step_dh(self, frame: Frame) -> list[Frame]:
        if self.state != "await_challenge" or frame.msg_type != MsgType.DH_CHALLENGE:
            return self._fail()
        try:
            u = element_from_payload(frame.payload)
            response = dh.respond(self.keypair, dh.DhChallenge(u=u))
        except (WireError, RingError):
            return self._fail()
        self.state = "await_decision"
        return [
            self._emit(
                Frame(MsgType.DH_RESPONSE, self.session_id, 0, response.w.value)
            )
        ]

    def _step_fs(self, frame: Frame) -> list[Frame]:
        if self.state != "await_challenge" or frame.msg_type != MsgType.FS_CHALLENGE:
            return self._fail()
        if frame.round_index != self._round:
            return self._fail()
        try:
            challenge = fs.FsChallenge(bit_from_payload(frame.payload))
        except (WireError, RingError):
            return self._fail()
        if self.cheater is not None:
            response = self.cheater.respond(self._fs_state, challenge)
        else:
            response = fs.respond(self.keypair, self._fs_state, challenge)
        out = [
            self._emit(
                Frame(MsgType.FS_RESPONSE, self.session_id, self._round,
                      element_payload(response.v))
            )
        ]
        self._round += 1
        if self._round < self.rounds:
            out.append(self._commit_frame())
            self.state = "await_challenge"
        else:
            self.state = "await_decision"
        return out

    def _fail(self) -> list[Frame]:
        self.state = "rejected"
        self.decision = False
        return []


class VerifierSession:
    """Verifier-side machine; learns parameters and the public key from HELLO."""

    def __init__(self, rng: Random):
        self.rng = rng
        self.transcript = Transcript()
        self.decision: bool | None = None
        self.state = "await_hello"
        self.public: PublicKey | None = None
        self.scheme: int | None = None
        self.rounds = 0
        self.session_id: bytes | None = None
        self._round = 0
        self._dh_state: dh.DhVerifierState | None = None
        self._fs_commitment: fs.FsCommitment | None = None
        self._fs_challenge: fs.FsChallenge | None = None

    def _emit(self, frame: Frame) -> Frame:
        self.transcript.add(DIR_VERIFIER, frame)
        return frame

    def _decide(self, accepted: bool, reason: bytes = b"") -> list[Frame]:
        self.decision = accepted
        self.state = "done"
        sid = self.session_id or bytes(16)
        if accepted:
            return [self._emit(Frame(MsgType.ACCEPT, sid, self._round))]
        return [self._emit(Frame(MsgType.REJECT, sid, self._round, reason))]

    def step(self, frame: Frame) -> list[Frame]:
        if self.state == "done":
            return []
        try:
            self.transcript.add(DIR_PROVER, frame)
        except (WireError, RingError):
            self.session_id = self.session_id or frame.session_id
            return self._decide(False, REJECT_MALFORMED)
        if self.state == "await_hello":
            return self._step_hello(frame)
        if frame.session_id != self.session_id:
            return self._decide(False, REJECT_PROTOCOL)
        if self.scheme == SCHEME_DH:
            return self._step_dh(frame)
        return self._step_fs(frame)

    def _step_hello(self, frame: Frame) -> list[Frame]:
        if frame.msg_type != MsgType.HELLO:
            return self._decide(False, REJECT_PROTOCOL)
        self.session_id = frame.session_id
        self.public = self.transcript.public
        self.scheme = self.transcript.scheme
        self.rounds = self.transcript.rounds
        if self.public is None:
            return self._decide(False, REJECT_MALFORMED)
        if self.scheme == SCHEME_FS and self.rounds < 1:
            return self._decide(False, REJECT_MALFORMED)
        if self.scheme == SCHEME_DH:
            try:
                state, challenge = dh.make_challenge(self.public, self.rng)
            except Exception:
                return self._decide(False, REJECT_MALFORMED)
            self._dh_state = state
            self.transcript.audit["dh_challenge_poly"] = state.challenge_poly.to_text()
            self.state = "await_response"
            return [
                self._emit(
                    Frame(MsgType.DH_CHALLENGE, self.session_id, 0,
                          element_payload(challenge.u))
                )
            ]
        self.state = "await_commit"
        return []

    def _step_dh(self, frame: Frame) -> list[Frame]:
        if self.state != "await_response" or frame.msg_type != MsgType.DH_RESPONSE:
            return self._decide(False, REJECT_PROTOCOL)
        if len(frame.payload) != 32:
            return self._decide(False, REJECT_MALFORMED)
        response = dh.DhResponse(w=DigestValue(frame.payload))
        if dh.verify(self._dh_state, response):
            return self._decide(True)
        return self._decide(False, REJECT_FAILED)

    def _step_fs(self, frame: Frame) -> list[Frame]:
        if self.state == "await_commit":
            if frame.msg_type != MsgType.FS_COMMIT or frame.round_index != self._round:
                return self._decide(False, REJECT_PROTOCOL)
            try:
                self._fs_commitment = fs.FsCommitment(element_from_payload(frame.payload))
            except WireError:
                return self._decide(False, REJECT_MALFORMED)
            self._fs_challenge = fs.challenge_bit(self.rng)
            self.state = "await_response"
            return [
                self._emit(
                    Frame(MsgType.FS_CHALLENGE, self.session_id, self._round,
                          bit_payload(self._fs_challenge.c))
                )
            ]
        if self.state == "await_response":
            if frame.msg_type != MsgType.FS_RESPONSE or frame.round_index != self._round:
                return self._decide(False, REJECT_PROTOCOL)
            try:
                response = fs.FsResponse(element_from_payload(frame.payload))
                ok = fs.verify_round(
                    self.public, self._fs_commitment, self._fs_challenge, response
                )
            except (WireError, RingError):
                return self._decide(False, REJECT_MALFORMED)
            if not ok:
                return self._decide(False, REJECT_FAILED)
            self._round += 1
            if self._round == self.rounds:
                return self._decide(True)
            self.state = "await_commit"
            return []
        return self._decide(False, REJECT_PROTOCOL)


# -- local (in-process) sessions -------------------------------------------

def run_local_session(
    scheme: int,
    rounds: int,
    prover_rng: Random,
    verifier_rng: Random,
    keypair: KeyPair | None = None,
    cheater: fs.GuessingCheater | None = None,
) -> tuple[bool, Transcript]:
    """Pump frames between a prover and a verifier until a decision lands.

    Returns the verifier-side transcript, which carries the audit data
    replay needs.
    """
    prover = ProverSession(scheme, rounds, prover_rng, keypair=keypair, cheater=cheater)
    verifier = VerifierSession(verifier_rng)
    pending = prover.start()
    watchdog = 0
    while prover.decision is None and verifier.decision is None:
        watchdog += 1
        if watchdog > 10 * (rounds + 2):
            raise RingError("session did not converge")
        next_pending = []
        for frame in pending:
            next_pending.extend(verifier.step(frame))
        pending = []
        for frame in next_pending:
            pending.extend(prover.step(frame))
    return bool(verifier.decision), verifier.transcript


def run_dh_exchange(keypair: KeyPair, rng: Random) -> tuple[bool, Transcript]:
    """One honest two-pass exchange, prover and verifier in-process."""
    return run_local_session(SCHEME_DH, 1, rng, rng, keypair=keypair)


def run_fs_session(
    keypair: KeyPair, cfg: fs.FsSessionConfig, rng: Random
) -> tuple[bool, Transcript]:
    """One honest k-round session, prover and verifier in-process."""
    return run_local_session(SCHEME_FS, cfg.rounds, rng, rng, keypair=keypair)


def run_cheating_fs_session(
    cheater: fs.GuessingCheater, cfg: fs.FsSessionConfig, rng: Random
) -> tuple[bool, Transcript]:
    return run_local_session(SCHEME_FS, cfg.rounds, rng, rng, cheater=cheater)


def simulate_fs_transcript(
    public: PublicKey, cfg: fs.FsSessionConfig, rng: Random
) -> tuple[Transcript, fs.FsSimulation]:
    """Wrap the FS simulator's rounds into a wire transcript."""
    sim = fs.simulate_session(public, cfg, rng)
    transcript = Transcript()
    sid = _session_id(rng)
    transcript.add(DIR_PROVER, Frame(MsgType.HELLO, sid, 0, encode_hello(public, SCHEME_FS, cfg.rounds)))
    for idx, rnd in enumerate(sim.rounds):
        transcript.add(DIR_PROVER, Frame(MsgType.FS_COMMIT, sid, idx, element_payload(rnd.commitment.u)))
        transcript.add(DIR_VERIFIER, Frame(MsgType.FS_CHALLENGE, sid, idx, bit_payload(rnd.challenge.c)))
        transcript.add(DIR_PROVER, Frame(MsgType.FS_RESPONSE, sid, idx, element_payload(rnd.response.v)))
    transcript.add(DIR_VERIFIER, Frame(MsgType.ACCEPT, sid, len(sim.rounds)))
    return transcript, sim


def replay_transcript(transcript: Transcript) -> bool:
    """Re-run the verifier logic over a recorded transcript.

    Deterministic: depends only on the transcript contents (frames plus,
    for the two-pass scheme, the verifier's audit polynomial).
    """
    public = transcript.public
    if public is None:
        raise WireError("transcript has no HELLO frame")
    if transcript.scheme == SCHEME_DH:
        h = transcript.dh_audit_poly()
        if h is None:
            raise WireError("DH transcript lacks the verifier audit polynomial")
        state, challenge = dh.challenge_from_poly(public, h)
        sent = transcript.frames(MsgType.DH_CHALLENGE)
        if not sent or element_from_payload(sent[0].payload) != challenge.u:
            raise WireError("audit polynomial does not reproduce the recorded challenge")
        responses = transcript.frames(MsgType.DH_RESPONSE)
        if not responses or len(responses[0].payload) != 32:
            return False
        return dh.verify(state, dh.DhResponse(w=DigestValue(responses[0].payload)))
    if transcript.scheme == SCHEME_FS:
        rounds = transcript.fs_rounds()
        for u, c, v in rounds:
            ok = fs.verify_round(
                public, fs.FsCommitment(u), fs.FsChallenge(c), fs.FsResponse(v)
            )
            if not ok:
                return False
        return len(rounds) == transcript.rounds
    raise WireError(f"unknown scheme in transcript: {transcript.scheme}")


# -- TCP loopback transport -------------------------------------------------

def _recv_exactly(sock: socket.socket, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


def read_frame(sock: socket.socket) -> Frame | None:
    """One length-delimited frame off a socket; None on clean EOF.

    The header is validated before the payload is read, so malformed
    bytes raise immediately instead of blocking on a bogus length.
    """
    header = _recv_exactly(sock, HEADER_LEN)
    if header is None:
        return None
    msg_type, session_id, round_index, payload_len = parse_header(header)
    payload = _recv_exactly(sock, payload_len) if payload_len else b""
    if payload is None:
        raise WireError("connection lost mid-frame")
    return Frame(msg_type, session_id, round_index, payload)


class Server:
    """Loopback verifier: one session per connection, threaded."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0, seed: int | str = 0):
        self.seed = seed
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(64)
        self.address = self._sock.getsockname()
        self._lock = threading.Lock()
        self.session_log: list[tuple[bool | None, Transcript]] = []
        self._conn_count = 0
        self._closing = False
        self._threads: list[threading.Thread] = []
        self._acceptor = threading.Thread(target=self._accept_loop, daemon=True)
        self._acceptor.start()

    def _accept_loop(self):
        while not self._closing:
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            with self._lock:
                index = self._conn_count
                self._conn_count += 1
            worker = threading.Thread(
                target=self._handle, args=(conn, index), daemon=True
            )
            self._threads.append(worker)
            worker.start()

    def _handle(self, conn: socket.socket, index: int):
        from .rngutil import derive_rng

        verifier = VerifierSession(derive_rng(self.seed, "conn", index))
        try:
            while verifier.decision is None:
                try:
                    frame = read_frame(conn)
                except WireError:
                    sid = verifier.session_id or bytes(16)
                    reject = Frame(MsgType.REJECT, sid, 0, REJECT_MALFORMED)
                    verifier.transcript.add(DIR_VERIFIER, reject)
                    verifier.decision = False
                    try:
                        conn.sendall(encode_frame(reject))
                        self._drain(conn)
                    except OSError:
                        pass
                    break
                if frame is None:
                    verifier.decision = False  # connection lost mid-session
                    break
                for out in verifier.step(frame):
                    conn.sendall(encode_frame(out))
            else:
                self._drain(conn)
        except OSError:
            verifier.decision = False
        finally:
            try:
                conn.close()
            except OSError:
                pass
            with self._lock:
                self.session_log.append((verifier.decision, verifier.transcript))

    @staticmethod
    def _drain(conn: socket.socket):
        # read until the peer closes so the decision frame is not lost to
        # a reset carrying unread data
        try:
            conn.settimeout(0.2)
            while conn.recv(4096):
                pass
        except OSError:
            pass

    def close(self):
        self._closing = True
        try:
            self._sock.close()
        except OSError:
            pass
        for worker in self._threads:
            worker.join(timeout=2.0)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def connect(
    address: tuple[str, int],
    scheme: int,
    rounds: int,
    rng: Random,
    keypair: KeyPair | None = None,
    cheater: fs.GuessingCheater | None = None,
    timeout: float = 10.0,
) -> tuple[bool | None, Transcript]:
    """Run the prover side of one session against a listening verifier."""
    prover = ProverSession(scheme, rounds, rng, keypair=keypair, cheater=cheater)
    try:
        with socket.create_connection(address, timeout=timeout) as sock:
            for frame in prover.start():
                sock.sendall(encode_frame(frame))
            while prover.decision is None and prover.state != "rejected":
                frame = read_frame(sock)
                if frame is None:
                    break
                for out in prover.step(frame):
                    sock.sendall(encode_frame(out))
    except (OSError, WireError):
        pass  # connection loss mid-session: rejected locally
    return prover.decision, prover.transcript
