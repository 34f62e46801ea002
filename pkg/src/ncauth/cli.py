"""Command-line front end: key generation, protocol runs, experiments.

Exit codes: 0 accept/pass, 1 reject/fail, 2 usage error, 3 internal
error.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments, fs, session
from .keys import (
    SystemParams,
    generate_keypair,
    load_keypair,
    save_keypair,
)
from .polynomials import PolynomialSamplerConfig
from .ring import MODULUS_LIMIT, RingDescriptor
from .rngutil import derive_rng
from .wire import SCHEME_DH, SCHEME_FS

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _is_prime(n: int) -> bool:
    # deterministic Miller-Rabin; bases 2,3,5,7 decide primality below 3.2e9
    if n < 2:
        return False
    for p in (2, 3, 5, 7):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _parse_address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"address must be host:port, got {text!r}")
    return host, int(port)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncauth",
        description="Authentication schemes over non-commutative matrix rings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    keygen = sub.add_parser("keygen", help="generate a keypair file")
    keygen.add_argument("--dim", type=int, default=3)
    keygen.add_argument("--modulus", type=int, default=2147483647)
    keygen.add_argument("--m", type=int, default=3)
    keygen.add_argument("--n", type=int, default=5)
    keygen.add_argument("--max-deg", type=int, default=5)
    keygen.add_argument("--max-coeff", type=int, default=1 << 16)
    keygen.add_argument("--seed", default="0")
    keygen.add_argument("--out", required=True)

    run = sub.add_parser("run", help="run a protocol session")
    run.add_argument("--scheme", choices=("dh", "fs"), required=True)
    run.add_argument("--rounds", type=int, default=10, help="FS round count")
    run.add_argument("--key", required=True, help="keypair file from keygen")
    run.add_argument("--listen", help="serve as verifier on host:port")
    run.add_argument("--connect", help="connect as prover to host:port")
    run.add_argument("--cheat", choices=("guess",), help="run a keyless cheating prover")
    run.add_argument("--seed", default="0")
    run.add_argument("--transcript", help="write the session transcript (.ncrt)")
    run.add_argument(
        "--max-sessions", type=int, default=0,
        help="with --listen: stop after this many sessions (0 = until interrupted)",
    )

    exp = sub.add_parser("experiment", help="statistical experiment with report")
    exp.add_argument("kind", choices=sorted(experiments.EXPERIMENTS))
    exp.add_argument("--trials", type=int, default=0, help="override the default trial count")
    exp.add_argument("--seed", default="0")
    exp.add_argument("--rounds-list", default="", help="comma-separated k values")
    exp.add_argument("--report", default="", help="JSON report path")
    exp.add_argument("--no-report", action="store_true", help="do not write the JSON file")
    return parser


def _cmd_keygen(args, parser) -> int:
    if args.dim < 2:
        parser.error(f"--dim must be >= 2 (non-commutativity needs d >= 2), got {args.dim}")
    if not 2 <= args.modulus < MODULUS_LIMIT:
        parser.error(f"--modulus must satisfy 2 <= q < 2**31, got {args.modulus}")
    if not _is_prime(args.modulus):
        parser.error(f"--modulus must be prime, got {args.modulus}")
    if args.m < 1 or args.n < 1:
        parser.error(f"exponents must be >= 1, got m={args.m} n={args.n}")
    if args.max_deg < 1 or args.max_coeff < 1:
        parser.error("--max-deg and --max-coeff must be >= 1")
    params = SystemParams(
        ring=RingDescriptor(args.dim, args.modulus),
        m=args.m,
        n=args.n,
        sampler=PolynomialSamplerConfig(args.max_deg, args.max_coeff),
    )
    keypair = generate_keypair(params, derive_rng(args.seed, "keygen"))
    save_keypair(keypair, args.out)
    print(f"wrote {args.out}")
    print(f"public key fingerprint: {keypair.public.fingerprint()}")
    return EXIT_ACCEPT


def _cmd_run(args, parser) -> int:
    if args.listen and args.connect:
        parser.error("--listen and --connect are mutually exclusive")
    if args.rounds < 1:
        parser.error(f"--rounds must be >= 1, got {args.rounds}")
    if args.cheat and args.scheme != "fs":
        parser.error("--cheat applies to the fs scheme only")
    keypair = load_keypair(args.key)
    scheme = SCHEME_DH if args.scheme == "dh" else SCHEME_FS
    rounds = args.rounds if scheme == SCHEME_FS else 1

    if args.listen:
        host, port = _parse_address(args.listen)
        with session.Server(host=host, port=port, seed=args.seed) as server:
            print(f"verifier listening on {server.address[0]}:{server.address[1]}")
            try:
                import time

                while True:
                    time.sleep(0.1)
                    done = len(server.session_log)
                    if args.max_sessions and done >= args.max_sessions:
                        break
            except KeyboardInterrupt:
                pass
        accepted = sum(1 for decision, _ in server.session_log if decision)
        print(f"sessions: {len(server.session_log)}, accepted: {accepted}")
        return EXIT_ACCEPT

    cheater = None
    if args.cheat:
        cheater = fs.GuessingCheater(keypair.public, derive_rng(args.seed, "cheat"))

    if args.connect:
        address = _parse_address(args.connect)
        decision, transcript = session.connect(
            address,
            scheme,
            rounds,
            derive_rng(args.seed, "prover"),
            keypair=None if cheater else keypair,
            cheater=cheater,
        )
    else:
        rng = derive_rng(args.seed, "local")
        if cheater is not None:
            decision, transcript = session.run_cheating_fs_session(
                cheater, fs.FsSessionConfig(rounds), rng
            )
        elif scheme == SCHEME_DH:
            decision, transcript = session.run_dh_exchange(keypair, rng)
        else:
            decision, transcript = session.run_fs_session(
                keypair, fs.FsSessionConfig(rounds), rng
            )

    if args.transcript:
        transcript.save(args.transcript)
        print(f"transcript written to {args.transcript}")
    if decision:
        print("ACCEPT")
        return EXIT_ACCEPT
    reason = "" if decision is False else " (no decision: connection lost)"
    print(f"REJECT{reason}")
    return EXIT_REJECT


def _cmd_experiment(args, parser) -> int:
    kind = args.kind
    kwargs = {"seed": args.seed}
    if args.rounds_list:
        try:
            ks = tuple(int(part) for part in args.rounds_list.split(","))
        except ValueError:
            parser.error(f"--rounds-list must be comma-separated integers, got {args.rounds_list!r}")
        if any(k < 1 for k in ks):
            parser.error("every round count must be >= 1")
        if kind == "soundness":
            kwargs["round_counts"] = ks
        elif kind == "completeness":
            kwargs["fs_round_counts"] = ks
        else:
            parser.error(f"--rounds-list does not apply to {kind}")
    if args.trials:
        if args.trials < 1:
            parser.error("--trials must be >= 1")
        trial_arg = {
            "completeness": "dh_trials",
            "soundness": "sessions",
            "psd": "trials",
            "zk": "retry_rounds",
        }[kind]
        kwargs[trial_arg] = args.trials
    report = experiments.EXPERIMENTS[kind](**kwargs)
    print(report.to_text())
    if not args.no_report:
        path = args.report or f"ncauth-{kind}-report.json"
        report.save(path)
        print(f"report written to {path}")
    return EXIT_ACCEPT if report.passed else EXIT_REJECT


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "keygen":
            return _cmd_keygen(args, parser)
        if args.command == "run":
            return _cmd_run(args, parser)
        return _cmd_experiment(args, parser)
    except SystemExit:
        raise
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as exc:  # internal failure contract
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
