"""Command-line driver: one subcommand per flow, JSON first, tables second.

Exit codes: 0 success, 2 protocol abort, 1 usage or internal error.
Cross-process runs use ``--role alice`` (listens on ``--endpoint``) and
``--role bob`` (connects). ``--role both`` runs the two parties in-process.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .errors import QotError
from .net import Channel, connect, parse_endpoint, serve
from .predicates import k_out_of_n, parse_predicate, string_ot
from .protocols import (
    PartyResult,
    SessionConfig,
    Transcript,
    _jsonable,
    bit_ot_bodies,
    predicate_ot_bodies,
    run_party,
    run_session,
    zkoqs_bodies,
)
from .wire import FrameType, encode_frame

EXIT_OK, EXIT_ERROR, EXIT_ABORT = 0, 1, 2
SESSION_COMMANDS = ("ot-bit", "ot-string", "ot-kn", "zkoqs")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunRecord:
    command: str
    argv: list[str]
    role: str
    seed: int
    config: Optional[dict]
    outputs: dict
    exit_code: int
    transcript_path: Optional[str] = None
    transcript_digest: Optional[str] = None
    wall_clock_s: float = 0.0
    stats: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))


# -- argument parsing -----------------------------------------------------


def _bitstring(text: str) -> list[int]:
    if not text or any(ch not in "01" for ch in text):
        raise argparse.ArgumentTypeError(f"expected a bit string, got {text!r}")
    return [int(ch) for ch in text]


def _index_set(text: str) -> frozenset[int]:
    if text.strip() in ("", "-"):
        return frozenset()
    try:
        return frozenset(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated indices, got {text!r}") from exc


def _common(p: argparse.ArgumentParser, session: bool) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (falls back to QOTF_SEED, then 0)")
    p.add_argument("--out", default=None, help="directory for the run record, transcript and CSV")
    p.add_argument("--zk", choices=("ideal", "nizk"), default="nizk")
    p.add_argument("--fh", choices=("crs", "plain"), default="crs")
    p.add_argument("--hash", choices=("demo", "toy"), default="toy")
    p.add_argument("--witness-len", type=int, default=8)
    p.add_argument("--output-len", type=int, default=None)
    p.add_argument("--repetitions", type=int, default=40, help="NIZK parallel repetitions")
    p.add_argument("--crs-seed", default=None, help="32-byte hex; falls back to QOTF_CRS_SEED")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--pred", default=None, help="singleton:N, any:N, string:M or kn:K,L,M")
    p.add_argument("--trials", type=int, default=None)
    if session:
        p.add_argument("--role", choices=("alice", "bob", "both"), default="both")
        p.add_argument("--endpoint", default="mem:", help="host:port or mem:")
        p.add_argument("--timeout", type=float, default=30.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qotlab", description="Hashed-qubit OT and ZKoQS experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ot-bit", help="bit OT (Alice chooses b, Bob holds m0 m1)")
    _common(p, True)
    p.add_argument("--b", type=int, choices=(0, 1))
    p.add_argument("--m0", type=int, choices=(0, 1))
    p.add_argument("--m1", type=int, choices=(0, 1))

    p = sub.add_parser("ot-string", help="1-out-of-2 string OT on m-bit strings")
    _common(p, True)
    p.add_argument("--m", type=int, default=1, help="string length")
    p.add_argument("--choice", type=int, choices=(0, 1))
    p.add_argument("--messages", type=_bitstring, help="both strings concatenated, 2m bits")

    p = sub.add_parser("ot-kn", help="k-out-of-m OT on l-bit blocks")
    _common(p, True)
    p.add_argument("--k", type=int, default=1, help="blocks Alice learns")
    p.add_argument("--l", type=int, default=1, help="block length")
    p.add_argument("--m", type=int, default=2, help="number of blocks")
    p.add_argument("--choice", type=_index_set, help="chosen block indices, 1-based, comma-separated")
    p.add_argument("--messages", type=_bitstring, help="all blocks concatenated, l*m bits")

    p = sub.add_parser("zkoqs", help="semi-collapse proof of a product input state")
    _common(p, True)
    p.add_argument("--T", dest="measured", type=_index_set, default=None,
                   help="measured qubits, 1-based, comma-separated")

    p = sub.add_parser("attack", help="run a registered attack strategy")
    _common(p, False)
    p.add_argument("--id", required=True)
    p.add_argument("--beta", type=float, default=None)

    p = sub.add_parser("game", help="run a registered hybrid game")
    _common(p, False)
    p.add_argument("--id", required=True)

    p = sub.add_parser("check-membership", help="honest ZKoQS outputs against the semi-collapse language")
    _common(p, False)
    p.add_argument("--T", dest="measured", type=_index_set, default=None)

    p = sub.add_parser("check-postponable", help="exact postponability check of a predicate")
    _common(p, False)
    p.add_argument("--max-width", type=int, default=3)

    p = sub.add_parser("bench", help="qubit counts, wire bytes and timings across witness lengths")
    _common(p, False)
    p.add_argument("--witness-lens", default="8,64,160")

    p = sub.add_parser("replay", help="re-run a recorded session against its transcript")
    p.add_argument("record", help="path to run_record.json")
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QOTF_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"QOTF_SEED must be an integer, got {env!r}") from exc
    return 0


def _config(args, **kw) -> SessionConfig:
    crs = args.crs_seed or os.environ.get("QOTF_CRS_SEED")
    if crs is not None:
        try:
            if len(bytes.fromhex(crs)) != 32:
                raise ValueError
        except ValueError as exc:
            raise UsageError("CRS seed must be 32 bytes of hex") from exc
    return SessionConfig(zk_backend=args.zk, fh_mode=args.fh, hash_profile=args.hash,
                         witness_len=args.witness_len, output_len=args.output_len,
                         seed=_seed(args), crs_seed_hex=crs, repetitions=args.repetitions, **kw)


# -- session flows --------------------------------------------------------


def _session_setup(args):
    """(config, alice_body, bob_body, alice_formatter)."""
    cmd = args.command
    alice_side = args.role in ("alice", "both")
    bob_side = args.role in ("bob", "both")
    if cmd == "ot-bit":
        if alice_side and args.b is None:
            raise UsageError("--b is required for Alice")
        if bob_side and (args.m0 is None or args.m1 is None):
            raise UsageError("--m0 and --m1 are required for Bob")
        config = _config(args)
        m = (args.m0, args.m1) if bob_side else None
        a, b = bit_ot_bodies(args.b, m, config)
        return config.replace(n=2, predicate=None), a, b, lambda out: f"m_b={out}"
    if cmd in ("ot-string", "ot-kn"):
        if cmd == "ot-string":
            pred = string_ot(args.m)
            blocks, m = 2, args.m
            chosen_blocks = None if args.choice is None else frozenset({args.choice + 1})
        else:
            pred = k_out_of_n(args.k, args.l, args.m)
            blocks, m = args.m, args.l
            chosen_blocks = args.choice
        if alice_side:
            if chosen_blocks is None:
                raise UsageError("--choice is required for Alice")
            if any(c < 1 or c > blocks for c in chosen_blocks):
                raise UsageError(f"block indices must be in 1..{blocks}")
        if bob_side and (args.messages is None or len(args.messages) != pred.n):
            raise UsageError(f"--messages needs exactly {pred.n} bits")
        chosen = None
        if chosen_blocks is not None:
            chosen = frozenset(i for c in chosen_blocks for i in range((c - 1) * m + 1, c * m + 1))
        config = _config(args, n=pred.n, predicate=pred)
        a, b = predicate_ot_bodies(chosen, args.messages if bob_side else None, config)

        def fmt(out):
            parts = []
            for c in sorted(chosen_blocks):
                bits = "".join(str(out[i]) for i in range((c - 1) * m + 1, c * m + 1))
                parts.append(f"block{c}={bits}")
            return " ".join(parts)

        return config, a, b, fmt
    if cmd == "zkoqs":
        if args.pred is None:
            raise UsageError("--pred is required for zkoqs")
        pred = parse_predicate(args.pred)
        config = _config(args, n=pred.n, predicate=pred)
        if alice_side and args.measured is None:
            raise UsageError("--T is required for the prover")
        a, b = zkoqs_bodies(args.measured, config)
        return config, a, b, lambda out: "omega=" + json.dumps({str(k): v for k, v in sorted(out.items())})
    raise UsageError(f"unknown session command {cmd}")


def _bob_format(out) -> str:
    from .qsim import SparseState

    if isinstance(out, SparseState):
        return "residual=" + out.to_json()
    return str(out)


def _run_session_cmd(args, out_dir: Optional[Path], argv: list[str]) -> int:
    config, alice_body, bob_body, fmt = _session_setup(args)
    if args.role != "both" and config.zk_backend == "ideal":
        raise UsageError("the ideal ZK backend exists only in-process; use --zk nizk across processes")
    t0 = time.perf_counter()
    if args.role == "both":
        channel = "mem" if parse_endpoint(args.endpoint) is None else "socket"
        res = run_session(alice_body, bob_body, channel)
        results = {"alice": res.alice, "bob": res.bob}
        transcript = res.transcript
    else:
        if parse_endpoint(args.endpoint) is None:
            raise UsageError("a single role needs --endpoint host:port")
        chan = serve(args.endpoint, args.timeout) if args.role == "alice" else connect(args.endpoint, args.timeout)
        try:
            body = alice_body if args.role == "alice" else bob_body
            result = run_party(chan, lambda: body(chan))
        finally:
            chan.close()
        peer = "bob" if args.role == "alice" else "alice"
        transcript = Transcript.from_channel(chan, args.role, peer)
        results = {args.role: result}
        transcript.outputs = {args.role: _jsonable(result.output), f"{args.role}_abort": result.abort_site}
    elapsed = time.perf_counter() - t0

    aborted = any(r.aborted for r in results.values())
    for role, r in results.items():
        if r.aborted:
            print(f"{role}: ABORT {r.abort_site}")
        elif role == "alice":
            print(fmt(r.output))
        else:
            print(f"bob: {_bob_format(r.output)}" if args.role == "both" else _bob_format(r.output))
    code = EXIT_ABORT if aborted else EXIT_OK
    outputs = {role: _jsonable(r.output) for role, r in results.items()}
    outputs.update({f"{role}_abort": r.abort_site for role, r in results.items()})
    stats = {"messages": transcript.message_count, "bytes": transcript.total_bytes,
             "wall_clock_s": elapsed}
    if out_dir is not None:
        tpath = out_dir / "transcript.jsonl"
        tpath.write_text(transcript.to_jsonl())
        record = RunRecord(args.command, argv, args.role, config.seed, config.to_dict(), outputs, code,
                           tpath.name, transcript.digest(), elapsed, stats)
        (out_dir / "run_record.json").write_text(record.to_json())
        _write_csv(out_dir / "stats.csv", [{"command": args.command, "role": args.role, **stats,
                                             "exit_code": code}])
    return code


# -- replay ---------------------------------------------------------------


class ReplayChannel(Channel):
    """Feeds the peer's recorded frames back; outgoing frames are only logged."""

    def __init__(self, transcript: Transcript, me: str):
        super().__init__(timeout=1.0)
        self._incoming = bytearray()
        incoming = [e for e in transcript.entries if e.direction.endswith(f"->{me}")]
        for i, e in enumerate(incoming):
            last = i + 1 == len(incoming) or incoming[i + 1].message != e.message
            self._incoming += encode_frame(FrameType[e.ftype], e.payload, last)

    def _write(self, data: bytes) -> None:
        pass

    def _read_exact(self, n: int) -> bytes:
        if len(self._incoming) < n:
            raise QotError("recorded transcript exhausted")
        out = bytes(self._incoming[:n])
        del self._incoming[:n]
        return out


def _frames(entries, me: str) -> list[tuple[str, str, bytes]]:
    return [(e.direction, e.ftype, e.payload) for e in entries if e.direction.startswith(f"{me}->")]


def replay(record_path: str | Path) -> tuple[bool, dict]:
    """Re-run each recorded role against the recorded peer frames; the role's
    outgoing frames and output must match byte for byte."""
    record_path = Path(record_path)
    record = RunRecord.from_json(record_path.read_text())
    if record.command not in SESSION_COMMANDS:
        raise UsageError("only session commands can be replayed")
    transcript = Transcript.from_jsonl((record_path.parent / record.transcript_path).read_text())
    args = build_parser().parse_args(record.argv)
    if args.seed is None:
        args.seed = record.seed
    roles = ["alice", "bob"] if record.role == "both" else [record.role]
    args.role = record.role
    _, alice_body, bob_body, _ = _session_setup(args)
    report = {}
    ok = True
    for role in roles:
        chan = ReplayChannel(transcript, role)
        body = alice_body if role == "alice" else bob_body
        result: PartyResult = run_party(chan, lambda: body(chan))
        peer = "bob" if role == "alice" else "alice"
        got = Transcript.from_channel(chan, role, peer)
        frames_ok = _frames(got.entries, role) == _frames(transcript.entries, role)
        out_ok = _jsonable(result.output) == record.outputs.get(role)
        report[role] = {"frames_match": frames_ok, "output_match": out_ok}
        ok &= frames_ok and out_ok
    return ok, report


# -- analysis commands ----------------------------------------------------


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        return
    keys = list(dict.fromkeys(k for r in rows for k in r))
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(rows)


def _emit(report_json: str, report_csv: Optional[str], out_dir: Optional[Path], record: RunRecord) -> None:
    print(report_json)
    if out_dir is not None:
        (out_dir / "report.json").write_text(report_json)
        if report_csv is not None:
            (out_dir / "stats.csv").write_text(report_csv)
        (out_dir / "run_record.json").write_text(record.to_json())


def _attack_config(args, argv) -> Optional[SessionConfig]:
    # without explicit hash flags each strategy picks its own default
    if not any(a.split("=")[0] in ("--witness-len", "--hash", "--output-len") for a in argv):
        return None
    return SessionConfig(zk_backend="ideal", fh_mode=args.fh, hash_profile=args.hash,
                         witness_len=args.witness_len, output_len=args.output_len, seed=_seed(args))


def _cmd_attack(args, out_dir, argv) -> int:
    from .harness import run_attack

    params = {} if args.beta is None else {"beta": args.beta}
    seed = _seed(args)
    t0 = time.perf_counter()
    report = run_attack(args.id, _attack_config(args, argv), args.trials or 1000, seed, **params)
    rec = RunRecord("attack", argv, "-", seed, report.config, report.frequencies, EXIT_OK,
                    wall_clock_s=time.perf_counter() - t0)
    _emit(report.to_json(), report.to_csv(), out_dir, rec)
    _table(sys.stderr, [(k, f"{v:.4f}", report.predicted.get(k, "")) for k, v in report.frequencies.items()],
           ("metric", "measured", "predicted"))
    return EXIT_OK


def _cmd_game(args, out_dir, argv) -> int:
    from .harness import run_hybrid_game

    report = run_hybrid_game(args.id)
    rec = RunRecord("game", argv, "-", _seed(args), report.config, report.measured, EXIT_OK)
    _emit(report.to_json(), report.to_csv(), out_dir, rec)
    _table(sys.stderr, [(k, f"{v:.3e}", report.bound.get(k, "")) for k, v in report.measured.items()],
           ("metric", "measured", "bound"))
    return EXIT_OK


def _cmd_check_membership(args, out_dir, argv) -> int:
    from .functionalities import check_semicollapsed_membership
    from .protocols import run_zkoqs_semicollapse
    from .qsim import to_density_matrix

    if args.pred is None or args.measured is None:
        raise UsageError("--pred and --T are required")
    pred = parse_predicate(args.pred)
    seed = _seed(args)
    trials = args.trials or 20
    counts = {"in_language": 0, "in_subclass": 0, "aborted": 0}
    for t in range(trials):
        cfg = _config(args, n=pred.n, predicate=pred).replace(seed=seed + t)
        res = run_zkoqs_semicollapse(args.measured, cfg)
        if res.aborted:
            counts["aborted"] += 1
            continue
        rho = to_density_matrix(res.bob.output, [f"D{i}" for i in range(1, pred.n + 1)])
        rep = check_semicollapsed_membership(rho, pred, (args.measured, res.alice.output))
        counts["in_language"] += rep.in_language
        counts["in_subclass"] += bool(rep.in_subclass)
    summary = {"trials": trials, **counts, "predicate": pred.describe(), "T": sorted(args.measured)}
    rec = RunRecord("check-membership", argv, "-", seed, None, summary,
                    EXIT_ABORT if counts["aborted"] else EXIT_OK)
    _emit(json.dumps(summary, indent=2, sort_keys=True, default=str), None, out_dir, rec)
    return rec.exit_code


def _cmd_check_postponable(args, out_dir, argv) -> int:
    from .functionalities import check_postponable

    if args.pred is None:
        raise UsageError("--pred is required")
    pred = parse_predicate(args.pred)
    report = check_postponable(pred, max_width=args.max_width)
    data = asdict(report)
    rec = RunRecord("check-postponable", argv, "-", _seed(args), None,
                    {"passed": report.passed}, EXIT_OK)
    _emit(json.dumps(data, indent=2, sort_keys=True, default=str), None, out_dir, rec)
    return EXIT_OK


def bench_rows(witness_lens, trials: int = 3, seed: int = 0) -> list[dict]:
    """One row per witness length: qubit counts, bytes on wire and phase timings
    of an ideal-ZK bit OT, plus the toy NIZK proof size where it applies."""
    from . import hashfam
    from .protocols import bit_ot_alice_prepare, run_bit_ot
    from .zk import NizkBackend, RandomOracle
    import numpy as np

    rows = []
    for wl in witness_lens:
        profiles = ["toy", "demo"] if wl + 1 <= hashfam.TOY_MAX_INPUT else ["demo"]
        for profile in profiles:
            cfg = SessionConfig(hash_profile=profile, witness_len=wl, seed=seed)
            key = hashfam.crs_key(cfg.crs_seed, profile, wl, cfg.output_len)
            rng = np.random.default_rng(seed)
            t0 = time.perf_counter()
            for _ in range(trials):
                prep = bit_ot_alice_prepare(0, key, rng)
            t_prep = (time.perf_counter() - t0) / trials
            t0 = time.perf_counter()
            res = None
            for k in range(trials):
                res = run_bit_ot(k & 1, (0, 1), cfg.replace(seed=seed + k))
            t_session = (time.perf_counter() - t0) / trials
            row = {"witness_len": wl, "hash": profile,
                   "data_qubits": 2, "witness_qubits": 2 * wl, "qubits_total": 2 * (1 + wl),
                   "bytes_on_wire": res.transcript.total_bytes,
                   "qstate_bytes": res.transcript.bytes_of("QSTATE"),
                   "messages": res.transcript.message_count,
                   "alice_prepare_s": t_prep, "session_s": t_session,
                   "proof_bytes": "", "prove_s": "", "verify_s": ""}
            if profile == "toy" and wl <= 16:
                be = NizkBackend(RandomOracle(b"bench"))
                t0 = time.perf_counter()
                proof = be.prove(prep.statement, prep.witness, rng)
                row["prove_s"] = time.perf_counter() - t0
                t0 = time.perf_counter()
                be.verify(prep.statement, proof)
                row["verify_s"] = time.perf_counter() - t0
                row["proof_bytes"] = len(proof)
            rows.append(row)
    return rows


def _cmd_bench(args, out_dir, argv) -> int:
    try:
        wls = [int(v) for v in args.witness_lens.split(",")]
    except ValueError as exc:
        raise UsageError("--witness-lens takes comma-separated integers") from exc
    seed = _seed(args)
    rows = bench_rows(wls, args.trials or 3, seed)
    print(json.dumps(rows, indent=2))
    _table(sys.stderr, [(r["witness_len"], r["hash"], r["qubits_total"], r["bytes_on_wire"],
                         f"{r['session_s'] * 1e3:.2f}", r["proof_bytes"]) for r in rows],
           ("witness_len", "hash", "qubits", "bytes", "session_ms", "proof_bytes"))
    if out_dir is not None:
        _write_csv(out_dir / "stats.csv", rows)
        (out_dir / "run_record.json").write_text(
            RunRecord("bench", argv, "-", seed, None, {"rows": len(rows)}, EXIT_OK).to_json())
    return EXIT_OK


def _table(stream, rows, header) -> None:
    cells = [tuple(str(c) for c in header)] + [tuple(str(c) for c in r) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        stream.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "replay":
            ok, report = replay(args.record)
            print(json.dumps({"replay_ok": ok, **report}, indent=2))
            return EXIT_OK if ok else EXIT_ERROR
        out_dir = None
        if args.out is not None:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
        if args.command in SESSION_COMMANDS:
            return _run_session_cmd(args, out_dir, argv)
        handler = {"attack": _cmd_attack, "game": _cmd_game, "check-membership": _cmd_check_membership,
                   "check-postponable": _cmd_check_postponable, "bench": _cmd_bench}[args.command]
        return handler(args, out_dir, argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    except (QotError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
