"""Command-line front door.

Every subcommand is a thin adapter over the same operations the HTTP
service exposes; pass --server to route through a running service instead
of executing locally. Exit codes: 0 success, 1 gate failure or Halted run
or a Counterexample verdict, 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx

from .benches import BUNDLED, bench_text
from .errors import DomainError, LockforgeError
from .fixtures import reference_config_yaml
from .lockers import SCHEMES
from .pipeline import record_fingerprint, read_record, render_report
from .service import handlers
from .transcripts import BUNDLED as BUNDLED_TRANSCRIPTS, transcript_text

BUNDLED_PREFIX = "bundled:"


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise DomainError(f"cannot read {path}: {e.strerror}") from None


def _bench_arg(value: str) -> str:
    if value.startswith(BUNDLED_PREFIX):
        name = value[len(BUNDLED_PREFIX):]
        if name not in BUNDLED:
            raise DomainError(f"no bundled bench {name!r}; have {', '.join(BUNDLED)}")
        return bench_text(name)
    return _read_file(value)


def _config_arg(value: str) -> str:
    if value.startswith(BUNDLED_PREFIX):
        name = value[len(BUNDLED_PREFIX):]
        if name != "reference":
            raise DomainError(f"the only bundled config is {BUNDLED_PREFIX}reference")
        return reference_config_yaml()
    return _read_file(value)


def _transcript_arg(value: str) -> tuple[str | None, str | None]:
    """(text, path): bundled transcripts come back as text, files as paths."""
    if value.startswith(BUNDLED_PREFIX):
        name = value[len(BUNDLED_PREFIX):]
        if name not in BUNDLED_TRANSCRIPTS:
            raise DomainError(
                f"no bundled transcript {name!r}; have {', '.join(BUNDLED_TRANSCRIPTS)}")
        return transcript_text(name), None
    return None, value


def _client(args) -> httpx.Client:
    return httpx.Client(base_url=args.server, timeout=600.0)


def _remote(args, method: str, path: str, body: dict | None = None) -> dict:
    with _client(args) as client:
        r = client.request(method, path, json=body)
    if r.status_code >= 400:
        try:
            detail = r.json().get("detail", r.text)
        except ValueError:
            detail = r.text
        raise DomainError(f"server {r.status_code}: {detail}")
    return r.json()


def _emit(args, doc: dict, plain: str) -> None:
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(plain)


def cmd_score(args) -> int:
    checklist = _read_file(args.checklist)
    sheet = _read_file(args.sheet)
    if args.server:
        doc = _remote(args, "POST", "/score", {
            "checklist_yaml": checklist, "sheet_yaml": sheet, "repro": args.repro,
        })
    else:
        doc = handlers.score_response(handlers.compute_score(checklist, sheet, args.repro))
    _emit(args, doc, str(doc["score"]))
    return 0


def cmd_verify(args) -> int:
    body = {
        "golden_bench": _bench_arg(args.golden),
        "locked_bench": _bench_arg(args.locked),
        "key_json": _read_file(args.key),
        "exhaustive_cutoff": args.exhaustive_cutoff,
        "samples": args.samples,
        "seed": args.seed,
        "cycles": args.cycles,
    }
    if args.server:
        doc = _remote(args, "POST", "/verify", body)
    else:
        doc = handlers.verify_equivalence(
            body["golden_bench"], body["locked_bench"], body["key_json"],
            exhaustive_cutoff=args.exhaustive_cutoff, samples=args.samples,
            seed=args.seed, cycles=args.cycles,
        )
    lines = [f"{doc['verdict']} ({doc['mode']}, {doc['vectors_checked']} vectors checked)"]
    if doc["counterexample"] is not None:
        lines.append(f"counterexample: {json.dumps(doc['counterexample'])}")
    lines.append(f"corruption: {doc['corruption']}")
    _emit(args, doc, "\n".join(lines))
    return 0 if doc["verdict"] == "Equivalent" else 1


def cmd_lock_ref(args) -> int:
    body = {
        "scheme": args.scheme,
        "bench": _bench_arg(args.bench),
        "key_bits": args.key_bits,
        "seed": args.seed,
        "h": args.h,
    }
    if args.server:
        doc = _remote(args, "POST", "/lock", body)
    else:
        doc = handlers.lock_reference(
            args.scheme, body["bench"], args.key_bits, args.seed, args.h,
        )
    with open(args.out_bench, "w", encoding="utf-8") as f:
        f.write(doc["locked_bench"])
    with open(args.out_key, "w", encoding="utf-8") as f:
        f.write(doc["key_json"] + "\n")
    doc = {**doc, "out_bench": args.out_bench, "out_key": args.out_key}
    _emit(args, doc,
          f"{doc['scheme']}: locked netlist -> {args.out_bench}, "
          f"key -> {args.out_key}, sites: {', '.join(doc['sites'])}")
    return 0


def _finish_run(args, doc: dict) -> int:
    _emit(args, doc, doc["report"].rstrip("\n"))
    return 0 if doc["status"] == "Final" else 1


def _local_run_doc(rec, run_dir: str) -> dict:
    return {
        "run_dir": run_dir,
        "status": rec.status,
        "halt_reason": rec.halt_reason,
        "record": rec.to_dict(),
        "fingerprint": record_fingerprint(run_dir),
        "report": render_report(run_dir),
    }


def cmd_run(args) -> int:
    config = _config_arg(args.config)
    if args.server:
        body: dict = {"config_yaml": config, "record": args.record}
        if args.provider:
            body["provider"] = {"name": args.provider, "base_url": args.provider_url}
        return _finish_run(args, _remote(args, "POST", "/runs", body))
    provider = None
    if args.provider or args.provider_url:
        if not (args.provider and args.provider_url):
            raise DomainError("--provider and --provider-url go together")
        provider = (args.provider, args.provider_url)
    record_path = f"{args.out.rstrip('/')}/transcript.jsonl" if args.record else None
    rec = handlers.execute_run(config, args.out, provider=provider, record_path=record_path)
    return _finish_run(args, _local_run_doc(rec, args.out))


def cmd_replay(args) -> int:
    config = _config_arg(args.config)
    text, path = _transcript_arg(args.transcript)
    if args.server:
        body = {"config_yaml": config, "transcript": text if text is not None else _read_file(path)}
        return _finish_run(args, _remote(args, "POST", "/runs", body))
    if text is not None:
        rec = handlers.replay_text(config, text, args.out)
    else:
        rec = handlers.execute_run(config, args.out, transcript_path=path)
    return _finish_run(args, _local_run_doc(rec, args.out))


def cmd_report(args) -> int:
    if args.server:
        if args.json:
            doc = _remote(args, "GET", f"/runs/{args.target}")
            print(json.dumps(doc, indent=2, sort_keys=True))
        else:
            with _client(args) as client:
                r = client.get(f"/runs/{args.target}/report")
            if r.status_code >= 400:
                raise DomainError(f"server {r.status_code}: {r.text}")
            print(r.text.rstrip("\n"))
        return 0
    text = render_report(args.target)
    if args.json:
        doc = {
            "record": read_record(args.target).to_dict(),
            "fingerprint": record_fingerprint(args.target),
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text.rstrip("\n"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--server", metavar="URL",
                        help="route through a running lockforge service")

    p = argparse.ArgumentParser(
        prog="lockforge",
        description="Paper-to-code pipeline for logic locking.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", parents=[common], help="full pipeline from a config")
    sp.add_argument("--config", required=True,
                    help=f"config YAML path, or {BUNDLED_PREFIX}reference")
    sp.add_argument("--out", required=True, help="run directory to create")
    sp.add_argument("--provider", help="LLM provider name (credential: LOCKFORGE_API_KEY_<NAME>)")
    sp.add_argument("--provider-url", help="provider base URL")
    sp.add_argument("--record", action="store_true",
                    help="save the transcript into the run directory")
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("score", parents=[common],
                        help="checklist + verdict sheet + R -> score")
    sp.add_argument("--checklist", required=True, help="checklist YAML path")
    sp.add_argument("--sheet", required=True, help="verdict sheet YAML path")
    sp.add_argument("--repro", type=float, default=0.0, help="reproducibility rating R")
    sp.set_defaults(fn=cmd_score)

    sp = sub.add_parser("verify", parents=[common],
                        help="golden + locked + key -> equivalence report")
    sp.add_argument("--golden", required=True,
                    help=f"bench path or {BUNDLED_PREFIX}<name>")
    sp.add_argument("--locked", required=True, help="locked bench path")
    sp.add_argument("--key", required=True, help="key JSON path")
    sp.add_argument("--exhaustive-cutoff", type=int, default=16)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cycles", type=int, default=64)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("lock-ref", parents=[common],
                        help="lock a bench with a reference scheme")
    sp.add_argument("--scheme", required=True, choices=sorted(SCHEMES))
    sp.add_argument("--bench", required=True,
                    help=f"bench path or {BUNDLED_PREFIX}<name>")
    sp.add_argument("--key-bits", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--h", type=int, default=None,
                    help="Hamming distance (point-function-hd only)")
    sp.add_argument("--out-bench", required=True)
    sp.add_argument("--out-key", required=True)
    sp.set_defaults(fn=cmd_lock_ref)

    sp = sub.add_parser("replay", parents=[common], help="run under a recorded transcript")
    sp.add_argument("--config", required=True,
                    help=f"config YAML path, or {BUNDLED_PREFIX}reference")
    sp.add_argument("--transcript", required=True,
                    help=f"transcript path, or {BUNDLED_PREFIX}<name> "
                         f"({', '.join(BUNDLED_TRANSCRIPTS)})")
    sp.add_argument("--out", required=True, help="run directory to create")
    sp.set_defaults(fn=cmd_replay)

    sp = sub.add_parser("report", parents=[common], help="summarize a run directory")
    sp.add_argument("target", help="run directory (or run id with --server)")
    sp.set_defaults(fn=cmd_report)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except LockforgeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except httpx.HTTPError as e:
        print(f"error: cannot reach server: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
