"""Command-line entry point: ``qiadv <subcommand>`` or ``python3 -m qiadv``."""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from qiadv import harness
from qiadv.game import GameSpec
from qiadv.runtime import Verifier, prover_client, replay
from qiadv.runtime.wire import parse_address

EXPERIMENT_KEYS = [f.name for f in fields(harness.ExperimentConfig)]


def _load_config(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise SystemExit(f"{path}: config must be a JSON object")
    return data


def _experiment_config(args, **overrides) -> harness.ExperimentConfig:
    data = _load_config(args.config)
    for key in EXPERIMENT_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    data.update({k: v for k, v in overrides.items() if k not in data})
    try:
        return harness.ExperimentConfig.from_dict(data)
    except ValueError as exc:
        raise SystemExit(f"invalid config: {exc}")


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _print_report(report: harness.BoundReport) -> None:
    est = report.estimate
    print(f"{report.experiment}: {report.strategy} n={report.n} t={report.t} eps={report.epsilon:.6g}",
          file=sys.stderr)
    print(f"  accept rate {est['rate']:.6g} +- {est['se']:.2g} over {report.trials} trials", file=sys.stderr)
    for b in report.bounds:
        tag = " (vacuous)" if b.vacuous else ""
        print(f"  {b.name:<30} {b.value:.6g}{tag}  [{b.formula}]", file=sys.stderr)
    for name, passed in report.checks.items():
        print(f"  check {name}: {'pass' if passed else 'FAIL'}", file=sys.stderr)


def _write_outputs(report: harness.BoundReport, cfg: harness.ExperimentConfig) -> int:
    _print_report(report)
    _emit(report.to_json(), cfg.json)
    if cfg.csv:
        row = {
            "n": report.n, "t": report.t, "t_over_n": report.t / report.n, "gamma": report.gamma,
            "strategy": report.strategy, "trials": report.trials,
            "accept_rate": report.estimate["rate"], "accept_se": report.estimate["se"],
        }
        for b in report.bounds:
            row[b.name] = b.value
        Path(cfg.csv).write_text(
            ",".join(row) + "\n" + ",".join(harness._fmt(v) for v in row.values()) + "\n")
    return 0 if report.ok else 1


def cmd_run_quantum(args) -> int:
    cfg = _experiment_config(args, strategy=harness.QUANTUM)
    if cfg.strategy != harness.QUANTUM:
        raise SystemExit("run-quantum needs strategy quantum-sim")
    return _write_outputs(harness.run_quantum_experiment(cfg), cfg)


def cmd_run_classical(args) -> int:
    cfg = _experiment_config(args, strategy="constant-zero", gamma=0.0)
    if cfg.strategy == harness.QUANTUM:
        raise SystemExit("run-classical needs a classical strategy")
    return _write_outputs(harness.run_classical_experiment(cfg), cfg)


def cmd_audit(args) -> int:
    lines = harness.audit_parameters()
    for line in lines:
        print(line.render())
    if args.json:
        Path(args.json).write_text("".join(json.dumps(vars(l), sort_keys=True) + "\n" for l in lines))
    return 0


def cmd_verify(args) -> int:
    results = harness.verify_facts(args.seed, args.fault)
    for r in results:
        print(f"{'pass' if r.passed else 'FAIL'}  {r.name}  {r.detail}".rstrip())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_sweep(args) -> int:
    rows = harness.sweep(args.n, args.gamma, args.ratio, args.strategy, args.trials, args.seed, args.workers)
    _emit(harness.rows_to_csv(rows), args.out)
    return 0


def _game_spec(args) -> GameSpec:
    return GameSpec(args.n, args.t) if args.t is not None else GameSpec.with_ratio(args.n)


def cmd_serve(args) -> int:
    verifier = Verifier(_game_spec(args), seed=args.seed, timeout=args.timeout_ms / 1000.0,
                        log_path=args.log, max_sessions=args.sessions, phase_gap=args.phase_gap_ms / 1000.0)
    host, port = parse_address(args.listen)

    def ready(address):
        print(f"listening {address[0]}:{address[1]}", flush=True)

    records = asyncio.run(verifier.serve(host, port, ready))
    accepted = sum(r.accepted for r in records)
    print(json.dumps({"sessions": len(records), "accepted": accepted}), flush=True)
    return 0


def cmd_prove(args) -> int:
    params = {"gamma": args.gamma, "channel": args.channel} if args.kind == "quantum-sim" else {}
    report = prover_client(args.kind, parse_address(args.connect), args.sessions, params, args.seed,
                           args.timeout_ms / 1000.0)
    print(json.dumps(report.as_dict(), sort_keys=True))
    return 0 if not report.errors else 1


def cmd_replay(args) -> int:
    report = replay(args.log)
    print(json.dumps(report.as_dict(), sort_keys=True))
    return 0 if report.ok and report.uniform else 1


def _experiment_flags(p: argparse.ArgumentParser, with_strategy: bool) -> None:
    p.add_argument("--config", help="JSON file with experiment keys: " + ", ".join(EXPERIMENT_KEYS))
    p.add_argument("--name")
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--ratio", help="t = ceil(ratio * n) when --t is absent (default 0.83)")
    p.add_argument("--gamma", type=float)
    p.add_argument("--channel", choices=["readout", "depolarize"])
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--json", help="write the report as one JSON line here instead of stdout")
    p.add_argument("--csv", help="also write a one-row CSV summary")
    if with_strategy:
        p.add_argument("--strategy", help="constant-zero, prefix-leak:C, prefix-leak:n, random-hash:C, uniform-random")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qiadv", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-quantum", help="Monte Carlo accept rate of the simulated quantum prover")
    _experiment_flags(p, with_strategy=False)
    p.set_defaults(func=cmd_run_quantum)

    p = sub.add_parser("run-classical", help="Monte Carlo accept rate of a classical strategy")
    _experiment_flags(p, with_strategy=True)
    p.set_defaults(func=cmd_run_classical)

    p = sub.add_parser("audit-parameters", help="recompute the concrete parameter figures")
    p.add_argument("--json", help="write audit lines as NDJSON")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("verify-facts", help="run the quick cross-check suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fault", choices=["predicate"], help="inject a known fault (canary)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="grid of accept rates and bounds as CSV")
    p.add_argument("--n", type=int, nargs="+", default=[1000, 10000])
    p.add_argument("--gamma", type=float, nargs="+", default=[0.0, 0.01, 0.02])
    p.add_argument("--ratio", nargs="+", default=["0.83"])
    p.add_argument("--strategy", nargs="+", default=[harness.QUANTUM])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="run the verifier service")
    p.add_argument("--listen", default="127.0.0.1:0")
    p.add_argument("--n", type=int, default=harness.CONCRETE_N)
    p.add_argument("--t", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout-ms", type=int, default=30_000)
    p.add_argument("--log", help="append session records (NDJSON) here")
    p.add_argument("--sessions", type=int, help="exit after this many sessions")
    p.add_argument("--phase-gap-ms", type=float, default=0.0, help="wait between receiving A and sending Y")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("prove", help="play sessions against a verifier")
    p.add_argument("--connect", required=True)
    p.add_argument("--kind", default="quantum-sim", help="quantum-sim or classical:<name>[:c]")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--channel", default="readout", choices=["readout", "depolarize"])
    p.add_argument("--sessions", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout-ms", type=int, default=60_000)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("replay", help="recompute verdicts from a session log")
    p.add_argument("log")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
