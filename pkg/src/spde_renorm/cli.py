"""Command-line runner: ``spde-renorm <suite> [--config FILE] [--out DIR] [overrides]``.

Each run writes ``<suite>.csv`` (deterministic body), ``<suite>.manifest.json``
(config, hash, seed, version, timestamps, verdicts) and ``<suite>.summary.txt``.
The exit status is 0 iff no row failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .experiments import SUITES, ConfigError, Row, resolve_config, run_suite
from .solver import WORKERS_ENV

CSV_COLUMNS = ("suite", "metric", "parameters", "estimate", "ci", "target", "tolerance", "pass")


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return f"{x:.17g}"


def row_fields(row: Row) -> list[str]:
    return [row.suite, row.metric, row.parameters, format_float(row.estimate), format_float(row.ci),
            format_float(row.target), format_float(row.tolerance), row.verdict]


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spde-renorm", description=__doc__.splitlines()[0])
    parser.add_argument("suite", choices=sorted(SUITES))
    parser.add_argument("--config", type=Path, help="flat JSON config file")
    parser.add_argument("--manifest", type=Path, help="re-run the config stored in a manifest")
    parser.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    parser.add_argument("--epsilon", type=float, action="append",
                        help="epsilon value; repeat to give a grid (sets epsilon and epsilons)")
    parser.add_argument("--paths", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--g", dest="g")
    parser.add_argument("--g-a", dest="g_a", type=float)
    parser.add_argument("--psi")
    parser.add_argument("--psi-a", dest="psi_a", type=float)
    parser.add_argument("--t-end", dest="t_end", type=float)
    parser.add_argument("--placement")
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.epsilon:
        out["epsilons"] = list(args.epsilon)
        out["epsilon"] = args.epsilon[-1]
    for key in ("paths", "seed", "g", "g_a", "psi", "psi_a", "t_end", "placement"):
        value = getattr(args, key)
        if value is not None:
            out[key] = value
    return out


def _load_file(args) -> dict:
    if args.manifest is not None:
        return json.loads(args.manifest.read_text())["config"]
    if args.config is not None:
        data = json.loads(args.config.read_text())
        if not isinstance(data, dict):
            raise ConfigError("config: expected a JSON object")
        return data
    return {}


def run(suite: str, cfg: dict, out_dir: Path, stream=sys.stdout) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{suite}.csv"
    manifest = {
        "suite": suite,
        "tool_version": __version__,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "master_seed": cfg["seed"],
        "workers_env": WORKERS_ENV,
        "started": _now(),
    }
    rows: list[Row] = []
    status = "complete"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        try:
            for row in run_suite(suite, cfg):
                rows.append(row)
                writer.writerow(row_fields(row))
                fh.flush()
        except KeyboardInterrupt:
            status = "interrupted"
    failed = [r for r in rows if r.failed]
    passed = status == "complete" and not failed
    manifest.update({
        "finished": _now(),
        "status": status,
        "rows": len(rows),
        "gated_rows": sum(r.verdict != "info" for r in rows),
        "failed_rows": len(failed),
        "pass": passed,
        "metrics": {f"{r.metric} [{r.parameters}]": {"estimate": r.estimate, "verdict": r.verdict}
                    for r in rows if r.verdict != "info"},
    })
    (out_dir / f"{suite}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    lines = [f"suite {suite}: {'pass' if passed else 'FAIL'} ({status}, {len(rows)} rows, {len(failed)} failed)"]
    for r in rows:
        if r.verdict == "info":
            continue
        label = "deterministic check" if r.metric == "deterministic check" else r.metric
        lines.append(f"  {label}: {r.verdict}  estimate={r.estimate:.6g} target={r.target:.6g} "
                     f"tol={r.tolerance:.3g}  [{r.parameters}]")
    text = "\n".join(lines) + "\n"
    (out_dir / f"{suite}.summary.txt").write_text(text)
    stream.write(text)
    if status == "interrupted":
        return 130
    return 0 if passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.suite, _load_file(args), _overrides(args))
    except (ConfigError, json.JSONDecodeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(args.suite, cfg, args.out)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
