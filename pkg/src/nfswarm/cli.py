"""Command-line entry point: ``nfswarm {rayleigh,snr-sweep,nmse,validate}``.

Exit codes: 0 success, 1 oracle failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, simulation, snr_analysis, validation
from .config import RunConfig, load_config
from .errors import ConfigError, DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
AXES = {"spacing": "uav_spacing", "elements": "element_count"}
CACHE_ENV = "NFSWARM_CACHE_DIR"


@dataclass
class RunManifest:
    command: str
    spec_hash: str
    output_paths: list = field(default_factory=list)
    started: str = ""
    finished: str = ""
    tool_version: str = __version__

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _load(path) -> RunConfig:
    return RunConfig() if path is None else load_config(path)


def cmd_rayleigh(args) -> int:
    rc = _load(args.config)
    report = validation.geometry_report(rc.cfg)
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        print(f"A_px = {report['A_px']:.4f} m")
        print(f"A_py = {report['A_py']:.4f} m")
        print(f"A_p  = {report['A_p']:.4f} m")
        print(f"R    = {report['R']:.2f} m")
    return EXIT_OK


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def cmd_snr_sweep(args) -> int:
    rc = _load(args.config)
    started = _now()
    axis = AXES[args.axis]
    rows = snr_analysis.snr_sweep(rc.sweep.scenario(rc.cfg), axis, rc.sweep.axis_grid(axis))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(snr_analysis.sweep_to_csv(rows))
    RunManifest("snr-sweep", rc.spec_hash(), [str(out)], started, _now()).write(_manifest_path(out))
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def _parse_estimators(text: str) -> tuple[str, ...]:
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    unknown = [n for n in names if n not in simulation.ESTIMATORS]
    if unknown or not names:
        raise ConfigError(f"unknown estimators {unknown}; valid names: {', '.join(simulation.ESTIMATORS)}")
    return names


def cmd_nmse(args) -> int:
    rc = _load(args.config)
    changes = {}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.estimators is not None:
        changes["estimators"] = _parse_estimators(args.estimators)
    try:
        spec = rc.experiment.replace(**changes)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    started = _now()

    def progress(done, total):
        if not args.quiet and (done == total or done % max(1, total // 10) == 0):
            print(f"  trial {done}/{total}", file=sys.stderr)

    result = simulation.run_experiment(spec, workers=args.workers,
                                       cache_dir=os.environ.get(CACHE_ENV), progress=progress)
    out = Path(args.out)
    paths = simulation.write_outputs(result, out)
    spec_hash = RunConfig(rc.cfg, spec, rc.sweep).spec_hash()
    RunManifest("nmse", spec_hash, paths, started, _now()).write(_manifest_path(out))
    print(f"wrote {len(result.rows)} rows to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    rc = _load(args.config)
    checks = validation.run_oracles(rc.cfg, rc.sweep.scenario(rc.cfg))
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} oracles passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nfswarm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config", nargs="?", default=None,
                        help="JSON config (defaults to the built-in configuration)")
        sp.set_defaults(func=fn)
        return sp

    sp = add("rayleigh", cmd_rayleigh, "print apertures and the Rayleigh distance")
    sp.add_argument("--json", action="store_true", help="machine-readable output")

    sp = add("snr-sweep", cmd_snr_sweep, "SNR of the three wavefront models along a sweep")
    sp.add_argument("--axis", choices=sorted(AXES), default="spacing")
    sp.add_argument("--out", required=True, help="output CSV path")

    sp = add("nmse", cmd_nmse, "Monte-Carlo NMSE versus SNR")
    sp.add_argument("--out", required=True, help="output CSV path (JSON sidecar alongside)")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--estimators", help=f"comma-separated subset of {', '.join(simulation.ESTIMATORS)}")
    sp.add_argument("--workers", type=int, default=1, help="process-pool size cap")
    sp.add_argument("--quiet", action="store_true")

    add("validate", cmd_validate, "run the oracle suite")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
