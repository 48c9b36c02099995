"""Command-line front end: ``foha design|analyze|check-reconstruction|simulate``."""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .coarray import SensorArray, central_consecutive, fodca, holes
from .designs import GeneratorKind, design_from_json, optimize_foha
from .experiment import ConfigError, ExperimentConfig, simulate
from .metrics import (coupling_leakage, coupling_matrix, leakage_decomposition,
                      max_fodca_size, reference_coupling_model, redundancy,
                      redundancy_lower_bound)
from .reconstruct import check_reconstruction, foha_reconstruction

LEAKAGE_B = 100


class CliError(Exception):
    pass


def load_positions(path: str):
    """Reads a geometry file.

    Accepts a design JSON document, a JSON list of positions, or integers
    separated by whitespace or commas. Returns ``(SensorArray, design)``
    where ``design`` is None unless a full design document was given.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read positions file: {exc}") from exc
    stripped = text.strip()
    if not stripped:
        raise CliError(f"{path}: empty positions file")
    try:
        if stripped[0] in "[{":
            doc = json.loads(stripped)
            if isinstance(doc, dict):
                if "kind" in doc and "N2" in doc:
                    design = design_from_json(doc)
                    return design.P, design
                if "positions" not in doc:
                    raise CliError(f"{path}: JSON object lacks a 'positions' field")
                doc = doc["positions"]
            values = doc
        else:
            tokens = [t for t in re.split(r"[\s,]+", stripped) if t]
            values = [int(t) for t in tokens]
        if not isinstance(values, list) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in values):
            raise CliError(f"{path}: positions must be integers")
        return SensorArray(values), None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"{path}: malformed positions: {exc}") from exc


def _geometry(args):
    if args.positions:
        if args.kind or args.n is not None:
            raise CliError("give either --positions or --kind/--n, not both")
        return load_positions(args.positions)
    if not args.kind or args.n is None:
        raise CliError("need --kind and --n, or --positions")
    design = optimize_foha(args.n, args.kind)
    return design.P, design


def analyze(P: SensorArray, design=None) -> dict:
    """Co-array, redundancy, leakage and reconstruction summary of a geometry."""
    lags = fodca(P)
    U = central_consecutive(lags)
    N = len(P)
    # a design's nominal extent is the claim being certified
    bound = design.E if design is not None else U
    k4 = max_fodca_size(N)
    out = {
        "N": N,
        "positions": list(P.positions),
        "dofs": 2 * U + 1,
        "U": U,
        "aperture": P.aperture,
        "holes_up_to_U": holes(lags, bound),
        "R4": k4 / U if U > 0 else None,
        "L4": redundancy_lower_bound(N),
        "leakage": coupling_leakage(coupling_matrix(P, reference_coupling_model(LEAKAGE_B))),
        "leakage_generator": None,
        "reconstruction_feasible": check_reconstruction(P).feasible if P.aperture > 0 else False,
    }
    if design is not None:
        out["kind"] = design.kind.value
        out["E"] = design.E
        out["R4"] = redundancy(design).R4
        report = leakage_decomposition(design, reference_coupling_model(LEAKAGE_B))
        out["leakage_generator"] = report.L1
    return out


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_design(args):
    if args.kind is None or args.n is None:
        raise CliError("design needs --kind and --n")
    design = optimize_foha(args.n, args.kind)
    _emit(json.dumps(design.to_json(), indent=2) + "\n", args.out)


def cmd_analyze(args):
    P, design = _geometry(args)
    _emit(json.dumps(analyze(P, design), indent=2) + "\n", args.out)


def cmd_check_reconstruction(args):
    P, design = _geometry(args)
    if design is not None and design.kind is not GeneratorKind.CUSTOM:
        doc = foha_reconstruction(design).to_json()
    else:
        check = check_reconstruction(P)
        doc = {"feasible": check.feasible, "lcm_value": str(check.lcm_value)}
    doc = {"positions": list(P.positions), **doc}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)


def cmd_simulate(args):
    if not args.config:
        raise CliError("simulate needs --config")
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}") from exc
    config = ExperimentConfig.from_json(text)
    config = config.with_overrides(seed=args.seed, trials=args.trials)
    if config.trials < 1:
        raise CliError("--trials must be at least 1")
    csv_text, manifest = simulate(config, args.threads)
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text)
        manifest_path = out.with_name(out.stem + ".manifest.json")
        manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(json.dumps(manifest) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foha", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def geometry_flags(p):
        p.add_argument("--kind", type=str.lower, choices=["na", "cna"])
        p.add_argument("--n", type=int)
        p.add_argument("--positions", help="positions file (JSON or whitespace separated)")
        p.add_argument("--out", help="write output here instead of stdout")

    p = sub.add_parser("design", help="optimal FOHA for N sensors")
    p.add_argument("--kind", type=str.lower, choices=["na", "cna"])
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("analyze", help="co-array, redundancy and leakage summary")
    geometry_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check-reconstruction", help="unambiguous reconstruction test")
    geometry_flags(p)
    p.set_defaults(func=cmd_check_reconstruction)

    p = sub.add_parser("simulate", help="Monte Carlo DOA sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--threads", type=int, help="worker threads (default: all CPUs)")
    p.add_argument("--out", help="CSV path; the manifest goes next to it")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CliError, ConfigError, ValueError) as exc:
        print(f"foha {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
