"""Command-line entry point.

Exit codes: 0 on success, 2 for invalid input (nothing is written),
1 when the simulation itself fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .circuit import CircuitError
from .scenario import BUILTINS, PointResult, Scenario, ScenarioError, builtin, load, run_scenario

EXIT_OK, EXIT_SIM, EXIT_INPUT = 0, 1, 2


def _csv_rows(scn: Scenario, results: list[PointResult]) -> list[list]:
    names = [p.name for p in scn.sweep]
    rows = [["point", *names, "kind", "label", "probability"]]
    for res in results:
        head = [res.index, *(f"{res.params[n]:.10g}" for n in names)]
        rows.append([*head, "norm", "", f"{res.norm:.12g}"])
        if res.distribution is not None:
            for label, p in res.distribution.entries.items():
                rows.append([*head, "distribution", label, f"{p:.12g}"])
        for name, p in res.observables.items():
            rows.append([*head, "observable", name, f"{p:.12g}"])
        if res.purity is not None:
            rows.append([*head, "purity", "", f"{res.purity:.12g}"])
    return rows


def _density_rows(res: PointResult) -> list[list]:
    rho = res.density
    rows = [rho.labels]
    for row in rho.matrix:
        rows.append([f"{x.real:.12g},{x.imag:.12g}" for x in row])
    return rows


def _write_csv(rows, stream):
    csv.writer(stream, lineterminator="\n").writerows(rows)


def to_json(scn: Scenario, results: list[PointResult]) -> dict:
    points = []
    for res in results:
        item = {"point": res.index, "params": res.params, "norm": res.norm}
        if res.distribution is not None:
            item["distribution"] = res.distribution.entries
        if res.observables:
            item["observables"] = res.observables
        if res.density is not None:
            m = res.density.matrix
            item["density_matrix"] = {"basis": res.density.labels,
                                      "real": np.real(m).tolist(), "imag": np.imag(m).tolist()}
            item["purity"] = res.purity
        points.append(item)
    return {"name": scn.name, "core": scn.core, "points": points}


def emit(scn: Scenario, results: list[PointResult], fmt: str, out: str | None):
    if fmt == "json":
        text = json.dumps(to_json(scn, results), indent=2)
        if out:
            Path(out).write_text(text + "\n")
        else:
            print(text)
        return
    buf = io.StringIO()
    _write_csv(_csv_rows(scn, results), buf)
    dens = [r for r in results if r.density is not None]
    if out:
        path = Path(out)
        path.write_text(buf.getvalue())
        for res in dens:
            with open(path.with_suffix(f".rho{res.index}.csv"), "w", newline="") as fh:
                _write_csv(_density_rows(res), fh)
    else:
        sys.stdout.write(buf.getvalue())
        for res in dens:
            sys.stdout.write(f"\n# density matrix, point {res.index}\n")
            _write_csv(_density_rows(res), sys.stdout)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qoptsim", description="Linear-optics photon simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--core", choices=["direct", "permanent"], help="override the scenario core")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--seed", type=int, help="accepted for reproducibility; simulations are deterministic")

    run_p = sub.add_parser("run", help="run a scenario file")
    run_p.add_argument("file")
    common(run_p)
    bi = sub.add_parser("builtin", help="run a built-in scenario")
    bi.add_argument("name", choices=sorted(BUILTINS))
    bi.add_argument("--dump", action="store_true", help="print the scenario as YAML instead of running it")
    common(bi)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scn = load(args.file) if args.command == "run" else builtin(args.name)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "dump", False):
        sys.stdout.write(scn.dump())
        return EXIT_OK
    try:
        results = run_scenario(scn, core=args.core)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CircuitError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIM
    emit(scn, results, args.format, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
