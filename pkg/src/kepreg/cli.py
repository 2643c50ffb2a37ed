"""Command-line harness.

Subcommands: ``threshold`` evaluates one scalar thresholding operator,
``fit`` runs a solver on a CSV dataset, ``simulate`` runs the benchmark
harness, and ``rerun`` replays a command from its manifest.  Every
output file is written next to a JSON manifest sufficient to re-run the
command bit-identically; numeric CSV cells carry 17 significant digits so
reruns are byte-identical.  Report paths also render matplotlib figures
beside the delimited output unless ``--no-plot`` is given.

Exit codes: 0 success, 2 usage/parse errors (including malformed CSV),
3 domain/data errors, 4 numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CsvFormatError,
    DataError,
    DomainError,
    NumericalError,
    RegimeError,
)
from .experiments import (
    Schedule,
    SimConfig,
    method_label,
    run_cv_experiment,
    run_schedule_experiment,
    write_report_csv,
    write_trace_csv,
)
from .figures import save_path_figure, save_report_figure, save_trace_figure
from .penalties import PenaltyKind, PenaltyParams, nesting_eta
from .prox import (
    Regime,
    half_threshold,
    half_threshold_point,
    kep_threshold,
    mcp_threshold,
    soft_threshold,
)
from .solvers import PathGrid, StandardizedDesign, cd_path, irls_lq, lla_solve

_PRESETS = {
    "table1": {"mode": "schedule", "p": 200, "snr": 3.0},
    "table2": {"mode": "schedule", "p": 200, "snr": 6.0},
    "table3": {"mode": "schedule", "p": 200, "snr": 9.0},
    "table4": {"mode": "schedule", "p": 200, "snr": 12.0},
    "table5": {"mode": "cv", "p": 50, "snr": 3.0},
    "table6": {"mode": "cv", "p": 200, "snr": 3.0},
    "table7": {"mode": "cv", "p": 500, "snr": 3.0},
}

_SCHEDULE_METHODS = "kep,mcp,lasso"
_CV_METHODS = "kep,mcp,lhalf,lasso"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_manifest(path: Path, command: str, argv: list[str], params: dict, outputs: list[str]) -> None:
    manifest = {
        "artifact": "kepreg",
        "version": __version__,
        "command": command,
        "argv": argv,
        "params": params,
        "seed": params.get("seed"),
        "outputs": outputs,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _params_dict(args: argparse.Namespace) -> dict:
    skip = {"func", "argv_snapshot"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def read_regression_csv(path: str, response: str):
    """Parse a headered numeric CSV into (X, y, feature_names).

    Raises CsvFormatError with row/column diagnostics on structural or
    numeric parse failures.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CsvFormatError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if response not in header:
            raise CsvFormatError(f"{path}: response column {response!r} not in header {header}")
        y_col = header.index(response)
        feature_names = [h for i, h in enumerate(header) if i != y_col]
        rows: list[list[float]] = []
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {i} has {len(row)} fields, header has {len(header)}"
                )
            values = []
            for j, cell in enumerate(row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: row {i}, column {header[j]!r}: not numeric: {cell!r}"
                    ) from None
            rows.append(values)
    if len(rows) < 2:
        raise CsvFormatError(f"{path}: need at least 2 data rows, found {len(rows)}")
    data = np.asarray(rows, dtype=float)
    y = data[:, y_col]
    X = np.delete(data, y_col, axis=1)
    return X, y, feature_names


def _parse_methods(spec: str) -> list[PenaltyKind]:
    kinds = []
    for name in spec.split(","):
        if name.strip():
            kinds.append(PenaltyKind.parse(name))
    if not kinds:
        raise DomainError(f"no methods parsed from {spec!r}")
    return kinds


def cmd_threshold(args: argparse.Namespace) -> int:
    kind = args.kind.lower()
    if kind in ("soft", "half"):
        lam = args.lam if args.lam is not None else args.eta
        if lam is None:
            raise DomainError(f"--lambda (or --eta) is required for kind {kind!r}")
        if kind == "soft":
            estimate = soft_threshold(args.z, lam)
            decision = {"estimate": estimate, "threshold_point": lam, "regime": "continuous"}
        else:
            estimate = half_threshold(args.z, lam)
            decision = {
                "estimate": estimate,
                "threshold_point": half_threshold_point(lam),
                "regime": "discontinuous",
            }
    else:
        if args.alpha is None:
            raise DomainError(f"--alpha is required for kind {kind!r}")
        if args.eta is not None:
            params = PenaltyParams(eta=args.eta, alpha=args.alpha)
        elif args.lam is not None:
            params = PenaltyParams.with_nesting(args.lam, args.alpha)
        else:
            raise DomainError("one of --eta or --lambda is required")
        op = kep_threshold if kind == "kep" else mcp_threshold
        result = op(args.z, params)
        decision = {
            "estimate": result.estimate,
            "threshold_point": result.threshold_point,
            "regime": result.regime.value,
        }
    decision["kind"] = kind
    decision["z"] = args.z
    print(json.dumps(decision, sort_keys=True))
    return 0


def _write_coef_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else _fmt(c) for c in row])


def cmd_fit(args: argparse.Namespace) -> int:
    X, y, names = read_regression_csv(args.input, args.response)
    constant = [j for j in range(X.shape[1]) if np.all(X[:, j] == X[0, j])]
    if constant:
        dropped = [names[j] for j in constant]
        print(f"warning: excluding constant feature columns: {dropped}", file=sys.stderr)
        keep = [j for j in range(X.shape[1]) if j not in constant]
        X = X[:, keep]
        names = [names[j] for j in keep]
    if X.shape[1] == 0:
        raise DataError("no usable feature columns remain after constant-column exclusion")
    design = StandardizedDesign.from_raw(X, y)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    outputs = [str(out)]
    kind = PenaltyKind.parse(args.kind)

    if args.solver == "cd":
        grid = PathGrid.default(design, n_lambdas=args.grid_lambdas, n_alphas=args.grid_alphas)
        path_sol = cd_path(design, grid, tol=args.tol, max_sweeps=args.max_sweeps, kind=kind)
        rows = []
        for (li, ki) in path_sol.cells():
            b_raw = design.coef_to_raw(path_sol.coef(li, ki))
            converged = 0 if (li, ki) in path_sol.unconverged_cells else 1
            lam = float(grid.lambdas[li])
            alpha = float(grid.alphas[ki])
            eta = nesting_eta(lam, alpha) if kind is PenaltyKind.KEP else lam
            rows.append([lam, alpha, eta, float(converged), *b_raw.tolist()])
        header = ["lambda", "alpha", "eta", "converged", *names]
        _write_coef_csv(out, header, rows)
        if not args.no_plot:
            k_last = grid.alphas.size - 1
            slice_cells = [li for li in range(grid.lambdas.size) if (li, k_last) in path_sol.coefficients]
            coefs = np.array(
                [design.coef_to_raw(path_sol.coef(li, k_last)) for li in slice_cells]
            )
            fig_path = out.with_suffix(".png")
            save_path_figure(
                grid.lambdas[slice_cells],
                coefs,
                fig_path,
                title=f"{kind.value} path (alpha={grid.alphas[k_last]:g})",
            )
            outputs.append(str(fig_path))
    elif args.solver == "lla":
        if args.alpha is None:
            raise DomainError("--alpha is required for --solver lla")
        if args.eta is not None:
            params = PenaltyParams(eta=args.eta, alpha=args.alpha)
        elif args.lam is not None:
            params = PenaltyParams.with_nesting(args.lam, args.alpha)
        else:
            raise DomainError("--eta or --lambda is required for --solver lla")
        b = lla_solve(design, params, outer_tol=args.tol)
        b_raw = design.coef_to_raw(b)
        _write_coef_csv(
            out, ["eta", "alpha", *names], [[params.eta, params.alpha, *b_raw.tolist()]]
        )
    elif args.solver == "irls":
        if args.lam is None:
            raise DomainError("--lambda is required for --solver irls")
        res = irls_lq(
            design, args.lam, q=args.q, sparsity_index=args.sparsity_index, tol=args.tol
        )
        b_raw = design.coef_to_raw(res.coef)
        _write_coef_csv(
            out,
            ["lambda", "q", "iterations", "converged", *names],
            [[args.lam, float(args.q), float(res.iterations), float(res.converged), *b_raw.tolist()]],
        )
    else:
        raise DomainError(f"unknown solver {args.solver!r}")

    manifest_path = Path(str(out) + ".manifest.json")
    _write_manifest(manifest_path, "fit", args.argv_snapshot, _params_dict(args), outputs)
    print(f"wrote {out}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    mode = args.mode
    p, snr = args.p, args.snr
    methods_spec = args.methods
    if args.preset:
        preset = _PRESETS.get(args.preset)
        if preset is None:
            raise DomainError(f"unknown preset {args.preset!r}")
        mode = preset["mode"]
        p = p if args.p_given else preset["p"]
        snr = snr if args.snr_given else preset["snr"]
        if methods_spec is None:
            methods_spec = _SCHEDULE_METHODS if mode == "schedule" else _CV_METHODS
    if mode is None:
        raise DomainError("either --preset or --mode is required")
    if methods_spec is None:
        methods_spec = _SCHEDULE_METHODS if mode == "schedule" else _CV_METHODS
    methods = _parse_methods(methods_spec)

    config = SimConfig(
        n=args.n,
        p=p,
        snr=snr,
        seed=args.seed,
        repeats=args.repeats,
        m=args.m,
        schedule=Schedule() if mode == "schedule" else None,
        folds=args.folds,
        tol=args.tol,
        max_sweeps=args.max_sweeps,
        capture_traces=args.traces,
    )
    if mode == "schedule":
        report = run_schedule_experiment(config, methods)
    elif mode == "cv":
        report = run_cv_experiment(
            config, methods, n_lambdas=args.grid_lambdas, n_alphas=args.grid_alphas
        )
    else:
        raise DomainError(f"unknown mode {mode!r}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    per_repeat = out_dir / "per_repeat.csv"
    write_report_csv(report, per_repeat)
    outputs = [str(per_repeat)]

    aggregates = report.aggregates()
    agg_path = out_dir / "aggregates.json"
    payload = {
        "mode": report.mode,
        "config": {
            "n": config.n,
            "p": config.p,
            "snr": config.snr,
            "m": config.m,
            "seed": config.seed,
            "repeats": config.repeats,
            "folds": config.folds if mode == "cv" else None,
        },
        "methods": aggregates,
        "failures": {k: v for k, v in report.failures.items()},
    }
    agg_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    outputs.append(str(agg_path))

    if args.traces and report.traces:
        for name in report.methods:
            trace = report.traces.get((name, 0))
            if trace:
                trace_path = out_dir / f"trace_{name}.csv"
                write_trace_csv(trace, trace_path)
                outputs.append(str(trace_path))

    if not args.no_plot:
        title = f"{mode} n={config.n} p={config.p} snr={config.snr:g}"
        outputs.append(save_report_figure(aggregates, out_dir / "report.png", title=title))
        if args.traces and report.traces:
            first = {
                name: report.traces[(name, 0)]
                for name in report.methods
                if (name, 0) in report.traces
            }
            if first:
                outputs.append(save_trace_figure(first, out_dir / "traces.png", title=title))

    _write_manifest(out_dir / "manifest.json", "simulate", args.argv_snapshot, _params_dict(args), outputs)
    for name, agg in aggregates.items():
        print(
            f"{name}: spe={agg['spe_mean']:.4f} (se {agg['spe_se']:.4f})  "
            f"fse={agg['fse_mean']:.4f}"
        )
    print(f"wrote {out_dir}")
    return 0


def cmd_rerun(args: argparse.Namespace) -> int:
    manifest_path = Path(args.manifest)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read manifest {manifest_path}: {exc}") from exc
    argv = manifest.get("argv")
    if not isinstance(argv, list) or not argv:
        raise DataError(f"manifest {manifest_path} has no argv record")
    return main([str(a) for a in argv])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kepreg",
        description="Sparse regression with kinetic-energy-plus penalties.",
    )
    parser.add_argument("--version", action="version", version=f"kepreg {__version__}")
    sub = parser.add_subparsers(dest="command")

    th = sub.add_parser("threshold", help="evaluate one scalar thresholding operator")
    th.add_argument("--z", type=float, required=True)
    th.add_argument("--eta", type=float, default=None)
    th.add_argument("--alpha", type=float, default=None)
    th.add_argument("--lambda", dest="lam", type=float, default=None)
    th.add_argument("--kind", choices=["kep", "mcp", "soft", "half"], default="kep")
    th.set_defaults(func=cmd_threshold)

    fit = sub.add_parser("fit", help="fit penalized regression on a CSV dataset")
    fit.add_argument("input", help="input CSV with a header row")
    fit.add_argument("--response", required=True, help="name of the response column")
    fit.add_argument("--out", required=True, help="output coefficients CSV path")
    fit.add_argument("--solver", choices=["cd", "lla", "irls"], default="cd")
    fit.add_argument("--kind", default="kep", help="penalty family for --solver cd")
    fit.add_argument("--eta", type=float, default=None)
    fit.add_argument("--alpha", type=float, default=None)
    fit.add_argument("--lambda", dest="lam", type=float, default=None)
    fit.add_argument("--q", type=int, choices=[1, 2], default=2, help="exponent for irls")
    fit.add_argument("--sparsity-index", type=int, default=None)
    fit.add_argument("--grid-lambdas", type=int, default=50)
    fit.add_argument("--grid-alphas", type=int, default=20)
    fit.add_argument("--tol", type=float, default=1e-6)
    fit.add_argument("--max-sweeps", type=int, default=1000)
    fit.add_argument("--no-plot", action="store_true")
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="run the simulation benchmark harness")
    sim.add_argument("--preset", default=None, help="table1..table7 configuration")
    sim.add_argument("--mode", choices=["schedule", "cv"], default=None)
    sim.add_argument("--n", type=int, default=100)
    sim.add_argument("--p", type=int, default=200)
    sim.add_argument("--snr", type=float, default=3.0)
    sim.add_argument("--m", type=int, default=1000)
    sim.add_argument("--repeats", type=int, default=20)
    sim.add_argument("--seed", type=int, default=7)
    sim.add_argument("--folds", type=int, default=5)
    sim.add_argument("--methods", default=None, help="comma-separated: kep,mcp,lasso,lhalf")
    sim.add_argument("--traces", action="store_true", help="capture convergence traces")
    sim.add_argument("--grid-lambdas", type=int, default=50)
    sim.add_argument("--grid-alphas", type=int, default=20)
    sim.add_argument("--tol", type=float, default=1e-6)
    sim.add_argument("--max-sweeps", type=int, default=1000)
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--no-plot", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    rer = sub.add_parser("rerun", help="replay a command recorded in a manifest")
    rer.add_argument("manifest", help="path to a manifest JSON")
    rer.set_defaults(func=cmd_rerun)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    raw_argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(raw_argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    args.argv_snapshot = raw_argv
    if args.command == "simulate":
        args.p_given = any(a == "--p" or a.startswith("--p=") for a in raw_argv)
        args.snr_given = any(a == "--snr" or a.startswith("--snr=") for a in raw_argv)
    try:
        return int(args.func(args) or 0)
    except CsvFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, DataError, RegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
