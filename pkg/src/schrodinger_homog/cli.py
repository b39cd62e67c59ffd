"""Command-line entry point: ``schrodinger-homog <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .cell import save_cell_array
from .effective import EffectiveModel
from .errors import HomogenizationError
from .fine import export_csv, save_wavefield, solve_fine
from .macro import MacroProblem, solve_homogenized


def _config(args) -> harness.SweepConfig:
    cfg = harness.load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _pick_eps(cfg: harness.SweepConfig, eps: float | None) -> float:
    return cfg.eps[0] if eps is None else eps


def cmd_cell(args) -> int:
    cfg = _config(args)
    cell = harness.run_cell_stage(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_cell_array(out / "coefficient.npz", "coefficient", cfg.grid, cell.a.samples)
    save_cell_array(out / "potential.npz", "potential", cfg.grid, cell.V.samples)
    save_cell_array(out / "chi.npz", "chi", cfg.grid, cell.chi.fields)
    save_cell_array(out / "eta.npz", "eta", cfg.grid, cell.eta.samples)
    print(f"wrote cell fields to {out}")
    return 0


def cmd_effective(args) -> int:
    cfg = _config(args)
    model = harness.run_cell_stage(cfg).model
    model.save(args.out)
    print(f"q = {model.q.tolist()}  b = {model.b.tolist()}  mu = {model.mu:.12g}")
    return 0


def _write_wave(u, out: str, csv_stride: int | None) -> None:
    path = save_wavefield(u, out)
    print(f"wrote {path}")
    if csv_stride:
        csv_path = Path(out).with_suffix(".csv")
        export_csv(u, csv_path, stride_x=csv_stride, stride_t=csv_stride)
        print(f"wrote {csv_path}")


def cmd_solve_fine(args) -> int:
    cfg = _config(args)
    u = solve_fine(cfg.fine_problem(_pick_eps(cfg, args.eps)))
    _write_wave(u, args.out, args.csv_stride)
    return 0


def cmd_solve_homog(args) -> int:
    cfg = _config(args)
    model = EffectiveModel.load(args.model)
    fine = cfg.fine_problem(_pick_eps(cfg, args.eps))
    u = solve_homogenized(MacroProblem.matching(model, fine, cfg.homogenized_form))
    _write_wave(u, args.out, args.csv_stride)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    report = harness.run_pipeline(cfg, workers=args.workers)
    out = args.out or cfg.output_dir
    for p in harness.emit_report(report, out):
        print(f"wrote {p}")
    sys.stdout.write(harness.report_text(report))
    return 0


def cmd_report(args) -> int:
    rows = harness.parse_report_csv(Path(args.csv).read_text())
    cols = ("eps", "err_l2_zeroth", "err_l2_first", "observed_order")
    print(" ".join(f"{c:>16}" for c in cols))
    for r in rows:
        print(" ".join(f"{'' if r[c] is None else format(r[c], '.6e'):>16}" for c in cols))
    if len(rows) > 1:
        dec = all(b["err_l2_zeroth"] < a["err_l2_zeroth"] for a, b in zip(rows, rows[1:]))
        first = all(r["err_l2_first"] <= r["err_l2_zeroth"] for r in rows)
        print(f"zeroth_strictly_decreasing: {dec}")
        print(f"first_order_not_worse: {first}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schrodinger-homog",
                                     description="Periodic homogenization of oscillatory Schrodinger problems")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help):
        p.add_argument("--config", required=True, help="YAML sweep configuration")
        p.add_argument("--out", required=True, help=out_help)
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("cell", help="solve the cell problems")
    common(p, "output directory")
    p.set_defaults(func=cmd_cell)

    p = sub.add_parser("effective", help="compute the effective model")
    common(p, "output JSON file")
    p.set_defaults(func=cmd_effective)

    for name, func, help_ in (("solve-fine", cmd_solve_fine, "solve the oscillating problem"),
                              ("solve-homog", cmd_solve_homog, "solve the homogenized problem")):
        p = sub.add_parser(name, help=help_)
        common(p, "output .npz file")
        p.add_argument("--eps", type=float, default=None, help="scale (default: first in config)")
        p.add_argument("--csv-stride", type=int, default=None, help="also write a down-sampled CSV")
        if name == "solve-homog":
            p.add_argument("--model", required=True, help="effective model JSON")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="run the eps sweep and write the report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory (default: from config)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summarize a report CSV")
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except HomogenizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
