"""Command-line front end: ``cqedkit {quantize,sweep,fit-s21,qnd,cpw}``.

Exit codes: 0 success, 1 fit or convergence failure, 2 I/O or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from cqedkit import constants as const
from cqedkit import pipeline
from cqedkit.config import Junction, ProjectConfig, geometry_from_dict, load_config
from cqedkit.cpw import SILICON_EPS_R
from cqedkit.errors import ConvergenceError, FitError, SingularityError, ValidationError
from cqedkit.qnd import QndProtocol
from cqedkit.resonance import fit_resonance, read_trace

EXIT_OK, EXIT_FIT, EXIT_IO = 0, 1, 2


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.10g}"
    return str(value)


def to_csv(rows, columns=None) -> str:
    rows = list(rows)
    columns = list(columns or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _text(report: dict) -> str:
    width = max(len(k) for k in report) if report else 0
    return "\n".join(f"{k:<{width}}  {_fmt(v)}" for k, v in report.items()) + "\n"


def _emit(args, report=None, rows=None, columns=None, default_csv=None, config=None):
    csv_path = args.csv
    if csv_path is None and default_csv and config is not None and config.output_dir is not None:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        csv_path = config.output_dir / default_csv
    table = rows if rows is not None else [report]
    if csv_path is not None:
        Path(csv_path).write_text(to_csv(table, columns))
    if args.json:
        sys.stdout.write(json.dumps(report if rows is None else rows, indent=2, default=_fmt) + "\n")
    elif rows is not None:
        sys.stdout.write(to_csv(rows, columns))
    else:
        sys.stdout.write(_text(report))


def _load(args) -> ProjectConfig:
    config = load_config(args.config)
    junction_flags = {k: getattr(args, k, None) for k in ("L_j_nH", "I_c_nA", "E_J_GHz")}
    given = {k: v for k, v in junction_flags.items() if v is not None}
    if given:
        config = replace(config, junction=Junction(**given))
    if getattr(args, "omega_r_GHz", None) is not None:
        config = replace(config, omega_r_GHz=args.omega_r_GHz)
    return config


def cmd_quantize(args):
    config = _load(args)
    _emit(args, report=pipeline.quantize(config), default_csv="quantize.csv", config=config)


def cmd_sweep(args):
    config = _load(args)
    rows = pipeline.sweep(config)
    columns = list(pipeline.SWEEP_COLUMNS) + [c for c in rows[0] if c not in pipeline.SWEEP_COLUMNS]
    _emit(args, rows=rows, columns=columns, default_csv="sweep.csv", config=config)


def cmd_fit_s21(args):
    trace = read_trace(args.trace, polar=args.polar, power_dbm=args.power_dbm)
    result = fit_resonance(trace, refine=not args.no_refine)
    _emit(args, report=pipeline.fit_report(result))


def cmd_qnd(args):
    settings = {}
    if args.config is not None:
        settings = dict(load_config(args.config).qnd)
    for key in ("xi", "time", "n_photons", "eps_ge", "eps_eg", "threshold", "shots", "seed"):
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    reps = args.repetitions or settings.get("repetitions", [1])
    if isinstance(reps, int):
        reps = [reps]
    protocol = QndProtocol(
        xi=float(settings.get("xi", math.pi / 2)),
        interrogation_time=float(settings.get("time", 1.0)),
        n_photons=int(settings.get("n_photons", 1)),
        repetitions=max(reps),
        readout_error_ge=float(settings.get("eps_ge", 0.0)),
        readout_error_eg=float(settings.get("eps_eg", 0.0)),
    )
    rows = pipeline.qnd_rows(
        protocol, reps, shots=int(settings.get("shots", 0)), seed=int(settings.get("seed", 0)),
        threshold=settings.get("threshold"),
    )
    _emit(args, rows=rows, columns=pipeline.QND_COLUMNS)


def cmd_cpw(args):
    geom_doc = {}
    if args.config is not None:
        config = load_config(args.config)
        if config.geometry is not None:
            geom_doc = {
                "w_um": config.geometry.trace_width / const.um,
                "s_um": config.geometry.gap / const.um,
                "length_mm": config.geometry.length / const.mm,
                "eps_r": config.geometry.substrate_eps_r,
            }
    for key in ("w_um", "s_um", "length_mm", "eps_r"):
        value = getattr(args, key)
        if value is not None:
            geom_doc[key] = value
    geom_doc.setdefault("eps_r", SILICON_EPS_R)
    missing = [k for k in ("w_um", "s_um", "length_mm") if k not in geom_doc]
    if missing:
        raise ValidationError(f"missing geometry: {', '.join(missing)}")
    report = pipeline.cpw_report(geometry_from_dict(geom_doc), args.coupling_fF or ())
    _emit(args, report=report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqedkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="{quantize,sweep,fit-s21,qnd,cpw}")

    def outputs(p):
        p.add_argument("--csv", type=Path, help="also write the result as CSV to this path")
        p.add_argument("--json", action="store_true", help="print JSON instead of text/CSV")

    def junction(p):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--L-j-nH", dest="L_j_nH", type=float)
        group.add_argument("--I-c-nA", dest="I_c_nA", type=float)
        group.add_argument("--E-J-GHz", dest="E_J_GHz", type=float)
        p.add_argument("--omega-r-GHz", dest="omega_r_GHz", type=float, help="dressed resonator frequency")

    p = sub.add_parser("quantize", help="LOM quantization: E_J/E_C, omega_q, alpha, g, chi")
    p.add_argument("config", type=Path)
    junction(p)
    outputs(p)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("sweep", help="chi versus detuning over an L_j or flux grid (CSV)")
    p.add_argument("config", type=Path)
    junction(p)
    outputs(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit-s21", help="circle fit of a notch S21 trace")
    p.add_argument("trace", type=Path, help="CSV with freq_Hz,re,im (or freq_Hz,mag_dB,phase_rad)")
    p.add_argument("--polar", action="store_true", help="trace columns are mag_dB,phase_rad")
    p.add_argument("--power-dbm", type=float)
    p.add_argument("--no-refine", action="store_true", help="skip the complex least-squares step")
    outputs(p)
    p.set_defaults(func=cmd_fit_s21)

    p = sub.add_parser("qnd", help="false-positive/efficiency statistics of repeated QND readout")
    p.add_argument("--config", type=Path)
    p.add_argument("--xi", type=float, help="phase rate per photon (rad/s)")
    p.add_argument("--time", type=float, help="interrogation time (s)")
    p.add_argument("--n-photons", type=int)
    p.add_argument("-N", "--repetitions", type=int, nargs="+")
    p.add_argument("-k", "--threshold", type=int, help="clicks needed (default: all N)")
    p.add_argument("--eps-ge", type=float, help="P(read e | g)")
    p.add_argument("--eps-eg", type=float, help="P(read g | e)")
    p.add_argument("--shots", type=int, help="Monte Carlo shots (0 = analytic only)")
    p.add_argument("--seed", type=int)
    outputs(p)
    p.set_defaults(func=cmd_qnd)

    p = sub.add_parser("cpw", help="CPW impedance, lambda/4 frequency and lumped capacitance")
    p.add_argument("--config", type=Path)
    p.add_argument("--w-um", type=float)
    p.add_argument("--s-um", type=float)
    p.add_argument("--length-mm", type=float)
    p.add_argument("--eps-r", type=float)
    p.add_argument("--coupling-fF", type=float, nargs="*", help="loading capacitances")
    outputs(p)
    p.set_defaults(func=cmd_cpw)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (FitError, ConvergenceError, SingularityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except FileNotFoundError as exc:
        print(f"error: cannot read {exc.filename}", file=sys.stderr)
        return EXIT_IO
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
