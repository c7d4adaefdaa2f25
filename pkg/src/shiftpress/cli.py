"""Command line interface.

Subcommands ``pressure``, ``root``, ``spectrum``, ``dimension`` and
``verify`` each read a JSON job configuration.  Results go to ``--out``
(a directory) or, when no output directory is given, to stdout.

Exit codes: 0 success, 2 configuration error, 3 numerical precondition
failure, 4 invariant-suite failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .caratheodory import dimension_schedule, critical_exponent, pressure_estimate
from .config import JobConfig, load_config
from .errors import ConfigError, NotIrreducible, NumericalError
from .targets import is_sft
from .thermo import bowen_root, closed_form_curve, pressure_closed_form
from .spectra import spectrum_table

log = logging.getLogger("shiftpress")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_SUITE = 0, 2, 3, 4


def fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return "%.15g" % v
    return str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


class Output:
    """Writes named artifacts to a directory, or the main one to stdout."""

    def __init__(self, out: str | None, stream=None):
        self.dir = Path(out) if out else None
        self.stream = stream or sys.stdout
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str, main: bool = True) -> None:
        if self.dir is not None:
            (self.dir / name).write_text(text, encoding="utf-8", newline="\n")
        elif main:
            self.stream.write(text)

    def path(self, name: str) -> Path | None:
        return None if self.dir is None else self.dir / name


# ---------------------------------------------------------------------------
# commands


def cmd_pressure(cfg: JobConfig, out: Output) -> int:
    sft = is_sft(cfg.target)
    rows = []
    for t in cfg.t_grid:
        closed = pressure_closed_form(cfg.system, cfg.target, t) if sft else math.nan
        cover = math.nan
        if cfg.cover_estimate:
            est = pressure_estimate(cfg.system, cfg.target, t, depths=cfg.schedule, delta=cfg.delta, tol=cfg.tol)
            cover = est.extrapolated if est.extrapolated is not None else est.value
        rows.append((t, closed, cover, abs(closed - cover)))
    out.write("pressure.csv", _csv_text(["t", "T_closed_form", "T_cover_estimate", "abs_gap"], rows))
    if cfg.plot and out.dir is not None:
        from .plotting import plot_pressure

        plot_pressure([r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows], out.path("pressure.svg"))
    return EXIT_OK


def cmd_root(cfg: JobConfig, out: Output) -> int:
    curve = closed_form_curve(cfg.system, cfg.target)
    r = bowen_root(curve, tol=cfg.tol)
    items = [
        ("t_star", r.t),
        ("bracket_lo", r.bracket[0]),
        ("bracket_hi", r.bracket[1]),
        ("residual", r.residual),
        ("h_top", curve.h_top),
        ("alpha", curve.alpha),
        ("beta", curve.beta),
        ("tol", cfg.tol),
        ("iterations", r.iterations),
    ]
    out.write("root.txt", "".join(f"{k}={fmt(v)}\n" for k, v in items))
    return EXIT_OK


def cmd_spectrum(cfg: JobConfig, out: Output) -> int:
    curve = closed_form_curve(cfg.system, cfg.target)
    table = spectrum_table(curve, cfg.alpha_points, cfg.include_endpoints)
    rows = [(r.alpha, r.L_E, r.L_D, r.t, r.boundary) for r in table.rows]
    out.write("spectrum.csv", _csv_text(["alpha", "L_E", "L_D", "t_min", "boundary_flag"], rows))
    if cfg.plot and out.dir is not None:
        from .plotting import plot_spectrum

        plot_spectrum(curve, table, out.path("spectrum.svg"))
    return EXIT_OK


def cmd_dimension(cfg: JobConfig, out: Output) -> int:
    sched = dimension_schedule(cfg.system, cfg.target, cfg.schedule, cfg.variant, cfg.eps)
    res = critical_exponent(sched, bracket=(0.0, 64.0), tol=cfg.tol)
    rows = [(label, depth, s) for label, depth, s in res.crossings]
    rows.append(("extrapolated", cfg.schedule[-1], res.extrapolated if res.extrapolated is not None else math.nan))
    if is_sft(cfg.target):
        try:
            rows.append(("bowen_root", 0, bowen_root(closed_form_curve(cfg.system, cfg.target), tol=cfg.tol).t))
        except (NumericalError, NotIrreducible) as exc:
            log.info("no closed-form root: %s", exc)
    out.write("dimension.csv", _csv_text(["scale", "depth", "estimate"], rows))
    return EXIT_OK


def cmd_verify(cfg: JobConfig, out: Output) -> int:
    from .verify import run_suite

    results = run_suite(cfg)
    human = "".join(
        f"{r.name:<34} {r.status.upper():<5} worst_margin={fmt(float(r.worst_margin))} checked={r.checked}"
        + (f"  [{r.detail}]" if r.detail else "")
        + "\n"
        for r in results
    )
    machine = _csv_text(
        ["check", "status", "worst_margin", "checked", "detail"],
        [(r.name, r.status, float(r.worst_margin), r.checked, r.detail) for r in results],
    )
    out.write("verify.csv", machine, main=False)
    out.stream.write(human)
    return EXIT_SUITE if any(r.status == "fail" for r in results) else EXIT_OK


COMMANDS = {
    "pressure": cmd_pressure,
    "root": cmd_root,
    "spectrum": cmd_spectrum,
    "dimension": cmd_dimension,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shiftpress", description="Pressure, dimension and spectra of symbolic systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=(fn.__doc__ or name).strip().splitlines()[0] if fn.__doc__ else None)
        sp.add_argument("--config", required=True, help="JSON job configuration")
        sp.add_argument("--depth", type=int, help="override the cover depth")
        sp.add_argument("--tol", type=float, help="override the tolerance")
        sp.add_argument("--seed", type=int, help="override the random seed")
        sp.add_argument("--out", help="output directory (default: stdout)")
        sp.add_argument("--no-plot", action="store_true", help="skip SVG figures")
    return p


def main(argv=None, stdout=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    stream = stdout or sys.stdout
    try:
        cfg = load_config(args.config, {"depth": args.depth, "tol": args.tol, "seed": args.seed, "out": args.out})
        if args.no_plot:
            cfg.plot = False
        out = Output(cfg.out, stream)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ValueError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
