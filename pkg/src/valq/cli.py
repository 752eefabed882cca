"""Command-line front end.

Subcommands reproduce the reference tables (``table``), evaluate single
irrationalities (``val``), report whole class groups (``classes``), sweep all
discriminants up to a bound (``sweep``) and run the Markoff-tree experiments
(``markoff``).  Output is text, CSV or JSON; ``--figures`` additionally
renders matplotlib figures next to the delimited output.

Exit codes: 0 success, 2 unparseable input, 3 quadrature non-convergence,
4 precision-range / resource failures.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

from . import numerics, reports
from .errors import ConvergenceError, DomainError, ParseError, PrecisionRangeError
from .markoff import observation_report
from .quadratic import parse_cf, parse_form, parse_surd, cf_value

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONVERGENCE = 3
EXIT_RESOURCE = 4

DEFAULT_PRECISION = 192
DEFAULT_DIGITS = 25
FORMATS = ("text", "csv", "json")


def default_precision() -> int:
    env = os.environ.get("VALQ_PREC")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ParseError(f"VALQ_PREC must be an integer, got {env!r}") from exc
    return DEFAULT_PRECISION


@dataclass
class RunConfig:
    precision_bits: int = DEFAULT_PRECISION
    digits_out: int = DEFAULT_DIGITS
    parallelism: int = 1
    output_format: str = "text"
    output_path: str | None = None
    figures: bool = False
    max_doublings: int | None = None

    def __post_init__(self):
        if self.precision_bits < 32:
            raise DomainError("precision must be at least 32 bits")
        cap = math.floor(self.precision_bits * math.log10(2)) - 8
        if self.digits_out > cap:
            raise DomainError(
                f"{self.digits_out} digits need more than {self.precision_bits} bits "
                f"(cap at this precision: {cap}); raise --prec"
            )
        if self.digits_out < 1:
            raise DomainError("digits must be >= 1")
        if self.output_format not in FORMATS:
            raise DomainError(f"format must be one of {FORMATS}")
        if self.parallelism < 1:
            raise DomainError("jobs must be >= 1")


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        precision_bits=args.prec if args.prec else default_precision(),
        digits_out=args.digits,
        parallelism=args.jobs,
        output_format=args.format,
        output_path=args.out,
        figures=args.figures,
        max_doublings=args.max_doublings,
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="valq",
        description="values of the modular j-invariant at real quadratic irrationalities",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, default=None, metavar="BITS",
                        help=f"working target precision in bits (default {DEFAULT_PRECISION}, env VALQ_PREC)")
    common.add_argument("--digits", type=int, default=DEFAULT_DIGITS, metavar="N",
                        help=f"output digits (default {DEFAULT_DIGITS})")
    common.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="worker processes for sweeps")
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--out", metavar="PATH", default=None,
                        help="write output to a file instead of stdout")
    common.add_argument("--figures", action="store_true",
                        help="also render figures next to the output")
    common.add_argument("--max-doublings", type=int, default=None, metavar="K",
                        help="cap quadrature refinement rounds (debugging aid)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("val", parents=[common], help="evaluate one irrationality")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--cf", metavar="[b1,b2,...]", help="purely periodic continued fraction")
    g.add_argument("--surd", metavar="(p+sqrt(D))/q")
    g.add_argument("--form", metavar="a,b,c", help="quadratic form coefficients")

    p = sub.add_parser("table", parents=[common], help="reproduce a reference table")
    p.add_argument("k", type=int, choices=range(1, 8), help="table number 1..7")

    p = sub.add_parser("classes", parents=[common], help="narrow class group report")
    p.add_argument("D", type=int, help="discriminant")

    p = sub.add_parser("sweep", parents=[common], help="all classes with D <= dmax")
    p.add_argument("dmax", type=int)

    p = sub.add_parser("markoff", parents=[common], help="Markoff tree experiments")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--top", type=int, default=None,
                   help="keep only the regions with the smallest Markoff numbers")
    p.add_argument("--neighbors", type=int, default=0, metavar="K",
                   help="trace K neighbor-sequence values (observation vii)")
    p.add_argument("--neighbor-m", type=int, default=5)
    return ap


def _emit(cfg: RunConfig, text: str, figure_paths=None):
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for p in figure_paths or []:
        sys.stderr.write(f"figure: {p}\n")


def _figure_base(cfg: RunConfig, command: str) -> str:
    if cfg.output_path:
        base, _, _ = cfg.output_path.rpartition(".")
        return base or cfg.output_path
    return f"valq_{command}"


def cmd_val(args, cfg: RunConfig) -> int:
    if args.cf:
        w = cf_value(parse_cf(args.cf))
        label = args.cf.strip()
    elif args.surd:
        w = parse_surd(args.surd)
        label = args.surd.strip()
    else:
        w = parse_form(args.form)
        label = args.form.strip()
    row = reports.evaluate_irrational(w, cfg.precision_bits, label=label,
                                      max_doublings=cfg.max_doublings)
    if cfg.output_format == "csv":
        out = reports.rows_to_csv([row], cfg.digits_out, with_labels=True)
    elif cfg.output_format == "json":
        out = reports.rows_to_json([row], cfg.digits_out)
    else:
        out = reports.rows_to_text([row], cfg.digits_out)
    _emit(cfg, out)
    return EXIT_OK


def cmd_table(args, cfg: RunConfig) -> int:
    rows = reports.table_rows(args.k, cfg.precision_bits)
    if cfg.output_format == "csv":
        out = reports.rows_to_csv(rows, cfg.digits_out, with_labels=True)
    elif cfg.output_format == "json":
        out = reports.rows_to_json(rows, cfg.digits_out)
    else:
        out = reports.rows_to_text(rows, cfg.digits_out, title=f"table {args.k}")
    figs = None
    if cfg.figures:
        figs = reports.render_table_figure(rows, args.k, _figure_base(cfg, "table"))
    _emit(cfg, out, figs)
    return EXIT_OK


def cmd_classes(args, cfg: RunConfig) -> int:
    rep = reports.classes_report(args.D, cfg.precision_bits)
    if cfg.output_format == "csv":
        out = reports.rows_to_csv(rep.rows, cfg.digits_out)
    elif cfg.output_format == "json":
        import json
        out = json.dumps(rep.as_record(cfg.digits_out), indent=2)
    else:
        lines = [
            f"D = {rep.D}: h = {rep.h}, h+ = {rep.h_plus}, "
            f"norm(eps) = {rep.norm_eps}, log eps1 = {numerics.to_decimal(rep.log_eps, 14)}",
            f"class orders: {rep.orders}",
        ]
        out = "\n".join(lines) + "\n" + reports.rows_to_text(
            rep.rows, cfg.digits_out, p_target=rep.p_target)
    _emit(cfg, out)
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    rows = reports.sweep_rows(args.dmax, cfg.precision_bits, jobs=cfg.parallelism)
    summary = reports.sweep_summary(rows, cfg.precision_bits)
    if cfg.output_format == "csv":
        out = reports.rows_to_csv(rows, cfg.digits_out)
        out += "# " + "; ".join(reports.summary_to_text(summary).splitlines()) + "\n"
    elif cfg.output_format == "json":
        out = reports.rows_to_json(rows, cfg.digits_out, summary=summary)
    else:
        out = reports.rows_to_text(rows, cfg.digits_out)
        out += reports.summary_to_text(summary)
    figs = None
    if cfg.figures:
        figs = reports.render_sweep_figures(rows, summary, _figure_base(cfg, "sweep"))
    _emit(cfg, out, figs)
    return EXIT_OK


def cmd_markoff(args, cfg: RunConfig) -> int:
    rep = observation_report(args.depth, cfg.precision_bits,
                             neighbor_K=args.neighbors, neighbor_m=args.neighbor_m,
                             top=args.top)
    if cfg.output_format == "csv":
        out = reports.markoff_rows_csv(rep, cfg.digits_out)
    elif cfg.output_format == "json":
        import json
        out = json.dumps(reports.markoff_rows_json(rep, cfg.digits_out), indent=2)
    else:
        out = reports.markoff_report_text(rep, cfg.digits_out)
    figs = None
    if cfg.figures:
        figs = reports.render_markoff_figure(rep, _figure_base(cfg, "markoff"))
    _emit(cfg, out, figs)
    return EXIT_OK


_COMMANDS = {
    "val": cmd_val,
    "table": cmd_table,
    "classes": cmd_classes,
    "sweep": cmd_sweep,
    "markoff": cmd_markoff,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _COMMANDS[args.command](args, cfg)
    except (ParseError, DomainError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc} (nodes used: {exc.nodes_used})\n")
        return EXIT_CONVERGENCE
    except (PrecisionRangeError, MemoryError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RESOURCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
