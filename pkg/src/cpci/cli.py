"""Command-line front end: classify, estimate, query, render, synth, coverage.

Every subcommand composes module operations and writes files atomically
(temp file + rename), so failures never leave partial output.  Exit
codes: 0 success, 2 usage or input error, 1 internal error.  Numbers in
CSV output carry 9 significant digits with LF line endings.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile

from .critical import CriticalType, TYPE_CODES, classify_field, count_types
from .grid import GridTopology, load_ensemble, save_ensemble
from .render import GlyphStyle, render_map
from .stats import (
    ConfidenceLevel,
    IntervalEstimate,
    ProbabilitySummary,
    coverage_experiment,
    summarize,
)
from .synth import (
    estimate_moments,
    ground_truth_probabilities,
    load_moment_model,
    sample_ensemble,
    save_moment_model,
)

_SUMMARY_HEADER = (
    "i,j,min_hat,min_lo,min_hi,max_hat,max_lo,max_hi,sad_hat,sad_lo,sad_hi"
)
_SEED_MOD = 1 << 64


def _fmt9(value: float) -> str:
    return format(float(value), ".9g")


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cpci-tmp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _atomic_write_text(path: str, text: str) -> None:
    _atomic_write(path, text.encode("utf-8"))


def _load_ensemble_path(path: str):
    with open(path, "rb") as handle:
        return load_ensemble(handle)


def _load_model_path(path: str):
    with open(path, "rb") as handle:
        return load_moment_model(handle)


def _summary_csv(
    summaries: list[ProbabilitySummary],
    topology: GridTopology,
    m: int,
    gamma: float,
    collapse: bool = False,
) -> str:
    lines = [f"# m={m} gamma={_fmt9(gamma)}", _SUMMARY_HEADER]
    for v in range(topology.n):
        i, j = topology.coords(v)
        cells = [str(i), str(j)]
        s = summaries[v]
        for est in (s.minimum, s.maximum, s.saddle):
            if collapse:
                triple = (est.p_hat, est.p_hat, est.p_hat)
            else:
                triple = (est.p_hat, est.p_lower, est.p_upper)
            cells.extend(_fmt9(x) for x in triple)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _read_summary_csv(path: str):
    """Parse a summary CSV back into per-vertex summaries.

    Returns (topology, summaries in linear vertex order, m, gamma); m and
    gamma are None when the metadata comment is absent.
    """
    m = gamma = None
    with open(path, "r", encoding="utf-8", newline="") as handle:
        raw_lines = handle.read().splitlines()
    data_lines = []
    for line in raw_lines:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            for token in stripped.lstrip("#").split():
                key, _, value = token.partition("=")
                if key == "m" and value:
                    m = int(value)
                elif key == "gamma" and value:
                    gamma = float(value)
            continue
        data_lines.append(stripped)
    if not data_lines:
        raise ValueError(f"{path}: no header row found")
    header = data_lines[0]
    if header != _SUMMARY_HEADER:
        raise ValueError(
            f"{path}: unexpected header {header!r}; expected {_SUMMARY_HEADER!r}")
    rows: dict[tuple[int, int], ProbabilitySummary] = {}
    for cells in csv.reader(data_lines[1:]):
        if len(cells) != 11:
            raise ValueError(
                f"{path}: expected 11 fields per row, got {len(cells)}: {','.join(cells)!r}")
        try:
            i, j = int(cells[0]), int(cells[1])
            values = [float(c) for c in cells[2:]]
        except ValueError:
            raise ValueError(f"{path}: malformed row {','.join(cells)!r}") from None
        if i < 0 or j < 0:
            raise ValueError(f"{path}: negative vertex index in row {','.join(cells)!r}")
        if (i, j) in rows:
            raise ValueError(f"{path}: duplicate vertex ({i}, {j})")
        estimates = [
            IntervalEstimate(
                p_hat=values[k], p_lower=values[k + 1], p_upper=values[k + 2], m=m)
            for k in (0, 3, 6)
        ]
        rows[(i, j)] = ProbabilitySummary(
            minimum=estimates[0], maximum=estimates[1], saddle=estimates[2], gamma=gamma)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    nx = max(i for i, _ in rows) + 1
    ny = max(j for _, j in rows) + 1
    topology = GridTopology(nx, ny)
    if len(rows) != topology.n:
        raise ValueError(
            f"{path}: {len(rows)} rows do not cover the {nx}x{ny} grid ({topology.n} vertices)")
    summaries = []
    for v in range(topology.n):
        key = topology.coords(v)
        if key not in rows:
            raise ValueError(f"{path}: missing vertex {key}")
        summaries.append(rows[key])
    return topology, summaries, m, gamma


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated integers, got {text!r}") from None
    if not values:
        raise ValueError(f"{flag} must list at least one value")
    return values


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if not values:
        raise ValueError(f"{flag} must list at least one value")
    return values


def cmd_classify(args: argparse.Namespace) -> int:
    ensemble = _load_ensemble_path(args.input)
    if not 0 <= args.member < ensemble.m:
        raise ValueError(
            f"--member must be in [0, {ensemble.m - 1}], got {args.member}")
    types = classify_field(ensemble.values[args.member], ensemble.topology)
    lines = ["i,j,type"]
    for v, ctype in enumerate(types):
        if ctype == CriticalType.REGULAR:
            continue
        i, j = ensemble.topology.coords(v)
        lines.append(f"{i},{j},{TYPE_CODES[ctype]}")
    _atomic_write_text(args.output, "\n".join(lines) + "\n")
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    ensemble = _load_ensemble_path(args.input)
    counts = count_types(ensemble)
    topology = ensemble.topology
    if args.counts:
        lines = ["i,j,c_min,c_max,c_saddle,m"]
        for v in range(topology.n):
            i, j = topology.coords(v)
            c = counts[v]
            lines.append(f"{i},{j},{c.c_min},{c.c_max},{c.c_saddle},{c.m}")
        _atomic_write_text(args.output, "\n".join(lines) + "\n")
        return 0
    level = ConfidenceLevel(args.gamma)
    summaries = [summarize(c, level) for c in counts]
    _atomic_write_text(
        args.output, _summary_csv(summaries, topology, ensemble.m, level.gamma))
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    topology, summaries, m, gamma = _read_summary_csv(args.input)
    if m is None or gamma is None:
        raise ValueError(
            f"{args.input}: missing `# m=... gamma=...` metadata; cannot report m and gamma")
    i, j = args.i, args.j
    if not topology.contains(i, j):
        raise ValueError(
            f"vertex out of range: i must be in [0, {topology.nx - 1}] "
            f"and j in [0, {topology.ny - 1}], got ({i}, {j})")
    summary = summaries[topology.linear(i, j)]
    print(f"vertex ({i}, {j})  m={m}  gamma={_fmt9(gamma)}")
    for code, est in (("min", summary.minimum), ("max", summary.maximum),
                      ("sad", summary.saddle)):
        print(
            f"{code}  p_hat={_fmt9(est.p_hat)}  p_lower={_fmt9(est.p_lower)}"
            f"  p_upper={_fmt9(est.p_upper)}")
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    topology, summaries, _, _ = _read_summary_csv(args.input)
    if args.ground_truth:
        for v, summary in enumerate(summaries):
            for code in ("min", "max", "sad"):
                est = summary.by_code(code)
                if not est.p_hat == est.p_lower == est.p_upper:
                    i, j = topology.coords(v)
                    raise ValueError(
                        f"--ground-truth requires p_hat = p_lower = p_upper; "
                        f"vertex ({i}, {j}) type {code} has "
                        f"({_fmt9(est.p_hat)}, {_fmt9(est.p_lower)}, {_fmt9(est.p_upper)})")
    style = GlyphStyle(r_max=args.rmax, cell=args.cell)
    _atomic_write_text(args.output, render_map(summaries, topology, style))
    return 0


def cmd_synth_fit(args: argparse.Namespace) -> int:
    ensemble = _load_ensemble_path(args.input)
    model = estimate_moments(ensemble)
    sink = io.BytesIO()
    save_moment_model(model, sink)
    _atomic_write(args.output, sink.getvalue())
    return 0


def cmd_synth_sample(args: argparse.Namespace) -> int:
    model = _load_model_path(args.input)
    sizes = _parse_int_list(args.sizes, "--sizes")
    if any(size < 1 for size in sizes):
        raise ValueError(f"--sizes entries must be >= 1, got {sizes}")
    if args.count < 1:
        raise ValueError(f"--count must be >= 1, got {args.count}")
    os.makedirs(args.output, exist_ok=True)
    ordinal = 0
    for size in sizes:
        for k in range(args.count):
            seed = (args.seed + ordinal) % _SEED_MOD
            ensemble = sample_ensemble(model, size, seed)
            name = f"sample_m{size}_{k:02d}.egf"
            path = os.path.join(args.output, name)
            sink = io.BytesIO()
            save_ensemble(ensemble, sink)
            _atomic_write(path, sink.getvalue())
            print(path)
            ordinal += 1
    return 0


def cmd_synth_truth(args: argparse.Namespace) -> int:
    model = _load_model_path(args.input)
    level = ConfidenceLevel(args.gamma)
    summaries = ground_truth_probabilities(model, args.draws, args.seed, level)
    _atomic_write_text(
        args.output,
        _summary_csv(summaries, model.topology, args.draws, level.gamma,
                     collapse=args.collapse))
    return 0


def cmd_coverage(args: argparse.Namespace) -> int:
    p_values = _parse_float_list(args.p, "--p")
    m_values = _parse_int_list(args.m, "--m")
    level = ConfidenceLevel(args.gamma)
    lines = ["p,m,gamma,reps,coverage,mean_width"]
    ordinal = 0
    for p in p_values:
        for m in m_values:
            report = coverage_experiment(
                p, m, level, reps=args.reps, seed=(args.seed + ordinal) % _SEED_MOD)
            lines.append(
                f"{_fmt9(report.p_true)},{report.m},{_fmt9(report.gamma)},"
                f"{report.reps},{_fmt9(report.empirical_coverage)},"
                f"{_fmt9(report.mean_width)}")
            ordinal += 1
    _atomic_write_text(args.output, "\n".join(lines) + "\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpci",
        description=(
            "Confidence intervals for critical-point occurrence probabilities "
            "in ensembles of piecewise-linear scalar fields."),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_classify = sub.add_parser(
        "classify", help="list critical points of one ensemble member as CSV")
    p_classify.add_argument("--input", required=True, help="input EGF file")
    p_classify.add_argument("--output", required=True, help="output CSV file")
    p_classify.add_argument(
        "--member", type=int, default=0, help="member index (default 0)")
    p_classify.set_defaults(func=cmd_classify)

    p_estimate = sub.add_parser(
        "estimate",
        help="per-vertex occurrence probabilities with Jeffreys intervals")
    p_estimate.add_argument("--input", required=True, help="input EGF file")
    p_estimate.add_argument("--output", required=True, help="output CSV file")
    p_estimate.add_argument(
        "--gamma", type=float, default=0.95, help="confidence level (default 0.95)")
    p_estimate.add_argument(
        "--counts", action="store_true",
        help="emit raw per-type counts instead of interval estimates")
    p_estimate.set_defaults(func=cmd_estimate)

    p_query = sub.add_parser(
        "query", help="print the nine values of one vertex from a summary CSV")
    p_query.add_argument("--input", required=True, help="summary CSV file")
    p_query.add_argument("i", type=int, help="vertex column index")
    p_query.add_argument("j", type=int, help="vertex row index")
    p_query.set_defaults(func=cmd_query)

    p_render = sub.add_parser(
        "render", help="render a summary CSV as an SVG glyph map")
    p_render.add_argument("--input", required=True, help="summary CSV file")
    p_render.add_argument("--output", required=True, help="output SVG file")
    p_render.add_argument(
        "--rmax", type=float, default=18.0, help="glyph radius at p=1 (default 18)")
    p_render.add_argument(
        "--cell", type=float, default=40.0, help="grid spacing in pixels (default 40)")
    p_render.add_argument(
        "--ground-truth", action="store_true",
        help="require degenerate intervals (p_hat = p_lower = p_upper)")
    p_render.set_defaults(func=cmd_render)

    p_synth = sub.add_parser(
        "synth", help="Gaussian model fitting, sampling, and ground truth")
    synth_sub = p_synth.add_subparsers(dest="synth_command", required=True)

    p_fit = synth_sub.add_parser("fit", help="estimate moments from an EGF ensemble")
    p_fit.add_argument("--input", required=True, help="input EGF file")
    p_fit.add_argument("--output", required=True, help="output MMF file")
    p_fit.set_defaults(func=cmd_synth_fit)

    p_sample = synth_sub.add_parser(
        "sample", help="draw numbered EGF ensembles from an MMF model")
    p_sample.add_argument("--input", required=True, help="input MMF file")
    p_sample.add_argument(
        "--output", required=True, help="output directory for EGF files")
    p_sample.add_argument(
        "--sizes", required=True,
        help="comma-separated ensemble sizes, e.g. 4,9,16")
    p_sample.add_argument(
        "--count", type=int, default=1,
        help="ensembles per size (default 1); seeds derive from --seed + ordinal")
    p_sample.add_argument(
        "--seed", type=int, default=0, help="base seed (default 0)")
    p_sample.set_defaults(func=cmd_synth_sample)

    p_truth = synth_sub.add_parser(
        "truth", help="Monte-Carlo ground-truth probabilities from an MMF model")
    p_truth.add_argument("--input", required=True, help="input MMF file")
    p_truth.add_argument("--output", required=True, help="output summary CSV")
    p_truth.add_argument(
        "--draws", type=int, default=100_000,
        help="Monte-Carlo draws (default 100000)")
    p_truth.add_argument("--seed", type=int, default=0, help="seed (default 0)")
    p_truth.add_argument(
        "--gamma", type=float, default=0.95, help="confidence level (default 0.95)")
    p_truth.add_argument(
        "--collapse", action="store_true",
        help="write degenerate rows (lo = hat = hi) for ground-truth rendering")
    p_truth.set_defaults(func=cmd_synth_truth)

    p_coverage = sub.add_parser(
        "coverage", help="Monte-Carlo coverage of Jeffreys intervals as CSV")
    p_coverage.add_argument(
        "--p", required=True, help="comma-separated true probabilities")
    p_coverage.add_argument(
        "--m", required=True, help="comma-separated ensemble sizes")
    p_coverage.add_argument("--output", required=True, help="output CSV file")
    p_coverage.add_argument(
        "--gamma", type=float, default=0.95, help="confidence level (default 0.95)")
    p_coverage.add_argument(
        "--reps", type=int, default=10_000, help="replications per cell (default 10000)")
    p_coverage.add_argument(
        "--seed", type=int, default=0,
        help="base seed; each (p, m) cell uses --seed + ordinal")
    p_coverage.set_defaults(func=cmd_coverage)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"cpci: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"cpci: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
