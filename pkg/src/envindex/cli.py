"""Command-line front end.

Exit codes: 0 success, 2 validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import confidence, criteria, curve, env, modelfit

log = logging.getLogger("envindex")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3

_FORMS = {"neg2loglik": "neg2loglik", "nlogmse": "n_log_mse", "n_log_mse": "n_log_mse", "mse": "mse"}
_LIKELIHOOD_PRESETS = {"AIC", "BIC", "HQIC"}


class UsageError(ValueError):
    pass


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render(writer_fn, *args) -> str:
    buf = io.StringIO()
    writer_fn(buf, *args)
    return buf.getvalue()


def parse_methods(text: str, n_data: Optional[int]) -> List[criteria.PenaltySpec]:
    specs = []
    for token in filter(None, (t.strip() for t in text.split(","))):
        specs.append(criteria.PenaltySpec.from_name(token, n_data))
    if not specs:
        raise UsageError("no methods given")
    return specs


def parse_external(items: Sequence[str]) -> List[Tuple[str, int]]:
    out = []
    for item in items:
        label, sep, k = item.rpartition(":")
        if not sep or not label:
            raise UsageError(f"--external expects <label>:<k>, got {item!r}")
        try:
            out.append((label, int(k)))
        except ValueError:
            raise UsageError(f"--external: k must be an integer in {item!r}") from None
    return out


def parse_ks(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad K list {text!r}") from None


def _read_raw(path: str, monotone: str) -> curve.RawCurve:
    with open(path, newline="") as fh:
        values = curve.read_curve_csv(fh)
    return curve.RawCurve(values, monotone=monotone)


def _read_dataset(path: str) -> modelfit.Dataset:
    with open(path, newline="") as fh:
        return modelfit.read_dataset_csv(fh)


def plot_csv(err: curve.ErrorCurve, report: confidence.ConfidenceReport, specs) -> str:
    """Columns ``k, V, C_<method>..., CI, CU``."""
    cols = {"k": np.arange(err.K + 1), "V": err.values}
    for spec in specs:
        try:
            cols[f"C_{spec.name}"] = criteria.select(err, spec).cost_profile
        except ValueError:
            continue
    nan = np.full(err.K + 1, np.nan)
    cols["CI"] = report.ci if report.ci is not None else nan
    cols["CU"] = report.cu if report.cu is not None else nan
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(cols))
    for k in range(err.K + 1):
        w.writerow([k] + [repr(float(c[k])) for name, c in cols.items() if name != "k"])
    return buf.getvalue()


def _summary(report: confidence.ConfidenceReport, decimals: int) -> str:
    f = f"{{:.{decimals}f}}"
    fmt = lambda x: "-" if x is None else f.format(x)
    lines = [
        f"K={report.K}  V(0)={report.v0:.6g}  I_ENV={fmt(report.i_env)}  suggested k*={report.suggested_k}",
        f"{'method':<16}{'k_e':>6}{'CI':>9}{'CI(k_e-1)':>11}{'R_D':>8}",
    ]
    for m in report.methods:
        if m.k_e is None:
            lines.append(f"{m.name:<16}  error: {m.error}")
            continue
        lines.append(
            f"{m.name:<16}{m.k_e:>6}{fmt(m.ci_at_ke):>9}{fmt(m.ci_at_ke_minus_1):>11}{fmt(m.r_d):>8}"
        )
    for e in report.external:
        lines.append(f"{e.label:<16}{e.k_e:>6}{fmt(e.ci):>9}{'':>11}{fmt(e.r_d):>8}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    n_data = args.n
    form = _FORMS[args.form]
    if args.kind == "dataset":
        data = _read_dataset(args.input)
        ranking = modelfit.forward_rank(data)
        raw = modelfit.curve_from_dataset(data, ranking, form)
        n_data = data.N if n_data is None else n_data
    else:
        raw = _read_raw(args.input, args.monotone)

    specs = parse_methods(args.methods, n_data)
    if any(s.name in _LIKELIHOOD_PRESETS for s in specs):
        if args.kind == "dataset" and form == "mse":
            log.warning("AIC/BIC/HQIC assume V(k) = -2 log l_max; the curve form here is mse")
    err = curve.normalize(raw)
    report = confidence.build_report(err, specs, parse_external(args.external))

    text = json.dumps(report.to_dict(), indent=2, allow_nan=False)
    plot = plot_csv(err, report, specs) if args.out_plot else None
    if args.out_report:
        atomic_write(args.out_report, text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if plot is not None:
        atomic_write(args.out_plot, plot)
    if args.summary:
        print(_summary(report, args.decimals), file=sys.stderr)
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.kind == "exponential":
        err = curve.synth_exponential(args.rate, args.K)
    else:
        err = curve.synth_ideal(args.kind, args.K, args.k_star, args.v0)
    atomic_write(args.out, _render(curve.write_curve_csv, err.values))
    return EXIT_OK


def cmd_trace(args) -> int:
    raw = _read_raw(args.input, args.monotone)
    ks = parse_ks(args.ks)
    trace = env.env_trace(raw, ks)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["K", "i_env"])
    for K, value in trace:
        w.writerow([K, repr(value)])
    atomic_write(args.out, buf.getvalue())
    return EXIT_OK


def cmd_build_curve(args) -> int:
    data = _read_dataset(args.input)
    ranking = modelfit.forward_rank(data)
    raw = modelfit.curve_from_dataset(data, ranking, _FORMS[args.form])
    w_bar = confidence.importance(curve.normalize(raw)).w_bar
    if ranking.singular:
        log.warning("collinear features appended without refit: %s",
                    ", ".join(data.names[j] for j in ranking.singular))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "feature", "w_bar"])
    for rank, j in enumerate(ranking.order, start=1):
        w.writerow([rank, data.names[j], "" if w_bar is None else repr(float(w_bar[rank - 1]))])
    sidecar = args.out_ranking or _sidecar_path(args.out)
    curve_text = _render(curve.write_curve_csv, raw.values)
    atomic_write(args.out, curve_text)
    atomic_write(sidecar, buf.getvalue())
    return EXIT_OK


def _sidecar_path(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.ranking{ext or '.csv'}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="envindex", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run selection methods and confidence measures on a curve or dataset")
    a.add_argument("--input", required=True)
    a.add_argument("--kind", choices=("curve", "dataset"), default="curve")
    a.add_argument("--form", choices=sorted(_FORMS), default="mse",
                   help="curve built from a dataset (default: mse)")
    a.add_argument("--methods", default="uaed",
                   help="comma list of aic,bic,hqic,uaed,custom:<lambda> (default: uaed)")
    a.add_argument("--n", type=int, default=None, help="number of data points for BIC/HQIC on raw curves")
    a.add_argument("--external", action="append", default=[], metavar="LABEL:K",
                   help="score a model size chosen by any other procedure (repeatable)")
    a.add_argument("--monotone", choices=("strict", "clamp"), default="strict")
    a.add_argument("--out-report", default=None, help="report JSON path (default: stdout)")
    a.add_argument("--out-plot", default=None, help="plot-ready CSV path")
    a.add_argument("--summary", action="store_true", help="print a rounded table to stderr")
    a.add_argument("--decimals", type=int, default=2)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synth", help="write a synthetic curve CSV")
    s.add_argument("kind", choices=("exponential", "single-step", "linear-full", "linear-to-kstar"))
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--rate", type=float, default=0.1)
    s.add_argument("--k-star", type=int, default=None)
    s.add_argument("--v0", type=float, default=1.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    t = sub.add_parser("trace", help="ENV index of truncated prefixes of a raw curve")
    t.add_argument("--input", required=True)
    t.add_argument("--ks", required=True, help="comma list of ascending K values")
    t.add_argument("--monotone", choices=("strict", "clamp"), default="strict")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_trace)

    b = sub.add_parser("build-curve", help="rank dataset features and write the nested-model curve")
    b.add_argument("--input", required=True)
    b.add_argument("--form", choices=sorted(_FORMS), default="mse")
    b.add_argument("--out", required=True)
    b.add_argument("--out-ranking", default=None, help="ranking sidecar (default: <out>.ranking.csv)")
    b.set_defaults(func=cmd_build_curve)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="envindex: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"envindex: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"envindex: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
