"""Command-line frontend: analyze case archives, run packaged simulation
studies, and render result files to SVG.

Every run writes its outputs plus a ``manifest.json`` (seed, resolved flags,
tool version) into the output directory, so a run can be reproduced from the
manifest alone.  With a fixed seed all outputs are byte-identical across
runs; the manifest's ``created`` timestamp is the single exception.

Exit codes: 0 success, 1 usage error, 2 malformed input or validation error.
The seed defaults to the documented package constant, can be set with
``--seed``, or with the ``COPPIT_SEED`` environment variable when the flag
is absent.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, simstudy
from .calibration import (
    CopPitRecord,
    clical_curve,
    cone_signs,
    coppit,
    histogram,
    multivariate_rank,
    pit,
    rank_histogram,
)
from .forecasts import EnsembleForecast, margin_forecast
from .io import (
    ArchiveError,
    read_archive,
    read_curve,
    read_histogram,
    render_svg,
    write_curve,
    write_histogram,
    write_manifest,
    write_records,
)
from .kendall import DEFAULT_MC_SIZE, select_kendall
from .samplers import DEFAULT_SEED, substream, uniform01

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    """Bad flags or malformed invocation (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(kind):
    def convert(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if value < 1:
            raise argparse.ArgumentTypeError(f"expected a positive {kind}, got {value}")
        return value
    return convert


def _seed_value(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be non-negative, got {value}")
    return value


def build_parser():
    p = _Parser(prog="coppit",
                description="Calibration checks for multivariate probabilistic forecasts.")
    p.add_argument("--version", action="version", version=f"coppit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add_io(sp):
        sp.add_argument("--in", dest="inp", required=True, metavar="FILE",
                        help="case archive (JSON lines, or CSV ensemble shorthand)")
        sp.add_argument("--out", required=True, metavar="DIR", help="output directory")

    def add_common(sp):
        sp.add_argument("--seed", type=_seed_value, default=None,
                        help="master seed (default: COPPIT_SEED or the package constant)")
        sp.add_argument("--threads", type=_positive("thread count"), default=1,
                        help="worker threads for per-case computation")

    sp = sub.add_parser("coppit", help="copula PIT records and histogram for an archive")
    add_io(sp)
    add_common(sp)
    sp.add_argument("--bins", type=_positive("bin count"), default=20)
    sp.add_argument("--kendall", choices=("auto", "analytic", "mc", "pseudo"), default="auto",
                    help="Kendall-function strategy")
    sp.add_argument("--kendall-n", type=_positive("sample size"), default=DEFAULT_MC_SIZE,
                    help="Monte Carlo sample size for the mc strategy")
    sp.add_argument("--cone", default=None, metavar="SPEC",
                    help="orthant direction: sw/se/ne/nw or a +- string, one sign per coordinate")

    sp = sub.add_parser("pit", help="randomized PIT of one margin for an archive")
    add_io(sp)
    add_common(sp)
    sp.add_argument("--bins", type=_positive("bin count"), default=20)
    sp.add_argument("--margin", type=_positive("margin index"), default=1,
                    help="1-based coordinate whose margin is checked")

    sp = sub.add_parser("rank-hist", help="multivariate rank histogram for an ensemble archive")
    add_io(sp)
    add_common(sp)
    sp.add_argument("--cone", default=None, metavar="SPEC")

    sp = sub.add_parser("clical", help="climatological copula-calibration curve for an archive")
    add_io(sp)
    add_common(sp)
    sp.add_argument("--grid", type=_positive("grid size"), default=101,
                    help="number of evaluation points on [0, 1]")
    sp.add_argument("--kendall", choices=("auto", "analytic", "mc", "pseudo"), default="auto")
    sp.add_argument("--kendall-n", type=_positive("sample size"), default=DEFAULT_MC_SIZE)
    sp.add_argument("--cone", default=None, metavar="SPEC")

    sim = sub.add_parser("simulate", help="run a packaged simulation study")
    study = sim.add_subparsers(dest="study", required=True, metavar="STUDY")

    sp = study.add_parser("bivariate", help="eight-forecaster bivariate study")
    sp.add_argument("--out", required=True, metavar="DIR")
    add_common(sp)
    sp.add_argument("--j", type=_positive("case count"), default=4000)
    sp.add_argument("--bins", type=_positive("bin count"), default=20)
    sp.add_argument("--directional", action="store_true",
                    help="also write per-quadrant orthant records")
    sp.add_argument("--directional-n", type=_positive("sample size"), default=DEFAULT_MC_SIZE,
                    help="Monte Carlo size per case for directional Kendall functions")

    sp = study.add_parser("highdim", help="high-dimensional rank vs copula PIT contrast")
    sp.add_argument("--out", required=True, metavar="DIR")
    add_common(sp)
    sp.add_argument("--variant", required=True, choices=simstudy.HIGHDIM_VARIANTS)
    sp.add_argument("--j", type=_positive("case count"), default=4000)
    sp.add_argument("--d", type=_positive("dimension"), default=50)
    sp.add_argument("--m", type=_positive("ensemble size"), default=8)
    sp.add_argument("--kendall-n", type=_positive("sample size"), default=10_000)
    sp.add_argument("--bins", type=_positive("bin count"), default=20)

    sp = study.add_parser("demo-emos", help="bivariate Gaussian forecasting demo")
    sp.add_argument("--out", required=True, metavar="DIR")
    add_common(sp)
    sp.add_argument("--variant", required=True, choices=simstudy.DEMO_VARIANTS)
    sp.add_argument("--j", type=_positive("case count"), default=4000)
    sp.add_argument("--m", type=_positive("ensemble size"), default=8)
    sp.add_argument("--kendall-n", type=_positive("sample size"), default=100_000)
    sp.add_argument("--bins", type=_positive("bin count"), default=20)

    sp = sub.add_parser("render", help="render a result file (histogram or curve CSV/JSON) to SVG")
    sp.add_argument("--in", dest="inp", required=True, metavar="FILE")
    sp.add_argument("--out", required=True, metavar="FILE.svg")

    return p


def _resolve_seed(args):
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("COPPIT_SEED")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"COPPIT_SEED must be an integer, got {env!r}")
        if value < 0:
            raise UsageError(f"COPPIT_SEED must be non-negative, got {value}")
        return value
    return DEFAULT_SEED


def _check_cone_syntax(spec):
    if spec is None:
        return
    try:
        cone_signs(spec)
    except ValueError as exc:
        raise UsageError(f"--cone: {exc}")


def _flags(args, seed):
    skip = {"command", "study", "inp", "out", "seed", "func"}
    out = {"seed": seed, "in": getattr(args, "inp", None), "out": args.out}
    for key, value in sorted(vars(args).items()):
        if key not in skip:
            out[key.replace("_", "-")] = value
    return out


def _finish(args, seed, out_dir, outputs, argv, n_cases):
    command = args.command if args.command != "simulate" else f"simulate {args.study}"
    write_manifest(out_dir, {
        "tool": "coppit",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "flags": _flags(args, seed),
        "outputs": sorted(outputs),
    })
    print(f"coppit {command}: {n_cases} cases -> {out_dir}", file=sys.stderr)


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _map_cases(work, n, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(work, range(n)))
    return [work(i) for i in range(n)]


def _analyze(archive, seed, strategy, kendall_n, signs, threads):
    """Per-case copula PIT records (substreams: 1=v, 2=ties, 3=Monte Carlo)."""
    v = uniform01(substream(seed, 1), len(archive.cases))

    def work(i):
        fc, y = archive.cases[i]
        kfn = select_kendall(fc, strategy=strategy, rng=substream(seed, 3, i),
                             n=kendall_n, signs=signs)
        rec = coppit(fc, kfn, y, float(v[i]), signs=signs)
        if isinstance(fc, EnsembleForecast):
            rec.rank = multivariate_rank(fc.points, y, substream(seed, 2, i), signs=signs)
        return rec, kfn

    results = _map_cases(work, len(archive.cases), threads)
    return [r for r, _ in results], [k for _, k in results]


def _write_hist(values, bins, out, stem, outputs, ranks_m=None):
    if ranks_m is None:
        hist = histogram(values, bins=bins)
    else:
        hist = rank_histogram(values, ranks_m)
    write_histogram(hist, out / f"{stem}.csv")
    render_svg(hist, out / f"{stem}.svg")
    outputs += [f"{stem}.csv", f"{stem}.svg"]


def _cmd_coppit(args, seed, argv):
    archive = read_archive(args.inp)
    signs = None if args.cone is None else cone_signs(args.cone, dim=archive.dim)
    recs, _ = _analyze(archive, seed, args.kendall, args.kendall_n, signs, args.threads)
    out = _out_dir(args)
    write_records(recs, out / "records.csv")
    outputs = ["records.csv"]
    _write_hist([r.u for r in recs], args.bins, out, "hist", outputs)
    _finish(args, seed, out, outputs, argv, len(recs))
    return 0


def _cmd_pit(args, seed, argv):
    archive = read_archive(args.inp)
    if args.margin > archive.dim:
        raise ValueError(f"--margin {args.margin} exceeds archive dimension {archive.dim}")
    k = args.margin - 1
    v = uniform01(substream(seed, 1), len(archive.cases))

    def work(i):
        fc, y = archive.cases[i]
        mfc = margin_forecast(fc, k)
        yk = float(np.asarray(y).reshape(-1)[k])
        hi = float(np.atleast_1d(mfc.cdf(yk))[0])
        lo = float(np.atleast_1d(mfc.cdf_left(yk))[0])
        rec = CopPitRecord(h=hi, k_left=lo, k_right=hi, v=float(v[i]),
                           u=pit(mfc, yk, float(v[i])))
        if isinstance(mfc, EnsembleForecast):
            rec.rank = multivariate_rank(mfc.points, [yk], substream(seed, 2, i))
        return rec

    recs = _map_cases(work, len(archive.cases), args.threads)
    out = _out_dir(args)
    write_records(recs, out / "records.csv")
    outputs = ["records.csv"]
    _write_hist([r.u for r in recs], args.bins, out, "hist", outputs)
    _finish(args, seed, out, outputs, argv, len(recs))
    return 0


def _cmd_rank_hist(args, seed, argv):
    archive = read_archive(args.inp)
    signs = None if args.cone is None else cone_signs(args.cone, dim=archive.dim)
    sizes = set()
    for i, (fc, _) in enumerate(archive.cases):
        if not isinstance(fc, EnsembleForecast):
            raise ValueError(f"case {i + 1}: rank histograms need ensemble forecasts")
        sizes.add(fc.points.shape[0])
    if len(sizes) != 1:
        raise ValueError(f"rank histograms need one common ensemble size, found {sorted(sizes)}")
    m = sizes.pop()

    def work(i):
        fc, y = archive.cases[i]
        return multivariate_rank(fc.points, y, substream(seed, 2, i), signs=signs)

    ranks = _map_cases(work, len(archive.cases), args.threads)
    out = _out_dir(args)
    with open(out / "ranks.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case", "rank"])
        for i, r in enumerate(ranks, start=1):
            writer.writerow([i, r])
    outputs = ["ranks.csv"]
    _write_hist(np.array(ranks), None, out, "hist", outputs, ranks_m=m)
    _finish(args, seed, out, outputs, argv, len(ranks))
    return 0


def _cmd_clical(args, seed, argv):
    archive = read_archive(args.inp)
    signs = None if args.cone is None else cone_signs(args.cone, dim=archive.dim)
    recs, kfns = _analyze(archive, seed, args.kendall, args.kendall_n, signs, args.threads)
    curve = clical_curve(np.array([r.h for r in recs]), kfns,
                         grid=np.linspace(0.0, 1.0, args.grid))
    out = _out_dir(args)
    write_curve(curve, out / "curve.csv")
    render_svg(curve, out / "curve.svg")
    _finish(args, seed, out, ["curve.csv", "curve.svg"], argv, len(recs))
    return 0


def _records_from_arrays(h, k_left, k_right, v, u, ranks=None):
    out = []
    for i in range(len(h)):
        out.append(CopPitRecord(
            h=float(h[i]), k_left=float(k_left[i]), k_right=float(k_right[i]),
            v=float(v[i]), u=float(u[i]),
            rank=None if ranks is None else int(ranks[i])))
    return out


def _cmd_simulate_bivariate(args, seed, argv):
    study = simstudy.run_bivariate(j=args.j, seed=seed,
                                   include_directional=args.directional,
                                   directional_n=args.directional_n)
    out = _out_dir(args)
    outputs = []
    for fb in study.forecasters:
        sub = out / fb.label
        sub.mkdir(exist_ok=True)
        write_records(_records_from_arrays(fb.h, fb.k_left, fb.k_right, fb.v, fb.u),
                      sub / "records.csv")
        outputs.append(f"{fb.label}/records.csv")
        sub_outputs = []
        _write_hist(fb.u, args.bins, sub, "hist", sub_outputs)
        curve = simstudy.bivariate_clical(study, fb.label)
        write_curve(curve, sub / "curve.csv")
        render_svg(curve, sub / "curve.svg")
        sub_outputs += ["curve.csv", "curve.svg"]
        if fb.directional is not None:
            for quadrant, rec in fb.directional.items():
                write_records(_records_from_arrays(
                    rec["h"], rec["k_left"], rec["k_right"], fb.v, rec["u"]),
                    sub / f"records_{quadrant}.csv")
                _write_hist(rec["u"], args.bins, sub, f"hist_{quadrant}", sub_outputs)
                sub_outputs.append(f"records_{quadrant}.csv")
        outputs += [f"{fb.label}/{name}" for name in sub_outputs]
    _finish(args, seed, out, outputs, argv, study.j * len(study.forecasters))
    return 0


def _cmd_simulate_highdim(args, seed, argv):
    batch = simstudy.run_highdim(args.variant, j=args.j, seed=seed, d=args.d,
                                 m=args.m, kendall_n=args.kendall_n)
    out = _out_dir(args)
    write_records(_records_from_arrays(batch.h, batch.k_left, batch.k_right,
                                       batch.v, batch.u, batch.ranks),
                  out / "records.csv")
    outputs = ["records.csv"]
    _write_hist(batch.u, args.bins, out, "hist", outputs)
    _write_hist(batch.ranks, None, out, "rank_hist", outputs, ranks_m=batch.m)
    _finish(args, seed, out, outputs, argv, batch.j)
    return 0


def _cmd_simulate_demo(args, seed, argv):
    batch = simstudy.run_demo_emos(args.variant, j=args.j, seed=seed,
                                   m=args.m, kendall_n=args.kendall_n)
    out = _out_dir(args)
    write_records(_records_from_arrays(batch.h, batch.k_left, batch.k_right,
                                       batch.v, batch.u, batch.ranks),
                  out / "records.csv")
    outputs = ["records.csv"]
    _write_hist(batch.u, args.bins, out, "hist", outputs)
    if batch.ranks is not None:
        _write_hist(batch.ranks, None, out, "rank_hist", outputs, ranks_m=batch.m)
    _finish(args, seed, out, outputs, argv, batch.j)
    return 0


def _cmd_render(args):
    head = ""
    with open(args.inp, encoding="utf-8") as fh:
        head = fh.readline().strip()
    if head.startswith("{"):
        doc = json.loads(Path(args.inp).read_text(encoding="utf-8"))
        if "counts" in doc:
            obj = read_histogram(args.inp)
        elif "w" in doc:
            obj = read_curve(args.inp)
        else:
            raise ArchiveError("unrecognized result file", 1)
    elif head == "bin_lo,bin_hi,count":
        obj = read_histogram(args.inp)
    elif head == "w,lhs,rhs":
        obj = read_curve(args.inp)
    else:
        raise ArchiveError("unrecognized result file", 1)
    render_svg(obj, args.out)
    print(f"coppit render: {args.inp} -> {args.out}", file=sys.stderr)
    return 0


def main(argv=None):
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "cone", None) is not None:
            _check_cone_syntax(args.cone)
        seed = _resolve_seed(args) if args.command != "render" else None
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return 0 if exc.code is None else int(exc.code)

    try:
        if args.command == "coppit":
            return _cmd_coppit(args, seed, argv)
        if args.command == "pit":
            return _cmd_pit(args, seed, argv)
        if args.command == "rank-hist":
            return _cmd_rank_hist(args, seed, argv)
        if args.command == "clical":
            return _cmd_clical(args, seed, argv)
        if args.command == "simulate":
            handler = {"bivariate": _cmd_simulate_bivariate,
                       "highdim": _cmd_simulate_highdim,
                       "demo-emos": _cmd_simulate_demo}[args.study]
            return handler(args, seed, argv)
        if args.command == "render":
            return _cmd_render(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (ArchiveError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
