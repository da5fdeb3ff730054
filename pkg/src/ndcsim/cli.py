"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 no coincidence peak,
4 fit failure, 5 transport error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import presets, tagio
from .analyze import evaluate_wasak, fit_gaussian, fit_report_text, wasak_report_text
from .config import parse_config
from .correlate import read_histogram_csv, write_histogram_csv
from .errors import ConfigError, FitError, NoPeakError, ParameterError, TransportError
from .pipeline import measure_peak, run_simulation
from .reproduce import reproduce

EXIT_CONFIG = 2
EXIT_NO_PEAK = 3
EXIT_FIT_FAILED = 4
EXIT_TRANSPORT = 5


def _write_manifest(path, cfg, seed, extra):
    manifest = {"seed": seed, "config": cfg.manifest(), **extra}
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    a, b = run_simulation(cfg, args.seed)
    path_a = f"{args.out}_a.tags"
    path_b = f"{args.out}_b.tags"
    tagio.write_tags(a, path_a)
    tagio.write_tags(b, path_b)
    _write_manifest(
        f"{args.out}_manifest.json", cfg, args.seed,
        {"files": {"a": path_a, "b": path_b}, "tags": {"a": len(a), "b": len(b)}},
    )
    print(f"wrote {path_a} ({len(a)} tags), {path_b} ({len(b)} tags)")
    return 0


def _measure_files(args):
    a = tagio.read_tags(args.stream_a)
    b = tagio.read_tags(args.stream_b)
    return measure_peak(
        a, b,
        bin_width_ps=args.bin_ps,
        window_ps=args.window_ps,
        coarse_bin_ns=args.coarse_bin_ns,
        search_span_ms=args.search_span_ms,
    )


def cmd_correlate(args) -> int:
    meas = _measure_files(args)
    print(f"recovered_offset_fs = {meas.offset_fs}")
    print(fit_report_text(meas.fit))
    if args.out:
        write_histogram_csv(meas.histogram, args.out, meas.g2)
        print(f"histogram -> {args.out}")
    return 0


def cmd_analyze(args) -> int:
    hist, _g2 = read_histogram_csv(args.histogram)
    print(fit_report_text(fit_gaussian(hist)))
    return 0


def cmd_wasak(args) -> int:
    before_a = tagio.read_tags(args.before_a)
    before_b = tagio.read_tags(args.before_b)
    after_a = tagio.read_tags(args.after_a)
    after_b = tagio.read_tags(args.after_b)
    before = measure_peak(before_a, before_b, args.bin_ps, args.window_ps)
    after = measure_peak(after_a, after_b, args.bin_ps, args.window_ps)
    result = evaluate_wasak(before.fit, after.fit, args.two_beta_l)
    print(wasak_report_text(result))
    return 0


def cmd_reproduce(args) -> int:
    report = reproduce(args.target, seed=args.seed, scale=args.scale)
    print(report.text())
    return 0 if report.passed else 1


def cmd_site(args) -> int:
    host, _, port = args.terminal.rpartition(":")
    stream = tagio.read_tags(args.tags)
    tagio.send_to_terminal(stream, (host or "127.0.0.1", int(port)), batch=args.batch)
    print(f"sent {len(stream)} tags from site {stream.site_id}")
    return 0


def cmd_terminal(args) -> int:
    terminal = tagio.Terminal(port=args.port)
    print(f"listening on port {terminal.port}", flush=True)
    streams = terminal.collect(n_sites=2)
    ids = sorted(streams)
    a, b = streams[ids[0]], streams[ids[1]]
    for suffix, stream in (("a", a), ("b", b)):
        tagio.write_tags(stream, f"{args.out}_{suffix}.tags")
    meas = measure_peak(a, b, args.bin_ps, args.window_ps)
    print(f"recovered_offset_fs = {meas.offset_fs}")
    print(fit_report_text(meas.fit))
    write_histogram_csv(meas.histogram, f"{args.out}_hist.csv", meas.g2)
    print(f"histogram -> {args.out}_hist.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ndcsim")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_binning(p):
        p.add_argument("--bin-ps", type=float, default=8.0, help="fine histogram bin width")
        p.add_argument("--window-ps", type=float, default=2000.0, help="half-width of the histogram window")
        p.add_argument("--coarse-bin-ns", type=float, default=1.0)
        p.add_argument("--search-span-ms", type=float, default=1.0)

    p = sub.add_parser("simulate", help="simulate two tag streams from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("correlate", help="correlate two tag files and fit the peak")
    p.add_argument("stream_a")
    p.add_argument("stream_b")
    add_binning(p)
    p.add_argument("--out", default=None, help="histogram CSV path")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("analyze", help="fit a Gaussian to a histogram CSV")
    p.add_argument("histogram")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("wasak", help="witness test from two pairs of tag files")
    p.add_argument("before_a")
    p.add_argument("before_b")
    p.add_argument("after_a")
    p.add_argument("after_b")
    p.add_argument("--two-beta-l", type=float, default=presets.wasak_two_beta_l_ps2(),
                   help="dispersion magnitude 2*beta*l in ps^2")
    add_binning(p)
    p.set_defaults(func=cmd_wasak)

    p = sub.add_parser("reproduce", help="run a headline-result preset end to end")
    p.add_argument("target", choices=sorted(presets.PRESET_NAMES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0, help="acquisition-time multiplier")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("site", help="send one tag file to a terminal")
    p.add_argument("--terminal", required=True, help="host:port")
    p.add_argument("--tags", required=True)
    p.add_argument("--batch", type=int, default=tagio.DEFAULT_BATCH)
    p.set_defaults(func=cmd_site)

    p = sub.add_parser("terminal", help="receive two site streams and correlate them")
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument("--bin-ps", type=float, default=8.0)
    p.add_argument("--window-ps", type=float, default=2000.0)
    p.set_defaults(func=cmd_terminal)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoPeakError as exc:
        print(f"no peak: {exc}", file=sys.stderr)
        return EXIT_NO_PEAK
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT_FAILED
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except ParameterError as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
