"""Command-line entry point: ``multisine-wpt`` (or ``python -m multisine_wpt``)."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .channel import MultipathChannel, frequency_response
from .experiments import (DEFAULT_POWERS, DEFAULT_TONES, POWER_COLUMNS, RIPPLE_COLUMNS,
                          TONE_COLUMNS,
                          ExperimentConfig, SweepConfig, fast_profile, report_waveform,
                          rows_to_csv, run_power_sweep, run_ripple_check, run_tone_sweep,
                          write_text)
from .optimize import METHODS, design
from .rectenna import harvested_power


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # shared by the top-level parser and every subcommand, so the flags may be
    # given before or after the subcommand name
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="experiment config JSON")
    parser.add_argument("--seed", type=int, default=d, help="channel seed")
    parser.add_argument("--channel", default=d, help="fixed channel JSON (overrides --seed)")
    parser.add_argument("--out", default=d, help="output directory")
    parser.add_argument("--fast", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="20 kHz carrier / 2 kHz band profile")
    parser.add_argument("--workers", type=int, default=d, help="parallel sweep workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multisine-wpt",
        description="Multisine waveform design for RF wireless power transfer.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grid", parents=[common], help="print the tone grid")
    p.add_argument("--n-tones", type=int)

    p = sub.add_parser("channel", parents=[common], help="generate a channel or its response")
    p.add_argument("action", choices=["gen", "response"])
    p.add_argument("--n-tones", type=int)

    p = sub.add_parser("optimize", parents=[common], help="design one waveform")
    p.add_argument("method", choices=METHODS)
    p.add_argument("--p-t", type=float, help="transmit power in W")
    p.add_argument("--n-tones", type=int)

    p = sub.add_parser("sweep", parents=[common], help="power or tone-count sweep")
    p.add_argument("variable", choices=["power", "tones"])
    p.add_argument("--values", type=float, nargs="+")

    p = sub.add_parser("waveform", parents=[common], help="amplitude and x(t) report")
    p.add_argument("--method", choices=METHODS, nargs="+")

    p = sub.add_parser("ripple", parents=[common], help="transient ripple check")
    p.add_argument("--multipliers", type=float, nargs="+", help="values of C*R_L/T")
    return parser


def load_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_json(fh.read())
    else:
        cfg = ExperimentConfig()
    if args.fast:
        cfg = fast_profile(cfg)
    if args.channel:
        with open(args.channel) as fh:
            taps = MultipathChannel.from_json(fh.read()).to_dict()["taps"]
        cfg = replace(cfg, channel=replace(cfg.channel, taps=taps))
    elif args.seed is not None:
        cfg = replace(cfg, channel=replace(cfg.channel, seed=args.seed))
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    if args.workers:
        cfg = replace(cfg, workers=args.workers)
    n = getattr(args, "n_tones", None)
    if n:
        cfg = replace(cfg, system=replace(cfg.system, n_tones=n))
    return cfg


def _out(cfg, name):
    return os.path.join(cfg.output_dir, name)


def run(args) -> int:
    cfg = load_config(args)
    if args.command == "grid":
        g = cfg.grid()
        print(json.dumps({"f_min": g.f_min, "f_max": g.f_max, "n_tones": g.n_tones,
                          "delta_f": g.delta_f, "f0": g.f0, "period_s": g.period}))
        for n, f in enumerate(g.frequencies, 1):
            print(f"{n}\t{f:.17g}")
    elif args.command == "channel":
        mc = cfg.channel.build()
        if args.action == "gen":
            write_text(_out(cfg, "channel.json"), mc.to_json())
            print(_out(cfg, "channel.json"))
        else:
            resp = frequency_response(mc, cfg.grid())
            write_text(_out(cfg, "response.csv"), resp.to_csv())
            print(_out(cfg, "response.csv"))
    elif args.command == "optimize":
        p_t = cfg.p_t_w if args.p_t is None else args.p_t
        resp = frequency_response(cfg.channel.build(), cfg.grid())
        w, trace = design(args.method, resp, cfg.rectenna, p_t, cfg.scp)
        op = harvested_power(w, resp, cfg.rectenna)
        write_text(_out(cfg, f"waveform_{args.method}.json"), w.to_json())
        if trace is not None:
            write_text(_out(cfg, "scp_trace.json"), trace.to_json())
            write_text(_out(cfg, "scp_trace.csv"), trace.to_csv())
        print(json.dumps({"method": args.method, "p_t_w": p_t, **op.as_dict(),
                          "iterations": trace.n_steps if trace else 0,
                          "converged": trace.converged if trace else True}, default=float))
    elif args.command == "sweep":
        if args.variable == "power":
            if args.values:
                values = list(args.values)
            elif cfg.sweep.variable == "p_t":
                values = list(cfg.sweep.values)
            else:
                values = list(DEFAULT_POWERS)
            c = replace(cfg, sweep=SweepConfig("p_t", list(values)))
            rows = run_power_sweep(c, _out(cfg, "sweep_power.csv"))
            sys.stdout.write(rows_to_csv(rows, POWER_COLUMNS))
        else:
            if args.values:
                values = [int(v) for v in args.values]
            elif cfg.sweep.variable == "n_tones":
                values = [int(v) for v in cfg.sweep.values]
            else:
                values = list(DEFAULT_TONES)
            c = replace(cfg, sweep=SweepConfig("n_tones", values))
            rows = run_tone_sweep(c, _out(cfg, "sweep_tones.csv"))
            sys.stdout.write(rows_to_csv(rows, TONE_COLUMNS))
    elif args.command == "waveform":
        for method in args.method or list(cfg.methods):
            rep = report_waveform(cfg, method, cfg.output_dir)
            papr = "" if rep.papr is None else f"{rep.papr:.17g}"
            print(f"{method}\tpapr={papr}\t{rep.error}".rstrip())
    elif args.command == "ripple":
        rows = run_ripple_check(cfg, args.multipliers, _out(cfg, "ripple.csv"))
        sys.stdout.write(rows_to_csv(rows, RIPPLE_COLUMNS))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (ValueError, ArithmeticError, RuntimeError, OSError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
