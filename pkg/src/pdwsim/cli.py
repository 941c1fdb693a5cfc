"""Command-line entry point: generate / stats / window / evaluate / baseline / catalogue."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .core import Seed
from .dataset_io import (
    FixedCount,
    FixedDuration,
    FormatError,
    compute_stats,
    export_histograms_csv,
    read_train,
    window,
    write_sidecar,
    write_train,
)
from .emitters import sample_catalogue
from .metrics import baseline_deinterleave, score_dataset
from .propagation import NoiseModel
from .scenario import ScenarioConfig, generate_dataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


NOISE_KEYS = {f.name for f in dataclasses.fields(NoiseModel)}
CONFIG_KEYS = {f.name for f in dataclasses.fields(ScenarioConfig)} - {"noise"}


def load_config(path) -> dict:
    """Parse a `key = value` per line config file into override kwargs."""
    overrides = {}
    noise = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in NOISE_KEYS:
            noise[key] = float(value)
        elif key == "trains_per_split":
            overrides[key] = tuple(int(v) for v in value.split(","))
        elif key == "mode":
            overrides[key] = value
        elif key in CONFIG_KEYS:
            field = next(f for f in dataclasses.fields(ScenarioConfig) if f.name == key)
            overrides[key] = int(value) if field.type == "int" else float(value)
        else:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    if noise:
        overrides["noise"] = NoiseModel(**noise)
    return overrides


def _build_config(args) -> ScenarioConfig:
    overrides = load_config(args.config) if args.config else {}
    if args.mode:
        overrides["mode"] = args.mode
    if args.splits:
        overrides["trains_per_split"] = tuple(int(v) for v in args.splits.split(","))
    elif args.trains is not None:
        overrides["trains_per_split"] = (args.trains, 0, 0)
    return ScenarioConfig(**overrides)


def _print_config(config: ScenarioConfig, seed: int) -> None:
    print(f"master_seed = {seed}")
    for f in dataclasses.fields(ScenarioConfig):
        print(f"{f.name} = {getattr(config, f.name)}")


def _window_policy(args):
    if args.count is not None:
        return FixedCount(args.count)
    return FixedDuration(args.duration)


def cmd_generate(args) -> int:
    config = _build_config(args)
    _print_config(config, args.seed)
    manifest = generate_dataset(config, args.seed, args.out, threads=args.threads)
    total = sum(r["num_pulses"] for recs in manifest["splits"].values() for r in recs)
    n_trains = sum(len(recs) for recs in manifest["splits"].values())
    print(f"generated {n_trains} trains, {total} pulses -> {args.out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    report = compute_stats(args.input)
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.csv:
        export_histograms_csv(args.input, args.csv)
        print(f"histograms -> {args.csv}")
    return EXIT_OK


def cmd_window(args) -> int:
    train = read_train(args.input)
    policy = _window_policy(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    windows = window(train, policy)
    for win, idx in windows:
        path = out_dir / f"{stem}_w{idx:05d}.bin"
        write_train(win, path)
        if win.meta:
            write_sidecar(win, path)
    print(f"wrote {len(windows)} windows -> {out_dir}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    policy = _window_policy(args)
    report = score_dataset(args.truth, args.pred, policy)
    median = report.per_train_median() if args.per_train_median else report.median_v
    if median is None:
        print("no score: dataset has zero non-empty windows")
    else:
        print(f"median_v = {median:.6f}")
    print(f"num_windows = {report.num_windows}")
    if args.report:
        scores_path = str(args.report) + ".windows.csv"
        with open(scores_path, "w", newline="\n") as fh:
            fh.write("file,window,v\n")
            for f, w, v in report.per_window:
                fh.write(f"{f},{w},{v!r}\n")
        with open(args.report, "w") as fh:
            fh.write(f"median_v = {'' if median is None else repr(median)}\n")
            fh.write(f"num_windows = {report.num_windows}\n")
            fh.write(f"per_window_scores = {scores_path}\n")
    return EXIT_OK


def cmd_baseline(args) -> int:
    train = read_train(args.input)
    labels = baseline_deinterleave(train)
    pred = dataclasses.replace(train, labels=labels)
    write_train(pred, args.out)
    if train.meta:
        write_sidecar(pred, args.out)
    print(f"baseline predictions ({len(np.unique(labels)) if len(labels) else 0} "
          f"clusters) -> {args.out}")
    return EXIT_OK


def cmd_catalogue(args) -> int:
    catalogue = sample_catalogue(Seed(args.seed))
    lines = [f"# transmitter catalogue, seed = {args.seed}"]
    for t in catalogue:
        lines.append(f"[type {t.type_id}]")
        for f in dataclasses.fields(t):
            if f.name != "type_id":
                lines.append(f"{f.name} = {getattr(t, f.name)}")
        lines.append("")
    Path(args.out).write_text("\n".join(lines))
    print(f"catalogue of {len(catalogue)} types -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdwsim",
                     description="Synthetic interleaved radar pulse train toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a dataset")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["stare", "scan"])
    p.add_argument("--trains", type=int)
    p.add_argument("--splits", help="train,val,test counts, e.g. 50,5,5")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--csv", help="also write histogram CSV here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("window", help="split one train into window files")
    p.add_argument("--in", dest="input", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--count", type=int)
    g.add_argument("--duration", type=float, help="window span in us")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("evaluate", help="score predictions against truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--count", type=int)
    g.add_argument("--duration", type=float)
    p.add_argument("--per-train-median", action="store_true")
    p.add_argument("--report", help="write key = value score report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="run the grid-cell baseline deinterleaver")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("catalogue", help="export the transmitter catalogue")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_catalogue)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (FormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
