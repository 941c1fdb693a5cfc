#!/usr/bin/env python3
"""Print a compact per-train table plus field envelopes for a dataset.

Usage: python3 scripts/inspect_dataset.py DATASET_DIR
"""

import argparse

from pdwsim.dataset_io import compute_stats, list_split_files, read_sidecar, iter_chunks


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dataset_dir")
    args = ap.parse_args()

    for split, files in list_split_files(args.dataset_dir).items():
        print(f"\n== {split} ==")
        print(f"{'file':<28}{'pulses':>10}{'emitters':>10}  mode")
        for path in files:
            n = sum(len(c) for c in iter_chunks(path))
            meta = read_sidecar(path)
            print(f"{path.name:<28}{n:>10}{meta.get('num_emitters', '?'):>10}"
                  f"  {meta.get('mode', '?')}")

    stats = compute_stats(args.dataset_dir)["overall"]
    print(f"\noverall: {stats['total_pulses']} pulses in {stats['train_count']} trains")
    for name, f in stats["fields"].items():
        if f["count"]:
            print(f"  {name:<10} min={f['min']:<14.6g} max={f['max']:<14.6g} "
                  f"mean={f['mean']:.6g}")


if __name__ == "__main__":
    main()
