#!/usr/bin/env python3
# Copyright 2026 The steplearn Authors
# SPDX-License-Identifier: Apache-2.0
"""Samples a fixture and reports how often load shedding occurs.

Runs `steplearn sample` on an experiment config and compares the share of
rows with shedding to a target band (5-20% by default). Exits nonzero when
the share falls outside the band.
"""
import argparse
import json
import pathlib
import subprocess
import sys
import tempfile


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", type=pathlib.Path)
    ap.add_argument("--binary", default="build/tools/steplearn")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--low", type=float, default=0.05)
    ap.add_argument("--high", type=float, default=0.20)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        cmd = [args.binary, "sample", "-c", str(args.config), "--out", tmp,
               "-j", str(args.jobs)]
        if args.seed is not None:
            cmd += ["--seed", str(args.seed)]
        subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)
        summary = json.loads((pathlib.Path(tmp) / "sample_summary.json").read_text())

    frac = summary["shed_fraction"]
    ok = args.low <= frac <= args.high
    print(f"rows {summary['rows']}, shed rows {summary['shed_rows']}, "
          f"shed fraction {frac:.3f} (target {args.low:.2f}-{args.high:.2f}): "
          f"{'ok' if ok else 'out of band'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
