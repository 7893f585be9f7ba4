#!/usr/bin/env python3
# Copyright 2026 The steplearn Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the desk-scale IEEE 33-bus fixture (network and scenario trees).

Loads are the classic 33-bus active demands scaled by LOAD_SCALE. Feeder
ratings are generous except the 28-29 section, which bottlenecks the
29-33 pocket. Candidate line 35 (25-29) bypasses it; lines 33 and 34 tie
into a lateral with spare capacity. Region multipliers at two late-stage
nodes push the pocket into shedding unless line 35 is built, and
calibrate.py reports how often that happens in a sample.
"""
import argparse
import pathlib

import yaml

LOAD_KW = {2: 100, 3: 90, 4: 120, 5: 60, 6: 60, 7: 200, 8: 200, 9: 60, 10: 60,
           11: 45, 12: 60, 13: 60, 14: 120, 15: 60, 16: 60, 17: 60, 18: 90,
           19: 90, 20: 90, 21: 90, 22: 90, 23: 90, 24: 420, 25: 420, 26: 60,
           27: 60, 28: 60, 29: 120, 30: 200, 31: 150, 32: 210, 33: 60}
BRANCHES = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 9),
            (9, 10), (10, 11), (11, 12), (12, 13), (13, 14), (14, 15),
            (15, 16), (16, 17), (17, 18), (2, 19), (19, 20), (20, 21),
            (21, 22), (3, 23), (23, 24), (24, 25), (6, 26), (26, 27),
            (27, 28), (28, 29), (29, 30), (30, 31), (31, 32), (32, 33)]
CANDIDATES = [(33, 8, 21, 1.0), (34, 12, 22, 1.0), (35, 25, 29, 3.8)]
COST_PER_MW = 100_000.0
LOAD_SCALE = 2.5
POCKET = [29, 30, 31, 32, 33]
POCKET_FEED = 1.55

DEMAND = [0.70, 0.67, 0.66, 0.66, 0.67, 0.71, 0.78, 0.85, 0.90, 0.92, 0.93,
          0.93, 0.92, 0.91, 0.90, 0.90, 0.92, 0.96, 1.00, 0.99, 0.96, 0.90,
          0.82, 0.75]
WIND = [0.55, 0.58, 0.60, 0.62, 0.60, 0.57, 0.52, 0.46, 0.40, 0.35, 0.32,
        0.30, 0.30, 0.32, 0.35, 0.38, 0.42, 0.46, 0.50, 0.53, 0.55, 0.56,
        0.57, 0.56]
SOLAR = [0, 0, 0, 0, 0, 0.02, 0.12, 0.30, 0.50, 0.68, 0.82, 0.90, 0.90,
         0.84, 0.72, 0.55, 0.35, 0.15, 0.03, 0, 0, 0, 0, 0]

GENERATORS = [
    ("SUB", 1, "thermal", 12.0, 55.0),
    ("DG1", 18, "thermal", 1.5, 40.0),
    ("DG2", 30, "thermal", 0.8, 110.0),
    ("DG3", 22, "thermal", 1.2, 70.0),
    ("WT1", 25, "wind", 3.0, 0.0),
    ("WT2", 14, "wind", 1.5, 0.0),
    ("PV1", 7, "solar", 1.2, 0.0),
    ("PV2", 24, "solar", 0.8, 0.0),
]


def network(horizon):
    lines = []
    for i, (a, b) in enumerate(BRANCHES, start=1):
        cap = POCKET_FEED if (a, b) == (28, 29) else 30.0
        lines.append({"id": i, "from": a, "to": b, "capacity": cap})
    for lid, a, b, cap in CANDIDATES:
        lines.append({"id": lid, "from": a, "to": b, "capacity": cap,
                      "candidate": True, "cost_per_mw": COST_PER_MW})
    gens = [{"id": g, "bus": b, "kind": k, "capacity": c, "cost": m}
            for g, b, k, c, m in GENERATORS]
    loads = [{"id": f"D{b}", "bus": b,
              "peak": round(kw * LOAD_SCALE / 1000.0, 6)}
             for b, kw in LOAD_KW.items()]
    return {
        "name": "ieee33-desk",
        "horizon": horizon,
        "buses": list(range(1, 34)),
        "profiles": {"demand": DEMAND[:horizon], "wind": WIND[:horizon],
                     "solar": SOLAR[:horizon]},
        "lines": lines,
        "generators": gens,
        "loads": loads,
    }


def pocket(mult):
    return {f"D{b}": mult for b in POCKET}


def node(nid, parent, year, prob, growth, pocket_total=None, gens=None):
    n = {"id": nid, "parent": parent, "year": year, "probability": prob,
         "growth": growth}
    if pocket_total is not None:
        n["load_multipliers"] = pocket(round(pocket_total / growth, 6))
    if gens:
        n["generator_multipliers"] = gens
    return n


def tree7():
    return {
        "discount_rate": 0.06, "voll": 15000.0, "gamma": 0.00002,
        "nodes": [
            node(1, None, 0, 1.0, 1.0),
            node(2, 1, 5, 0.5, 1.03, 0.98, {"WT1": 1.1}),
            node(3, 1, 5, 0.5, 1.05, 1.0, {"PV1": 1.2}),
            node(4, 2, 10, 0.25, 1.04, 0.97, {"WT1": 1.2}),
            node(5, 2, 10, 0.25, 1.06, 1.0),
            node(6, 3, 10, 0.25, 1.08, 2.7, {"PV1": 1.4}),
            node(7, 3, 10, 0.25, 1.1, 2.9),
        ],
    }


def tree13():
    nodes = [node(1, None, 0, 1.0, 1.0)]
    stage1 = [(2, 0.3, 1.02, 0.97), (3, 0.4, 1.04, 1.0), (4, 0.3, 1.06, 1.0)]
    nid = 5
    for sid, p, g, pt in stage1:
        nodes.append(node(sid, 1, 5, p, g, pt))
    leaves = {2: [(0.3, 1.03, 0.96), (0.4, 1.05, 0.98), (0.3, 1.04, 1.0)],
              3: [(0.3, 1.06, 1.0), (0.4, 1.07, 0.99), (0.3, 1.08, 1.0)],
              4: [(0.3, 1.08, 2.6), (0.4, 1.09, 2.8), (0.3, 1.1, 2.95)]}
    for sid, p, _, _ in stage1:
        for share, g, pt in leaves[sid]:
            nodes.append(node(nid, sid, 10, round(p * share, 12), g, pt))
            nid += 1
    return {"discount_rate": 0.06, "voll": 15000.0, "gamma": 0.00002,
            "nodes": nodes}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "ieee33"))
    ap.add_argument("--horizon", type=int, default=24)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = "# Generated by scripts/make_ieee33.py; edit the script, not this file.\n"
    for name, doc in [("network.yaml", network(args.horizon)),
                      ("tree7.yaml", tree7()), ("tree13.yaml", tree13())]:
        with open(out / name, "w") as f:
            f.write(header)
            yaml.safe_dump(doc, f, sort_keys=False, default_flow_style=None, width=100)


if __name__ == "__main__":
    main()
