#!/usr/bin/env python3
# Copyright 2026 The steplearn Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the RTS 24-bus fixture (network and a 7-node scenario tree).

Topology, ratings, unit capacities and offer prices follow the updated
market version of the 24-bus Reliability Test System; the six wind farms
sit at buses 3, 5, 7, 16, 21 and 23. Loads are the published shares of
the system peak. Candidates 35-37 duplicate three northern corridors at
500 $/MW, a price set against one representative day of operation. Line
35 is rated 700 MW so that it covers the stressed load under perturbation;
the other two are rated 100 MW.

Bus 18 imports over 17-18 and 18-21 only, so a large new load there is the
one place where a single candidate (35) decides feasibility. One late node
connects such a load (--stress times the bus-18 peak) and doubles most
units outside the pocket, so the bus-18 import limit rather than system
adequacy decides feasibility. Every other node is feasible without
investment, so the exact model builds line 35 on that node's parent.
"""
import argparse
import pathlib

import yaml

# (from, to, MW)
BRANCHES = [(1, 2, 175), (1, 3, 175), (1, 5, 175), (2, 4, 175), (2, 6, 175),
            (3, 9, 175), (3, 24, 400), (4, 9, 175), (5, 10, 175), (6, 10, 175),
            (7, 8, 175), (8, 9, 175), (8, 10, 175), (9, 11, 400), (9, 12, 400),
            (10, 11, 400), (10, 12, 400), (11, 13, 500), (11, 14, 500),
            (12, 13, 500), (12, 23, 500), (13, 23, 500), (14, 16, 500),
            (15, 16, 500), (15, 21, 1000), (15, 24, 500), (16, 17, 500),
            (16, 19, 500), (17, 18, 500), (17, 22, 500), (18, 21, 1000),
            (19, 20, 1000), (20, 23, 1000), (21, 22, 500)]
CANDIDATES = [(35, 18, 21, 700.0), (36, 15, 22, 100.0), (37, 13, 23, 100.0)]
COST_PER_MW = 500.0

# id, bus, MW, $/MWh
THERMAL = [("G1", 1, 152, 13.32), ("G2", 2, 152, 13.32), ("G3", 7, 350, 20.7),
           ("G4", 13, 591, 20.93), ("G5", 15, 60, 26.11), ("G6", 15, 155, 10.52),
           ("G7", 16, 155, 10.52), ("G8", 18, 400, 6.02), ("G9", 21, 400, 5.47),
           ("G10", 22, 300, 0.0), ("G11", 23, 310, 10.52), ("G12", 23, 350, 10.89)]
WIND_BUSES = [3, 5, 7, 16, 21, 23]
WIND_MW = 200.0

# bus -> share of system peak (%)
LOAD_SHARE = {1: 3.8, 2: 3.4, 3: 6.3, 4: 2.6, 5: 2.5, 6: 4.8, 7: 4.4, 8: 6.0,
              9: 6.1, 10: 6.8, 13: 9.3, 14: 6.8, 15: 11.1, 16: 3.5, 18: 11.7,
              19: 6.4, 20: 4.5}
SYSTEM_PEAK = 2850.0

DEMAND = [0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96, 0.96,
          0.95, 0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96, 0.91, 0.83,
          0.73, 0.63]
WIND = [0.62, 0.65, 0.66, 0.68, 0.66, 0.63, 0.57, 0.50, 0.44, 0.40, 0.37,
        0.35, 0.34, 0.36, 0.40, 0.44, 0.48, 0.52, 0.55, 0.58, 0.60, 0.61,
        0.62, 0.62]
SOLAR = [0.0] * 24


def network(horizon):
    lines = [{"id": i, "from": a, "to": b, "capacity": float(c)}
             for i, (a, b, c) in enumerate(BRANCHES, start=1)]
    for lid, a, b, cap in CANDIDATES:
        lines.append({"id": lid, "from": a, "to": b, "capacity": cap,
                      "candidate": True, "cost_per_mw": COST_PER_MW})
    gens = [{"id": g, "bus": b, "kind": "thermal", "capacity": float(c), "cost": m}
            for g, b, c, m in THERMAL]
    gens += [{"id": f"W{i}", "bus": b, "kind": "wind", "capacity": WIND_MW, "cost": 0.0}
             for i, b in enumerate(WIND_BUSES, start=1)]
    loads = [{"id": f"D{b}", "bus": b, "peak": round(SYSTEM_PEAK * s / 100.0, 6)}
             for b, s in LOAD_SHARE.items()]
    return {
        "name": "rts24",
        "horizon": horizon,
        "buses": list(range(1, 25)),
        "profiles": {"demand": DEMAND[:horizon], "wind": WIND[:horizon],
                     "solar": SOLAR[:horizon]},
        "lines": lines,
        "generators": gens,
        "loads": loads,
    }


def node(nid, parent, year, prob, growth, loads=None, gens=None):
    n = {"id": nid, "parent": parent, "year": year, "probability": prob,
         "growth": growth}
    if loads:
        n["load_multipliers"] = loads
    if gens:
        n["generator_multipliers"] = gens
    return n


def tree7(stress):
    return {
        "discount_rate": 0.06, "voll": 15000.0, "gamma": 0.00002,
        "nodes": [
            node(1, None, 0, 1.0, 1.0),
            node(2, 1, 5, 0.5, 1.02, gens={"W4": 1.2}),
            node(3, 1, 5, 0.5, 1.04, gens={"W5": 1.3}),
            node(4, 2, 10, 0.25, 1.03),
            node(5, 2, 10, 0.25, 1.05, gens={"W1": 1.2}),
            node(6, 3, 10, 0.25, 1.06, loads={"D18": stress},
                 gens={"G3": 2.0, "G4": 2.0, "G9": 2.5, "G10": 2.5,
                       "G11": 2.0, "G12": 2.0, "W5": 1.5}),
            node(7, 3, 10, 0.25, 1.08, loads={"D18": 1.5}),
        ],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "rts24"))
    ap.add_argument("--horizon", type=int, default=24)
    ap.add_argument("--stress", type=float, default=5.6,
                    help="bus-18 load multiplier at the stressed late node")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = "# Generated by scripts/make_rts24.py; edit the script, not this file.\n"
    for name, doc in [("network.yaml", network(args.horizon)), ("tree7.yaml", tree7(args.stress))]:
        with open(out / name, "w") as f:
            f.write(header)
            yaml.safe_dump(doc, f, sort_keys=False, default_flow_style=None, width=100)


if __name__ == "__main__":
    main()
