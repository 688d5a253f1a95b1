#!/usr/bin/env python3
"""Regenerates the bundled example scenarios.

The fixtures are synthetic but deterministic: rerunning this script must
reproduce the committed files byte for byte. Each scenario directory gets a
nodes.csv, a trips.csv and one or more .cfg files.
"""

import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(str(v) for v in row) + "\n")


def jitter(rng, xy, spread):
    return (round(xy[0] + rng.uniform(-spread, spread), 1),
            round(xy[1] + rng.uniform(-spread, spread), 1))


def make_tiny3():
    out = ROOT / "tiny3"
    nodes = [(0, 0, 0, "depot"), (1, 5000, 0, "east"), (2, 0, 5000, "north")]
    write_csv(out / "nodes.csv", ["id", "x", "y", "label"], nodes)

    # hand-placed trips, one per early step, plus a walk row and an
    # intra-node row that ingestion must drop
    trips = [
        (10, 5, 4990, 3, 0, "car"),
        (5002, 10, 8, 4, 400, "car"),
        (3, 9, 12, 4985, 800, "car"),
        (8, 4996, 4991, 12, 1300, "car"),
        (2, 3, 4, 5, 500, "walk"),
        (4999, 2, 5001, 7, 900, "car"),
    ]
    write_csv(out / "trips.csv",
              ["origin_x", "origin_y", "dest_x", "dest_y", "departure_seconds", "mode"],
              trips)

    base = """[network]
nodes_file = nodes.csv
speed_kmh = 60

[params]
prediction_steps = 4
schedule_steps = 6
fleet_size = 2

[demand]
mode = replay
trips_file = trips.csv

[fleet]
placement = explicit
positions = 0,1
"""
    (out / "scenario.cfg").write_text(base)
    (out / "scenario_outage.cfg").write_text(base + """
[outage]
events = 2:2:5
q_demand = 0.008
q_backup = 0.0
""")


def make_midscale8():
    out = ROOT / "midscale8"
    coords = [(0, 0), (7000, 0), (14000, 0), (0, 7000), (7000, 7000),
              (14000, 7000), (3500, 14000), (10500, 14000)]
    nodes = [(i, x, y, f"zone{i}") for i, (x, y) in enumerate(coords)]
    write_csv(out / "nodes.csv", ["id", "x", "y", "label"], nodes)

    # about a hundred replayed passengers across a 12 hour horizon, with a
    # morning surge and zone 4 as the dominant origin
    rng = random.Random(7)
    origin_w = [10, 10, 10, 10, 36, 10, 4, 10]
    dest_w = [12, 12, 12, 12, 20, 12, 8, 12]
    trips = []
    for _ in range(100):
        o = rng.choices(range(8), weights=origin_w)[0]
        d = o
        while d == o:
            d = rng.choices(range(8), weights=dest_w)[0]
        step = rng.randint(10, 60) if rng.random() < 0.6 else rng.randint(0, 119)
        dep = step * 360 + rng.randint(0, 359)
        ox, oy = jitter(rng, coords[o], 800)
        dx, dy = jitter(rng, coords[d], 800)
        trips.append((ox, oy, dx, dy, dep, "car"))
    for _ in range(5):
        o = rng.randrange(8)
        ox, oy = jitter(rng, coords[o], 300)
        dx, dy = jitter(rng, coords[o], 300)
        trips.append((ox, oy, dx, dy, rng.randint(0, 43199), "walk"))
    trips.sort(key=lambda t: t[4])
    write_csv(out / "trips.csv",
              ["origin_x", "origin_y", "dest_x", "dest_y", "departure_seconds", "mode"],
              trips)

    base = """[network]
nodes_file = nodes.csv
speed_kmh = 60

[params]
prediction_steps = 10
schedule_steps = 120
fleet_size = 10

[demand]
mode = replay
trips_file = trips.csv

[fleet]
placement = demand_weighted
"""
    (out / "scenario_normal.cfg").write_text(base)
    # the net shortfall of 0.054 SOC/step pins six of the ten vehicles as
    # dischargers, so the outage visibly competes with passenger service
    (out / "scenario.cfg").write_text(base + """
[outage]
events = 4:60:70
q_demand = 0.074
q_backup = 0.02
""")


def make_idf25():
    out = ROOT / "idf25"
    coords = [(0, 0)]
    for k in range(8):
        a = math.radians(45 * k)
        coords.append((round(9000 * math.cos(a), 1), round(9000 * math.sin(a), 1)))
    for k in range(12):
        a = math.radians(30 * k + 15)
        coords.append((round(19000 * math.cos(a), 1), round(19000 * math.sin(a), 1)))
    for deg in (20, 110, 200, 290):
        a = math.radians(deg)
        coords.append((round(26000 * math.cos(a), 1), round(26000 * math.sin(a), 1)))
    nodes = [(i, x, y, f"commune{i}") for i, (x, y) in enumerate(coords)]
    write_csv(out / "nodes.csv", ["id", "x", "y", "label"], nodes)

    # a day of commuting texture for the rate estimator: suburbs into the
    # center in the morning, back out in the evening, light noise otherwise
    rng = random.Random(25)
    center = [0]
    inner = list(range(1, 9))
    outer = list(range(9, 25))
    trips = []
    for _ in range(1500):
        u = rng.random()
        if u < 0.45:
            dep = rng.randint(21600, 35999)
            o = rng.choice(outer if rng.random() < 0.7 else inner)
            d = 0 if rng.random() < 0.5 else rng.choice(inner)
        elif u < 0.80:
            dep = rng.randint(57600, 71999)
            o = 0 if rng.random() < 0.5 else rng.choice(inner)
            d = rng.choice(outer if rng.random() < 0.7 else inner)
        else:
            dep = rng.randint(0, 86399)
            o = rng.choice(center + inner + outer)
            d = rng.choice(center + inner + outer)
        if o == d:
            continue
        ox, oy = jitter(rng, coords[o], 1500)
        dx, dy = jitter(rng, coords[d], 1500)
        trips.append((ox, oy, dx, dy, dep, "car"))
    trips.sort(key=lambda t: t[4])
    write_csv(out / "trips.csv",
              ["origin_x", "origin_y", "dest_x", "dest_y", "departure_seconds", "mode"],
              trips)

    base = """[network]
nodes_file = nodes.csv
speed_kmh = 60

[params]
prediction_steps = 10
schedule_steps = 240
fleet_size = 30
price_eur_kwh = 0.1292
cycling_cost_eur_kwh = 0.07974

[demand]
mode = sample
trips_file = trips.csv
bucket_minutes = 30
passenger_target = 292

[fleet]
placement = uniform
"""
    (out / "scenario_normal.cfg").write_text(base)
    (out / "scenario.cfg").write_text(base + """
[outage]
events = 1:175:185
q_demand = 3.678
q_backup = 3.5294
""")


if __name__ == "__main__":
    make_tiny3()
    make_midscale8()
    make_idf25()
    print("fixtures written under", ROOT)
