#!/usr/bin/env python3
"""Writes the shipped scenario files.

Node names and topology are fixed; metric dimensions, obstacles and
controller weights are chosen by hand.

    python3 tools/make_scenarios.py [outdir]
"""
import json
import math
import sys
from pathlib import Path

DEFAULT_MPC = {
    "q_state": [10.0, 10.0, 0.5],
    "q_action": [1.0, 0.05],
    "q_rate": [0.5, 0.05],
    "q_fleet": 1000.0,
    "u_min": [0.0, -2.0],
    "u_max": [10.0, 2.0],
    "du_min": [-3.0, -6.0],
    "du_max": [1.5, 6.0],
    "obstacle_weight": 1e4,
    "obstacle_inflation": 0.5,
    "tolerance": 1e-6,
    "max_iterations": 40,
}


def box(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def both_ways(a, b, length, capacity):
    return [
        {"from": a, "to": b, "length": length, "capacity": capacity},
        {"from": b, "to": a, "length": length, "capacity": capacity},
    ]


def small_grid():
    """4x4 grid, 10 m blocks, one depot per corner."""
    def name(r, c):
        return f"N{r}{c}"

    def pos(r, c):
        return (c - 1) * 10.0, (3 - r) * 10.0

    corners = {name(0, 1), name(0, 4), name(3, 1), name(3, 4)}
    nodes = []
    for r in range(4):
        for c in range(1, 5):
            x, y = pos(r, c)
            kind = "depot" if name(r, c) in corners else "task-location"
            nodes.append({"id": name(r, c), "x": x, "y": y, "kind": kind})

    # Rows 1 and 2 are two-lane (wide); everything else is a single lane.
    wide_rows = {1, 2}
    edges = []
    for r in range(4):
        for c in range(1, 4):
            cap = "wide" if r in wide_rows else "narrow"
            edges += both_ways(name(r, c), name(r, c + 1), 10.0, cap)
    for r in range(3):
        for c in range(1, 5):
            edges += both_ways(name(r, c), name(r + 1, c), 10.0, "narrow")

    # Half-widths of the roads bordering each block.
    def half_width_row(r):
        return 2.0 if r in wide_rows else 1.0

    obstacles = []
    for r in range(3):          # block between rows r and r+1
        for c in range(1, 4):   # block between columns c and c+1
            x0, y_top = pos(r, c)
            x1, y_bot = pos(r + 1, c + 1)
            obstacles.append(box(x0 + 1.0, y_bot + half_width_row(r + 1),
                                 x1 - 1.0, y_top - half_width_row(r)))

    # Robot at N04 serves N23, N21, N24 in this order; the other three robots
    # get the same pattern rotated by quarter turns.
    plans = [
        ("A1", "N01", (-1.0, 31.0), ["N13", "N33", "N03"]),
        ("A2", "N31", (-1.0, -1.0), ["N12", "N14", "N11"]),
        ("A3", "N34", (31.0, -1.0), ["N22", "N02", "N32"]),
        ("A4", "N04", (31.0, 31.0), ["N23", "N21", "N24"]),
    ]
    tasks, vehicles = [], []
    for vid, depot, parking, stops in plans:
        prev = None
        for i, node in enumerate(stops):
            tid = f"{vid}-{i + 1}-{node}"
            task = {"id": tid, "node": node, "capability": vid}
            if prev:
                task["predecessors"] = [prev]
            tasks.append(task)
            prev = tid
        vehicles.append({
            "id": vid, "depot": depot, "nominal_speed": 1.0, "max_speed": 1.5,
            "range": 1000.0, "capabilities": [vid], "footprint_radius": 0.3,
            "parking": list(parking),
        })

    return {
        "name": "small-grid",
        "note": "16-node grid with four corner depots; metric dimensions are a reconstruction",
        "nodes": nodes,
        "edges": edges,
        "tasks": tasks,
        "vehicles": vehicles,
        "obstacles": obstacles,
        "params": {"T": 600.0, "mu": 20.0, "dt": 0.1, "N": 20, "d_fleet": 1.0, "mpc": DEFAULT_MPC},
    }


def large_plant():
    """Production hall: shelf aisles above and below a central assembly line."""
    xs = [8.0 * i for i in range(11)]
    rows_top = [40.0, 32.0, 24.0, 16.0]
    rows_bottom = [-16.0, -24.0, -32.0]
    wide_rows = {40.0, 16.0, -16.0}

    nodes = {}
    order = []

    def add(nid, x, y, kind="intersection"):
        nodes[nid] = {"id": nid, "x": x, "y": y, "kind": kind}
        order.append(nid)

    def grid(r, c):
        return f"R{r}C{c:02d}"

    all_rows = rows_top + rows_bottom
    for r, y in enumerate(all_rows):
        for c, x in enumerate(xs):
            add(grid(r, c), x, y)
    add("W", 0.0, 0.0)
    add("E", 80.0, 0.0)
    stations = [(16.0, "S1"), (32.0, "S2"), (48.0, "S3"), (64.0, "S4")]
    for x, sid in stations:
        add(sid, x, 10.0, "task-location")
    depot_cols = list(range(10))
    for i, c in enumerate(depot_cols):
        add(f"D{i:02d}", xs[c], 46.0, "depot")

    undirected = []  # (a, b, capacity)
    for r, y in enumerate(all_rows):
        for c in range(10):
            undirected.append((grid(r, c), grid(r, c + 1), "wide" if y in wide_rows else "narrow"))
    for r in range(3):
        for c in range(11):
            undirected.append((grid(r, c), grid(r + 1, c), "narrow"))
    for r in range(4, 6):
        for c in range(11):
            undirected.append((grid(r, c), grid(r + 1, c), "narrow"))
    undirected += [(grid(3, 0), "W", "wide"), ("W", grid(4, 0), "wide"),
                   (grid(3, 10), "E", "wide"), ("E", grid(4, 10), "wide")]
    for x, sid in stations:
        undirected.append((grid(3, xs.index(x)), sid, "narrow"))
    for i, c in enumerate(depot_cols):
        undirected.append((f"D{i:02d}", grid(0, c), "narrow"))

    # Shelf blocks replace ten vertical links in the middle band.
    removed = {(grid(1, c), grid(2, c)) for c in (1, 2, 3, 4, 6, 7, 8, 9)}
    removed |= {(grid(4, c), grid(5, c)) for c in (3, 7)}
    undirected = [e for e in undirected if (e[0], e[1]) not in removed]

    # Pick-up points halfway along thirteen aisle segments.
    split = [(grid(2, c), grid(2, c + 1)) for c in (0, 2, 4, 6, 8)]
    split += [(grid(5, c), grid(5, c + 1)) for c in (0, 2, 4, 6, 8)]
    split += [(grid(6, c), grid(6, c + 1)) for c in (1, 5, 9)]
    pick_ids = []
    new_edges = []
    for a, b, cap in undirected:
        if (a, b) in split:
            mid = f"P{len(pick_ids):02d}"
            pick_ids.append(mid)
            add(mid, (nodes[a]["x"] + nodes[b]["x"]) / 2, (nodes[a]["y"] + nodes[b]["y"]) / 2, "task-location")
            new_edges += [(a, mid, cap), (mid, b, cap)]
        else:
            new_edges.append((a, b, cap))
    undirected = new_edges

    edges = []
    for a, b, cap in undirected:
        pa, pb = nodes[a], nodes[b]
        length = round(math.hypot(pa["x"] - pb["x"], pa["y"] - pb["y"]), 6)
        edges += both_ways(a, b, length, cap)

    # Obstacles: the assembly line and the shelf blocks between aisles.
    obstacles = [box(4.0, -8.0, 76.0, 8.0)]
    for c in range(10):
        x0, x1 = xs[c] + 1.0, xs[c + 1] - 1.0
        obstacles.append(box(x0, 33.0, x1, 38.0))
    # Blocks merge where a vertical link was removed.
    band = list(range(11))
    kept = [c for c in band if (grid(1, c), grid(2, c)) not in removed]
    for left, right in zip(kept, kept[1:]):
        obstacles.append(box(xs[left] + 1.0, 25.0, xs[right] - 1.0, 31.0))
    for c in range(10):
        obstacles.append(box(xs[c] + 1.0, 18.0, xs[c + 1] - 1.0, 23.0))
    kept_low = [c for c in band if (grid(4, c), grid(5, c)) not in removed]
    for left, right in zip(kept_low, kept_low[1:]):
        obstacles.append(box(xs[left] + 1.0, -23.0, xs[right] - 1.0, -18.0))
    for c in range(10):
        x0, x1 = xs[c] + 1.0, xs[c + 1] - 1.0
        obstacles.append(box(x0, -31.0, x1, -25.0))
    # Ten robots: each picks up at a shelf point or station, then delivers.
    pickups = pick_ids[:10]
    deliveries = ["S1", "S2", "S3", "S4", grid(6, 0), grid(6, 10), grid(0, 10), grid(4, 5), grid(1, 5), grid(1, 10)]
    tasks, vehicles = [], []
    for i in range(10):
        vid = f"R{i:02d}"
        p = {"id": f"{vid}-pick", "node": pickups[(3 * i) % 10], "capability": vid}
        d = {"id": f"{vid}-drop", "node": deliveries[i], "capability": vid, "predecessors": [p["id"]]}
        tasks += [p, d]
        depot = f"D{i:02d}"
        vehicles.append({
            "id": vid, "depot": depot, "nominal_speed": 1.0, "max_speed": 1.5, "range": 2000.0,
            "capabilities": [vid], "footprint_radius": 0.3,
            "parking": [nodes[depot]["x"], 47.5],
        })

    # Nodes in a stable order: grid, connectors, stations, pick points, depots.
    node_list = [nodes[n] for n in order]
    return {
        "name": "large-plant",
        "note": "106-node production hall; layout and dimensions are a reconstruction",
        "nodes": node_list,
        "edges": edges,
        "tasks": tasks,
        "vehicles": vehicles,
        "obstacles": obstacles,
        "params": {"T": 1200.0, "mu": 20.0, "dt": 0.1, "N": 20, "d_fleet": 1.0, "mpc": DEFAULT_MPC},
    }


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "scenarios"
    out.mkdir(parents=True, exist_ok=True)
    for name, doc in (("small_grid.json", small_grid()), ("large_plant.json", large_plant())):
        (out / name).write_text(json.dumps(doc, indent=1) + "\n")
        print(f"{name}: {len(doc['nodes'])} nodes, {len(doc['edges'])} edges, "
              f"{len(doc['vehicles'])} vehicles, {len(doc['tasks'])} tasks")


if __name__ == "__main__":
    main()
