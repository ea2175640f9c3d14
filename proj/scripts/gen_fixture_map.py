#!/usr/bin/env python3
"""Generates data/maps/fixture_map.json: a three-lane straight road, a 4-way
intersection and a T-junction, each in its own lane segment."""

import json
import math
import sys

WIDTH = 4.5
LIMIT = 13.9
ARM = 120.0          # approach / exit lane length
HALF_BOX = 21.5      # junction box half size
LANES_PER_DIR = 3


def line(p0, p1, n=2):
    return [[round(p0[0] + (p1[0] - p0[0]) * k / (n - 1), 6),
             round(p0[1] + (p1[1] - p0[1]) * k / (n - 1), 6)] for k in range(n)]


def bezier(p0, d0, p2, d2, n=17):
    # Control point: intersection of the entry ray and the exit ray.
    det = d0[0] * (-d2[1]) - d0[1] * (-d2[0])
    if abs(det) < 1e-9:
        return line(p0, p2, n)
    rx, ry = p2[0] - p0[0], p2[1] - p0[1]
    t = (rx * (-d2[1]) - ry * (-d2[0])) / det
    p1 = (p0[0] + d0[0] * t, p0[1] + d0[1] * t)
    pts = []
    for k in range(n):
        u = k / (n - 1)
        x = (1 - u) ** 2 * p0[0] + 2 * (1 - u) * u * p1[0] + u ** 2 * p2[0]
        y = (1 - u) ** 2 * p0[1] + 2 * (1 - u) * u * p1[1] + u ** 2 * p2[1]
        pts.append([round(x, 6), round(y, 6)])
    return pts


def lane(id_, pts, road_type, segment, left=None, right=None, succ=None, junction=False):
    return {"id": id_, "centerline": pts, "width": WIDTH, "speed_limit": LIMIT,
            "left_neighbor": left, "right_neighbor": right, "successors": succ or [],
            "road_type": road_type, "segment": segment, "junction": junction}


def straight_segment():
    lanes = []
    ys = {"1": -WIDTH, "2": 0.0, "3": WIDTH}
    for part, (x0, x1) in (("2", (0.0, 150.0)), ("3", (150.0, 300.0))):
        for k in ("1", "2", "3"):
            lid = f"lane_2{part}{k}"
            left = f"lane_2{part}{int(k) + 1}" if k != "3" else None
            right = f"lane_2{part}{int(k) - 1}" if k != "1" else None
            succ = [f"lane_23{k}"] if part == "2" else []
            lanes.append(lane(lid, line((x0, ys[k]), (x1, ys[k])), "straight", "seg_straight",
                              left, right, succ))
    return lanes


# Inbound travel direction of each arm (pointing into the junction).
ARM_DIRS = {"s": (0.0, 1.0), "e": (-1.0, 0.0), "n": (0.0, -1.0), "w": (1.0, 0.0)}


def right_of(u):
    return (u[1], -u[0])


def offset(k):
    # k = 0 is the rightmost lane in the direction of travel.
    return (LANES_PER_DIR - 1 - k) * WIDTH + WIDTH / 2.0


def junction_segment(prefix, center, arms, road_type, segment):
    cx, cy = center
    lanes = []
    inbound_end = {}
    outbound_start = {}
    for a in arms:
        u = ARM_DIRS[a]
        r = right_of(u)
        v = (-u[0], -u[1])  # outbound direction
        rv = right_of(v)
        for k in range(LANES_PER_DIR):
            o = offset(k)
            p_end = (cx - u[0] * HALF_BOX + r[0] * o, cy - u[1] * HALF_BOX + r[1] * o)
            p_start = (p_end[0] - u[0] * ARM, p_end[1] - u[1] * ARM)
            inbound_end[(a, k)] = (p_end, u)
            q_start = (cx - u[0] * HALF_BOX + rv[0] * o, cy - u[1] * HALF_BOX + rv[1] * o)
            q_end = (q_start[0] + v[0] * ARM, q_start[1] + v[1] * ARM)
            outbound_start[(a, k)] = (q_start, v)
            lanes.append(lane(f"{prefix}_{a}_in{k}", line(p_start, p_end), road_type, segment,
                              f"{prefix}_{a}_in{k + 1}" if k + 1 < LANES_PER_DIR else None,
                              f"{prefix}_{a}_in{k - 1}" if k > 0 else None))
            lanes.append(lane(f"{prefix}_{a}_out{k}", line(q_start, q_end), road_type, segment,
                              f"{prefix}_{a}_out{k + 1}" if k + 1 < LANES_PER_DIR else None,
                              f"{prefix}_{a}_out{k - 1}" if k > 0 else None))
    by_id = {l["id"]: l for l in lanes}

    def exit_arm(a, turn):
        u = ARM_DIRS[a]
        if turn == "straight":
            want = u
        elif turn == "right":
            want = right_of(u)
        else:
            want = (-right_of(u)[0], -right_of(u)[1])
        for b in arms:
            ub = ARM_DIRS[b]
            if (-ub[0], -ub[1]) == want:
                return b
        return None

    for a in arms:
        for k in range(LANES_PER_DIR):
            for turn in ("straight", "right", "left"):
                b = exit_arm(a, turn)
                if b is None or b == a:
                    continue
                p0, d0 = inbound_end[(a, k)]
                p2, d2 = outbound_start[(b, k)]
                cid = f"{prefix}_c_{a}{b}{k}"
                pts = line(p0, p2, 9) if turn == "straight" else bezier(p0, d0, p2, d2)
                lanes.append(lane(cid, pts, road_type, segment, None, None,
                                  [f"{prefix}_{b}_out{k}"], junction=True))
                by_id[f"{prefix}_{a}_in{k}"]["successors"].append(cid)
    return lanes


def main(path):
    lanes = straight_segment()
    lanes += junction_segment("int", (0.0, 1000.0), ["s", "e", "n", "w"], "intersection",
                              "seg_intersection")
    lanes += junction_segment("tj", (1000.0, 1000.0), ["s", "e", "w"], "t_junction",
                              "seg_tjunction")
    with open(path, "w") as f:
        json.dump({"id": "fixture_map", "lanes": lanes}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/maps/fixture_map.json")
