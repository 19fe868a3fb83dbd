#!/usr/bin/env python3
"""Generates fixtures/fourtrack: a four-track, two-feeder network with 24
substations over 56 miles, its plate-order library, the bridle_removal
scenario and an expectations file computed independently of the C++ code."""

import argparse
import collections
import os

MILE = 5280
LENGTH = 56 * MILE
SUBS = 24
SPACING = LENGTH // SUBS  # 12,320 ft
TRACKS = ["1", "2", "3", "4"]
FEEDERS = ["FE", "FW"]
SUPPLY = {2, 8, 15, 21}
PHASE_BREAK_BLOCK = 11
TARGET_SUB = 5
BRIDGES = [("1", 3), ("2", 8), ("3", 14), ("4", 18), ("1", 21)]
CROSSBOND_BLOCKS = [1, 9, 13, 19]
AERIAL_BLOCKS = [2, 16]
PLATE_COUNT = 200


def sub_x(k):
    return SPACING // 2 + SPACING * k


def breaks(k):
    x = sub_x(k)
    return x + (SPACING + 2) // 3, x + (2 * SPACING + 2) // 3


def zone_of_sub(k):
    return "Z1" if k <= PHASE_BREAK_BLOCK else "Z2"


class Net:
    def __init__(self):
        self.lines = []
        self.nodes = {}
        self.sections = []
        self.devices = []
        self.sources = []
        self.grounds = []

    def node(self, nid, zone, loc):
        assert nid not in self.nodes, nid
        self.nodes[nid] = (zone, loc)

    def section(self, sid, kind, a, b, lo, hi, track=None, group=None):
        self.sections.append(dict(id=sid, kind=kind, a=a, b=b, lo=lo, hi=hi, track=track, group=group))

    def device(self, did, kind, a, b, **attrs):
        self.devices.append(dict(id=did, kind=kind, a=a, b=b, attrs=attrs))

    def ground(self, gid, kind, node, group=None):
        self.grounds.append(dict(id=gid, kind=kind, node=node, group=group))


def build():
    net = Net()
    # Substations.
    for k in range(SUBS):
        z, x = zone_of_sub(k), sub_x(k)
        src, bus = f"S{k:02d}_SRC", f"S{k:02d}_BUS"
        net.node(src, z, x)
        net.node(bus, z, x)
        kind = "supply_substation" if k in SUPPLY else "equalizing_substation"
        net.sources.append((f"SUB{k:02d}", kind, src))
        net.device(f"S{k:02d}_MB", "breaker", src, bus, rackable="1", group="FE")
        net.ground(f"S{k:02d}_GB", "local", bus, group="FE")
        for t in TRACKS:
            for side in "WE":
                n = f"T{t}_S{k:02d}_{side}"
                net.node(n, z, x)
                net.device(f"S{k:02d}_CB{t}{side}", "breaker", bus, n)
        for f in FEEDERS:
            for side in "WE":
                if (k == 0 and side == "W") or (k == SUBS - 1 and side == "E"):
                    continue
                n = f"{f}_S{k:02d}_{side}"
                net.node(n, z, x)
                net.device(f"S{k:02d}_CB{f}{side}", "breaker", bus, n)

    # Trolley blocks between substations, each with two paralleling breakers.
    for t in TRACKS:
        west = f"T{t}_WEND"
        net.node(west, "Z1", 0)
        net.section(f"T{t}_W", "trolley", west, f"T{t}_S00_W", 0, sub_x(0), track=t)
        east = f"T{t}_EEND"
        net.node(east, "Z2", LENGTH)
        net.section(f"T{t}_E", "trolley", f"T{t}_S{SUBS - 1:02d}_E", east, sub_x(SUBS - 1), LENGTH, track=t)
        for k in range(SUBS - 1):
            b1, b2 = breaks(k)
            z_lo = zone_of_sub(k)
            z_hi = "Z2" if k == PHASE_BREAK_BLOCK else z_lo
            ids = [f"T{t}_B{k:02d}_{p}" for p in ("1W", "1E", "2W", "2E")]
            net.node(ids[0], z_lo, b1)
            net.node(ids[1], z_lo, b1)
            net.node(ids[2], z_lo, b2)
            net.node(ids[3], z_hi, b2)
            net.section(f"T{t}_{k:02d}a", "trolley", f"T{t}_S{k:02d}_E", ids[0], sub_x(k), b1, track=t)
            net.section(f"T{t}_{k:02d}b", "trolley", ids[1], ids[2], b1, b2, track=t)
            net.section(f"T{t}_{k:02d}c", "trolley", ids[3], f"T{t}_S{k + 1:02d}_W", b2, sub_x(k + 1), track=t)
            net.device(f"B{k:02d}_1_T{t}", "breaker", ids[0], ids[1])
            if k == PHASE_BREAK_BLOCK:
                net.device(f"B{k:02d}_2_T{t}", "tie", ids[2], ids[3])
            else:
                net.device(f"B{k:02d}_2_T{t}", "breaker", ids[2], ids[3])

    # Feeders run substation to substation; the phase break splits one span.
    for f in FEEDERS:
        for k in range(SUBS - 1):
            a, b = f"{f}_S{k:02d}_E", f"{f}_S{k + 1:02d}_W"
            if k == PHASE_BREAK_BLOCK:
                _, b2 = breaks(k)
                w, e = f"{f}_PB_W", f"{f}_PB_E"
                net.node(w, "Z1", b2)
                net.node(e, "Z2", b2)
                net.section(f"{f}_{k:02d}a", "feeder", a, w, sub_x(k), b2, group=f)
                net.section(f"{f}_{k:02d}b", "feeder", e, b, b2, sub_x(k + 1), group=f)
                net.device(f"{f}_PB", "tie", w, e)
            else:
                net.section(f"{f}_{k:02d}", "feeder", a, b, sub_x(k), sub_x(k + 1), group=f)

    # Normally open cross-bond MODs between adjacent tracks.
    for k in CROSSBOND_BLOCKS:
        for t1, t2 in (("1", "2"), ("3", "4")):
            net.device(f"XB{k:02d}_{t1}{t2}", "mod", f"T{t1}_B{k:02d}_1E", f"T{t2}_B{k:02d}_1E",
                       normal="open", control="manual", travel="8")

    # Box grounds at every trolley and feeder node; aerial grounds on some spans.
    line_nodes = set()
    for s in net.sections:
        line_nodes.add(s["a"])
        line_nodes.add(s["b"])
    for n in sorted(line_nodes):
        net.ground(f"G_{n}", "box", n)
    for k in AERIAL_BLOCKS:
        for t in TRACKS:
            net.ground(f"GA_T{t}_B{k:02d}", "aerial", f"T{t}_B{k:02d}_1E")
    return net


def interlocking_x(k):
    return sub_x(k) + SPACING // 2


def limit_switch(t, k):
    return f"X{k:02d}A" if t in ("1", "2") else f"X{k:02d}C"


def switch_records():
    out = []
    for k in range(SUBS - 1):
        x = interlocking_x(k)
        out.append((f"X{k:02d}A", "1:2", x - 300))
        out.append((f"X{k:02d}B", "2:3", x))
        out.append((f"X{k:02d}C", "3:4", x + 300))
    return out


def plates():
    lib = []

    def add(tracks, k, j):
        desc = "Track " + "+".join(tracks) + f" IL{k:02d} to IL{k + j:02d}"
        bars = [(t, limit_switch(t, k), limit_switch(t, k + j)) for t in tracks]
        blocks = sorted({s for _, a, b in bars for s in (a, b)})
        lib.append((desc, bars, blocks))

    n_il = SUBS - 1
    for t in TRACKS:
        for k in range(n_il - 1):
            add([t], k, 1)
    for k in range(n_il - 1):
        add(TRACKS, k, 1)
    for pair in (["1", "2"], ["3", "4"]):
        for k in range(n_il - 1):
            add(pair, k, 1)
    for k in range(n_il - 2):
        add(TRACKS, k, 2)
    for t in TRACKS:
        for k in range(n_il - 2):
            add([t], k, 2)
    return [(f"PO{i + 1:03d}",) + p for i, p in enumerate(lib[:PLATE_COUNT])]


def render_net(net):
    out = ["# Four-track main line, 56 miles, 24 substations, two feeder groups.",
           "# Generated by tools/gen_fourtrack.py; edit the generator, not this file.",
           "zone Z1", "zone Z2"]
    out += [f"track {t}" for t in TRACKS]
    out.append("")
    for nid, (z, loc) in net.nodes.items():
        out.append(f"node {nid} {z} {loc}")
    out.append("")
    for sid, kind, node in net.sources:
        out.append(f"source {sid} {kind} {node}")
    out.append("")
    for s in net.sections:
        line = f"section {s['id']} {s['kind']} {s['a']} {s['b']} {s['lo']} {s['hi']}"
        if s["track"]:
            line += f" track={s['track']}"
        if s["group"]:
            line += f" group={s['group']}"
        out.append(line)
    out.append("")
    for d in net.devices:
        line = f"device {d['id']} {d['kind']} {d['a']} {d['b']}"
        for k, v in d["attrs"].items():
            line += f" {k}={v}"
        out.append(line)
    out.append("")
    for g in net.grounds:
        line = f"ground {g['id']} {g['kind']} {g['node']}"
        if g["group"]:
            line += f" group={g['group']}"
        out.append(line)
    out.append("")
    sw = switch_records()
    for sid, pair, loc in sw:
        out.append(f"switch {sid} {pair} {loc}")
    for k in range(SUBS - 1):
        x = interlocking_x(k)
        out.append(f"interlocking IL{k:02d} {x - 600} {x + 600} switches=X{k:02d}A,X{k:02d}B,X{k:02d}C")
    out.append("")
    for t, k in BRIDGES:
        out.append(f"keeplive T{t}_{k:02d}b")
    out.append("")
    for pid, desc, bars, blocks in plates():
        out.append(f'plate {pid} "{desc}"')
        for t, a, b in bars:
            out.append(f"bar {t} {a} {b}")
        for s in blocks:
            out.append(f"block {s}")
    return "\n".join(out) + "\n"


# --- Independent expectations -------------------------------------------------


def wire_runs(net):
    """Maximal section-connected trolley stretches per track."""
    adj = collections.defaultdict(list)
    by_track = collections.defaultdict(list)
    for s in net.sections:
        if s["kind"] != "trolley":
            continue
        by_track[s["track"]].append(s)
        adj[s["a"]].append(s)
        adj[s["b"]].append(s)
    longest = 0
    count = 0
    for track, secs in by_track.items():
        seen = set()
        for s in secs:
            if s["id"] in seen:
                continue
            stack, total = [s], 0
            seen.add(s["id"])
            lo, hi = s["lo"], s["hi"]
            while stack:
                cur = stack.pop()
                total += cur["hi"] - cur["lo"]
                lo, hi = min(lo, cur["lo"]), max(hi, cur["hi"])
                for n in (cur["a"], cur["b"]):
                    for nxt in adj[n]:
                        if nxt["track"] == track and nxt["id"] not in seen:
                            seen.add(nxt["id"])
                            stack.append(nxt)
            longest = max(longest, hi - lo)
            count += 1
    return longest, count


def unbalance(net):
    """Nearest-source credit by hop count, ties split evenly."""
    adj = collections.defaultdict(list)
    for s in net.sections:
        adj[s["a"]].append(s["b"])
        adj[s["b"]].append(s["a"])
    for d in net.devices:
        normal = d["attrs"].get("normal", "open" if d["kind"] == "tie" else "closed")
        if normal == "closed":
            adj[d["a"]].append(d["b"])
            adj[d["b"]].append(d["a"])
    dist = {}
    for sid, _, node in net.sources:
        d = {node: 0}
        q = collections.deque([node])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if v not in d:
                    d[v] = d[u] + 1
                    q.append(v)
        dist[sid] = d
    scores = {sid: 0.0 for sid, _, _ in net.sources}
    for s in net.sections:
        if s["kind"] != "trolley":
            continue
        best, winners = None, []
        for sid in scores:
            cand = [dist[sid][n] for n in (s["a"], s["b"]) if n in dist[sid]]
            if not cand:
                continue
            m = min(cand)
            if best is None or m < best:
                best, winners = m, [sid]
            elif m == best:
                winners.append(sid)
        for w in winners:
            scores[w] += 1.0 / len(winners)
    mean = sum(scores.values()) / len(scores)
    return max(scores.values()), mean


def render_expect(net):
    longest, runs = wire_runs(net)
    umax, umean = unbalance(net)
    supply = sum(1 for _, k, _ in net.sources if k == "supply_substation")
    return "\n".join([
        "# Values recomputed by tools/gen_fourtrack.py without the C++ engine.",
        f"count supply_substations {supply}",
        f"count equalizing_substations {len(net.sources) - supply}",
        f"count tracks {len(TRACKS)}",
        f"count feeder_groups {len(FEEDERS)}",
        f"count keep_live {len(BRIDGES)}",
        f"count plate_orders {min(PLATE_COUNT, len(plates()))}",
        f"count nodes {len(net.nodes)}",
        f"count sections {len(net.sections)}",
        f"count devices {len(net.devices)}",
        f"count ground_points {len(net.grounds)}",
        f"extent_ft {LENGTH}",
        f"wirerun longest_ft {longest}",
        f"wirerun runs {runs}",
        f"unbalance max {umax:.6f}",
        f"unbalance mean {umean:.6f}",
        "",
    ])


def scenario_files():
    k = TARGET_SUB
    req = [f"# Bridle removal: all four tracks and both feeders around substation {k:02d}.",
           "request BR1 job=J1"]
    for t in TRACKS:
        req.append(f"target T{t}_{k - 1:02d}c T{t}_{k:02d}a")
    for f in FEEDERS:
        req.append(f"target {f}_{k - 1:02d} {f}_{k:02d}")
    state = ["# Second director holds the next feeder breaker for adjacent work.",
             f"position S{k + 1:02d}_CBFEW open",
             f'tag S{k + 1:02d}_CBFEW PD2 "feeder outage FE east" 0']
    return "\n".join(req) + "\n", "\n".join(state) + "\n"


JOBS = """# Five-craft demand example: 6 linemen, 4 groundmen, 2 directors, 3 flagmen, 2 dispatchers.
job J1 prio=1 owner=bridle_contractor nights=fri
variant A lineman=2 groundman=2 director=1 flagman=1 dispatcher=1 isolation=BR1 progress=1
job J2 prio=2 owner=signal_contractor nights=fri
variant A lineman=2 groundman=1 director=1 flagman=1 dispatcher=1 progress=1
variant B lineman=1 groundman=1 director=1 flagman=1 dispatcher=1 progress=0.5
job J3 prio=3 owner=track_forces nights=fri
variant A lineman=1 groundman=1 director=0 flagman=1 dispatcher=0 progress=1
job J4 prio=4 owner=catenary_forces nights=fri
variant A lineman=1 groundman=0 director=0 flagman=0 dispatcher=0 progress=1
"""

CAL = """avail fri lineman 6
avail fri groundman 4
avail fri director 2
avail fri flagman 3
avail fri dispatcher 2
outages fri 2
crews fri 4
"""

WINDOW = """window fri start=22:00 end=05:00 clear=00:15 extension=30
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    here = os.path.dirname(os.path.abspath(__file__))
    ap.add_argument("--out", default=os.path.join(here, "..", "fixtures", "fourtrack"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    net = build()
    req, state = scenario_files()
    files = {
        "fourtrack.net": render_net(net),
        "fourtrack.expect": render_expect(net),
        "fourtrack.state": "# Normal configuration.\n",
        "bridle_removal.req": req,
        "bridle_removal.state": state,
        "fourtrack.jobs": JOBS,
        "fourtrack.cal": CAL,
        "fourtrack.window": WINDOW,
    }
    for name, text in files.items():
        with open(os.path.join(args.out, name), "w") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
