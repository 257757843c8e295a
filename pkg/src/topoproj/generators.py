"""Generators for the standard datacenter topology families.

Each generator returns a LogicalTopology whose ``attrs`` record the family
and enough structure (layers, groups, coordinates) for the family-specific
routing schemes.  Port numbering conventions:

fat-tree (3 layers, radix k)
    edge:  ports 0..k/2-1 down to hosts, k/2..k-1 up to aggregation
    agg:   ports 0..k/2-1 down to edge,  k/2..k-1 up to core
    core:  port p connects to pod p
dragonfly (a routers/group, g groups, h global/router, p hosts/router)
    ports 0..a-2 local full mesh, a-1..a-2+h global, rest hosts
mesh / torus (2D or 3D)
    ports 2d (toward -1) and 2d+1 (toward +1) per dimension d, last port hosts
"""

from __future__ import annotations

from itertools import product

from .model import Host, LogicalLink, LogicalSwitch, LogicalTopology, SwitchPort, new_topology


def gen_fattree(k: int) -> LogicalTopology:
    """Standard 3-layer fat-tree: 5k^2/4 switches, k^3/4 hosts, radix k."""
    if k < 2 or k % 2 != 0:
        raise ValueError(f"fat-tree arity must be even and >= 2, got {k}")
    half = k // 2
    switches: list[LogicalSwitch] = []
    hosts: list[Host] = []
    links: list[LogicalLink] = []
    layer: dict[str, str] = {}
    pod_of: dict[str, int] = {}

    for g, i in product(range(half), range(half)):
        cid = f"core_{g}_{i}"
        switches.append(LogicalSwitch(cid, k))
        layer[cid] = "core"
    for p in range(k):
        for a in range(half):
            aid = f"agg_{p}_{a}"
            switches.append(LogicalSwitch(aid, k))
            layer[aid] = "agg"
            pod_of[aid] = p
        for e in range(half):
            eid = f"edge_{p}_{e}"
            switches.append(LogicalSwitch(eid, k))
            layer[eid] = "edge"
            pod_of[eid] = p

    n = 0
    for p in range(k):
        for e in range(half):
            eid = f"edge_{p}_{e}"
            for i in range(half):
                hid = f"h_{p}_{e}_{i}"
                hosts.append(Host(hid, eid, i))
            for a in range(half):
                links.append(
                    LogicalLink(f"l{n}", SwitchPort(eid, half + a), SwitchPort(f"agg_{p}_{a}", e))
                )
                n += 1
        for a in range(half):
            for i in range(half):
                links.append(
                    LogicalLink(f"l{n}", SwitchPort(f"agg_{p}_{a}", half + i), SwitchPort(f"core_{a}_{i}", p))
                )
                n += 1

    return new_topology(
        f"fattree_k{k}",
        switches,
        hosts,
        links,
        attrs={"family": "fattree", "k": k, "layer": layer, "pod": pod_of},
    )


def gen_dragonfly(a: int, g: int, h: int, p: int | None = None) -> LogicalTopology:
    """Dragonfly: a*g routers of radix (a-1)+h+p, fully meshed groups.

    Global links are assigned round-robin over group pairs until no group
    has free global ports, so every pair gets one link when a*h == g-1 and
    extra capacity spreads evenly.  p defaults to h (balanced convention).
    """
    if min(a, g, h) < 1:
        raise ValueError("dragonfly parameters must be >= 1")
    if p is None:
        p = h
    if p < 1:
        raise ValueError("dragonfly parameters must be >= 1")
    if a * h < g - 1:
        raise ValueError(
            f"infeasible global wiring: a*h = {a * h} < g-1 = {g - 1}; "
            "every group needs one free global endpoint per other group"
        )
    radix = (a - 1) + h + p
    switches = [LogicalSwitch(f"r_{gi}_{ri}", radix) for gi in range(g) for ri in range(a)]
    hosts = [
        Host(f"h_{gi}_{ri}_{ni}", f"r_{gi}_{ri}", (a - 1) + h + ni)
        for gi in range(g)
        for ri in range(a)
        for ni in range(p)
    ]
    links: list[LogicalLink] = []
    n = 0

    def local_port(me: int, peer: int) -> int:
        return peer - 1 if peer > me else peer

    for gi in range(g):
        for ri in range(a):
            for rj in range(ri + 1, a):
                links.append(
                    LogicalLink(
                        f"l{n}",
                        SwitchPort(f"r_{gi}_{ri}", local_port(ri, rj)),
                        SwitchPort(f"r_{gi}_{rj}", local_port(rj, ri)),
                    )
                )
                n += 1

    # Global slots per group in port-major order so links spread across
    # routers.  Group pairs are served round-robin; a slot combination is
    # skipped when it would duplicate a router pair (the graph stays simple).
    free = {gi: [((a - 1) + j, ri) for j in range(h) for ri in range(a)] for gi in range(g)}
    pairs = [(i, j) for i in range(g) for j in range(i + 1, g)]
    used_router_pairs: set[frozenset[str]] = set()
    global_links: dict[tuple[int, int], list[tuple[str, int, str, int]]] = {}
    while True:
        added = 0
        for gi, gj in pairs:
            found = None
            for ii, (pi, ri) in enumerate(free[gi]):
                for jj, (pj, rj) in enumerate(free[gj]):
                    rpair = frozenset((f"r_{gi}_{ri}", f"r_{gj}_{rj}"))
                    if rpair not in used_router_pairs:
                        found = (ii, jj, rpair)
                        break
                if found:
                    break
            if not found:
                continue
            ii, jj, rpair = found
            pi, ri = free[gi].pop(ii)
            pj, rj = free[gj].pop(jj)
            used_router_pairs.add(rpair)
            ends = (f"r_{gi}_{ri}", pi, f"r_{gj}_{rj}", pj)
            links.append(LogicalLink(f"l{n}", SwitchPort(ends[0], ends[1]), SwitchPort(ends[2], ends[3])))
            global_links.setdefault((gi, gj), []).append(ends)
            n += 1
            added += 1
        if added == 0:
            break

    group_of = {f"r_{gi}_{ri}": gi for gi in range(g) for ri in range(a)}
    return new_topology(
        f"dragonfly_a{a}g{g}h{h}p{p}",
        switches,
        hosts,
        links,
        attrs={
            "family": "dragonfly",
            "a": a,
            "g": g,
            "h": h,
            "p": p,
            "group": group_of,
            "global_links": global_links,
        },
    )


def _grid(dims: list[int], wrap: bool, family: str) -> LogicalTopology:
    nd = len(dims)
    if nd not in (2, 3):
        raise ValueError(f"{family} supports 2 or 3 dimensions, got {nd}")
    minimum = 3 if wrap else 2
    if any(x < minimum for x in dims):
        raise ValueError(f"{family} extents must be >= {minimum}, got {dims}")

    def sid(c: tuple[int, ...]) -> str:
        return "s_" + "_".join(str(x) for x in c)

    radix = 2 * nd + 1  # one host port per switch
    coords = list(product(*(range(x) for x in dims)))
    switches = [LogicalSwitch(sid(c), radix) for c in coords]
    hosts = [Host("h" + sid(c)[1:], sid(c), 2 * nd) for c in coords]
    links: list[LogicalLink] = []
    n = 0
    for c in coords:
        for d in range(nd):
            if c[d] + 1 < dims[d]:
                peer = list(c)
                peer[d] = c[d] + 1
                links.append(LogicalLink(f"l{n}", SwitchPort(sid(c), 2 * d + 1), SwitchPort(sid(tuple(peer)), 2 * d)))
                n += 1
            elif wrap:
                peer = list(c)
                peer[d] = 0
                links.append(LogicalLink(f"l{n}", SwitchPort(sid(c), 2 * d + 1), SwitchPort(sid(tuple(peer)), 2 * d)))
                n += 1
    coord_of = {sid(c): c for c in coords}
    return new_topology(
        f"{family}_" + "x".join(str(x) for x in dims),
        switches,
        hosts,
        links,
        attrs={"family": family, "dims": tuple(dims), "coord": coord_of},
    )


def gen_mesh(dims: list[int]) -> LogicalTopology:
    """2D or 3D mesh, one host per switch, extents >= 2."""
    return _grid(list(dims), wrap=False, family="mesh")


def gen_torus(dims: list[int]) -> LogicalTopology:
    """2D or 3D torus with wraparound per dimension, extents >= 3.

    Extent 2 is rejected: the wraparound would duplicate the direct link.
    """
    return _grid(list(dims), wrap=True, family="torus")
