"""Per-family routing and deadlock analysis.

Schemes shipped per topology family:

    fat-tree   deterministic DFS up-down (no VC change)
    dragonfly  minimal local-global-local, VC 0 -> 1 after the global hop
    mesh       dimension-order (X, then Y, then Z), single VC
    torus      dimension-order with per-dimension shortest direction and a
               dateline VC switch: links of dimension d carry VC 1 once the
               frame has crossed d's wraparound link, VC 0 before
    any graph  lowest-id BFS shortest path fallback, single VC

A route hop is one logical switch traversal; hop.vc is the VC used on the
link the frame leaves that switch on (the final hop keeps the VC it
arrived with).  The torus scheme is deliberately per-dimension: a single
VC bit shared across dimensions re-admits ring cycles once traffic that
already wrapped in one dimension chains through another dimension's ring,
so the VC may drop back to 0 when the route turns into a fresh dimension.
2 VCs then suffice for every shipped scheme.

Deadlock freedom is certified by building the channel dependency graph,
one node per (link, direction, vc), one edge per consecutive pair of link
traversals in any route, and checking acyclicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .model import LogicalLink, LogicalTopology, SwitchPort


class RoutingError(ValueError):
    pass


@dataclass(frozen=True)
class Hop:
    switch: str
    in_port: int
    out_port: int
    vc: int


@dataclass(frozen=True)
class Route:
    src_host: str
    dst_host: str
    hops: tuple[Hop, ...]

    def switch_sequence(self) -> tuple[str, ...]:
        return tuple(h.switch for h in self.hops)

    def link_vcs(self) -> tuple[int, ...]:
        """VCs on the switch-switch links, in traversal order."""
        return tuple(h.vc for h in self.hops[:-1])


@dataclass(frozen=True)
class VCAssignment:
    num_vcs: int = 2


Channel = tuple[str, int, int]  # (link id, direction: +1 a->b / -1 b->a, vc)


@dataclass
class ChannelDependencyGraph:
    nodes: set[Channel] = field(default_factory=set)
    edges: set[tuple[Channel, Channel]] = field(default_factory=set)


@dataclass(frozen=True)
class DeadlockVerdict:
    deadlock_free: bool
    cycle: tuple[Channel, ...] | None = None

    def __str__(self) -> str:
        if self.deadlock_free:
            return "deadlock-free"
        steps = " -> ".join(f"{l}{'+' if d > 0 else '-'}/vc{v}" for l, d, v in self.cycle)
        return f"cyclic: {steps}"


# ---------------------------------------------------------------------------
# shared plumbing

def _family(topo: LogicalTopology, expected: str) -> None:
    fam = topo.attrs.get("family")
    if fam != expected:
        raise RoutingError(f"{topo.name}: expected a generated {expected} topology, got {fam!r}")


def _hosts(topo: LogicalTopology, src: str, dst: str):
    for h in (src, dst):
        if h not in topo.hosts:
            raise RoutingError(f"{h!r} is not a host of {topo.name}")
    return topo.hosts[src], topo.hosts[dst]


def _ports_between(topo: LogicalTopology, sw_a: str, sw_b: str) -> tuple[int, int]:
    link = topo.link_between(sw_a, sw_b)
    if link is None:
        raise RoutingError(f"no link between {sw_a} and {sw_b}")
    a, b = link.switch_ends()
    if a.switch == sw_a:
        return a.port, b.port
    return b.port, a.port


def _route_from_switch_path(
    topo: LogicalTopology, src: str, dst: str, path: Sequence[str], vcs: Sequence[int] | None = None
) -> Route:
    """Assemble hops from a switch path; vcs gives the VC per ss link."""
    hsrc, hdst = topo.hosts[src], topo.hosts[dst]
    if not path:
        return Route(src, dst, ())
    link_vcs = list(vcs) if vcs is not None else [0] * (len(path) - 1)
    hops: list[Hop] = []
    in_port = hsrc.attached_port
    for i, sw in enumerate(path):
        if i < len(path) - 1:
            out_port, next_in = _ports_between(topo, sw, path[i + 1])
            hops.append(Hop(sw, in_port, out_port, link_vcs[i]))
            in_port = next_in
        else:
            final_vc = link_vcs[-1] if len(path) > 1 else 0
            hops.append(Hop(sw, in_port, hdst.attached_port, final_vc))
    return Route(src, dst, tuple(hops))


# ---------------------------------------------------------------------------
# fat-tree

def route_fattree_dfs(topo: LogicalTopology, src: str, dst: str) -> Route:
    """Shortest up-down path by deterministic DFS, lowest-id neighbor first."""
    _family(topo, "fattree")
    hsrc, hdst = _hosts(topo, src, dst)
    if src == dst:
        return Route(src, dst, ())
    layer: Mapping[str, str] = topo.attrs["layer"]
    adj = topo.adjacency()
    dst_edge = hdst.attached_switch

    def down_path(sw: str) -> list[str] | None:
        """Pure-down continuation to dst_edge, lowest-id next hop, or None."""
        if sw == dst_edge:
            return [sw]
        rank = {"core": 2, "agg": 1, "edge": 0}
        for peer, _, _, _ in adj[sw]:  # adjacency is id-sorted
            if rank[layer[peer]] < rank[layer[sw]]:
                tail = down_path(peer)
                if tail is not None:
                    return [sw] + tail
        return None

    # DFS upward until a down path to the destination edge switch exists
    path: list[str] | None = None
    stack: list[list[str]] = [[hsrc.attached_switch]]
    rank = {"core": 2, "agg": 1, "edge": 0}
    while stack:
        prefix = stack.pop()
        here = prefix[-1]
        down = down_path(here)
        if down is not None:
            path = prefix[:-1] + down
            break
        ups = sorted(peer for peer, _, _, _ in adj[here] if rank[layer[peer]] > rank[layer[here]])
        for peer in reversed(ups):  # stack: lowest id explored first
            stack.append(prefix + [peer])
    if path is None:
        raise RoutingError(f"no up-down path from {src} to {dst}")
    return _route_from_switch_path(topo, src, dst, path)


# ---------------------------------------------------------------------------
# dragonfly

def _dragonfly_candidates(topo: LogicalTopology, src: str, dst: str) -> list[list[str]]:
    """All minimal (local, global, local) switch paths, deterministic order:
    shortest first, then lexicographic by the global link used."""
    hsrc, hdst = _hosts(topo, src, dst)
    group: Mapping[str, int] = topo.attrs["group"]
    r_s, r_d = hsrc.attached_switch, hdst.attached_switch
    if r_s == r_d:
        return [[r_s]]
    g_s, g_d = group[r_s], group[r_d]
    if g_s == g_d:
        return [[r_s, r_d]]
    glinks: Mapping[tuple[int, int], list] = topo.attrs["global_links"]
    key = (min(g_s, g_d), max(g_s, g_d))
    out: list[tuple[tuple, list[str]]] = []
    for ra, pa, rb, pb in glinks.get(key, []):
        if group[ra] != g_s:
            ra, pa, rb, pb = rb, pb, ra, pa
        path = [r_s]
        if ra != r_s:
            path.append(ra)
        path.append(rb)
        if rb != r_d:
            path.append(r_d)
        out.append(((len(path), ra, pa), path))
    if not out:
        raise RoutingError(f"no global link between groups {g_s} and {g_d}")
    out.sort(key=lambda t: t[0])
    return [path for _, path in out]


def _dragonfly_vcs(topo: LogicalTopology, path: Sequence[str]) -> list[int]:
    """VC 0 up to and including the global link, 1 on local links after it."""
    group: Mapping[str, int] = topo.attrs["group"]
    vcs = []
    crossed = False
    for a, b in zip(path, path[1:]):
        vcs.append(1 if crossed else 0)
        if group[a] != group[b]:
            crossed = True
    return vcs


def route_dragonfly_minimal(topo: LogicalTopology, src: str, dst: str) -> Route:
    _family(topo, "dragonfly")
    if src == dst:
        _hosts(topo, src, dst)
        return Route(src, dst, ())
    path = _dragonfly_candidates(topo, src, dst)[0]
    return _route_from_switch_path(topo, src, dst, path, _dragonfly_vcs(topo, path))


def route_adaptive_dragonfly(
    topo: LogicalTopology, src: str, dst: str, load: Mapping[tuple[str, int], int]
) -> Route:
    """Among minimal candidates, pick the route whose most-loaded port is
    least loaded; ties fall to the deterministic minimal ordering."""
    _family(topo, "dragonfly")
    if src == dst:
        _hosts(topo, src, dst)
        return Route(src, dst, ())
    best: tuple[int, int] | None = None  # (max load, candidate index)
    candidates = _dragonfly_candidates(topo, src, dst)
    routes = [
        _route_from_switch_path(topo, src, dst, path, _dragonfly_vcs(topo, path))
        for path in candidates
    ]
    for i, route in enumerate(routes):
        worst = 0
        for hop in route.hops:
            for port in (hop.in_port, hop.out_port):
                key = (hop.switch, port)
                if key not in load:
                    raise RoutingError(f"missing port counter for {key[0]}:{key[1]}")
                worst = max(worst, load[key])
        if best is None or worst < best[0]:
            best = (worst, i)
    return routes[best[1]]


# ---------------------------------------------------------------------------
# mesh / torus

def _mesh_steps(coord: Sequence[int], target: Sequence[int], dims: Sequence[int]) -> list[tuple[int, int]]:
    """Dimension-order steps (dim, delta) with no wraparound."""
    steps = []
    for d in range(len(dims)):
        delta = 1 if target[d] > coord[d] else -1
        for _ in range(abs(target[d] - coord[d])):
            steps.append((d, delta))
    return steps


def _torus_steps(coord: Sequence[int], target: Sequence[int], dims: Sequence[int]) -> list[tuple[int, int]]:
    """Dimension-order steps taking each dimension's shortest direction,
    ties toward increasing coordinate."""
    steps = []
    for d in range(len(dims)):
        n = dims[d]
        fwd = (target[d] - coord[d]) % n
        back = (coord[d] - target[d]) % n
        if fwd == 0:
            continue
        delta = 1 if fwd <= back else -1
        for _ in range(min(fwd, back)):
            steps.append((d, delta))
    return steps


def _grid_route(topo: LogicalTopology, src: str, dst: str, family: str) -> Route:
    _family(topo, family)
    hsrc, hdst = _hosts(topo, src, dst)
    if src == dst:
        return Route(src, dst, ())
    coord: Mapping[str, tuple[int, ...]] = topo.attrs["coord"]
    dims: tuple[int, ...] = topo.attrs["dims"]
    by_coord = {c: s for s, c in coord.items()}
    cur = list(coord[hsrc.attached_switch])
    target = coord[hdst.attached_switch]
    stepper = _mesh_steps if family == "mesh" else _torus_steps
    path = [by_coord[tuple(cur)]]
    vcs: list[int] = []
    crossed = [False] * len(dims)
    for d, delta in stepper(cur, target, dims):
        wraps = (cur[d] == dims[d] - 1 and delta == 1) or (cur[d] == 0 and delta == -1)
        vcs.append(1 if crossed[d] else 0)
        if wraps:
            crossed[d] = True
        cur[d] = (cur[d] + delta) % dims[d]
        path.append(by_coord[tuple(cur)])
    return _route_from_switch_path(topo, src, dst, path, vcs)


def route_mesh_dor(topo: LogicalTopology, src: str, dst: str) -> Route:
    return _grid_route(topo, src, dst, "mesh")


def route_torus_dateline(topo: LogicalTopology, src: str, dst: str) -> Route:
    return _grid_route(topo, src, dst, "torus")


# ---------------------------------------------------------------------------
# generic fallback

def route_shortest(topo: LogicalTopology, src: str, dst: str) -> Route:
    """BFS shortest path, lexicographically smallest, single VC.

    Works on any connected topology; gives no deadlock guarantee.
    """
    hsrc, hdst = _hosts(topo, src, dst)
    if src == dst:
        return Route(src, dst, ())
    adj = topo.adjacency()
    start, goal = hsrc.attached_switch, hdst.attached_switch
    parent: dict[str, str | None] = {start: None}
    frontier = [start]
    while frontier and goal not in parent:
        nxt = []
        for sw in sorted(frontier):
            for peer, _, _, _ in adj[sw]:
                if peer not in parent:
                    parent[peer] = sw
                    nxt.append(peer)
        frontier = nxt
    if goal not in parent:
        raise RoutingError(f"no path between {src} and {dst}")
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return _route_from_switch_path(topo, src, dst, path)


SCHEMES: dict[str, Callable[[LogicalTopology, str, str], Route]] = {
    "fattree-dfs": route_fattree_dfs,
    "dragonfly-minimal": route_dragonfly_minimal,
    "mesh-dor": route_mesh_dor,
    "torus-dateline": route_torus_dateline,
    "shortest": route_shortest,
}

_FAMILY_SCHEME = {
    "fattree": "fattree-dfs",
    "dragonfly": "dragonfly-minimal",
    "mesh": "mesh-dor",
    "torus": "torus-dateline",
}


def scheme_for(topo: LogicalTopology, scheme: str = "auto") -> str:
    if scheme != "auto":
        if scheme not in SCHEMES:
            raise RoutingError(f"unknown routing scheme {scheme!r}")
        return scheme
    return _FAMILY_SCHEME.get(topo.attrs.get("family"), "shortest")


def router_for(topo: LogicalTopology, scheme: str = "auto") -> Callable[[LogicalTopology, str, str], Route]:
    return SCHEMES[scheme_for(topo, scheme)]


def all_pair_routes(
    topo: LogicalTopology, route_fn: Callable[[LogicalTopology, str, str], Route]
) -> dict[tuple[str, str], Route]:
    routes = {}
    hosts = sorted(topo.hosts)
    for src in hosts:
        for dst in hosts:
            if src != dst:
                routes[(src, dst)] = route_fn(topo, src, dst)
    return routes


# ---------------------------------------------------------------------------
# channel dependency graph

def build_cdg(
    topo: LogicalTopology,
    routes: Mapping[tuple[str, str], Route] | Iterable[Route],
    vcs: VCAssignment | None = None,
) -> ChannelDependencyGraph:
    """One node per (link, direction, vc) in use, one edge per consecutive
    pair of link traversals in any route."""
    vcs = vcs or VCAssignment()
    cdg = ChannelDependencyGraph()
    route_iter = routes.values() if isinstance(routes, Mapping) else routes
    port_users = topo.port_users()

    def out_channel(hop: Hop) -> Channel:
        end = SwitchPort(hop.switch, hop.out_port)
        users = port_users.get(end)
        if not users:
            raise RoutingError(f"route leaves via unknown port {end}")
        link = topo.links[users[0]]
        direction = 1 if link.endpoint_a == end else -1
        return (link.id, direction, hop.vc)

    for route in route_iter:
        prev: Channel | None = None
        for hop in route.hops:
            if hop.vc >= vcs.num_vcs:
                raise RoutingError(
                    f"route {route.src_host}->{route.dst_host} uses vc {hop.vc} "
                    f"but only {vcs.num_vcs} VCs exist"
                )
            chan = out_channel(hop)
            cdg.nodes.add(chan)
            if prev is not None:
                cdg.edges.add((prev, chan))
            prev = chan
    return cdg


def assert_deadlock_free(cdg: ChannelDependencyGraph) -> DeadlockVerdict:
    """Acyclic CDG means deadlock-free; otherwise return one witness cycle."""
    succ: dict[Channel, list[Channel]] = {}
    for a, b in cdg.edges:
        succ.setdefault(a, []).append(b)
    for lst in succ.values():
        lst.sort()

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in cdg.nodes}
    for start in sorted(cdg.nodes):
        if color[start] != WHITE:
            continue
        stack: list[tuple[Channel, int]] = [(start, 0)]
        path: list[Channel] = []
        color[start] = GRAY
        path.append(start)
        while stack:
            node, idx = stack[-1]
            nexts = succ.get(node, [])
            if idx < len(nexts):
                stack[-1] = (node, idx + 1)
                child = nexts[idx]
                if color[child] == GRAY:
                    at = path.index(child)
                    return DeadlockVerdict(False, tuple(path[at:]))
                if color[child] == WHITE:
                    color[child] = GRAY
                    stack.append((child, 0))
                    path.append(child)
            else:
                color[node] = BLACK
                stack.pop()
                path.pop()
    return DeadlockVerdict(True, None)


def format_routes(topo: LogicalTopology, routes: Mapping[tuple[str, str], Route], scheme: str) -> str:
    """Per-pair dump: switch[in out vc] sequence, deterministic ordering."""
    lines = [f"# routes topology={topo.name} scheme={scheme} pairs={len(routes)}"]
    for (src, dst) in sorted(routes):
        hops = " ".join(
            f"{h.switch}[in={h.in_port} out={h.out_port} vc={h.vc}]" for h in routes[(src, dst)].hops
        )
        lines.append(f"{src} -> {dst} : {hops}")
    return "\n".join(lines) + "\n"
