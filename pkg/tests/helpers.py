"""Shared test fixtures: hand-built topologies and independent oracles.

The oracles here (BFS distances, random connected graphs) deliberately
avoid the library's own routing/partitioning code paths.
"""

from __future__ import annotations

import random

from topoproj.model import Host, LogicalLink, LogicalSwitch, LogicalTopology, SwitchPort, new_topology


def ring_topology(n: int, hosts_per_switch: int = 1, name: str = "ring") -> LogicalTopology:
    """n switches in a cycle, ports 0 (to previous) and 1 (to next)."""
    radix = 2 + hosts_per_switch
    switches = [LogicalSwitch(f"s{i}", radix) for i in range(n)]
    hosts = [
        Host(f"h{i}_{j}", f"s{i}", 2 + j) for i in range(n) for j in range(hosts_per_switch)
    ]
    links = [
        LogicalLink(f"l{i}", SwitchPort(f"s{i}", 1), SwitchPort(f"s{(i + 1) % n}", 0))
        for i in range(n)
    ]
    return new_topology(name, switches, hosts, links)


def path_topology(names: list[str], hosts_at: dict[str, int] | None = None) -> LogicalTopology:
    """Path graph over the given switch names."""
    hosts_at = hosts_at or {}
    switches = [LogicalSwitch(s, 4) for s in names]
    links = [
        LogicalLink(f"l{i}", SwitchPort(names[i], 1), SwitchPort(names[i + 1], 0))
        for i in range(len(names) - 1)
    ]
    hosts = [Host(f"h_{s}_{j}", s, 2 + j) for s, n in hosts_at.items() for j in range(n)]
    return new_topology("path", switches, hosts, links)


def star_topology(leaves: int = 4) -> LogicalTopology:
    """One center switch linked to `leaves` leaf switches, no hosts."""
    switches = [LogicalSwitch("c", leaves)] + [LogicalSwitch(f"v{i}", 1) for i in range(leaves)]
    links = [
        LogicalLink(f"l{i}", SwitchPort("c", i), SwitchPort(f"v{i}", 0)) for i in range(leaves)
    ]
    return new_topology("star", switches, [], links)


def pair_topology(name: str = "pair") -> LogicalTopology:
    """Two switches, one link, one host each: the smallest useful fabric."""
    switches = [LogicalSwitch("s0", 4), LogicalSwitch("s1", 4)]
    hosts = [Host("h0", "s0", 0), Host("h1", "s1", 0)]
    links = [LogicalLink("l0", SwitchPort("s0", 1), SwitchPort("s1", 1))]
    return new_topology(name, switches, hosts, links)


def bfs_distance(topo: LogicalTopology, start: str, goal: str) -> int:
    """Independent shortest-path oracle over the switch-switch graph."""
    if start == goal:
        return 0
    adj: dict[str, set[str]] = {s: set() for s in topo.switches}
    for link in topo.ss_links():
        a, b = link.switch_ends()
        adj[a.switch].add(b.switch)
        adj[b.switch].add(a.switch)
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for sw in frontier:
            for peer in adj[sw]:
                if peer not in dist:
                    dist[peer] = dist[sw] + 1
                    nxt.append(peer)
        frontier = nxt
    return dist[goal]


def random_connected_topology(rng: random.Random, n: int, extra_edges: int = 0) -> LogicalTopology:
    """Random connected graph: random spanning tree plus extra edges."""
    names = [f"s{i}" for i in range(n)]
    edges: set[tuple[str, str]] = set()
    for i in range(1, n):
        j = rng.randrange(i)
        edges.add((names[j], names[i]))
    possible = [
        (names[i], names[j]) for i in range(n) for j in range(i + 1, n)
        if (names[i], names[j]) not in edges
    ]
    rng.shuffle(possible)
    for e in possible[:extra_edges]:
        edges.add(e)
    degree = {s: 0 for s in names}
    ports = {s: 0 for s in names}
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    switches = [LogicalSwitch(s, max(1, degree[s])) for s in names]
    links = []
    for idx, (a, b) in enumerate(sorted(edges)):
        links.append(LogicalLink(f"l{idx}", SwitchPort(a, ports[a]), SwitchPort(b, ports[b])))
        ports[a] += 1
        ports[b] += 1
    return new_topology(f"rand{n}", switches, [], links)
