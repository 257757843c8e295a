"""Logical topology model: switches, hosts, links, and validation.

A logical topology is the graph the user wants to exist: logical switches
with a fixed radix, hosts hanging off switch ports, and links that are
either switch-to-switch or switch-to-host.  The switch-switch subgraph is
kept simple (no self loops, no parallel edges); multigraphs are out of
scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

SWITCH_SWITCH = "switch-switch"
SWITCH_HOST = "switch-host"


class TopologyError(ValueError):
    """Raised when a topology cannot be assembled coherently."""


@dataclass(frozen=True, order=True)
class SwitchPort:
    """A (switch id, port index) endpoint. Ports are 0-based, < radix."""

    switch: str
    port: int

    def __str__(self) -> str:
        return f"{self.switch}:{self.port}"


@dataclass(frozen=True)
class LogicalSwitch:
    id: str
    radix: int

    @property
    def ports(self) -> tuple[int, ...]:
        return tuple(range(self.radix))


@dataclass(frozen=True)
class Host:
    id: str
    attached_switch: str
    attached_port: int


@dataclass(frozen=True)
class LogicalLink:
    """An undirected link. Endpoints are SwitchPort or a host id (str)."""

    id: str
    endpoint_a: SwitchPort | str
    endpoint_b: SwitchPort | str

    @property
    def kind(self) -> str:
        if isinstance(self.endpoint_a, SwitchPort) and isinstance(self.endpoint_b, SwitchPort):
            return SWITCH_SWITCH
        return SWITCH_HOST

    def switch_ends(self) -> tuple[SwitchPort, ...]:
        return tuple(e for e in (self.endpoint_a, self.endpoint_b) if isinstance(e, SwitchPort))

    def host_end(self) -> str | None:
        for e in (self.endpoint_a, self.endpoint_b):
            if isinstance(e, str):
                return e
        return None


@dataclass
class LogicalTopology:
    """A named set of switches, hosts and links.

    ``attrs`` carries generator metadata (family, coordinates, ...) used by
    family-specific routing.  It is not part of the serialized form.
    """

    name: str
    switches: dict[str, LogicalSwitch]
    hosts: dict[str, Host]
    links: dict[str, LogicalLink]
    connected: bool = True
    attrs: dict[str, Any] = field(default_factory=dict)

    # -- convenience accessors -------------------------------------------

    def ss_links(self) -> Iterator[LogicalLink]:
        return (l for l in self.links.values() if l.kind == SWITCH_SWITCH)

    def host_links(self) -> Iterator[LogicalLink]:
        return (l for l in self.links.values() if l.kind == SWITCH_HOST)

    def num_ss_links(self) -> int:
        return sum(1 for _ in self.ss_links())

    def degree(self, switch_id: str) -> int:
        """Number of link endpoints (switch-switch and host) on a switch."""
        n = 0
        for link in self.links.values():
            for end in link.switch_ends():
                if end.switch == switch_id:
                    n += 1
        return n

    def adjacency(self) -> dict[str, list[tuple[str, str, int, int]]]:
        """Switch-switch adjacency: switch -> [(peer, link id, own port, peer port)].

        Cached; topologies are treated as immutable once assembled.
        """
        cached = getattr(self, "_adjacency", None)
        if cached is not None:
            return cached
        adj: dict[str, list[tuple[str, str, int, int]]] = {s: [] for s in self.switches}
        for link in self.ss_links():
            a, b = link.switch_ends()
            adj[a.switch].append((b.switch, link.id, a.port, b.port))
            adj[b.switch].append((a.switch, link.id, b.port, a.port))
        for entries in adj.values():
            entries.sort()
        self._adjacency = adj
        return adj

    def link_between(self, sw_a: str, sw_b: str) -> LogicalLink | None:
        cached = getattr(self, "_link_pairs", None)
        if cached is None:
            cached = {}
            for link in self.ss_links():
                a, b = link.switch_ends()
                cached.setdefault(frozenset((a.switch, b.switch)), link)
            self._link_pairs = cached
        return cached.get(frozenset((sw_a, sw_b)))

    def hosts_on(self, switch_id: str) -> list[Host]:
        return sorted(
            (h for h in self.hosts.values() if h.attached_switch == switch_id),
            key=lambda h: h.id,
        )

    def port_users(self) -> dict[SwitchPort, list[str]]:
        """Map every referenced switch port to the link ids using it. Cached."""
        cached = getattr(self, "_port_users", None)
        if cached is not None:
            return cached
        users: dict[SwitchPort, list[str]] = {}
        for link in self.links.values():
            for end in link.switch_ends():
                users.setdefault(end, []).append(link.id)
        self._port_users = users
        return users


HOST_LINK_PREFIX = "hl-"


def new_topology(
    name: str,
    switches: Iterable[LogicalSwitch],
    hosts: Iterable[Host],
    links: Iterable[LogicalLink],
    *,
    connected: bool = True,
    attrs: dict[str, Any] | None = None,
) -> LogicalTopology:
    """Assemble a topology, auto-creating one host link per host.

    Raises TopologyError on hard conflicts that make the object incoherent:
    unknown references, out-of-range ports, or a port used twice.  Softer
    invariant violations (parallel edges, disconnection) are left for
    validate() to report.
    """
    sw_map = {s.id: s for s in switches}
    host_map = {h.id: h for h in hosts}
    if len(sw_map) == 0 and len(host_map) > 0:
        raise TopologyError(f"{name}: hosts without any switch")

    link_map: dict[str, LogicalLink] = {}
    for link in links:
        if link.id in link_map:
            raise TopologyError(f"{name}: duplicate link id {link.id!r}")
        link_map[link.id] = link
    for h in sorted(host_map.values(), key=lambda h: h.id):
        hid = f"{HOST_LINK_PREFIX}{h.id}"
        if hid in link_map:
            raise TopologyError(f"{name}: reserved link id {hid!r} already used")
        link_map[hid] = LogicalLink(hid, SwitchPort(h.attached_switch, h.attached_port), h.id)

    topo = LogicalTopology(name, sw_map, host_map, link_map, connected=connected, attrs=dict(attrs or {}))
    _check_hard_invariants(topo)
    return topo


def _check_hard_invariants(topo: LogicalTopology) -> None:
    seen_ports: dict[SwitchPort, str] = {}
    for link in topo.links.values():
        ends = [link.endpoint_a, link.endpoint_b]
        if ends[0] == ends[1]:
            raise TopologyError(f"link {link.id}: identical endpoints")
        if all(isinstance(e, str) for e in ends):
            raise TopologyError(f"link {link.id}: host-to-host links are not supported")
        for end in link.switch_ends():
            sw = topo.switches.get(end.switch)
            if sw is None:
                raise TopologyError(f"link {link.id}: unknown switch {end.switch!r}")
            if not 0 <= end.port < sw.radix:
                raise TopologyError(
                    f"link {link.id}: port {end.port} out of range for radix-{sw.radix} switch {end.switch!r}"
                )
            if end in seen_ports:
                raise TopologyError(
                    f"port {end} used by both link {seen_ports[end]} and link {link.id}"
                )
            seen_ports[end] = link.id
        host = link.host_end()
        if host is not None and host not in topo.hosts:
            raise TopologyError(f"link {link.id}: unknown host {host!r}")
    for h in topo.hosts.values():
        if h.attached_switch not in topo.switches:
            raise TopologyError(f"host {h.id}: unknown switch {h.attached_switch!r}")


@dataclass(frozen=True)
class ValidationFinding:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.subject}: {self.message}"


@dataclass
class ValidationReport:
    findings: list[ValidationFinding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(f) for f in self.findings)


def validate(topo: LogicalTopology) -> ValidationReport:
    """Check every deployability invariant; return all violations found."""
    findings: list[ValidationFinding] = []

    def add(code: str, subject: str, message: str) -> None:
        findings.append(ValidationFinding(code, subject, message))

    # port-level checks (re-run here so hand-built topologies get reports)
    seen_ports: dict[SwitchPort, str] = {}
    for lid in sorted(topo.links):
        link = topo.links[lid]
        for end in link.switch_ends():
            sw = topo.switches.get(end.switch)
            if sw is None:
                add("unknown-switch", lid, f"references missing switch {end.switch!r}")
                continue
            if not 0 <= end.port < sw.radix:
                add("radix-overflow", lid, f"port {end.port} exceeds radix {sw.radix} on {end.switch!r}")
            if end in seen_ports:
                add("port-conflict", lid, f"port {end} also used by link {seen_ports[end]}")
            else:
                seen_ports[end] = lid
        host = link.host_end()
        if host is not None and host not in topo.hosts:
            add("unknown-host", lid, f"references missing host {host!r}")

    # degree vs radix
    for sid in sorted(topo.switches):
        sw = topo.switches[sid]
        deg = topo.degree(sid)
        if deg > sw.radix:
            add("radix-overflow", sid, f"{deg} link endpoints on a radix-{sw.radix} switch")

    # simple switch-switch subgraph
    seen_pairs: dict[tuple[str, str], str] = {}
    for lid in sorted(topo.links):
        link = topo.links[lid]
        if link.kind != SWITCH_SWITCH:
            continue
        a, b = link.switch_ends()
        if a.switch == b.switch:
            add("self-loop", lid, f"both endpoints on switch {a.switch!r}")
            continue
        pair = (min(a.switch, b.switch), max(a.switch, b.switch))
        if pair in seen_pairs:
            add("duplicate-link", lid, f"parallel to link {seen_pairs[pair]} between {pair[0]} and {pair[1]}")
        else:
            seen_pairs[pair] = lid

    # host attachments
    for hid in sorted(topo.hosts):
        h = topo.hosts[hid]
        sw = topo.switches.get(h.attached_switch)
        if sw is None:
            add("unknown-switch", hid, f"attached to missing switch {h.attached_switch!r}")
        elif not 0 <= h.attached_port < sw.radix:
            add("radix-overflow", hid, f"attached port {h.attached_port} exceeds radix {sw.radix}")

    # connectivity over the full (switch + host) graph
    if topo.connected and len(topo.hosts) > 1:
        reach = _reachable_hosts(topo)
        unreachable = sorted(set(topo.hosts) - reach)
        if unreachable:
            add(
                "disconnected",
                topo.name,
                f"hosts {', '.join(unreachable)} unreachable from host {min(topo.hosts)}",
            )

    return ValidationReport(findings)


def _reachable_hosts(topo: LogicalTopology) -> set[str]:
    """Hosts reachable from the lexicographically first host."""
    start = min(topo.hosts)
    adj: dict[str, set[str]] = {}
    for link in topo.links.values():
        names = []
        for end in (link.endpoint_a, link.endpoint_b):
            names.append(end.switch if isinstance(end, SwitchPort) else f"host:{end}")
        adj.setdefault(names[0], set()).add(names[1])
        adj.setdefault(names[1], set()).add(names[0])
    seen = {f"host:{start}"}
    stack = [f"host:{start}"]
    while stack:
        node = stack.pop()
        for nxt in adj.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return {n[5:] for n in seen if n.startswith("host:")}
