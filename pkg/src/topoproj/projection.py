"""Link projection: fix a physical wiring, then map logical links onto it.

The wiring is fixed once (cables between physical ports stay put); every
topology is realized purely by choosing which wiring element carries which
logical link and grouping the resulting ports into sub-switches.  Physical
ports are numbered 1-based; self-links pair adjacent ports (odd, odd+1)
after host and inter-switch allocation.

Reconfiguring to a different topology never touches the wiring: project()
is called again with a fresh allocator.  Co-deploying several topologies
at once shares one allocator so they occupy disjoint wiring elements.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .model import LogicalTopology, SwitchPort
from .partition import PartitionPlan


class ProjectionError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicalSwitch:
    id: str
    num_ports: int
    table_capacity: int = 4096


@dataclass(frozen=True, order=True)
class PhysPort:
    switch: str
    port: int  # 1-based

    def __str__(self) -> str:
        return f"{self.switch}:{self.port}"


@dataclass(frozen=True)
class SelfLink:
    switch: str
    port_a: int
    port_b: int


@dataclass(frozen=True)
class InterLink:
    a: PhysPort
    b: PhysPort


@dataclass
class Wiring:
    """Fixed physical cabling. Part i of every partition lives on switch_ids[i]."""

    switch_ids: tuple[str, ...]
    num_ports: dict[str, int]
    table_capacity: dict[str, int]
    self_links: list[SelfLink]
    inter_links: list[InterLink]
    host_ports: dict[tuple[int, int], PhysPort]  # (part, slot) -> port

    def self_links_on(self, switch: str) -> list[SelfLink]:
        return [sl for sl in self.self_links if sl.switch == switch]

    def inter_links_between(self, sw_a: str, sw_b: str) -> list[InterLink]:
        out = []
        for il in self.inter_links:
            if {il.a.switch, il.b.switch} == {sw_a, sw_b}:
                out.append(il)
        return out

    def host_slots(self, part: int) -> list[tuple[int, PhysPort]]:
        return sorted((slot, p) for (pt, slot), p in self.host_ports.items() if pt == part)


def plan_wiring(
    inventory: Sequence[PhysicalSwitch],
    reservation: Mapping[tuple[int, int], int],
    host_demand: Mapping[int, int],
    self_demand: Mapping[int, int] | None = None,
) -> Wiring:
    """Allocate ports deterministically: hosts first, then inter-switch
    endpoints, then every remaining adjacent pair becomes a self-link.

    Pairing all leftover ports maximizes the self-link pool, which is what
    lets the same wiring host later topologies.  ``self_demand`` (per-part
    self-link counts), when given, is checked up front so an undersized
    switch is reported with its exact shortfall.
    """
    if not inventory:
        raise ProjectionError("empty inventory")
    k = len(inventory)
    for (a, b), n in reservation.items():
        if not (0 <= a < k and 0 <= b < k and a < b):
            raise ProjectionError(f"reservation pair ({a},{b}) out of range for {k} switches")
        if n < 0:
            raise ProjectionError(f"negative reservation for pair ({a},{b})")
    for part in host_demand:
        if not 0 <= part < k:
            raise ProjectionError(f"host demand for unknown part {part}")

    inter_endpoints = [0] * k
    for (a, b), n in reservation.items():
        inter_endpoints[a] += n
        inter_endpoints[b] += n

    cursors = []
    for i, sw in enumerate(inventory):
        fixed = host_demand.get(i, 0) + inter_endpoints[i]
        need = fixed + 2 * (self_demand or {}).get(i, 0)
        if need > sw.num_ports:
            raise ProjectionError(
                f"switch {sw.id!r}: needs {need} ports "
                f"({host_demand.get(i, 0)} host + {inter_endpoints[i]} inter-switch + "
                f"{2 * (self_demand or {}).get(i, 0)} self-link) but has {sw.num_ports}; "
                f"short {need - sw.num_ports}"
            )
        cursors.append(1)

    host_ports: dict[tuple[int, int], PhysPort] = {}
    for i, sw in enumerate(inventory):
        for slot in range(host_demand.get(i, 0)):
            host_ports[(i, slot)] = PhysPort(sw.id, cursors[i])
            cursors[i] += 1

    inter_links: list[InterLink] = []
    for (a, b) in sorted(reservation):
        for _ in range(reservation[(a, b)]):
            pa = PhysPort(inventory[a].id, cursors[a])
            cursors[a] += 1
            pb = PhysPort(inventory[b].id, cursors[b])
            cursors[b] += 1
            inter_links.append(InterLink(pa, pb))

    self_links: list[SelfLink] = []
    for i, sw in enumerate(inventory):
        p = cursors[i]
        while p + 1 <= sw.num_ports:
            self_links.append(SelfLink(sw.id, p, p + 1))
            p += 2

    return Wiring(
        switch_ids=tuple(sw.id for sw in inventory),
        num_ports={sw.id: sw.num_ports for sw in inventory},
        table_capacity={sw.id: sw.table_capacity for sw in inventory},
        self_links=self_links,
        inter_links=inter_links,
        host_ports=host_ports,
    )


@dataclass(frozen=True)
class MappedLink:
    """The wiring element a logical link landed on."""

    kind: str  # "self" | "inter" | "host"
    ends: tuple[PhysPort, ...]


@dataclass
class ProjectionMap:
    topology: str
    link_map: dict[str, MappedLink]
    port_map: dict[SwitchPort, PhysPort]
    subswitches: dict[str, frozenset[PhysPort]]
    host_map: dict[str, PhysPort]


class WiringAllocator:
    """Tracks which wiring elements are taken; shared across co-deployments."""

    def __init__(self, wiring: Wiring) -> None:
        self.wiring = wiring
        self.used_self: set[int] = set()
        self.used_inter: set[int] = set()
        self.used_host: set[tuple[int, int]] = set()
        self._self_by_switch: dict[str, list[int]] = {}
        for idx, sl in enumerate(wiring.self_links):
            self._self_by_switch.setdefault(sl.switch, []).append(idx)
        self._inter_by_pair: dict[tuple[str, str], list[int]] = {}
        for idx, il in enumerate(wiring.inter_links):
            key = tuple(sorted((il.a.switch, il.b.switch)))
            self._inter_by_pair.setdefault(key, []).append(idx)

    def take_self(self, switch: str) -> SelfLink:
        for idx in self._self_by_switch.get(switch, []):
            if idx not in self.used_self:
                self.used_self.add(idx)
                return self.wiring.self_links[idx]
        raise ProjectionError(f"self-links exhausted on switch {switch!r}")

    def take_inter(self, sw_a: str, sw_b: str) -> InterLink:
        key = tuple(sorted((sw_a, sw_b)))
        for idx in self._inter_by_pair.get(key, []):
            if idx not in self.used_inter:
                self.used_inter.add(idx)
                return self.wiring.inter_links[idx]
        raise ProjectionError(f"inter-switch links exhausted between {key[0]!r} and {key[1]!r}")

    def take_host_slot(self, part: int) -> PhysPort:
        for slot, port in self.wiring.host_slots(part):
            if (part, slot) not in self.used_host:
                self.used_host.add((part, slot))
                return port
        raise ProjectionError(f"host ports exhausted on part {part}")


def project(
    topo: LogicalTopology,
    plan: PartitionPlan,
    wiring: Wiring,
    allocator: WiringAllocator | None = None,
) -> ProjectionMap:
    """Assign every logical link a wiring element, lowest free index first,
    and group the resulting physical ports into sub-switches."""
    if plan.num_parts > len(wiring.switch_ids):
        raise ProjectionError(
            f"plan has {plan.num_parts} parts but wiring covers {len(wiring.switch_ids)} switches"
        )
    alloc = allocator if allocator is not None else WiringAllocator(wiring)

    link_map: dict[str, MappedLink] = {}
    port_map: dict[SwitchPort, PhysPort] = {}
    host_map: dict[str, PhysPort] = {}

    for lid in sorted(l.id for l in topo.ss_links()):
        link = topo.links[lid]
        end_a, end_b = link.switch_ends()
        part_a = plan.assignment[end_a.switch]
        part_b = plan.assignment[end_b.switch]
        if part_a == part_b:
            sw = wiring.switch_ids[part_a]
            sl = alloc.take_self(sw)
            pa, pb = PhysPort(sw, sl.port_a), PhysPort(sw, sl.port_b)
            link_map[lid] = MappedLink("self", (pa, pb))
            port_map[end_a] = pa
            port_map[end_b] = pb
        else:
            il = alloc.take_inter(wiring.switch_ids[part_a], wiring.switch_ids[part_b])
            by_switch = {il.a.switch: il.a, il.b.switch: il.b}
            pa = by_switch[wiring.switch_ids[part_a]]
            pb = by_switch[wiring.switch_ids[part_b]]
            link_map[lid] = MappedLink("inter", (il.a, il.b))
            port_map[end_a] = pa
            port_map[end_b] = pb

    for hid in sorted(topo.hosts):
        host = topo.hosts[hid]
        part = plan.assignment[host.attached_switch]
        port = alloc.take_host_slot(part)
        host_map[hid] = port
        attach = SwitchPort(host.attached_switch, host.attached_port)
        link_map[f"hl-{hid}"] = MappedLink("host", (port,))
        port_map[attach] = port

    subswitches: dict[str, frozenset[PhysPort]] = {}
    for lport, pport in port_map.items():
        subswitches.setdefault(lport.switch, set()).add(pport)  # type: ignore[arg-type]
    subswitches = {s: frozenset(ports) for s, ports in subswitches.items()}
    for s, ports in subswitches.items():
        if len({p.switch for p in ports}) > 1:
            raise ProjectionError(f"logical switch {s!r} spans physical switches")

    return ProjectionMap(
        topology=topo.name,
        link_map=link_map,
        port_map=port_map,
        subswitches=subswitches,
        host_map=host_map,
    )


# ---------------------------------------------------------------------------
# feasibility

@dataclass(frozen=True)
class FeasibilityRow:
    subject: str
    demand: int
    supply: int

    @property
    def ok(self) -> bool:
        return self.demand <= self.supply

    @property
    def shortfall(self) -> int:
        return max(0, self.demand - self.supply)


@dataclass
class FeasibilityReport:
    topology: str
    rows: list[FeasibilityRow]
    deltas: list[str]
    plan: PartitionPlan | None = None

    @property
    def feasible(self) -> bool:
        return all(r.ok for r in self.rows)

    def __str__(self) -> str:
        lines = [f"# feasibility topology={self.topology} verdict={'ok' if self.feasible else 'infeasible'}"]
        for r in self.rows:
            state = "ok" if r.ok else f"SHORT {r.shortfall}"
            lines.append(f"{r.subject} : demand={r.demand} supply={r.supply} {state}")
        for d in self.deltas:
            lines.append(f"needs: {d}")
        return "\n".join(lines) + "\n"


def feasibility_check(
    topo: LogicalTopology,
    inventory: Sequence[PhysicalSwitch],
    reservation: Mapping[tuple[int, int], int] | None = None,
    params: "PartitionParams | None" = None,
) -> FeasibilityReport:
    """Demand vs. supply per switch and per pair, with suggested deltas."""
    from .partition import PartitionError, PartitionParams, partition

    if params is None:
        params = PartitionParams(
            num_parts=len(inventory),
            max_ports_per_part=min(sw.num_ports for sw in inventory),
        )
    rows: list[FeasibilityRow] = []
    deltas: list[str] = []
    try:
        plan = partition(topo, params)
    except PartitionError as exc:
        total = sum(topo.degree(s) for s in topo.switches)
        supply = sum(sw.num_ports for sw in inventory)
        rows.append(FeasibilityRow("total ports", total, supply))
        if total > supply:
            deltas.append(f"{total - supply} more physical ports overall ({exc})")
        else:
            deltas.append(str(exc))
        return FeasibilityReport(topo.name, rows, deltas, None)

    usage = plan.part_port_usage()
    for i, sw in enumerate(inventory):
        rows.append(FeasibilityRow(f"switch {sw.id} ports", usage[i], sw.num_ports))
        if usage[i] > sw.num_ports:
            deltas.append(f"switch {sw.id}: {usage[i] - sw.num_ports} more ports")
    if reservation is not None:
        for pair, n in sorted(plan.cut_edges_by_pair.items()):
            have = reservation.get(pair, 0)
            rows.append(FeasibilityRow(f"inter-switch links {pair[0]}-{pair[1]}", n, have))
            if n > have:
                deltas.append(f"pair {pair[0]}-{pair[1]}: {n - have} more inter-switch links")
    return FeasibilityReport(topo.name, rows, deltas, plan)


# ---------------------------------------------------------------------------
# manifests

def format_wiring(wiring: Wiring) -> dict[str, str]:
    """Deployment manifests: one port-role file per switch plus a fiber list."""
    files: dict[str, str] = {}
    fibers = [f"# inter-switch fibers count={len(wiring.inter_links)}"]
    for idx, il in enumerate(wiring.inter_links):
        fibers.append(f"c{idx} {il.a} {il.b}")
    files["fibers.txt"] = "\n".join(fibers) + "\n"

    host_by_port: dict[PhysPort, tuple[int, int]] = {pp: slot for slot, pp in wiring.host_ports.items()}
    inter_by_port: dict[PhysPort, tuple[int, InterLink]] = {}
    for idx, il in enumerate(wiring.inter_links):
        inter_by_port[il.a] = (idx, il)
        inter_by_port[il.b] = (idx, il)
    self_by_port: dict[PhysPort, int] = {}
    for sl in wiring.self_links:
        self_by_port[PhysPort(sl.switch, sl.port_a)] = sl.port_b
        self_by_port[PhysPort(sl.switch, sl.port_b)] = sl.port_a

    for part, sw in enumerate(wiring.switch_ids):
        lines = [
            f"# switch {sw} part={part} ports={wiring.num_ports[sw]} tables={wiring.table_capacity[sw]}"
        ]
        for port in range(1, wiring.num_ports[sw] + 1):
            pp = PhysPort(sw, port)
            if pp in host_by_port:
                pt, slot = host_by_port[pp]
                lines.append(f"{port} host part={pt} slot={slot}")
            elif pp in inter_by_port:
                idx, il = inter_by_port[pp]
                peer = il.b if il.a == pp else il.a
                lines.append(f"{port} inter fiber=c{idx} peer={peer}")
            elif pp in self_by_port:
                lines.append(f"{port} self peer={self_by_port[pp]}")
            else:
                lines.append(f"{port} free")
        files[f"{sw}.ports"] = "\n".join(lines) + "\n"
    return files


def parse_wiring(files: Mapping[str, str]) -> Wiring:
    """Rebuild a Wiring from the manifest files written by format_wiring."""
    switch_meta: list[tuple[int, str, int, int]] = []
    host_ports: dict[tuple[int, int], PhysPort] = {}
    self_pairs: dict[str, set[tuple[int, int]]] = {}
    for name, text in files.items():
        if name == "fibers.txt":
            continue
        lines = text.strip().splitlines()
        head = dict(kv.split("=") for kv in lines[0].split()[3:])
        sw = lines[0].split()[2]
        part = int(head["part"])
        switch_meta.append((part, sw, int(head["ports"]), int(head["tables"])))
        for line in lines[1:]:
            fields = line.split()
            port = int(fields[0])
            role = fields[1]
            kv = dict(f.split("=") for f in fields[2:])
            if role == "host":
                host_ports[(int(kv["part"]), int(kv["slot"]))] = PhysPort(sw, port)
            elif role == "self":
                peer = int(kv["peer"])
                self_pairs.setdefault(sw, set()).add((min(port, peer), max(port, peer)))
    switch_meta.sort()
    inter_links = []
    for line in files["fibers.txt"].strip().splitlines()[1:]:
        _, a, b = line.split()
        sa, pa = a.rsplit(":", 1)
        sb, pb = b.rsplit(":", 1)
        inter_links.append(InterLink(PhysPort(sa, int(pa)), PhysPort(sb, int(pb))))
    self_links = [
        SelfLink(sw, a, b) for sw in sorted(self_pairs) for a, b in sorted(self_pairs[sw])
    ]
    return Wiring(
        switch_ids=tuple(m[1] for m in switch_meta),
        num_ports={m[1]: m[2] for m in switch_meta},
        table_capacity={m[1]: m[3] for m in switch_meta},
        self_links=self_links,
        inter_links=inter_links,
        host_ports=host_ports,
    )


def _projection_body(pm: ProjectionMap) -> str:
    lines = []
    for lid in sorted(pm.link_map):
        ml = pm.link_map[lid]
        ends = " ".join(str(p) for p in ml.ends)
        lines.append(f"link {lid} {ml.kind} {ends}")
    for lport in sorted(pm.port_map):
        lines.append(f"port {lport} {pm.port_map[lport]}")
    for hid in sorted(pm.host_map):
        lines.append(f"host {hid} {pm.host_map[hid]}")
    return "\n".join(lines) + "\n"


def projection_hash(pm: ProjectionMap) -> str:
    return hashlib.sha256(_projection_body(pm).encode()).hexdigest()[:12]


def format_projection(pm: ProjectionMap) -> str:
    head = (
        f"# projection topology={pm.topology} links={len(pm.link_map)} "
        f"hosts={len(pm.host_map)} hash={projection_hash(pm)}"
    )
    return head + "\n" + _projection_body(pm)


def parse_projection(text: str) -> ProjectionMap:
    lines = text.strip().splitlines()
    head = dict(kv.split("=") for kv in lines[0].split()[2:])
    link_map: dict[str, MappedLink] = {}
    port_map: dict[SwitchPort, PhysPort] = {}
    host_map: dict[str, PhysPort] = {}

    def phys(token: str) -> PhysPort:
        sw, p = token.rsplit(":", 1)
        return PhysPort(sw, int(p))

    for line in lines[1:]:
        fields = line.split()
        if fields[0] == "link":
            link_map[fields[1]] = MappedLink(fields[2], tuple(phys(t) for t in fields[3:]))
        elif fields[0] == "port":
            sw, p = fields[1].rsplit(":", 1)
            port_map[SwitchPort(sw, int(p))] = phys(fields[2])
        elif fields[0] == "host":
            host_map[fields[1]] = phys(fields[2])
    subswitches: dict[str, set[PhysPort]] = {}
    for lport, pport in port_map.items():
        subswitches.setdefault(lport.switch, set()).add(pport)
    return ProjectionMap(
        topology=head["topology"],
        link_map=link_map,
        port_map=port_map,
        subswitches={s: frozenset(v) for s, v in subswitches.items()},
        host_map=host_map,
    )
