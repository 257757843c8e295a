"""Rule-driven dataplane simulator.

Physical switches are instantiated with their rule sets and the fixed
wiring; probe frames are injected at host ports and forwarded one physical
switch traversal at a time by the highest-priority matching rule.  The
simulator is structural: forwarding is instantaneous, there is no queuing
or bandwidth model.  It answers whether the projected fabric behaves like
the logical topology (reachability, path correspondence, isolation) and
feeds per-port counters back to adaptive routing.

Several compilations may be installed side by side (co-deployment); the
fabric tracks which installed bundle owns each physical port so isolation
sweeps can flag any frame that strays into a foreign sub-switch.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

from .model import LogicalTopology, SwitchPort
from .projection import PhysPort, ProjectionMap, Wiring, projection_hash
from .routing import Route
from .rules import RuleSet

DEFAULT_TTL = 64

DELIVERED = "delivered"
DROPPED = "dropped"
TTL_EXPIRED = "ttl-expired"


class FabricError(ValueError):
    pass


@dataclass
class Frame:
    src_host: str
    dst_host: str
    tag: int = 0
    ttl: int = DEFAULT_TTL


@dataclass
class DeliveryRecord:
    outcome: str
    trace: list[tuple[str, int, int]]  # (switch, in port, out port)
    delivered_to: str | None = None
    dropped_at: tuple[str, int] | None = None
    final_tag: int = 0

    @property
    def delivered(self) -> bool:
        return self.outcome == DELIVERED


@dataclass
class _Bundle:
    name: str
    projection: ProjectionMap
    hosts: frozenset[str]


class SimFabric:
    """Physical switches loaded with rules, plus the wiring between them."""

    def __init__(self, wiring: Wiring) -> None:
        self.wiring = wiring
        self.rules: dict[str, RuleSet] = {}
        self.counters: dict[PhysPort, int] = {}
        self.wire_of: dict[PhysPort, PhysPort] = {}
        self.host_at: dict[PhysPort, str] = {}
        self.host_port: dict[str, PhysPort] = {}
        self.port_owner: dict[PhysPort, int] = {}
        self.port_subswitch: dict[PhysPort, str] = {}
        self.bundles: list[_Bundle] = []
        for sl in wiring.self_links:
            a, b = PhysPort(sl.switch, sl.port_a), PhysPort(sl.switch, sl.port_b)
            self.wire_of[a] = b
            self.wire_of[b] = a
        for il in wiring.inter_links:
            self.wire_of[il.a] = il.b
            self.wire_of[il.b] = il.a

    # -- construction -----------------------------------------------------

    def install(self, projection: ProjectionMap, rulesets: Mapping[str, RuleSet], name: str | None = None) -> int:
        """Add one compiled topology; ports must not collide with earlier ones."""
        expect = projection_hash(projection)
        for rs in rulesets.values():
            if rs.projection_hash and rs.projection_hash != expect:
                raise FabricError(
                    f"ruleset for {rs.switch_id} was compiled against projection "
                    f"{rs.projection_hash}, fabric has {expect}"
                )
        idx = len(self.bundles)
        ports: set[PhysPort] = set()
        for lsw, group in projection.subswitches.items():
            for p in group:
                if p.switch not in self.wiring.num_ports:
                    raise FabricError(f"projection references unknown switch {p.switch!r}")
                if not 1 <= p.port <= self.wiring.num_ports[p.switch]:
                    raise FabricError(f"projection references unknown port {p}")
                if p in self.port_owner:
                    raise FabricError(f"port {p} already used by bundle {self.bundles[self.port_owner[p]].name}")
                ports.add(p)
                self.port_subswitch[p] = lsw
        for p in ports:
            self.port_owner[p] = idx
        for ml in projection.link_map.values():
            if ml.kind == "self" or ml.kind == "inter":
                a, b = ml.ends
                if self.wire_of.get(a) != b:
                    raise FabricError(f"projection maps a link onto {a}~{b}, not a wiring element")
        for switch_id, rs in rulesets.items():
            for rule in rs.rules:
                for port in (rule.match.in_port, getattr(rule.action, "out_port", None)):
                    if port is not None and not 1 <= port <= self.wiring.num_ports.get(switch_id, 0):
                        raise FabricError(f"rule on {switch_id} references unknown port {port}")
            if switch_id in self.rules:
                merged = self.rules[switch_id]
                for rule in rs.rules:
                    merged.add(rule)
            else:
                self.rules[switch_id] = RuleSet(
                    switch_id, list(rs.rules), projection_hash="", topology=""
                )
        for hid, pport in projection.host_map.items():
            if hid in self.host_port:
                raise FabricError(f"host {hid!r} installed twice")
            self.host_port[hid] = pport
            self.host_at[pport] = hid
        self.bundles.append(_Bundle(name or projection.topology, projection, frozenset(projection.host_map)))
        return idx

    def clone(self) -> "SimFabric":
        """Independent fabric with the same rules and zeroed counters."""
        twin = SimFabric(self.wiring)
        twin.rules = {sw: RuleSet(sw, list(rs.rules)) for sw, rs in self.rules.items()}
        twin.host_at = dict(self.host_at)
        twin.host_port = dict(self.host_port)
        twin.port_owner = dict(self.port_owner)
        twin.port_subswitch = dict(self.port_subswitch)
        twin.bundles = list(self.bundles)
        return twin

    # -- forwarding ---------------------------------------------------------

    def _bump(self, port: PhysPort) -> None:
        self.counters[port] = self.counters.get(port, 0) + 1

    def inject(self, frame: Frame) -> DeliveryRecord:
        for h in (frame.src_host, frame.dst_host):
            if h not in self.host_port:
                raise FabricError(f"{h!r} is not a host of this fabric")
        at = self.host_port[frame.src_host]
        tag = frame.tag
        ttl = frame.ttl
        trace: list[tuple[str, int, int]] = []
        while True:
            ruleset = self.rules.get(at.switch)
            rule = ruleset.lookup(at.port, frame.dst_host, tag) if ruleset else None
            self._bump(at)
            if rule is None or rule.action.kind == "drop":
                return DeliveryRecord(DROPPED, trace, dropped_at=(at.switch, at.port), final_tag=tag)
            out = PhysPort(at.switch, rule.action.out_port)
            trace.append((at.switch, at.port, out.port))
            self._bump(out)
            if rule.action.set_tag is not None:
                tag = rule.action.set_tag
            if out in self.host_at:
                return DeliveryRecord(DELIVERED, trace, delivered_to=self.host_at[out], final_tag=tag)
            peer = self.wire_of.get(out)
            if peer is None:
                return DeliveryRecord(DROPPED, trace, dropped_at=(out.switch, out.port), final_tag=tag)
            ttl -= 1
            if ttl <= 0:
                return DeliveryRecord(TTL_EXPIRED, trace, final_tag=tag)
            at = peer


def load(projection: ProjectionMap, rulesets: Mapping[str, RuleSet], wiring: Wiring) -> SimFabric:
    """Fabric with one compiled topology installed and counters zeroed."""
    fabric = SimFabric(wiring)
    fabric.install(projection, rulesets)
    return fabric


def co_load(wiring: Wiring, bundles: Sequence[tuple[ProjectionMap, Mapping[str, RuleSet]]]) -> SimFabric:
    """Fabric with several topologies installed side by side."""
    fabric = SimFabric(wiring)
    for projection, rulesets in bundles:
        fabric.install(projection, rulesets)
    return fabric


def inject(fabric: SimFabric, frame: Frame) -> DeliveryRecord:
    return fabric.inject(frame)


def read_counters(fabric: SimFabric) -> dict[tuple[str, int], int]:
    return {(p.switch, p.port): n for p, n in sorted(fabric.counters.items())}


def reset_counters(fabric: SimFabric) -> None:
    fabric.counters.clear()


def logical_port_loads(fabric: SimFabric, projection: ProjectionMap) -> dict[tuple[str, int], int]:
    """Physical counters translated back to logical (switch, port) keys.

    Every mapped logical port gets an entry (0 if untouched), which is what
    adaptive routing needs as its complete load picture.
    """
    loads: dict[tuple[str, int], int] = {}
    for lport, pport in projection.port_map.items():
        loads[(lport.switch, lport.port)] = fabric.counters.get(pport, 0)
    return loads


# ---------------------------------------------------------------------------
# sweeps

def reachability_matrix(fabric: SimFabric, hosts: Sequence[str]) -> dict[tuple[str, str], bool]:
    """delivered(inject(i, j)) for every ordered pair; diagonal true by
    convention (no frame is injected for it)."""
    out: dict[tuple[str, str], bool] = {}
    for src in hosts:
        for dst in hosts:
            if src == dst:
                out[(src, dst)] = True
                continue
            record = fabric.inject(Frame(src, dst))
            out[(src, dst)] = record.delivered and record.delivered_to == dst
    return out


@dataclass
class EquivalenceReport:
    topology: str
    pairs: int
    delivered: int
    equivalent: int
    mismatches: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.pairs == self.equivalent

    def __str__(self) -> str:
        lines = [
            f"# equivalence topology={self.topology} pairs={self.pairs} "
            f"delivered={self.delivered} equivalent={self.equivalent} "
            f"verdict={'ok' if self.ok else 'FAIL'}"
        ]
        for src, dst, reason in self.mismatches[:20]:
            lines.append(f"mismatch {src} -> {dst} : {reason}")
        if len(self.mismatches) > 20:
            lines.append(f"... {len(self.mismatches) - 20} more")
        return "\n".join(lines) + "\n"


def equivalence_check(
    fabric: SimFabric,
    topo: LogicalTopology,
    route_fn: Callable[[LogicalTopology, str, str], Route],
) -> EquivalenceReport:
    """Inject every ordered host pair and compare the traversed sub-switch
    sequence with the logical route (one physical traversal per hop)."""
    hosts = sorted(topo.hosts)
    pairs = 0
    delivered = 0
    equivalent = 0
    mismatches: list[tuple[str, str, str]] = []
    for src in hosts:
        for dst in hosts:
            if src == dst:
                continue
            pairs += 1
            route = route_fn(topo, src, dst)
            record = fabric.inject(Frame(src, dst))
            if not record.delivered or record.delivered_to != dst:
                mismatches.append((src, dst, f"{record.outcome} (to {record.delivered_to})"))
                continue
            delivered += 1
            seq = tuple(fabric.port_subswitch.get(PhysPort(sw, pin)) for sw, pin, _ in record.trace)
            want = route.switch_sequence()
            if seq != want:
                mismatches.append((src, dst, f"traversed {seq}, route says {want}"))
                continue
            equivalent += 1
    return EquivalenceReport(topo.name, pairs, delivered, equivalent, mismatches)


@dataclass
class IsolationReport:
    groups: int
    cross_pairs: int
    violations: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        lines = [
            f"# isolation groups={self.groups} cross_pairs={self.cross_pairs} "
            f"verdict={'ok' if self.ok else 'FAIL'}"
        ]
        for src, dst, reason in self.violations[:20]:
            lines.append(f"violation {src} -> {dst} : {reason}")
        return "\n".join(lines) + "\n"


def isolation_check(fabric: SimFabric, groups: Sequence[Iterable[str]]) -> IsolationReport:
    """Cross-group frames must all be dropped, and no frame (cross or
    intra) may ever touch a port owned by another group."""
    group_of: dict[str, int] = {}
    for gi, members in enumerate(groups):
        for h in members:
            group_of[h] = gi

    bundle_group: dict[int, int | None] = {}
    for bi, bundle in enumerate(fabric.bundles):
        members = sorted(h for h in bundle.hosts if h in group_of)
        bundle_group[bi] = group_of[members[0]] if members else None

    def owner_group(port: PhysPort) -> int | None:
        b = fabric.port_owner.get(port)
        return bundle_group.get(b) if b is not None else None

    hosts = sorted(group_of)
    cross = 0
    violations: list[tuple[str, str, str]] = []
    for src in hosts:
        for dst in hosts:
            if src == dst:
                continue
            is_cross = group_of[src] != group_of[dst]
            if is_cross:
                cross += 1
            record = fabric.inject(Frame(src, dst))
            if is_cross and record.delivered:
                violations.append((src, dst, f"cross-group frame delivered to {record.delivered_to}"))
                continue
            for sw, pin, pout in record.trace:
                for port in (PhysPort(sw, pin), PhysPort(sw, pout)):
                    og = owner_group(port)
                    if og is not None and og != group_of[src]:
                        violations.append((src, dst, f"trace touched foreign port {port}"))
                        break
                else:
                    continue
                break
    return IsolationReport(len(groups), cross, violations)


def format_counters(fabric: SimFabric) -> str:
    """Columnar counter dump."""
    lines = ["# counters switch port frames"]
    for (sw, port), n in read_counters(fabric).items():
        lines.append(f"{sw} {port} {n}")
    return "\n".join(lines) + "\n"


def format_reachability(matrix: Mapping[tuple[str, str], bool]) -> str:
    hosts = sorted({h for pair in matrix for h in pair})
    lines = ["# reachability src dst delivered"]
    for src in hosts:
        for dst in hosts:
            lines.append(f"{src} {dst} {1 if matrix.get((src, dst)) else 0}")
    return "\n".join(lines) + "\n"
