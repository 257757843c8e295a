"""Compile a projection plus routes into per-physical-switch flow rules.

Three priority bands, lowest first:

    0   default drop, one rule per used port
    10  forwarding-domain permits: deliver to hosts attached to the ingress
        port's own sub-switch (dst-specific, tag-wildcard)
    100 route rules: (ingress port, dst host, vc tag) -> output port

Every generated rule keeps ingress and egress inside one sub-switch group,
which is what makes co-deployed topologies invisible to each other: a
packet can only leave a sub-switch over the wiring element its logical
switch owns.  VC transitions along a route are realized by an optional
set_tag in the action (rendered as a set_field in the OpenFlow-like text
format); matches alone cannot express a VC change.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .model import SwitchPort
from .projection import PhysPort, PhysicalSwitch, ProjectionMap, projection_hash
from .routing import Route

log = logging.getLogger(__name__)

PRIORITY_DROP = 0
PRIORITY_PERMIT = 10
PRIORITY_ROUTE = 100


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class RuleMatch:
    """None means wildcard."""

    in_port: int | None = None
    dst: str | None = None
    tag: int | None = None

    def covers(self, in_port: int, dst: str, tag: int) -> bool:
        return (
            (self.in_port is None or self.in_port == in_port)
            and (self.dst is None or self.dst == dst)
            and (self.tag is None or self.tag == tag)
        )


@dataclass(frozen=True)
class RuleAction:
    kind: str  # "output" | "drop"
    out_port: int | None = None
    set_tag: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "output" and self.out_port is None:
            raise RuleError("output action needs a port")
        if self.kind == "drop" and (self.out_port is not None or self.set_tag is not None):
            raise RuleError("drop action takes no parameters")


@dataclass(frozen=True)
class FlowRule:
    priority: int
    match: RuleMatch
    action: RuleAction


@dataclass
class RuleSet:
    switch_id: str
    rules: list[FlowRule] = field(default_factory=list)
    projection_hash: str = ""
    topology: str = ""

    def __post_init__(self) -> None:
        self._seen: set[FlowRule] = set(self.rules)
        self._matches: dict[tuple[int, RuleMatch], RuleAction] = {
            (r.priority, r.match): r.action for r in self.rules
        }
        self._index: dict[int | None, list[tuple[tuple[int, int], FlowRule]]] | None = None

    def add(self, rule: FlowRule) -> None:
        """Append unless an identical rule exists; warn on same-priority
        same-match rules with a different action (insertion order wins)."""
        if rule in self._seen:
            return
        key = (rule.priority, rule.match)
        if key in self._matches:
            log.warning(
                "switch %s: rule priority=%d match=%s shadowed by earlier rule",
                self.switch_id,
                rule.priority,
                rule.match,
            )
        else:
            self._matches[key] = rule.action
        self._seen.add(rule)
        self.rules.append(rule)
        self._index = None

    def ordered(self) -> list[FlowRule]:
        """Deterministic total order: priority, then insertion index."""
        return sorted(self.rules, key=lambda r: r.priority)

    def lookup(self, in_port: int, dst: str, tag: int) -> FlowRule | None:
        """Highest priority match; equal priorities break by insertion order."""
        if self._index is None:
            index: dict[int | None, list[tuple[tuple[int, int], FlowRule]]] = {}
            for idx, rule in enumerate(self.rules):
                index.setdefault(rule.match.in_port, []).append(((-rule.priority, idx), rule))
            for bucket in index.values():
                bucket.sort(key=lambda t: t[0])
            self._index = index
        best: tuple[int, int] | None = None
        found = None
        for bucket_key in (in_port, None):
            for prec, rule in self._index.get(bucket_key, ()):
                if best is not None and prec >= best:
                    break  # buckets are precedence-sorted
                if rule.match.covers(in_port, dst, tag):
                    best = prec
                    found = rule
                    break
        return found


def _port_logical_switch(projection: ProjectionMap) -> dict[PhysPort, str]:
    owner: dict[PhysPort, str] = {}
    for lsw, ports in projection.subswitches.items():
        for p in ports:
            owner[p] = lsw
    return owner


def domain_rules(projection: ProjectionMap) -> dict[str, RuleSet]:
    """Forwarding-domain rules: per-port default drop plus local delivery
    to hosts attached to the ingress port's sub-switch."""
    h = projection_hash(projection)
    rulesets: dict[str, RuleSet] = {}

    def rs(switch: str) -> RuleSet:
        if switch not in rulesets:
            rulesets[switch] = RuleSet(switch, projection_hash=h, topology=projection.topology)
        return rulesets[switch]

    hosts_by_lsw: dict[str, list[tuple[str, PhysPort]]] = {}
    owner = _port_logical_switch(projection)
    for hid in sorted(projection.host_map):
        pport = projection.host_map[hid]
        hosts_by_lsw.setdefault(owner[pport], []).append((hid, pport))

    for lsw in sorted(projection.subswitches):
        ports = sorted(projection.subswitches[lsw])
        for p in ports:
            rs(p.switch).add(FlowRule(PRIORITY_DROP, RuleMatch(in_port=p.port), RuleAction("drop")))
        for p in ports:
            for hid, hport in hosts_by_lsw.get(lsw, []):
                rs(p.switch).add(
                    FlowRule(
                        PRIORITY_PERMIT,
                        RuleMatch(in_port=p.port, dst=hid),
                        RuleAction("output", out_port=hport.port),
                    )
                )
    return rulesets


def route_rules(
    routes: Mapping[tuple[str, str], Route] | Iterable[Route], projection: ProjectionMap
) -> dict[str, RuleSet]:
    """Per route hop: match (ingress port, dst, inbound vc tag), output the
    hop's physical out port, rewriting the tag where the VC changes."""
    h = projection_hash(projection)
    rulesets: dict[str, RuleSet] = {}

    def rs(switch: str) -> RuleSet:
        if switch not in rulesets:
            rulesets[switch] = RuleSet(switch, projection_hash=h, topology=projection.topology)
        return rulesets[switch]

    route_iter = (
        [routes[k] for k in sorted(routes)] if isinstance(routes, Mapping) else list(routes)
    )
    for route in route_iter:
        inbound = 0  # hosts inject at VC 0
        for hop in route.hops:
            lin = SwitchPort(hop.switch, hop.in_port)
            lout = SwitchPort(hop.switch, hop.out_port)
            if lin not in projection.port_map or lout not in projection.port_map:
                missing = lin if lin not in projection.port_map else lout
                raise RuleError(f"route hop port {missing} is not mapped by the projection")
            pin = projection.port_map[lin]
            pout = projection.port_map[lout]
            if pin.switch != pout.switch:
                raise RuleError(f"hop at {hop.switch} maps across physical switches")
            set_tag = hop.vc if hop.vc != inbound else None
            rs(pin.switch).add(
                FlowRule(
                    PRIORITY_ROUTE,
                    RuleMatch(in_port=pin.port, dst=route.dst_host, tag=inbound),
                    RuleAction("output", out_port=pout.port, set_tag=set_tag),
                )
            )
            inbound = hop.vc
    return rulesets


def compile_rules(
    projection: ProjectionMap, routes: Mapping[tuple[str, str], Route] | Iterable[Route]
) -> dict[str, RuleSet]:
    """Domain rules plus route rules, merged per physical switch."""
    combined = domain_rules(projection)
    for switch, ruleset in route_rules(routes, projection).items():
        if switch not in combined:
            combined[switch] = RuleSet(
                switch, projection_hash=ruleset.projection_hash, topology=ruleset.topology
            )
        for rule in ruleset.rules:
            combined[switch].add(rule)
    return dict(sorted(combined.items()))


def merge_rules(ruleset: RuleSet) -> RuleSet:
    """Wildcard the dst where every route rule for an (in_port, tag) group
    shares one action.  The forwarding function is unchanged on every
    (ingress, dst, tag) the original route rules matched."""
    groups: dict[tuple[int | None, int | None], set[RuleAction]] = {}
    for rule in ruleset.rules:
        if rule.priority != PRIORITY_ROUTE or rule.match.dst is None:
            continue
        groups.setdefault((rule.match.in_port, rule.match.tag), set()).add(rule.action)

    merged = RuleSet(ruleset.switch_id, projection_hash=ruleset.projection_hash, topology=ruleset.topology)
    emitted: set[tuple[int | None, int | None]] = set()
    for rule in ruleset.rules:
        key = (rule.match.in_port, rule.match.tag)
        if rule.priority == PRIORITY_ROUTE and rule.match.dst is not None and len(groups[key]) == 1:
            if key not in emitted:
                emitted.add(key)
                merged.add(replace(rule, match=replace(rule.match, dst=None)))
        else:
            merged.add(rule)
    return merged


@dataclass(frozen=True)
class CapacityRow:
    switch_id: str
    used: int
    capacity: int

    @property
    def ok(self) -> bool:
        return self.used <= self.capacity


@dataclass
class CapacityReport:
    rows: list[CapacityRow]
    suggestions: list[str]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def __str__(self) -> str:
        lines = [f"# table capacity verdict={'ok' if self.ok else 'overflow'}"]
        for r in self.rows:
            state = "ok" if r.ok else f"OVER by {r.used - r.capacity}"
            lines.append(f"{r.switch_id} : rules={r.used} capacity={r.capacity} {state}")
        lines.extend(self.suggestions)
        return "\n".join(lines) + "\n"


def capacity_check(
    rulesets: Mapping[str, RuleSet], inventory: Sequence[PhysicalSwitch]
) -> CapacityReport:
    """Rule count vs table capacity; on overflow suggest, in order: merge
    entries, split the topology, add switches."""
    caps = {sw.id: sw.table_capacity for sw in inventory}
    rows = []
    over = []
    for switch_id in sorted(rulesets):
        rs = rulesets[switch_id]
        cap = caps.get(switch_id)
        if cap is None:
            raise RuleError(f"ruleset for unknown switch {switch_id!r}")
        rows.append(CapacityRow(switch_id, len(rs.rules), cap))
        if len(rs.rules) > cap:
            over.append(switch_id)
    suggestions = []
    if over:
        for switch_id in over:
            merged = len(merge_rules(rulesets[switch_id]).rules)
            suggestions.append(
                f"suggest: merge entries on {switch_id} "
                f"({len(rulesets[switch_id].rules)} -> {merged} rules)"
            )
        suggestions.append("suggest: split the topology over more parts")
        suggestions.append("suggest: add physical switches")
    return CapacityReport(rows, suggestions)


# ---------------------------------------------------------------------------
# export formats

def host_token(host_id: str) -> str:
    """Deterministic MAC-like rendering of a host id (locally administered)."""
    digest = hashlib.md5(host_id.encode()).hexdigest()[:10]
    return "02:" + ":".join(digest[i : i + 2] for i in range(0, 10, 2))


def _native_lines(rs: RuleSet) -> list[str]:
    lines = [
        f"# rules switch={rs.switch_id} topology={rs.topology} "
        f"projection={rs.projection_hash} count={len(rs.rules)}"
    ]
    for rule in rs.ordered():
        m = rule.match
        dst = m.dst if m.dst is not None else "*"
        tag = m.tag if m.tag is not None else "*"
        port = m.in_port if m.in_port is not None else "*"
        if rule.action.kind == "drop":
            action = "drop"
        elif rule.action.set_tag is not None:
            action = f"set_tag:{rule.action.set_tag},output:{rule.action.out_port}"
        else:
            action = f"output:{rule.action.out_port}"
        lines.append(f"priority={rule.priority} in_port={port} dst={dst} tag={tag} action={action}")
    return lines


def _oftext_lines(rs: RuleSet) -> list[str]:
    lines = [
        f"# oftext switch={rs.switch_id} topology={rs.topology} "
        f"projection={rs.projection_hash} count={len(rs.rules)}"
    ]
    hosts = sorted({r.match.dst for r in rs.rules if r.match.dst is not None})
    for hid in hosts:
        lines.append(f"# dstmap {host_token(hid)} {hid}")
    for rule in rs.ordered():
        fields = [f"priority={rule.priority}"]
        if rule.match.in_port is not None:
            fields.append(f"in_port={rule.match.in_port}")
        if rule.match.dst is not None:
            fields.append(f"dl_dst={host_token(rule.match.dst)}")
        if rule.match.tag is not None:
            fields.append(f"vc={rule.match.tag}")
        if rule.action.kind == "drop":
            fields.append("actions=drop")
        else:
            actions = []
            if rule.action.set_tag is not None:
                actions.append(f"set_field:{rule.action.set_tag}->vc")
            actions.append(f"output:{rule.action.out_port}")
            fields.append("actions=" + ",".join(actions))
        lines.append(",".join(fields))
    return lines


FORMATS = ("native", "oftext")


def export_rules(rulesets: Mapping[str, RuleSet], fmt: str = "native") -> dict[str, str]:
    """Render one deterministic file per switch; returns {filename: text}."""
    if fmt not in FORMATS:
        raise RuleError(f"unknown rule format {fmt!r} (expected one of {FORMATS})")
    out: dict[str, str] = {}
    for switch_id in sorted(rulesets):
        rs = rulesets[switch_id]
        lines = _native_lines(rs) if fmt == "native" else _oftext_lines(rs)
        suffix = "rules" if fmt == "native" else "of.txt"
        out[f"{switch_id}.{suffix}"] = "\n".join(lines) + "\n"
    return out


def parse_rules(text: str) -> RuleSet:
    """Parse either export format back into a RuleSet."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise RuleError("missing header line")
    head_fields = lines[0].split()
    fmt = head_fields[1]
    if fmt not in ("rules", "oftext"):
        raise RuleError(f"unrecognized header {lines[0]!r}")
    head = dict(kv.split("=") for kv in head_fields[2:])
    rs = RuleSet(head["switch"], projection_hash=head.get("projection", ""), topology=head.get("topology", ""))
    dstmap: dict[str, str] = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        if line.startswith("# dstmap "):
            _, _, token, hid = line.split()
            dstmap[token] = hid
            continue
        if line.startswith("#"):
            continue
        rs.rules.append(_parse_rule_line(line, fmt, dstmap))
    return rs


def _parse_rule_line(line: str, fmt: str, dstmap: Mapping[str, str]) -> FlowRule:
    sep = " " if fmt == "rules" else ","
    kv: dict[str, str] = {}
    for fieldtext in line.split(sep):
        if fmt == "oftext" and fieldtext.startswith("actions="):
            kv["actions"] = fieldtext[len("actions=") :]
            continue
        key, value = fieldtext.split("=", 1)
        kv[key] = value

    def opt_int(s: str | None) -> int | None:
        return None if s in (None, "*") else int(s)

    priority = int(kv["priority"])
    if fmt == "rules":
        match = RuleMatch(
            in_port=opt_int(kv.get("in_port")),
            dst=None if kv.get("dst") in (None, "*") else kv["dst"],
            tag=opt_int(kv.get("tag")),
        )
        action_text = kv["action"]
    else:
        dst = kv.get("dl_dst")
        match = RuleMatch(
            in_port=opt_int(kv.get("in_port")),
            dst=dstmap.get(dst, dst) if dst else None,
            tag=opt_int(kv.get("vc")),
        )
        action_text = kv["actions"]

    if action_text == "drop":
        action = RuleAction("drop")
    else:
        out_port = None
        set_tag = None
        for part in action_text.split(","):
            if part.startswith("output:"):
                out_port = int(part.split(":", 1)[1])
            elif part.startswith("set_tag:"):
                set_tag = int(part.split(":", 1)[1])
            elif part.startswith("set_field:"):
                set_tag = int(part[len("set_field:") :].split("->", 1)[0])
            else:
                raise RuleError(f"unknown action {part!r}")
        action = RuleAction("output", out_port=out_port, set_tag=set_tag)
    return FlowRule(priority, match, action)
