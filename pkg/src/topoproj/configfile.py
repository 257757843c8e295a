"""Topology config files: YAML with explicit sections or a generator spec.

Explicit form::

    name: pair
    switches:
      - {id: s0, radix: 4}
      - {id: s1, radix: 4}
    hosts:
      - {id: h0, switch: s0, port: 0}
      - {id: h1, switch: s1, port: 0}
    links:
      - [s0, 1, s1, 1]

Generator form (mutually exclusive with the explicit sections)::

    name: ft4
    generate: {family: fattree, k: 4}

Host links are implied by the ``hosts`` section; the ``links`` section
lists switch-to-switch cables only.  Canonical serialization is sorted by
id so that parse(serialize(t)) reproduces t.
"""

from __future__ import annotations

from typing import Any

import yaml

from . import generators
from .model import Host, LogicalLink, LogicalSwitch, LogicalTopology, SwitchPort, TopologyError, new_topology


class TopologyConfigError(ValueError):
    """A config file violated the schema; the message names the key."""


_GENERATORS: dict[str, tuple[Any, tuple[str, ...]]] = {
    "fattree": (generators.gen_fattree, ("k",)),
    "dragonfly": (generators.gen_dragonfly, ("a", "g", "h", "p")),
    "mesh": (generators.gen_mesh, ("dims",)),
    "torus": (generators.gen_torus, ("dims",)),
}


def parse_topology(text: str) -> LogicalTopology:
    """Parse config text into a validated LogicalTopology."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise TopologyConfigError(f"not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise TopologyConfigError("top level must be a mapping")

    known = {"name", "connected", "generate", "switches", "hosts", "links"}
    for key in doc:
        if key not in known:
            raise TopologyConfigError(f"unknown key {key!r}")

    if "generate" in doc:
        if any(k in doc for k in ("switches", "hosts", "links")):
            raise TopologyConfigError("'generate' is mutually exclusive with explicit switches/hosts/links")
        topo = _run_generator(doc["generate"])
        if "name" in doc:
            topo.name = str(doc["name"])
        return topo

    name = str(doc.get("name", "topology"))
    connected = bool(doc.get("connected", True))

    switches = []
    for i, entry in enumerate(_seq(doc, "switches")):
        if not isinstance(entry, dict) or "id" not in entry or "radix" not in entry:
            raise TopologyConfigError(f"switches[{i}]: need 'id' and 'radix'")
        radix = entry["radix"]
        if not isinstance(radix, int) or radix <= 0:
            raise TopologyConfigError(f"switches[{i}]: radix must be a positive integer")
        switches.append(LogicalSwitch(str(entry["id"]), radix))

    hosts = []
    for i, entry in enumerate(_seq(doc, "hosts")):
        if not isinstance(entry, dict) or not {"id", "switch", "port"} <= set(entry):
            raise TopologyConfigError(f"hosts[{i}]: need 'id', 'switch' and 'port'")
        hosts.append(Host(str(entry["id"]), str(entry["switch"]), int(entry["port"])))

    links = []
    for i, entry in enumerate(_seq(doc, "links")):
        if not (isinstance(entry, list) and len(entry) == 4):
            raise TopologyConfigError(f"links[{i}]: expected [switch, port, switch, port]")
        sa, pa, sb, pb = entry
        links.append(LogicalLink(f"l{i}", SwitchPort(str(sa), int(pa)), SwitchPort(str(sb), int(pb))))

    try:
        return new_topology(name, switches, hosts, links, connected=connected)
    except TopologyError as exc:
        raise TopologyConfigError(str(exc)) from exc


def _seq(doc: dict, key: str) -> list:
    value = doc.get(key, [])
    if value is None:
        return []
    if not isinstance(value, list):
        raise TopologyConfigError(f"{key!r} must be a list")
    return value


def _run_generator(spec: Any) -> LogicalTopology:
    if not isinstance(spec, dict) or "family" not in spec:
        raise TopologyConfigError("generate: need a mapping with a 'family' key")
    family = spec["family"]
    if family not in _GENERATORS:
        raise TopologyConfigError(f"generate.family: unknown family {family!r}")
    fn, params = _GENERATORS[family]
    kwargs = {}
    for key, value in spec.items():
        if key == "family":
            continue
        if key not in params:
            raise TopologyConfigError(f"generate.{key}: not a parameter of {family!r}")
        kwargs[key] = value
    try:
        return fn(**kwargs)
    except (TypeError, ValueError) as exc:
        raise TopologyConfigError(f"generate ({family}): {exc}") from exc


def load_topology(path: str) -> LogicalTopology:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_topology(fh.read())


def serialize_topology(topo: LogicalTopology) -> str:
    """Canonical explicit-form config: deterministic, sorted by id."""
    lines = [f"name: {topo.name}"]
    if not topo.connected:
        lines.append("connected: false")
    lines.append("switches:")
    for sid in sorted(topo.switches):
        lines.append(f"  - {{id: {sid}, radix: {topo.switches[sid].radix}}}")
    lines.append("hosts:")
    for hid in sorted(topo.hosts):
        h = topo.hosts[hid]
        lines.append(f"  - {{id: {hid}, switch: {h.attached_switch}, port: {h.attached_port}}}")
    lines.append("links:")
    ss = sorted(topo.ss_links(), key=lambda l: tuple(sorted((str(e) for e in l.switch_ends()))))
    for link in ss:
        a, b = sorted(link.switch_ends())
        lines.append(f"  - [{a.switch}, {a.port}, {b.switch}, {b.port}]")
    return "\n".join(lines) + "\n"
