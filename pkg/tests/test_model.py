"""Topology model invariants and validation findings."""

import pytest

from topoproj.model import (
    Host,
    LogicalLink,
    LogicalSwitch,
    LogicalTopology,
    SwitchPort,
    TopologyError,
    new_topology,
    validate,
)

from helpers import pair_topology, ring_topology


def test_pair_topology_counts():
    topo = pair_topology()
    assert len(topo.switches) == 2
    assert len(topo.hosts) == 2
    assert len(topo.links) == 3  # one cable plus two implied host links
    assert topo.num_ss_links() == 1


def test_degree_counts_host_links():
    topo = pair_topology()
    assert topo.degree("s0") == 2  # host plus cable


def test_port_conflict_rejected():
    switches = [LogicalSwitch("a", 2), LogicalSwitch("b", 2)]
    links = [
        LogicalLink("l0", SwitchPort("a", 0), SwitchPort("b", 0)),
        LogicalLink("l1", SwitchPort("a", 0), SwitchPort("b", 1)),
    ]
    with pytest.raises(TopologyError, match="port a:0"):
        new_topology("bad", switches, [], links)


def test_radix_overflow_rejected():
    switches = [LogicalSwitch("a", 4), LogicalSwitch("b", 4)]
    links = [LogicalLink("l0", SwitchPort("a", 5), SwitchPort("b", 0))]
    with pytest.raises(TopologyError, match="radix-4"):
        new_topology("bad", switches, [], links)


def test_host_port_collision_with_link_rejected():
    switches = [LogicalSwitch("a", 2), LogicalSwitch("b", 2)]
    hosts = [Host("h0", "a", 0)]
    links = [LogicalLink("l0", SwitchPort("a", 0), SwitchPort("b", 0))]
    with pytest.raises(TopologyError):
        new_topology("bad", switches, hosts, links)


def test_validate_generator_output_clean():
    assert validate(ring_topology(4)).ok


def test_validate_reports_duplicate_link():
    switches = {s.id: s for s in (LogicalSwitch("a", 4), LogicalSwitch("b", 4))}
    links = {
        "l0": LogicalLink("l0", SwitchPort("a", 0), SwitchPort("b", 0)),
        "l1": LogicalLink("l1", SwitchPort("a", 1), SwitchPort("b", 1)),
    }
    topo = LogicalTopology("dup", switches, {}, links)
    report = validate(topo)
    assert not report.ok
    assert any(f.code == "duplicate-link" and f.subject == "l1" for f in report.findings)


def test_validate_reports_disconnection():
    a = pair_topology()
    b = pair_topology()
    switches = dict(a.switches)
    switches.update({f"x{k}": LogicalSwitch(f"x{k}", 4) for k in range(2)})
    links = dict(a.links)
    links["far"] = LogicalLink("far", SwitchPort("x0", 0), SwitchPort("x1", 0))
    hosts = dict(a.hosts)
    hosts["h9"] = Host("h9", "x0", 1)
    links["hl-h9"] = LogicalLink("hl-h9", SwitchPort("x0", 1), "h9")
    topo = LogicalTopology("split", switches, hosts, links, connected=True)
    report = validate(topo)
    assert any(f.code == "disconnected" for f in report.findings)
    topo.connected = False
    assert not any(f.code == "disconnected" for f in validate(topo).findings)


def test_validate_reports_self_loop():
    switches = {"a": LogicalSwitch("a", 4)}
    links = {"l0": LogicalLink("l0", SwitchPort("a", 0), SwitchPort("a", 1))}
    report = validate(LogicalTopology("loop", switches, {}, links))
    assert any(f.code == "self-loop" for f in report.findings)
