"""Config file parsing, schema errors, and canonical round-trips."""

import pytest

from topoproj.configfile import TopologyConfigError, parse_topology, serialize_topology
from topoproj.generators import gen_fattree, gen_torus

from helpers import pair_topology

MINIMAL = """
name: mini
switches:
  - {id: s0, radix: 4}
  - {id: s1, radix: 4}
hosts:
  - {id: h0, switch: s0, port: 0}
  - {id: h1, switch: s1, port: 0}
links:
  - [s0, 1, s1, 1]
"""


def test_minimal_config():
    topo = parse_topology(MINIMAL)
    assert len(topo.switches) == 2
    assert len(topo.links) == 3


def test_generate_fattree():
    topo = parse_topology("generate: {family: fattree, k: 4}")
    assert len(topo.switches) == 20
    assert len(topo.hosts) == 16
    assert len(topo.links) == 48
    assert topo.attrs["family"] == "fattree"


def test_radix_overflow_names_switch():
    text = MINIMAL.replace("[s0, 1, s1, 1]", "[s0, 5, s1, 1]")
    with pytest.raises(TopologyConfigError, match="radix-4 switch 's0'"):
        parse_topology(text)


def test_duplicate_port_named():
    text = MINIMAL + "  - [s0, 1, s1, 2]\n"
    with pytest.raises(TopologyConfigError, match="s0:1"):
        parse_topology(text)


@pytest.mark.parametrize(
    "text, needle",
    [
        ("switches: {a: 1}", "'switches' must be a list"),
        ("bogus: 3", "unknown key 'bogus'"),
        ("switches:\n  - {id: a}", r"switches\[0\]"),
        ("generate: {family: moebius}", "unknown family"),
        ("generate: {family: fattree, k: 4}\nlinks: []", "mutually exclusive"),
        ("generate: {family: fattree, z: 4}", "not a parameter"),
        ("generate: {family: fattree, k: 3}", "even"),
    ],
)
def test_schema_errors_name_the_offender(text, needle):
    with pytest.raises(TopologyConfigError, match=needle):
        parse_topology(text)


@pytest.mark.parametrize(
    "topo", [pair_topology(), gen_fattree(4), gen_torus([3, 3])], ids=["pair", "ft4", "torus"]
)
def test_roundtrip_is_identity_on_canonical_form(topo):
    text = serialize_topology(topo)
    again = parse_topology(text)
    assert serialize_topology(again) == text
    assert set(again.switches) == set(topo.switches)
    assert set(again.hosts) == set(topo.hosts)
    assert again.num_ss_links() == topo.num_ss_links()


def test_serialization_deterministic():
    topo = gen_fattree(4)
    assert serialize_topology(topo) == serialize_topology(gen_fattree(4))
