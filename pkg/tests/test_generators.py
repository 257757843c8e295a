"""Topology family generators: exact counts and structural properties."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topoproj.generators import gen_dragonfly, gen_fattree, gen_mesh, gen_torus
from topoproj.model import validate


class TestFattree:
    def test_k4_counts(self):
        topo = gen_fattree(4)
        assert len(topo.switches) == 20
        assert len(topo.hosts) == 16
        assert len(topo.links) == 48

    def test_k2_counts(self):
        # 5k^2/4 = 5, k^3/4 = 2 for k=2
        topo = gen_fattree(2)
        assert len(topo.switches) == 5
        assert len(topo.hosts) == 2

    @pytest.mark.parametrize("k", [3, 1, 0, -2])
    def test_rejects_odd_or_nonpositive(self, k):
        with pytest.raises(ValueError):
            gen_fattree(k)

    @pytest.mark.parametrize("k", [2, 4, 6, 8])
    def test_count_formulas(self, k):
        topo = gen_fattree(k)
        assert len(topo.switches) == 5 * k * k // 4
        assert len(topo.hosts) == k**3 // 4
        assert all(sw.radix == k for sw in topo.switches.values())
        assert validate(topo).ok


class TestDragonfly:
    def test_paper_size(self):
        topo = gen_dragonfly(4, 9, 2, 2)
        assert len(topo.switches) == 36
        assert len(topo.hosts) == 72
        per_group = {g: 0 for g in range(9)}
        for (ga, gb), links in topo.attrs["global_links"].items():
            per_group[ga] += len(links)
            per_group[gb] += len(links)
        assert all(n == 8 for n in per_group.values())

    def test_every_group_pair_connected(self):
        topo = gen_dragonfly(4, 9, 2, 2)
        pairs = set(topo.attrs["global_links"])
        assert pairs == {(i, j) for i in range(9) for j in range(i + 1, 9)}

    def test_smallest(self):
        topo = gen_dragonfly(1, 2, 1, 1)
        assert len(topo.switches) == 2
        assert topo.num_ss_links() == 1

    def test_infeasible_wiring(self):
        with pytest.raises(ValueError, match="infeasible global wiring"):
            gen_dragonfly(2, 9, 2)

    def test_radix_and_default_hosts(self):
        topo = gen_dragonfly(3, 4, 2)  # p defaults to h
        assert all(sw.radix == (3 - 1) + 2 + 2 for sw in topo.switches.values())
        assert len(topo.hosts) == 3 * 4 * 2


class TestGrids:
    def test_torus_4x4(self):
        topo = gen_torus([4, 4])
        assert len(topo.switches) == 16
        assert topo.num_ss_links() == 32  # 16 * 4 / 2

    def test_torus_4x4x4(self):
        topo = gen_torus([4, 4, 4])
        assert len(topo.switches) == 64
        assert topo.num_ss_links() == 192  # 64 * 6 / 2

    def test_mesh_2x2(self):
        topo = gen_mesh([2, 2])
        assert len(topo.switches) == 4
        assert topo.num_ss_links() == 4

    @pytest.mark.parametrize("dims", [[4], [2, 2, 2, 2]])
    def test_rejects_bad_dimensionality(self, dims):
        with pytest.raises(ValueError):
            gen_torus(dims)

    def test_torus_rejects_extent_two(self):
        with pytest.raises(ValueError):
            gen_torus([2, 4])
        gen_mesh([2, 4])  # fine for a mesh

    @pytest.mark.parametrize("dims", [[3, 3], [3, 4], [3, 3, 3], [4, 3, 5]])
    def test_torus_degree_transitive(self, dims):
        topo = gen_torus(dims)
        adj = topo.adjacency()
        assert all(len(adj[s]) == 2 * len(dims) for s in topo.switches)


@settings(max_examples=25, deadline=None)
@given(
    st.one_of(
        st.sampled_from([2, 4, 6]).map(lambda k: gen_fattree(k)),
        st.tuples(st.integers(2, 4), st.integers(2, 5), st.integers(1, 2)).map(
            lambda t: gen_dragonfly(t[0], t[1], t[2])
            if t[0] * t[2] >= t[1] - 1
            else gen_dragonfly(t[0], t[0] * t[2] + 1, t[2])
        ),
        st.lists(st.integers(3, 5), min_size=2, max_size=3).map(gen_torus),
        st.lists(st.integers(2, 5), min_size=2, max_size=3).map(gen_mesh),
    )
)
def test_handshake_lemma(topo):
    """Sum of switch degrees equals 2 * ss links + host links."""
    total_degree = sum(topo.degree(s) for s in topo.switches)
    assert total_degree == 2 * topo.num_ss_links() + len(topo.hosts)
    assert validate(topo).ok
