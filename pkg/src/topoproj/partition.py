"""Split a logical topology into per-physical-switch sub-topologies.

The objective balances two terms over the switch-switch subgraph (unit
edge weights):

    alpha * (links cut between parts) + beta * sum over parts 1/internal_i

Minimizing the first keeps inter-switch cabling small; the second term
rewards balanced per-part link usage.  A part with zero internal links
scores as infinity rather than erroring so the search can pass through
such states.  Parts must be non-empty.

partition() is a deterministic heuristic (BFS-seeded greedy growth plus
Kernighan-Lin style move/swap refinement under port-capacity constraints);
brute_force_partition() enumerates every assignment of up to 16 switches
and is the optimality oracle for small instances.

Port capacity uses the identity: ports consumed on a part's switch =
2*internal links + host links + incident cut links = sum of member switch
degrees (host links included).  Capacity is therefore a vertex-weight
budget with weight = degree.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import LogicalTopology

BRUTE_FORCE_LIMIT = 16
_RESTARTS = 8


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class PartitionParams:
    num_parts: int
    alpha: float = 1.0
    beta: float = 1.0
    max_ports_per_part: int = 10**9
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_parts < 1:
            raise ValueError("num_parts must be >= 1")
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ValueError("need alpha, beta >= 0 with alpha + beta > 0")


@dataclass(frozen=True)
class PartitionPlan:
    num_parts: int
    assignment: dict[str, int]
    internal_edges: tuple[int, ...]
    host_links_by_part: tuple[int, ...]
    cut_edges_by_pair: dict[tuple[int, int], int]
    cut_edges_total: int

    def part_port_usage(self) -> tuple[int, ...]:
        """Physical ports each part consumes: 2*internal + hosts + incident cut."""
        usage = [2 * i + h for i, h in zip(self.internal_edges, self.host_links_by_part)]
        for (a, b), n in self.cut_edges_by_pair.items():
            usage[a] += n
            usage[b] += n
        return tuple(usage)

    def switches_in(self, part: int) -> list[str]:
        return sorted(s for s, p in self.assignment.items() if p == part)


def cut_edges(
    topo: LogicalTopology, plan_or_assignment: PartitionPlan | Mapping[str, int]
) -> tuple[dict[tuple[int, int], int], int]:
    """Count switch-switch links crossing parts, per unordered pair and total."""
    assignment = (
        plan_or_assignment.assignment
        if isinstance(plan_or_assignment, PartitionPlan)
        else plan_or_assignment
    )
    by_pair: dict[tuple[int, int], int] = {}
    total = 0
    for link in topo.ss_links():
        a, b = link.switch_ends()
        for end in (a, b):
            if end.switch not in assignment:
                raise PartitionError(f"switch {end.switch!r} not assigned to any part")
        pa, pb = assignment[a.switch], assignment[b.switch]
        if pa != pb:
            pair = (min(pa, pb), max(pa, pb))
            by_pair[pair] = by_pair.get(pair, 0) + 1
            total += 1
    return by_pair, total


def make_plan(topo: LogicalTopology, assignment: Mapping[str, int], num_parts: int | None = None) -> PartitionPlan:
    """Derive all plan counters from an assignment."""
    missing = sorted(set(topo.switches) - set(assignment))
    if missing:
        raise PartitionError(f"switches not assigned: {', '.join(missing)}")
    k = num_parts if num_parts is not None else (max(assignment.values(), default=-1) + 1)
    internal = [0] * k
    hostc = [0] * k
    for link in topo.ss_links():
        a, b = link.switch_ends()
        pa, pb = assignment[a.switch], assignment[b.switch]
        if pa == pb:
            internal[pa] += 1
    for h in topo.hosts.values():
        hostc[assignment[h.attached_switch]] += 1
    by_pair, total = cut_edges(topo, assignment)
    return PartitionPlan(
        num_parts=k,
        assignment=dict(sorted(assignment.items())),
        internal_edges=tuple(internal),
        host_links_by_part=tuple(hostc),
        cut_edges_by_pair=dict(sorted(by_pair.items())),
        cut_edges_total=total,
    )


def objective(topo: LogicalTopology, plan: PartitionPlan, params: PartitionParams) -> float:
    """alpha * total cut + beta * sum of reciprocal internal-edge counts."""
    if params.beta > 0 and any(i == 0 for i in plan.internal_edges):
        return math.inf
    balance = sum(1.0 / i for i in plan.internal_edges) if params.beta > 0 else 0.0
    return params.alpha * plan.cut_edges_total + params.beta * balance


# ---------------------------------------------------------------------------
# heuristic search

def _weights(topo: LogicalTopology) -> dict[str, int]:
    return {s: topo.degree(s) for s in topo.switches}


def _adj_counts(topo: LogicalTopology) -> dict[str, dict[str, int]]:
    adj: dict[str, dict[str, int]] = {s: {} for s in topo.switches}
    for link in topo.ss_links():
        a, b = link.switch_ends()
        adj[a.switch][b.switch] = adj[a.switch].get(b.switch, 0) + 1
        adj[b.switch][a.switch] = adj[b.switch].get(a.switch, 0) + 1
    return adj


def _score(assignment: Mapping[str, int], adj: Mapping[str, Mapping[str, int]], k: int, params: PartitionParams) -> float:
    internal = [0] * k
    cut = 0
    for v, pv in assignment.items():
        for u, n in adj[v].items():
            if u > v:
                continue
            if assignment[u] == pv:
                internal[pv] += n
            else:
                cut += n
    if params.beta > 0 and any(i == 0 for i in internal):
        return math.inf
    balance = sum(1.0 / i for i in internal) if params.beta > 0 else 0.0
    return params.alpha * cut + params.beta * balance


def _grow(
    order: Sequence[str],
    seeds: Sequence[str],
    adj: Mapping[str, Mapping[str, int]],
    weight: Mapping[str, int],
    cap: int,
) -> dict[str, int] | None:
    """Grow parts from seed vertices, attaching the best-connected frontier vertex."""
    k = len(seeds)
    assignment: dict[str, int] = {}
    usage = [0] * k
    for p, s in enumerate(seeds):
        if weight[s] > cap:
            return None
        assignment[s] = p
        usage[p] = weight[s]
    remaining = [v for v in order if v not in assignment]
    while remaining:
        part = min(range(k), key=lambda p: (usage[p], p))
        # best frontier vertex for this part: most edges into it, lowest id
        best = min(
            remaining,
            key=lambda v: (-sum(n for u, n in adj[v].items() if assignment.get(u) == part), v),
        )
        for p in [part] + [q for q in sorted(range(k), key=lambda q: (usage[q], q)) if q != part]:
            if usage[p] + weight[best] <= cap:
                assignment[best] = p
                usage[p] += weight[best]
                break
        else:
            return None
        remaining.remove(best)
    return assignment


class _MoveState:
    """Incremental objective evaluation for move/swap local search."""

    def __init__(
        self,
        assignment: dict[str, int],
        adj: Mapping[str, Mapping[str, int]],
        weight: Mapping[str, int],
        k: int,
        params: PartitionParams,
    ) -> None:
        self.asg = assignment
        self.adj = adj
        self.weight = weight
        self.k = k
        self.params = params
        self.internal = [0] * k
        self.cut = 0
        self.usage = [0] * k
        self.size = [0] * k
        for v, p in assignment.items():
            self.usage[p] += weight[v]
            self.size[p] += 1
        for v, pv in assignment.items():
            for u, n in adj[v].items():
                if u > v:
                    continue
                if assignment[u] == pv:
                    self.internal[pv] += n
                else:
                    self.cut += n

    def score(self) -> float:
        p = self.params
        if p.beta > 0 and any(i == 0 for i in self.internal):
            return math.inf
        balance = sum(1.0 / i for i in self.internal) if p.beta > 0 else 0.0
        return p.alpha * self.cut + p.beta * balance

    def _edge_counts(self, v: str) -> dict[int, int]:
        e: dict[int, int] = {}
        for u, n in self.adj[v].items():
            p = self.asg[u]
            e[p] = e.get(p, 0) + n
        return e

    def apply_move(self, v: str, b: int) -> None:
        a = self.asg[v]
        e = self._edge_counts(v)
        self.internal[a] -= e.get(a, 0)
        self.internal[b] += e.get(b, 0)
        self.cut += e.get(a, 0) - e.get(b, 0)
        self.usage[a] -= self.weight[v]
        self.usage[b] += self.weight[v]
        self.size[a] -= 1
        self.size[b] += 1
        self.asg[v] = b

def _refine(
    assignment: dict[str, int],
    adj: Mapping[str, Mapping[str, int]],
    weight: Mapping[str, int],
    k: int,
    cap: int,
    params: PartitionParams,
) -> dict[str, int]:
    """Move/swap local search; strictly improving steps only."""
    state = _MoveState(dict(assignment), adj, weight, k, params)
    current = state.score()
    vertices = sorted(assignment)

    def try_move(v: str, b: int) -> float:
        a = state.asg[v]
        state.apply_move(v, b)
        s = state.score()
        state.apply_move(v, a)
        return s

    for _ in range(4 * len(vertices)):
        best_move = None  # (score, kind, payload)
        for v in vertices:
            a = state.asg[v]
            if state.size[a] == 1:
                continue
            for b in range(k):
                if b == a or state.usage[b] + weight[v] > cap:
                    continue
                s = try_move(v, b)
                if s < current - 1e-12 and (best_move is None or s < best_move[0] - 1e-12):
                    best_move = (s, "move", (v, b))
        if best_move is None:
            boundary = [v for v in vertices if any(state.asg[u] != state.asg[v] for u in adj[v])]
            for i, v in enumerate(boundary):
                for u in boundary[i + 1 :]:
                    a, b = state.asg[v], state.asg[u]
                    if a == b:
                        continue
                    if (
                        state.usage[b] - weight[u] + weight[v] > cap
                        or state.usage[a] - weight[v] + weight[u] > cap
                    ):
                        continue
                    state.apply_move(v, b)
                    state.apply_move(u, a)
                    s = state.score()
                    state.apply_move(u, b)
                    state.apply_move(v, a)
                    if s < current - 1e-12 and (best_move is None or s < best_move[0] - 1e-12):
                        best_move = (s, "swap", (v, u))
        if best_move is None:
            break
        current, kind, payload = best_move
        if kind == "move":
            v, b = payload
            state.apply_move(v, b)
        else:
            v, u = payload
            a, b = state.asg[v], state.asg[u]
            state.apply_move(v, b)
            state.apply_move(u, a)
    return state.asg


def _chunk_assignment(order: Sequence[str], k: int) -> dict[str, int]:
    n = len(order)
    out: dict[str, int] = {}
    base, extra = divmod(n, k)
    idx = 0
    for p in range(k):
        take = base + (1 if p < extra else 0)
        for v in order[idx : idx + take]:
            out[v] = p
        idx += take
    return out


def _bfs_spread_seeds(order: Sequence[str], adj: Mapping[str, Mapping[str, int]], k: int) -> list[str]:
    """Pick k mutually distant seed vertices (BFS eccentricity heuristic)."""
    seeds = [order[0]]
    while len(seeds) < k:
        dist = {s: 0 for s in seeds}
        frontier = list(seeds)
        while frontier:
            nxt = []
            for v in frontier:
                for u in adj[v]:
                    if u not in dist:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
            frontier = nxt
        candidates = [v for v in order if v not in seeds]
        far = max(candidates, key=lambda v: (dist.get(v, -1), v))
        seeds.append(far)
    return seeds


def partition(topo: LogicalTopology, params: PartitionParams) -> PartitionPlan:
    """Deterministic heuristic partition under per-part port capacity."""
    order = sorted(topo.switches)
    if not order:
        raise PartitionError("empty topology")
    k = params.num_parts
    if k > len(order):
        raise PartitionError(f"cannot split {len(order)} switches into {k} non-empty parts")
    weight = _weights(topo)
    cap = params.max_ports_per_part
    if sum(weight.values()) > k * cap:
        raise PartitionError(
            f"infeasible capacity: total port demand {sum(weight.values())} exceeds "
            f"{k} parts x {cap} ports"
        )
    adj = _adj_counts(topo)

    if k == 1:
        return make_plan(topo, {v: 0 for v in order}, 1)

    candidates: list[dict[str, int]] = []
    chunk = _chunk_assignment(order, k)
    if max(_usage_of(chunk, weight, k)) <= cap:
        candidates.append(chunk)
        candidates.append(_refine(chunk, adj, weight, k, cap, params))
    grown = _grow(order, _bfs_spread_seeds(order, adj, k), adj, weight, cap)
    if grown is not None:
        candidates.append(_refine(grown, adj, weight, k, cap, params))
    for r in range(_RESTARTS):
        rng = random.Random(params.seed * 1000003 + r)
        seeds = rng.sample(order, k)
        grown = _grow(order, sorted(seeds), adj, weight, cap)
        if grown is not None:
            candidates.append(_refine(grown, adj, weight, k, cap, params))
    if not candidates:
        raise PartitionError("no capacity-feasible assignment found")

    def rank(asg: dict[str, int]) -> tuple[float, tuple[int, ...]]:
        return (_score(asg, adj, k, params), tuple(asg[v] for v in order))

    best = min(candidates, key=rank)
    best = _canonical_labels(best, order)
    plan = make_plan(topo, best, k)
    if max(plan.part_port_usage()) > cap:
        raise PartitionError("no capacity-feasible assignment found")
    return plan


def _usage_of(assignment: Mapping[str, int], weight: Mapping[str, int], k: int) -> list[int]:
    usage = [0] * k
    for v, p in assignment.items():
        usage[p] += weight[v]
    return usage


def _canonical_labels(assignment: Mapping[str, int], order: Sequence[str]) -> dict[str, int]:
    """Relabel parts in first-use order so equivalent plans compare equal."""
    relabel: dict[int, int] = {}
    out: dict[str, int] = {}
    for v in order:
        p = assignment[v]
        if p not in relabel:
            relabel[p] = len(relabel)
        out[v] = relabel[p]
    return out


# ---------------------------------------------------------------------------
# exhaustive oracle

def brute_force_partition(topo: LogicalTopology, params: PartitionParams) -> PartitionPlan:
    """Globally optimal plan by enumeration; |switches| <= 16.

    Only canonical assignments (parts numbered in first-use order) are
    enumerated, which is exactly the set of lexicographically-smallest
    representatives, so the tie-break falls out of enumeration order.
    """
    order = sorted(topo.switches)
    n = len(order)
    if n == 0:
        raise PartitionError("empty topology")
    if n > BRUTE_FORCE_LIMIT:
        raise PartitionError(f"instance too large for enumeration: {n} > {BRUTE_FORCE_LIMIT}")
    k = params.num_parts
    if k > n:
        raise PartitionError(f"cannot split {n} switches into {k} non-empty parts")
    weight = _weights(topo)
    adj = _adj_counts(topo)
    cap = params.max_ports_per_part

    best_score = math.inf
    best: tuple[int, ...] | None = None
    asg = [0] * n
    index = {v: i for i, v in enumerate(order)}
    usage = [0] * k

    def recurse(i: int, used: int) -> None:
        nonlocal best_score, best
        if i == n:
            if used < k:
                return
            assignment = {order[j]: asg[j] for j in range(n)}
            s = _score(assignment, adj, k, params)
            if s < best_score - 1e-12:
                best_score = s
                best = tuple(asg)
            return
        if used + (n - i) < k:
            return  # not enough vertices left to populate all parts
        v = order[i]
        top = min(used + 1, k)
        for p in range(top):
            if usage[p] + weight[v] > cap:
                continue
            asg[i] = p
            usage[p] += weight[v]
            recurse(i + 1, max(used, p + 1))
            usage[p] -= weight[v]

    recurse(0, 0)
    if best is None:
        raise PartitionError("no capacity-feasible assignment found")
    return make_plan(topo, {order[i]: best[i] for i in range(n)}, k)


def reserve_inter_switch_links(plans: Iterable[PartitionPlan]) -> dict[tuple[int, int], int]:
    """Per part pair, the maximum cut over all plans: the cable reservation
    that lets one physical wiring serve every topology."""
    plans = list(plans)
    if not plans:
        return {}
    parts = {p.num_parts for p in plans}
    if len(parts) > 1:
        raise PartitionError(f"plans disagree on part count: {sorted(parts)}")
    out: dict[tuple[int, int], int] = {}
    for plan in plans:
        for pair, n in plan.cut_edges_by_pair.items():
            out[pair] = max(out.get(pair, 0), n)
    return dict(sorted(out.items()))


def format_plan(topo: LogicalTopology, plan: PartitionPlan, params: PartitionParams | None = None) -> str:
    """Deterministic report: assignment, per-part budgets, per-pair cuts."""
    lines = [
        f"# partition topology={topo.name} parts={plan.num_parts} "
        f"cut={plan.cut_edges_total}"
    ]
    usage = plan.part_port_usage()
    for p in range(plan.num_parts):
        members = ",".join(plan.switches_in(p))
        lines.append(
            f"part {p} : internal={plan.internal_edges[p]} hosts={plan.host_links_by_part[p]} "
            f"ports={usage[p]} switches={members}"
        )
    for (a, b), n in sorted(plan.cut_edges_by_pair.items()):
        lines.append(f"cut {a}-{b} : {n}")
    for sw in sorted(plan.assignment):
        lines.append(f"assign {sw} {plan.assignment[sw]}")
    return "\n".join(lines) + "\n"
