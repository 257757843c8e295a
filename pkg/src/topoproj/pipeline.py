"""End-to-end compilation: topologies -> partition -> wiring -> projection
-> routes -> rules, plus the artifact files the CLI writes.

The wiring is planned once for the whole topology set: inter-switch links
are reserved at the per-pair maximum over all partitions, host slots and
self-links at the per-part maximum, so any listed topology can be loaded
onto the same cabling later without rewiring.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any

import yaml

from .configfile import TopologyConfigError, load_topology, parse_topology
from .model import LogicalTopology, validate
from .partition import PartitionParams, PartitionPlan, format_plan, partition, reserve_inter_switch_links
from .projection import (
    FeasibilityReport,
    PhysicalSwitch,
    ProjectionMap,
    Wiring,
    WiringAllocator,
    feasibility_check,
    format_projection,
    format_wiring,
    parse_projection,
    parse_wiring,
    plan_wiring,
    project,
)
from .routing import Route, all_pair_routes, format_routes, router_for, scheme_for
from .rules import RuleSet, compile_rules, export_rules, parse_rules


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """One pipeline run: topology sources, inventory, knobs."""

    topologies: list[dict[str, Any]]
    inventory: list[PhysicalSwitch]
    alpha: float = 1.0
    beta: float = 1.0
    seed: int = 0
    scheme: str = "auto"
    rule_format: str = "native"
    out_dir: str = "out"

    def partition_params(self) -> PartitionParams:
        return PartitionParams(
            num_parts=len(self.inventory),
            alpha=self.alpha,
            beta=self.beta,
            max_ports_per_part=min(sw.num_ports for sw in self.inventory),
            seed=self.seed,
        )


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path} is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    topo_entries = doc.get("topologies")
    if not isinstance(topo_entries, list) or not topo_entries:
        raise ConfigError(f"{path}: 'topologies' must be a non-empty list")
    for i, entry in enumerate(topo_entries):
        if not isinstance(entry, dict) or not ({"file", "generate"} & set(entry)):
            raise ConfigError(f"{path}: topologies[{i}] needs 'file' or 'generate'")

    inv = doc.get("inventory")
    if not isinstance(inv, dict) or "switches" not in inv:
        raise ConfigError(f"{path}: 'inventory' needs at least a 'switches' count")
    count = int(inv["switches"])
    if count < 1:
        raise ConfigError(f"{path}: inventory.switches must be >= 1")
    ports = int(inv.get("ports", 64))
    tables = int(inv.get("table_capacity", 4096))
    inventory = [PhysicalSwitch(f"p{i}", ports, tables) for i in range(count)]

    part = doc.get("partition", {}) or {}
    run = RunConfig(
        topologies=topo_entries,
        inventory=inventory,
        alpha=float(part.get("alpha", 1.0)),
        beta=float(part.get("beta", 1.0)),
        seed=int(part.get("seed", 0)),
        scheme=str((doc.get("routing", {}) or {}).get("scheme", "auto")),
        rule_format=str(doc.get("format", "native")),
        out_dir=str(doc.get("output", "out")),
    )
    run._config_dir = os.path.dirname(os.path.abspath(path))  # type: ignore[attr-defined]
    return run


def load_topologies(cfg: RunConfig) -> list[tuple[LogicalTopology, str]]:
    """Resolve every topology entry to (topology, scheme name)."""
    out = []
    base = getattr(cfg, "_config_dir", ".")
    for i, entry in enumerate(cfg.topologies):
        try:
            if "file" in entry:
                p = entry["file"]
                topo = load_topology(p if os.path.isabs(p) else os.path.join(base, p))
            else:
                topo = parse_topology(yaml.safe_dump({"generate": entry["generate"]}))
        except (OSError, TopologyConfigError) as exc:
            raise ConfigError(f"topologies[{i}]: {exc}") from exc
        if "name" in entry:
            topo.name = str(entry["name"])
        scheme = scheme_for(topo, str(entry.get("scheme", cfg.scheme)))
        out.append((topo, scheme))
    names = [t.name for t, _ in out]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate topology names: {names}")
    return out


@dataclass
class CompiledBundle:
    topology: LogicalTopology
    scheme: str
    plan: PartitionPlan
    projection: ProjectionMap
    routes: dict[tuple[str, str], Route]
    rulesets: dict[str, RuleSet]


@dataclass
class DeployResult:
    wiring: Wiring
    bundles: list[CompiledBundle]
    reservation: dict[tuple[int, int], int]


def compile_all(cfg: RunConfig, shared_allocator: bool = False) -> DeployResult:
    """Partition every topology, size one wiring for all of them, then
    project, route and compile rules per topology.

    With shared_allocator the topologies are packed onto disjoint wiring
    elements (co-deployment); otherwise each projection starts from a free
    wiring, which is the reconfiguration-in-place view.
    """
    entries = load_topologies(cfg)
    params = cfg.partition_params()
    plans = []
    for topo, _ in entries:
        report = validate(topo)
        if not report.ok:
            raise ConfigError(f"{topo.name} failed validation:\n{report}")
        plans.append(partition(topo, params))

    # Reconfiguration view: size every pool at the max any one topology
    # needs.  Co-deployment view: the topologies coexist, so pools add up.
    def agg(values) -> int:
        vals = list(values)
        return sum(vals) if shared_allocator else max(vals)

    k = len(cfg.inventory)
    if shared_allocator:
        pairs = sorted({p for plan in plans for p in plan.cut_edges_by_pair})
        reservation = {
            pair: sum(plan.cut_edges_by_pair.get(pair, 0) for plan in plans) for pair in pairs
        }
    else:
        reservation = reserve_inter_switch_links(plans)
    host_demand = {
        part: agg(plan.host_links_by_part[part] for plan in plans) for part in range(k)
    }
    self_demand = {
        part: agg(plan.internal_edges[part] for plan in plans) for part in range(k)
    }
    wiring = plan_wiring(cfg.inventory, reservation, host_demand, self_demand)

    allocator = WiringAllocator(wiring) if shared_allocator else None
    bundles = []
    for (topo, scheme), plan in zip(entries, plans):
        projection = project(topo, plan, wiring, allocator)
        routes = all_pair_routes(topo, router_for(topo, scheme))
        rulesets = compile_rules(projection, routes)
        bundles.append(CompiledBundle(topo, scheme, plan, projection, routes, rulesets))
    return DeployResult(wiring, bundles, dict(reservation))


def deploy_files(cfg: RunConfig, result: DeployResult) -> dict[str, str]:
    """All artifact files for a deployment, as {relative path: text}."""
    files: dict[str, str] = {}
    for name, text in format_wiring(result.wiring).items():
        files[os.path.join("wiring", name)] = text
    for bundle in result.bundles:
        d = bundle.topology.name
        files[os.path.join(d, "partition.txt")] = format_plan(bundle.topology, bundle.plan)
        files[os.path.join(d, "projection.txt")] = format_projection(bundle.projection)
        files[os.path.join(d, "routes.txt")] = format_routes(bundle.topology, bundle.routes, bundle.scheme)
        for name, text in export_rules(bundle.rulesets, cfg.rule_format).items():
            files[os.path.join(d, "rules", name)] = text
    return files


def write_files(out_dir: str, files: dict[str, str]) -> None:
    for rel, text in sorted(files.items()):
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_deployed(cfg: RunConfig, topo_name: str) -> tuple[Wiring, ProjectionMap, dict[str, RuleSet]]:
    """Load the on-disk artifacts for one topology (tamper-detectable path)."""
    wiring_dir = os.path.join(cfg.out_dir, "wiring")
    texts = {}
    for name in sorted(os.listdir(wiring_dir)):
        with open(os.path.join(wiring_dir, name), "r", encoding="utf-8") as fh:
            texts[name] = fh.read()
    wiring = parse_wiring(texts)
    with open(os.path.join(cfg.out_dir, topo_name, "projection.txt"), "r", encoding="utf-8") as fh:
        projection = parse_projection(fh.read())
    rulesets: dict[str, RuleSet] = {}
    rules_dir = os.path.join(cfg.out_dir, topo_name, "rules")
    for name in sorted(os.listdir(rules_dir)):
        with open(os.path.join(rules_dir, name), "r", encoding="utf-8") as fh:
            rs = parse_rules(fh.read())
        rulesets[rs.switch_id] = rs
    return wiring, projection, rulesets


def check_reports(cfg: RunConfig) -> list[FeasibilityReport]:
    """validate + partition + feasibility for every topology."""
    entries = load_topologies(cfg)
    params = cfg.partition_params()
    reports = []
    for topo, _ in entries:
        vreport = validate(topo)
        if not vreport.ok:
            raise ConfigError(f"{topo.name} failed validation:\n{vreport}")
        reports.append(feasibility_check(topo, cfg.inventory, params=params))
    return reports
