"""Command-line front end: check -> deploy -> verify.

Exit codes: 0 success, 1 verification or feasibility failure, 2 usage or
config error.  All output files are deterministic, so re-running a command
with the same config produces byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import pipeline
from .partition import PartitionError
from .pipeline import ConfigError, RunConfig
from .projection import ProjectionError
from .routing import RoutingError, VCAssignment, assert_deadlock_free, build_cdg, router_for
from .rules import FORMATS, capacity_check
from .sim import co_load, equivalence_check, isolation_check, load

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.out is not None:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.scheme is not None:
        cfg.scheme = args.scheme
    if getattr(args, "format", None) is not None:
        cfg.rule_format = args.format
    return cfg


def cmd_check(cfg: RunConfig) -> int:
    reports = pipeline.check_reports(cfg)
    ok = True
    for report in reports:
        print(report, end="")
        ok = ok and report.feasible
    return EXIT_OK if ok else EXIT_FAIL


def cmd_deploy(cfg: RunConfig) -> int:
    result = pipeline.compile_all(cfg)
    files = pipeline.deploy_files(cfg, result)
    pipeline.write_files(cfg.out_dir, files)
    for bundle in result.bundles:
        cap = capacity_check(bundle.rulesets, cfg.inventory)
        print(
            f"deployed {bundle.topology.name}: parts={bundle.plan.num_parts} "
            f"cut={bundle.plan.cut_edges_total} rules={sum(len(r.rules) for r in bundle.rulesets.values())} "
            f"tables={'ok' if cap.ok else 'OVERFLOW'}"
        )
        if not cap.ok:
            print(cap, end="")
            return EXIT_FAIL
    print(f"wrote {len(files)} files under {cfg.out_dir}")
    return EXIT_OK


def _verify_one(cfg: RunConfig, bundle: pipeline.CompiledBundle, wiring, from_disk: bool) -> tuple[bool, str]:
    topo = bundle.topology
    if from_disk:
        disk_wiring, projection, rulesets = pipeline.read_deployed(cfg, topo.name)
        fabric = load(projection, rulesets, disk_wiring)
    else:
        fabric = load(bundle.projection, bundle.rulesets, wiring)
    route_fn = router_for(topo, bundle.scheme)
    eq = equivalence_check(fabric, topo, route_fn)
    cdg = build_cdg(topo, bundle.routes, VCAssignment(num_vcs=2))
    verdict = assert_deadlock_free(cdg)
    lines = [str(eq), f"# cdg topology={topo.name} verdict={verdict}", ""]
    return eq.ok, "\n".join(lines)


def cmd_verify(cfg: RunConfig) -> int:
    result = pipeline.compile_all(cfg)
    have_artifacts = os.path.isdir(os.path.join(cfg.out_dir, "wiring"))
    ok = True
    reports: dict[str, str] = {}
    for bundle in result.bundles:
        good, text = _verify_one(cfg, bundle, result.wiring, have_artifacts)
        ok = ok and good
        reports[os.path.join(bundle.topology.name, "verify.txt")] = text
        print(f"verify {bundle.topology.name}: {'PASS' if good else 'FAIL'}")

    if len(result.bundles) > 1:
        try:
            co = pipeline.compile_all(cfg, shared_allocator=True)
        except (ProjectionError, pipeline.ConfigError) as exc:
            print(f"isolation: skipped (not co-deployable on this wiring: {exc})")
            reports["isolation.txt"] = f"# isolation skipped: {exc}\n"
        else:
            fabric = co_load(co.wiring, [(b.projection, b.rulesets) for b in co.bundles])
            groups = [sorted(b.topology.hosts) for b in co.bundles]
            iso = isolation_check(fabric, groups)
            ok = ok and iso.ok
            reports["isolation.txt"] = str(iso)
            print(f"isolation: {'PASS' if iso.ok else 'FAIL'}")

    pipeline.write_files(cfg.out_dir, reports)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topoproj",
        description="Project logical network topologies onto a few physical switches",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "validate topologies and report deployment feasibility"),
        ("deploy", "write wiring, projection, route and rule manifests"),
        ("verify", "run dataplane equivalence, isolation and deadlock checks"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run config file (YAML)")
        p.add_argument("--out", default=None, help="artifact directory")
        p.add_argument("--seed", type=int, default=None, help="partitioning seed")
        p.add_argument("--scheme", default=None, help="routing scheme override")
        if name in ("deploy", "verify"):
            p.add_argument("--format", choices=FORMATS, default=None, help="rule file format")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("TOPOPROJ_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = _apply_overrides(pipeline.load_run_config(args.config), args)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "deploy":
            return cmd_deploy(cfg)
        return cmd_verify(cfg)
    except (ConfigError, RoutingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProjectionError, PartitionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
