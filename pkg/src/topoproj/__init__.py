"""topoproj: build logical network topologies on a handful of physical
switches by projecting logical links onto fixed cabling, compile the flow
rules that carve each switch into sub-switches, and verify the result with
a rule-driven dataplane simulator."""

from .configfile import TopologyConfigError, load_topology, parse_topology, serialize_topology
from .generators import gen_dragonfly, gen_fattree, gen_mesh, gen_torus
from .model import (
    Host,
    LogicalLink,
    LogicalSwitch,
    LogicalTopology,
    SwitchPort,
    TopologyError,
    ValidationReport,
    new_topology,
    validate,
)
from .partition import (
    PartitionError,
    PartitionParams,
    PartitionPlan,
    brute_force_partition,
    cut_edges,
    make_plan,
    objective,
    partition,
    reserve_inter_switch_links,
)
from .projection import (
    PhysPort,
    PhysicalSwitch,
    ProjectionError,
    ProjectionMap,
    Wiring,
    WiringAllocator,
    feasibility_check,
    plan_wiring,
    project,
    projection_hash,
)
from .routing import (
    Route,
    RoutingError,
    VCAssignment,
    all_pair_routes,
    assert_deadlock_free,
    build_cdg,
    route_adaptive_dragonfly,
    route_dragonfly_minimal,
    route_fattree_dfs,
    route_mesh_dor,
    route_shortest,
    route_torus_dateline,
    router_for,
)
from .rules import (
    FlowRule,
    RuleAction,
    RuleMatch,
    RuleSet,
    capacity_check,
    compile_rules,
    domain_rules,
    export_rules,
    merge_rules,
    parse_rules,
    route_rules,
)
from .sim import (
    DeliveryRecord,
    Frame,
    SimFabric,
    co_load,
    equivalence_check,
    inject,
    isolation_check,
    load,
    logical_port_loads,
    reachability_matrix,
    read_counters,
    reset_counters,
)

__version__ = "0.1.0"
