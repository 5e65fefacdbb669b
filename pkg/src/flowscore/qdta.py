"""Quasi-dynamic traffic assignment.

The day splits into fixed intervals. Each interval's demand (new
departures plus carried-over trips) is assigned with Frank-Wolfe under
one of three link cost objectives, then every trip walks its least-cost
path until the interval's time budget runs out; unfinished trips re-enter
the next interval's demand from wherever they stopped.

Costs per objective: travel time (user equilibrium), marginal travel
time, or marginal fuel with congested speeds clamped to the fuel model's
working range.
"""
from __future__ import annotations

import csv
import enum
import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from . import costs
from .costs import BprParams, FuelParams, DEFAULT_BPR, DEFAULT_FUEL
from .network import Network

logger = logging.getLogger(__name__)

DAY_SECONDS = 86400.0


class Objective(enum.Enum):
    UET = "uet"
    SOT = "sot"
    SOF = "sof"

    @classmethod
    def parse(cls, name: str) -> "Objective":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown objective {name!r} (want uet, sot or sof)") from None


@dataclass(frozen=True)
class TripRequest:
    trip_id: int
    origin: int
    destination: int
    depart_s: float

    def __post_init__(self) -> None:
        if self.origin == self.destination:
            raise ValueError(f"trip {self.trip_id}: origin equals destination")
        if not 0 <= self.depart_s < DAY_SECONDS:
            raise ValueError(f"trip {self.trip_id}: departure {self.depart_s} outside [0, 86400)")


@dataclass(frozen=True)
class SolverConfig:
    interval_s: float = 900.0
    max_iterations: int = 100
    relative_gap: float = 1e-4
    line_search_tol: float = 1e-6
    line_search_max_iter: int = 60
    speed_floor_mph: float = 5.0
    speed_cap_mph: float = 90.0
    bpr: BprParams = DEFAULT_BPR
    fuel: FuelParams = DEFAULT_FUEL

    def __post_init__(self) -> None:
        if self.interval_s <= 0:
            raise ValueError("interval_s must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.relative_gap < 1:
            raise ValueError("relative_gap must be in (0, 1)")
        if not 0 < self.line_search_tol < 1:
            raise ValueError("line_search_tol must be in (0, 1)")
        if self.line_search_max_iter < 1:
            raise ValueError("line_search_max_iter must be >= 1")
        if not 0 < self.speed_floor_mph < self.speed_cap_mph:
            raise ValueError("need 0 < speed floor < speed cap")

    @property
    def interval_h(self) -> float:
        return self.interval_s / 3600.0

    @property
    def n_intervals(self) -> int:
        return math.ceil(DAY_SECONDS / self.interval_s)


@dataclass
class FlowState:
    """Converged link flows for one interval plus derived quantities."""

    objective: Objective
    flow_vph: np.ndarray
    time_h: np.ndarray
    speed_mph: np.ndarray
    cost: np.ndarray
    converged: bool
    gap: float
    iterations: int
    log: list[tuple[float, float]] = field(default_factory=list)
    unreachable: list[tuple[int, int, float]] = field(default_factory=list)
    entered: np.ndarray | None = None


@dataclass(frozen=True)
class TripRecord:
    trip_id: int
    status: str  # completed | forced | failed
    links: tuple[int, ...]
    start_s: float
    end_s: float
    distance_miles: float
    time_h: float
    free_flow_h: float
    fuel_l: float

    @property
    def delay_h(self) -> float:
        return self.time_h - self.free_flow_h


@dataclass
class _TripState:
    request: TripRequest
    current_node: int
    links: list[int] = field(default_factory=list)
    time_h: float = 0.0
    distance_miles: float = 0.0
    free_flow_h: float = 0.0
    fuel_l: float = 0.0

    def to_record(self, status: str) -> TripRecord:
        start = self.request.depart_s
        return TripRecord(
            trip_id=self.request.trip_id,
            status=status,
            links=tuple(self.links),
            start_s=start,
            end_s=start + self.time_h * 3600.0,
            distance_miles=self.distance_miles,
            time_h=self.time_h,
            free_flow_h=self.free_flow_h,
            fuel_l=self.fuel_l,
        )


class RoutingGraph:
    """Collapsed edge view of a Network for repeated shortest-path runs.

    Parallel links between the same node pair collapse to the cheapest
    one at each cost evaluation (cost ties go to the smaller link id).
    """

    def __init__(self, network: Network):
        self.net = network
        n = network.n_nodes
        self.n_nodes = n
        u = network.link_from
        v = network.link_to
        perm = np.lexsort((network.link_ids, v, u))
        self.perm = perm
        key = u[perm].astype(np.int64) * n + v[perm]
        is_first = np.ones(len(key), dtype=bool)
        if len(key) > 1:
            is_first[1:] = key[1:] != key[:-1]
        self.group_start = np.nonzero(is_first)[0]
        self.edge_key = key[self.group_start]
        self.edge_u = u[perm][self.group_start]
        self.edge_v = v[perm][self.group_start].astype(np.int32)
        group_end = np.append(self.group_start[1:], len(key))
        self.multi_groups = [
            (gi, int(s), int(e))
            for gi, (s, e) in enumerate(zip(self.group_start, group_end))
            if e - s > 1
        ]
        self.indptr = np.searchsorted(self.edge_u, np.arange(n + 1)).astype(np.int32)

    def collapse(self, link_costs: np.ndarray):
        cs = link_costs[self.perm]
        edge_cost = np.minimum.reduceat(cs, self.group_start)
        chosen = self.perm[self.group_start].copy()
        for gi, s, e in self.multi_groups:
            chosen[gi] = self.perm[s + int(np.argmin(cs[s:e]))]
        return edge_cost, chosen

    def shortest_paths(self, source_idx: np.ndarray, link_costs: np.ndarray):
        edge_cost, chosen = self.collapse(link_costs)
        # Dijkstra needs strictly positive weights; the cost models are
        # positive for sane parameters, this only guards float dust.
        edge_cost = np.maximum(edge_cost, 1e-12)
        graph = csr_matrix(
            (edge_cost, self.edge_v, self.indptr),
            shape=(self.n_nodes, self.n_nodes),
        )
        dist, pred = _csgraph_dijkstra(
            graph, directed=True, indices=source_idx, return_predecessors=True
        )
        return dist, pred, chosen

    def edge_slot(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.edge_key, u.astype(np.int64) * self.n_nodes + v)

    def path_links(self, row: int, origin_idx: int, dest_idx: int, dist, pred, chosen):
        """Link index sequence origin -> dest, or None when unreachable."""
        if not math.isfinite(dist[row, dest_idx]):
            return None
        seq = [dest_idx]
        node = dest_idx
        while node != origin_idx:
            node = int(pred[row, node])
            seq.append(node)
        seq.reverse()
        heads = np.array(seq[:-1], dtype=np.int64)
        tails = np.array(seq[1:], dtype=np.int64)
        return chosen[self.edge_slot(heads, tails)]


def _routing(network: Network) -> RoutingGraph:
    if network._routing_cache is None:
        network._routing_cache = RoutingGraph(network)
    return network._routing_cache


def _cost_vector(network: Network, objective: Objective, flows, config: SolverConfig) -> np.ndarray:
    if objective is Objective.UET:
        out = costs.bpr_time(network.free_flow_h, flows, network.capacity_vph, config.bpr)
    elif objective is Objective.SOT:
        out = costs.marginal_time_cost(network.free_flow_h, flows, network.capacity_vph, config.bpr)
    else:
        out = costs.eco_assignment_cost(
            network.length_miles,
            network.speed_mph,
            flows,
            network.capacity_vph,
            config.bpr,
            config.fuel,
            config.speed_floor_mph,
            config.speed_cap_mph,
        )
    return np.asarray(out, dtype=float)


def _objective_value(network: Network, objective: Objective, flows, config: SolverConfig) -> float:
    if objective is Objective.UET:
        return float(np.sum(costs.bpr_integral(network.free_flow_h, flows, network.capacity_vph, config.bpr)))
    if objective is Objective.SOT:
        return float(np.sum(flows * costs.bpr_time(network.free_flow_h, flows, network.capacity_vph, config.bpr)))
    t = np.asarray(costs.bpr_time(network.free_flow_h, flows, network.capacity_vph, config.bpr))
    v = np.clip(network.length_miles / t, config.speed_floor_mph, config.speed_cap_mph)
    per_veh = network.length_miles * np.asarray(costs.fuel_per_mile(v, config.fuel))
    return float(np.sum(flows * per_veh))


def assignment_cost(objective: Objective, link, flow: float, config: SolverConfig | None = None) -> float:
    """Generalized cost of one link at the given flow, per objective."""
    config = config or SolverConfig()
    fft = link.length_miles / link.speed_mph
    if objective is Objective.UET:
        return float(costs.bpr_time(fft, flow, link.capacity_vph, config.bpr))
    if objective is Objective.SOT:
        return float(costs.marginal_time_cost(fft, flow, link.capacity_vph, config.bpr))
    return float(
        costs.eco_assignment_cost(
            link.length_miles,
            link.speed_mph,
            flow,
            link.capacity_vph,
            config.bpr,
            config.fuel,
            config.speed_floor_mph,
            config.speed_cap_mph,
        )
    )


def bucket_demand(trips, interval_s: float = 900.0) -> list[dict[tuple[int, int], int]]:
    """Aggregate trips into per-interval origin-destination counts."""
    if interval_s <= 0:
        raise ValueError("interval_s must be positive")
    n_intervals = math.ceil(DAY_SECONDS / interval_s)
    buckets: list[dict[tuple[int, int], int]] = [{} for _ in range(n_intervals)]
    for trip in trips:
        if not 0 <= trip.depart_s < DAY_SECONDS:
            raise ValueError(f"trip {trip.trip_id}: departure outside [0, 86400)")
        k = int(trip.depart_s // interval_s)
        od = (trip.origin, trip.destination)
        buckets[k][od] = buckets[k].get(od, 0) + 1
    return buckets


class _DemandBatch:
    """Sorted OD demand with node indices resolved once."""

    def __init__(self, network: Network, od_demand):
        if any(q < 0 for q in od_demand.values()):
            raise ValueError("demand must be nonnegative")
        items = sorted((od, float(q)) for od, q in od_demand.items() if q > 0)
        for (o, d), _ in items:
            if o not in network.node_index:
                raise ValueError(f"unknown origin node {o}")
            if d not in network.node_index:
                raise ValueError(f"unknown destination node {d}")
            if o == d:
                raise ValueError(f"origin equals destination for node {o}")
        self.items = items
        origins = sorted({od[0] for od, _ in items})
        self.source_ids = origins
        self.source_idx = np.array([network.node_index[o] for o in origins], dtype=np.int64)
        row_of = {o: i for i, o in enumerate(origins)}
        self.od_row = np.array([row_of[od[0]] for od, _ in items], dtype=np.int64)
        self.od_dest = np.array([network.node_index[od[1]] for od, _ in items], dtype=np.int64)
        self.od_rate = np.array([q for _, q in items], dtype=float)

    @property
    def empty(self) -> bool:
        return not self.items


def _load_all_or_nothing(graph: RoutingGraph, batch: _DemandBatch, dist, pred, chosen):
    """Put each OD's whole demand on its current shortest path."""
    flows = np.zeros(graph.net.n_links, dtype=float)
    reachable = np.isfinite(dist[batch.od_row, batch.od_dest])
    unreachable = [
        (batch.items[i][0][0], batch.items[i][0][1], batch.items[i][1])
        for i in np.nonzero(~reachable)[0]
    ]
    cur = batch.od_dest[reachable]
    row = batch.od_row[reachable]
    rate = batch.od_rate[reachable]
    origin = batch.source_idx[row]
    while cur.size:
        prev = pred[row, cur].astype(np.int64)
        slots = graph.edge_slot(prev, cur)
        np.add.at(flows, chosen[slots], rate)
        cur = prev
        keep = cur != origin
        if not keep.all():
            cur = cur[keep]
            row = row[keep]
            rate = rate[keep]
            origin = origin[keep]
    return flows, unreachable


def all_or_nothing(network: Network, od_demand, link_costs):
    """Assign every OD's demand to its least-cost path at fixed costs.

    Returns (per-link flow vector, list of unreachable (o, d, demand)).
    """
    graph = _routing(network)
    batch = _DemandBatch(network, od_demand)
    if batch.empty:
        return np.zeros(network.n_links, dtype=float), []
    link_costs = np.asarray(link_costs, dtype=float)
    dist, pred, chosen = graph.shortest_paths(batch.source_idx, link_costs)
    return _load_all_or_nothing(graph, batch, dist, pred, chosen)


def _line_search(network, objective, config, f, d) -> float:
    def slope(sigma: float) -> float:
        x = np.maximum(f + sigma * d, 0.0)
        return float(d @ _cost_vector(network, objective, x, config))

    if slope(1.0) <= 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(config.line_search_max_iter):
        if hi - lo <= config.line_search_tol:
            break
        mid = 0.5 * (lo + hi)
        if slope(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def assign_interval(
    network: Network,
    od_demand,
    objective: Objective,
    config: SolverConfig | None = None,
    warm_start: np.ndarray | None = None,
) -> FlowState:
    """Frank-Wolfe assignment of one interval's demand.

    od_demand maps (origin, destination) to trip counts for the
    interval; counts become hourly rates via the interval length.
    """
    config = config or SolverConfig()
    graph = _routing(network)
    counts = {od: q for od, q in od_demand.items()}
    rates = {od: q / config.interval_h for od, q in counts.items()}
    batch = _DemandBatch(network, rates)

    def finish(flows, converged, gap, log, unreachable):
        time_h = np.asarray(
            costs.bpr_time(network.free_flow_h, flows, network.capacity_vph, config.bpr)
        )
        return FlowState(
            objective=objective,
            flow_vph=flows,
            time_h=time_h,
            speed_mph=network.length_miles / time_h,
            cost=_cost_vector(network, objective, flows, config),
            converged=converged,
            gap=gap,
            iterations=len(log),
            log=log,
            unreachable=[(o, d, r * config.interval_h) for o, d, r in unreachable],
        )

    if batch.empty:
        zeros = np.zeros(network.n_links, dtype=float)
        return finish(zeros, True, 0.0, [(0.0, 0.0)], [])

    if warm_start is not None:
        f = np.array(warm_start, dtype=float)
        if f.shape != (network.n_links,):
            raise ValueError("warm_start has the wrong shape")
        if np.any(f < 0):
            raise ValueError("warm_start flows must be nonnegative")
        unreachable: list = []
    else:
        cost0 = _cost_vector(network, objective, np.zeros(network.n_links), config)
        dist, pred, chosen = graph.shortest_paths(batch.source_idx, cost0)
        f, unreachable = _load_all_or_nothing(graph, batch, dist, pred, chosen)

    best_lower_bound = -math.inf
    log: list[tuple[float, float]] = []
    converged = False
    gap = math.inf
    for it in range(1, config.max_iterations + 1):
        cost = _cost_vector(network, objective, f, config)
        dist, pred, chosen = graph.shortest_paths(batch.source_idx, cost)
        y, unreachable = _load_all_or_nothing(graph, batch, dist, pred, chosen)
        value = _objective_value(network, objective, f, config)
        if objective is Objective.UET:
            lb = value + float(cost @ (y - f))
            best_lower_bound = max(best_lower_bound, lb)
            gap = (value - best_lower_bound) / abs(value) if value != 0.0 else 0.0
        else:
            den = float(cost @ f)
            gap = float(cost @ (f - y)) / den if den > 0.0 else 0.0
        gap = max(gap, 0.0)
        log.append((gap, value))
        if gap <= config.relative_gap:
            converged = True
            break
        if it == config.max_iterations:
            break
        sigma = _line_search(network, objective, config, f, y - f)
        f = np.maximum(f + sigma * (y - f), 0.0)

    if not converged:
        logger.warning(
            "%s assignment stopped at max_iterations=%d with relative gap %.3g",
            objective.value,
            config.max_iterations,
            gap,
        )
    return finish(f, converged, gap, log, unreachable)


def advance_trips(
    network: Network,
    flow_state: FlowState,
    active_trips: list[_TripState],
    interval_s: float,
    fuel: FuelParams | None = None,
    speed_floor_mph: float = 5.0,
    speed_cap_mph: float = 90.0,
):
    """Walk each active trip along its least-cost path for one interval.

    Every trip fully traverses at least one link; a link is started
    whenever budget remains, so the last link may overdraw the budget
    (the overdraft simply shows up in the recorded travel time).

    Returns (finished records, still-active states, per-link entry counts).
    """
    graph = _routing(network)
    budget_h = interval_s / 3600.0
    if budget_h <= 0:
        raise ValueError("interval_s must be positive")
    fuel = fuel or DEFAULT_FUEL
    entered = np.zeros(network.n_links, dtype=np.int64)
    records: list[TripRecord] = []
    residual: list[_TripState] = []
    if not active_trips:
        return records, residual, entered

    sources = sorted({t.current_node for t in active_trips})
    source_idx = np.array([network.node_index[s] for s in sources], dtype=np.int64)
    row_of = {s: i for i, s in enumerate(sources)}
    dist, pred, chosen = graph.shortest_paths(source_idx, flow_state.cost)

    path_cache: dict[tuple[int, int], np.ndarray | None] = {}
    speeds = np.clip(flow_state.speed_mph, speed_floor_mph, speed_cap_mph)
    per_mile = np.asarray(costs.fuel_per_mile(speeds, fuel))
    link_fuel_l = network.length_miles * per_mile

    for trip in active_trips:
        od = (trip.current_node, trip.request.destination)
        if od not in path_cache:
            row = row_of[od[0]]
            path_cache[od] = graph.path_links(
                row, int(source_idx[row]), network.node_index[od[1]], dist, pred, chosen
            )
        path = path_cache[od]
        if path is None:
            records.append(trip.to_record("failed"))
            continue
        times = flow_state.time_h[path]
        elapsed_before = np.concatenate(([0.0], np.cumsum(times)[:-1]))
        n_take = int(np.count_nonzero(elapsed_before < budget_h))
        n_take = max(1, min(n_take, len(path)))
        taken = path[:n_take]
        np.add.at(entered, taken, 1)
        trip.time_h += float(times[:n_take].sum())
        trip.distance_miles += float(network.length_miles[taken].sum())
        trip.free_flow_h += float(network.free_flow_h[taken].sum())
        trip.fuel_l += float(link_fuel_l[taken].sum())
        trip.links.extend(int(network.link_ids[i]) for i in taken)
        if n_take == len(path):
            records.append(trip.to_record("completed"))
        else:
            trip.current_node = network.links[taken[-1]].to_node
            residual.append(trip)
    return records, residual, entered


@dataclass
class AssignmentResult:
    """A day of interval flow states plus every trip's itinerary."""

    objective: Objective
    interval_s: float
    flow_states: list[FlowState]
    records: list[TripRecord]
    forced_entered: np.ndarray
    network: Network

    @property
    def interval_h(self) -> float:
        return self.interval_s / 3600.0

    @property
    def convergence(self) -> list[list[tuple[float, float]]]:
        return [fs.log for fs in self.flow_states]

    def counts(self) -> dict[str, int]:
        out = {"completed": 0, "forced": 0, "failed": 0}
        for rec in self.records:
            out[rec.status] += 1
        return out

    def total_system_time_h(self) -> float:
        """Vehicle-hours implied by the converged interval flows."""
        return float(
            sum((fs.flow_vph * fs.time_h).sum() for fs in self.flow_states) * self.interval_h
        )

    def total_fuel_from_flows(self, config: SolverConfig | None = None) -> float:
        """Liters implied by the converged interval flows."""
        config = config or SolverConfig(interval_s=self.interval_s)
        total = 0.0
        for fs in self.flow_states:
            v = np.clip(fs.speed_mph, config.speed_floor_mph, config.speed_cap_mph)
            per_mile = np.asarray(costs.fuel_per_mile(v, config.fuel))
            total += float((fs.flow_vph * self.network.length_miles * per_mile).sum())
        return total * self.interval_h

    def conservation(self) -> tuple[float, float, float]:
        """(trip miles, tallied link miles, relative error)."""
        trip_miles = sum(rec.distance_miles for rec in self.records)
        entry_total = self.forced_entered.astype(float).copy()
        for fs in self.flow_states:
            if fs.entered is not None:
                entry_total += fs.entered
        link_miles = float((entry_total * self.network.length_miles).sum())
        scale = max(abs(trip_miles), abs(link_miles), 1e-12)
        return trip_miles, link_miles, abs(trip_miles - link_miles) / scale


def run_day(
    network: Network,
    trips,
    objective: Objective,
    config: SolverConfig | None = None,
) -> AssignmentResult:
    """Assign and advance a whole day of trips for one objective."""
    config = config or SolverConfig()
    for trip in trips:
        if trip.origin not in network.node_index:
            raise ValueError(f"trip {trip.trip_id}: unknown origin {trip.origin}")
        if trip.destination not in network.node_index:
            raise ValueError(f"trip {trip.trip_id}: unknown destination {trip.destination}")
    by_interval: list[list[TripRequest]] = [[] for _ in range(config.n_intervals)]
    for trip in trips:
        by_interval[int(trip.depart_s // config.interval_s)].append(trip)

    residual: list[_TripState] = []
    records: list[TripRecord] = []
    flow_states: list[FlowState] = []
    for k in range(config.n_intervals):
        fresh = [_TripState(req, req.origin) for req in by_interval[k]]
        active = residual + fresh
        active.sort(key=lambda t: t.request.trip_id)
        demand = Counter((t.current_node, t.request.destination) for t in active)
        state = assign_interval(network, demand, objective, config)
        done, residual, entered = advance_trips(
            network,
            state,
            active,
            config.interval_s,
            fuel=config.fuel,
            speed_floor_mph=config.speed_floor_mph,
            speed_cap_mph=config.speed_cap_mph,
        )
        state.entered = entered
        flow_states.append(state)
        records.extend(done)

    forced_entered = np.zeros(network.n_links, dtype=np.int64)
    if residual:
        # day over: finish leftovers on free-flow paths and flag them
        graph = _routing(network)
        cost0 = _cost_vector(network, objective, np.zeros(network.n_links), config)
        residual.sort(key=lambda t: t.request.trip_id)
        sources = sorted({t.current_node for t in residual})
        source_idx = np.array([network.node_index[s] for s in sources], dtype=np.int64)
        row_of = {s: i for i, s in enumerate(sources)}
        dist, pred, chosen = graph.shortest_paths(source_idx, cost0)
        free_speed = np.clip(network.speed_mph, config.speed_floor_mph, config.speed_cap_mph)
        free_fuel = network.length_miles * np.asarray(costs.fuel_per_mile(free_speed, config.fuel))
        cache: dict[tuple[int, int], np.ndarray | None] = {}
        for trip in residual:
            od = (trip.current_node, trip.request.destination)
            if od not in cache:
                row = row_of[od[0]]
                cache[od] = graph.path_links(
                    row, int(source_idx[row]), network.node_index[od[1]], dist, pred, chosen
                )
            path = cache[od]
            if path is None:
                records.append(trip.to_record("failed"))
                continue
            np.add.at(forced_entered, path, 1)
            trip.time_h += float(network.free_flow_h[path].sum())
            trip.distance_miles += float(network.length_miles[path].sum())
            trip.free_flow_h += float(network.free_flow_h[path].sum())
            trip.fuel_l += float(free_fuel[path].sum())
            trip.links.extend(int(network.link_ids[i]) for i in path)
            records.append(trip.to_record("forced"))

    records.sort(key=lambda r: r.trip_id)
    return AssignmentResult(
        objective=objective,
        interval_s=config.interval_s,
        flow_states=flow_states,
        records=records,
        forced_entered=forced_entered,
        network=network,
    )


def load_trips(path: str) -> list[TripRequest]:
    """Read trips.csv (trip_id, origin, destination, depart_s)."""
    trips: list[TripRequest] = []
    seen: set[int] = set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = ("trip_id", "origin", "destination", "depart_s")
        present = set(reader.fieldnames or ())
        for col in required:
            if col not in present:
                raise ValueError(f"missing column '{col}' in trips file {path}")
        for row_no, row in enumerate(reader, start=2):
            try:
                trip_id = int(row["trip_id"])
                origin = int(row["origin"])
                destination = int(row["destination"])
                depart_s = float(row["depart_s"])
            except (TypeError, ValueError):
                raise ValueError(f"non-numeric trip field, row {row_no}") from None
            if trip_id in seen:
                raise ValueError(f"duplicate trip_id {trip_id}, row {row_no}")
            seen.add(trip_id)
            try:
                trips.append(TripRequest(trip_id, origin, destination, depart_s))
            except ValueError as exc:
                raise ValueError(f"{exc}, row {row_no}") from None
    return trips
