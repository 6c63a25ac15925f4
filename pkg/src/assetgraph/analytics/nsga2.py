"""NSGA-II maintenance scheduling on an hourly grid.

Each gene is the slot index chosen for one work order. Objectives, both
minimized:

* downtime: for every equipment, the number of hours during which it or
  anything it depends on is under maintenance. A lone work order costs
  ``duration * (1 + dependents)``; co-scheduling dependent work orders
  shares the outage.
* cost: work-order costs plus ``lateness_rate`` per hour started after
  ``latest_start``, plus ``surge_rate`` per work-order hour beyond
  ``crews`` running at the same time (contractor premium; off when
  ``crews`` is None).

Overlap between work orders on the same equipment is a constraint,
handled by constraint-domination on total overlap hours.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from itertools import combinations
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .. import _kernels
from .pagerank import AnalyticsError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WorkOrderSpec:
    id: str
    equipment: str
    duration: int
    cost: float
    earliest_start: int
    latest_start: int
    candidate_slots: Optional[Tuple[int, ...]] = None


@dataclass
class MaintenancePlan:
    assignments: Dict[str, int]
    objectives: Tuple[float, float]
    rank: int = 0
    start_times: Dict[str, datetime] = field(default_factory=dict)

    @property
    def downtime(self) -> float:
        return self.objectives[0]

    @property
    def cost(self) -> float:
        return self.objectives[1]


@dataclass
class ScheduleResult:
    feasible: bool
    plans: List[MaintenancePlan]
    generations: int = 0
    evaluations: int = 0
    reason: str = ""

    @property
    def front(self) -> List[Tuple[float, float]]:
        return sorted({p.objectives for p in self.plans})


class SchedulingProblem:
    """Slot domains plus an objective/violation evaluator."""

    def __init__(
        self,
        orders: Sequence[WorkOrderSpec],
        horizon: int,
        dependents: Optional[Mapping[str, FrozenSet[str]]] = None,
        lateness_rate: float = 10.0,
        crews: Optional[int] = None,
        surge_rate: float = 0.0,
    ):
        if not orders:
            raise AnalyticsError("no work orders to schedule")
        ids = [o.id for o in orders]
        if len(set(ids)) != len(ids):
            raise AnalyticsError("duplicate work order id")
        self.orders = list(orders)
        self.horizon = int(horizon)
        self.dependents = {k: frozenset(v) for k, v in (dependents or {}).items()}
        self.lateness_rate = float(lateness_rate)
        if crews is not None and crews < 1:
            raise AnalyticsError("crews must be >= 1")
        self.crews = crews
        self.surge_rate = float(surge_rate)
        self.slots: List[Tuple[int, ...]] = [self._domain(o) for o in self.orders]
        self._affected = [
            (o.equipment,) + tuple(sorted(self.dependents.get(o.equipment, frozenset()) - {o.equipment}))
            for o in self.orders
        ]
        self._same_equipment = [
            (i, j)
            for i, j in combinations(range(len(self.orders)), 2)
            if self.orders[i].equipment == self.orders[j].equipment
        ]

    def _domain(self, o: WorkOrderSpec) -> Tuple[int, ...]:
        if o.duration < 1:
            raise AnalyticsError(f"work order {o.id}: duration must be >= 1 hour")
        if o.candidate_slots is not None:
            slots = tuple(sorted(set(int(s) for s in o.candidate_slots)))
        else:
            slots = tuple(range(max(o.earliest_start, 0), self.horizon - o.duration + 1))
        slots = tuple(s for s in slots if s >= o.earliest_start and s + o.duration <= self.horizon)
        return slots

    @property
    def choice_count(self) -> int:
        return sum(len(s) for s in self.slots)

    def starts(self, genome: Sequence[int]) -> List[int]:
        return [self.slots[i][g] for i, g in enumerate(genome)]

    def violation(self, starts: Sequence[int]) -> float:
        total = 0
        for i, j in self._same_equipment:
            a0, a1 = starts[i], starts[i] + self.orders[i].duration
            b0, b1 = starts[j], starts[j] + self.orders[j].duration
            total += max(0, min(a1, b1) - max(a0, b0))
        return float(total)

    def objectives(self, starts: Sequence[int]) -> Tuple[float, float]:
        intervals: Dict[str, List[Tuple[int, int]]] = {}
        for o, s, affected in zip(self.orders, starts, self._affected):
            for eq in affected:
                intervals.setdefault(eq, []).append((s, s + o.duration))
        downtime = 0
        for spans in intervals.values():
            spans.sort()
            cur0, cur1 = spans[0]
            for a, b in spans[1:]:
                if a > cur1:
                    downtime += cur1 - cur0
                    cur0, cur1 = a, b
                else:
                    cur1 = max(cur1, b)
            downtime += cur1 - cur0
        cost = 0.0
        for o, s in zip(self.orders, starts):
            cost += o.cost + self.lateness_rate * max(0, s - o.latest_start)
        if self.crews is not None and self.surge_rate:
            cost += self.surge_rate * self.excess_crew_hours(starts)
        return float(downtime), cost

    def excess_crew_hours(self, starts: Sequence[int]) -> int:
        """Sum over hours of (running work orders - crews), where positive."""
        if self.crews is None:
            return 0
        marks: Dict[int, int] = {}
        for o, s in zip(self.orders, starts):
            marks[s] = marks.get(s, 0) + 1
            marks[s + o.duration] = marks.get(s + o.duration, 0) - 1
        excess, running, prev = 0, 0, None
        for t in sorted(marks):
            if prev is not None and running > self.crews:
                excess += (running - self.crews) * (t - prev)
            running += marks[t]
            prev = t
        return excess

    def feasible_assignment(self) -> Optional[List[int]]:
        """Backtracking search for any overlap-free assignment."""
        if any(not s for s in self.slots):
            return None
        by_eq: Dict[str, List[int]] = {}
        for i, o in enumerate(self.orders):
            by_eq.setdefault(o.equipment, []).append(i)
        genome = [0] * len(self.orders)
        for members in by_eq.values():
            members = sorted(members, key=lambda i: len(self.slots[i]))
            chosen: Dict[int, int] = {}
            if not self._backtrack(members, 0, chosen):
                return None
            for i, g in chosen.items():
                genome[i] = g
        return genome

    def _backtrack(self, members: List[int], k: int, chosen: Dict[int, int]) -> bool:
        if k == len(members):
            return True
        i = members[k]
        d = self.orders[i].duration
        for g, s in enumerate(self.slots[i]):
            ok = True
            for j, gj in chosen.items():
                sj = self.slots[j][gj]
                if s < sj + self.orders[j].duration and sj < s + d:
                    ok = False
                    break
            if ok:
                chosen[i] = g
                if self._backtrack(members, k + 1, chosen):
                    return True
                del chosen[i]
        return False


def _evaluate(problem: SchedulingProblem, pop: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    objs = np.empty((pop.shape[0], 2))
    viol = np.empty(pop.shape[0])
    for k, genome in enumerate(pop):
        starts = problem.starts(genome)
        objs[k] = problem.objectives(starts)
        viol[k] = problem.violation(starts)
    return objs, viol


def _tournament(rng: np.random.Generator, ranks: np.ndarray, crowd: np.ndarray) -> int:
    a, b = (int(v) for v in rng.integers(0, ranks.shape[0], size=2))
    if ranks[a] != ranks[b]:
        return a if ranks[a] < ranks[b] else b
    if crowd[a] != crowd[b]:
        return a if crowd[a] > crowd[b] else b
    return min(a, b)


def nsga2_schedule(
    orders: Sequence[WorkOrderSpec],
    horizon: int,
    population: int = 64,
    generations: int = 100,
    seed: int = 0,
    dependents: Optional[Mapping[str, FrozenSet[str]]] = None,
    lateness_rate: float = 10.0,
    crossover_rate: float = 0.9,
    origin: Optional[datetime] = None,
    crews: Optional[int] = None,
    surge_rate: float = 0.0,
) -> ScheduleResult:
    """Pareto front of feasible schedules (deterministic for a given seed)."""
    problem = SchedulingProblem(orders, horizon, dependents, lateness_rate, crews, surge_rate)
    seed_genome = problem.feasible_assignment()
    if seed_genome is None:
        empty = [o.id for o, s in zip(problem.orders, problem.slots) if not s]
        reason = (
            f"work orders with no slot inside the horizon: {', '.join(empty)}"
            if empty
            else "no overlap-free assignment exists"
        )
        return ScheduleResult(False, [], 0, 0, reason)

    rng = np.random.default_rng(seed)
    n = len(problem.orders)
    sizes = np.array([len(s) for s in problem.slots], dtype=np.int64)
    pop_size = max(int(population), 4)
    pop = (rng.random((pop_size, n)) * sizes).astype(np.int64)
    pop[0] = seed_genome
    objs, viol = _evaluate(problem, pop)
    evaluations = pop_size
    ranks = _kernels.nondominated_ranks(objs, viol)
    crowd = _kernels.crowding_distance(objs, ranks)
    mutation_rate = 1.0 / n

    for _ in range(generations):
        children = np.empty_like(pop)
        for c in range(0, pop_size, 2):
            p1 = pop[_tournament(rng, ranks, crowd)]
            p2 = pop[_tournament(rng, ranks, crowd)]
            if n > 1 and rng.random() < crossover_rate:
                cut = int(rng.integers(1, n))
                c1 = np.concatenate([p1[:cut], p2[cut:]])
                c2 = np.concatenate([p2[:cut], p1[cut:]])
            else:
                c1, c2 = p1.copy(), p2.copy()
            for child in (c1, c2):
                mask = rng.random(n) < mutation_rate
                redraw = (rng.random(n) * sizes).astype(np.int64)
                child[mask] = redraw[mask]
            children[c] = c1
            if c + 1 < pop_size:
                children[c + 1] = c2
        c_objs, c_viol = _evaluate(problem, children)
        evaluations += pop_size
        all_pop = np.vstack([pop, children])
        all_objs = np.vstack([objs, c_objs])
        all_viol = np.concatenate([viol, c_viol])
        all_ranks = _kernels.nondominated_ranks(all_objs, all_viol)
        all_crowd = _kernels.crowding_distance(all_objs, all_ranks)
        order = np.lexsort((np.arange(all_pop.shape[0]), -all_crowd, all_ranks))[:pop_size]
        pop, objs, viol = all_pop[order], all_objs[order], all_viol[order]
        ranks = _kernels.nondominated_ranks(objs, viol)
        crowd = _kernels.crowding_distance(objs, ranks)

    plans: List[MaintenancePlan] = []
    seen = set()
    for k in np.flatnonzero((ranks == 0) & (viol <= 0)):
        genome = tuple(int(g) for g in pop[k])
        if genome in seen:
            continue
        seen.add(genome)
        starts = problem.starts(genome)
        assignment = {o.id: s for o, s in zip(problem.orders, starts)}
        times = {}
        if origin is not None:
            times = {wid: origin + timedelta(hours=s) for wid, s in assignment.items()}
        plans.append(MaintenancePlan(assignment, (float(objs[k, 0]), float(objs[k, 1])), 0, times))
    plans.sort(key=lambda p: (p.objectives, sorted(p.assignments.items())))
    return ScheduleResult(True, plans, generations, evaluations)
