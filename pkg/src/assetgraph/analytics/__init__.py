"""Graph algorithms: PageRank, cascade, MTBF and NSGA-II scheduling."""

from .cascade import CascadeReport, MtbfStat, cascade, is_failure_event, mean_gap_hours, mtbf, upstream
from .nsga2 import (
    MaintenancePlan,
    ScheduleResult,
    SchedulingProblem,
    WorkOrderSpec,
    nsga2_schedule,
)
from .pagerank import AnalyticsError, CriticalityRanking, criticality, pagerank, pagerank_arrays

__all__ = [
    "AnalyticsError",
    "CascadeReport",
    "CriticalityRanking",
    "MaintenancePlan",
    "MtbfStat",
    "ScheduleResult",
    "SchedulingProblem",
    "WorkOrderSpec",
    "cascade",
    "criticality",
    "is_failure_event",
    "mean_gap_hours",
    "mtbf",
    "nsga2_schedule",
    "pagerank",
    "pagerank_arrays",
    "upstream",
]
