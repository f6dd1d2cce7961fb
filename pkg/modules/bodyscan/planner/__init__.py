from .greedy import (
    PlanStop,
    ScanPlan,
    Waypoint,
    MAX_BASES,
    greedy_select,
    MAX_VIEWS_PER_BASE,
)
from .output import (
    VIEW_DWELL,
    format_plan,
    gains_table,
    STOP_SETTLE,
    travel_distance,
    estimate_plan_time,
)
from .navigation import (
    GRID_CELL,
    grid_path,
    path_length,
    plan_base_path,
    attach_base_paths,
    build_occupancy_grid,
)

__all__ = (
    'PlanStop',
    'ScanPlan',
    'Waypoint',
    'GRID_CELL',
    'MAX_BASES',
    'grid_path',
    'VIEW_DWELL',
    'STOP_SETTLE',
    'format_plan',
    'gains_table',
    'path_length',
    'greedy_select',
    'plan_base_path',
    'travel_distance',
    'attach_base_paths',
    'estimate_plan_time',
    'MAX_VIEWS_PER_BASE',
    'build_occupancy_grid',
)
