"""
Greedy choice of scanning views from a configuration dictionary.
"""

import logging
from typing import Set, List, Tuple, Optional, NamedTuple

import numpy as np
import numpy.typing as npt

from ..robot import BasePose
from ..cspace import ConfigRecord, ConfigDictionary
from ..errors import EmptyDictionary
from ..geometry import IndexArray

LOGGER = logging.getLogger(__name__)

Waypoint = Tuple[float, float]

# Budget defaults: additional base positions per scan and views per position.
MAX_BASES = 3
MAX_VIEWS_PER_BASE = 5


class PlanStop(NamedTuple):
    base_index: int  # into the dictionary's bases
    base: BasePose
    record_indices: Tuple[int, ...]
    views: Tuple[ConfigRecord, ...]
    gains: Tuple[int, ...]  # new samples each view adds, in order


class ScanPlan(NamedTuple):
    stops: Tuple[PlanStop, ...]
    # Base routes in visiting order: from the start pose (when known) to the
    # first stop, then between consecutive stops.
    base_paths: Tuple[Tuple[Waypoint, ...], ...]
    expected_coverage: float  # percent of the planning model's samples
    expected_new_points_per_view: Tuple[int, ...]
    already_seen: IndexArray
    n_samples: int

    @property
    def n_views(self) -> int:
        return sum(len(x.views) for x in self.stops)

    def covered(self) -> IndexArray:
        """Samples seen before the plan or by any of its views."""
        parts = [self.already_seen] + [r.visible for s in self.stops for r in s.views]
        return np.unique(np.concatenate(parts)).astype(np.int64)


def _best(gains: npt.NDArray[np.int64], allowed: npt.NDArray[np.bool_]) -> Optional[int]:
    """Index of the largest gain among allowed records, lowest index on ties."""
    if not allowed.any():
        return None
    masked = np.where(allowed, gains, -1)
    return int(np.argmax(masked))


def greedy_select(
    dictionary: ConfigDictionary,
    max_bases: int = MAX_BASES,
    max_views_per_base: int = MAX_VIEWS_PER_BASE,
    already_seen: Optional[IndexArray] = None,
) -> ScanPlan:
    """
    Pick views by largest number of unseen samples, arm before base.

    While the current stop has view budget left and one of its base's views
    still adds a sample, the best such view is taken. Otherwise a new stop is
    opened at the unused base whose single best view adds the most, until
    `max_bases` stops are open or nothing adds anything. Ties go to the lowest
    record index. `already_seen` holds samples covered before planning.
    """
    if not dictionary.records:
        raise EmptyDictionary("The configuration dictionary has no views")
    if max_bases < 1 or max_views_per_base < 1:
        raise ValueError("Budgets must be at least one, got {!r}".format(
            (max_bases, max_views_per_base),
        ))

    covered = np.zeros(dictionary.n_samples, dtype=bool)
    seen = np.zeros(0, dtype=np.int64) if already_seen is None else np.asarray(already_seen)
    covered[seen] = True

    base_of = np.array(dictionary.base_of)
    chosen = np.zeros(len(dictionary.records), dtype=bool)
    used_bases: Set[int] = set()

    stops: List[Tuple[int, List[int], List[int]]] = []
    while True:
        gains = np.array(
            [np.count_nonzero(~covered[x.visible]) for x in dictionary.records],
            dtype=np.int64,
        )

        pick = None
        if stops and len(stops[-1][1]) < max_views_per_base:
            pick = _best(gains, (base_of == stops[-1][0]) & ~chosen)
            if pick is not None and gains[pick] < 1:
                pick = None

        if pick is None:
            if len(stops) >= max_bases:
                break
            pick = _best(gains, ~np.isin(base_of, list(used_bases)))
            if pick is None or gains[pick] < 1:
                break
            used_bases.add(int(base_of[pick]))
            stops.append((int(base_of[pick]), [], []))

        _, indices, stop_gains = stops[-1]
        indices.append(pick)
        stop_gains.append(int(gains[pick]))
        chosen[pick] = True
        covered[dictionary.records[pick].visible] = True

    plan_stops = tuple(
        PlanStop(
            base_index=base,
            base=dictionary.bases[base],
            record_indices=tuple(indices),
            views=tuple(dictionary.records[x] for x in indices),
            gains=tuple(stop_gains),
        )
        for base, indices, stop_gains in stops
    )
    expected = 0.
    if dictionary.n_samples:
        expected = 100. * np.count_nonzero(covered) / dictionary.n_samples
    LOGGER.info(
        "Greedy plan: %d stops, %d views, %.2f %% expected coverage",
        len(plan_stops),
        sum(len(x.views) for x in plan_stops),
        expected,
    )
    return ScanPlan(
        stops=plan_stops,
        base_paths=(),
        expected_coverage=float(expected),
        expected_new_points_per_view=tuple(g for x in plan_stops for g in x.gains),
        already_seen=np.unique(seen).astype(np.int64),
        n_samples=dictionary.n_samples,
    )
