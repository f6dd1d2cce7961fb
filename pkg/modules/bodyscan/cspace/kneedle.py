"""
Knee detection on benefit-versus-cost curves, used to pick a model
resolution that trades coverage against analysis time.
"""

from typing import Tuple, Sequence

import numpy as np
import numpy.typing as npt

from ..errors import NoKnee

MIN_POINTS = 4

# Differences smaller than this count as a flat curve.
FLAT_TOLERANCE = 1e-12


def _normalised(values: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    span = values.max() - values.min()
    if span < FLAT_TOLERANCE:
        raise NoKnee("Curve is flat")
    result: npt.NDArray[np.float64] = (values - values.min()) / span
    return result


def find_knee(x: Sequence[float], y: Sequence[float], sensitivity: float = 1.) -> int:
    """
    Index of the knee of a concave, increasing curve.

    Both axes are scaled to [0, 1] and the knee is the first local maximum of
    ``y - x`` after which the difference falls below that maximum less
    `sensitivity` times the mean x spacing. `x` must be strictly increasing.
    """
    xs, ys = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(xs) != len(ys):
        raise ValueError("Got {} x values for {} y values".format(len(xs), len(ys)))
    if len(xs) < MIN_POINTS:
        raise NoKnee("Need at least {} points, got {}".format(MIN_POINTS, len(xs)))
    if np.any(np.diff(xs) <= 0):
        raise ValueError("x values must be strictly increasing, got {!r}".format(list(x)))

    x_norm, y_norm = _normalised(xs), _normalised(ys)
    difference = y_norm - x_norm
    threshold_step = sensitivity * float(np.mean(np.diff(x_norm)))

    maxima = [
        index
        for index in range(1, len(difference) - 1)
        if difference[index - 1] < difference[index] >= difference[index + 1]
    ]
    for position, index in enumerate(maxima):
        threshold = difference[index] - threshold_step
        end = maxima[position + 1] if position + 1 < len(maxima) else len(difference)
        if np.any(difference[index + 1:end] < threshold):
            return index

    raise NoKnee("Difference curve has no knee")


def select_resolution_kneedle(curve: Sequence[Tuple[float, float]]) -> float:
    """
    The resolution at the knee of a (resolution m, coverage %) curve.

    The cost axis is the inverse resolution, so that finer models cost more
    and should cover more; the order of the points does not matter.
    """
    if len(curve) < MIN_POINTS:
        raise NoKnee("Need at least {} points, got {}".format(MIN_POINTS, len(curve)))
    resolutions = [resolution for resolution, _ in curve]
    if min(resolutions) <= 0:
        raise ValueError("Resolutions must be positive, got {!r}".format(resolutions))

    ordered = sorted(curve, key=lambda point: -point[0])
    index = find_knee(
        [1 / resolution for resolution, _ in ordered],
        [coverage for _, coverage in ordered],
    )
    return ordered[index][0]
