"""
Occupancy grids over the floor plane.
"""

from typing import Tuple

import numpy as np
import numpy.typing as npt

from .pose import FloatArray

Cell = Tuple[int, int]
BoolArray = npt.NDArray[np.bool_]


class OccupancyGrid:
    """
    A 2-D grid of floor cells; ``cells[i, j]`` is true when the cell is blocked.

    Index ``i`` runs along world x and ``j`` along world y, starting at
    `origin` (the lower-left corner of cell (0, 0)).
    """

    def __init__(
        self,
        origin: Tuple[float, float],
        cell_size: float,
        cells: 'npt.ArrayLike',
    ) -> None:
        if cell_size <= 0:
            raise ValueError("Cell size must be positive, got {!r}".format(cell_size))
        blocked = np.array(cells, dtype=bool)
        if blocked.ndim != 2:
            raise ValueError("Cells must be a 2-D array, got shape {!r}".format(blocked.shape))

        blocked.flags.writeable = False
        self.origin = (float(origin[0]), float(origin[1]))
        self.cell_size = float(cell_size)
        self.cells: BoolArray = blocked

    @property
    def shape(self) -> Tuple[int, int]:
        rows, columns = self.cells.shape
        return rows, columns

    def __repr__(self) -> str:
        return 'OccupancyGrid(origin={!r}, cell_size={!r}, shape={!r})'.format(
            self.origin,
            self.cell_size,
            self.shape,
        )

    def cell_centres(self) -> Tuple[FloatArray, FloatArray]:
        """World x and y coordinates of every cell centre, each of grid shape."""
        rows, columns = self.shape
        xs = self.origin[0] + (np.arange(rows) + 0.5) * self.cell_size
        ys = self.origin[1] + (np.arange(columns) + 0.5) * self.cell_size
        grid_x, grid_y = np.meshgrid(xs, ys, indexing='ij')
        return grid_x, grid_y

    def world_to_cell(self, x: float, y: float) -> Cell:
        return (
            int(np.floor((x - self.origin[0]) / self.cell_size)),
            int(np.floor((y - self.origin[1]) / self.cell_size)),
        )

    def cell_to_world(self, cell: Cell) -> Tuple[float, float]:
        i, j = cell
        return (
            self.origin[0] + (i + 0.5) * self.cell_size,
            self.origin[1] + (j + 0.5) * self.cell_size,
        )

    def in_bounds(self, cell: Cell) -> bool:
        rows, columns = self.shape
        i, j = cell
        return 0 <= i < rows and 0 <= j < columns

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and not self.cells[cell]

    def nearest_free_cell(self, cell: Cell) -> Cell:
        """
        The free cell closest (by centre distance) to `cell`, which may lie
        outside the grid. Ties go to the lowest flat index.
        """
        free = np.argwhere(~self.cells)
        if not len(free):
            raise ValueError("Grid has no free cells")
        offsets = free - np.array(cell)
        best = int(np.argmin(np.einsum('ij,ij->i', offsets, offsets)))
        i, j = free[best]
        return int(i), int(j)
