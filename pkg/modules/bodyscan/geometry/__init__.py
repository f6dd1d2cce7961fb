from .ply import read_ply, write_ply, read_ply_mesh, write_ply_mesh
from .grid import Cell, OccupancyGrid
from .mesh import (
    merge_meshes,
    TriangleMesh,
    intersect_rays,
    segments_occluded,
    ray_mesh_intersect,
    segments_cross_mesh,
)
from .pose import (
    Pose,
    compose,
    inverse,
    FloatArray,
    look_rotation,
    rotation_about_z,
)
from .clouds import (
    unit_rows,
    IndexArray,
    PointCloud,
    voxel_keys,
    concatenate,
    NeighborIndex,
    nearest_neighbor,
    voxel_downsample,
)
from .footprint import Rectangle, footprint_corners, polygon_overlaps_rectangle

__all__ = (
    'Cell',
    'Pose',
    'compose',
    'inverse',
    'read_ply',
    'Rectangle',
    'unit_rows',
    'write_ply',
    'voxel_keys',
    'FloatArray',
    'IndexArray',
    'PointCloud',
    'concatenate',
    'TriangleMesh',
    'merge_meshes',
    'NeighborIndex',
    'OccupancyGrid',
    'look_rotation',
    'read_ply_mesh',
    'intersect_rays',
    'write_ply_mesh',
    'rotation_about_z',
    'voxel_downsample',
    'nearest_neighbor',
    'footprint_corners',
    'segments_occluded',
    'ray_mesh_intersect',
    'segments_cross_mesh',
    'polygon_overlaps_rectangle',
)
