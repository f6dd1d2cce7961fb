from .models import CouchSpec, SurfaceModel, underside_mask, strip_underside
from .humanoid import Ellipsoid, ellipsoid_mesh, HUMANOID_PARTS, make_supine_humanoid
from .sampling import model_from_mesh, sample_mesh_surface
from .half_cylinder import half_cylinder_mesh, make_half_cylinder

__all__ = (
    'CouchSpec',
    'Ellipsoid',
    'SurfaceModel',
    'underside_mask',
    'ellipsoid_mesh',
    'HUMANOID_PARTS',
    'model_from_mesh',
    'strip_underside',
    'half_cylinder_mesh',
    'make_half_cylinder',
    'sample_mesh_surface',
    'make_supine_humanoid',
)
