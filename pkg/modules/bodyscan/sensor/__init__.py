from .camera import CameraModel, jitter_pose, OCCLUSION_TOLERANCE
from .capture import ScanFrame, render_scan, write_frame
from .visibility import in_view, visible_points

__all__ = (
    'in_view',
    'ScanFrame',
    'CameraModel',
    'jitter_pose',
    'render_scan',
    'write_frame',
    'visible_points',
    'OCCLUSION_TOLERANCE',
)
