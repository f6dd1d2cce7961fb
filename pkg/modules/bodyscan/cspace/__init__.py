from .kneedle import find_knee, select_resolution_kneedle
from .storage import load_dictionary, save_dictionary
from .analysis import (
    params_hash,
    ConfigRecord,
    view_targets,
    build_dictionary,
    ConfigDictionary,
    analyze_base_position,
)
from .workspace import KINDS, SIDES, WorkspaceSpec, make_workspace
from .candidates import (
    ring_points,
    facing_couch,
    AnalysisSettings,
    enumerate_base_candidates,
)

__all__ = (
    'KINDS',
    'SIDES',
    'find_knee',
    'ring_points',
    'params_hash',
    'ConfigRecord',
    'facing_couch',
    'view_targets',
    'WorkspaceSpec',
    'make_workspace',
    'AnalysisSettings',
    'ConfigDictionary',
    'build_dictionary',
    'load_dictionary',
    'save_dictionary',
    'analyze_base_position',
    'enumerate_base_candidates',
    'select_resolution_kneedle',
)
