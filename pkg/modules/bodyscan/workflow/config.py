"""
Scenario configuration files.

A configuration is a text file of ``dotted.key = value`` lines whose values
are JSON literals; ``#`` starts a comment. Files must state the schema
``version``. Keys missing from a file take their defaults; unknown keys and
values of the wrong type are errors.
"""

import json
import math
from typing import Dict, List, Tuple, Mapping, Optional
from pathlib import Path

from ..errors import ConfigError
from ..robot.params import UR3_A, UR3_D, UR3_ALPHA, UR3_THETA_OFFSET

CONFIG_VERSION = 1

Config = Dict[str, object]

DEFAULTS: Mapping[str, object] = {
    'version': CONFIG_VERSION,
    'body.kind': 'half_cylinder',
    'body.length': 1.75,
    'body.radius': 0.2,
    'body.mesh_path': '',
    'couch.length': 2.0,
    'couch.width': 0.7,
    'couch.height': 0.67,
    'workspace.kind': 'full',
    'workspace.corridor': 0.8,
    'workspace.margin': 3.0,
    'workspace.blocked_side': 'right',
    'camera.h_fov_deg': 75.0,
    'camera.v_fov_deg': 65.0,
    'camera.min_range': 0.5,
    'camera.max_range': 3.86,
    'camera.max_incidence_deg': 60.0,
    'camera.noise_sigma': 0.002,
    'camera.jitter_rot_deg': 0.5,
    'camera.jitter_trans': 0.005,
    'robot.dh_a': list(UR3_A),
    'robot.dh_d': list(UR3_D),
    'robot.dh_alpha': list(UR3_ALPHA),
    'robot.dh_theta_offset': list(UR3_THETA_OFFSET),
    'robot.base_height': 0.8,
    'robot.arm_offset': 0.15,
    'robot.camera_link': 5,
    'robot.camera_standoff': 0.05,
    'robot.footprint_width': 0.4,
    'robot.footprint_depth': 0.5,
    'robot.base_speed': 0.08,
    'budgets.max_bases': 3,
    'budgets.max_views': 5,
    'seeds.sampling': 0,
    'seeds.jitter': 1,
    'seeds.noise': 2,
    'resolution': 0.1,
    'evaluation.resolution': 0.01,
    'analysis.standoffs': [0.35, 0.55],
    'analysis.spacing': 0.25,
    'analysis.view_standoff': 0.6,
    'analysis.target_spacing_factor': 2.0,
    'analysis.workers': 1,
    'planning.proxy': 'none',
    'planning.grid_cell': 0.1,
    'stitch.voxel': 0.01,
    'stitch.max_corr_dist': 0.05,
    'stitch.max_iters': 50,
    'stitch.outlier_k': 20,
    'stitch.outlier_sigma': 2.0,
    'timing.view_dwell': 5.0,
    'timing.stop_settle': 10.0,
}

CHOICES: Mapping[str, Tuple[str, ...]] = {
    'body.kind': ('half_cylinder', 'humanoid', 'mesh'),
    'workspace.kind': ('full', 'narrow', 'one_side'),
    'workspace.blocked_side': ('left', 'right', 'head', 'foot'),
    'planning.proxy': ('none', 'half_cylinder'),
}

# Lists which must hold one number per arm joint.
JOINT_LISTS = ('robot.dh_a', 'robot.dh_d', 'robot.dh_alpha', 'robot.dh_theta_offset')


def _is_number(value: object) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def check_value(key: str, value: object) -> object:
    """
    Validate one entry against the type of its default, returning the value
    normalised (integers given for real-valued keys become floats).
    """
    if key not in DEFAULTS:
        raise ConfigError("Unknown configuration key {!r}".format(key))
    default = DEFAULTS[key]

    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError("{} must be a string, got {!r}".format(key, value))
    elif isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError("{} must be an integer, got {!r}".format(key, value))
    elif isinstance(default, float):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError("{} must be a number, got {!r}".format(key, value))
        if not math.isfinite(value):
            raise ConfigError("{} must be finite, got {!r}".format(key, value))
        value = float(value)
    elif isinstance(default, list):
        if not isinstance(value, list) or not all(_is_number(x) for x in value) or not value:
            raise ConfigError("{} must be a non-empty list of numbers, got {!r}".format(
                key,
                value,
            ))
        if key in JOINT_LISTS and len(value) != len(default):
            raise ConfigError("{} must hold {} values, got {!r}".format(
                key,
                len(default),
                value,
            ))
        value = [float(x) for x in value]

    if key in CHOICES and value not in CHOICES[key]:
        raise ConfigError("{} must be one of {}, got {!r}".format(key, CHOICES[key], value))
    if key == 'version' and value != CONFIG_VERSION:
        raise ConfigError("Unsupported configuration version {!r}, expected {}".format(
            value,
            CONFIG_VERSION,
        ))
    return value


def parse_value(key: str, text: str) -> object:
    """Decode a JSON literal; a bare word is taken as a string."""
    try:
        value: object = json.loads(text)
    except json.JSONDecodeError:
        if not text or any(x in text for x in '[]{}",'):
            raise ConfigError("Malformed value for {}: {!r}".format(key, text)) from None
        value = text
    return check_value(key, value)


def parse_config(text: str, source: str = '<string>') -> Config:
    """Entries given in a configuration text; defaults are not filled in."""
    entries: Config = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.partition('#')[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip()
        if not sep or not key:
            raise ConfigError("{}:{}: expected 'key = value', got {!r}".format(
                source,
                number,
                raw,
            ))
        if key in entries:
            raise ConfigError("{}:{}: {} given twice".format(source, number, key))
        try:
            entries[key] = parse_value(key, value.strip())
        except ConfigError as e:
            raise ConfigError("{}:{}: {}".format(source, number, e)) from None

    if 'version' not in entries:
        raise ConfigError("{}: missing 'version' (expected {})".format(source, CONFIG_VERSION))
    return entries


def load_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, object]] = None,
) -> Config:
    """
    The effective configuration: defaults, then the file at `path`, then
    `overrides` (typically from command line flags).
    """
    config: Config = dict(DEFAULTS)
    if path is not None:
        try:
            text = path.read_text()
        except OSError as e:
            raise ConfigError("Cannot read configuration {}: {}".format(path, e)) from e
        config.update(parse_config(text, str(path)))
    for key, value in (overrides or {}).items():
        config[key] = check_value(key, value)
    return config


def dump_config(config: Mapping[str, object]) -> str:
    """The configuration in file form, keys in their canonical order."""
    lines: List[str] = []
    for key in DEFAULTS:
        lines.append('{} = {}'.format(key, json.dumps(config.get(key, DEFAULTS[key]))))
    return '\n'.join(lines) + '\n'
