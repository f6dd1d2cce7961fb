"""
Planning, simulation and evaluation of autonomous full-body surface scans made
by a mobile base carrying a camera-equipped arm.
"""

from . import _version_check  # noqa:F401 # isort:skip
