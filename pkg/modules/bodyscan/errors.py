"""
Exceptions raised by the body-scan library.

Every error derives from `ScanError`; those which signal bad input also derive
from `ValueError` so that callers validating arguments can catch either.
"""


class ScanError(Exception):
    """Base class for all body-scan errors."""


class ConfigError(ScanError, ValueError):
    """A configuration file or override is malformed or names an unknown key."""


class PlyFormatError(ScanError, ValueError):
    """A PLY file could not be parsed."""


class EmptyTarget(ScanError, ValueError):
    """A nearest-neighbour query was made against an empty cloud."""


class EmptyMesh(ScanError, ValueError):
    """A mesh without triangles was given where surface is required."""


class ResolutionTooCoarse(ScanError, ValueError):
    """The requested sampling resolution cannot represent the geometry."""


class JointLimit(ScanError, ValueError):
    """An arm configuration lies outside the joint limits."""


class DegenerateMotions(ScanError, ValueError):
    """Hand-eye motion pairs do not constrain the solution."""


class NoCandidates(ScanError):
    """No base position satisfies the workspace constraints."""


class NoKnee(ScanError, ValueError):
    """A curve has no detectable knee."""


class EmptyDictionary(ScanError, ValueError):
    """The configuration dictionary holds no records."""


class DictionaryMismatch(ScanError):
    """A cached dictionary was built from different inputs."""


class Unreachable(ScanError):
    """No collision-free base path exists between two cells."""


class NoFrames(ScanError, ValueError):
    """Stitching was requested without any captured frames."""


class InsufficientOverlap(ScanError):
    """Too few ICP correspondences were found within the distance limit."""


class CoarseAlignmentFailure(ScanError):
    """ICP wanted a correction far larger than the kinematic prior allows."""


class EmptyReference(ScanError, ValueError):
    """A metric was requested against an empty reference cloud."""
