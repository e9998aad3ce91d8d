"""Exception types shared across the package.

The CLI maps these onto exit codes: bad flags/usage -> 1, data errors
(missing or malformed files) -> 2, numeric degeneracies -> 3.
"""


class TwinMatchError(Exception):
    """Base class for all twinmatch-specific errors."""


class SceneFormatError(TwinMatchError):
    """A scene or sample file violates its schema.

    The message carries a path to the offending field, e.g.
    ``trajectories[3].points[7][2]``.
    """


class ZeroDistanceError(TwinMatchError):
    """Duplicate samples produced a zero k-NN distance with jitter off."""
