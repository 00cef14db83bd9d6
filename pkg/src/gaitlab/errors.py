"""Exception types shared across the package."""


class GaitlabError(Exception):
    """Base class for all gaitlab errors."""


class InvalidInputError(GaitlabError, ValueError):
    """An argument violates a documented precondition."""


class OutOfReachError(GaitlabError, ValueError):
    """An inverse-kinematics target lies outside the reachable annulus."""


class ConfigurationError(GaitlabError):
    """A config file or rule set is malformed or inconsistent."""


class DegenerateDataError(GaitlabError, ValueError):
    """Input data does not determine the requested fit."""


class DegenerateComponentError(GaitlabError, ValueError):
    """A connected component has no usable mass."""


class BehindCameraError(GaitlabError, ValueError):
    """A point to be projected has non-positive camera depth."""


class NumericalConditioningError(GaitlabError, RuntimeError):
    """A linear system stayed non-positive-definite after jitter escalation."""


class BudgetExhaustedError(GaitlabError, RuntimeError):
    """The optimizer was asked to select a point with no budget left."""
