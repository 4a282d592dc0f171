"""Exception hierarchy shared across the package."""


class FormSyncError(Exception):
    """Base class for all package errors."""


class SingularityGuardError(FormSyncError, ValueError):
    """MRP norm outside the configured singularity guard ball."""


class InverseSingularError(FormSyncError, ValueError):
    """Quaternion with beta4 = -1 has no MRP image."""


class DimensionMismatchError(FormSyncError, ValueError):
    pass


class NonSymmetricError(FormSyncError, ValueError):
    pass


class NonPositiveRadiusError(FormSyncError, ValueError):
    pass


class GraphMismatchError(FormSyncError, ValueError):
    """Neighbor structure inconsistent with the ring the controller expects."""


class UnsupportedFormationSizeError(FormSyncError, ValueError):
    pass


class UnsupportedTopologyError(FormSyncError, ValueError):
    pass


class NotContractingError(FormSyncError, ValueError):
    """Coupling matrix not dominating the disturbance growth rate."""


class NonMonotoneTimeError(FormSyncError, ValueError):
    pass


class IntegrationDivergedError(FormSyncError, RuntimeError):
    pass


class ConfigInvalidError(FormSyncError, ValueError):
    pass


class InsufficientDecayError(FormSyncError, ValueError):
    """A norm series never fell below half of its peak."""
