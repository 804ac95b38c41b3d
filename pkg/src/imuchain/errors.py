"""Exception types shared across the package.

The CLI maps these onto exit codes: domain failures (bad data, no
convergence, unreachable targets) exit 1, usage and I/O problems exit 2.
"""


class ImuChainError(Exception):
    """Base class for all package errors."""


class InvalidInputError(ImuChainError):
    """Arguments violate a documented precondition (shape, range, symmetry)."""


class InsufficientDataError(ImuChainError):
    """Not enough samples to run the requested operation."""


class NotStationaryError(ImuChainError):
    """Data presented as stationary shows motion above the threshold."""


class DegenerateDataError(ImuChainError):
    """Point cloud does not span 3-D space (planar or linear data)."""


class ConstraintFailureError(ImuChainError):
    """No ellipsoid fits the data acceptably."""


class AlignmentError(ImuChainError):
    """Sensor streams share no usable temporal overlap."""


class NotConvergedError(ImuChainError):
    """Estimate did not reach the requested confidence."""


class AliasingError(ImuChainError):
    """Requested excitation frequency is at or above the Nyquist limit."""


class InternalError(ImuChainError):
    """An internal consistency check failed; indicates a bug."""


class UnreachableTargetError(ImuChainError):
    """Inverse kinematics did not converge to the target.

    Carries the best angles found and the remaining position residual so
    callers can still inspect the attempt.
    """

    def __init__(self, message, angles=None, residual=None):
        super().__init__(message)
        self.angles = angles
        self.residual = residual
