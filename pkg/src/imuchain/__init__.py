"""Kinematic model estimation for rigid-link chains from paired IMUs."""

from .bingham import (
    BinghamState,
    bingham_mode,
    bingham_update,
    h_matrix,
    mode_rotation,
    orientation_dispersion,
    sigma_h,
)
from .calibration import (
    CalibrationProfile,
    QuadricParams,
    apply_calibration,
    build_profile,
    ellipsoid_fit,
    quadric_to_calibration,
    stationary_stats,
)
from .errors import (
    AliasingError,
    AlignmentError,
    ConstraintFailureError,
    DegenerateDataError,
    ImuChainError,
    InsufficientDataError,
    InternalError,
    InvalidInputError,
    NotConvergedError,
    NotStationaryError,
    UnreachableTargetError,
)
from .estimator import (
    EstimationConfig,
    RelativePoseEstimate,
    pairwise_estimate,
    stopping_criterion,
)
from .model import (
    EstimatedModel,
    JointModel,
    compose_joint_pose,
    forward_kinematics,
    from_urdf,
    model_from_chain,
    solve_ik,
    to_urdf,
)
from .rls import (
    MotionSample,
    PositionRls,
    averaged_motion_matrix,
    covariance_summary,
    motion_matrix,
    noise_bias_correction,
)
from .sgolay import (
    SgConfig,
    SgWindow,
    derivative_at,
    fit_window,
    interpolate_to,
    smooth_stream,
    value_at,
)
from .simulator import (
    ChainSpec,
    ImuMount,
    JointWaveform,
    LinkSpec,
    NoiseSpec,
    TrajectorySpec,
    freq_sweep,
    imu_world_kinematics,
    position_gain,
    shake_trajectory,
    simulate_imu,
)
from .streams import ImuStream
from .transforms import RigidTransform, axis_angle_rotation, rotation_angle, skew

__version__ = "0.1.0"
