"""Command-line front end.

Subcommands: simulate, calibrate, estimate, freq-sweep, reach.
Exit codes: 0 success, 1 a domain failure (no convergence, bad data,
unreachable target), 2 usage or file problems.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .calibration import CalibrationProfile, build_profile
from .errors import (
    AlignmentError,
    ConstraintFailureError,
    DegenerateDataError,
    ImuChainError,
    InsufficientDataError,
    InvalidInputError,
    NotConvergedError,
    NotStationaryError,
    UnreachableTargetError,
)
from .estimator import EstimationConfig, pairwise_estimate
from .model import EstimatedModel, forward_kinematics, solve_ik, to_urdf
from .simulator import ChainSpec, NoiseSpec, TrajectorySpec, freq_sweep, simulate_imu

_DOMAIN_ERRORS = (
    AlignmentError,
    ConstraintFailureError,
    DegenerateDataError,
    InsufficientDataError,
    NotConvergedError,
    NotStationaryError,
    UnreachableTargetError,
)


def _comma_floats(text):
    try:
        values = [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _xyz(text):
    values = _comma_floats(text)
    if len(values) != 3:
        raise argparse.ArgumentTypeError("expected x,y,z")
    return np.array(values)


def _pair(text):
    parts = [p for p in text.split(",") if p]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two ids: imu_a,imu_p")
    return parts


def _load_config(path) -> EstimationConfig:
    if path is None:
        return EstimationConfig()
    return EstimationConfig.from_dict(io.load_json(path))


def cmd_simulate(args) -> int:
    spec = io.load_json(args.chain)
    chain = ChainSpec.from_dict(spec)
    traj_doc = io.load_json(args.trajectory)
    trajectory = TrajectorySpec.from_dict(traj_doc)
    noise = NoiseSpec.from_dict(traj_doc.get("noise", {}))
    if args.seed is not None:
        noise = NoiseSpec.from_dict({**noise.to_dict(), "seed": args.seed})
    streams = simulate_imu(chain, trajectory, noise)
    io.write_imu_log(args.out, streams)
    print("wrote %d streams (%d samples each) to %s"
          % (len(streams), trajectory.n_samples, args.out))
    return 0


def cmd_calibrate(args) -> int:
    streams = io.read_imu_log(args.log)
    if args.imu_id not in streams:
        raise InvalidInputError("log has no records for %r" % args.imu_id)
    stream = streams[args.imu_id]
    rotation_from = (
        args.rotation_from if args.rotation_from is not None
        else args.stationary_until
    )
    stationary = stream.slice_time(stream.times[0], args.stationary_until)
    rotation = stream.slice_time(rotation_from, stream.times[-1])
    config = _load_config(args.config)
    profile = build_profile(stationary, rotation, config.sg, g_mag=args.g_mag)
    profile.save(args.out)
    print("wrote profile for %s to %s" % (args.imu_id, args.out))
    return 0


def cmd_estimate(args) -> int:
    streams = io.read_imu_log(args.log)
    imu_a, imu_p = args.pair
    for imu_id in (imu_a, imu_p):
        if imu_id not in streams:
            raise InvalidInputError("log has no records for %r" % imu_id)
    profile_a = CalibrationProfile.load(args.profile_a) if args.profile_a else None
    profile_p = CalibrationProfile.load(args.profile_p) if args.profile_p else None
    config = _load_config(args.config)
    estimate = pairwise_estimate(
        streams[imu_a], streams[imu_p], profile_a, profile_p, config
    )
    payload = {
        "imu_a": imu_a,
        "imu_p": imu_p,
        "r_hat": estimate.r_hat.tolist(),
        "Sigma_r": estimate.Sigma_r.tolist(),
        "orientation_mode": estimate.orientation_mode.tolist(),
        "bingham_A": estimate.bingham_A.tolist(),
        "converged": estimate.converged,
        "n_samples": estimate.n_samples,
        "position_dispersion": estimate.position_dispersion,
        "orientation_dispersion_deg": estimate.orientation_dispersion_deg,
    }
    if args.out:
        io.save_json(args.out, payload)
    if args.trace:
        tr = estimate.trace
        rows = np.column_stack(
            [tr.times, tr.r_hat, tr.position_dispersion,
             tr.orientation_dispersion_deg]
        )
        io.write_csv(
            args.trace,
            ["t", "r_x", "r_y", "r_z", "position_dispersion",
             "orientation_dispersion_deg"],
            rows,
        )
    print(json.dumps(payload))
    if not estimate.converged:
        raise NotConvergedError(
            "estimate did not converge: dispersion %.4g m / %.4g deg"
            % (estimate.position_dispersion, estimate.orientation_dispersion_deg)
        )
    return 0


def cmd_freq_sweep(args) -> int:
    table = freq_sweep(
        args.length, args.ratios, sample_rate=args.sample_rate,
        n_samples=args.samples,
    )
    io.write_csv(args.out, ["ratio", "length_gain"], table)
    for ratio, gain in table:
        print("ratio %.4g -> gain %.6f" % (ratio, gain))
    return 0


def cmd_reach(args) -> int:
    if args.model.endswith(".urdf") or args.model.endswith(".xml"):
        from .model import from_urdf

        with open(args.model) as fh:
            model = from_urdf(fh.read())
    else:
        model = EstimatedModel.load(args.model)
    target = args.target + np.array([0.0, 0.0, args.offset_z])
    angles = solve_ik(model, target, tol=args.tol)
    pose = forward_kinematics(model, angles)
    residual = float(np.linalg.norm(pose.translation - target))
    print("target: %s" % target.tolist())
    print("angles_rad: %s" % angles.tolist())
    print("fk_position: %s" % pose.translation.tolist())
    print("residual_m: %.6g" % residual)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imuchain",
        description="Estimate rigid-link chain kinematics from paired IMU logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize an IMU log from a chain")
    p.add_argument("--chain", required=True, help="chain geometry JSON")
    p.add_argument("--trajectory", required=True,
                   help="trajectory JSON (may embed a noise section)")
    p.add_argument("--out", required=True, help="output JSONL log")
    p.add_argument("--seed", type=int, default=None,
                   help="override the noise seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="build a sensor profile from a log")
    p.add_argument("log", help="JSONL log with the calibration recording")
    p.add_argument("--imu-id", required=True)
    p.add_argument("--stationary-until", type=float, required=True,
                   help="end time of the motionless segment, seconds")
    p.add_argument("--rotation-from", type=float, default=None,
                   help="start time of the slow-rotation segment")
    p.add_argument("--g-mag", type=float, default=9.80665)
    p.add_argument("--config", default=None, help="estimation config JSON")
    p.add_argument("--out", required=True, help="output profile JSON")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("estimate", help="estimate the pose between two IMUs")
    p.add_argument("log", help="JSONL log")
    p.add_argument("--pair", required=True, type=_pair, help="imu_a,imu_p")
    p.add_argument("--profile-a", default=None)
    p.add_argument("--profile-p", default=None)
    p.add_argument("--config", default=None, help="estimation config JSON")
    p.add_argument("--out", default=None, help="output estimate JSON")
    p.add_argument("--trace", default=None, help="per-sample trace CSV")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("freq-sweep",
                       help="recovered-length ratio vs excitation frequency")
    p.add_argument("--ratios", type=_comma_floats, required=True,
                   help="comma-separated frequency / sample-rate ratios")
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--sample-rate", type=float, default=100.0)
    p.add_argument("--samples", type=int, default=3000)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_freq_sweep)

    p = sub.add_parser("reach", help="solve IK on an estimated model")
    p.add_argument("--model", required=True, help="model JSON or URDF")
    p.add_argument("--target", type=_xyz, required=True, help="x,y,z meters")
    p.add_argument("--offset-z", type=float, default=0.05,
                   help="extra height added to the target")
    p.add_argument("--tol", type=float, default=5e-3,
                   help="IK position tolerance, meters")
    p.set_defaults(func=cmd_reach)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except _DOMAIN_ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (ImuChainError, OSError, json.JSONDecodeError, KeyError) as exc:
        # remaining package errors are misuse; file and parse problems too
        print("error: %s" % exc, file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
