"""Visual-DVL-inertial odometry: simulation, estimation and trajectory evaluation."""

from ._core import (
    AlignmentError,
    AteReport,
    Config,
    ConfigError,
    EstimatorResult,
    InitializationError,
    ParseError,
    SensorLog,
    Trajectory,
    evaluate,
    load_config,
    parse_config,
    parse_log,
    parse_trajectory,
    read_log,
    read_trajectory,
    run,
    simulate,
    write_log,
    write_trajectory,
)

__all__ = [
    "AlignmentError",
    "AteReport",
    "Config",
    "ConfigError",
    "EstimatorResult",
    "InitializationError",
    "ParseError",
    "SensorLog",
    "Trajectory",
    "evaluate",
    "load_config",
    "parse_config",
    "parse_log",
    "parse_trajectory",
    "read_log",
    "read_trajectory",
    "run",
    "simulate",
    "write_log",
    "write_trajectory",
]
