from .allocation import (
    Thruster,
    ThrusterLayout,
    ThrusterSetpoint,
    allocate,
    wrench_from,
)
from .guidance import berth_velocity
from .observer import (
    EkfState,
    ExtendedKalmanFilter,
    ObserverConfig,
    ekf_predict,
    ekf_update,
    nis_consistency,
)
from .pid import PidGains, PidState, VelocityPid, pid_step


__all__ = [
    "EkfState",
    "ExtendedKalmanFilter",
    "ObserverConfig",
    "PidGains",
    "PidState",
    "Thruster",
    "ThrusterLayout",
    "ThrusterSetpoint",
    "VelocityPid",
    "allocate",
    "berth_velocity",
    "ekf_predict",
    "ekf_update",
    "nis_consistency",
    "pid_step",
    "wrench_from",
]
