"""Shortcut-to-adiabaticity state conversion between two cavity modes
coupled through a mechanical mode."""

from ._accel import backend_name
from .model import (
    EigenSystem,
    LabFrameParams,
    ModeState,
    SystemParams,
    build_dynamic_matrix,
    dark_mode,
    eigensystem_damped_uniform,
    eigensystem_numeric,
    eigensystem_undamped,
    preset_experimental,
)
from .pulses import InvariantSchedule, Ordering, PulseSample, Sin4Schedule, TabulatedSchedule, sample
from .integrator import IntegrationConfig, ScheduleGenerator, Trajectory, converge, integrate

__version__ = "0.1.0"
