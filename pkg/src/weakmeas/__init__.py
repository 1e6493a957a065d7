"""Continuous weak measurement of a double-dot qubit.

Simulation of a continuously monitored two-level system: stochastic
measurement records, state reconstruction from the record, confidence and
backaction quantification, goal-programming optimization of the
measurement scenario, and the discord lower bound on projective-measurement
confidence.
"""

__version__ = "0.1.0"

from .qstate import BlochVector, DensityMatrix  # noqa: F401
from .dynamics import SimConfig, TrajectoryRecord, WienerStream  # noqa: F401
from .detector import DetectorModel, QpcParams  # noqa: F401
