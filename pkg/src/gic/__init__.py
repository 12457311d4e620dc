"""Geometric impedance control on SE(3).

Product-of-exponentials kinematics, task-space dynamics, geometrically
consistent pose errors and impedance laws, and a deterministic fixed-step
simulator for regulation and tracking studies.
"""
__version__ = "0.1.0"

from .se3 import Pose  # noqa: F401
