"""Loss minimization on distribution feeders: cost-benefit greedy selection
and particle swarm compensation sizing."""

from importlib.resources import files

from .network import Branch, Bus, Device, Network, branch_admittance, validate
from .powerflow import check_constraints, solve
from .pso import PsoConfig, rastrigin

__all__ = [
    "Branch", "Bus", "Device", "Network", "PsoConfig",
    "branch_admittance", "check_constraints", "data_path", "rastrigin", "solve", "validate",
]


def data_path(name: str):
    """Path of a file shipped in ``gridloss/data`` (e.g. ``"feeder6.yaml"``)."""
    return files(__name__) / "data" / name
