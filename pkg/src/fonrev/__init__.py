"""Revenue-maximizing provisioning for flexible optical networks."""

from .netmodel import (
    DEFAULT_CONSTANTS,
    ModeCatalog,
    Network,
    PhysicsConstants,
    Request,
    TransmissionMode,
    load_catalog,
    load_demands,
    load_topology,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONSTANTS",
    "ModeCatalog",
    "Network",
    "PhysicsConstants",
    "Request",
    "TransmissionMode",
    "load_catalog",
    "load_demands",
    "load_topology",
]
