"""Mixed finite elements for the Laplace-Beltrami problem on sphere trace meshes."""

from ._mqtrace import (
    ConfigError,
    Error,
    MeshStats,
    TraceMesh,
    eoc,
    run_study,
    solve,
    sphere_mesh,
)

__all__ = [
    "ConfigError",
    "Error",
    "MeshStats",
    "TraceMesh",
    "eoc",
    "run_study",
    "solve",
    "sphere_mesh",
]
