"""Flexible polyhedra and their scissors-congruence invariants.

Exact arithmetic (multi-quadratic fields, elliptic-curve group law) builds
hexagonal suspensions; floating-point geometry evaluates the flexion and the
measures (oriented volume, Dehn invariant, Schlaefli residual, rigidity).
"""

from .elliptic import Curve, CurvePoint, O, add, combo, multiply, on_curve
from .errors import FlexlabError
from .geometry import (
    EUCLIDEAN3,
    EdgeLengths,
    Polyhedron,
    SpaceForm,
    dihedral_angle,
    dihedral_angles,
    edge_lengths,
    face_volume,
    nondegenerate_lengths,
    rigidity,
    sigma_membership,
)
from .io import bundled, load_polyhedron, load_suspension_spec, write_polyhedron
from .measures import (
    DehnInvariant,
    FlexionPath,
    dehn,
    dehn_sweep,
    linking_number,
    monte_carlo_volume,
    oriented_volume,
    schlafli_residual,
)
from .pseudomanifold import PseudoManifold, codim2_faces, validate
from .quadfield import QuadExt, format_quad, parse_quad, sqrt_rational
from .suspension import SuspensionModel, SuspensionSpec, build, flexion_path, vertices_at

__version__ = "0.1.0"

__all__ = [
    "Curve", "CurvePoint", "O", "add", "combo", "multiply", "on_curve",
    "FlexlabError",
    "EUCLIDEAN3", "EdgeLengths", "Polyhedron", "SpaceForm", "dihedral_angle", "dihedral_angles",
    "edge_lengths", "face_volume", "nondegenerate_lengths", "rigidity", "sigma_membership",
    "bundled", "load_polyhedron", "load_suspension_spec", "write_polyhedron",
    "DehnInvariant", "FlexionPath", "dehn", "dehn_sweep", "linking_number",
    "monte_carlo_volume", "oriented_volume", "schlafli_residual",
    "PseudoManifold", "codim2_faces", "validate",
    "QuadExt", "format_quad", "parse_quad", "sqrt_rational",
    "SuspensionModel", "SuspensionSpec", "build", "flexion_path", "vertices_at",
]
