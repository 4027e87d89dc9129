import numpy as np
import pytest

from flexlab import suspension as su
from flexlab.geometry import Polyhedron
from flexlab.io import bundled, load_polyhedron, load_suspension_spec
from flexlab.pseudomanifold import PseudoManifold

SWEEP = np.linspace(51.5, 99.5, 100)


@pytest.fixture(scope="session")
def spec():
    return load_suspension_spec(bundled("hexagonal_suspension.yaml"))


@pytest.fixture(scope="session")
def model(spec):
    return su.build(spec)


@pytest.fixture(scope="session")
def sweep_samples():
    return SWEEP


def load(name):
    return load_polyhedron(bundled(name))


def unit_tetrahedron(reverse=False):
    simplices = [["o", "y", "x"], ["o", "x", "z"], ["o", "z", "y"], ["x", "y", "z"]]
    if reverse:
        simplices = [s[::-1] for s in simplices]
    K = PseudoManifold(simplices)
    coords = {"o": [0, 0, 0], "x": [1, 0, 0], "y": [0, 1, 0], "z": [0, 0, 1]}
    return Polyhedron(K, coords)


def convex_hull_polyhedron(points):
    """Outward-oriented triangulated convex hull (scipy used only as an oracle here)."""
    from scipy.spatial import ConvexHull

    hull = ConvexHull(points)
    names = [f"v{i}" for i in range(len(points))]
    c = points.mean(axis=0)
    simplices = []
    for tri in hull.simplices:
        a, b, d = points[tri]
        if np.dot(np.cross(b - a, d - a), a - c) < 0:
            tri = tri[[0, 2, 1]]
        simplices.append([names[i] for i in tri])
    used = sorted({v for s in simplices for v in s}, key=lambda s: int(s[1:]))
    K = PseudoManifold(simplices, used)
    return Polyhedron(K, {v: points[int(v[1:])] for v in used}), hull
