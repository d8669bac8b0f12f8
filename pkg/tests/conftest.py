import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def canonical_triangles(mesh):
    """Order-independent geometric fingerprint of a mesh: the sorted set of
    triangles, each given by its sorted vertex coordinate tuples."""
    tris = []
    for tri in mesh.triangles:
        pts = sorted(tuple(np.round(mesh.vertices[v], 12)) for v in tri)
        tris.append(tuple(pts))
    return sorted(tris)


def random_ccw_triangle(rng, scale=1.0):
    """A non-degenerate counterclockwise triangle with O(scale) edges."""
    while True:
        pts = rng.uniform(-scale, scale, size=(3, 2))
        area = 0.5 * (
            (pts[1, 0] - pts[0, 0]) * (pts[2, 1] - pts[0, 1])
            - (pts[2, 0] - pts[0, 0]) * (pts[1, 1] - pts[0, 1])
        )
        if area > 0.05 * scale**2:
            return pts
        if area < -0.05 * scale**2:
            return pts[[0, 2, 1]]
