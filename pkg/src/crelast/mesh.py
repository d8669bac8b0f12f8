"""Triangulations of the unit square and the L-shaped domain.

Meshes are plain vertex/triangle arrays plus derived edge topology. The
Crouzeix-Raviart degrees of freedom live on edges, so every mesh carries a
canonical edge list (smaller vertex index first), the per-triangle edge
triple (edge i opposite local vertex i) and boundary flags. Uniform (red)
refinement keeps a link to the parent mesh so coarse-to-fine transfer can
locate ancestors without geometric searches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class TriangleMesh:
    """A conforming triangulation with edge topology.

    Attributes:
        vertices: (V, 2) float array of coordinates.
        triangles: (T, 3) int array, counterclockwise vertex triples.
        edges: (E, 2) int array, each row sorted (small index first).
        tri_edges: (T, 3) int array; tri_edges[t, i] is the edge opposite
            local vertex i of triangle t.
        edge_boundary: (E,) bool array, True iff the edge lies on the
            domain boundary (shared by exactly one triangle).
        h: mesh diameter, max over triangles of the longest edge length.
        parent: mesh this one was refined from, or None.
        parent_triangle: (T,) int array mapping each triangle to its
            parent triangle index, or None for a root mesh.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    tri_edges: np.ndarray
    edge_boundary: np.ndarray
    h: float
    parent: Optional["TriangleMesh"] = field(default=None, repr=False)
    parent_triangle: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]


def mesh_from_arrays(vertices, triangles) -> TriangleMesh:
    """Build a TriangleMesh from raw vertex/triangle arrays.

    Computes edges, tri_edges, boundary flags and h. Raises ValueError if
    any triangle is degenerate or inverted (signed area <= 0), or if an
    edge is shared by more than two triangles.
    """
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
    triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    if triangles.size == 0:
        raise ValueError("mesh has no triangles")

    areas = signed_areas(vertices, triangles)
    if np.any(areas <= 0.0):
        bad = int(np.argmin(areas))
        raise ValueError(f"triangle {bad} has non-positive signed area {areas[bad]:g}")

    # edge i is opposite local vertex i: endpoints (i+1, i+2) mod 3
    ends = np.stack(
        [triangles[:, [1, 2]], triangles[:, [2, 0]], triangles[:, [0, 1]]], axis=1
    )  # (T, 3, 2)
    ends = ends.reshape(-1, 2)
    lo = ends.min(axis=1)
    hi = ends.max(axis=1)
    keys = lo * vertices.shape[0] + hi
    uniq, inverse = np.unique(keys, return_inverse=True)
    tri_edges = inverse.reshape(-1, 3)
    edges = np.stack([uniq // vertices.shape[0], uniq % vertices.shape[0]], axis=1)

    counts = np.bincount(inverse, minlength=len(uniq))
    if np.any(counts > 2):
        raise ValueError("an edge is shared by more than two triangles")
    edge_boundary = counts == 1

    lengths = np.linalg.norm(vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
    return TriangleMesh(
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        tri_edges=tri_edges,
        edge_boundary=edge_boundary,
        h=float(lengths.max()),
    )


def build_unit_square_mesh(n: int) -> TriangleMesh:
    """n-by-n grid on [0,1]^2, each cell split along its lower-left to
    upper-right diagonal; h = sqrt(2)/n."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    idx = np.arange((n + 1) * (n + 1)).reshape(n + 1, n + 1)  # idx[j, i], row = y
    xs = np.arange(n + 1) / n
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.stack([X.ravel(), Y.ravel()], axis=1)

    ll = idx[:-1, :-1].ravel()
    lr = idx[:-1, 1:].ravel()
    ur = idx[1:, 1:].ravel()
    ul = idx[1:, :-1].ravel()
    lower = np.stack([ll, lr, ur], axis=1)
    upper = np.stack([ll, ur, ul], axis=1)
    triangles = np.concatenate([lower, upper], axis=0)
    # interleave so the two triangles of a cell sit next to each other
    order = np.argsort(np.tile(np.arange(n * n), 2), kind="stable")
    return mesh_from_arrays(vertices, triangles[order])


def build_lshape_mesh(n: int) -> TriangleMesh:
    """L-shaped domain [0,1]^2 minus [1/2,1]^2 on an n-by-n grid.

    n must be even so the reentrant corner (1/2, 1/2) is a grid point.
    Cells whose lower-left corner has both coordinates >= 1/2 are dropped;
    the rest are split as in build_unit_square_mesh.
    """
    if n < 1 or n % 2 != 0:
        raise ValueError(f"n must be an even positive integer, got {n}")
    half = n // 2
    cell_i, cell_j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    keep = ~((cell_i >= half) & (cell_j >= half))
    ci = cell_i[keep]
    cj = cell_j[keep]

    # compress vertex numbering to used grid points only
    grid = -np.ones((n + 1, n + 1), dtype=np.int64)  # grid[j, i]
    corners_i = np.concatenate([ci, ci + 1, ci + 1, ci])
    corners_j = np.concatenate([cj, cj, cj + 1, cj + 1])
    grid[corners_j, corners_i] = 0
    jj, ii = np.nonzero(grid == 0)
    grid[jj, ii] = np.arange(len(jj))
    vertices = np.stack([ii / n, jj / n], axis=1)

    ll = grid[cj, ci]
    lr = grid[cj, ci + 1]
    ur = grid[cj + 1, ci + 1]
    ul = grid[cj + 1, ci]
    triangles = np.empty((2 * len(ci), 3), dtype=np.int64)
    triangles[0::2] = np.stack([ll, lr, ur], axis=1)
    triangles[1::2] = np.stack([ll, ur, ul], axis=1)
    return mesh_from_arrays(vertices, triangles)


def uniform_refine(mesh: TriangleMesh) -> TriangleMesh:
    """Red refinement: each triangle splits into 4 congruent children via
    edge midpoints. The result records mesh as its parent."""
    nv = mesh.n_vertices
    midpoints = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
    vertices = np.concatenate([mesh.vertices, midpoints], axis=0)

    v0, v1, v2 = mesh.triangles.T
    m0 = nv + mesh.tri_edges[:, 0]
    m1 = nv + mesh.tri_edges[:, 1]
    m2 = nv + mesh.tri_edges[:, 2]
    T = mesh.n_triangles
    children = np.empty((4 * T, 3), dtype=np.int64)
    children[0::4] = np.stack([v0, m2, m1], axis=1)
    children[1::4] = np.stack([v1, m0, m2], axis=1)
    children[2::4] = np.stack([v2, m1, m0], axis=1)
    children[3::4] = np.stack([m0, m1, m2], axis=1)

    fine = mesh_from_arrays(vertices, children)
    fine.parent = mesh
    fine.parent_triangle = np.repeat(np.arange(T), 4)
    return fine


def refine_times(mesh: TriangleMesh, k: int) -> TriangleMesh:
    """Apply uniform_refine k times."""
    out = mesh
    for _ in range(k):
        out = uniform_refine(out)
    return out


def ancestor_triangles(fine: TriangleMesh, coarse: TriangleMesh) -> np.ndarray:
    """Map each triangle of `fine` to its ancestor triangle in `coarse`.

    `fine` must have been produced from `coarse` by repeated uniform_refine
    (identity is checked along the parent chain); otherwise ValueError.
    """
    if fine is coarse:
        return np.arange(fine.n_triangles)
    chain = []
    m = fine
    while m.parent is not None:
        chain.append(m.parent_triangle)
        m = m.parent
        if m is coarse:
            amap = chain[-1]
            for link in reversed(chain[:-1]):
                amap = amap[link]
            return amap
    raise ValueError("fine mesh is not a refinement of the given coarse mesh")


def signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    return 0.5 * (
        (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
        - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
    )


def triangle_areas(mesh: TriangleMesh) -> np.ndarray:
    """Positive areas of all triangles."""
    return signed_areas(mesh.vertices, mesh.triangles)


def triangle_area(mesh: TriangleMesh, t: int) -> float:
    """Area of triangle t."""
    return float(triangle_areas(mesh)[t : t + 1][0])


def edge_midpoints(mesh: TriangleMesh) -> np.ndarray:
    """(E, 2) array of edge midpoints; these are the C-R nodes."""
    return 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])


def edge_lengths(mesh: TriangleMesh) -> np.ndarray:
    return np.linalg.norm(mesh.vertices[mesh.edges[:, 0]] - mesh.vertices[mesh.edges[:, 1]], axis=1)


def save_mesh_txt(mesh: TriangleMesh, path) -> None:
    """Plain-text export: `v x y` and `t i j k` lines, 0-based indices."""
    with open(path, "w") as f:
        for x, y in mesh.vertices:
            f.write(f"v {x!r} {y!r}\n")
        for a, b, c in mesh.triangles:
            f.write(f"t {a} {b} {c}\n")


def check_mesh(mesh: TriangleMesh, holes: int = 0) -> None:
    """Assert the TriangleMesh invariants; raises AssertionError on failure.

    Checks edge sharing counts, positive areas, the Euler relation
    V - E + T = 1 (simply connected, bounded faces only) and that h is
    exactly the max triangle diameter.
    """
    counts = np.bincount(mesh.tri_edges.ravel(), minlength=mesh.n_edges)
    assert np.all((counts == 1) | (counts == 2)), "edge shared by !=1,2 triangles"
    assert np.array_equal(counts == 1, mesh.edge_boundary), "boundary flags wrong"
    assert np.all(triangle_areas(mesh) > 0.0), "non-positive triangle area"
    if holes == 0:
        euler = mesh.n_vertices - mesh.n_edges + mesh.n_triangles
        assert euler == 1, f"Euler relation violated: V-E+T={euler}"
    assert mesh.h == float(edge_lengths(mesh).max()), "h is not the max diameter"
