"""Triangular meshes for two-point flux finite volumes and the hexagram generator."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InvalidInput


@dataclass(frozen=True)
class TriMesh:
    """Triangle mesh with its finite-volume edge table.

    Attributes
    ----------
    vertices : (N, 2) array
    triangles : (J, 3) int array
    areas, centroids : per-cell data
    edges : (E, 2) vertex pairs
    edge_cells : (E, 2) incident cells, second entry -1 on the boundary
    edge_length, edge_dist : l_sigma and d_sigma per edge
    """

    vertices: np.ndarray
    triangles: np.ndarray
    areas: np.ndarray
    centroids: np.ndarray
    edges: np.ndarray
    edge_cells: np.ndarray
    edge_length: np.ndarray
    edge_dist: np.ndarray

    @property
    def size(self) -> int:
        return self.triangles.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self.areas

    @property
    def interior(self) -> np.ndarray:
        return self.edge_cells[:, 1] >= 0

    def coords(self) -> np.ndarray:
        return self.centroids

    @classmethod
    def from_arrays(cls, vertices, triangles) -> "TriMesh":
        V = np.asarray(vertices, dtype=float)
        T = np.asarray(triangles, dtype=np.int64)
        P = V[T]
        e1, e2 = P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]
        areas = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        cent = P.mean(axis=1)

        table: dict[tuple[int, int], list[int]] = {}
        for k, tri in enumerate(T):
            for a, b in ((0, 1), (1, 2), (2, 0)):
                key = tuple(sorted((int(tri[a]), int(tri[b]))))
                table.setdefault(key, []).append(k)
        edges, cells = [], []
        for key, owners in table.items():
            if len(owners) > 2:
                raise InvalidInput(f"edge {key} shared by {len(owners)} triangles")
            edges.append(key)
            cells.append((owners[0], owners[1] if len(owners) == 2 else -1))
        edges = np.array(edges, dtype=np.int64)
        cells = np.array(cells, dtype=np.int64)
        va, vb = V[edges[:, 0]], V[edges[:, 1]]
        length = np.linalg.norm(vb - va, axis=1)
        dist = np.empty(len(edges))
        inner = cells[:, 1] >= 0
        dist[inner] = np.linalg.norm(cent[cells[inner, 0]] - cent[cells[inner, 1]], axis=1)
        # distance from the centroid to the boundary edge line
        t = vb[~inner] - va[~inner]
        r = cent[cells[~inner, 0]] - va[~inner]
        dist[~inner] = np.abs(t[:, 0] * r[:, 1] - t[:, 1] * r[:, 0]) / length[~inner]
        return cls(V, T, areas, cent, edges, cells, length, dist)


def _hexagram(R: float):
    ang_star = np.arange(6) * np.pi / 3
    star = R * np.stack([np.sin(ang_star), np.cos(ang_star)], axis=1)
    ang_hex = ang_star + np.pi / 6
    hexa = R / np.sqrt(3) * np.stack([np.sin(ang_hex), np.cos(ang_hex)], axis=1)
    # vertex 0 is the centre, 1..6 star tips, 7..12 inner hexagon
    V = np.vstack([[0.0, 0.0], star, hexa])
    tris = []
    for k in range(6):
        h_prev = 7 + (k - 1) % 6
        h_next = 7 + k
        tris.append((1 + k, h_prev, h_next))
        tris.append((0, 7 + k, 7 + (k + 1) % 6))
    return V, np.array(tris)


def _refine(V: np.ndarray, T: np.ndarray):
    verts = [tuple(v) for v in V]
    cache: dict[tuple[int, int], int] = {}

    def mid(a, b):
        key = (min(a, b), max(a, b))
        if key not in cache:
            verts.append(tuple(0.5 * (V[a] + V[b])))
            cache[key] = len(verts) - 1
        return cache[key]

    out = []
    for a, b, c in T:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    return np.array(verts), np.array(out)


def star_mesh(R: float = 1.0, refine: int = 0) -> TriMesh:
    """Hexagram of circumradius R split into 12 * 4**refine equilateral triangles.

    The star is the union of the two equilateral triangles with vertices
    ``(R sin(k pi / 3), R cos(k pi / 3))`` for even and odd k.
    """
    if not R > 0:
        raise InvalidInput("R must be positive")
    if refine < 0:
        raise InvalidInput("refinement level must be nonnegative")
    V, T = _hexagram(R)
    for _ in range(refine):
        V, T = _refine(V, T)
    return TriMesh.from_arrays(V, T)


def write_mesh(mesh: TriMesh, path) -> None:
    path = Path(path)
    lines = [f"vertices {mesh.vertices.shape[0]}"]
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in mesh.vertices]
    lines.append(f"triangles {mesh.size}")
    lines += [" ".join(str(int(i)) for i in tri) for tri in mesh.triangles]
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write mesh to {path}: {exc}") from exc


def read_mesh(path) -> TriMesh:
    path = Path(path)
    lines = [ln.split() for ln in path.read_text().splitlines() if ln.strip()]
    if lines[0][0] != "vertices":
        raise InvalidInput(f"{path}: expected 'vertices N' header")
    nv = int(lines[0][1])
    V = np.array([[float(a) for a in ln] for ln in lines[1 : 1 + nv]])
    head = lines[1 + nv]
    if head[0] != "triangles":
        raise InvalidInput(f"{path}: expected 'triangles J' header")
    nt = int(head[1])
    T = np.array([[int(a) for a in ln] for ln in lines[2 + nv : 2 + nv + nt]])
    return TriMesh.from_arrays(V, T)
