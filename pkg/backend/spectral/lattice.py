"""
Geometry of Z^d: boxes, dyadic cubes and their partitions, nearest-neighbour
graphs, truncated Laplacians and Folner boxes.

Vertices of a region are enumerated lexicographically by coordinates, first
axis most significant (numpy C order), everywhere in the toolkit.
"""

# Built-in imports
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

# External imports
import numpy as np

# Own imports
from common.exceptions import CapExceededError
from spectral.linalg import SymMatrix


MAX_VERTICES = 2**20


@dataclass(frozen=True)
class Region:
    """Box origin + [0, sides) in Z^d."""

    d: int
    origin: Tuple[int, ...]
    sides: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(int(o) for o in self.origin))
        object.__setattr__(self, "sides", tuple(int(s) for s in self.sides))
        if self.d < 1:
            raise ValueError("dimension must be at least 1")
        if len(self.origin) != self.d or len(self.sides) != self.d:
            raise ValueError("origin and sides must have length d")
        if min(self.sides) < 1:
            raise ValueError("sides must be positive")

    @classmethod
    def cube(cls, d: int, side: int, origin: Optional[Sequence[int]] = None) -> "Region":
        return cls(d, tuple(origin) if origin is not None else (0,) * d, (side,) * d)

    @classmethod
    def dyadic_cube(cls, level: int, d: int) -> "Region":
        """C_i = {0, ..., 2^i - 1}^d."""
        return cls.cube(d, 2**level)

    @property
    def volume(self) -> int:
        return int(np.prod(self.sides, dtype=np.int64))

    def coordinates(self) -> np.ndarray:
        """(volume, d) integer array in lexicographic order."""
        grid = np.indices(self.sides).reshape(self.d, -1).T
        return grid + np.array(self.origin)

    def boundary_ratio(self) -> float:
        """|inner boundary| / volume in the full lattice (closed form)."""
        interior = np.prod([max(s - 2, 0) for s in self.sides], dtype=np.int64)
        return float(self.volume - interior) / self.volume

    def to_dict(self) -> dict:
        return {"d": self.d, "origin": list(self.origin), "sides": list(self.sides)}

    @classmethod
    def from_dict(cls, data: dict) -> "Region":
        return cls(int(data["d"]), tuple(data["origin"]), tuple(data["sides"]))


@dataclass(frozen=True, eq=False)
class RegionGraph:
    """Nearest-neighbour graph spanned by a finite vertex set of Z^d."""

    coords: np.ndarray
    edges: np.ndarray
    degrees: np.ndarray
    region: Optional[Region] = None

    @property
    def n_vertices(self) -> int:
        return self.coords.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]


def _degrees(n: int, edges: np.ndarray) -> np.ndarray:
    degrees = np.zeros(n, dtype=np.int64)
    if edges.size:
        np.add.at(degrees, edges[:, 0], 1)
        np.add.at(degrees, edges[:, 1], 1)
    return degrees


def _sorted_edges(pairs: Sequence[np.ndarray]) -> np.ndarray:
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    edges = np.concatenate(pairs).astype(np.int64)
    if edges.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    edges = np.sort(edges, axis=1)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return edges[order]


def _freeze(graph: RegionGraph) -> RegionGraph:
    for array in (graph.coords, graph.edges, graph.degrees):
        array.setflags(write=False)
    return graph


@lru_cache(maxsize=64)
def _box_graph(region: Region) -> RegionGraph:
    index = np.arange(region.volume).reshape(region.sides)
    pairs = []
    for axis in range(region.d):
        lower = [slice(None)] * region.d
        upper = [slice(None)] * region.d
        lower[axis] = slice(0, -1)
        upper[axis] = slice(1, None)
        pairs.append(
            np.stack((index[tuple(lower)].ravel(), index[tuple(upper)].ravel()), axis=1)
        )
    edges = _sorted_edges(pairs)
    return _freeze(
        RegionGraph(
            coords=region.coordinates(),
            edges=edges,
            degrees=_degrees(region.volume, edges),
            region=region,
        )
    )


def region_graph(region: Region, max_vertices: int = MAX_VERTICES) -> RegionGraph:
    if region.volume > max_vertices:
        raise CapExceededError(
            f"region has {region.volume} vertices, cap is {max_vertices}",
            hint="use a smaller box or raise max_vertices in the profile",
        )
    return _box_graph(region)


def box_graph(d: int, sides: Sequence[int], max_vertices: int = MAX_VERTICES) -> RegionGraph:
    """Nearest-neighbour graph on the box [0, sides) of Z^d."""
    return region_graph(Region(d, (0,) * d, tuple(sides)), max_vertices)


def point_set_graph(points: np.ndarray) -> RegionGraph:
    """
    Graph spanned by an arbitrary finite set of lattice points; vertices are
    re-ordered lexicographically.
    """
    points = np.unique(np.asarray(points, dtype=np.int64), axis=0)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("expected a nonempty (n, d) array of lattice points")
    lookup = {tuple(p): m for m, p in enumerate(points)}
    pairs = []
    for axis in range(points.shape[1]):
        step = np.zeros(points.shape[1], dtype=np.int64)
        step[axis] = 1
        found = [
            (m, lookup[tuple(p + step)])
            for m, p in enumerate(points)
            if tuple(p + step) in lookup
        ]
        if found:
            pairs.append(np.array(found))
    edges = _sorted_edges(pairs)
    return _freeze(
        RegionGraph(coords=points, edges=edges, degrees=_degrees(len(points), edges))
    )


def inner_boundary(graph: RegionGraph) -> np.ndarray:
    """Vertices having a lattice neighbour outside the vertex set (boolean mask)."""
    d = graph.coords.shape[1]
    return graph.degrees < 2 * d


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    """C_j split into 2^{d(j-i)} subcubes of side 2^i."""

    j: int
    i: int
    d: int
    cell_of: np.ndarray
    cells: tuple
    boundary: np.ndarray

    @property
    def n_boundary(self) -> int:
        return int(np.count_nonzero(self.boundary))


@lru_cache(maxsize=64)
def dyadic_partition(j: int, i: int, d: int) -> DyadicPartition:
    """
    Assign every vertex of C_j to its dyadic subcube (cells enumerated
    lexicographically by subcube position); a vertex is a boundary vertex iff
    a lattice neighbour inside C_j lies in another subcube. Each cell lists
    its members in lexicographic order, which matches the vertex order of C_i.
    """
    if not 0 <= i <= j:
        raise ValueError(f"dyadic partition needs 0 <= i <= j, got i={i}, j={j}")
    graph = region_graph(Region.dyadic_cube(j, d))
    cells_per_axis = 2 ** (j - i)
    cell_coords = graph.coords // 2**i
    cell_of = np.ravel_multi_index(cell_coords.T, (cells_per_axis,) * d)
    boundary = np.zeros(graph.n_vertices, dtype=bool)
    if graph.n_edges:
        crossing = cell_of[graph.edges[:, 0]] != cell_of[graph.edges[:, 1]]
        boundary[graph.edges[crossing, 0]] = True
        boundary[graph.edges[crossing, 1]] = True
    order = np.argsort(cell_of, kind="stable")
    cells = tuple(
        np.array(members) for members in np.split(order, cells_per_axis**d)
    )
    for array in (cell_of, boundary, *cells):
        array.setflags(write=False)
    return DyadicPartition(j, i, d, cell_of, cells, boundary)


def boundary_fraction(j: int, i: int, d: int) -> float:
    """beta_{i,j}: boundary vertices of the dyadic partition / |C_j|."""
    partition = dyadic_partition(j, i, d)
    return partition.n_boundary / 2 ** (j * d)


def laplacian_from_edges(
    n: int, edges: np.ndarray, potential: Optional[Sequence[float]] = None
) -> SymMatrix:
    """deg(x) (times omega(x)) on the diagonal, -1 on every edge."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    matrix = np.zeros((n, n))
    degrees = _degrees(n, edges)
    if edges.size:
        matrix[edges[:, 0], edges[:, 1]] = -1.0
        matrix[edges[:, 1], edges[:, 0]] = -1.0
    diagonal = degrees.astype(float)
    if potential is not None:
        potential = np.asarray(potential, dtype=float)
        if potential.shape != (n,):
            raise ValueError(
                f"potential has {potential.size} values for {n} vertices"
            )
        diagonal = diagonal * potential
    matrix[np.diag_indices(n)] = diagonal
    return SymMatrix(matrix)


def laplacian(graph: RegionGraph, potential: Optional[Sequence[float]] = None) -> SymMatrix:
    """Combinatorial Laplacian with in-graph degrees, optionally deg * omega."""
    return laplacian_from_edges(graph.n_vertices, graph.edges, potential)


def folner_boxes(d: int, sides: Sequence[int]) -> list:
    """Centred boxes of the given (ascending) side lengths."""
    sides = [int(s) for s in sides]
    if any(b < a for a, b in zip(sides, sides[1:])):
        raise ValueError("Folner box sides must be ascending")
    return [Region(d, (-(s // 2),) * d, (s,) * d) for s in sides]
