"""Background hexahedral meshes of the unit cube and 1D fiber meshes.

The background mesh is a uniform subdivision of [0,1]^3 into 2^level cells
per side.  Vertex coordinates are always derived from the integer lattice
divided by a power of two, so positions carry no accumulated floating
point error and point location can detect lattice planes exactly.

Boundary face labels follow the cube numbering used throughout the
package: 0 (x=0), 1 (x=1), 4 (y=0), 5 (y=1), 2 (z=0), 3 (z=1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, OutOfDomainError

MAX_LEVEL = 8

# face label -> (axis, side) with side 0 at coordinate 0 and side 1 at coordinate 1
FACE_AXIS_SIDE = {0: (0, 0), 1: (0, 1), 4: (1, 0), 5: (1, 1), 2: (2, 0), 3: (2, 1)}
FACE_LABELS = tuple(sorted(FACE_AXIS_SIDE))


class HexMesh:
    """Uniform hexahedral mesh of the unit cube.

    Vertices are numbered lexicographically with x fastest, cells likewise.
    Each cell stores its 8 vertices in local order k = kx + 2*ky + 4*kz.
    """

    def __init__(self, level: int):
        if level < 0:
            raise ValueError("refinement level must be non-negative")
        if level > MAX_LEVEL:
            raise CapacityError(f"level {level} exceeds the guard {MAX_LEVEL}")
        self.level = level
        self.cells_per_side = 2**level
        self.h = 2.0 ** (-level)
        n = self.cells_per_side
        self.n_vertices = (n + 1) ** 3
        self.n_cells = n**3
        self._vertices = None
        self._cell_vertices = None

    @property
    def vertices(self) -> np.ndarray:
        """Vertex coordinates (n_vertices, 3), integer lattice / 2^level."""
        if self._vertices is None:
            n = self.cells_per_side
            ii = np.arange(self.n_vertices)
            ix = ii % (n + 1)
            iy = (ii // (n + 1)) % (n + 1)
            iz = ii // ((n + 1) ** 2)
            self._vertices = np.column_stack([ix, iy, iz]).astype(float) / n
        return self._vertices

    @property
    def cell_vertices(self) -> np.ndarray:
        """Cell connectivity (n_cells, 8) in local order k = kx + 2*ky + 4*kz."""
        if self._cell_vertices is None:
            n = self.cells_per_side
            cc = np.arange(self.n_cells)
            cx = cc % n
            cy = (cc // n) % n
            cz = cc // (n * n)
            base = cx + (n + 1) * (cy + (n + 1) * cz)
            k = np.arange(8)
            off = (k & 1) + (n + 1) * (((k >> 1) & 1) + (n + 1) * ((k >> 2) & 1))
            self._cell_vertices = base[:, None] + off[None, :]
        return self._cell_vertices

    def cell_origin(self, cell: int) -> np.ndarray:
        """Integer lattice coordinates of a cell's lowest corner."""
        n = self.cells_per_side
        return np.array([cell % n, (cell // n) % n, cell // (n * n)])

    def map_local(self, cell: int, local) -> np.ndarray:
        """Map reference coordinates in [0,1]^3 of a cell to physical space."""
        return (self.cell_origin(cell) + np.asarray(local, float)) * self.h

    def boundary_cells(self, face_label: int) -> np.ndarray:
        """Cells owning a boundary facet with the given label (one facet each)."""
        axis, side = FACE_AXIS_SIDE[face_label]
        n = self.cells_per_side
        cc = np.arange(self.n_cells)
        layer = (cc // n**axis) % n
        return cc[layer == (0 if side == 0 else n - 1)]

    def facet_count(self, face_label: int) -> int:
        return self.cells_per_side**2 if face_label in FACE_AXIS_SIDE else 0


def build_hex_mesh(level: int) -> HexMesh:
    return HexMesh(level)


@dataclass(frozen=True)
class CellLocation:
    """A point expressed as cell index plus reference coordinates."""

    cell: int
    local: np.ndarray


def locate_point(mesh: HexMesh, x) -> CellLocation:
    """Find the cell containing x and its reference coordinates.

    Points on shared facets resolve to the lowest cell index, so the
    returned reference coordinate is 1.0 on the touching faces.
    """
    x = np.asarray(x, float)
    if x.shape != (3,):
        raise ValueError("point must be a 3-vector")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise OutOfDomainError(f"point {x.tolist()} outside the unit cube")
    n = mesh.cells_per_side
    t = x * n
    kf = np.floor(t).astype(int)
    tie = (t == kf) & (kf > 0)
    k = np.minimum(kf - tie, n - 1)
    return CellLocation(int(k[0] + n * (k[1] + n * k[2])), t - k)


def locate_points(mesh: HexMesh, pts: np.ndarray):
    """Vectorized point location. Returns (cells, locals) arrays."""
    pts = np.asarray(pts, float)
    if np.any(pts < 0.0) or np.any(pts > 1.0):
        bad = pts[np.any((pts < 0.0) | (pts > 1.0), axis=1)][0]
        raise OutOfDomainError(f"point {bad.tolist()} outside the unit cube")
    n = mesh.cells_per_side
    t = pts * n
    kf = np.floor(t).astype(int)
    tie = (t == kf) & (kf > 0)
    k = np.minimum(kf - tie, n - 1)
    cells = k[:, 0] + n * (k[:, 1] + n * k[:, 2])
    return cells, t - k


class FiberCurve:
    """Polyline fiber centerline carrying its own 1D element mesh.

    Every polyline segment is subdivided 2**refinements times; element
    endpoints therefore never merge across segment joints.  The curve is
    parametrized by arclength offset by ``param_start`` so that distinct
    curves in a network use disjoint parameter intervals.
    """

    def __init__(self, points, radius: float, refinements: int = 0,
                 param_start: float = 0.0):
        points = np.asarray(points, float)
        if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] < 2:
            raise ValueError("polyline needs at least two 3D points")
        if np.any(points < -1e-14) or np.any(points > 1.0 + 1e-14):
            raise ValueError("fiber vertices must lie inside the closed unit cube")
        if radius <= 0.0:
            raise ValueError("fiber radius must be positive")
        if refinements < 0:
            raise ValueError("refinements must be non-negative")
        seg = np.diff(points, axis=0)
        seg_len = np.linalg.norm(seg, axis=1)
        if np.any(seg_len == 0.0):
            raise ValueError("consecutive polyline vertices must be distinct")

        self.points = points
        self.radius = float(radius)
        self.refinements = int(refinements)
        self.param_start = float(param_start)
        self.seg_dirs = seg / seg_len[:, None]
        self.seg_starts = np.concatenate([[0.0], np.cumsum(seg_len)])
        self.length = float(self.seg_starts[-1])

        # 1D element mesh: 2**refinements equal elements per segment
        m = 2**refinements
        xi = np.arange(1, m + 1) / m
        nodes = [points[0]]
        for j in range(len(seg_len)):
            nodes.append(points[j] + xi[:, None] * seg[j])
        self.nodes = np.vstack(nodes)
        self.n_elements = self.nodes.shape[0] - 1
        evec = np.diff(self.nodes, axis=0)
        self.element_lengths = np.linalg.norm(evec, axis=1)
        self.element_tangents = evec / self.element_lengths[:, None]
        self.node_arclengths = np.concatenate(
            [[0.0], np.cumsum(self.element_lengths)]
        )

    def refined(self, refinements: int) -> "FiberCurve":
        return FiberCurve(self.points, self.radius, refinements, self.param_start)

    def _segment(self, s: float) -> int:
        if s < 0.0 or s > self.length + 1e-12:
            raise ValueError(f"arclength {s} outside [0, {self.length}]")
        j = int(np.searchsorted(self.seg_starts, min(s, self.length), side="right")) - 1
        return min(j, len(self.seg_dirs) - 1)

    def point(self, s: float) -> np.ndarray:
        j = self._segment(s)
        return self.points[j] + (s - self.seg_starts[j]) * self.seg_dirs[j]

    def derivatives(self, s: float):
        """First three arclength derivatives; straight within segments."""
        j = self._segment(s)
        z = np.zeros(3)
        return self.seg_dirs[j], z, z

    def max_curvature(self) -> float:
        return 0.0

    def parametrize(self, p: float) -> np.ndarray:
        """Evaluate the curve at a point of its private parameter interval."""
        return self.point(p - self.param_start)

    @property
    def param_interval(self):
        return (self.param_start, self.param_start + self.length)


def build_fiber_mesh(curve: FiberCurve, refinements: int) -> FiberCurve:
    """Return a copy of the curve with every segment subdivided 2**refinements times."""
    return curve.refined(refinements)


class FiberNetwork:
    """Collection of fiber curves sharing one radius.

    Construction re-parametrizes the curves onto consecutive disjoint
    parameter intervals and computes the fiber volume ratio from the
    generated geometry (clipped lengths included).
    """

    def __init__(self, curves, resampled: int = 0, mode: str = "custom",
                 seed=None):
        curves = list(curves)
        if not curves:
            raise ValueError("network needs at least one curve")
        radius = curves[0].radius
        if any(abs(c.radius - radius) > 1e-15 for c in curves):
            raise ValueError("all fibers of a network share one radius")
        offset = 0.0
        placed = []
        for c in curves:
            placed.append(FiberCurve(c.points, c.radius, c.refinements, offset))
            offset += c.length
        self.curves = tuple(placed)
        self.radius = float(radius)
        self.total_length = offset
        self.beta = np.pi * radius**2 * offset
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"fiber volume ratio {self.beta} outside (0, 1)")
        self.resampled = int(resampled)
        self.mode = mode
        self.seed = seed

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def n_nodes(self) -> int:
        return sum(c.nodes.shape[0] for c in self.curves)

    @property
    def n_elements(self) -> int:
        return sum(c.n_elements for c in self.curves)

    def node_offsets(self) -> np.ndarray:
        """Start of each curve's node block in the concatenated numbering."""
        counts = [c.nodes.shape[0] for c in self.curves]
        return np.concatenate([[0], np.cumsum(counts)])[:-1]

    def refined(self, refinements: int) -> "FiberNetwork":
        return FiberNetwork(
            [c.refined(refinements) for c in self.curves],
            resampled=self.resampled, mode=self.mode, seed=self.seed,
        )
