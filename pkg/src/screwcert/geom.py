"""Robot and environment geometry.

Robot bodies are semialgebraic sets {x : f_1(x) >= 0, ..., f_a(x) >= 0} in
their own body frame; free regions are convex polytopes {x : b_i - a_i.x >= 0}
with unit normals.  ``region_coefficients`` rewrites each free-region face in
the post-motion body frame, which turns its coefficients into polynomials in
the control variables -- the object the safety coupling of the moment program
consumes.  ``extract_free_region`` is a deliberately simple convex extractor
over an occupancy grid: it starts from the sensor-range box and cuts a
half-plane per nearest obstacle point until no occupied cell center remains
inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from .polyalg import Polynomial
from .screw import Pose, SymbolicPose

BOUNDARY_TOL = 1e-6


class SemialgebraicSet:
    """Intersection of polynomial inequalities {x : all f_i(x) >= 0}.

    A witness point certifies nonemptiness at construction time.  Compact sets
    carry a bounding radius (used for sampling boxes and the redundant
    archimedean ball).
    """

    def __init__(self, space_dim: int, polys: Sequence[Polynomial],
                 witness: Sequence[float], bounding_radius: Optional[float] = None):
        if space_dim not in (2, 3):
            raise ValueError("space_dim must be 2 or 3")
        if not polys:
            raise ValueError("need at least one defining polynomial")
        for p in polys:
            if p.num_vars != space_dim:
                raise ValueError("defining polynomial has wrong variable count")
        witness = np.asarray(witness, dtype=float).reshape(space_dim)
        if any(p.evaluate(witness) < -BOUNDARY_TOL for p in polys):
            raise ValueError("witness point is not in the set")
        self.space_dim = space_dim
        self.polys = list(polys)
        self.witness = witness
        self.bounding_radius = bounding_radius

    @property
    def compact(self) -> bool:
        return self.bounding_radius is not None

    def contains(self, x: Sequence[float], tol: float = BOUNDARY_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return all(p.evaluate(x) >= -tol for p in self.polys)

    def contains_many(self, pts: np.ndarray, tol: float = BOUNDARY_TOL) -> np.ndarray:
        ok = np.ones(len(pts), dtype=bool)
        for p in self.polys:
            ok &= p.evaluate_many(pts) >= -tol
        return ok

    def max_defining_degree(self) -> int:
        return max(p.degree for p in self.polys)

    def with_ball(self, radius: Optional[float] = None) -> "SemialgebraicSet":
        """Append the redundant ball constraint r^2 - |x|^2 >= 0.

        Valid (set-preserving) whenever the set lies inside the ball; it makes
        the quadratic module archimedean.
        """
        r = radius if radius is not None else self.bounding_radius
        if r is None:
            raise ValueError("no bounding radius known; pass one explicitly")
        n = self.space_dim
        ball = Polynomial.constant(n, r * r)
        for i in range(n):
            xi = Polynomial.variable(n, i)
            ball = ball - xi * xi
        return SemialgebraicSet(n, self.polys + [ball], self.witness, r)


class Polytope:
    """Convex polytope {x : a_i . x <= b_i} with unit-norm rows a_i.

    Face polynomials are f_i(x) = b_i - a_i.x, nonnegative inside.
    """

    def __init__(self, normals: np.ndarray, offsets: np.ndarray, check_interior: bool = True):
        A = np.asarray(normals, dtype=float)
        b = np.asarray(offsets, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.shape[0]:
            raise ValueError("normals/offsets shape mismatch")
        norms = np.linalg.norm(A, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise ValueError("face normals must be unit length")
        self.normals = A
        self.offsets = b
        self.space_dim = A.shape[1]
        if check_interior and self.chebyshev_radius() <= 0:
            raise ValueError("polytope has empty interior")

    @property
    def num_faces(self) -> int:
        return len(self.offsets)

    def chebyshev_center(self) -> Tuple[np.ndarray, float]:
        """Largest inscribed ball: maximize r s.t. a_i.c + r <= b_i."""
        m, d = self.normals.shape
        c = np.zeros(d + 1)
        c[-1] = -1.0
        A_ub = np.hstack([self.normals, np.ones((m, 1))])
        res = linprog(c, A_ub=A_ub, b_ub=self.offsets,
                      bounds=[(None, None)] * d + [(None, None)], method="highs")
        if not res.success:
            return np.zeros(d), -np.inf
        return res.x[:d], res.x[-1]

    def chebyshev_radius(self) -> float:
        return self.chebyshev_center()[1]

    def contains(self, x: Sequence[float], tol: float = BOUNDARY_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.normals @ x <= self.offsets + tol))

    def contains_many(self, pts: np.ndarray, tol: float = BOUNDARY_TOL) -> np.ndarray:
        vals = pts @ self.normals.T - self.offsets
        return np.all(vals <= tol, axis=1)

    def margin(self, x: Sequence[float]) -> float:
        """min_i (b_i - a_i.x): positive inside, negative outside."""
        x = np.asarray(x, dtype=float)
        return float(np.min(self.offsets - self.normals @ x))

    def face_polys(self) -> List[Polynomial]:
        out = []
        for a, b in zip(self.normals, self.offsets):
            terms = {(0,) * self.space_dim: float(b)}
            for i, ai in enumerate(a):
                e = [0] * self.space_dim
                e[i] = 1
                terms[tuple(e)] = -float(ai)
            out.append(Polynomial(self.space_dim, terms))
        return out

    def to_semialgebraic(self) -> SemialgebraicSet:
        center, r = self.chebyshev_center()
        radius = self._bounding_radius()
        return SemialgebraicSet(self.space_dim, self.face_polys(), center, radius)

    def vertices(self) -> np.ndarray:
        """Vertices of a 2D polytope, ordered counterclockwise."""
        if self.space_dim != 2:
            raise NotImplementedError("vertex enumeration implemented for 2D only")
        pts = []
        m = self.num_faces
        for i in range(m):
            for j in range(i + 1, m):
                M = np.vstack([self.normals[i], self.normals[j]])
                if abs(np.linalg.det(M)) < 1e-12:
                    continue
                v = np.linalg.solve(M, np.array([self.offsets[i], self.offsets[j]]))
                if self.contains(v, tol=1e-8):
                    pts.append(v)
        if not pts:
            raise ValueError("polytope has no vertices (unbounded?)")
        pts = np.array(pts)
        # dedupe, then order by angle around the centroid
        keep = []
        for p in pts:
            if not any(np.linalg.norm(p - q) < 1e-9 for q in keep):
                keep.append(p)
        pts = np.array(keep)
        ctr = pts.mean(axis=0)
        ang = np.arctan2(pts[:, 1] - ctr[1], pts[:, 0] - ctr[0])
        return pts[np.argsort(ang)]

    def _bounding_radius(self) -> Optional[float]:
        try:
            return float(np.max(np.linalg.norm(self.vertices(), axis=1)))
        except (ValueError, NotImplementedError):
            return None


# -- shape library -------------------------------------------------------------


def _regular_polygon(num_faces: int, apothem: float, angle0: float) -> Polytope:
    angles = angle0 + 2.0 * math.pi * np.arange(num_faces) / num_faces
    normals = np.column_stack([np.cos(angles), np.sin(angles)])
    return Polytope(normals, np.full(num_faces, apothem))


def shape_polytope(name: str, params: Sequence[float]) -> Polytope:
    """Polytopic library shapes in the body frame (origin inside)."""
    params = [float(p) for p in params]
    if any(p <= 0 for p in params):
        raise ValueError("shape parameters must be positive")
    if name == "rectangle":
        # params = (across-heading extent, along-heading extent); the long
        # axis is body x, the heading direction.
        width, length = params
        normals = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        offsets = np.array([length / 2, length / 2, width / 2, width / 2])
        return Polytope(normals, offsets)
    if name == "triangle":
        (r,) = params  # circumradius, one vertex on +x
        return _regular_polygon(3, r / 2.0, math.pi / 3.0)
    if name == "diamond":
        (r,) = params  # vertices on the axes at distance r
        return _regular_polygon(4, r / math.sqrt(2.0), math.pi / 4.0)
    if name == "hexagon":
        (r,) = params  # circumradius, vertices at angle 0, 60, ...
        return _regular_polygon(6, r * math.sqrt(3.0) / 2.0, math.pi / 6.0)
    raise ValueError(f"unknown polytopic shape {name!r}")


def shape_library(name: str, params: Sequence[float]) -> SemialgebraicSet:
    """Body-frame robot geometry by name.

    Polytopes come out as lists of linear inequalities; the ellipse is the
    single monic quadratic 1 - x^T E x >= 0 with E = diag(1/a^2, 1/b^2).
    """
    if name == "ellipse":
        a, b = (float(p) for p in params)
        if a <= 0 or b <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        q = Polynomial(2, {(0, 0): 1.0, (2, 0): -1.0 / a ** 2, (0, 2): -1.0 / b ** 2})
        return SemialgebraicSet(2, [q], np.zeros(2), max(a, b))
    return shape_polytope(name, params).to_semialgebraic()


def shape_circumradius(name: str, params: Sequence[float]) -> float:
    s = shape_library(name, params)
    return float(s.bounding_radius)


# -- membership / boundary sampling ---------------------------------------------


def membership(region, x: Sequence[float], tol: float = BOUNDARY_TOL) -> bool:
    """Point membership for either a SemialgebraicSet or a Polytope."""
    return region.contains(x, tol=tol)


def sample_boundary(region, k: int) -> np.ndarray:
    """k points on the boundary of a compact 2D region containing its witness.

    Polytopes are sampled exactly along their edges; semialgebraic sets by
    radial bisection from the witness point (each returned point has some
    defining polynomial within 1e-6 of zero).
    """
    if isinstance(region, Polytope):
        verts = region.vertices()
        edges = np.diff(np.vstack([verts, verts[:1]]), axis=0)
        lengths = np.linalg.norm(edges, axis=1)
        total = lengths.sum()
        ts = (np.arange(k) + 0.5) / k * total
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        pts = np.empty((k, 2))
        for n, t in enumerate(ts):
            i = int(np.searchsorted(cum, t, side="right") - 1)
            i = min(i, len(verts) - 1)
            frac = (t - cum[i]) / lengths[i]
            pts[n] = verts[i] + frac * edges[i]
        return pts

    if not isinstance(region, SemialgebraicSet) or region.space_dim != 2:
        raise NotImplementedError("boundary sampling implemented for 2D regions")
    if region.bounding_radius is None:
        raise ValueError("boundary sampling needs a compact region")
    w = region.witness
    r_hi = 2.0 * region.bounding_radius + 1.0
    pts = np.empty((k, 2))
    for n in range(k):
        ang = 2.0 * math.pi * (n + 0.5) / k
        d = np.array([math.cos(ang), math.sin(ang)])
        lo, hi = 0.0, r_hi
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if region.contains(w + mid * d, tol=0.0):
                lo = mid
            else:
                hi = mid
        pts[n] = w + lo * d
    return pts


# -- control-dependent region coefficients ---------------------------------------


class RegionCoefficients:
    """Free-region face coefficients as polynomials in the control variables.

    For face i of B with f_i(x) = b_i - a_i.x, substituting the post-motion
    frame x -> R(u) x' + p(u) gives
        f_i = (b_i - a_i . p(u))  -  (R(u)^T a_i) . x',
    so entry 0 (the constant-in-x coefficient) has degree <= 3 in u and the
    linear-in-x entries degree <= 2.  Entries are ordered like the degree-1
    monomial basis [1, x1, ..., xd].
    """

    def __init__(self, region: Polytope, faces: List[List[Polynomial]], pose_ring_vars: int):
        self.region = region
        self.faces = faces
        self.num_control_vars = pose_ring_vars
        self.space_dim = region.space_dim

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def max_degree(self) -> int:
        return max(p.degree for face in self.faces for p in face)

    def evaluate_face(self, i: int, control_vec: Sequence[float]) -> Polynomial:
        """Numeric face polynomial in x at a fixed control vector."""
        d = self.space_dim
        coefs = [p.evaluate(control_vec) for p in self.faces[i]]
        terms = {(0,) * d: coefs[0]}
        for j in range(d):
            e = [0] * d
            e[j] = 1
            terms[tuple(e)] = coefs[j + 1]
        return Polynomial(d, terms)


def region_coefficients(region: Polytope, sp: SymbolicPose) -> RegionCoefficients:
    """Rewrite every face of the free region in the post-motion body frame."""
    if region.space_dim == 2 and not sp.planar:
        raise ValueError("2D region requires a planar symbolic pose")
    if region.space_dim == 3 and sp.planar:
        raise ValueError("3D region requires a spatial symbolic pose")
    d = region.space_dim
    n = sp.num_control_vars
    faces: List[List[Polynomial]] = []
    for a, b in zip(region.normals, region.offsets):
        const = Polynomial.constant(n, float(b))
        for m in range(d):
            const = const - float(a[m]) * sp.position[m]
        entries = [const]
        for j in range(d):
            lin = Polynomial.zero(n)
            for m in range(d):
                lin = lin - float(a[m]) * sp.rotation[m][j]
            entries.append(lin)
        faces.append(entries)
    return RegionCoefficients(region, faces, n)


# -- occupancy grids -------------------------------------------------------------


class OccupancyGrid:
    """Boolean occupancy raster with world-frame anchoring.

    cells[iy, ix] covers the square with lower-left corner
    origin + (ix, iy) * resolution.  Instances are treated as immutable during
    a control step; ``inflate`` returns a new grid.
    """

    def __init__(self, resolution: float, width: int, height: int,
                 origin: Sequence[float], cells: Optional[np.ndarray] = None):
        if resolution <= 0 or width < 1 or height < 1:
            raise ValueError("bad grid dimensions")
        self.resolution = float(resolution)
        self.width = int(width)
        self.height = int(height)
        self.origin = np.asarray(origin, dtype=float).reshape(2)
        if cells is None:
            cells = np.zeros((self.height, self.width), dtype=bool)
        cells = np.asarray(cells, dtype=bool)
        if cells.shape != (self.height, self.width):
            raise ValueError("cells shape must be (height, width)")
        self.cells = cells

    def world_to_cell(self, xy: Sequence[float]) -> Tuple[int, int]:
        ix = int(math.floor((xy[0] - self.origin[0]) / self.resolution))
        iy = int(math.floor((xy[1] - self.origin[1]) / self.resolution))
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> np.ndarray:
        return self.origin + (np.array([ix, iy]) + 0.5) * self.resolution

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def is_occupied(self, ix: int, iy: int) -> bool:
        """Out-of-bounds cells count as occupied."""
        if not self.in_bounds(ix, iy):
            return True
        return bool(self.cells[iy, ix])

    def is_occupied_world(self, xy: Sequence[float]) -> bool:
        return self.is_occupied(*self.world_to_cell(xy))

    def occupied_centers(self) -> np.ndarray:
        iy, ix = np.nonzero(self.cells)
        return self.origin + (np.column_stack([ix, iy]) + 0.5) * self.resolution

    def inflate(self, radius: float) -> "OccupancyGrid":
        """Dilate occupancy by a metric radius (circular structuring element)."""
        from scipy import ndimage
        r_cells = int(math.ceil(radius / self.resolution))
        if r_cells <= 0:
            return OccupancyGrid(self.resolution, self.width, self.height,
                                 self.origin, self.cells.copy())
        yy, xx = np.mgrid[-r_cells:r_cells + 1, -r_cells:r_cells + 1]
        structure = (xx ** 2 + yy ** 2) * self.resolution ** 2 <= radius ** 2 + 1e-12
        dilated = ndimage.binary_dilation(self.cells, structure=structure)
        return OccupancyGrid(self.resolution, self.width, self.height, self.origin, dilated)

    # text format: header lines then a row-major '0'/'1' raster, row iy=0 first
    def save(self, path: str):
        with open(path, "w") as f:
            f.write(f"resolution {self.resolution!r}\n")
            f.write(f"width {self.width}\n")
            f.write(f"height {self.height}\n")
            f.write(f"origin {self.origin[0]!r} {self.origin[1]!r}\n")
            for iy in range(self.height):
                f.write("".join("1" if v else "0" for v in self.cells[iy]) + "\n")

    @classmethod
    def load(cls, path: str) -> "OccupancyGrid":
        with open(path) as f:
            lines = [ln.rstrip("\n") for ln in f]
        header = {}
        idx = 0
        for idx, ln in enumerate(lines):
            parts = ln.split()
            if parts and parts[0] in ("resolution", "width", "height", "origin"):
                header[parts[0]] = parts[1:]
            else:
                break
        missing = {"resolution", "width", "height", "origin"} - set(header)
        if missing:
            raise ValueError(f"grid file missing header fields {sorted(missing)}")
        res = float(header["resolution"][0])
        width = int(header["width"][0])
        height = int(header["height"][0])
        origin = [float(header["origin"][0]), float(header["origin"][1])]
        raster = lines[idx:idx + height]
        if len(raster) != height or any(len(r) != width for r in raster):
            raise ValueError("raster dimensions do not match header")
        cells = np.array([[ch == "1" for ch in row] for row in raster], dtype=bool)
        return cls(res, width, height, origin, cells)


# -- convex free-region extraction ------------------------------------------------


def extract_free_region(grid: OccupancyGrid, seed_pose: Pose, sensor_range: float,
                        prune: bool = True) -> Polytope:
    """Convex obstacle-free polytope around the robot, in its body frame.

    Starts from the axis-aligned sensor box (side 2*sensor_range, in body
    coordinates), then repeatedly: take the nearest remaining occupied cell
    center q, inflate it by half a cell, cut the half-plane tangent to the
    inflated disk on its seed side, and discard every occupied point the cut
    removes.  Terminates when no occupied cell center is left inside, so every
    occupied center within sensor range ends up outside the interior.
    """
    seed_xy = seed_pose.p[:2]
    ix, iy = grid.world_to_cell(seed_xy)
    if grid.is_occupied(ix, iy):
        raise ValueError("free-region seed cell is occupied")

    centers = grid.occupied_centers()
    if len(centers):
        within = np.linalg.norm(centers - seed_xy, axis=1) <= sensor_range
        centers = centers[within]
    R2 = seed_pose.R[:2, :2]
    body_pts = (centers - seed_xy) @ R2 if len(centers) else np.zeros((0, 2))

    normals = [np.array([1.0, 0.0]), np.array([-1.0, 0.0]),
               np.array([0.0, 1.0]), np.array([0.0, -1.0])]
    offsets = [sensor_range] * 4

    inflation = grid.resolution / 2.0
    if len(body_pts):
        inside = np.ones(len(body_pts), dtype=bool)
        for a, b in zip(normals, offsets):
            inside &= body_pts @ a < b - 1e-12
        dist = np.linalg.norm(body_pts, axis=1)
        while inside.any():
            cand = np.where(inside)[0]
            q_idx = cand[np.argmin(dist[cand])]
            q = body_pts[q_idx]
            nq = dist[q_idx]
            if nq < 1e-12:
                raise ValueError("occupied cell center coincides with the seed")
            a = q / nq
            b = max(nq - inflation, 0.0)
            normals.append(a)
            offsets.append(b)
            inside &= body_pts @ a < b - 1e-12

    A = np.array(normals)
    b = np.array(offsets)
    if prune and len(b) > 4:
        A, b = _prune_redundant_faces(A, b)
    return Polytope(A, b, check_interior=False)


def _prune_redundant_faces(A: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Drop faces whose removal leaves the polytope unchanged (exact LP test)."""
    keep = []
    m = len(b)
    for i in range(m):
        others = [j for j in range(m) if j != i and (j in keep or j > i)]
        # maximize a_i . x subject to the other faces; redundant if max <= b_i
        res = linprog(-A[i], A_ub=A[others], b_ub=b[others],
                      bounds=[(None, None)] * A.shape[1], method="highs")
        if res.status == 3 or (res.success and -res.fun > b[i] + 1e-12):
            keep.append(i)
    if not keep:
        keep = list(range(m))
    return A[keep], b[keep]
