"""Flat and spherical triangle games, parallel transport and spherical excess.

In both games three detectors sit at the vertices of a triangle, each with a
unit reference vector, and a random unit vector is born somewhere on the
perimeter. Each detector answers ``sign(ref . lam)`` after ``lam`` has been
carried to its vertex. On the plane the carrying is trivial; on the sphere
it is parallel transport along the perimeter, which rotates ``lam`` by the
enclosed area after a full turn.

Conventions for the spherical game:

* the perimeter is walked counterclockwise as seen from outside the sphere;
* the birth point is uniform in arc length and ``lam`` is uniform in the
  tangent circle there;
* ``lam`` reaches each vertex by walking forward from the birth point;
* a reference vector is given by its angle, counterclockwise about the
  outward normal, from the direction in which the perimeter arrives at the
  vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distribution import uniform_angles
from .experiment import CorrelationEstimate
from .rng import RngStream, map_chunks
from .transform import wrap_angle

UNIT_TOL = 1e-12
TANGENT_TOL = 1e-9
COLLINEAR_TOL = 1e-9


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _check_unit(v, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.dot(v, v) - 1.0) > 2 * UNIT_TOL + 1e-15:
        raise ValueError(f"{name} must be a unit 3-vector")
    return v


@dataclass(frozen=True)
class TangentVector:
    base: np.ndarray
    dir: np.ndarray

    def __post_init__(self):
        base = _check_unit(self.base, "base")
        d = _check_unit(self.dir, "dir")
        if abs(np.dot(base, d)) > TANGENT_TOL:
            raise ValueError("dir must be tangent at base")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "dir", d)


@dataclass(frozen=True)
class SphericalTriangle:
    vA: np.ndarray
    vB: np.ndarray
    vC: np.ndarray

    def __post_init__(self):
        vs = [_check_unit(v, n) for v, n in zip((self.vA, self.vB, self.vC), ("vA", "vB", "vC"))]
        for i in range(3):
            for j in range(i + 1, 3):
                if abs(np.dot(vs[i], vs[j])) >= 1.0 - COLLINEAR_TOL:
                    raise ValueError("degenerate triangle: coincident or antipodal vertices")
        if abs(np.linalg.det(np.array(vs))) < 1e-15:
            raise ValueError("degenerate triangle: vertices on one great circle")
        for name, v in zip(("vA", "vB", "vC"), vs):
            object.__setattr__(self, name, v)

    @property
    def vertices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.vA, self.vB, self.vC

    @property
    def orientation(self) -> int:
        """+1 when A, B, C run counterclockwise seen from outside."""
        return 1 if np.linalg.det(np.array(self.vertices)) > 0 else -1

    def ccw_vertices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a, b, c = self.vertices
        return (a, b, c) if self.orientation > 0 else (a, c, b)

    def scaled(self, factor: float) -> "SphericalTriangle":
        """Shrink the triangle toward the normalised centroid (gnomonic scaling)."""
        center = unit(sum(self.vertices))
        out = []
        for v in self.vertices:
            flat = v / np.dot(v, center) - center
            out.append(unit(center + factor * flat))
        return SphericalTriangle(*out)


def rotate(v, axis, angle):
    """Rodrigues rotation of ``v`` about the unit ``axis``; broadcasts over leading dims."""
    v = np.asarray(v, dtype=float)
    axis = np.asarray(axis, dtype=float)
    angle = np.asarray(angle, dtype=float)[..., None]
    c, s = np.cos(angle), np.sin(angle)
    dot = np.sum(axis * v, axis=-1, keepdims=True)
    return v * c + np.cross(axis, v) * s + axis * dot * (1.0 - c)


def _geodesic(u, v):
    """Unit rotation axis and arc angle carrying ``u`` to ``v`` along the minor arc."""
    cr = np.cross(u, v)
    sn = np.linalg.norm(cr)
    ang = math.atan2(sn, float(np.dot(u, v)))
    if sn == 0.0:
        return None, ang
    return cr / sn, ang


def transport(v: TangentVector, to) -> TangentVector:
    """Parallel transport of ``v`` along the geodesic from ``v.base`` to ``to``.

    Raises:
        ValueError: for antipodal endpoints, where the geodesic is not unique.
    """
    to = _check_unit(to, "to")
    if np.dot(v.base, to) <= -1.0 + COLLINEAR_TOL:
        raise ValueError("antipodal endpoints: geodesic not unique")
    axis, ang = _geodesic(v.base, to)
    if axis is None:
        return TangentVector(to, v.dir)
    d = rotate(v.dir, axis, ang)
    # strip rounding so the result passes the tangency check
    d = unit(d - np.dot(d, to) * to)
    return TangentVector(to, d)


def _signed_angle(u, v, normal) -> float:
    return math.atan2(float(np.dot(normal, np.cross(u, v))), float(np.dot(u, v)))


def loop_holonomy(tri: SphericalTriangle) -> float:
    """Rotation of a tangent vector carried once counterclockwise around the triangle.

    Reported in [-pi, pi), counterclockwise about the outward normal positive.
    """
    a, b, c = tri.ccw_vertices()
    start = unit(b - np.dot(b, a) * a)
    v = TangentVector(a, start)
    for nxt in (b, c, a):
        v = transport(v, nxt)
    return wrap_angle(_signed_angle(start, v.dir, a))


def interior_angles(tri: SphericalTriangle) -> tuple[float, float, float]:
    """Angles between the great-circle planes meeting at each vertex."""
    a, b, c = tri.vertices
    out = []
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        t1 = np.cross(np.cross(p, q), p)
        t2 = np.cross(np.cross(p, r), p)
        out.append(math.atan2(float(np.linalg.norm(np.cross(t1, t2))), float(np.dot(t1, t2))))
    return tuple(out)


def spherical_excess(tri: SphericalTriangle) -> float:
    """``alpha + beta + gamma - pi``: the area of the triangle on the unit sphere."""
    return sum(interior_angles(tri)) - math.pi


def lhuilier_excess(tri: SphericalTriangle) -> float:
    a, b, c = tri.vertices
    sa = math.atan2(float(np.linalg.norm(np.cross(b, c))), float(np.dot(b, c)))
    sb = math.atan2(float(np.linalg.norm(np.cross(c, a))), float(np.dot(c, a)))
    sc = math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))
    s = 0.5 * (sa + sb + sc)
    prod = math.tan(s / 2) * math.tan((s - sa) / 2) * math.tan((s - sb) / 2) * math.tan((s - sc) / 2)
    return 4.0 * math.atan(math.sqrt(max(prod, 0.0)))


@dataclass(frozen=True)
class GameResult:
    e_ab: CorrelationEstimate
    e_ac: CorrelationEstimate
    e_bc: CorrelationEstimate
    slack: float
    slack_stderr: float
    identity_holds: bool
    holonomy: float = 0.0


def _tally(n: int, chunk_fn, workers: int):
    """Sum per-chunk (sum AB, sum AC, sum BC, identity failures)."""
    parts = map_chunks(n, chunk_fn, workers)
    tot = np.sum(np.array(parts, dtype=np.int64), axis=0)
    return [int(x) for x in tot]


def _result(n, sums, holonomy=0.0) -> GameResult:
    ab, ac, bc, bad = sums
    e_ab = CorrelationEstimate.from_sum(ab, n)
    e_ac = CorrelationEstimate.from_sum(ac, n)
    e_bc = CorrelationEstimate.from_sum(bc, n)
    slack = 1.0 + e_bc.mean - abs(e_ab.mean + e_ac.mean)
    # sum of stderrs bounds the stderr of the combination
    return GameResult(e_ab, e_ac, e_bc, slack, e_ab.stderr + e_ac.stderr + e_bc.stderr, bad == 0, holonomy)


def _sign(x):
    return np.where(x >= 0.0, 1, -1)


def _chunk_stats(s_a, s_b, s_c):
    ab, ac, bc = s_a * s_b, s_a * s_c, s_b * s_c
    bad = int(np.count_nonzero(np.abs(ab + ac) != 1 + bc))
    return int(ab.sum()), int(ac.sum()), int(bc.sum()), bad


def flat_game(angle_ab: float, angle_ac: float, n: int, stream: RngStream, workers: int = 1) -> GameResult:
    """Planar game: ``a`` at angle 0, ``b`` at ``angle_ab``, ``c`` at ``angle_ac``.

    Checks, per draw, that ``|AB + AC| == 1 + BC`` and reports
    ``slack = 1 + E_BC - |E_AB + E_AC|``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")

    def chunk(lo, hi):
        lam = uniform_angles(stream, hi - lo, offset=lo)
        return _chunk_stats(_sign(np.cos(lam)), _sign(np.cos(lam - angle_ab)), _sign(np.cos(lam - angle_ac)))

    return _result(n, _tally(n, chunk, workers))


def _edge_frames(tri: SphericalTriangle):
    """Counterclockwise edges as (start, axis, length) plus arrival directions at their ends."""
    a, b, c = tri.ccw_vertices()
    edges = []
    for u, v in ((a, b), (b, c), (c, a)):
        axis, ang = _geodesic(u, v)
        arrive = rotate(np.cross(axis, u), axis, ang)
        edges.append((u, axis, ang, arrive))
    return (a, b, c), edges


def reference_vectors(tri: SphericalTriangle, ref_angles) -> dict[str, np.ndarray]:
    """Reference vectors keyed by vertex label ``"A"``, ``"B"``, ``"C"``."""
    (p0, p1, p2), edges = _edge_frames(tri)
    labels = _ccw_labels(tri)
    arrive_at = {labels[1]: (p1, edges[0][3]), labels[2]: (p2, edges[1][3]), labels[0]: (p0, edges[2][3])}
    angles = dict(zip("ABC", ref_angles))
    out = {}
    for name, (p, t) in arrive_at.items():
        th = angles[name]
        out[name] = math.cos(th) * t + math.sin(th) * np.cross(p, t)
    return out


def _ccw_labels(tri: SphericalTriangle) -> tuple[str, str, str]:
    return ("A", "B", "C") if tri.orientation > 0 else ("A", "C", "B")


def transported_samples(tri: SphericalTriangle, u_pos: np.ndarray, u_dir: np.ndarray) -> dict[str, np.ndarray]:
    """Carry random tangent vectors from their birth points forward to each vertex.

    ``u_pos`` selects the birth point by arc length, ``u_dir`` the tangent
    direction; both are uniforms in [0, 1).
    """
    _, edges = _edge_frames(tri)
    lengths = np.array([e[2] for e in edges])
    bounds = np.concatenate([[0.0], np.cumsum(lengths)])
    s = u_pos * bounds[-1]
    k = np.clip(np.searchsorted(bounds, s, side="right") - 1, 0, 2)
    along = s - bounds[k]
    theta = 2.0 * math.pi * u_dir

    n = len(s)
    lam_end = np.empty((n, 3))
    for e, (start, axis, length, _) in enumerate(edges):
        m = k == e
        if not np.any(m):
            continue
        x = rotate(np.broadcast_to(start, (m.sum(), 3)), axis, along[m])
        fwd = np.cross(axis, x)
        side = np.cross(x, fwd)
        lam = np.cos(theta[m])[:, None] * fwd + np.sin(theta[m])[:, None] * side
        # carry to the end of the birth edge
        lam_end[m] = rotate(lam, axis, length - along[m])

    labels = _ccw_labels(tri)
    out = {}
    # vertex index j (ccw) is reached from edge e after passing ends of edges e, e+1, ...
    for j in range(3):
        res = np.empty((n, 3))
        for e in range(3):
            m = k == e
            if not np.any(m):
                continue
            v = lam_end[m]
            arrived = (e + 1) % 3
            while arrived != j:
                _, axis, length, _ = edges[arrived]
                v = rotate(v, axis, length)
                arrived = (arrived + 1) % 3
            res[m] = v
        out[labels[j]] = res
    return out


def spherical_game(
    tri: SphericalTriangle,
    ref_angles=(0.0, 0.0, 0.0),
    n: int = 100_000,
    stream: RngStream | None = None,
    workers: int = 1,
    refs: dict[str, np.ndarray] | None = None,
) -> GameResult:
    """Spherical game on ``tri`` with references set by ``ref_angles`` (or explicit ``refs``).

    Draw ``i`` uses stream positions ``2i`` (birth point) and ``2i + 1``
    (direction).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    stream = stream or RngStream()
    refs = refs if refs is not None else reference_vectors(tri, ref_angles)

    def chunk(lo, hi):
        u = stream.uniforms(2 * (hi - lo), offset=2 * lo)
        lam = transported_samples(tri, u[0::2], u[1::2])
        s = {k: _sign(lam[k] @ refs[k]) for k in "ABC"}
        return _chunk_stats(s["A"], s["B"], s["C"])

    return _result(n, _tally(n, chunk, workers), loop_holonomy(tri))
