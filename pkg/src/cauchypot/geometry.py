"""Plane curves and arc systems, with the square-root branch attached to them.

Two kinds of hosts are supported:

* ``ClosedContour`` -- a positively oriented, rectifiable Jordan curve sampled
  at nodes uniform in a 2*pi-periodic parameter.  The bounded complementary
  domain lies on the *plus* side; the plus normal is ``1j * tangent``.

* ``ArcSystem`` -- a union of pairwise disjoint open arcs gamma(a_j, b_j).
  Each arc is oriented from ``a`` to ``b`` and its plus side is the left side
  of the direction of travel.  The system carries the polynomial

      R(z) = prod_j (z - a_j) * (z - b_j)

  and the branch of sqrt(R) that is single valued off the arcs and satisfies
  sqrt(R)(z) / z**N -> 1 as z -> infinity (N = number of arcs).  Boundary
  values taken from the two sides of an arc are negatives of each other.

Arc nodes are placed at cosine-graded parameters (the first-kind Chebyshev
points mapped onto the arc), which is the natural grid for densities with
inverse-square-root endpoint behaviour.  Node chains keep the supplied points.
"""

from __future__ import annotations

import cmath
import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSystemError,
    DisjointnessError,
    EndpointSingularityError,
    GeometryError,
    NearBoundaryError,
    ResolutionError,
)

__all__ = [
    "ClosedContour",
    "Arc",
    "ArcSystem",
    "build_closed_contour",
    "build_arc_system",
    "eval_sqrtR",
    "sqrtR_boundary_plus",
    "parse_geometry",
    "node_table_csv",
]

_MIN_NODES = 16
_FAR_FACTOR = 1.0e6
_NEAR_CUTOFF_FACTOR = 1.0e-8


# ---------------------------------------------------------------------------
# closed contours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedContour:
    """Positively oriented closed curve sampled at parameter-uniform nodes.

    Attributes
    ----------
    nodes : complex ndarray, shape (n,)
        Node positions z(theta_k), theta_k = 2*pi*k/n.
    dz_dtheta : complex ndarray
        Parameter derivative at the nodes; ``tangents`` is its unit field.
    arclength : real ndarray
        Cumulative arclength at the nodes, starting at 0.
    panels : tuple of (start, stop)
        Contiguous node-index ranges; bookkeeping for panel-based rules.
    """

    nodes: np.ndarray
    params: np.ndarray
    dz_dtheta: np.ndarray
    tangents: np.ndarray
    arclength: np.ndarray
    total_length: float
    panels: tuple
    kind: str = "closed"

    def __post_init__(self):
        n = self.nodes.size
        if n < _MIN_NODES:
            raise ResolutionError(f"closed contour needs >= {_MIN_NODES} nodes, got {n}")
        speed = np.abs(self.dz_dtheta)
        if np.any(speed <= 0.0):
            raise GeometryError("vanishing parameter speed at a node")
        tmag = np.abs(self.tangents)
        if np.max(np.abs(tmag - 1.0)) > 1e-12:
            raise GeometryError("tangent field is not unit length")
        if self.signed_area() <= 0.0:
            raise GeometryError("contour is not positively oriented")
        _check_simple_at_panel_resolution(self.nodes, closed=True)

    # -- derived fields ----------------------------------------------------

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def normals_plus(self):
        """Unit normal pointing into the bounded (plus) domain."""
        return 1j * self.tangents

    @property
    def complex_weights(self):
        """Weights w_k with  integral f(t) dt  ~=  sum w_k f(t_k)."""
        h = 2.0 * np.pi / self.n_nodes
        return h * self.dz_dtheta

    @property
    def arclength_weights(self):
        h = 2.0 * np.pi / self.n_nodes
        return h * np.abs(self.dz_dtheta)

    @property
    def local_panel_length(self):
        return self.total_length / max(len(self.panels), 1)

    def signed_area(self):
        z = self.nodes
        zn = np.roll(z, -1)
        return 0.5 * float(np.sum(np.imag(np.conj(z) * zn)))

    def diameter(self):
        return _point_set_diameter(self.nodes)

    def distance_to(self, z):
        return np.min(np.abs(self.nodes - z))

    def winding_number(self, z):
        """Winding number of the node polyline about ``z`` (robust, O(n))."""
        v = self.nodes - z
        ang = np.angle(np.roll(v, -1) / v)
        return int(round(float(np.sum(ang)) / (2.0 * np.pi)))

    def contains(self, z):
        return self.winding_number(z) != 0


def _check_simple_at_panel_resolution(nodes, closed):
    """Reject curves whose coarse polyline self-intersects."""
    n = nodes.size
    step = max(1, n // 256)
    poly = nodes[::step]
    if closed:
        poly = np.append(poly, nodes[0])
    segs = list(zip(poly[:-1], poly[1:]))
    m = len(segs)
    for i in range(m):
        for j in range(i + 2, m):
            if closed and i == 0 and j == m - 1:
                continue
            if _segments_cross(segs[i], segs[j]):
                raise GeometryError("curve self-intersects at panel resolution")


def _segments_cross(s1, s2):
    (p1, p2), (q1, q2) = s1, s2

    def orient(a, b, c):
        return -np.sign(np.imag((b - a).conjugate() * (c - a)))

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _point_set_diameter(pts):
    pts = np.asarray(pts)
    if pts.size > 512:
        step = max(1, pts.size // 512)
        pts = pts[::step]
    d = np.abs(pts[:, None] - pts[None, :])
    return float(np.max(d))


def _make_panels(n_nodes, n_panels):
    if n_panels <= 0 or n_nodes % n_panels:
        raise GeometryError(f"{n_nodes} nodes do not split into {n_panels} panels")
    per = n_nodes // n_panels
    return tuple((k * per, (k + 1) * per) for k in range(n_panels))


def _closed_from_parametrization(pos, dpos, n_nodes, n_panels):
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    nodes = pos(theta)
    dz = dpos(theta)
    tangents = dz / np.abs(dz)
    w = np.abs(dz) * (2.0 * np.pi / n_nodes)
    arclength = np.concatenate(([0.0], np.cumsum(w)))[:-1]
    total = float(np.sum(w))
    return ClosedContour(
        nodes=nodes,
        params=theta,
        dz_dtheta=dz,
        tangents=tangents,
        arclength=arclength,
        total_length=total,
        panels=_make_panels(n_nodes, n_panels),
    )


def build_closed_contour(spec):
    """Build a ClosedContour from a JSON-style mapping.

    Supported kinds: ``circle``, ``ellipse``, ``rounded-polygon``,
    ``node-chain`` (a closed chain of explicit points).
    """
    kind = spec.get("type")
    n_panels = int(spec.get("panels", 8))
    per = int(spec.get("nodes_per_panel", 16))
    n = n_panels * per

    if kind == "circle":
        c = _as_complex(spec.get("center", 0.0))
        r = float(spec["radius"])
        if r <= 0:
            raise GeometryError("circle radius must be positive")
        return _closed_from_parametrization(
            lambda th: c + r * np.exp(1j * th),
            lambda th: 1j * r * np.exp(1j * th),
            n, n_panels,
        )

    if kind == "ellipse":
        c = _as_complex(spec.get("center", 0.0))
        sa, sb = (float(v) for v in spec["semi_axes"])
        if sa <= 0 or sb <= 0:
            raise GeometryError("ellipse semi-axes must be positive")
        return _closed_from_parametrization(
            lambda th: c + sa * np.cos(th) + 1j * sb * np.sin(th),
            lambda th: -sa * np.sin(th) + 1j * sb * np.cos(th),
            n, n_panels,
        )

    if kind == "rounded-polygon":
        verts = np.array([_as_complex(v) for v in spec["vertices"]])
        radius = float(spec["corner_radius"])
        return _rounded_polygon(verts, radius, n, n_panels)

    if kind == "node-chain":
        nodes = np.array([_as_complex(v) for v in spec["nodes"]])
        return _closed_node_chain(nodes, n_panels=int(spec.get("panels", 8)))

    raise GeometryError(f"unknown closed-contour kind {kind!r}")


def _rounded_polygon(verts, radius, n_nodes, n_panels):
    if verts.size < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    if radius <= 0:
        raise GeometryError("corner radius must be positive")
    area = 0.5 * float(np.sum(np.imag(np.conj(verts) * np.roll(verts, -1))))
    if area < 0:
        verts = verts[::-1]

    nv = verts.size
    pieces = []  # (kind, data, length)
    tang_pts = []
    for k in range(nv):
        prev = verts[(k - 1) % nv]
        cur = verts[k]
        nxt = verts[(k + 1) % nv]
        e1 = (cur - prev) / abs(cur - prev)
        e2 = (nxt - cur) / abs(nxt - cur)
        phi = cmath.phase(e2 / e1)
        if abs(phi) < 1e-14:
            tang_pts.append((cur, cur, None, 0.0, e1))
            continue
        q = radius * math.tan(abs(phi) / 2.0)
        if q > 0.5 * min(abs(cur - prev), abs(nxt - cur)):
            raise GeometryError("corner radius too large for polygon edges")
        p1 = cur - e1 * q
        p2 = cur + e2 * q
        center = p1 + 1j * e1 * radius * np.sign(phi)
        tang_pts.append((p1, p2, center, phi, e1))

    for k in range(nv):
        p1, p2, center, phi, e1 = tang_pts[k]
        p2_prev = tang_pts[(k - 1) % nv][1]
        seg_len = abs(p1 - p2_prev)
        if seg_len > 0:
            pieces.append(("seg", (p2_prev, p1), seg_len))
        if center is not None:
            pieces.append(("arc", (center, radius, p1, phi), radius * abs(phi)))

    total = sum(p[2] for p in pieces)
    s_samples = total * np.arange(n_nodes) / n_nodes
    nodes = np.empty(n_nodes, dtype=complex)
    dz = np.empty(n_nodes, dtype=complex)
    bounds = np.cumsum([0.0] + [p[2] for p in pieces])
    idx = np.searchsorted(bounds, s_samples, side="right") - 1
    idx = np.clip(idx, 0, len(pieces) - 1)
    scale = total / (2.0 * np.pi)  # ds/dtheta, constant
    for i, s in enumerate(s_samples):
        kind, data, plen = pieces[idx[i]]
        loc = s - bounds[idx[i]]
        if kind == "seg":
            a, b = data
            u = (b - a) / abs(b - a)
            nodes[i] = a + u * loc
            dz[i] = u * scale
        else:
            center, r, start, phi = data
            ang0 = cmath.phase(start - center)
            sweep = math.copysign(loc / r, phi)
            nodes[i] = center + r * cmath.exp(1j * (ang0 + sweep))
            dz[i] = 1j * (nodes[i] - center) / r * np.sign(phi) * scale
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    w = np.abs(dz) * (2.0 * np.pi / n_nodes)
    return ClosedContour(
        nodes=nodes,
        params=theta,
        dz_dtheta=dz,
        tangents=dz / np.abs(dz),
        arclength=np.concatenate(([0.0], np.cumsum(w)))[:-1],
        total_length=float(np.sum(w)),
        panels=_make_panels(n_nodes, n_panels),
    )


def _closed_node_chain(nodes, n_panels):
    n = nodes.size
    if n < _MIN_NODES:
        raise ResolutionError(f"closed contour needs >= {_MIN_NODES} nodes, got {n}")
    if n % n_panels:
        n_panels = 1
    theta = 2.0 * np.pi * np.arange(n) / n
    dz = _periodic_fd4(nodes) / (2.0 * np.pi / n)
    w = np.abs(dz) * (2.0 * np.pi / n)
    contour = ClosedContour(
        nodes=nodes,
        params=theta,
        dz_dtheta=dz,
        tangents=dz / np.abs(dz),
        arclength=np.concatenate(([0.0], np.cumsum(w)))[:-1],
        total_length=float(np.sum(w)),
        panels=_make_panels(n, n_panels),
    )
    return contour


def _periodic_fd4(values):
    """4th-order centered first difference on a periodic unit-step grid."""
    vm2 = np.roll(values, 2)
    vm1 = np.roll(values, 1)
    vp1 = np.roll(values, -1)
    vp2 = np.roll(values, -2)
    return (vm2 - 8.0 * vm1 + 8.0 * vp1 - vp2) / 12.0


def _open_fd4(values, spacing):
    """4th-order first derivative on a uniform open grid (one-sided at ends)."""
    n = values.size
    d = np.empty(n, dtype=values.dtype)
    if n < 5:
        d[:] = np.gradient(values, spacing)
        return d
    v = values
    d[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / 12.0
    # one-sided / skewed 4th-order stencils at the ends
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    d[0] = np.dot(c, v[:5])
    d[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / 12.0
    d[-1] = -np.dot(c, v[-5:][::-1])
    d[-2] = -(-3.0 * v[-1] - 10.0 * v[-2] + 18.0 * v[-3] - 6.0 * v[-4] + v[-5]) / 12.0
    return d / spacing


# ---------------------------------------------------------------------------
# arcs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    """A single smooth open arc from ``a`` to ``b``.

    The plus side is the left side when travelling from a to b.  Nodes are
    interior; for ``segment`` and ``circular`` arcs they sit at the images of
    the first-kind Chebyshev points, for ``chain`` arcs they are the supplied
    interior points.

    ``sqrt_own_plus`` holds the plus boundary values of this arc's own factor
    s_j(z) = sqrt((z - a)(z - b)), normalized s_j(z)/z -> 1 at infinity with
    its cut along the arc.
    """

    kind: str
    a: complex
    b: complex
    nodes: np.ndarray
    params: np.ndarray            # tau in (-1, 1), ascending along a -> b
    dt_dtau: np.ndarray
    tangents: np.ndarray
    arclength: np.ndarray
    total_length: float
    panels: tuple
    sqrt_own_plus: np.ndarray
    # branch bookkeeping for the Moebius closed form
    _psi: float = 0.0
    _sign: float = 1.0
    # circular-arc data
    center: complex = 0.0
    radius: float = 0.0
    theta_a: float = 0.0
    theta_b: float = 0.0

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def midpoint(self):
        return 0.5 * (self.a + self.b)

    @property
    def normals_plus(self):
        return 1j * self.tangents

    @property
    def graded(self):
        """True when nodes follow the cosine grading (weighted rules valid)."""
        return self.kind in ("segment", "circular")

    @property
    def sin_u(self):
        """sqrt(1 - tau^2) at the nodes."""
        return np.sqrt(1.0 - self.params ** 2)

    def point_at(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.kind == "segment":
            mid = 0.5 * (self.a + self.b)
            half = 0.5 * (self.b - self.a)
            return mid + half * tau
        if self.kind == "circular":
            th = 0.5 * (self.theta_a + self.theta_b) + 0.5 * (self.theta_b - self.theta_a) * tau
            return self.center + self.radius * np.exp(1j * th)
        raise GeometryError("point_at is undefined for chain arcs")

    def factor_eval(self, z):
        """This arc's own square-root factor s_j(z) at points off the arc."""
        if self.kind == "chain":
            return _chain_factor_eval(self, z)
        zb = z - self.b
        xi = (z - self.a) / zb
        return self._sign * zb * _sqrt_ray(xi, self._psi)

    def factor_plus(self, t, tau=None):
        """Plus boundary value of the own factor at a point t on the open arc."""
        if self.kind == "segment":
            if tau is None:
                half = 0.5 * (self.b - self.a)
                tau = np.real((np.asarray(t) - self.midpoint) / half)
            return 1j * 0.5 * (self.b - self.a) * np.sqrt(1.0 - np.asarray(tau) ** 2)
        if self.kind == "circular":
            t = np.asarray(t)
            r = np.abs((t - self.a) / (t - self.b))
            return self._sign * (t - self.b) * (-np.sqrt(r) * np.exp(0.5j * self._psi))
        return _chain_factor_plus(self, t)


def _sqrt_ray(xi, psi):
    """Square root of xi with branch cut along the ray arg(xi) = psi."""
    rot = cmath.exp(-1j * (psi - math.pi))
    return np.sqrt(xi * rot) * cmath.exp(0.5j * (psi - math.pi))


def _calibrate_branch(arc_like, midpoint, diameter):
    """Fix the ray angle and overall sign so the factor ~ z at infinity."""
    a, b = arc_like["a"], arc_like["b"]
    mid_on_arc = arc_like["mid_on_arc"]
    psi = cmath.phase((mid_on_arc - a) / (mid_on_arc - b))
    zfar = midpoint + _FAR_FACTOR * diameter * cmath.exp(0.7j)
    raw = (zfar - b) * _sqrt_ray((zfar - a) / (zfar - b), psi)
    sign = 1.0 if abs(raw / zfar - 1.0) < abs(raw / zfar + 1.0) else -1.0
    return psi, sign


def _cheb_grading(m):
    """First-kind Chebyshev parameters, ascending, with sin(u) attached."""
    if m < 2:
        raise ResolutionError("an arc needs at least 2 interior nodes")
    k = np.arange(m, 0, -1)
    u = (2.0 * k - 1.0) * np.pi / (2.0 * m)
    return np.cos(u)  # ascending in (-1, 1)


def _build_segment_arc(a, b, m, n_panels):
    if a == b:
        raise DegenerateSystemError("segment endpoints coincide")
    tau = _cheb_grading(m)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid + half * tau
    dt = np.full(m, half, dtype=complex)
    tangents = dt / np.abs(dt)
    arclen = np.abs(half) * (tau + 1.0)
    psi, sign = _calibrate_branch(
        {"a": a, "b": b, "mid_on_arc": mid}, mid, abs(b - a)
    )
    arc = Arc(
        kind="segment", a=a, b=b, nodes=nodes, params=tau, dt_dtau=dt,
        tangents=tangents, arclength=arclen, total_length=abs(b - a),
        panels=_make_panels(m, n_panels) if m % n_panels == 0 else ((0, m),),
        sqrt_own_plus=1j * half * np.sqrt(1.0 - tau ** 2),
        _psi=psi, _sign=sign,
    )
    return arc


def _build_circular_arc(center, radius, theta_a, theta_b, m, n_panels):
    if radius <= 0:
        raise GeometryError("circular arc radius must be positive")
    sweep = theta_b - theta_a
    if sweep == 0 or abs(sweep) >= 2.0 * np.pi:
        raise GeometryError("circular arc sweep must be nonzero and under a full turn")
    tau = _cheb_grading(m)
    th = 0.5 * (theta_a + theta_b) + 0.5 * sweep * tau
    nodes = center + radius * np.exp(1j * th)
    dt = 1j * radius * np.exp(1j * th) * (0.5 * sweep)
    a = center + radius * cmath.exp(1j * theta_a)
    b = center + radius * cmath.exp(1j * theta_b)
    mid_on_arc = center + radius * cmath.exp(1j * 0.5 * (theta_a + theta_b))
    psi, sign = _calibrate_branch(
        {"a": a, "b": b, "mid_on_arc": mid_on_arc},
        0.5 * (a + b), max(abs(b - a), radius),
    )
    arc = Arc(
        kind="circular", a=a, b=b, nodes=nodes, params=tau, dt_dtau=dt,
        tangents=dt / np.abs(dt), arclength=radius * abs(sweep) * 0.5 * (tau + 1.0),
        total_length=radius * abs(sweep),
        panels=_make_panels(m, n_panels) if m % n_panels == 0 else ((0, m),),
        sqrt_own_plus=np.empty(0),  # filled below
        _psi=psi, _sign=sign,
        center=center, radius=radius, theta_a=theta_a, theta_b=theta_b,
    )
    plus = arc.factor_plus(nodes)
    object.__setattr__(arc, "sqrt_own_plus", plus)
    return arc


def _build_chain_arc(points, n_panels):
    pts = np.asarray(points, dtype=complex)
    if pts.size < 8:
        raise ResolutionError("chain arc needs at least 8 points")
    a, b = pts[0], pts[-1]
    nodes = pts[1:-1]
    chord = np.abs(np.diff(pts))
    s_all = np.concatenate(([0.0], np.cumsum(chord)))
    tang_all = _open_fd4(pts, 1.0)
    tang_all = tang_all / np.abs(tang_all)
    m = nodes.size
    arc = Arc(
        kind="chain", a=a, b=b, nodes=nodes,
        params=2.0 * s_all[1:-1] / s_all[-1] - 1.0,
        dt_dtau=np.gradient(pts, 2.0 / (pts.size - 1))[1:-1],
        tangents=tang_all[1:-1],
        arclength=s_all[1:-1], total_length=float(s_all[-1]),
        panels=((0, m),),
        sqrt_own_plus=np.empty(0),
    )
    object.__setattr__(arc, "sqrt_own_plus", _chain_factor_plus(arc, nodes))
    return arc


def _chain_factor_eval(arc, z):
    """Own factor on a chain arc by sign tracking along an escape path."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    zs = np.atleast_1d(z)
    out = np.empty(zs.shape, dtype=complex)
    diam = max(abs(arc.b - arc.a), arc.total_length)
    for i, zz in enumerate(zs.ravel()):
        out.ravel()[i] = _tracked_sqrt(arc, zz, diam)
    return complex(out.ravel()[0]) if scalar else out


def _principal_pair(arc, z):
    return np.sqrt(z - arc.a) * np.sqrt(z - arc.b)


def _tracked_sqrt(arc, z, diam):
    # walk from z away from the arc, then far out; count branch flips of the
    # per-factor principal product, whose discontinuities are two leftward
    # rays; calibrate against the asymptotic value at the far end.
    near = arc.nodes[np.argmin(np.abs(arc.nodes - z))]
    u = z - near
    u = u / abs(u) if abs(u) > 0 else 1.0
    leg1 = z + u * np.linspace(0.0, 8.0 * diam, 257)
    zfar_dir = leg1[-1] / abs(leg1[-1]) if abs(leg1[-1]) > 0 else 1.0
    leg2 = leg1[-1] * np.linspace(1.0, (_FAR_FACTOR * diam) / abs(leg1[-1]), 65)
    path = np.concatenate((leg1, leg2))
    vals = _principal_pair(arc, path)
    sign = 1.0
    for k in range(len(path) - 1):
        if abs(vals[k + 1] - sign * vals[k]) > abs(vals[k + 1] + sign * vals[k]):
            sign = -sign
    zf = path[-1]
    far_ok = abs(vals[-1] / zf - 1.0) < abs(vals[-1] / zf + 1.0)
    # sign is the flip count from z to far; the far value must match +z
    s0 = 1.0 if far_ok else -1.0
    return s0 * sign * _principal_pair(arc, z)


def _chain_factor_plus(arc, t):
    t = np.asarray(t, dtype=complex)
    scalar = t.ndim == 0
    ts = np.atleast_1d(t)
    idx = np.array([np.argmin(np.abs(arc.nodes - tt)) for tt in ts.ravel()])
    tang = arc.tangents[idx]
    diam = max(abs(arc.b - arc.a), arc.total_length)
    eps1 = 1e-5 * diam
    out = np.empty(ts.shape, dtype=complex)
    for i, tt in enumerate(ts.ravel()):
        n = 1j * tang[i]
        v1 = _chain_factor_eval(arc, tt + eps1 * n)
        v2 = _chain_factor_eval(arc, tt + 0.5 * eps1 * n)
        ph1, ph2 = np.angle(v1), np.angle(v2)
        ph2 += round((ph1 - ph2) / (2 * np.pi)) * 2 * np.pi
        phase = 2.0 * ph2 - ph1
        mag = math.sqrt(abs((tt - arc.a) * (tt - arc.b)))
        out.ravel()[i] = mag * cmath.exp(1j * phase)
    return complex(out.ravel()[0]) if scalar else out


# ---------------------------------------------------------------------------
# arc systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcSystem:
    """Union of pairwise disjoint arcs carrying R and its square-root branch."""

    arcs: tuple
    R_coeffs: np.ndarray = field(default=None)
    kind: str = "arcs"

    def __post_init__(self):
        if not self.arcs:
            raise GeometryError("arc system needs at least one arc")
        ends = self.endpoints
        for i in range(len(ends)):
            for j in range(i + 1, len(ends)):
                if abs(ends[i] - ends[j]) == 0.0:
                    raise DegenerateSystemError("coincident arc endpoints make R degenerate")
        self._check_disjoint()
        coeffs = np.polynomial.polynomial.polyfromroots(ends)
        object.__setattr__(self, "R_coeffs", coeffs)

    # -- structure ----------------------------------------------------------

    @property
    def n_arcs(self):
        return len(self.arcs)

    @property
    def endpoints(self):
        out = []
        for arc in self.arcs:
            out.extend((arc.a, arc.b))
        return np.array(out)

    @property
    def nodes(self):
        return np.concatenate([arc.nodes for arc in self.arcs])

    @property
    def n_nodes(self):
        return sum(arc.n_nodes for arc in self.arcs)

    @property
    def arc_offsets(self):
        off = [0]
        for arc in self.arcs:
            off.append(off[-1] + arc.n_nodes)
        return off

    @property
    def tangents(self):
        return np.concatenate([arc.tangents for arc in self.arcs])

    @property
    def arclength(self):
        # global arclength, accumulated across arcs in order
        out = []
        base = 0.0
        for arc in self.arcs:
            out.append(base + arc.arclength)
            base += arc.total_length
        return np.concatenate(out)

    @property
    def total_length(self):
        return sum(arc.total_length for arc in self.arcs)

    @property
    def panels(self):
        out = []
        for k, arc in enumerate(self.arcs):
            base = self.arc_offsets[k]
            out.extend((base + p0, base + p1) for (p0, p1) in arc.panels)
        return tuple(out)

    @property
    def local_panel_length(self):
        return self.total_length / max(len(self.panels), 1)

    def node_arc_index(self):
        idx = np.empty(self.n_nodes, dtype=int)
        for k, arc in enumerate(self.arcs):
            o = self.arc_offsets[k]
            idx[o:o + arc.n_nodes] = k
        return idx

    def diameter(self):
        pts = np.concatenate([self.endpoints, self.nodes])
        return _point_set_diameter(pts)

    @property
    def near_cutoff(self):
        return _NEAR_CUTOFF_FACTOR * self.diameter()

    def distance_to(self, z):
        pts = np.concatenate([self.nodes, self.endpoints])
        return np.min(np.abs(pts - z))

    def _check_disjoint(self):
        for i in range(self.n_arcs):
            for j in range(i + 1, self.n_arcs):
                pi = np.concatenate(([self.arcs[i].a], self.arcs[i].nodes, [self.arcs[i].b]))
                pj = np.concatenate(([self.arcs[j].a], self.arcs[j].nodes, [self.arcs[j].b]))
                step_i = max(1, pi.size // 64)
                step_j = max(1, pj.size // 64)
                pi_c, pj_c = pi[::step_i], pj[::step_j]
                for k in range(pi_c.size - 1):
                    for l in range(pj_c.size - 1):
                        if _segments_cross((pi_c[k], pi_c[k + 1]), (pj_c[l], pj_c[l + 1])):
                            raise DisjointnessError("arcs intersect at panel resolution")
                dmin = np.min(np.abs(pi[:, None] - pj[None, :]))
                if dmin == 0.0:
                    raise DisjointnessError("arcs share a point")

    # -- the square-root branch ---------------------------------------------

    def eval_R(self, z):
        return np.polynomial.polynomial.polyval(z, self.R_coeffs)

    def eval_sqrtR(self, z, check_distance=True):
        """sqrt(R) on the single-valued branch, for z off the arcs."""
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        zs = np.atleast_1d(z)
        if check_distance:
            cut = self.near_cutoff
            pts = np.concatenate([self.nodes, self.endpoints])
            flat = zs.ravel()
            for lo in range(0, flat.size, 4096):
                chunk = flat[lo:lo + 4096]
                dmin = np.min(np.abs(chunk[:, None] - pts[None, :]), axis=1)
                if np.any(dmin < cut):
                    raise NearBoundaryError(
                        "evaluation point is within the near-boundary cutoff; "
                        "use sqrtR_boundary_plus for on-arc values"
                    )
        out = np.ones(zs.shape, dtype=complex)
        for arc in self.arcs:
            out = out * arc.factor_eval(zs)
        return out[()] if scalar else out

    def sqrtR_plus_nodes(self):
        """Plus boundary values of sqrt(R) at every host node (cached)."""
        cached = getattr(self, "_plus_cache", None)
        if cached is not None:
            return cached
        vals = np.empty(self.n_nodes, dtype=complex)
        off = self.arc_offsets
        for k, arc in enumerate(self.arcs):
            own = arc.sqrt_own_plus.astype(complex)
            others = np.ones(arc.n_nodes, dtype=complex)
            for l, other in enumerate(self.arcs):
                if l != k:
                    others = others * other.factor_eval(arc.nodes)
            vals[off[k]:off[k] + arc.n_nodes] = own * others
        object.__setattr__(self, "_plus_cache", vals)
        return vals

    def sqrtR_plus_at(self, arc_index, t, tau=None):
        """Plus boundary value at an arbitrary interior point of one arc."""
        arc = self.arcs[arc_index]
        val = arc.factor_plus(t, tau=tau)
        for l, other in enumerate(self.arcs):
            if l != arc_index:
                val = val * other.factor_eval(np.asarray(t, dtype=complex))
        return val


def build_arc_system(arc_specs):
    """Build an ArcSystem from a list of JSON-style arc mappings.

    Each entry carries ``type`` (``segment`` | ``circular`` | ``chain``) plus
    ``panels`` / ``nodes_per_panel`` controlling the per-arc node count.
    """
    arcs = []
    for spec in arc_specs:
        kind = spec.get("type", "segment")
        n_panels = int(spec.get("panels", 8))
        per = int(spec.get("nodes_per_panel", 16))
        m = n_panels * per
        if kind == "segment":
            arcs.append(_build_segment_arc(
                _as_complex(spec["a"]), _as_complex(spec["b"]), m, n_panels))
        elif kind == "circular":
            arcs.append(_build_circular_arc(
                _as_complex(spec.get("center", 0.0)), float(spec["radius"]),
                float(spec["theta_a"]), float(spec["theta_b"]), m, n_panels))
        elif kind == "chain":
            pts = [_as_complex(p) for p in spec["nodes"]]
            arcs.append(_build_chain_arc(pts, n_panels))
        else:
            raise GeometryError(f"unknown arc kind {kind!r}")
    return ArcSystem(arcs=tuple(arcs))


def eval_sqrtR(system, z):
    """Module-level convenience wrapper for ArcSystem.eval_sqrtR."""
    return system.eval_sqrtR(z)


def sqrtR_boundary_plus(system, node_index=None, point=None, arc_index=None):
    """Plus-side boundary value of sqrt(R) on an arc of the system.

    Either pass a global ``node_index`` or an on-arc ``point`` together with
    ``arc_index``.  Requests at an arc endpoint raise, since sqrt(R) vanishes
    there only as a limit and the reciprocal densities blow up.
    """
    if node_index is not None:
        return system.sqrtR_plus_nodes()[node_index]
    if point is None or arc_index is None:
        raise ValueError("need node_index, or point and arc_index")
    arc = system.arcs[arc_index]
    if min(abs(point - arc.a), abs(point - arc.b)) < system.near_cutoff:
        raise EndpointSingularityError("boundary value requested at an arc endpoint")
    return system.sqrtR_plus_at(arc_index, point)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _as_complex(v):
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def parse_geometry(spec):
    """Dispatch a JSON-style geometry mapping to the right builder."""
    if "curve" in spec:
        return build_closed_contour(spec["curve"])
    if "arcs" in spec:
        return build_arc_system(spec["arcs"])
    raise GeometryError("geometry spec needs a 'curve' or 'arcs' entry")


def load_geometry(path):
    with open(path) as fh:
        return parse_geometry(json.load(fh))


def node_table_csv(host, path):
    """Write the node table: index, s, re_z, im_z, re_tangent, im_tangent."""
    nodes = host.nodes
    s = host.arclength
    tang = host.tangents
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "s", "re_z", "im_z", "re_tangent", "im_tangent"])
        for k in range(nodes.size):
            writer.writerow([
                k, f"{s[k]:.17g}",
                f"{nodes[k].real:.17g}", f"{nodes[k].imag:.17g}",
                f"{tang[k].real:.17g}", f"{tang[k].imag:.17g}",
            ])
