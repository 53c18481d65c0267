"""Geometry layer: contour builders, arc systems, and the sqrt(R) branch."""

import json

import numpy as np
import pytest

from cauchypot.errors import (
    DegenerateSystemError,
    DisjointnessError,
    EndpointSingularityError,
    GeometryError,
    NearBoundaryError,
    ResolutionError,
)
from cauchypot.geometry import (
    build_arc_system,
    build_closed_contour,
    node_table_csv,
    parse_geometry,
    sqrtR_boundary_plus,
)

from oracles import ellipse_perimeter, ELLIPSE_2_1_PERIMETER

rng = np.random.default_rng(20260815)


def circle(r=1.0, c=0.0, panels=8, per=16):
    return build_closed_contour({
        "type": "circle", "center": [np.real(c), np.imag(c)],
        "radius": r, "panels": panels, "nodes_per_panel": per,
    })


def ellipse(sa=2.0, sb=1.0, panels=8, per=32):
    return build_closed_contour({
        "type": "ellipse", "center": [0, 0], "semi_axes": [sa, sb],
        "panels": panels, "nodes_per_panel": per,
    })


def two_intervals(per=8, panels=4):
    return build_arc_system([
        {"type": "segment", "a": [-2, 0], "b": [-1, 0], "panels": panels, "nodes_per_panel": per},
        {"type": "segment", "a": [1, 0], "b": [2, 0], "panels": panels, "nodes_per_panel": per},
    ])


# ---------------------------------------------------------------------------
# closed contours
# ---------------------------------------------------------------------------

def test_circle_basic_fields():
    c = circle(r=2.0, c=1.0 + 0.5j)
    assert c.n_nodes == 128
    assert abs(c.total_length - 4.0 * np.pi) < 1e-13
    # complex weights integrate dt exactly to zero around a closed loop
    assert abs(np.sum(c.complex_weights)) < 1e-12
    assert np.max(np.abs(np.abs(c.tangents) - 1.0)) < 1e-13
    # plus normal points into the disc
    inside = c.nodes + 1e-3 * c.normals_plus
    assert np.all(np.abs(inside - (1.0 + 0.5j)) < 2.0)


def test_ellipse_length_matches_elliptic_integral():
    e = ellipse()
    ref = ellipse_perimeter(2.0, 1.0)
    assert abs(ref - ELLIPSE_2_1_PERIMETER) < 1e-12
    # trapezoid on a periodic analytic speed is spectrally accurate
    assert abs(e.total_length - ref) < 1e-12


def test_orientation_is_enforced():
    th = 2.0 * np.pi * np.arange(64) / 64
    cw = np.exp(-1j * th)  # clockwise
    with pytest.raises(GeometryError):
        build_closed_contour({"type": "node-chain", "nodes": np.stack([cw.real, cw.imag], axis=1).tolist(), "panels": 8})


def test_too_few_nodes_rejected():
    with pytest.raises(ResolutionError):
        circle(panels=1, per=8)


def test_self_intersection_rejected():
    th = 2.0 * np.pi * np.arange(64) / 64
    eight = np.sin(2 * th) + 1j * np.sin(th)  # figure eight
    with pytest.raises(GeometryError):
        build_closed_contour({
            "type": "node-chain",
            "nodes": np.stack([eight.real, eight.imag], axis=1).tolist(),
            "panels": 8,
        })


def test_winding_number():
    c = circle(r=1.5, c=0.3j)
    assert c.winding_number(0.3j) == 1
    assert c.winding_number(0.5 + 0.5j) == 1
    assert c.winding_number(2.0 + 2.0j) == 0
    assert c.contains(0.0) and not c.contains(10.0)


def test_rounded_polygon():
    sq = build_closed_contour({
        "type": "rounded-polygon",
        "vertices": [[1, 1], [-1, 1], [-1, -1], [1, -1]],
        "corner_radius": 0.25,
        "panels": 8, "nodes_per_panel": 16,
    })
    # shorter than the sharp square, longer than the inscribed circle
    assert sq.total_length < 8.0
    assert sq.total_length > 2 * np.pi
    # exact: 4 straight pieces of length 1.5 plus a full circle of radius 0.25
    assert abs(sq.total_length - (6.0 + 2 * np.pi * 0.25)) < 1e-12
    assert sq.signed_area() > 0
    assert np.max(np.abs(np.abs(sq.tangents) - 1.0)) < 1e-12
    with pytest.raises(GeometryError):
        build_closed_contour({
            "type": "rounded-polygon",
            "vertices": [[1, 1], [-1, 1], [-1, -1], [1, -1]],
            "corner_radius": 1.5,
            "panels": 8, "nodes_per_panel": 16,
        })


def test_vertex_ordering_of_polygon_is_normalized():
    cw = build_closed_contour({
        "type": "rounded-polygon",
        "vertices": [[1, -1], [-1, -1], [-1, 1], [1, 1]],  # clockwise input
        "corner_radius": 0.25,
        "panels": 8, "nodes_per_panel": 16,
    })
    assert cw.signed_area() > 0


# ---------------------------------------------------------------------------
# arc systems: construction
# ---------------------------------------------------------------------------

def test_segment_arc_nodes_and_grading():
    sys1 = build_arc_system([
        {"type": "segment", "a": [-1, 0], "b": [1, 0], "panels": 4, "nodes_per_panel": 8},
    ])
    arc = sys1.arcs[0]
    m = arc.n_nodes
    assert m == 32
    # first-kind Chebyshev parameters, ascending
    k = np.arange(m, 0, -1)
    tau_ref = np.cos((2 * k - 1) * np.pi / (2 * m))
    assert np.max(np.abs(arc.params - tau_ref)) < 1e-14
    assert np.all(np.diff(arc.nodes.real) > 0)
    # own-factor boundary value on [-1,1]: i*sqrt(1-tau^2)
    assert np.max(np.abs(arc.sqrt_own_plus - 1j * np.sqrt(1 - tau_ref**2))) < 1e-14


def test_disjointness_enforced():
    with pytest.raises(DisjointnessError):
        build_arc_system([
            {"type": "segment", "a": [-1, 0], "b": [1, 0], "panels": 2, "nodes_per_panel": 8},
            {"type": "segment", "a": [0, -1], "b": [0, 1], "panels": 2, "nodes_per_panel": 8},
        ])
    with pytest.raises((DisjointnessError, DegenerateSystemError)):
        build_arc_system([
            {"type": "segment", "a": [-1, 0], "b": [0, 0], "panels": 2, "nodes_per_panel": 8},
            {"type": "segment", "a": [0, 0], "b": [1, 0], "panels": 2, "nodes_per_panel": 8},
        ])


def test_degenerate_endpoints_rejected():
    with pytest.raises((DegenerateSystemError, GeometryError)):
        build_arc_system([
            {"type": "segment", "a": [0.5, 0], "b": [0.5, 0], "panels": 2, "nodes_per_panel": 8},
        ])


# ---------------------------------------------------------------------------
# sqrt(R): branch identities
# ---------------------------------------------------------------------------

def test_sqrtR_square_is_R():
    sysm = build_arc_system([
        {"type": "segment", "a": [-2, 0], "b": [-1, 0.5], "panels": 2, "nodes_per_panel": 8},
        {"type": "circular", "center": [1, 0], "radius": 0.7,
         "theta_a": -1.0, "theta_b": 1.2, "panels": 2, "nodes_per_panel": 8},
    ])
    pts = 3.0 * (rng.standard_normal(40) + 1j * rng.standard_normal(40))
    pts = np.array([z for z in pts if sysm.distance_to(z) > 0.05])
    v = sysm.eval_sqrtR(pts)
    assert np.max(np.abs(v**2 - sysm.eval_R(pts))) < 1e-10 * np.max(np.abs(sysm.eval_R(pts)))


def test_sqrtR_normalized_at_infinity():
    sysm = two_intervals()
    for ang in (0.3, 1.7, 2.9, -2.2):
        z = 1e8 * np.exp(1j * ang)
        assert abs(sysm.eval_sqrtR(z) / z**2 - 1.0) < 1e-6


def test_sqrtR_single_valued_off_arcs():
    # walk a closed loop that encircles one interval; values must come back
    # to the start without a sign flip and with small increments throughout
    sysm = two_intervals()
    th = 2.0 * np.pi * np.arange(400) / 400
    loop = 1.5 + 0.8 * np.exp(1j * th)  # encircles [1,2] only
    v = sysm.eval_sqrtR(loop)
    dv = np.abs(np.diff(np.concatenate([v, v[:1]])))
    assert np.max(dv) < 0.2 * np.max(np.abs(v))


def test_boundary_values_are_opposite_and_square_to_R():
    sysm = two_intervals(per=16)
    plus = sysm.sqrtR_plus_nodes()
    nodes = sysm.nodes
    # plus value squared equals R on the arc (the modulus is continuous)
    assert np.max(np.abs(plus**2 - sysm.eval_R(nodes))) < 1e-10
    # compare with a numerical limit from either side
    tang = sysm.tangents
    for idx in (3, 20, 40, 60):
        t, n = nodes[idx], 1j * tang[idx]
        above = sysm.eval_sqrtR(t + 1e-7 * n, check_distance=False)
        below = sysm.eval_sqrtR(t - 1e-7 * n, check_distance=False)
        assert abs(above - plus[idx]) < 1e-5
        assert abs(below + plus[idx]) < 1e-5
        assert abs(above + below) < 1e-5  # opposite limits


def test_circular_arc_boundary_limit():
    sysm = build_arc_system([
        {"type": "circular", "center": [0, 0], "radius": 1.0,
         "theta_a": 0.4, "theta_b": 2.3, "panels": 4, "nodes_per_panel": 8},
    ])
    arc = sysm.arcs[0]
    t = arc.point_at(0.11)
    p = sysm.sqrtR_plus_at(0, t)
    n = 1j * 1j * t  # plus normal for a ccw-run circular arc points inward
    n = n / abs(n)
    lim = sysm.eval_sqrtR(t + 1e-8 * n, check_distance=False)
    assert abs(p - lim) < 1e-6
    assert abs(p**2 - sysm.eval_R(t)) < 1e-10


def test_chain_arc_matches_segment_closed_form():
    # a chain sampled from a straight segment must reproduce the segment branch
    pts = np.linspace(-1.0, 1.0, 41)
    chain = build_arc_system([
        {"type": "chain", "nodes": np.stack([pts, np.zeros_like(pts)], axis=1).tolist()},
    ])
    seg = build_arc_system([
        {"type": "segment", "a": [-1, 0], "b": [1, 0], "panels": 1, "nodes_per_panel": 16},
    ])
    for z in (1.7 + 0.3j, -0.4 + 1.1j, 0.2 - 0.9j, 3.0):
        assert abs(chain.eval_sqrtR(z) - seg.eval_sqrtR(z)) < 1e-10
    # boundary plus values along the chain approximate i*sqrt(1-x^2)
    x = chain.nodes.real
    ref = 1j * np.sqrt(1.0 - x**2)
    assert np.max(np.abs(chain.sqrtR_plus_nodes() - ref)) < 1e-4


def test_near_boundary_guard():
    sysm = two_intervals()
    with pytest.raises(NearBoundaryError):
        sysm.eval_sqrtR(sysm.nodes[5])
    with pytest.raises(EndpointSingularityError):
        sqrtR_boundary_plus(sysm, point=sysm.arcs[0].a, arc_index=0)


def test_R_coefficients_are_monic_product():
    sysm = two_intervals()
    # R(z) = (z^2 - 1)(z^2 - 4) for endpoints +-1, +-2
    ref = np.array([4.0, 0.0, -5.0, 0.0, 1.0])
    assert np.max(np.abs(sysm.R_coeffs - ref)) < 1e-12


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_parse_geometry_dispatch(tmp_path):
    spec = {"curve": {"type": "circle", "center": [0, 0], "radius": 1.0,
                      "panels": 4, "nodes_per_panel": 8}}
    host = parse_geometry(spec)
    assert host.kind == "closed"
    spec2 = {"arcs": [{"type": "segment", "a": [-1, 0], "b": [1, 0],
                       "panels": 2, "nodes_per_panel": 8}]}
    host2 = parse_geometry(spec2)
    assert host2.kind == "arcs"
    with pytest.raises(GeometryError):
        parse_geometry({"neither": 1})
    # file round trip
    p = tmp_path / "geom.json"
    p.write_text(json.dumps(spec))
    from cauchypot.geometry import load_geometry
    host3 = load_geometry(p)
    assert host3.n_nodes == host.n_nodes


def test_node_table_csv(tmp_path):
    c = circle(panels=4, per=8)
    path = tmp_path / "nodes.csv"
    node_table_csv(c, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "index,s,re_z,im_z,re_tangent,im_tangent"
    assert len(lines) == c.n_nodes + 1
    s_vals = [float(l.split(",")[1]) for l in lines[1:]]
    assert all(b > a for a, b in zip(s_vals, s_vals[1:]))
