"""Quadrature rules matched to the node layouts of the geometry layer.

Closed contours carry the periodic trapezoid rule, which is spectrally
accurate for smooth integrands.  Graded arcs carry the rule induced by the
cosine substitution t = t(cos u): with nodes at the first-kind Chebyshev
parameters the plain weights

    W0_j = (pi/m) * sin(u_j) * (dt/dtau)_j

integrate smooth densities, and dividing the samples by the plus boundary
values of the arc's own square-root factor turns the same sum into the
first-kind Gauss-Chebyshev rule, exact for polynomial numerators.  This is
what makes densities with inverse-square-root endpoint growth integrable to
machine precision on the graded grid.

Panel-level rules (``build_rule``) cover the reference constructions:
trapezoid on a closed contour, Gauss-Legendre on a panel, and the two
Gauss-Chebyshev families on straight segments.  The Chebyshev rules follow
the usual convention that the endpoint weight function lives in the weights:
samples supply the smooth cofactor g, and the rule returns
int g(t)/sqrt((t-a)(b-t)) dt (first kind) or int g(t)*sqrt((t-a)(b-t)) dt
(second kind).

Principal values are computed by pole subtraction.  The subtracted kernel
integral is known in closed form per host (pi*i for a closed curve, a log
ratio for a segment, a sine-ratio log for a circular arc), and the diagonal
of the regularized part needs the derivative of the density at the pole,
taken spectrally (Fourier on closed contours, Chebyshev on graded arcs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlignmentError,
    EndpointSingularityError,
    GeometryError,
    InterpolationRequiredError,
)
from .geometry import Arc, ArcSystem, ClosedContour, _open_fd4, _periodic_fd4

__all__ = [
    "QuadratureRule",
    "build_rule",
    "host_rule",
    "integrate",
    "integrate_arclength",
    "pv_integrate",
    "fourier_derivative",
    "cheb_series",
    "cheb_derivative_values",
    "barycentric_interpolate",
    "analytic_pole_kernel",
]

RULE_KINDS = (
    "uniform-trapezoid",
    "gauss-legendre",
    "first-kind-chebyshev",
    "second-kind-chebyshev",
)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on a panel or a whole host.

    ``weights`` are the real magnitudes (arclength scale); ``dt_weights``
    carry the complex line element and are what ``integrate`` uses.  The two
    coincide on real segments.
    """

    host: object
    kind: str
    params: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    dt_weights: np.ndarray


def host_rule(host):
    """The package-default rule over all nodes of a contour or arc system."""
    if isinstance(host, ClosedContour):
        return QuadratureRule(
            host=host,
            kind="uniform-trapezoid",
            params=host.params,
            nodes=host.nodes,
            weights=host.arclength_weights,
            dt_weights=host.complex_weights,
        )
    if isinstance(host, ArcSystem):
        w = np.concatenate([_arc_weights(arc) for arc in host.arcs])
        return QuadratureRule(
            host=host,
            kind="graded-cosine",
            params=np.concatenate([arc.params for arc in host.arcs]),
            nodes=host.nodes,
            weights=np.abs(w),
            dt_weights=w,
        )
    raise GeometryError(f"no quadrature rule for host {type(host).__name__}")


def _arc_weights(arc):
    if arc.graded:
        m = arc.n_nodes
        return (np.pi / m) * arc.sin_u * arc.dt_dtau
    # chain: composite trapezoid over the supplied points; interior nodes
    # weighted by half the chord to each neighbour, endpoint chords included
    pts = np.concatenate(([arc.a], arc.nodes, [arc.b]))
    d = np.diff(pts)
    return 0.5 * (d[:-1] + d[1:])


def _panel_ends(panel):
    """Endpoints of a straight panel given as a pair or a segment arc."""
    if isinstance(panel, Arc):
        if panel.kind != "segment":
            raise GeometryError("Chebyshev rules require a straight segment panel")
        return panel.a, panel.b
    try:
        a, b = panel
    except (TypeError, ValueError):
        raise GeometryError(f"cannot read panel endpoints from {panel!r}")
    return complex(a), complex(b)


def build_rule(panel, kind, order):
    """A reference rule of the requested kind mapped onto the panel.

    Panels are endpoint pairs ``(a, b)`` or segment arcs for the Gauss
    kinds, and a closed contour for the trapezoid kind (which reuses the
    contour's own nodes, so ``order`` must match).
    """
    if kind not in RULE_KINDS:
        raise GeometryError(f"unknown rule kind {kind!r}")
    if order < 2:
        raise ValueError("rule order must be at least 2")

    if kind == "uniform-trapezoid":
        if not isinstance(panel, ClosedContour):
            raise GeometryError("the trapezoid kind applies to closed contours")
        if order != panel.n_nodes:
            raise GeometryError(
                f"trapezoid rule uses the contour's own {panel.n_nodes} nodes"
            )
        r = host_rule(panel)
        return r

    if kind == "gauss-legendre":
        xi, w = np.polynomial.legendre.leggauss(order)
        if isinstance(panel, Arc) and panel.kind == "circular":
            # map through the arc's angular parametrization
            th = panel.theta_a + (panel.theta_b - panel.theta_a) * 0.5 * (xi + 1.0)
            nodes = panel.center + panel.radius * np.exp(1j * th)
            dt = 1j * panel.radius * np.exp(1j * th) \
                * 0.5 * (panel.theta_b - panel.theta_a)
            dt_w = w * dt
            return QuadratureRule(panel, kind, xi, nodes, np.abs(dt_w), dt_w)
        a, b = _panel_ends(panel)
        half = 0.5 * (b - a)
        nodes = 0.5 * (a + b) + half * xi
        dt_w = w * half
        return QuadratureRule(panel, kind, xi, nodes, np.abs(dt_w), dt_w)

    a, b = _panel_ends(panel)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    m = order
    if kind == "first-kind-chebyshev":
        k = np.arange(1, m + 1)
        xi = np.cos((2.0 * k - 1.0) * np.pi / (2.0 * m))   # descending
        # weight function 1/sqrt((t-a)(b-t)); the |half| factors cancel
        w = np.full(m, np.pi / m)
        dt_w = w * (half / abs(half))
    else:
        k = np.arange(1, m + 1)
        xi = np.cos(k * np.pi / (m + 1.0))                 # descending
        w = (np.pi / (m + 1.0)) * np.sin(k * np.pi / (m + 1.0)) ** 2
        # weight function sqrt((t-a)(b-t)) contributes |half|, dt another half
        dt_w = w * half * abs(half)
        w = w * abs(half) ** 2
    nodes = mid + half * xi
    return QuadratureRule(panel, kind, xi, nodes, w, dt_w)


def _values_of(samples, n=None):
    vals = getattr(samples, "values", samples)
    vals = np.asarray(vals, dtype=complex)
    if n is not None and vals.size != n:
        raise AlignmentError(f"expected {n} samples, got {vals.size}")
    return vals


def integrate(samples, rule):
    """Weighted sum of the samples against the rule's complex dt weights.

    Accumulation is compensated (exact summation of the products), which is
    deterministic and at least as accurate as the plain ascending-order sum.
    """
    vals = _values_of(samples, rule.nodes.size)
    prod = rule.dt_weights * vals
    return complex(math.fsum(prod.real), math.fsum(prod.imag))


def integrate_arclength(samples, rule):
    vals = _values_of(samples, rule.nodes.size)
    prod = rule.weights * vals
    return complex(math.fsum(prod.real), math.fsum(prod.imag))


# ---------------------------------------------------------------------------
# spectral derivatives on the two node layouts
# ---------------------------------------------------------------------------

def fourier_derivative(values):
    """d/dtheta of samples on the uniform 2*pi-periodic grid."""
    n = values.size
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0  # zero the Nyquist mode for a real-symmetric derivative
    return np.fft.ifft(1j * k * np.fft.fft(values))


def cheb_series(values):
    """Chebyshev coefficients from samples at first-kind points.

    values[j] = f(cos u_j) with u_j = (2(m-j)-1)pi/(2m) (ascending tau).
    Discrete orthogonality of cosines at these points makes this exact for
    degree < m.
    """
    m = values.size
    u = np.arccos(np.clip(_first_kind_tau(m), -1.0, 1.0))
    n = np.arange(m)
    cosmat = np.cos(np.outer(n, u))
    c = (2.0 / m) * cosmat @ values
    c[0] *= 0.5
    return c


def _first_kind_tau(m):
    k = np.arange(m, 0, -1)
    return np.cos((2.0 * k - 1.0) * np.pi / (2.0 * m))


def cheb_derivative_values(arc, values):
    """df/dt at the nodes of a graded arc, via the u-space cosine series."""
    if not arc.graded:
        raise GeometryError("spectral arc derivative needs cosine-graded nodes")
    m = values.size
    c = cheb_series(values)
    u = np.arccos(np.clip(arc.params, -1.0, 1.0))
    n = np.arange(m)
    sinmat = np.sin(np.outer(u, n))
    df_du = -sinmat @ (n * c)
    dt_du = -arc.dt_dtau * arc.sin_u  # t = t(tau), tau = cos u
    return df_du / dt_du


def closed_node_derivative(host, values):
    """df/dt on a closed contour, for subtracted principal-value diagonals.

    Trigonometric differentiation: the involution identity S(Sg) = g is
    only reproduced to 1e-10 on band-limited data if the diagonal term is
    exact for trigonometric polynomials, which rules out fixed-order
    difference stencils at moderate node counts.
    """
    return fourier_derivative(values) / host.dz_dtheta


def fd4_arc_derivative(arc, values):
    """df/dt on a graded arc from 4th-order differences in the angle u.

    The cosine grading makes u uniform (step pi/m, descending along the
    node order), so classic stencils apply; the ends use skewed 4th-order
    stencils.
    """
    if not arc.graded:
        raise GeometryError("arc derivative needs cosine-graded nodes")
    m = values.size
    df_du = _open_fd4(values, -np.pi / m)
    dt_du = -arc.dt_dtau * arc.sin_u
    return df_du / dt_du


def barycentric_interpolate(arc, values, tau_eval):
    """Barycentric interpolation from first-kind Chebyshev nodes.

    Weights for the first-kind points are (-1)^j sin(u_j) (up to scale).
    ``tau_eval`` may hit a node exactly; the sample is returned unchanged.
    """
    if not arc.graded:
        raise GeometryError("interpolation needs cosine-graded nodes")
    tau = arc.params
    m = tau.size
    j = np.arange(m)
    # ascending tau means descending u; the alternating sign pattern survives
    w = ((-1.0) ** j) * arc.sin_u
    te = np.atleast_1d(np.asarray(tau_eval, dtype=float))
    out = np.empty(te.shape, dtype=complex)
    for i, x in enumerate(te):
        d = x - tau
        hit = np.nonzero(d == 0.0)[0]
        if hit.size:
            out[i] = values[hit[0]]
            continue
        q = w / d
        out[i] = np.sum(q * values) / np.sum(q)
    return out if np.ndim(tau_eval) else complex(out[0])


# ---------------------------------------------------------------------------
# principal values
# ---------------------------------------------------------------------------

def analytic_pole_kernel(host, pole_index):
    """Closed-form PV integral of dt/(t - x) over the pole's own component.

    Closed contour: pi*i regardless of shape.  Segment from a to b with the
    pole at an interior point x: log(|b - x|/|x - a|).  Circular arc: the
    sine-ratio log plus half the sweep times i.
    """
    if isinstance(host, ClosedContour):
        return 1j * np.pi
    _, arc, local = _locate(host, pole_index)
    x = arc.nodes[local]
    if arc.kind == "segment":
        return complex(np.log(abs(arc.b - x) / abs(x - arc.a)))
    if arc.kind == "circular":
        thx = arc.theta_a + (arc.theta_b - arc.theta_a) * 0.5 * (arc.params[local] + 1.0)
        num = np.sin(0.5 * (arc.theta_b - thx))
        den = np.sin(0.5 * (arc.theta_a - thx))
        return complex(np.log(abs(num / den)) + 0.5j * (arc.theta_b - arc.theta_a))
    raise GeometryError("analytic pole kernel needs a segment or circular arc")


def _locate(system, pole_index):
    off = system.arc_offsets
    for k, arc in enumerate(system.arcs):
        if off[k] <= pole_index < off[k + 1]:
            return k, arc, pole_index - off[k]
    raise IndexError(f"pole index {pole_index} out of range")


def resolve_pole(host, pole):
    """Node index of a pole given as an index or a point on the curve.

    Points must land on a node: the singularity subtraction needs the
    sample there.  A point at an arc endpoint is rejected separately, since
    no principal value exists where the density may blow up.
    """
    if isinstance(pole, (int, np.integer)):
        k = int(pole)
        if not 0 <= k < host.n_nodes:
            raise IndexError(f"pole index {k} out of range")
        return k
    x = complex(pole)
    tol = 1e-9 * max(host.diameter(), 1.0)
    if isinstance(host, ArcSystem):
        for e in host.endpoints:
            if abs(x - e) <= tol:
                raise EndpointSingularityError(
                    f"pole {x} lies at an arc endpoint"
                )
    d = np.abs(host.nodes - x)
    k = int(np.argmin(d))
    if d[k] > tol:
        raise InterpolationRequiredError(
            f"pole {x} is {d[k]:.3g} from the nearest node; "
            "principal values are only computed at nodes"
        )
    return k


def pv_integrate(samples, host, pole, endpoint_singular=False):
    """PV integral of f(t)/(t - x) dt with the pole x at a host node.

    ``pole`` is a node index or a point coinciding with a node.
    ``endpoint_singular=True`` declares that f carries the inverse of the
    arc's own square-root factor (f = smooth / s_plus); the smooth cofactor
    is recovered by folding, which turns the rule into the exact weighted
    one.  On closed contours the flag is ignored (there are no endpoints).
    """
    values = _values_of(samples, host.n_nodes)
    k = resolve_pole(host, pole)
    if isinstance(host, ClosedContour):
        return _pv_closed(host, values, k)
    return _pv_arcs(host, values, k, endpoint_singular)


def _pv_closed(host, values, k):
    t = host.nodes
    w = host.complex_weights
    x = t[k]
    fx = values[k]
    diff = t - x
    diff[k] = 1.0  # placeholder; the diagonal is patched below
    reg = (values - fx) / diff
    # diagonal of the regularized kernel: f'(x) along the curve
    reg[k] = closed_node_derivative(host, values)[k]
    return complex(np.sum(w * reg) + fx * 1j * np.pi)


def _pv_arcs(host, values, k, endpoint_singular):
    ak, arc, local = _locate(host, k)
    if not arc.graded:
        raise GeometryError("principal values need cosine-graded arcs")
    off = host.arc_offsets
    rule = host_rule(host)
    x = host.nodes[k]
    total = 0.0 + 0.0j

    # other arcs contribute nonsingular sums
    for l, other in enumerate(host.arcs):
        if l == ak:
            continue
        sl = slice(off[l], off[l + 1])
        total += np.sum(rule.dt_weights[sl] * values[sl] / (host.nodes[sl] - x))

    sl = slice(off[ak], off[ak + 1])
    w_own = rule.dt_weights[sl]
    f_own = values[sl]
    t_own = host.nodes[sl]

    if endpoint_singular:
        # fold the own factor: phi = f * s_plus is smooth on the closed arc
        s_plus = arc.sqrt_own_plus
        phi = f_own * s_plus
        phix = phi[local]
        diff = t_own - x
        diff[local] = 1.0
        reg = (phi - phix) / (diff * s_plus)
        dphi = fd4_arc_derivative(arc, phi)
        reg[local] = dphi[local] / s_plus[local]
        # PV int dt/(s_plus(t)(t-x)) = 0, so the subtracted term drops out
        total += np.sum(w_own * reg)
        return complex(total)

    fx = f_own[local]
    diff = t_own - x
    diff[local] = 1.0
    reg = (f_own - fx) / diff
    df = fd4_arc_derivative(arc, f_own)
    reg[local] = df[local]
    total += np.sum(w_own * reg)
    total += fx * analytic_pole_kernel(host, k)
    return complex(total)
