"""Independent reference values for the test suite.

Everything here is deliberately low-tech: dense composite Gauss-Legendre
panels, explicit regularization of principal values, and scipy special
functions.  None of it shares code with the package under test.
"""

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

# frozen constants used by tests (recomputed live by the oracle functions)
ELLIPSE_2_1_PERIMETER = 9.688448220547675  # semi-axes (2, 1)


def ellipse_perimeter(sa, sb):
    """Perimeter of an axis-aligned ellipse via the complete elliptic E."""
    a, b = max(sa, sb), min(sa, sb)
    m = 1.0 - (b / a) ** 2
    return 4.0 * a * special.ellipe(m)


def composite_gl(f, a, b, n_panels=64, order=12):
    """Composite Gauss-Legendre integral of f over the real interval [a, b]."""
    x0, w0 = leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    total = 0.0 + 0.0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        total += half * np.sum(w0 * f(mid + half * x0))
    return total


def pv_segment_dense(f, a, b, x, n_panels=256, order=12):
    """PV integral of f(t)/(t - x) over the straight segment [a, b].

    x must lie strictly inside.  The pole is split off analytically:
    the regularized part (f(t) - f(x))/(t - x) is smooth, and
    PV int dt/(t - x) = log(|b - x| / |x - a|) along a straight path.
    """
    a, b, x = complex(a), complex(b), complex(x)
    e = (b - a) / abs(b - a)
    alpha = abs(x - a)
    beta = abs(b - x)
    fx = f(x)

    def reg(u):
        t = x + u * e
        return (f(t) - fx) / u  # (f(t)-f(x))/(t-x) * e, with dt = e du

    val = composite_gl(reg, -alpha, beta, n_panels, order)
    return val + fx * np.log(beta / alpha)


def pv_arc_theta_dense(G, t_of_theta, dt_dtheta, theta_x, x,
                       n_panels=256, order=12):
    """PV integral of G(theta)/(t(theta) - x) dtheta over theta in (0, pi).

    G must be smooth on [0, pi] (endpoint-singular densities become smooth
    after the cosine substitution).  The pole at theta_x is regularized by
    subtracting the matching simple pole in theta, whose PV integral over
    (0, pi) is log((pi - theta_x) / theta_x).
    """
    res = G(theta_x) / dt_dtheta(theta_x)

    def reg(th):
        t = t_of_theta(th)
        return G(th) / (t - x) - res / (th - theta_x)

    val = composite_gl(reg, 0.0, theta_x, n_panels, order)
    val += composite_gl(reg, theta_x, np.pi, n_panels, order)
    return val + res * np.log((np.pi - theta_x) / theta_x)


def pv_closed_dense(f, z_of_theta, dz_dtheta, theta0, n=8192):
    """PV integral of f(t)/(t - t0) dt over a smooth closed contour.

    Subtracts the value at the pole; the remaining integrand is smooth and
    periodic, so an offset trapezoid rule (no node at theta0) is spectrally
    accurate.  The analytic part is PV int dt/(t - t0) = pi*i on any smooth
    closed curve.
    """
    t0 = z_of_theta(theta0)
    f0 = f(t0)
    # grid offset so no sample lands on the pole
    th = theta0 + (2.0 * np.pi) * (np.arange(n) + 0.5) / n
    t = z_of_theta(th)
    vals = (f(t) - f0) / (t - t0) * dz_dtheta(th)
    return (2.0 * np.pi / n) * np.sum(vals) + f0 * 1j * np.pi


def sL_union_dense(segments, x, n_panels=256, order=12):
    """(1/pi i) PV int of f(t)/(t - x) dt over a union of real segments.

    Each entry of ``segments`` is (a, b, F) with F(u) the u-space numerator
    on the cosine parametrization t(u) = mid + half*cos(u), u in (0, pi):
    F(u) = f(t(u)) * half * sin(u), so that the ascending-t integral is
    int_0^pi F(u)/(t(u) - x) du.  Endpoint-singular densities must have the
    sin(u) cancellation done analytically by the caller.  x must lie inside
    exactly one segment.
    """
    total = 0.0 + 0.0j
    hit = 0
    for a, b, F in segments:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        t_of_u = lambda u, mid=mid, half=half: mid + half * np.cos(u)
        if a < x < b:
            hit += 1
            u_x = np.arccos((x - mid) / half)
            dt_du = lambda u, half=half: -half * np.sin(u)
            total += pv_arc_theta_dense(F, t_of_u, dt_du, u_x, x,
                                        n_panels, order)
        else:
            total += composite_gl(lambda u: F(u) / (t_of_u(u) - x),
                                  0.0, np.pi, n_panels, order)
    if hit != 1:
        raise ValueError("x must lie inside exactly one segment")
    return total / (1j * np.pi)


def cauchy_dense(f, z_of_theta, dz_dtheta, z, n=8192):
    """Plain dense trapezoid for (1/2pi i) int f(t)/(t - z) dt, z off curve."""
    th = 2.0 * np.pi * np.arange(n) / n
    t = z_of_theta(th)
    vals = f(t) / (t - z) * dz_dtheta(th)
    return (2.0 * np.pi / n) * np.sum(vals) / (2j * np.pi)


def chebyshev_T(n, x):
    return special.eval_chebyt(n, x)


def chebyshev_U(n, x):
    return special.eval_chebyu(n, x)
