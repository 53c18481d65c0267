"""Solution theory for the dominant singular equation on systems of arcs.

With L a union of N disjoint arcs, R the monic degree-2N polynomial with
roots at the endpoints, and sqrt(R) the branch that is single-valued off L
and ~ z^N at infinity, the operator S_L has an N-dimensional kernel spanned
by p(t)/sqrt(R)+(t) over polynomials p of degree < N.  Every L^1 solution of
S_L f = g is

    f(x) = S[g * sqrtR+](x) / sqrtR+(x) + P(x) / sqrtR+(x),

with P an arbitrary polynomial of degree <= N-1.  A bounded solution

    f0(x) = sqrtR+(x) * S[g / sqrtR+](x)

exists iff the N solvability moments int t^k g / sqrtR+ dt vanish; when
they do not, f0 instead solves the modified equation S_L f0 = g + P with a
computable defect polynomial P built from the moments and the polynomial
part Q of sqrt(R) at infinity.

Everything here works on the graded node sets of the geometry layer, where
the two weighted quadrature folds (divide or multiply samples by the
plus values of the arc's own square-root factor) are spectrally accurate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cauchy import singular_S
from .errors import GeometryError, ResolutionError
from .geometry import ArcSystem
from .quadrature import host_rule, integrate
from .sampling import SampledDensity

__all__ = [
    "ComplexPolynomial",
    "SolveReport",
    "sqrtR_polynomial_part",
    "homogeneous_basis",
    "solvability_moments",
    "general_solution",
    "candidate_f0",
    "defect_polynomial",
    "modified_residual",
    "bounded_solution",
    "holder_diagnostic",
]


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial with complex coefficients, ascending degree order."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self):
        nz = np.nonzero(self.coefficients)[0]
        return int(nz[-1]) if nz.size else 0

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coefficients)

    def to_json(self):
        return [[float(c.real), float(c.imag)] for c in self.coefficients]

    @classmethod
    def from_json(cls, pairs):
        return cls(np.array([complex(re, im) for re, im in pairs]))


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a bounded-solution attempt on an arc system.

    ``solution`` always satisfies the modified equation S_L f = g + P; when
    ``bounded`` is true the defect P is numerically zero and ``residual`` is
    taken against g itself.  ``endpoint_values`` follow the order of the
    system's endpoint list (a_0, b_0, a_1, ...): zero by the continuity
    limit when bounded, NaN markers otherwise since 1/sqrt(R) terms blow up.
    """

    solution: SampledDensity
    moments: np.ndarray
    defect_poly: ComplexPolynomial
    residual: float
    bounded: bool
    endpoint_values: np.ndarray = field(default=None)

    def to_json(self, solution_csv):
        return {
            "bounded": bool(self.bounded),
            "moments": [[float(m.real), float(m.imag)] for m in self.moments],
            "defect_poly": self.defect_poly.to_json(),
            "residual": float(self.residual),
            "solution_csv": str(solution_csv),
        }


def _require_system(host):
    if not isinstance(host, ArcSystem):
        raise GeometryError("arc-system solver needs an ArcSystem host")
    return host


def sqrtR_polynomial_part(system):
    """Polynomial part Q of sqrt(R) at infinity, monic of degree N.

    R(t)/t^{2N} = 1 + r_1/t + ... feeds the square-root series
    2 s_j = r_j - sum_{i=1}^{j-1} s_i s_{j-i}; only the first N terms enter
    the polynomial part.
    """
    _require_system(system)
    n = system.n_arcs
    c = system.R_coeffs  # ascending, degree 2N, monic
    r = np.zeros(n + 1, dtype=complex)
    for j in range(1, n + 1):
        r[j] = c[2 * n - j]
    s = np.zeros(n + 1, dtype=complex)
    s[0] = 1.0
    for j in range(1, n + 1):
        acc = r[j]
        for i in range(1, j):
            acc -= s[i] * s[j - i]
        s[j] = 0.5 * acc
    q = np.zeros(n + 1, dtype=complex)
    for j in range(n + 1):
        q[n - j] = s[j]
    return ComplexPolynomial(q)


def homogeneous_basis(system):
    """The N kernel elements t^k / sqrt(R)+(t), sampled at the nodes."""
    _require_system(system)
    s_plus = system.sqrtR_plus_nodes()
    t = system.nodes
    out = []
    for k in range(system.n_arcs):
        vals = t ** k / s_plus
        out.append(SampledDensity(system, vals,
                                  meta={"kernel_index": k,
                                        "density_class": "inverse_sqrt"}))
    return out


def solvability_moments(g, system=None):
    """Moments m_k = int t^k g(t) / sqrt(R)+(t) dt, k = 0..N-1.

    The inverse square root is folded into the graded rule, so polynomial g
    is integrated exactly.
    """
    if system is None:
        system = g.host
    _require_system(system)
    if g.host is not system:
        raise GeometryError("sample host does not match the arc system")
    rule = host_rule(system)
    s_plus = system.sqrtR_plus_nodes()
    t = system.nodes
    base = g.values / s_plus
    out = np.empty(system.n_arcs, dtype=complex)
    for k in range(system.n_arcs):
        out[k] = integrate(SampledDensity(system, t ** k * base), rule)
    return out


def general_solution(g, system=None, P=None):
    """f = S[g * sqrtR+]/sqrtR+ + P/sqrtR+, the full L^1 solution family.

    P selects the kernel component; degree must stay <= N-1.
    """
    if system is None:
        system = g.host
    _require_system(system)
    if g.host is not system:
        raise GeometryError("sample host does not match the arc system")
    s_plus = system.sqrtR_plus_nodes()
    weighted = SampledDensity(system, g.values * s_plus)
    sw = singular_S(weighted, density_class="sqrt")
    vals = sw.values / s_plus
    if P is not None:
        if not isinstance(P, ComplexPolynomial):
            P = ComplexPolynomial(np.asarray(P, dtype=complex))
        if P.degree > system.n_arcs - 1:
            raise ValueError(
                f"kernel polynomial degree {P.degree} exceeds N-1 = {system.n_arcs - 1}"
            )
        vals = vals + P(system.nodes) / s_plus
    return SampledDensity(system, vals, meta={"density_class": "inverse_sqrt"})


def candidate_f0(g, system=None):
    """f0 = sqrtR+ * S[g / sqrtR+], the bounded-solution candidate.

    Vanishes like sqrt(distance) at every endpoint whenever g is Hoelder;
    solves S_L f0 = g exactly when the solvability moments vanish, and the
    modified equation S_L f0 = g + P otherwise.
    """
    if system is None:
        system = g.host
    _require_system(system)
    if g.host is not system:
        raise GeometryError("sample host does not match the arc system")
    s_plus = system.sqrtR_plus_nodes()
    inner = SampledDensity(system, g.values / s_plus)
    si = singular_S(inner, density_class="inverse_sqrt")
    return SampledDensity(system, s_plus * si.values,
                          meta={"density_class": "sqrt"})


def defect_polynomial(g, system=None):
    """The defect P with S_L f0 = g + P, degree <= N-1.

    Expanding the divided difference (Q(z) - Q(w))/(z - w) of the polynomial
    part Q of sqrt(R) reduces P to a moment sum:
    P_i = (1/pi i) * sum_{m >= i+1} Q_m * m_{m-1-i}.
    """
    if system is None:
        system = g.host
    _require_system(system)
    n = system.n_arcs
    q = sqrtR_polynomial_part(system).coefficients
    m = solvability_moments(g, system)
    p = np.zeros(n, dtype=complex)
    for i in range(n):
        acc = 0.0 + 0.0j
        for mm in range(i + 1, n + 1):
            acc += q[mm] * m[mm - 1 - i]
        p[i] = acc / (np.pi * 1j)
    return ComplexPolynomial(p)


def modified_residual(g, system=None):
    """sup-norm residual of the modified equation S_L f0 = g + P at nodes."""
    if system is None:
        system = g.host
    _require_system(system)
    f0 = candidate_f0(g, system)
    sf0 = singular_S(f0, density_class="sqrt")
    P = defect_polynomial(g, system)
    rhs = g.values + P(system.nodes)
    return float(np.max(np.abs(sf0.values - rhs)))


def _moment_tolerance(g, system):
    # scale-aware zero test for Eq.-level exact moment conditions
    n = system.n_arcs
    return 1e-8 * float(np.max(np.abs(g.values))) * system.diameter() ** (n - 0.5)


def bounded_solution(g, system=None, holder_hint=0.5):
    """Decide existence of a bounded solution and report the full outcome.

    The moments are compared against a scale-aware tolerance
    1e-8 * ||g||_inf * diam^(N - 1/2).  ``holder_hint`` records the caller's
    regularity assumption on g; it is not verified.
    """
    if system is None:
        system = g.host
    _require_system(system)
    moments = solvability_moments(g, system)
    tol = _moment_tolerance(g, system)
    bounded = bool(np.max(np.abs(moments)) <= tol) if moments.size else True
    f0 = candidate_f0(g, system)
    f0.meta["holder_hint"] = float(holder_hint)
    P = defect_polynomial(g, system)
    sf0 = singular_S(f0, density_class="sqrt")
    if bounded:
        residual = float(np.max(np.abs(sf0.values - g.values)))
        endpoint_values = np.zeros(2 * system.n_arcs, dtype=complex)
    else:
        rhs = g.values + P(system.nodes)
        residual = float(np.max(np.abs(sf0.values - rhs)))
        endpoint_values = np.full(2 * system.n_arcs, complex("nan"))
    return SolveReport(
        solution=f0,
        moments=moments,
        defect_poly=P,
        residual=residual,
        bounded=bounded,
        endpoint_values=endpoint_values,
    )


def holder_diagnostic(f, compact_margin, exponent=1.0):
    """Empirical Hoelder quotient away from the endpoints.

    Takes the max of |f(x) - f(y)| / |x - y|^exponent over pairs of nodes on
    the same arc whose distance to every system endpoint is at least
    ``compact_margin``.  Shrinking the margin toward 0 makes the quotient
    blow up exactly for densities in the 1/sqrt(R) class, which is the
    intended diagnostic.
    """
    system = _require_system(f.host)
    if compact_margin <= 0:
        raise ValueError("compact_margin must be positive")
    ends = system.endpoints
    best = 0.0
    total_kept = 0
    off = system.arc_offsets
    for k, arc in enumerate(system.arcs):
        t = arc.nodes
        vals = f.values[off[k]:off[k] + arc.n_nodes]
        dist = np.min(np.abs(t[:, None] - ends[None, :]), axis=1)
        keep = dist >= compact_margin
        total_kept += int(np.count_nonzero(keep))
        tk = t[keep]
        vk = vals[keep]
        if tk.size < 2:
            continue
        dv = np.abs(vk[:, None] - vk[None, :])
        dx = np.abs(tk[:, None] - tk[None, :])
        iu = np.triu_indices(tk.size, k=1)
        q = dv[iu] / dx[iu] ** exponent
        if q.size:
            best = max(best, float(np.max(q)))
    if total_kept < 2:
        raise ResolutionError(
            "fewer than 2 nodes survive the compact margin; refine the mesh "
            "or shrink the margin"
        )
    return best
