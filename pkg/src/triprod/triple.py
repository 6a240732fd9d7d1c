"""The reduced triple-product integrals and their verification suites.

``i_n`` evaluates the convergent reduced integral

    I_n(a,b,c) = int_R int_R int_0^inf r^{n-2} e^{t(c-a-b)}
                 (1+(e^{-t}+x)^2+r^2)^{-a} (1+x^2+r^2)^{-b} dr dx dt

(double integral for n = 1), ``i_n_prime`` the variant with an extra
factor x.  ``t_st_numeric`` assembles the invariant triple product as
c_n * I_n(lam+n/2, mu+n/2, nu+n/2), and the suite functions check the
recursion ladder, the Gamma-ratio closed form and the decay asymptotics.

Numerically the t-axis is split in two charts.  For t >= t1 the mass in
x sits near the two wells at 0 and -e^{-t}, both within a bounded window,
and the original coordinates are used.  For t < t1 the well at -e^{-t}
runs away, so the integral is rewritten exactly under the rescaling
(x, r) = e^{-t} (xi, rho): the wells then sit at xi = 0 and xi = -1 for
every t and log-graded fixed grids resolve them.  All complex powers are
of positive real bases, evaluated as a single exp of the combined
exponent so no intermediate factor under- or overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .config import TOLERANCES
from .gammafn import (SpectralTriple, gamma_ratio, gamma_ratio_arguments,
                      gamma_ratio_log, stirling_abs_log)
from .lorentz import (Dimension, GroupElement, iwasawa_t_batch,
                      k_factor_batch)
from .quadrature import QuadResult, QuadratureError, TruncationSpec, _adapt, \
    _InnerPlane, haar_rotations

__all__ = [
    "AbcParams",
    "IdentityReport",
    "ConvergenceError",
    "integrand",
    "c_n",
    "i_n",
    "i_n_prime",
    "t_st_numeric",
    "t_st_closed_ratio_test",
    "recursion_suite",
    "asymptotic_slope_test",
    "lemma12_check",
]


class ConvergenceError(ValueError):
    """Parameters outside the (sufficient) convergence region."""


@dataclass(frozen=True)
class AbcParams:
    """Arguments (a, b, c) of the reduced integral at dimension index n.

    ``converges`` / ``converges_prime`` implement a sufficient envelope
    test: positivity of the decay rates toward t -> +/- inf (two wells
    plus the region between them) and finiteness of the transverse mass.
    The exact convergence region is not claimed.
    """

    a: complex
    b: complex
    c: complex
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")

    def _rates(self, x_weight: bool):
        """(transverse mass margin, decay rate to t=+inf, to t=-inf).

        Toward t = -inf the slower of two mechanisms wins: the mass in
        the two wells (at x = 0 and the runaway x = -e^{-t}) and the mass
        of the region between them.  The x-weight gains one power of
        e^{-t} at the runaway well and loses one at the odd-cancelling
        well at 0.
        """
        sa, sb, sc = self.a.real, self.b.real, self.c.real
        w = 1 if x_weight else 0
        mass = 2.0 * (sa + sb) - (self.n + w)
        k_plus = sa + sb - sc
        if x_weight:
            k_bump = min(sc - sb + sa + 1.0, sc - sa + sb - 1.0)
        else:
            k_bump = sc - sa - sb + 2.0 * min(sa, sb)
        k_mid = sa + sb + sc - self.n - w
        return mass, k_plus, min(k_bump, k_mid)

    @property
    def converges(self) -> bool:
        mass, kp, km = self._rates(False)
        return mass > 0 and kp > 0 and km > 0

    @property
    def converges_prime(self) -> bool:
        mass, kp, km = self._rates(True)
        return mass > 0 and kp > 0 and km > 0


def c_n(n: int) -> float:
    """Normalization c_1 = 1, c_n = (n-1) vol(B_{n-1}) for n > 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1.0
    k = n - 1
    return (n - 1) * math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


def integrand(p: AbcParams, t, x, r=0.0):
    """The reduced integrand at (t, x, r); r is ignored for n = 1.

    Broadcasts over array arguments.  Complex powers are taken on
    positive real bases via exp(-a log base), so there is no branch
    ambiguity, and all exponential factors are combined into one exp.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    a, b, c = complex(p.a), complex(p.b), complex(p.c)
    if a.imag == b.imag == c.imag == 0.0:
        a, b, c = a.real, b.real, c.real  # real fast path
    u = np.exp(-t)
    if p.n == 1:
        base_a = 1.0 + (u + x) ** 2
        base_b = 1.0 + x ** 2
    else:
        r = np.asarray(r, dtype=float)
        base_a = 1.0 + (u + x) ** 2 + r ** 2
        base_b = 1.0 + x ** 2 + r ** 2
    expo = (c - a - b) * t - a * np.log(base_a) - b * np.log(base_b)
    out = np.exp(expo)
    if p.n > 2:
        out = out * r ** (p.n - 2)
    return out


# ---------------------------------------------------------------------------
# Grid construction
# ---------------------------------------------------------------------------

def _graded(lo, hi, h0, ratio=1.5, cap=None):
    """Break points from lo to hi, first step h0, geometric growth."""
    pts = [lo]
    h = h0
    while pts[-1] + h < hi:
        pts.append(pts[-1] + h)
        h *= ratio
        if cap is not None:
            h = min(h, cap)
    pts.append(hi)
    return pts


def _log_core(scale_min, scale_max, ratio=3.0):
    """Dyadic-style positive break points from scale_min up to scale_max."""
    pts = [scale_min]
    while pts[-1] < scale_max:
        pts.append(min(pts[-1] * ratio, scale_max))
    return pts


def _t_breaks(t_lo, t_hi, omega):
    """t panels: oscillation-resolving near 0, graded toward the tails.

    The core spacing pi / max(1, omega) implements the oscillation
    pre-subdivision; panels in the tails may not exceed ~2 periods.
    """
    h0 = math.pi / max(1.0, omega)
    cap = None if omega <= 0.1 else 2.2 * math.pi / omega
    core_lo = min(max(t_lo, -6.0), t_hi)
    core_hi = max(min(t_hi, 6.0), t_lo)
    pts = list(np.arange(core_lo, core_hi, h0)) + [core_hi]
    if core_hi < t_hi:
        pts += _graded(core_hi, t_hi, h0, cap=cap)[1:]
    if t_lo < core_lo:
        left = _graded(-core_lo, -t_lo, h0, cap=cap)
        pts = [-v for v in left[::-1]] + pts
    return np.asarray(sorted(set(pts)))


def _x_breaks_window(lo, hi, h0, x_cap_ratio=1.6, omega=0.0):
    """Window panels for the unscaled chart: uniform core, graded tails."""
    cap = None if omega <= 0.5 else 2.2 * math.pi / omega * \
        max(1.0, abs(lo) + abs(hi)) / 10.0
    core_lo, core_hi = max(lo, -18.0), min(hi, 6.0)
    pts = list(np.arange(core_lo, core_hi, h0)) + [core_hi]
    if core_hi < hi:
        g = _graded(core_hi, hi, max(h0, 0.5), ratio=x_cap_ratio, cap=cap)
        pts += g[1:]
    if lo < core_lo:
        g = _graded(-core_lo, -lo, max(h0, 0.5), ratio=x_cap_ratio, cap=cap)
        pts = [-v for v in g[::-1]] + pts[1:]
    return np.asarray(sorted(set(pts)))


def _xi_breaks(delta, xi_max):
    """Rescaled-chart panels: log-graded into the wells at 0 and -1."""
    right = _log_core(delta, 0.45)
    core0 = [-v for v in right[::-1]] + [0.0] + right
    core1 = [-1.0 + v for v in core0]
    mid = [-0.55, -0.5, -0.45]
    tails_r = _log_core(0.45, xi_max)[1:]
    tails_l = [-1.0 - v for v in _log_core(0.45, xi_max)[1:]]
    pts = sorted(set(core0 + core1 + mid + tails_r + tails_l))
    return np.asarray([p for p in pts if -1.0 - xi_max <= p <= xi_max])


def _rho_breaks(delta, rho_max):
    pts = [0.0] + _log_core(delta, rho_max)
    return np.asarray(pts)


def _plane_mass(s: float, n: int) -> float:
    """Closed form of the transverse mass integral
    int r^{n-2} (1+x^2+r^2)^{-s} dx dr (over x in R, r > 0)."""
    if 2 * s <= n:
        raise ConvergenceError("transverse mass diverges")
    if n == 1:
        return math.sqrt(math.pi) * math.gamma(s - 0.5) / math.gamma(s)
    wn = math.sqrt(math.pi) * math.gamma((n - 1) / 2.0) / math.gamma(n / 2.0)
    return wn * math.gamma(n / 2.0) * math.gamma(s - n / 2.0) \
        / (2.0 * math.gamma(s))


@dataclass
class _Plan:
    t_lo: float
    t_hi: float
    t1: float
    x_lo: float
    x_max: float
    r_max: float
    xi_delta: float
    xi_max: float
    tail_bound: float
    scale: float
    well_cap: bool = False   # wells resolved to the e^{t} regulator scale


_U1 = 12.0  # chart switch: rescaled coordinates once e^{-t} > _U1


def _make_plan(p: AbcParams, tol: float, x_weight: bool) -> _Plan:
    mass, kp, km = p._rates(x_weight)
    if not (mass > 0 and kp > 0 and km > 0):
        raise ConvergenceError(
            f"I{'_prime' if x_weight else ''}_{p.n}({p.a}, {p.b}, {p.c}) "
            f"fails the convergence test (mass {mass:.3g}, rates "
            f"{kp:.3g}/{km:.3g})")
    sa, sb, sc = p.a.real, p.b.real, p.c.real
    w = 1 if x_weight else 0
    scale = max(1.0, _plane_mass(sa + sb, p.n)) * (1.0 / kp + 1.0 / km)
    target = max(tol, 1e-13) * scale * TOLERANCES.tail_fraction / 8.0

    t_hi = min(140.0, max(5.0, math.log(3.0 * scale / (target * kp)) / kp))
    t1 = -math.log(_U1)
    t_lo = t1 - min(140.0, max(5.0, math.log(3.0 * scale / (target * km)) / km))

    px = 2.0 * (sa + sb) - p.n - w
    x_max = float(np.clip((3.0 * scale / (target * px)) ** (1.0 / px),
                          12.0, 1e12))
    pr = 2.0 * (sa + sb) - p.n + 1.0
    r_max = float(np.clip((3.0 * scale / (target * pr)) ** (1.0 / pr),
                          8.0, 1e12))
    # Well resolution in the rescaled chart, decided per well.  A
    # subcritical well (local exponent below the transverse dimension)
    # has an integrable corner whose shells below s carry mass ~ s^gap; a
    # supercritical well keeps its mass in the e^{t} regulator cap and
    # must stay resolved until the cap's t-envelope drops below budget.
    wells = (
        (sa, p.n - 2.0 * sa, sc - sa + sb - w),        # runaway well
        (sb, p.n + w - 2.0 * sb, sc + sa - sb + w),    # well at x = 0
    )
    tail_wells = 0.0
    deltas = [0.05]
    for _, gap_w, rate_w in wells:
        if gap_w > 0.15:
            d_w = (target / (3.0 * scale)) ** (1.0 / gap_w)
            deltas.append(d_w)
            if d_w < 1e-12:  # resolution floor: leftover shell mass
                tail_wells += 3.0 * scale * (1e-12) ** gap_w / gap_w
        else:
            deltas.append(0.5 * (target / (3.0 * scale)) ** (1.0 / rate_w))
    xi_delta = float(np.clip(min(deltas), 1e-12, 0.05))
    xi_max = float(np.clip((3.0 * scale / (target * px)) ** (1.0 / px),
                           3.0, 1e12))

    # A supercritical well hitting the resolution floor would feed the
    # rule unresolved spikes at very negative t; clamp the range there
    # and charge the omitted cap mass with its closed-form coefficient.
    t_floor = math.log(xi_delta) + 1.0
    supercritical = [x for x in wells if x[1] <= 0.15]
    if t_lo < t_floor and supercritical:
        for sw, _, rate_w in supercritical:
            coef = _plane_mass(max(sw, 0.51 * p.n + 0.01), p.n)
            tail_wells += 1.5 * coef * math.exp(rate_w * t_floor) / rate_w
        t_lo = t_floor

    # honest omitted mass for the achieved (possibly clipped) box
    tail = tail_wells + 3.0 * scale * (
        math.exp(-kp * t_hi) / kp
        + math.exp(-km * max(t1 - t_lo, 1.0)) / km
        + x_max ** (-px) / px
        + r_max ** (-pr) / pr
    )
    # the left x tail decays with the same joint power measured from the
    # runaway well at -e^{-t} >= -_U1, so it needs the same reach
    return _Plan(t_lo=t_lo, t_hi=t_hi, t1=t1, x_lo=-(_U1 + 8.0 + x_max),
                 x_max=x_max, r_max=r_max, xi_delta=xi_delta, xi_max=xi_max,
                 tail_bound=tail, scale=scale, well_cap=well_cap)


# ---------------------------------------------------------------------------
# The two-chart evaluation
# ---------------------------------------------------------------------------

def _chart1_f(p: AbcParams, x_weight: bool):
    """Integrand in original coordinates (t >= t1)."""
    if p.n == 1:
        def f(t, x):
            v = integrand(p, t, x)
            return v * x if x_weight else v
    else:
        def f(t, x, r):
            v = integrand(p, t, x, r)
            return v * x if x_weight else v
    return f


def _chart2_f(p: AbcParams, x_weight: bool):
    """Integrand after the exact rescaling (x, r) = e^{-t} (xi, rho).

    Writing u = e^{-t}, each base factors as
    (1 + u^2 s)^{-a} = u^{-2a} (u^{-2} + s)^{-a}, and the pulled-out
    powers combine with the Jacobian u^n (u for n = 1) and the x-weight
    u xi into the single exponential e^{t(c + a + b - shift)}.
    """
    a, b, c, n = complex(p.a), complex(p.b), complex(p.c), p.n
    if a.imag == b.imag == c.imag == 0.0:
        a, b, c = a.real, b.real, c.real
    shift = n + (1 if x_weight else 0)

    if n == 1:
        def f(t, xi):
            t = np.asarray(t, dtype=float)
            reg = np.exp(2.0 * t)
            la = np.log((1.0 + xi) ** 2 + reg)
            lb = np.log(xi ** 2 + reg)
            out = np.exp((c + a + b - shift) * t - a * la - b * lb)
            return out * xi if x_weight else out
    else:
        def f(t, xi, rho):
            t = np.asarray(t, dtype=float)
            reg = np.exp(2.0 * t)
            la = np.log((1.0 + xi) ** 2 + rho ** 2 + reg)
            lb = np.log(xi ** 2 + rho ** 2 + reg)
            out = np.exp((c + a + b - shift) * t - a * la - b * lb)
            if n > 2:
                out = out * rho ** (n - 2)
            return out * xi if x_weight else out
    return f


def _run_chart(f, t_breaks, x_breaks, r_breaks, tol, max_evals, probes):
    """Frozen-plane iterated quadrature over one t chart.

    The outer t rule stops refining once its error sits below the inner
    plane's own noise (a frozen inner grid makes G(t) rough at the
    inner_rel level, which bisection can never beat).
    """
    plane = _InnerPlane(f, x_breaks, r_breaks)
    tb = np.asarray(t_breaks, dtype=float)
    probes = np.asarray(probes, dtype=float)
    plane.refine(probes, inner_tol=max(0.15 * tol, 1e-11))

    g0, _ = plane._eval_tensor(probes)
    g_scale = float(np.abs(g0).max()) + 1e-300
    span = float(tb[-1] - tb[0])
    abs_stop = 0.3 * plane.inner_rel * g_scale * max(span, 1.0)
    row_cost = plane.xn.size * (plane.rn.size if r_breaks is not None else 1)
    t_budget = max(3000, max_evals // max(row_cost, 1))

    def g(ts):
        vals, _ = plane._eval_tensor(ts)
        return vals

    value, t_err, _, fabs = _adapt(g, tb, tol, abs_tol=abs_stop,
                                   max_evals=t_budget)
    err = t_err + plane.inner_rel * fabs
    return value, err, plane.evals


def _eval_reduced(p: AbcParams, tol: float, x_weight: bool,
                  max_evals: int = 600_000_000) -> QuadResult:
    plan = _make_plan(p, tol, x_weight)
    om_t = abs((p.c - p.a - p.b).imag)
    om_x = abs(p.a.imag) + abs(p.b.imag)

    total = 0.0 + 0.0j
    err = plan.tail_bound
    evals = 0

    # chart 1: t in [t1, t_hi], original coordinates
    if plan.t_hi > plan.t1:
        tb = _t_breaks(plan.t1, plan.t_hi, om_t + 0.5 * om_x)
        xb = _x_breaks_window(plan.x_lo, plan.x_max,
                              h0=min(1.0, math.pi / max(1.0, om_x)),
                              omega=om_x)
        rb = None
        if p.n > 1:
            rb = np.asarray([0.0] + _log_core(
                min(0.5, math.pi / max(1.0, om_x)), plan.r_max, ratio=2.2))
        probes = np.clip([plan.t1 + 0.1, 0.5, 1.5, 3.5, 7.0],
                         plan.t1, plan.t_hi)
        v, e, ne = _run_chart(_chart1_f(p, x_weight), tb, xb, rb,
                              tol, max_evals, sorted(set(probes)))
        total += v
        err += e
        evals += ne

    # chart 2: t in [t_lo, t1], rescaled coordinates (mass near t1).
    # The log factors barely oscillate here (the e^{2t} regulator is tiny
    # against the well bases), so only the pulled-out exponential counts.
    om2 = abs((p.a + p.b + p.c).imag)
    if plan.t_lo < plan.t1:
        tb = _t_breaks(plan.t_lo, plan.t1, om2)
        xib = _xi_breaks(plan.xi_delta, plan.xi_max)
        rhob = None
        if p.n > 1:
            rhob = _rho_breaks(plan.xi_delta, plan.r_max)
        probes = np.clip([plan.t1 - 0.1, plan.t1 - 1.0, plan.t1 - 3.0,
                          plan.t1 - 7.0], plan.t_lo, plan.t1)
        v, e, ne = _run_chart(_chart2_f(p, x_weight), tb, xib, rhob,
                              tol, max_evals, sorted(set(probes)))
        total += v
        err += e
        evals += ne

    return QuadResult(complex(total), float(err), max(int(evals), 1))


_CACHE: dict = {}


def _cached_reduced(p: AbcParams, tol: float, x_weight: bool) -> QuadResult:
    key = (p.a, p.b, p.c, p.n, round(math.log10(tol), 3), x_weight)
    hit = _CACHE.get(key)
    if hit is None:
        hit = _eval_reduced(p, tol, x_weight)
        if len(_CACHE) > 4096:
            _CACHE.clear()
        _CACHE[key] = hit
    return hit


def i_n(p: AbcParams, tol: float = TOLERANCES.default_quad_tol) -> QuadResult:
    """The reduced integral I_n(a, b, c) (double integral for n = 1)."""
    if not p.converges:
        raise ConvergenceError(
            f"I_{p.n}({p.a}, {p.b}, {p.c}) is outside the convergence region")
    return _cached_reduced(p, tol, False)


def i_n_prime(p: AbcParams,
              tol: float = TOLERANCES.default_quad_tol) -> QuadResult:
    """The x-weighted reduced integral I'_n(a, b, c)."""
    if not p.converges_prime:
        raise ConvergenceError(
            f"I'_{p.n}({p.a}, {p.b}, {p.c}) is outside the convergence region")
    return _cached_reduced(p, tol, True)


def t_st_numeric(st: SpectralTriple, tol: float = TOLERANCES.default_quad_tol,
                 *, reorder: bool = False) -> QuadResult:
    """The invariant triple product c_n I_n(lam+n/2, mu+n/2, nu+n/2).

    With ``reorder=True`` the parameter with the largest |Im| is moved to
    the third slot before integrating (the integral is symmetric under
    permutations); this keeps the transverse integrals non-oscillatory
    for the large-|lam| asymptotics and is validated against the direct
    path at moderate parameters.
    """
    n = st.dim.n
    lam, mu, nu = st.lam, st.mu, st.nu
    if reorder:
        lam, mu, nu = sorted((lam, mu, nu), key=lambda z: abs(z.imag))
    p = AbcParams(lam + n / 2.0, mu + n / 2.0, nu + n / 2.0, n)
    cn = c_n(n)
    res = i_n(p, tol)
    return QuadResult(cn * res.value, cn * res.abs_err, res.evals)


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

@dataclass
class IdentityReport:
    """Outcome of one identity checked at a list of parameter points."""

    identity_name: str
    points: List[dict] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    max_residual: float = 0.0
    passed: bool = False
    tol: float = 0.0


def _finish(report: IdentityReport) -> IdentityReport:
    report.max_residual = max(report.residuals) if report.residuals else 0.0
    report.passed = report.max_residual < report.tol and \
        len(report.residuals) > 0
    return report


def _rel_residual(lhs: complex, rhs: complex) -> float:
    denom = abs(lhs) + abs(rhs)
    if denom == 0:
        return 0.0
    return abs(lhs - rhs) / denom


def t_st_closed_ratio_test(st_list: Sequence[SpectralTriple], tol: float,
                           quad_tol: Optional[float] = None) -> IdentityReport:
    """Ratio constancy of t_st_numeric against the Gamma-ratio closed form.

    Reports the relative spread of R_j = numeric / closed over the list;
    on the unitary axis the fitted constant must also be real positive.
    The overall constant is least-squares fitted and reported, never
    asserted against a hardcoded value.
    """
    if not st_list:
        raise ValueError("st_list must be nonempty")
    dims = {st.dim.d for st in st_list}
    if len(dims) != 1:
        raise ValueError("all points must share d")
    qt = quad_tol if quad_tol is not None else max(tol * 1e-2, 1e-7)
    report = IdentityReport(identity_name="theorem-ratio-constancy", tol=tol)
    ratios = []
    for st in st_list:
        # the reordered path (largest |Im| parameter in the last slot)
        # keeps the transverse grids free of log-phase winding; the S3
        # symmetry it relies on is verified separately
        num = t_st_numeric(st, qt, reorder=True)
        closed = gamma_ratio(st)
        if abs(closed) < 1e-290:
            raise ZeroDivisionError("closed form too small to divide by")
        r = num.value / closed
        ratios.append(r)
        report.points.append({
            "lam": st.lam, "mu": st.mu, "nu": st.nu,
            "value": num.value, "abs_err": num.abs_err,
            "closed": closed, "ratio": r, "evals": num.evals,
        })
    mean = np.mean(ratios)
    spread = [abs(r - mean) / abs(mean) for r in ratios]
    report.residuals = [float(s) for s in spread]
    unitary = all(st.unitary_axis for st in st_list)
    const_ok = True
    if unitary:
        const_ok = abs(mean.imag) / abs(mean) < tol and mean.real > 0
    for pt, s in zip(report.points, report.residuals):
        pt["spread"] = s
    report.points.append({"fitted_constant": complex(mean),
                          "constant_real_positive": bool(const_ok)})
    _finish(report)
    report.passed = report.passed and const_ok
    return report


def _ladder_check(n: int, pt: AbcParams, qt: float):
    """Dimension-ladder residual at one (real) parameter point.

    T^{n+2}(lam,mu,nu) = d_n (lam+mu-nu+n/2-1)/((2 lam+n)(2 mu+n))
                         * T^n(lam,mu,nu+1),
    d_n = (n-1) c_{n+2}/c_n for n > 1, d_1 = c_3.
    """
    lam, mu, nu = pt.a - n / 2.0, pt.b - n / 2.0, pt.c - n / 2.0
    m = n + 2
    lhs_p = AbcParams(lam + m / 2.0, mu + m / 2.0, nu + m / 2.0, m)
    rhs_p = AbcParams(lam + n / 2.0, mu + n / 2.0, nu + 1.0 + n / 2.0, n)
    if not (lhs_p.converges and rhs_p.converges):
        return None
    dn = c_n(3) if n == 1 else (n - 1) * c_n(n + 2) / c_n(n)
    coef = dn * (lam + mu - nu + n / 2.0 - 1.0) \
        / ((2.0 * lam + n) * (2.0 * mu + n))
    lhs = c_n(m) * i_n(lhs_p, qt).value
    rhs = coef * c_n(n) * i_n(rhs_p, qt).value
    return lhs, rhs


def recursion_suite(n: int, points: Sequence[AbcParams], tol: float,
                    quad_tol: float = 1e-6) -> List[IdentityReport]:
    """Residuals of the six reduction identities plus the dimension ladder.

    Points whose shifted evaluations leave the convergence region are
    skipped and recorded, never regularized.
    """
    qt = quad_tol

    def ev(a, b, c, nn=n):
        return i_n(AbcParams(a, b, c, nn), qt).value

    def evp(a, b, c, nn=n):
        return i_n_prime(AbcParams(a, b, c, nn), qt).value

    def ok(a, b, c, nn=n):
        return AbcParams(a, b, c, nn).converges

    def okp(a, b, c, nn=n):
        return AbcParams(a, b, c, nn).converges_prime

    identities = []

    def run(name, needed, lhs_fn, rhs_fn):
        rep = IdentityReport(identity_name=name, tol=tol)
        for p in points:
            a, b, c = p.a, p.b, p.c
            if not needed(a, b, c):
                rep.points.append({"a": a, "b": b, "c": c,
                                   "skipped": "divergent shift"})
                continue
            lhs, rhs = lhs_fn(a, b, c), rhs_fn(a, b, c)
            res = _rel_residual(lhs, rhs)
            rep.points.append({"a": a, "b": b, "c": c, "lhs": lhs,
                               "rhs": rhs, "residual": res})
            rep.residuals.append(res)
        identities.append(_finish(rep))

    if n > 1:
        # (1) I_n(a,b,c) = 2a/(n-1) I_{n+2}(a+1,b,c+1)
        #                + 2b/(n-1) I_{n+2}(a,b+1,c+1)
        run("eq1-raise-n",
            lambda a, b, c: ok(a, b, c) and ok(a + 1, b, c + 1, n + 2)
            and ok(a, b + 1, c + 1, n + 2),
            lambda a, b, c: ev(a, b, c),
            lambda a, b, c: 2 * a / (n - 1) * ev(a + 1, b, c + 1, n + 2)
            + 2 * b / (n - 1) * ev(a, b + 1, c + 1, n + 2))
    # (2) I_1(a,b,c) = 2a I_3(a+1,b,c+1) + 2b I_3(a,b+1,c+1)
    run("eq2-raise-n1",
        lambda a, b, c: ok(a, b, c, 1) and ok(a + 1, b, c + 1, 3)
        and ok(a, b + 1, c + 1, 3),
        lambda a, b, c: ev(a, b, c, 1),
        lambda a, b, c: 2 * a * ev(a + 1, b, c + 1, 3)
        + 2 * b * ev(a, b + 1, c + 1, 3))
    # (3) I'_n(a,b,c) = -I'_n(b,a,c) - I_n(b,a,c-1)
    run("eq3-x-reflection",
        lambda a, b, c: okp(a, b, c) and okp(b, a, c) and ok(b, a, c - 1),
        lambda a, b, c: evp(a, b, c),
        lambda a, b, c: -evp(b, a, c) - ev(b, a, c - 1))
    # (4) I'_n(x,y,z) = (z-x-y+1)/(2y-2) I_n(y-1,x,z)
    run("eq4-prime-reduction",
        lambda a, b, c: okp(a, b, c) and abs(b - 1) > 1e-9
        and ok(b - 1, a, c),
        lambda a, b, c: evp(a, b, c),
        lambda a, b, c: (c - a - b + 1) / (2 * b - 2) * ev(b - 1, a, c))
    if n > 1:
        # (5) I_{n+2}(a+1,b+1,c+1) = (a+b-c-1)/(4ab) (n-1) I_n(a,b,c+1)
        run("eq5-lower-n",
            lambda a, b, c: ok(a + 1, b + 1, c + 1, n + 2)
            and ok(a, b, c + 1),
            lambda a, b, c: ev(a + 1, b + 1, c + 1, n + 2),
            lambda a, b, c: (a + b - c - 1) / (4 * a * b) * (n - 1)
            * ev(a, b, c + 1))
    # (6) I_3(a+1,b+1,c+1) = (a+b-c-1)/(4ab) I_1(a,b,c+1)
    run("eq6-lower-n1",
        lambda a, b, c: ok(a + 1, b + 1, c + 1, 3) and ok(a, b, c + 1, 1),
        lambda a, b, c: ev(a + 1, b + 1, c + 1, 3),
        lambda a, b, c: (a + b - c - 1) / (4 * a * b) * ev(a, b, c + 1, 1))

    # dimension ladder through the triple product normalization
    rep = IdentityReport(identity_name="ladder-t-st", tol=tol)
    for p in points:
        out = _ladder_check(n, p, qt)
        if out is None:
            rep.points.append({"a": p.a, "b": p.b, "c": p.c,
                               "skipped": "divergent shift"})
            continue
        lhs, rhs = out
        res = _rel_residual(lhs, rhs)
        rep.points.append({"a": p.a, "b": p.b, "c": p.c, "lhs": lhs,
                           "rhs": rhs, "residual": res})
        rep.residuals.append(res)
    identities.append(_finish(rep))
    return identities


def asymptotic_slope_test(d: int, mu: complex, nu: complex,
                          t_values: Sequence[float], tol: float,
                          quad_tol: float = 1e-7) -> IdentityReport:
    """Decay-asymptotics suite at lam = i t for increasing t.

    E(t) = log |T(it, mu, nu)| + (pi/2) t - (d/2 - 2) log t must flatten
    like O(1/t): successive differences shrink by at least 0.7 per
    doubling, judged within quadrature error bars.  Points whose value is
    smaller than its error estimate (round-off limited oscillatory
    cancellation) are reported as inconclusive rather than failed.

    The Stirling-evaluated closed form provides the cross-check: applying
    the |Gamma| envelope to every factor of the Gamma ratio must give an
    E(t) that is constant (for d = 3, exactly) after the fit.
    """
    if len(t_values) < 3:
        raise ValueError("need at least 3 t values")
    if any(t2 <= t1 for t1, t2 in zip(t_values, t_values[1:])):
        raise ValueError("t_values must be increasing")
    dim = Dimension(d)
    slope = 0.5 * d - 2.0
    report = IdentityReport(identity_name="asymptotic-slope", tol=tol)

    es, sigmas = [], []
    for t in t_values:
        st = SpectralTriple(1j * t, mu, nu, dim)
        entry = {"t": t}
        try:
            q = t_st_numeric(st, quad_tol, reorder=True)
            entry["value"] = q.value
            entry["abs_err"] = q.abs_err
            entry["evals"] = q.evals
            if q.abs_err < 0.5 * abs(q.value):
                e = math.log(abs(q.value)) + 0.5 * math.pi * t \
                    - slope * math.log(t)
                sig = q.abs_err / abs(q.value)
                entry["E"] = e
                entry["sigma_E"] = sig
                es.append(e)
                sigmas.append(sig)
            else:
                entry["inconclusive"] = "error-limited (oscillatory cancellation)"
                es.append(None)
                sigmas.append(None)
        except QuadratureError as exc:
            entry["quadrature_failure"] = str(exc)
            es.append(None)
            sigmas.append(None)
        # closed-form E at the same t, for the report
        entry["E_closed"] = gamma_ratio_log(
            SpectralTriple(1j * t, mu, nu, dim)).real \
            + 0.5 * math.pi * t - slope * math.log(t)
        report.points.append(entry)

    # step-decrease rule, within error bars; inconclusive endpoints skip
    steps_ok = True
    for j in range(2, len(t_values)):
        trio = es[j - 2:j + 1]
        if any(v is None for v in trio):
            report.points.append({"step": j, "inconclusive": True})
            continue
        d1 = abs(trio[1] - trio[0])
        d2 = abs(trio[2] - trio[1])
        bars = 3.0 * (sigmas[j - 2] + 2 * sigmas[j - 1] + sigmas[j])
        violation = max(0.0, d2 - 0.7 * d1 - bars)
        ok = violation == 0.0 or t_values[j - 1] < 10.0
        steps_ok = steps_ok and ok
        report.points.append({"step": j, "d_prev": d1, "d_next": d2,
                              "bars": bars, "ok": ok})
        report.residuals.append(violation if t_values[j - 1] >= 10 else 0.0)

    # Stirling consistency of the closed form with the decay envelope
    st_es = []
    for t in t_values:
        st = SpectralTriple(1j * t, mu, nu, dim)
        num, den = gamma_ratio_arguments(st)
        log_abs = sum(stirling_abs_log(z.real, z.imag) for z in num) \
            - sum(stirling_abs_log(z.real, z.imag) for z in den)
        st_es.append(log_abs + 0.5 * math.pi * t - slope * math.log(t))
    st_mean = float(np.mean(st_es))
    stirling_res = max(abs(e - st_mean) for e in st_es)
    report.points.append({"stirling_fit_constant": st_mean,
                          "stirling_residual": stirling_res})
    report.residuals.append(stirling_res / max(1.0, abs(st_mean)))

    _finish(report)
    report.passed = report.passed and steps_ok and stirling_res < 1e-6
    return report


def lemma12_check(d: int, y: GroupElement, f: Callable, N: int,
                  seed) -> IdentityReport:
    """Monte Carlo check of the K-integral change of variables:

        int f(k) dk = int a(k y)^{2 rho} f(k^y) dk

    and the equivalent second form with y -> y^{-1}.  Both sides share
    one Haar sample stream; the test statistic is the per-sample
    difference, passing when |mean| <= 3 standard errors.
    """
    dim = y.dim
    if dim.d != d:
        raise ValueError("dimension mismatch")
    rng = np.random.default_rng(seed)
    ks = haar_rotations(d, N, rng)
    two_rho = 2.0 * dim.rho

    def f_vals(mats):
        try:
            vals = np.asarray(f(mats))
            if vals.shape != (mats.shape[0],):
                raise ValueError
            return vals
        except Exception:
            return np.asarray([f(mats[i]) for i in range(mats.shape[0])])

    def embed(mats):
        n = mats.shape[0]
        out = np.broadcast_to(np.eye(d + 1), (n, d + 1, d + 1)).copy()
        out[:, :d, :d] = mats
        return out

    report = IdentityReport(identity_name="k-integral-identity", tol=1.0)

    for label, target in (("forward", y), ("inverse", y.inv())):
        ky = np.einsum("nij,jk->nik", embed(ks), target.m)
        ts = iwasawa_t_batch(ky, d)
        jac = np.exp(two_rho * ts)
        k_moved = k_factor_batch(ky, d)
        if label == "forward":
            diff = f_vals(ks) - jac * f_vals(k_moved)
        else:
            # int f(k^y) dk = int a(k y^{-1})^{2 rho} f(k) dk
            ky_fwd = np.einsum("nij,jk->nik", embed(ks), y.m)
            moved_fwd = k_factor_batch(ky_fwd, d)
            diff = f_vals(moved_fwd) - jac * f_vals(ks)
        mean = float(diff.mean())
        se = float(diff.std(ddof=1) / math.sqrt(N))
        resid = abs(mean) / (3.0 * se) if se > 0 else 0.0
        report.points.append({"form": label, "mean_diff": mean,
                              "stderr": se, "residual": resid, "N": N})
        report.residuals.append(resid)
    return _finish(report)
