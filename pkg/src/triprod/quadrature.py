"""Adaptive Gauss-Kronrod quadrature for complex integrands, iterated 3D
integration over a truncated box, and Haar Monte Carlo on SO(d).

All integrators accept *vectorized* integrands: ``f`` is called with numpy
arrays of abscissae and must return an array of the same shape (real or
complex).  Every result is a :class:`QuadResult` carrying the value, an
honest absolute error estimate and the number of integrand evaluations.

The error estimate has two parts: the usual Kronrod-minus-Gauss panel
differences, plus a floating-point cancellation floor proportional to the
integral of |f|.  The floor is what keeps the estimate honest for strongly
oscillatory integrands whose value sits many orders of magnitude below the
integrand scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "QuadResult",
    "TruncationSpec",
    "QuadratureError",
    "integrate_1d",
    "integrate_2d",
    "integrate_triple",
    "haar_sample_k",
    "mc_integrate_k",
]

# 15-point Kronrod rule with embedded 7-point Gauss rule (nodes on [-1, 1]).
_XK_HALF = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WK_HALF = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG_HALF = np.array([0.129484966168870, 0.279705391489277,
                     0.381830050505119, 0.417959183673469])

_XK = np.concatenate([-_XK_HALF[:7], _XK_HALF[::-1]])          # 15 ascending
_WK = np.concatenate([_WK_HALF[:7], _WK_HALF[::-1]])
_WG = np.zeros(15)
_WG[1:14:2] = np.concatenate([_WG_HALF[:3], _WG_HALF[::-1]])   # Gauss nodes sit
                                                               # at odd positions

_EPS = np.finfo(float).eps
_ROUNDOFF_C = 50.0   # multiplier on eps * integral(|f|) in the noise floor


@dataclass(frozen=True)
class QuadResult:
    """Value, absolute-error estimate and evaluation count of a quadrature."""

    value: complex
    abs_err: float
    evals: int

    def __post_init__(self):
        if not (self.abs_err >= 0.0):
            raise ValueError("abs_err must be >= 0")
        if self.evals <= 0:
            raise ValueError("evals must be positive")


@dataclass(frozen=True)
class TruncationSpec:
    """Finite box replacing the infinite integration domain.

    ``tail_bound`` is an upper estimate of the absolute mass omitted by
    truncating to ``[-t_max, t_max] x [-x_max, x_max] x (0, r_max]``; it is
    added verbatim to the error estimate of :func:`integrate_triple`.
    """

    t_max: float
    x_max: float
    r_max: float
    tail_bound: float

    def __post_init__(self):
        if min(self.t_max, self.x_max, self.r_max) <= 0:
            raise ValueError("box extents must be positive")
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be >= 0")


class QuadratureError(RuntimeError):
    """Raised when the subdivision budget is exhausted before convergence.

    The best estimate obtained so far is attached as ``.best``.
    """

    def __init__(self, message: str, best: QuadResult):
        super().__init__(message)
        self.best = best


def _adapt(f, breaks, rel_tol, abs_tol=0.0, max_evals=2_000_000,
           max_rounds=60, split_cap=256):
    """Adaptive bisection on an initial panel list.

    Returns (value, err, evals, fabs) where ``fabs`` integrates |f| (used
    for the round-off floor) and ``err`` already includes that floor.
    """
    lo = np.asarray(breaks[:-1], dtype=float)
    hi = np.asarray(breaks[1:], dtype=float)
    span = abs(hi[-1] - lo[0])

    vals = np.empty(0, dtype=complex)
    panel_val = np.empty(0, dtype=complex)
    panel_err = np.empty(0)
    panel_abs = np.empty(0)
    pend_lo, pend_hi = lo, hi
    cur_lo = np.empty(0)
    cur_hi = np.empty(0)
    evals = 0

    for _ in range(max_rounds):
        if pend_lo.size:
            mid = 0.5 * (pend_lo + pend_hi)
            h2 = 0.5 * (pend_hi - pend_lo)
            nodes = mid[:, None] + h2[:, None] * _XK[None, :]
            wk = h2[:, None] * _WK[None, :]
            wg = h2[:, None] * _WG[None, :]
            fv = np.asarray(f(nodes.ravel())).reshape(nodes.shape)
            evals += nodes.size
            k15 = (fv * wk).sum(axis=1)
            g7 = (fv * wg).sum(axis=1)
            fabs_new = (np.abs(fv) * wk).sum(axis=1)
            err_new = np.abs(k15 - g7)
            # per-panel round-off floor: refining below this is meaningless
            err_new = np.maximum(err_new, 10.0 * _EPS * fabs_new)
            cur_lo = np.concatenate([cur_lo, pend_lo])
            cur_hi = np.concatenate([cur_hi, pend_hi])
            panel_val = np.concatenate([panel_val, k15])
            panel_err = np.concatenate([panel_err, err_new])
            panel_abs = np.concatenate([panel_abs, fabs_new])
            pend_lo = pend_hi = np.empty(0)

        total = panel_val.sum()
        fabs = panel_abs.sum()
        floor = _ROUNDOFF_C * _EPS * fabs
        err_sum = panel_err.sum()
        target = max(rel_tol * abs(total), abs_tol, floor)
        if err_sum <= target or evals >= max_evals:
            return total, err_sum + floor, evals, fabs

        # split every panel holding more than its equidistributed share,
        # largest offenders first, unless it is already at round-off width
        share = target / max(len(panel_err), 1)
        splittable = (panel_err > share) & \
                     ((cur_hi - cur_lo) > 1e-13 * span) & \
                     (panel_err > 20.0 * _EPS * panel_abs)
        idx = np.nonzero(splittable)[0]
        if idx.size == 0:
            return total, err_sum + floor, evals, fabs
        idx = idx[np.argsort(panel_err[idx])[::-1][:split_cap]]
        mid = 0.5 * (cur_lo[idx] + cur_hi[idx])
        pend_lo = np.concatenate([cur_lo[idx], mid])
        pend_hi = np.concatenate([mid, cur_hi[idx]])
        keep = np.ones(len(panel_err), dtype=bool)
        keep[idx] = False
        cur_lo, cur_hi = cur_lo[keep], cur_hi[keep]
        panel_val, panel_err = panel_val[keep], panel_err[keep]
        panel_abs = panel_abs[keep]

    total = panel_val.sum()
    fabs = panel_abs.sum()
    floor = _ROUNDOFF_C * _EPS * fabs
    return total, panel_err.sum() + floor, evals, fabs


def integrate_1d(f: Callable, lo: float, hi: float, tol: float, *,
                 breaks: Optional[Sequence[float]] = None,
                 max_evals: int = 2_000_000) -> QuadResult:
    """Adaptive complex quadrature of ``f`` over ``[lo, hi]``.

    ``tol`` is a relative target; the returned ``abs_err`` is the panel
    error sum plus a cancellation floor and may exceed ``tol * |value|``
    when the value is round-off limited.  A :class:`QuadratureError` (with
    the best estimate attached) is raised only if the subdivision budget
    runs out while reducible error remains.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if breaks is None:
        bk = np.linspace(lo, hi, 3)
    else:
        bk = np.asarray(sorted(set([lo, hi] + list(breaks))), dtype=float)
        bk = bk[(bk >= min(lo, hi)) & (bk <= max(lo, hi))]
    value, err, evals, fabs = _adapt(f, bk, tol, max_evals=max_evals)
    floor = _ROUNDOFF_C * _EPS * fabs
    if err > max(tol * abs(value), 2.0 * floor) and evals >= max_evals:
        raise QuadratureError(
            f"no convergence within {max_evals} evaluations "
            f"(err {err:.3e} vs target {tol * abs(value):.3e})",
            QuadResult(value, err, max(evals, 1)),
        )
    return QuadResult(value, err, max(evals, 1))


def _axis_grid(breaks):
    """Concatenated nodes plus K15/G7 weight vectors for one frozen axis."""
    breaks = np.asarray(breaks, dtype=float)
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    h2 = 0.5 * (breaks[1:] - breaks[:-1])
    nodes = (mid[:, None] + h2[:, None] * _XK[None, :]).ravel()
    w15 = (h2[:, None] * _WK[None, :]).ravel()
    w7 = (h2[:, None] * _WG[None, :]).ravel()
    return nodes, w15, w7


def _split_worst(breaks, err_per_panel, frac=0.3):
    """Halve the worst panels of a frozen axis (error-mass driven)."""
    order = np.argsort(err_per_panel)[::-1]
    n_split = max(1, int(frac * len(err_per_panel)))
    chosen = set(order[:n_split].tolist())
    out = []
    for i in range(len(breaks) - 1):
        out.append(breaks[i])
        if i in chosen:
            out.append(0.5 * (breaks[i] + breaks[i + 1]))
    out.append(breaks[-1])
    return np.asarray(out)


class _InnerPlane:
    """Frozen (x, r) tensor-product rule evaluated for batches of t.

    The contraction order is: innermost r, then x; the t axis stays free
    and is driven by the adaptive outer rule.
    """

    def __init__(self, f, x_breaks, r_breaks=None, chunk=4_000_000):
        self.f = f
        self.x_breaks = np.asarray(x_breaks, dtype=float)
        self.r_breaks = None if r_breaks is None else np.asarray(r_breaks, float)
        self.chunk = chunk
        self.evals = 0
        self.inner_rel = 0.0
        self._rebuild()

    def _rebuild(self):
        self.xn, self.xw15, self.xw7 = _axis_grid(self.x_breaks)
        if self.r_breaks is not None:
            self.rn, self.rw15, self.rw7 = _axis_grid(self.r_breaks)

    def _eval_tensor(self, ts):
        """Return (G(ts), inner error estimate per t)."""
        ts = np.asarray(ts, dtype=float)
        nx = self.xn.size
        if self.r_breaks is None:
            fv = self.f(ts[:, None], self.xn[None, :])
            self.evals += fv.size
            g = fv @ self.xw15
            err = np.abs(fv @ self.xw15 - fv @ self.xw7)
            return g, err
        nr = self.rn.size
        rows_per_chunk = max(1, self.chunk // max(nx * nr, 1))
        gs, errs = [], []
        for i0 in range(0, ts.size, rows_per_chunk):
            sub = ts[i0:i0 + rows_per_chunk]
            fv = self.f(sub[:, None, None], self.xn[None, :, None],
                        self.rn[None, None, :])
            self.evals += fv.size
            ir15 = fv @ self.rw15            # (T, X)
            ir7 = fv @ self.rw7
            err_r = np.abs(ir15 - ir7) @ np.abs(self.xw15)
            g15 = ir15 @ self.xw15
            g7 = ir15 @ self.xw7
            gs.append(g15)
            errs.append(np.abs(g15 - g7) + err_r)
        return np.concatenate(gs), np.concatenate(errs)

    def refine(self, t_probes, inner_tol, rounds=4):
        """Split worst x (and r) panels until probe errors meet inner_tol."""
        for _ in range(rounds):
            g, err = self._eval_tensor(np.asarray(t_probes))
            scale = np.abs(g).max() + 1e-300
            rel = float((err / (np.abs(g) + scale * 1e-3)).max())
            self.inner_rel = rel
            if rel <= inner_tol:
                return
            # attribute probe error to panels along each axis
            self._refine_axes(t_probes)
        g, err = self._eval_tensor(np.asarray(t_probes))
        scale = np.abs(g).max() + 1e-300
        self.inner_rel = float((err / (np.abs(g) + scale * 1e-3)).max())

    def _refine_axes(self, t_probes):
        ts = np.asarray(t_probes)
        if self.r_breaks is None:
            fv = self.f(ts[:, None], self.xn[None, :])
            self.evals += fv.size
            per_node = np.abs(fv * (self.xw15 - self.xw7)[None, :]).sum(axis=0)
            per_panel = per_node.reshape(-1, 15).sum(axis=1)
            self.x_breaks = _split_worst(self.x_breaks, per_panel)
        else:
            fv = self.f(ts[:, None, None], self.xn[None, :, None],
                        self.rn[None, None, :])
            self.evals += fv.size
            dx = np.abs((fv @ self.rw15) * (self.xw15 - self.xw7)[None, :])
            per_x = dx.sum(axis=0).reshape(-1, 15).sum(axis=1)
            per_r_node = np.abs(fv * (self.rw15 - self.rw7)[None, None, :])
            per_r = (per_r_node.sum(axis=(0, 1))).reshape(-1, 15).sum(axis=1)
            self.x_breaks = _split_worst(self.x_breaks, per_x)
            self.r_breaks = _split_worst(self.r_breaks, per_r)
        self._rebuild()


def _default_breaks(extent, n_core=8, lo=None):
    """Symmetric graded panel layout on [lo, extent] (lo defaults -extent)."""
    if lo is None:
        lo = -extent
    core = min(extent, 4.0)
    pts = list(np.linspace(-core if lo < 0 else max(lo, 0.0), core, n_core + 1))
    x = core
    while x < extent:
        x = min(1.6 * x, extent)
        pts.append(x)
        if lo < 0:
            pts.insert(0, -x)
    if lo < 0:
        pts[0] = lo
    pts[-1] = extent
    return np.asarray(sorted(set(pts)))


def integrate_2d(f: Callable, t_max: float, x_max: float, tol: float, *,
                 t_breaks=None, x_breaks=None, tail_bound: float = 0.0,
                 max_evals: int = 100_000_000) -> QuadResult:
    """Iterated adaptive quadrature of f(t, x) over the truncated plane."""
    return _iterated(f, tol, tail_bound, max_evals,
                     t_breaks if t_breaks is not None
                     else _default_breaks(t_max),
                     x_breaks if x_breaks is not None
                     else _default_breaks(x_max),
                     None)


def integrate_triple(f: Callable, trunc: TruncationSpec, tol: float, *,
                     t_breaks=None, x_breaks=None, r_breaks=None,
                     max_evals: int = 400_000_000) -> QuadResult:
    """Iterated adaptive quadrature of f(t, x, r): innermost r, then x,
    then t, on the truncated box described by ``trunc``.

    ``f`` must broadcast over (t[:, None, None], x[None, :, None],
    r[None, None, :]).  ``trunc.tail_bound`` is added to the error.
    """
    return _iterated(
        f, tol, trunc.tail_bound, max_evals,
        t_breaks if t_breaks is not None else _default_breaks(trunc.t_max),
        x_breaks if x_breaks is not None else _default_breaks(trunc.x_max),
        r_breaks if r_breaks is not None
        else _default_breaks(trunc.r_max, lo=0.0),
    )


def _iterated(f, tol, tail_bound, max_evals, t_breaks, x_breaks, r_breaks):
    plane = _InnerPlane(f, x_breaks, r_breaks)
    # probe ts: spread over the panel layout, weighted toward the center
    tb = np.asarray(t_breaks, dtype=float)
    probes = np.quantile(tb, [0.15, 0.35, 0.5, 0.65, 0.85])
    probes = np.concatenate([probes, [tb[len(tb) // 2]]])
    plane.refine(probes, inner_tol=max(tol * 0.2, 1e-12))

    def g_batch(ts):
        g, _ = plane._eval_tensor(ts)
        return g

    value, t_err, _, fabs = _adapt(g_batch, tb, tol,
                                   max_evals=max(1, max_evals // 15))
    inner_err = plane.inner_rel * fabs
    floor = _ROUNDOFF_C * _EPS * fabs
    err = t_err + inner_err + tail_bound + floor
    evals = max(plane.evals, 1)
    if evals >= max_evals and err > max(tol * abs(value), 4.0 * floor):
        raise QuadratureError(
            f"iterated quadrature exhausted {max_evals} evaluations",
            QuadResult(value, err, evals),
        )
    return QuadResult(value, err, evals)


# ---------------------------------------------------------------------------
# Haar measure on SO(d)
# ---------------------------------------------------------------------------

def haar_rotations(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n Haar-distributed SO(d) matrices, shape (n, d, d).

    QR of a Gaussian matrix with the R-diagonal sign correction gives Haar
    on O(d); conditioning on det = +1 by flipping one column lands on SO(d).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    a = rng.standard_normal((n, d, d))
    q, r = np.linalg.qr(a)
    diag = np.einsum("nii->ni", r)
    s = np.where(diag >= 0, 1.0, -1.0)
    q = q * s[:, None, :]
    neg = np.linalg.det(q) < 0
    q[neg, :, 0] *= -1.0
    return q


def haar_sample_k(d: int, seed) -> np.ndarray:
    """One Haar-distributed rotation in SO(d)."""
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    return haar_rotations(d, 1, rng)[0]


def mc_integrate_k(f: Callable, d: int, N: int, seed) -> QuadResult:
    """Monte Carlo mean of ``f`` over SO(d) with Haar probability measure.

    ``f`` may either act on a single (d, d) matrix or accept the whole
    (N, d, d) sample batch; the batched form is tried first.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    ks = haar_rotations(d, N, rng)
    try:
        vals = np.asarray(f(ks))
        if vals.shape != (N,):
            raise ValueError
    except Exception:
        vals = np.asarray([f(ks[i]) for i in range(N)])
    value = vals.mean()
    abs_err = float(vals.std(ddof=1) / np.sqrt(N))
    return QuadResult(complex(value), abs_err, N)
