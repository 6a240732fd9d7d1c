"""Explicit matrix model of G = SO(d,1)^0.

Elements are (d+1) x (d+1) real matrices preserving the quadratic form
J = diag(1, ..., 1, -1), with positive corner entry to stay on the
identity component.  Coordinates are split as: indices 0..d-2 carry the
rotation subgroup M = SO(d-1), index d-1 is the boost partner, index d is
the timelike direction.

The subgroups of the ANK decomposition are realized concretely:

* A: identity on the first d-1 coordinates, hyperbolic rotation
  [[cosh t, sinh t], [sinh t, cosh t]] on the last two,
* N: abelian, parametrized by x in R^{d-1} (see :func:`make_n`),
* K: SO(d) block-embedded in the first d coordinates.

The Iwasawa factorization g = a n k is solved in closed form from the
last column of g, which K-multiplication on the right cannot touch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .config import TOLERANCES
from .quadrature import haar_rotations

__all__ = [
    "Dimension",
    "GroupElement",
    "IwasawaFactors",
    "j_metric",
    "identity",
    "make_a",
    "make_n",
    "weyl_w0",
    "embed_k",
    "iwasawa",
    "reassemble",
    "a_power",
    "k_action",
    "class_one",
    "random_element",
]


@dataclass(frozen=True)
class Dimension:
    """Rank-one dimension data: d >= 2, n = d-1, rho = n/2."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")

    @property
    def n(self) -> int:
        return self.d - 1

    @property
    def rho(self) -> float:
        return 0.5 * (self.d - 1)


def j_metric(dim: Dimension) -> np.ndarray:
    """The invariant form J = diag(1, ..., 1, -1) of size d+1."""
    j = np.eye(dim.d + 1)
    j[dim.d, dim.d] = -1.0
    return j


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A matrix in SO(d,1)^0 together with its dimension tag.

    Construction validates g^T J g = J, det g = 1 and a positive corner
    entry against the global tolerance record.
    """

    dim: Dimension
    m: np.ndarray

    def __post_init__(self):
        d = self.dim.d
        m = np.asarray(self.m, dtype=float)
        if m.shape != (d + 1, d + 1):
            raise ValueError(f"expected shape {(d + 1, d + 1)}, got {m.shape}")
        j = j_metric(self.dim)
        resid = np.abs(m.T @ j @ m - j).max()
        if resid > TOLERANCES.metric * _scale(m):
            raise ValueError(f"g^T J g != J (residual {resid:.3e})")
        det = np.linalg.det(m)
        if abs(det - 1.0) > TOLERANCES.det * _scale(m):
            raise ValueError(f"det g = {det}, not 1")
        if m[d, d] <= 0:
            raise ValueError("corner entry <= 0: not on the identity component")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if self.dim.d != other.dim.d:
            raise ValueError("dimension mismatch")
        return GroupElement(self.dim, self.m @ other.m)

    def inv(self) -> "GroupElement":
        j = j_metric(self.dim)
        return GroupElement(self.dim, j @ self.m.T @ j)


def _scale(m) -> float:
    s = float(np.abs(m).max())
    return max(s * s, 1.0)


@dataclass(frozen=True)
class IwasawaFactors:
    """The (t, x, k) data of the factorization g = a(t) n(x) k."""

    t: float
    x: np.ndarray
    k: np.ndarray


def identity(dim: Dimension) -> GroupElement:
    return GroupElement(dim, np.eye(dim.d + 1))


def make_a(t: float, dim: Dimension) -> GroupElement:
    """exp(tH): hyperbolic rotation by t in the last two coordinates."""
    d = dim.d
    m = np.eye(d + 1)
    ch, sh = np.cosh(t), np.sinh(t)
    m[d - 1, d - 1] = ch
    m[d - 1, d] = sh
    m[d, d - 1] = sh
    m[d, d] = ch
    return GroupElement(dim, m)


def make_n(x, dim: Dimension) -> GroupElement:
    """The unipotent element n(x), x in R^{d-1}.

    N is abelian in this model: n(x) n(y) = n(x + y).
    """
    d = dim.d
    x = np.asarray(x, dtype=float).ravel()
    if x.size != d - 1:
        raise ValueError(f"x must have length {d - 1}, got {x.size}")
    q = 0.5 * float(x @ x)
    m = np.eye(d + 1)
    m[: d - 1, d - 1] = -x
    m[: d - 1, d] = x
    m[d - 1, : d - 1] = x
    m[d, : d - 1] = x
    m[d - 1, d - 1] = 1.0 - q
    m[d - 1, d] = q
    m[d, d - 1] = -q
    m[d, d] = 1.0 + q
    return GroupElement(dim, m)


def weyl_w0(dim: Dimension) -> GroupElement:
    """Weyl representative: diag(1, ..., 1, -1, -1, 1), w0^2 = 1."""
    d = dim.d
    m = np.eye(d + 1)
    m[d - 2, d - 2] = -1.0
    m[d - 1, d - 1] = -1.0
    return GroupElement(dim, m)


def embed_k(R, dim: Dimension) -> GroupElement:
    """Block-embed a rotation R in SO(d) as an element of G."""
    d = dim.d
    R = np.asarray(R, dtype=float)
    if R.shape != (d, d):
        raise ValueError(f"R must be {d}x{d}")
    if np.abs(R.T @ R - np.eye(d)).max() > TOLERANCES.orthogonality * 10:
        raise ValueError("R is not orthogonal")
    if np.linalg.det(R) < 0:
        raise ValueError("R has det -1")
    m = np.eye(d + 1)
    m[:d, :d] = R
    return GroupElement(dim, m)


def _iwasawa_t_x(m: np.ndarray, d: int) -> Tuple[float, np.ndarray]:
    """t and x of g = a n k from the last column of g.

    The last column survives right K-multiplication, so it equals the last
    column of a(t) n(x), whence x is read off directly and
    e^t = (corner + b_{d}) / (1 + |x|^2), identically equal to
    1 / (corner - b_{d}) by the relation corner^2 - b^T b = 1.
    """
    b = m[:, d]
    x = b[: d - 1].copy()
    et = (b[d] + b[d - 1]) / (1.0 + x @ x)
    if et <= 0:
        raise ValueError("non-positive A-coordinate: input not in SO(d,1)^0")
    return float(np.log(et)), x


def iwasawa(g: GroupElement) -> IwasawaFactors:
    """Factor g = make_a(t) . make_n(x) . embed_k(k)."""
    d = g.dim.d
    t, x = _iwasawa_t_x(g.m, d)
    an_inv = make_n(-x, g.dim).m @ make_a(-t, g.dim).m
    full = an_inv @ g.m
    k = full[:d, :d]
    resid = np.abs(k.T @ k - np.eye(d)).max()
    if resid > TOLERANCES.orthogonality * _scale(g.m) * 10:
        raise ValueError(f"K factor not orthogonal (residual {resid:.3e})")
    k = k.copy()
    k.setflags(write=False)
    x.setflags(write=False)
    return IwasawaFactors(t, x, k)


def reassemble(f: IwasawaFactors, dim: Dimension) -> GroupElement:
    """Inverse of :func:`iwasawa`."""
    return make_a(f.t, dim) @ make_n(f.x, dim) @ embed_k(f.k, dim)


def a_power(g: GroupElement, s: complex) -> complex:
    """exp(s * t(g)) where t(g) is the Iwasawa A-coordinate.

    For s = rho this is the entry formula
    a(g)^rho = ((corner + b_d) / (1 + b_1^2 + ... + b_{d-1}^2))^{(d-1)/2}.
    """
    t, _ = _iwasawa_t_x(g.m, g.dim.d)
    return complex(np.exp(complex(s) * t))


def k_action(k: np.ndarray, y: GroupElement) -> np.ndarray:
    """The right action k^y: the K-factor of embed_k(k) . y."""
    g = embed_k(k, y.dim) @ y
    return iwasawa(g).k


def class_one(g: GroupElement, lam: complex, dim: Dimension) -> complex:
    """Class-one vector e_lam evaluated at g: a(g)^{lam + rho}."""
    return a_power(g, complex(lam) + dim.rho)


def random_element(dim: Dimension, rng: np.random.Generator) -> GroupElement:
    """A well-conditioned pseudo-random element a(t) n(x) k.

    t ~ U(-2, 2), x standard Gaussian, k Haar on SO(d); sampling through
    the factorization avoids the conditioning problems of raw matrix
    sampling.
    """
    t = rng.uniform(-2.0, 2.0)
    x = rng.standard_normal(dim.d - 1)
    k = haar_rotations(dim.d, 1, rng)[0]
    return make_a(t, dim) @ make_n(x, dim) @ embed_k(k, dim)


# ---------------------------------------------------------------------------
# Batched helpers (used by the Monte Carlo identity checks)
# ---------------------------------------------------------------------------

def iwasawa_t_batch(ms: np.ndarray, d: int) -> np.ndarray:
    """A-coordinates t for a batch of group matrices, shape (n,)."""
    b = ms[:, :, d]
    x2 = (b[:, : d - 1] ** 2).sum(axis=1)
    et = (b[:, d] + b[:, d - 1]) / (1.0 + x2)
    return np.log(et)


def k_factor_batch(ms: np.ndarray, d: int) -> np.ndarray:
    """K-blocks of a batch of group matrices, shape (n, d, d)."""
    n = ms.shape[0]
    b = ms[:, :, d]
    x = b[:, : d - 1]
    x2 = (x ** 2).sum(axis=1)
    et = (b[:, d] + b[:, d - 1]) / (1.0 + x2)
    t = np.log(et)

    n_inv = np.broadcast_to(np.eye(d + 1), (n, d + 1, d + 1)).copy()
    n_inv[:, : d - 1, d - 1] = x
    n_inv[:, : d - 1, d] = -x
    n_inv[:, d - 1, : d - 1] = -x
    n_inv[:, d, : d - 1] = -x
    q = 0.5 * x2
    n_inv[:, d - 1, d - 1] = 1.0 - q
    n_inv[:, d - 1, d] = q
    n_inv[:, d, d - 1] = -q
    n_inv[:, d, d] = 1.0 + q

    a_inv = np.broadcast_to(np.eye(d + 1), (n, d + 1, d + 1)).copy()
    ch, sh = np.cosh(t), np.sinh(t)
    a_inv[:, d - 1, d - 1] = ch
    a_inv[:, d - 1, d] = -sh
    a_inv[:, d, d - 1] = -sh
    a_inv[:, d, d] = ch

    full = np.einsum("nij,njk,nkl->nil", n_inv, a_inv, ms)
    return full[:, :d, :d]
