"""Base metrics, Zermelo navigation data and the induced Randers gauge.

Every metric handled here is diagonal in Cartesian coordinates with
coefficients depending only on the last coordinate ``z = x[..., -1]``::

    g = A(z) (dx_1^2 + ... + dx_n^2) + B(z) dz^2

which covers the Euclidean metric, the Poincare half-space metric and the
Riemannian part of the Randers metrics generated by a vertical constant wind.

All functions broadcast over leading axes: points have shape ``(..., d)`` and
vectors ``(..., d)`` with ``d = n + 1``.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceError, DomainError, ZeroVectorError

# points with 1 - |v0|_g^2 below this are rejected as too close to the
# degenerate boundary x_{n+1} = |cos theta0|
WIND_MARGIN = 1e-10

_KINDS = ("euclidean", "hyperbolic", "alpha", "alpha_halfspace")


@dataclass(frozen=True)
class MetricSpec:
    """A diagonal metric ``A(z) sum dx_i^2 + B(z) dz^2``.

    ``kind`` is one of

    * ``"euclidean"``: ``A = B = 1``;
    * ``"hyperbolic"``: ``A = B = z**-2`` on ``z > 0``;
    * ``"alpha"``: ``A = 1/l``, ``B = z**2/l**2`` with ``l = z**2 - cos(theta0)**2``,
      defined on ``z > |cos theta0|``;
    * ``"alpha_halfspace"``: the constant metric ``A = 1/s``, ``B = 1/s**2`` with
      ``s = sin(theta0)**2``.
    """

    kind: str
    theta0: float = np.pi / 2

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if not 0.0 < self.theta0 < np.pi:
            raise ValueError("theta0 must lie in (0, pi)")

    @property
    def cos0(self):
        return float(np.cos(self.theta0))

    def lower_bound(self):
        """Infimum of admissible heights (``-inf`` when unrestricted)."""
        if self.kind == "hyperbolic":
            return 0.0
        if self.kind == "alpha":
            return abs(self.cos0)
        return -np.inf

    def check_domain(self, x):
        z = np.asarray(x, dtype=float)[..., -1]
        bound = self.lower_bound()
        if np.any(~(z > bound)):
            bad = float(np.min(z))
            raise DomainError(f"{self.kind} metric needs x_(n+1) > {bound:g}, got {bad:g}")

    def coefficients(self, z):
        """Return ``(A, B)`` at heights ``z``."""
        z = np.asarray(z, dtype=float)
        c2 = self.cos0 ** 2
        if self.kind == "euclidean":
            one = np.ones_like(z)
            return one, one
        if self.kind == "hyperbolic":
            a = z ** -2.0
            return a, a
        if self.kind == "alpha":
            ell = z * z - c2
            return 1.0 / ell, z * z / ell ** 2
        s = 1.0 - c2
        return np.full_like(z, 1.0 / s), np.full_like(z, 1.0 / s ** 2)

    def derivatives(self, z):
        """Return ``(A', B', A'')`` with respect to ``z``."""
        z = np.asarray(z, dtype=float)
        zero = np.zeros_like(z)
        if self.kind in ("euclidean", "alpha_halfspace"):
            return zero, zero, zero
        if self.kind == "hyperbolic":
            da = -2.0 * z ** -3.0
            return da, da, 6.0 * z ** -4.0
        ell = z * z - self.cos0 ** 2
        da = -2.0 * z / ell ** 2
        db = 2.0 * z / ell ** 2 - 4.0 * z ** 3 / ell ** 3
        dda = -2.0 / ell ** 2 + 8.0 * z * z / ell ** 3
        return da, db, dda

    def diag(self, x):
        """Diagonal of the metric matrix at ``x``, shape ``(..., d)``."""
        x = np.asarray(x, dtype=float)
        self.check_domain(x)
        a, b = self.coefficients(x[..., -1])
        out = np.empty_like(x)
        out[..., :-1] = a[..., None]
        out[..., -1] = b
        return out

    def matrix(self, x):
        d = self.diag(x)
        return d[..., :, None] * np.eye(d.shape[-1])


def metric_eval(m, x, u, v):
    """Evaluate ``g_x(u, v)`` for the metric ``m``."""
    return np.sum(m.diag(x) * np.asarray(u, float) * np.asarray(v, float), axis=-1)


@dataclass(frozen=True)
class NavigationData:
    """Zermelo navigation data: a base metric and a constant wind ``v0``."""

    base: MetricSpec
    wind: np.ndarray = field(repr=False)
    theta0: float = np.pi / 2

    @classmethod
    def ball(cls, theta0, dim=2):
        """Hyperbolic sea with wind ``cos(theta0) E_{n+1}`` (capillary in the ball)."""
        wind = np.zeros(dim)
        wind[-1] = np.cos(theta0)
        return cls(MetricSpec("hyperbolic"), wind, float(theta0))

    @classmethod
    def halfspace(cls, theta0, dim=2):
        """Euclidean sea with wind ``-cos(theta0) E_{n+1}`` (capillary in the half-space)."""
        wind = np.zeros(dim)
        wind[-1] = -np.cos(theta0)
        return cls(MetricSpec("euclidean"), wind, float(theta0))

    @property
    def dim(self):
        return self.wind.shape[0]

    def alpha_metric(self):
        """The Riemannian part of the Randers metric as a :class:`MetricSpec`."""
        if self.base.kind == "hyperbolic":
            return MetricSpec("alpha", self.theta0)
        if self.base.kind == "euclidean":
            return MetricSpec("alpha_halfspace", self.theta0)
        raise ValueError("navigation data must have a Euclidean or hyperbolic base")

    def _parts(self, x):
        """Return ``(g_diag, v0_flat, lam)`` with ``lam = 1 - |v0|_g^2``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {x.shape[-1]}")
        gd = self.base.diag(x)
        v0_flat = gd * self.wind
        lam = 1.0 - np.sum(v0_flat * self.wind, axis=-1)
        if np.any(lam < WIND_MARGIN):
            raise DomainError("wind condition |v0|_g < 1 violated (or within margin)")
        return gd, v0_flat, lam

    def alpha_beta(self, x):
        """Matrix of ``alpha`` and components of ``beta`` at ``x``."""
        gd, vf, lam = self._parts(x)
        eye = np.eye(self.dim)
        alpha = gd[..., :, None] * eye / lam[..., None, None] + (
            vf[..., :, None] * vf[..., None, :] / (lam ** 2)[..., None, None]
        )
        beta = vf / lam[..., None]
        return alpha, beta


def beta_components(nd, x):
    """Components ``beta_i(x)`` of the Randers one-form."""
    return nd.alpha_beta(x)[1]


@dataclass(frozen=True)
class GaugeValue:
    """``F = sqrt(alpha_part) + beta_part``."""

    F: np.ndarray
    alpha_part: np.ndarray
    beta_part: np.ndarray


def _nonzero(xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(np.linalg.norm(xi, axis=-1) == 0.0):
        raise ZeroVectorError("gauge evaluated on the zero vector")
    return xi


def randers_eval(nd, x, xi):
    """Randers gauge ``F(x, xi)`` together with its alpha and beta parts."""
    xi = _nonzero(xi)
    alpha, beta = nd.alpha_beta(x)
    a = np.einsum("...i,...ij,...j->...", xi, alpha, xi)
    b = np.sum(beta * xi, axis=-1)
    return GaugeValue(np.sqrt(a) + b, a, b)


def randers_norm(nd, x, xi):
    """Shortcut for ``randers_eval(nd, x, xi).F``."""
    return randers_eval(nd, x, xi).F


def _gradient_parts(nd, x, xi):
    alpha, beta = nd.alpha_beta(x)
    axi = np.einsum("...ij,...j->...i", alpha, xi)
    s = np.sqrt(np.sum(axi * xi, axis=-1))
    grad = axi / s[..., None] + beta
    F = s + np.sum(beta * xi, axis=-1)
    return alpha, axi, s, grad, F


def legendre(nd, x, xi):
    """Legendre transform ``l_x(xi) = D(F^2/2)(xi)`` as a covector."""
    xi = _nonzero(xi)
    _, _, _, grad, F = _gradient_parts(nd, x, xi)
    return F[..., None] * grad


def fundamental_tensor(nd, x, xi):
    """Hessian of ``F^2/2`` in the fibre variable, assembled in closed form."""
    xi = _nonzero(xi)
    alpha, axi, s, grad, F = _gradient_parts(nd, x, xi)
    hess_F = alpha / s[..., None, None] - axi[..., :, None] * axi[..., None, :] / (s ** 3)[..., None, None]
    return F[..., None, None] * hess_F + grad[..., :, None] * grad[..., None, :]


def _direction_bank(dim, count=64):
    rng = np.random.default_rng(20240917)
    dirs = rng.standard_normal((count, dim))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def _initial_dual_guess(nd, x, w):
    """Starting point for inverting the Legendre map.

    The dual gauge is estimated by maximising ``<w, xi>`` over 64 fixed
    F-unit directions; the guess is the F-normalised alpha-sharp of ``w``
    scaled by that estimate.
    """
    alpha, beta = nd.alpha_beta(x)
    dirs = _direction_bank(nd.dim)
    f_dirs = np.sqrt(np.einsum("kj,...ji,ki->...k", dirs, alpha, dirs)) + np.einsum("...j,kj->...k", beta, dirs)
    unit = dirs / f_dirs[..., None]
    fstar = np.max(np.einsum("...kj,...j->...k", unit, w), axis=-1)
    sharp = np.linalg.solve(alpha, w[..., None])[..., 0]
    sharp = sharp / randers_norm(nd, x, sharp)[..., None]
    fstar = np.where(fstar > 0, fstar, np.linalg.norm(w, axis=-1))
    return fstar[..., None] * sharp


def legendre_dual(nd, x, w, tol=1e-12, max_iter=60):
    """Invert the Legendre map: find ``xi`` with ``legendre(nd, x, xi) = w``.

    Damped Newton on the strictly convex function ``F(xi)^2/2 - <w, xi>``
    with the fundamental tensor as Hessian.
    """
    w = _nonzero(w)
    x = np.asarray(x, dtype=float)
    x_b = np.broadcast_to(x, w.shape)
    xi = _initial_dual_guess(nd, x_b, w)
    scale = np.linalg.norm(w, axis=-1)

    def objective(v):
        return 0.5 * randers_norm(nd, x_b, v) ** 2 - np.sum(w * v, axis=-1)

    for _ in range(max_iter):
        resid = legendre(nd, x_b, xi) - w
        err = np.linalg.norm(resid, axis=-1)
        if np.all(err <= tol * scale):
            return xi
        step = -np.linalg.solve(fundamental_tensor(nd, x_b, xi), resid[..., None])[..., 0]
        f0 = objective(xi)
        t = np.ones(err.shape)
        for _ in range(40):
            trial = xi + t[..., None] * step
            ok = objective(trial) <= f0 + 1e-4 * t * np.sum(resid * step, axis=-1) + 1e-15 * np.abs(f0)
            if not np.all(ok):
                # near the root the objective is flat to roundoff; fall back to the residual norm
                r_trial = np.linalg.norm(legendre(nd, x_b, trial) - w, axis=-1)
                ok |= r_trial <= (1 - 1e-4 * t) * err
            if np.all(ok):
                break
            t = np.where(ok, t, 0.5 * t)
        xi = xi + t[..., None] * step
    resid = np.linalg.norm(legendre(nd, x_b, xi) - w, axis=-1)
    raise ConvergenceError(f"Legendre inversion did not converge (max residual {np.max(resid):.3e})")


def dual_gauge(nd, x, w):
    """Dual Minkowski gauge ``F*_x(w)``, evaluated through the Legendre inverse."""
    return randers_norm(nd, np.broadcast_to(x, np.shape(w)), legendre_dual(nd, x, w))


def dual_gauge_gradient(nd, x, w):
    """Gradient ``DF*_x(w)``; equals ``xi / F(xi)`` for ``xi = l^{-1}(w)``."""
    xi = legendre_dual(nd, x, w)
    return xi / randers_norm(nd, np.broadcast_to(x, xi.shape), xi)[..., None]


def finsler_normal(nd, x, n_delta, tol=1e-10):
    """F-unit normal ``n_g - v0`` from a Euclidean unit normal ``n_delta``."""
    n_delta = np.asarray(n_delta, dtype=float)
    norm = np.linalg.norm(n_delta, axis=-1)
    if np.any(np.abs(norm - 1.0) > tol):
        raise ValueError("n_delta must be a Euclidean unit vector")
    gd = nd.base.diag(x)
    n_g = n_delta / np.sqrt(np.sum(gd * n_delta * n_delta, axis=-1))[..., None]
    return n_g - nd.wind
