"""Ambient space-form models and the conformal half-space picture.

Two curved ambients are supported, selected by the curvature sign K:

* K = -1: hyperbolic space in the Poincare ball model, metric
  4/(1-|x|^2)^2 |dx|^2 on the unit ball.
* K = +1: the round sphere minus a pole, metric 4/(1+|x|^2)^2 |dx|^2
  on all of R^{n+2}-coordinates.

A geodesic ball of radius R sits in the model as the Euclidean ball of
radius r0 about the origin; the solver works in a conformal half-space
picture where that geodesic ball becomes the closed upper half space
and its boundary sphere the plane {z_last = 0}.  The axis direction is
fixed to a = -e_last throughout; caps and graphs are axisymmetric
about it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


def angle_bound(n: int) -> float:
    """Contact-angle restriction: admissible runs need |cos theta| below this."""
    return (3 * n + 1) / (5 * n - 1)


def radius_to_model(R: float, K: int) -> float:
    """Euclidean model radius r0 of the geodesic ball of radius R.

    r0 = sqrt((cosh R - 1)/(cosh R + 1)) = tanh(R/2) for K = -1 and
    r0 = sqrt((1 - cos R)/(1 + cos R)) = tan(R/2) for K = +1.
    """
    if K == -1:
        if not 0.0 < R < math.inf:
            raise DomainError(f"geodesic radius R={R} outside (0, inf) for K=-1")
        return math.tanh(0.5 * R)
    if K == 1:
        if not 0.0 < R < math.pi:
            raise DomainError(f"geodesic radius R={R} outside (0, pi) for K=+1")
        return math.tan(0.5 * R)
    raise DomainError(f"curvature sign K={K} not in {{-1, +1}}")


def model_to_radius(r0: float, K: int) -> float:
    """Inverse of radius_to_model."""
    if K == -1:
        if not 0.0 < r0 < 1.0:
            raise DomainError(f"model radius r0={r0} outside (0, 1) for K=-1")
        return 2.0 * math.atanh(r0)
    if K == 1:
        if not 0.0 < r0 < math.inf:
            raise DomainError(f"model radius r0={r0} outside (0, inf) for K=+1")
        return 2.0 * math.atan(r0)
    raise DomainError(f"curvature sign K={K} not in {{-1, +1}}")


@dataclass(frozen=True)
class SpaceForm:
    """Ambient model data: curvature sign, ball radius, dimension, contact angle.

    n is the hypersurface dimension (the ambient is (n+1)-dimensional).
    r0 is derived from (K, R).  `angle_ok` records whether the proven
    contact-angle restriction |cos theta| < (3n+1)/(5n-1) holds; callers
    decide whether a violation is a warning or an error.
    """

    K: int
    R: float
    n: int
    theta: float
    r0: float = field(init=False)

    def __post_init__(self):
        if self.K not in (-1, 1):
            raise DomainError(f"curvature sign K={self.K} not in {{-1, +1}}")
        if not isinstance(self.n, int) or self.n < 2:
            raise DomainError(f"hypersurface dimension n={self.n} must be an integer >= 2")
        if not 0.0 < self.theta < math.pi:
            raise DomainError(f"contact angle theta={self.theta} outside (0, pi)")
        object.__setattr__(self, "r0", radius_to_model(self.R, self.K))

    @property
    def cos_theta(self) -> float:
        return math.cos(self.theta)

    @property
    def cot_theta(self) -> float:
        return math.cos(self.theta) / math.sin(self.theta)

    @property
    def s_R(self) -> float:
        """sinh R for K=-1, sin R for K=+1; equals 2 r0 / (1 + K r0^2)."""
        return 2.0 * self.r0 / (1.0 + self.K * self.r0 * self.r0)

    @property
    def angle_ok(self) -> bool:
        return abs(math.cos(self.theta)) < angle_bound(self.n)


# ---------------------------------------------------------------------------
# Conformal factor and Killing data
# ---------------------------------------------------------------------------

def conformal_factor(z, sf: SpaceForm):
    """Half-space conformal weight e^U at points z (last axis = coordinates).

    e^U = 4 r0 / ((1 + K r0^2)(1 + |z|^2) + 2 (1 - K r0^2) z_last); the
    denominator is positive on the closed upper half space for any valid r0.
    """
    z = np.asarray(z, dtype=float)
    return _conf(np.sum(z * z, axis=-1), z[..., -1], sf)


def _conf(zsq, zlast, sf: SpaceForm):
    r0 = sf.r0
    den = (1.0 + sf.K * r0 * r0) * (1.0 + zsq) + 2.0 * (1.0 - sf.K * r0 * r0) * zlast
    return 4.0 * r0 / den


def conformal_factor_polar(s, cosbeta, sf: SpaceForm):
    """e^U at polar points |z| = s, z_last = s cos(beta)."""
    s = np.asarray(s, dtype=float)
    return _conf(s * s, s * cosbeta, sf)


def killing_scalar_V(x, sf: SpaceForm):
    """Conformal factor V_a of the Killing field, 2<x,a>/(1 + K|x|^2), a = -e_last."""
    x = np.asarray(x, dtype=float)
    xa = -x[..., -1]
    return 2.0 * xa / (1.0 + sf.K * np.sum(x * x, axis=-1))


def killing_vectors(x, sf: SpaceForm):
    """The pair (X_a, Y_a) at ball-model points x, with a = -e_last.

    X_a = 2/(1 + K r0^2) [<x,a> x - (|x|^2 + r0^2)/2 a]
    Y_a = (1 - K|x|^2)/2 a + K <x,a> x
    """
    x = np.asarray(x, dtype=float)
    a = np.zeros(x.shape[-1])
    a[-1] = -1.0
    xa = -x[..., -1]
    xsq = np.sum(x * x, axis=-1)
    r0sq = sf.r0 * sf.r0
    X = (2.0 / (1.0 + sf.K * r0sq)) * (
        xa[..., None] * x - 0.5 * (xsq + r0sq)[..., None] * a
    )
    Y = 0.5 * (1.0 - sf.K * xsq)[..., None] * a + sf.K * xa[..., None] * x
    return X, Y


# ---------------------------------------------------------------------------
# Half-space <-> ball diffeomorphism
# ---------------------------------------------------------------------------

def halfspace_to_ball(z, sf: SpaceForm):
    """Map half-space points to the model ball B_{r0}.

    z = 0 goes to r0*a (the lowest point of the support sphere), the
    boundary plane to the sphere |x| = r0, and |z| -> inf to -r0*a.
    Works on complex input so tests can use complex-step derivatives.
    """
    z = np.asarray(z)
    zp = z[..., :-1]
    zlast = z[..., -1]
    den = np.sum(zp * zp, axis=-1) + (1.0 + zlast) ** 2
    y = np.empty_like(z)
    y[..., :-1] = 2.0 * zp / den[..., None]
    y[..., -1] = (np.sum(z * z, axis=-1) - 1.0) / den
    return sf.r0 * y


def ball_to_halfspace(x, sf: SpaceForm):
    """Inverse of halfspace_to_ball, defined for |x| <= r0."""
    y = np.asarray(x) / sf.r0
    yp = y[..., :-1]
    ylast = y[..., -1]
    den = np.sum(yp * yp, axis=-1) + (1.0 - ylast) ** 2
    z = np.empty_like(y)
    z[..., :-1] = 2.0 * yp / den[..., None]
    z[..., -1] = (1.0 - np.sum(y * y, axis=-1)) / den
    return z


# ---------------------------------------------------------------------------
# Spherical caps (static solutions)
# ---------------------------------------------------------------------------

def unit_cap_shape(beta, theta: float):
    """Profile of the contact-angle-theta cap of unit half-space radius.

    Caps form a homothetic family in the half-space picture:
    rho_cap(beta) = rhat * (-cos(theta) cos(beta) + sqrt(1 - cos^2 theta sin^2 beta)).
    """
    beta = np.asarray(beta, dtype=float)
    ct = math.cos(theta)
    return -ct * np.cos(beta) + np.sqrt(1.0 - ct * ct * np.sin(beta) ** 2)


@dataclass(frozen=True)
class CapProfile:
    """A spherical cap: Euclidean sphere in the half space meeting the plane at angle theta.

    c is the sphere's center height on the symmetry axis (c = -rhat cos theta,
    negative for theta < pi/2), rhat its Euclidean radius, r the ball-model
    cap radius parameter.  The graph profile is
    rho(beta) = c cos(beta) + sqrt(rhat^2 - c^2 sin^2(beta)).
    """

    r: float
    c: float
    rhat: float
    theta: float

    def rho(self, beta):
        beta = np.asarray(beta, dtype=float)
        return self.c * np.cos(beta) + np.sqrt(self.rhat**2 - self.c**2 * np.sin(beta) ** 2)

    def u(self, beta):
        return np.log(self.rho(beta))

    def u_beta(self, beta):
        """Analytic d(log rho)/dbeta; equals cot(theta) at beta = pi/2."""
        beta = np.asarray(beta, dtype=float)
        rho = self.rho(beta)
        return -self.c * np.sin(beta) / (rho - self.c * np.cos(beta))

    def u_betabeta(self, beta):
        beta = np.asarray(beta, dtype=float)
        rho = self.rho(beta)
        ub = self.u_beta(beta)
        w = rho - self.c * np.cos(beta)
        # differentiate u_beta = -c sin(beta)/w, with w' = rho*ub + c sin(beta)
        wprime = rho * ub + self.c * np.sin(beta)
        return (-self.c * np.cos(beta) + self.c * np.sin(beta) * wprime / w) / w


def _ball_center_radius(r: float, sf: SpaceForm) -> float:
    """Euclidean center offset of the ball-model cap sphere along a."""
    return math.sqrt(r * r + 2.0 * r * sf.r0 * sf.cos_theta + sf.r0 * sf.r0)


def cap_profile(r: float, sf: SpaceForm) -> CapProfile:
    """Cap of ball-model radius parameter r, as a half-space profile.

    The half-space sphere parameters follow from mapping the ball-model
    sphere |x - m a| = r, m = sqrt(r^2 + 2 r r0 cos(theta) + r0^2):
    rhat = r/(m + r0 + r cos theta) and c = -rhat cos(theta).
    """
    if not r > 0.0:
        raise DomainError(f"cap radius r={r} must be positive")
    m = _ball_center_radius(r, sf)
    rhat = r / (m + sf.r0 + r * sf.cos_theta)
    return CapProfile(r=r, c=-rhat * sf.cos_theta, rhat=rhat, theta=sf.theta)


def cap_profile_from_rhat(rhat: float, sf: SpaceForm) -> CapProfile:
    """Cap with prescribed half-space radius rhat.

    The ball-model radius parameter is recovered numerically by mapping
    profile points through the model diffeomorphism and fitting the
    axis-centered sphere |x|^2 + 2 mu x_last + mu^2 = r^2 (linear in
    (mu, mu^2 - r^2)).
    """
    if not rhat > 0.0:
        raise DomainError(f"cap radius rhat={rhat} must be positive")
    cap = CapProfile(r=math.nan, c=-rhat * sf.cos_theta, rhat=rhat, theta=sf.theta)
    beta = np.array([0.0, 0.3, 0.7, 1.1, 0.5 * math.pi])
    rho = cap.rho(beta)
    z = np.zeros((beta.size, sf.n + 1))
    z[:, 0] = rho * np.sin(beta)
    z[:, -1] = rho * np.cos(beta)
    x = halfspace_to_ball(z, sf)
    A = np.column_stack([2.0 * x[:, -1], np.ones(beta.size)])
    b = -np.sum(x * x, axis=-1)
    (mu, gamma), *_ = np.linalg.lstsq(A, b, rcond=None)
    rsq = mu * mu - gamma
    if rsq <= 0.0:
        raise DomainError(f"cap rhat={rhat} does not map to a sphere inside the model ball")
    return CapProfile(r=math.sqrt(rsq), c=cap.c, rhat=rhat, theta=sf.theta)
