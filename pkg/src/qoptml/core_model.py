"""Closed-form physics of single-mode Gaussian states.

Quadratures follow the convention ``x_phi = (a e^{-i phi} + a^dag e^{i phi}) / 2``,
so the vacuum has quadrature variance 1/4 and the Wigner function is
normalized to unit integral over the complex plane ``alpha = x + i y``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class Convention(enum.Enum):
    """How a sub-unit quantum efficiency enters homodyne statistics.

    ``RESCALED`` data have been divided by ``sqrt(eta)``: the ideal pdf is
    convolved with a Gaussian of variance ``(1 - eta) / (4 eta)``.
    ``RAW`` data follow the linear-detector model in which the mean is
    multiplied by ``eta`` and the variance grows by ``(1 - eta) / 4``.
    """

    RESCALED = "rescaled"
    RAW = "raw"


@dataclass(frozen=True)
class GaussianState:
    """Single-mode Gaussian state.

    Parameters
    ----------
    delta : float
        Purity parameter, ``Tr[rho^2] = delta**2``; must lie in (0, 1].
    r : float
        Squeezing parameter. For ``theta = 0`` and ``r > 0`` the ``y``
        quadrature is squeezed by ``e^{-2r}``.
    mu : complex
        Coherent amplitude.
    theta : float
        Orientation of the covariance ellipse, reduced to [0, pi).
    """

    delta: float = 1.0
    r: float = 0.0
    mu: complex = 0j
    theta: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0 + 1e-12) or not math.isfinite(self.delta):
            raise ValueError(f"delta must lie in (0, 1], got {self.delta!r}")
        if not math.isfinite(self.r):
            raise ValueError("r must be finite")
        mu = complex(self.mu)
        if not (math.isfinite(mu.real) and math.isfinite(mu.imag)):
            raise ValueError("mu must be finite")
        object.__setattr__(self, "delta", min(float(self.delta), 1.0))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "theta", float(self.theta) % math.pi)

    @classmethod
    def from_photon_numbers(cls, n_th=0.0, n_sq=0.0, mu=0j, theta=0.0):
        """Build a state from thermal and squeezing photon numbers."""
        if n_th < 0 or n_sq < 0:
            raise ValueError("photon numbers must be nonnegative")
        return cls(
            delta=1.0 / math.sqrt(2.0 * n_th + 1.0),
            r=math.asinh(math.sqrt(n_sq)),
            mu=mu,
            theta=theta,
        )

    @classmethod
    def from_moments(cls, mean, cov, delta=None):
        """Build a state from its Wigner mean vector and covariance matrix.

        If ``delta`` is given it overrides the value implied by ``det(cov)``;
        the covariance then only fixes the squeezing and orientation.
        """
        cov = np.asarray(cov, dtype=float)
        cov = 0.5 * (cov + cov.T)
        evals, evecs = np.linalg.eigh(cov)
        lo, hi = evals
        if lo <= 0:
            raise ValueError("covariance must be positive definite")
        if delta is None:
            delta = 1.0 / (2.0 * math.sqrt(math.sqrt(lo * hi)))
        r = 0.25 * math.log(hi / lo)
        v = evecs[:, 1]
        theta = math.atan2(v[1], v[0])
        return cls(delta=delta, r=r, mu=complex(mean[0], mean[1]), theta=theta)

    @property
    def purity(self):
        return self.delta**2

    def mean(self):
        return np.array([self.mu.real, self.mu.imag])

    def covariance(self):
        """2x2 Wigner covariance of ``(x, y)``."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        rot = np.array([[c, -s], [s, c]])
        d = np.diag([math.exp(2 * self.r), math.exp(-2 * self.r)])
        return rot @ d @ rot.T / (4.0 * self.delta**2)


@dataclass(frozen=True)
class DetectorEfficiency:
    eta: float = 1.0
    convention: Convention = Convention.RESCALED

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta!r}")
        object.__setattr__(self, "convention", Convention(self.convention))


@dataclass(frozen=True)
class PhotonBudget:
    n_th: float
    n_sq: float
    n_coh: float

    @property
    def total_pure(self):
        """Mean photon number ``n_coh + n_sq`` of the pure probe."""
        return self.n_coh + self.n_sq


def photon_budget(state: GaussianState) -> PhotonBudget:
    return PhotonBudget(
        n_th=0.5 * (1.0 / state.delta**2 - 1.0),
        n_sq=math.sinh(state.r) ** 2,
        n_coh=abs(state.mu) ** 2,
    )


def wigner(state: GaussianState, x, y):
    """Wigner function of ``state`` at ``alpha = x + i y`` (broadcasts)."""
    x = np.asarray(x, dtype=float) - state.mu.real
    y = np.asarray(y, dtype=float) - state.mu.imag
    c, s = math.cos(state.theta), math.sin(state.theta)
    # coordinates along the principal axes
    u = c * x + s * y
    v = -s * x + c * y
    d2 = state.delta**2
    arg = -2.0 * d2 * (math.exp(-2 * state.r) * u**2 + math.exp(2 * state.r) * v**2)
    return 2.0 * d2 / math.pi * np.exp(arg)


def homodyne_moments(state: GaussianState, det: DetectorEfficiency, phase):
    """Mean and variance of the homodyne outcome at local-oscillator ``phase``."""
    phase = np.asarray(phase, dtype=float)
    mean = state.mu.real * np.cos(phase) + state.mu.imag * np.sin(phase)
    t = phase - state.theta
    var = (
        math.exp(2 * state.r) * np.cos(t) ** 2 + math.exp(-2 * state.r) * np.sin(t) ** 2
    ) / (4.0 * state.delta**2)
    eta = det.eta
    if eta < 1.0:
        if det.convention is Convention.RESCALED:
            var = var + (1.0 - eta) / (4.0 * eta)
        else:
            mean = eta * mean
            var = var + (1.0 - eta) / 4.0
    return mean, var


def homodyne_pdf(state: GaussianState, det: DetectorEfficiency, phase, x):
    mean, var = homodyne_moments(state, det, phase)
    x = np.asarray(x, dtype=float)
    return np.exp(-((x - mean) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)


def state_overlap(a: GaussianState, b: GaussianState) -> float:
    """Normalized overlap ``Tr[ab] / sqrt(Tr[a^2] Tr[b^2])``.

    Uses ``Tr[rho_a rho_b] = pi * int W_a W_b``, a Gaussian convolution.
    """
    s = a.covariance() + b.covariance()
    d = a.mean() - b.mean()
    tr_ab = math.exp(-0.5 * d @ np.linalg.solve(s, d)) / (2.0 * math.sqrt(np.linalg.det(s)))
    return min(tr_ab / (a.delta * b.delta), 1.0)


class QuadratureError(RuntimeError):
    """Periodic quadrature failed to reach the requested accuracy."""


def photon_number_prob(n_th, r, n, *, nodes=512, tol=1e-10, max_nodes=1 << 16):
    """Photon-number probability ``<n|rho|n>`` of a squeezed thermal state.

    The phase integral is periodic and analytic, so the uniform trapezoid
    rule converges geometrically; the node count doubles until two
    successive estimates agree within ``tol``.
    """
    if n_th < 0:
        raise ValueError("n_th must be nonnegative")
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    n = int(n)

    def trapezoid(m):
        phi = 2 * np.pi * np.arange(m) / m
        c = (n_th + 0.5) * (
            math.exp(-2 * r) * np.sin(phi) ** 2 + math.exp(2 * r) * np.cos(phi) ** 2
        ) + 0.5
        # (C - 1)^n / C^(n+1) written to avoid overflow at large n
        return float(np.mean(((c - 1.0) / c) ** n / c))

    prev = trapezoid(nodes)
    m = nodes
    while m < max_nodes:
        m *= 2
        cur = trapezoid(m)
        if abs(cur - prev) < tol:
            return min(max(cur, 0.0), 1.0)
        prev = cur
    raise QuadratureError(
        f"photon_number_prob did not converge: last change {abs(cur - prev):.3g} "
        f"with {m} nodes"
    )


def photon_number_distribution(n_th, r, n_max, **kwargs):
    """Array of ``photon_number_prob`` for ``n = 0 .. n_max``."""
    return np.array([photon_number_prob(n_th, r, k, **kwargs) for k in range(n_max + 1)])
