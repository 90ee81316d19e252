"""Fisher information, Cramer-Rao bounds and optimal squeezing."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from scipy import integrate, optimize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FisherResult:
    fisher: float
    crlb_variance: float
    n: int = 1

    @classmethod
    def from_fisher(cls, fisher, n=1):
        fisher = float(fisher)
        crlb = math.inf if fisher <= 0 else 1.0 / (n * fisher)
        return cls(fisher, crlb, n)

    @property
    def crlb_std(self):
        return math.sqrt(self.crlb_variance)


def fisher_numeric(pdf, lam, domain=None, *, outcomes=None, step=None, epsrel=1e-11):
    """Fisher information of the family ``pdf(x, lam)`` at ``lam``.

    The parameter derivative is a central difference with step
    ``1e-5 * (|lam| + 1)`` unless given. Continuous families integrate over
    ``domain = (a, b)`` with adaptive quadrature; discrete families sum over
    ``outcomes``.
    """
    if (domain is None) == (outcomes is None):
        raise ValueError("give exactly one of domain or outcomes")
    h = 1e-5 * (abs(lam) + 1.0) if step is None else step

    def integrand(x):
        p = pdf(x, lam)
        dp = (pdf(x, lam + h) - pdf(x, lam - h)) / (2 * h)
        return dp * dp / p if p > 0 else 0.0

    if outcomes is not None:
        return FisherResult.from_fisher(sum(integrand(x) for x in outcomes))

    a, b = domain
    value, err = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=epsrel, limit=400)
    if not math.isfinite(value) or err > 1e-6 * max(abs(value), 1e-300):
        raise ArithmeticError(f"Fisher quadrature did not converge (value={value}, error={err})")
    return FisherResult.from_fisher(value)


def phase_crlb_coherent(n_photons, n_meas):
    """Standard-deviation bound ``1 / sqrt(2 n N)`` for coherent probes."""
    return 1.0 / math.sqrt(2.0 * n_photons * n_meas)


def phase_crlb_squeezed(A, r, eta, n_meas):
    """Variance bound for phase estimation on a displaced squeezed probe.

    ``(e^{-2r} + (1 - eta)/eta) / (4 N A^2)``; at ``eta = 1`` only the
    squeezed quadrature noise remains.
    """
    return (math.exp(-2 * r) + (1.0 - eta) / eta) / (4.0 * n_meas * A * A)


def _cubic(x, A, k):
    return x**3 + (4 * A * A + k) * x**2 - x - k


def optimal_squeezing(A, eta=1.0):
    """Optimal ``e^{2r}`` for a probe with coherent amplitude ``A``.

    At unit efficiency this is ``2A^2 (1 + sqrt(1 + 1/(4 A^4)))``. Below unit
    efficiency ``x = e^{-2r}`` is the root in (0, 1] of
    ``x^3 + (4A^2 + k) x^2 - x - k`` with ``k = (1 - eta)/eta``.
    """
    if A <= 0:
        raise ValueError("A must be positive")
    if not (0.0 < eta <= 1.0):
        raise ValueError("eta must lie in (0, 1]")
    if eta == 1.0:
        a2 = A * A
        return 2 * a2 + math.sqrt(4 * a2 * a2 + 1.0)
    k = (1.0 - eta) / eta
    lo, hi = 1e-12, 1.0
    if not (_cubic(lo, A, k) < 0 < _cubic(hi, A, k)):
        raise ArithmeticError("optimal squeezing cubic has no bracketed root in [0, 1]")
    x = optimize.bisect(_cubic, lo, hi, args=(A, k), xtol=1e-14, maxiter=200)
    for _ in range(3):
        d = 3 * x * x + 2 * (4 * A * A + k) * x - 1
        if d == 0:
            break
        x_new = x - _cubic(x, A, k) / d
        if not (lo <= x_new <= hi):
            break
        x = x_new
    return 1.0 / x


def optimal_probe(n, eta=1.0):
    """Coherent amplitude and squeezing minimizing the phase bound at total photon number ``n``.

    Returns ``(A, r)`` with ``A^2 + sinh(r)^2 = n`` and ``e^{2r}`` given by
    :func:`optimal_squeezing`.
    """
    if n <= 0:
        raise ValueError("n must be positive")

    def excess(A):
        r = 0.5 * math.log(optimal_squeezing(A, eta))
        return A * A + math.sinh(r) ** 2 - n

    A = optimize.brentq(excess, 1e-9, math.sqrt(n), xtol=1e-15, rtol=1e-14)
    return A, 0.5 * math.log(optimal_squeezing(A, eta))


def onoff_p0(eta, alpha_sq):
    return math.exp(-eta * alpha_sq)


def onoff_fisher(eta, alpha_sq):
    """Fisher information on ``eta`` of an ON/OFF detector fed coherent pulses.

    ``F = (dP0/deta)^2 / (P0 (1 - P0))`` with ``P0 = exp(-eta |alpha|^2)``.
    The weak-pulse simplification ``eta / |alpha|^2`` is logged alongside.
    """
    if alpha_sq <= 0:
        raise ValueError("alpha_sq must be positive")
    x = eta * alpha_sq
    f = alpha_sq**2 * math.exp(-x) / -math.expm1(-x)
    simplified = onoff_fisher_simplified(eta, alpha_sq)
    log.debug(
        "onoff_fisher(eta=%g, |alpha|^2=%g): general=%.6g simplified=%.6g ratio=%.6g",
        eta, alpha_sq, f, simplified, simplified / f,
    )
    return FisherResult.from_fisher(f)


def onoff_fisher_simplified(eta, alpha_sq):
    """Weak-pulse shortcut ``F ~ eta / |alpha|^2``; not the small-``eta |alpha|^2`` limit of :func:`onoff_fisher`."""
    return eta / alpha_sq


def onoff_std_simplified(eta, alpha_sq, n_meas):
    """Weak-pulse shortcut for the error, ``|alpha| / sqrt(eta N)``."""
    return math.sqrt(alpha_sq) / math.sqrt(eta * n_meas)


def propagate_phase_error(y_mean, sigma_y_mean, A):
    """Error on ``arcsin(y_mean / A)`` from the error on ``y_mean``."""
    ratio = y_mean / A
    if abs(ratio) >= 1:
        raise ValueError("|y_mean| must be smaller than A")
    return sigma_y_mean / (A * math.sqrt(1.0 - ratio * ratio))


def homodyne_phase_fisher(A, r, eta=1.0):
    """Per-sample Fisher information on the phase for the squeezed-probe scheme at psi = 0."""
    var = (math.exp(-2 * r) + (1.0 - eta) / eta) / 4.0
    return A * A / var


def gaussian_location_fisher(var):
    return 1.0 / var


__all__ = [
    "FisherResult",
    "fisher_numeric",
    "gaussian_location_fisher",
    "homodyne_phase_fisher",
    "onoff_fisher",
    "onoff_fisher_simplified",
    "onoff_p0",
    "onoff_std_simplified",
    "optimal_probe",
    "optimal_squeezing",
    "phase_crlb_coherent",
    "phase_crlb_squeezed",
    "propagate_phase_error",
]

