"""Maximum-likelihood estimators for Gaussian states, phases and quantum efficiency."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import bounds
from .core_model import Convention, DetectorEfficiency, GaussianState, homodyne_moments
from .measurement_sim import ClickRecord, HeterodyneRecords, HomodyneRecords

log = logging.getLogger(__name__)

LOG_2PI = math.log(2 * math.pi)


class EstimationError(ValueError):
    """The data do not determine the requested parameter."""


@dataclass
class EstimationResult:
    """Outcome of one estimation.

    ``crlb`` is the Cramer-Rao *variance* bound ``1 / (N F)``; ``fisher`` is
    the per-sample Fisher information it was computed from. Vector fits
    store arrays in both fields.
    """

    estimate: float | np.ndarray
    std_error: float | np.ndarray
    crlb: float | np.ndarray = math.nan
    fisher: float | np.ndarray = math.nan
    n_samples: int = 0
    converged: bool = True
    log_likelihood_at_max: float = math.nan
    flags: tuple = ()
    info: dict = field(default_factory=dict)

    @property
    def crlb_std(self):
        return np.sqrt(self.crlb)


@dataclass
class MaximizeResult:
    x: np.ndarray
    value: float
    converged: bool
    grad_norm: float
    nfev: int


def _projected_gradient(f, x, lo, hi):
    g = np.empty_like(x)
    for i in range(x.size):
        h = 1e-6 * (abs(x[i]) + 1.0)
        xp, xm = x.copy(), x.copy()
        xp[i] = min(x[i] + h, hi[i])
        xm[i] = max(x[i] - h, lo[i])
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
        # at an active bound only the inward component counts
        if x[i] <= lo[i] + 1e-9 and g[i] < 0:
            g[i] = 0.0
        if x[i] >= hi[i] - 1e-9 and g[i] > 0:
            g[i] = 0.0
    return g


def maximize(
    objective,
    x0,
    bounds=None,
    *,
    n_starts=8,
    start_scale=None,
    xatol=1e-9,
    fatol=1e-12,
    tol_grad=1e-6,
    maxiter=None,
    seed=0,
):
    """Multi-start Nelder-Mead maximization inside an optional box.

    Starts are ``x0`` and ``n_starts - 1`` Gaussian perturbations of it of
    size ``start_scale`` (default ``0.1 * (|x0| + 1)``), clipped to the box.
    ``fatol`` is relative to ``1 + |f(x0)|``.
    Convergence requires every simplex run to succeed and the projected
    central-difference gradient at the best point to be at most
    ``tol_grad * (1 + |f|)``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    dim = x0.size
    if bounds is None:
        lo = np.full(dim, -np.inf)
        hi = np.full(dim, np.inf)
    else:
        lo = np.array([-np.inf if b[0] is None else b[0] for b in bounds], dtype=float)
        hi = np.array([np.inf if b[1] is None else b[1] for b in bounds], dtype=float)
    x0 = np.clip(x0, lo, hi)
    scale = 0.1 * (np.abs(x0) + 1.0) if start_scale is None else np.broadcast_to(start_scale, dim)
    rng = np.random.default_rng(seed)
    starts = [x0] + [
        np.clip(x0 + scale * rng.standard_normal(dim), lo, hi) for _ in range(n_starts - 1)
    ]

    def neg(x):
        v = objective(x)
        return -v if np.isfinite(v) else np.inf

    box = None if bounds is None else list(zip(lo, hi))
    # fatol is relative to the objective's magnitude at the first start
    f0 = neg(x0)
    fatol = fatol * (1.0 + abs(f0)) if np.isfinite(f0) else fatol
    options = {"xatol": xatol, "fatol": fatol, "maxiter": maxiter or 400 * dim, "maxfev": maxiter or 800 * dim}
    if dim > 2:
        options["adaptive"] = True
    best, nfev, all_ok = None, 0, True
    for s in starts:
        res = optimize.minimize(neg, s, method="Nelder-Mead", bounds=box, options=options)
        nfev += res.nfev
        if not res.success:
            # restart once from the end point; a collapsed simplex often stalls
            res2 = optimize.minimize(neg, res.x, method="Nelder-Mead", bounds=box, options=options)
            nfev += res2.nfev
            if res2.fun <= res.fun:
                res = res2
        all_ok = all_ok and bool(res.success)
        if best is None or res.fun < best.fun:
            best = res
    x = np.asarray(best.x, dtype=float)
    value = -float(best.fun)
    g = _projected_gradient(lambda z: -neg(z), x, lo, hi)
    gnorm = float(np.linalg.norm(g))
    converged = bool(best.success) and gnorm <= tol_grad * (1.0 + abs(value))
    if not all_ok:
        log.debug("maximize: some starts did not converge")
    return MaximizeResult(x=x, value=value, converged=converged, grad_norm=gnorm, nfev=nfev)


def _hessian(f, x, steps):
    n = x.size
    h = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = steps[i]
        h[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / steps[i] ** 2
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = steps[j]
            h[i, j] = h[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * steps[i] * steps[j])
    return h


def _block_indices(n, n_blocks):
    n_blocks = min(n_blocks, n)
    return np.array_split(np.arange(n), n_blocks)


def jackknife_std(estimator, data, n_blocks=50, *, circular=False):
    """Delete-one-block jackknife standard error of ``estimator(data)``.

    ``data`` must support ``len`` and integer-array indexing. With
    ``circular=True`` the estimates are angles and deviations are wrapped
    to (-pi, pi].
    """
    n = len(data)
    blocks = _block_indices(n, n_blocks)
    b = len(blocks)
    if b < 2:
        return math.nan
    full = np.arange(n)
    estimates = []
    for blk in blocks:
        keep = np.setdiff1d(full, blk, assume_unique=True)
        estimates.append(estimator(data[keep]))
    est = np.asarray(estimates, dtype=float)
    if circular:
        ref = np.angle(np.mean(np.exp(1j * est)))
        dev = np.angle(np.exp(1j * (est - ref)))
    else:
        dev = est - est.mean(axis=0)
    return np.sqrt((b - 1) / b * np.sum(dev**2, axis=0))


# ---------------------------------------------------------------------------
# Gaussian-state likelihood


def log_likelihood_gaussian(state: GaussianState, det: DetectorEfficiency, records: HomodyneRecords):
    """Sum of log homodyne densities of ``records`` under ``state``."""
    if len(records) == 0:
        raise ValueError("records must be nonempty")
    mean, var = homodyne_moments(state, det, records.phase)
    return float(-0.5 * np.sum(LOG_2PI + np.log(var) + (records.x - mean) ** 2 / var))


class _GaussianLogLik:
    """Vectorized log-likelihood over internal fit parameters.

    Internal coordinates are ``(u, r, mu_re, mu_im)`` with ``delta = e^u`` and
    ``theta = 0``, or ``(u, p, q, mu_re, mu_im)`` with
    ``(p, q) = r (cos 2 theta, sin 2 theta)`` when the orientation is free.
    ``fixed_delta`` removes ``u`` from the coordinates.
    """

    def __init__(self, records, det, orientation=False, fixed_delta=None):
        self.x = records.x
        self.n = len(records)
        c, s = np.cos(records.phase), np.sin(records.phase)
        self.c, self.s = c, s
        self.c2 = np.cos(2 * records.phase)
        self.s2 = np.sin(2 * records.phase)
        self.orientation = orientation
        self.fixed_delta = fixed_delta
        eta = det.eta
        if eta < 1 and det.convention is Convention.RESCALED:
            self.extra, self.mean_scale = (1 - eta) / (4 * eta), 1.0
        elif eta < 1:
            self.extra, self.mean_scale = (1 - eta) / 4, eta
        else:
            self.extra, self.mean_scale = 0.0, 1.0

    def split(self, p):
        p = np.asarray(p, dtype=float)
        if self.fixed_delta is not None:
            p = np.concatenate([[math.log(self.fixed_delta)], p])
        return p

    def __call__(self, p):
        p = self.split(p)
        inv4d2 = math.exp(-2 * p[0]) / 4.0
        if self.orientation:
            pp, qq, mre, mim = p[1:]
            r = math.hypot(pp, qq)
            k = 2.0 if r < 1e-12 else math.sinh(2 * r) / r
            var = (math.cosh(2 * r) + k * (pp * self.c2 + qq * self.s2)) * inv4d2
        else:
            r, mre, mim = p[1:]
            var = (math.cosh(2 * r) + math.sinh(2 * r) * self.c2) * inv4d2
        var = var + self.extra
        res = self.x - self.mean_scale * (mre * self.c + mim * self.s)
        return float(-0.5 * (self.n * LOG_2PI + np.sum(np.log(var)) + np.sum(res * res / var)))

    def to_state(self, p):
        p = self.split(p)
        delta = min(math.exp(p[0]), 1.0)
        if self.orientation:
            pp, qq, mre, mim = p[1:]
            r = math.hypot(pp, qq)
            theta = 0.5 * math.atan2(qq, pp)
            return GaussianState(delta, r, complex(mre, mim), theta)
        r, mre, mim = p[1:]
        return GaussianState(delta, r, complex(mre, mim), 0.0)

    def natural(self, p):
        st = self.to_state(p)
        m = [st.mu.real, st.mu.imag]
        head = [] if self.fixed_delta is not None else [math.exp(self.split(p)[0])]
        if self.orientation:
            return np.array(head + [st.r, st.theta] + m)
        return np.array(head + [st.r] + m)


def moment_estimate(records: HomodyneRecords, det: DetectorEfficiency, orientation=False):
    """Method-of-moments Gaussian state from phase-resolved first and second moments.

    The mean comes from a least-squares fit of ``x`` on ``(cos phi, sin phi)``;
    the covariance from a fit of the squared residuals on
    ``(1, cos 2 phi, sin 2 phi)``.
    """
    phi = records.phase
    design = np.column_stack([np.cos(phi), np.sin(phi)])
    coef, *_ = np.linalg.lstsq(design, records.x, rcond=None)
    res2 = (records.x - design @ coef) ** 2
    design2 = np.column_stack([np.ones_like(phi), np.cos(2 * phi), np.sin(2 * phi)])
    (k0, k1, k2), *_ = np.linalg.lstsq(design2, res2, rcond=None)
    # squared residuals have variance ~ 2 var(phi)^2: reweight so the
    # noisy antisqueezed phases do not swamp the squeezed ones
    for _ in range(3):
        v = np.maximum(design2 @ [k0, k1, k2], 1e-3 * max(k0, 1e-12))
        w = 1.0 / v
        (k0, k1, k2), *_ = np.linalg.lstsq(design2 * w[:, None], res2 * w, rcond=None)
    eta = det.eta
    if eta < 1 and det.convention is Convention.RESCALED:
        k0 -= (1 - eta) / (4 * eta)
    elif eta < 1:
        k0 -= (1 - eta) / 4
        coef = coef / eta
    if not orientation:
        k2 = 0.0
    b = math.hypot(k1, k2)
    k0 = max(k0, 0.25 * 1.0001, b * 1.0001)
    inv4d2 = math.sqrt(k0 * k0 - b * b)
    delta = min(1.0, 1.0 / math.sqrt(4.0 * inv4d2))
    r = 0.5 * math.atanh(b / k0)
    if orientation:
        theta = 0.5 * math.atan2(k2, k1)
    else:
        r = math.copysign(r, k1)
        theta = 0.0
    return GaussianState(delta, r, complex(coef[0], coef[1]), theta)


def phase_coverage(phases):
    """Resultant length of ``e^{2 i phi}``; near 1 means the phases cannot separate quadratures."""
    return float(abs(np.mean(np.exp(2j * np.asarray(phases)))))


def fit_gaussian_state(
    records: HomodyneRecords,
    det: DetectorEfficiency,
    *,
    orientation=False,
    fixed_delta=None,
    n_starts=8,
    seed=0,
    init: GaussianState | None = None,
):
    """Maximum-likelihood Gaussian state from homodyne data.

    With ``orientation=False`` the four parameters ``(delta, r, Re mu, Im mu)``
    are fitted at ``theta = 0``; otherwise ``theta`` is fitted as well.
    Standard errors come from the observed information (numerical Hessian
    of the log-likelihood at the maximum).

    Returns ``(state, EstimationResult)``; the result's ``estimate`` is
    ``[delta, r, mu_re, mu_im]`` or ``[delta, r, theta, mu_re, mu_im]``
    (without ``delta`` when it is fixed).
    """
    n = len(records)
    flags = []
    if n < 100:
        warnings.warn(f"fit_gaussian_state with only {n} records", stacklevel=2)
        flags.append("few_records")
    cov = phase_coverage(records.phase)
    if cov > 0.9:
        warnings.warn("homodyne phases do not cover [0, 2pi); fit is degenerate", stacklevel=2)
        flags.append("degenerate_phases")

    ll = _GaussianLogLik(records, det, orientation=orientation, fixed_delta=fixed_delta)
    st0 = init if init is not None else moment_estimate(records, det, orientation=orientation)
    head = [] if fixed_delta is not None else [math.log(st0.delta)]
    if orientation:
        body = [st0.r * math.cos(2 * st0.theta), st0.r * math.sin(2 * st0.theta)]
    else:
        body = [st0.r]
    p0 = np.array(head + body + [st0.mu.real, st0.mu.imag])
    box = ([(None, 0.0)] if fixed_delta is None else []) + [(None, None)] * (p0.size - len(head))
    scale = np.full(p0.size, 0.05)
    res = maximize(ll, p0, box, n_starts=n_starts, start_scale=scale, seed=seed, tol_grad=1e-7)

    state = ll.to_state(res.x)
    if fixed_delta is None and res.x[0] > -1e-6:
        flags.append("delta_at_boundary")
    if not res.converged:
        flags.append("not_converged")

    steps = 1e-4 * (np.abs(res.x) + 1.0)
    h = _hessian(ll, res.x, steps)
    try:
        cov_int = np.linalg.inv(-h)
        jac = np.empty((p0.size, p0.size))
        for j in range(p0.size):
            e = np.zeros(p0.size)
            e[j] = steps[j]
            jac[:, j] = (ll.natural(res.x + e) - ll.natural(res.x - e)) / (2 * steps[j])
        cov_nat = jac @ cov_int @ jac.T
        std = np.sqrt(np.clip(np.diag(cov_nat), 0, None))
    except np.linalg.LinAlgError:
        cov_nat = np.full((p0.size, p0.size), np.nan)
        std = np.full(p0.size, np.nan)
        flags.append("singular_information")

    result = EstimationResult(
        estimate=ll.natural(res.x),
        std_error=std,
        crlb=np.diag(cov_nat),
        fisher=-h / n,
        n_samples=n,
        converged=res.converged,
        log_likelihood_at_max=res.value,
        flags=tuple(flags),
        info={"grad_norm": res.grad_norm, "nfev": res.nfev, "phase_coverage": cov, "covariance": cov_nat},
    )
    return state, result


# ---------------------------------------------------------------------------
# Phase estimation


def phase_mle_heterodyne(records: HeterodyneRecords, n_blocks=50):
    """Phase of a coherent state from heterodyne outcomes: ``arg(mean alpha)``."""
    n = len(records)
    if n == 0:
        raise ValueError("records must be nonempty")
    abar = complex(np.mean(records.alpha))
    if abs(abar) == 0.0:
        raise EstimationError("mean heterodyne outcome is zero; phase undefined")
    psi = math.atan2(abar.imag, abar.real)
    nbar = abs(abar) ** 2
    fisher = 2.0 * nbar
    std = math.nan
    if n_blocks and n >= 2:
        std = float(
            jackknife_std(lambda d: np.angle(np.mean(d.alpha)), records, n_blocks, circular=True)
        )
    ll = -n * math.log(math.pi) - float(np.sum(np.abs(records.alpha - abar) ** 2))
    return EstimationResult(
        estimate=psi, std_error=std, crlb=1.0 / (n * fisher), fisher=fisher,
        n_samples=n, log_likelihood_at_max=ll,
    )


def _homodyne_random_phase(x, phi):
    """Averages ``mean(x cos phi)`` and ``mean(x sin phi)`` of the moment formula."""
    a = float(np.mean(x * np.cos(phi)))
    b = float(np.mean(x * np.sin(phi)))
    return a, b


def _homodyne_random_ls(x, phi):
    # the likelihood in (A cos psi, A sin psi) is quadratic: least squares on (cos phi, sin phi)
    c, s = np.cos(phi), np.sin(phi)
    m = np.array([[c @ c, c @ s], [c @ s, s @ s]])
    rhs = np.array([c @ x, s @ x])
    try:
        a, b = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        return math.nan, math.nan
    return float(a), float(b)


def phase_mle_homodyne_random(records: HomodyneRecords, n_blocks=50):
    """Phase of a coherent state from homodyne data at random local-oscillator phase.

    The outcome mean is ``A cos(phi - psi)``, linear in ``(A cos psi, A sin psi)``,
    so the joint maximum over amplitude and phase solves the 2x2 normal
    equations. With balanced phases this is ``atan2(mean(x sin phi),
    mean(x cos phi))``; that moment formula is reported in ``info`` but
    for random phases it carries extra noise from the phase sampling.
    """
    n = len(records)
    if n == 0:
        raise ValueError("records must be nonempty")
    if phase_coverage(records.phase) > 1 - 1e-12 or n < 2:
        raise EstimationError("phases are degenerate; amplitude and phase cannot be separated")
    a, b = _homodyne_random_ls(records.x, records.phase)
    scale = float(np.sqrt(np.mean(records.x**2))) or 1.0
    if not math.isfinite(a) or math.hypot(a, b) <= 1e-14 * scale:
        raise EstimationError("fitted amplitude vanishes; phase undefined")
    psi = math.atan2(b, a)
    amp = math.hypot(a, b)
    fisher = 2.0 * amp * amp
    std = math.nan
    if n_blocks and n >= 2:
        std = float(jackknife_std(
            lambda d: math.atan2(*_homodyne_random_ls(d.x, d.phase)[::-1]),
            records, n_blocks, circular=True,
        ))
    res = records.x - amp * np.cos(records.phase - psi)
    ll = float(n * 0.5 * math.log(2 / math.pi) - 2.0 * np.sum(res**2))
    ma, mb = _homodyne_random_phase(records.x, records.phase)
    return EstimationResult(
        estimate=psi, std_error=std, crlb=1.0 / (n * fisher), fisher=fisher,
        n_samples=n, log_likelihood_at_max=ll,
        info={"amplitude": amp, "moment_estimate": math.atan2(mb, ma)},
    )


def phase_mle_squeezed(y, A, r=None, eta=1.0):
    """Phase of ``D(A e^{i psi}) S(r)|0>`` from fixed-phase measurements of the squeezed quadrature.

    ``psi = arcsin(mean(y) / A)``. Its error is propagated from the sample
    error of ``mean(y)``. If ``r`` is given the bound uses the known
    quadrature noise, otherwise the sample variance.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.size
    if n == 0:
        raise ValueError("records must be nonempty")
    if A <= 0:
        raise ValueError("A must be positive")
    ybar = float(np.mean(y))
    svar = float(np.var(y, ddof=1)) if n > 1 else math.nan
    ratio = ybar / A
    flags = ()
    if abs(ratio) > 1.0:
        psi = math.copysign(math.pi / 2, ratio)
        std = math.nan
        flags = ("non_physical",)
    else:
        psi = math.asin(ratio)
        std = (
            bounds.propagate_phase_error(ybar, math.sqrt(svar / n), A)
            if abs(ratio) < 1.0 and n > 1 else math.nan
        )
    var = (math.exp(-2 * r) + (1 - eta) / eta) / 4.0 if r is not None else svar
    if var > 0:
        fisher = A * A * math.cos(psi) ** 2 / var
        ll = float(-0.5 * np.sum(LOG_2PI + math.log(var) + (y - A * math.sin(psi)) ** 2 / var))
    else:
        fisher, ll = math.inf, math.nan
    return EstimationResult(
        estimate=psi, std_error=std, crlb=1.0 / (n * fisher) if fisher > 0 else math.inf,
        fisher=fisher, n_samples=n, converged=not flags, log_likelihood_at_max=ll, flags=flags,
    )


# ---------------------------------------------------------------------------
# Quantum efficiency


@dataclass(frozen=True)
class SqueezedProbe:
    """Displaced squeezed reference ``D(x0) S(r)|0>`` read out on its squeezed quadrature."""

    x0: float
    r: float

    def __post_init__(self):
        if self.x0 <= 0 or self.r <= 0:
            raise ValueError("x0 and r must be positive")

    @classmethod
    def from_photons(cls, n, squeezing_fraction):
        if not (0.0 < squeezing_fraction < 1.0):
            raise ValueError("squeezing_fraction must lie in (0, 1)")
        return cls(math.sqrt(n * (1 - squeezing_fraction)), math.asinh(math.sqrt(n * squeezing_fraction)))

    @property
    def n(self):
        return self.x0**2 + math.sinh(self.r) ** 2

    @property
    def squeezing_fraction(self):
        return math.sinh(self.r) ** 2 / self.n

    def variance(self, eta):
        return (math.exp(-2 * self.r) + 1.0 - eta) / 4.0

    def fisher(self, eta):
        """Per-sample Fisher information on ``eta`` (mean and variance contributions)."""
        c = math.exp(-2 * self.r) + 1.0 - eta
        return 4 * self.x0**2 / c + 1.0 / (2 * c * c)


def _linear_loglik(eta, n, xbar, x2bar, probe: SqueezedProbe):
    v = probe.variance(eta)
    q = x2bar - 2 * eta * probe.x0 * xbar + (eta * probe.x0) ** 2
    return -0.5 * n * (LOG_2PI + math.log(v) + q / v)


def eta_closed_form(xbar, x2bar, probe: SqueezedProbe):
    """Stationary point of the linear-detector log-likelihood (the physical root of a quadratic).

    Returns nan when the discriminant is negative.
    """
    x0 = probe.x0
    c = 1.0 + math.exp(-2 * probe.r)
    disc = 1.0 + 64 * x0 * x0 * (x2bar + c * x0 * (c * x0 - 2 * xbar))
    if disc < 0:
        return math.nan
    return c + (1.0 - math.sqrt(disc)) / (8 * x0 * x0)


def eta_closed_form_unscaled(xbar, x2bar, probe: SqueezedProbe):
    """Variant of :func:`eta_closed_form` with prefactor ``1 / x0^2`` in place of ``1 / (8 x0^2)``.

    It does not satisfy the stationarity condition; kept to quantify the difference.
    """
    x0 = probe.x0
    e = math.exp(-2 * probe.r)
    disc = 1.0 + 64 * x0 * x0 * (x2bar + (1 + e) * (x0 - 2 * xbar + x0 * e) * x0)
    if disc < 0:
        return math.nan
    return 1.0 + e + (1.0 - math.sqrt(disc)) / (x0 * x0)


def _eta_exact(n, xbar, x2bar, probe):
    # the derivative vanishes only at the roots of a quadratic, so the maximum
    # over [0, 1] is among those roots and the endpoints
    cands = [0.0, 1.0]
    root = eta_closed_form(xbar, x2bar, probe)
    if math.isfinite(root) and 0.0 < root < 1.0:
        cands.append(root)
    vals = [_linear_loglik(e, n, xbar, x2bar, probe) for e in cands]
    i = int(np.argmax(vals))
    return cands[i], vals[i]


def eta_mle_linear(records, probe: SqueezedProbe, *, method="numeric", n_blocks=50):
    """Quantum efficiency of a linear detector from fixed-phase homodyne data on a squeezed probe.

    The data model has mean ``eta x0`` and variance ``(e^{-2r} + 1 - eta) / 4``.
    ``method="numeric"`` maximizes the log-likelihood over ``eta`` in (0, 1]
    through a logit transform; ``method="exact"`` compares the analytic
    stationary point against the interval ends. Both closed forms (the
    stationary root and its unscaled variant) are reported in ``info``.
    """
    x = np.asarray(records, dtype=float).reshape(-1)
    n = x.size
    if n == 0:
        raise ValueError("records must be nonempty")
    xbar = float(np.mean(x))
    x2bar = float(np.mean(x * x))

    if method == "exact":
        eta, ll = _eta_exact(n, xbar, x2bar, probe)
        converged = True
    elif method == "numeric":
        def obj(z):
            return _linear_loglik(1.0 / (1.0 + math.exp(-z[0])), n, xbar, x2bar, probe)

        e0 = min(max(xbar / probe.x0, 0.05), 0.95)
        res = maximize(obj, [math.log(e0 / (1 - e0))], [(-40.0, 40.0)], n_starts=3, start_scale=1.0)
        eta = 1.0 / (1.0 + math.exp(-res.x[0]))
        ll = res.value
        converged = res.converged
    else:
        raise ValueError(f"unknown method {method!r}")

    flags = []
    if eta < 1e-6 or eta > 1 - 1e-6:
        flags.append("boundary")
    closed = eta_closed_form(xbar, x2bar, probe)
    unscaled = eta_closed_form_unscaled(xbar, x2bar, probe)
    info = {
        "closed_form": closed,
        "closed_form_unscaled": unscaled,
        "closed_form_discrepancy": abs(closed - eta),
        "unscaled_discrepancy": abs(unscaled - eta),
    }
    std = math.nan
    if n_blocks and n >= 2:
        std = float(jackknife_std(lambda d: eta_mle_linear(d, probe, method="exact", n_blocks=0).estimate, x, n_blocks))
    fisher = probe.fisher(min(eta, 1.0))
    return EstimationResult(
        estimate=eta, std_error=std, crlb=1.0 / (n * fisher), fisher=fisher, n_samples=n,
        converged=converged, log_likelihood_at_max=ll, flags=tuple(flags), info=info,
    )


def eta_naive(records, probe: SqueezedProbe):
    """Quantum efficiency from the sample mean alone, ``mean(x) / x0``."""
    x = np.asarray(records, dtype=float).reshape(-1)
    n = x.size
    if n == 0:
        raise ValueError("records must be nonempty")
    eta = float(np.mean(x)) / probe.x0
    std = float(np.std(x, ddof=1) / math.sqrt(n) / probe.x0) if n > 1 else math.nan
    flags = ("above_one",) if eta > 1 else ()
    return EstimationResult(estimate=eta, std_error=std, n_samples=n, flags=flags)


def eta_from_click_fraction(frac, alpha_sq):
    """Invert ``P0(eta) = 1 - frac`` for a coherent reference."""
    return -math.log1p(-frac) / alpha_sq


def eta_mle_onoff(clicks: ClickRecord, alpha_sq):
    """Quantum efficiency of an ON/OFF detector from click counts on coherent pulses."""
    if alpha_sq <= 0:
        raise ValueError("alpha_sq must be positive")
    n, nc = clicks.n_total, clicks.n_clicks
    if nc == 0:
        return EstimationResult(
            estimate=0.0, std_error=0.0, crlb=0.0, fisher=math.inf, n_samples=n,
            converged=True, log_likelihood_at_max=0.0, flags=("boundary",),
        )
    if nc == n:
        return EstimationResult(
            estimate=math.inf, std_error=math.nan, n_samples=n, converged=False,
            flags=("out_of_range",),
        )
    eta = eta_from_click_fraction(nc / n, alpha_sq)
    fr = bounds.onoff_fisher(eta, alpha_sq)
    p0 = math.exp(-alpha_sq * eta)
    ll = (n - nc) * math.log(p0) + nc * math.log1p(-p0)
    crlb = 1.0 / (n * fr.fisher)
    flags = ("above_one",) if eta > 1 else ()
    return EstimationResult(
        estimate=eta, std_error=math.sqrt(crlb), crlb=crlb, fisher=fr.fisher, n_samples=n,
        log_likelihood_at_max=ll, flags=flags,
        info={"fisher_simplified": bounds.onoff_fisher_simplified(eta, alpha_sq)},
    )
