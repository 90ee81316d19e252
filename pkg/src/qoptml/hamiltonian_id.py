"""Quadratic single-mode Hamiltonians and their Bogoliubov maps.

``H = alpha a + alpha* a^dag + phi a^dag a + xi a^2 / 2 + xi* a^dag^2 / 2``
evolves for unit time into ``U^dag a U = gamma a + delta a^dag + mu``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .core_model import DetectorEfficiency, GaussianState
from .estimators import EstimationResult, _block_indices, fit_gaussian_state
from .measurement_sim import HomodyneRecords

PARAM_NAMES = ("alpha_re", "alpha_im", "phi", "xi_re", "xi_im")
_SERIES_THRESHOLD = 1e-6


class UnidentifiableError(ValueError):
    """The probe configuration leaves some Hamiltonian directions unconstrained."""

    def __init__(self, message, directions):
        super().__init__(message)
        self.directions = directions


class BranchAmbiguityError(ValueError):
    """The map sits on the edge of the principal branch (evolution angle pi)."""


@dataclass(frozen=True)
class QuadraticHamiltonian:
    alpha: complex = 0j
    phi: float = 0.0
    xi: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "phi", float(self.phi))
        object.__setattr__(self, "xi", complex(self.xi))
        if not all(math.isfinite(v) for v in self.as_vector()):
            raise ValueError("Hamiltonian coefficients must be finite")

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(complex(v[0], v[1]), v[2], complex(v[3], v[4]))

    def as_vector(self):
        return np.array([self.alpha.real, self.alpha.imag, self.phi, self.xi.real, self.xi.imag])

    @property
    def discriminant(self):
        """``phi^2 - |xi|^2``: positive for elliptic (rotating), negative for hyperbolic (amplifying) evolution."""
        return self.phi**2 - abs(self.xi) ** 2


@dataclass(frozen=True)
class BogoliubovMap:
    gamma: complex = 1 + 0j
    delta: complex = 0j
    mu: complex = 0j

    def __post_init__(self):
        for k in ("gamma", "delta", "mu"):
            object.__setattr__(self, k, complex(getattr(self, k)))

    @property
    def symplectic_defect(self):
        return abs(self.gamma) ** 2 - abs(self.delta) ** 2 - 1.0

    def matrix(self):
        """Real 2x2 action on the Wigner coordinates ``(x, y)``."""
        s, d = self.gamma + self.delta, self.gamma - self.delta
        return np.array([[s.real, -d.imag], [s.imag, d.real]])

    @classmethod
    def from_matrix(cls, m, mu=0j):
        m = np.asarray(m, dtype=float)
        gamma = complex(m[0, 0] + m[1, 1], m[1, 0] - m[0, 1]) / 2
        delta = complex(m[0, 0] - m[1, 1], m[1, 0] + m[0, 1]) / 2
        return cls(gamma, delta, mu)

    def inverse(self):
        g, d, mu = self.gamma, self.delta, self.mu
        return BogoliubovMap(g.conjugate(), -d, -(g.conjugate() * mu - d * mu.conjugate()))

    def gain(self):
        """Power gain ``(|gamma| + |delta|)^2`` along the amplified quadrature."""
        return (abs(self.gamma) + abs(self.delta)) ** 2


def _cos_sqrt(s):
    if abs(s) < _SERIES_THRESHOLD:
        return 1 - s / 2 + s * s / 24 - s**3 / 720
    return math.cos(math.sqrt(s)) if s > 0 else math.cosh(math.sqrt(-s))


def _sinc_sqrt(s):
    """``sin(sqrt s) / sqrt s``, continued to ``sinh(sqrt -s) / sqrt -s`` for negative ``s``."""
    if abs(s) < _SERIES_THRESHOLD:
        return 1 - s / 6 + s * s / 120 - s**3 / 5040
    if s > 0:
        w = math.sqrt(s)
        return math.sin(w) / w
    k = math.sqrt(-s)
    return math.sinh(k) / k


def _cosm1_over_s(s):
    """``(cos(sqrt s) - 1) / s`` without cancellation; tends to -1/2 at ``s = 0``."""
    if abs(s) < _SERIES_THRESHOLD:
        return -0.5 + s / 24 - s * s / 720 + s**3 / 40320
    if s > 0:
        return -2 * math.sin(math.sqrt(s) / 2) ** 2 / s
    return 2 * math.sinh(math.sqrt(-s) / 2) ** 2 / s


def forward_map(h: QuadraticHamiltonian) -> BogoliubovMap:
    """Bogoliubov coefficients generated by ``h`` in unit time.

    Valid on both sides of ``phi^2 = |xi|^2`` by analytic continuation.
    """
    s = h.discriminant
    c, sn, cm = _cos_sqrt(s), _sinc_sqrt(s), _cosm1_over_s(s)
    a, xi = h.alpha, h.xi
    gamma = c - 1j * h.phi * sn
    delta = -1j * xi.conjugate() * sn
    mu = (h.phi * a.conjugate() - xi.conjugate() * a) * cm - 1j * a.conjugate() * sn
    return BogoliubovMap(gamma, delta, mu)


def invert_map(b: BogoliubovMap, tol=1e-9) -> QuadraticHamiltonian:
    """Hamiltonian on the principal branch (evolution angle in [0, pi)) generating ``b``."""
    if abs(b.symplectic_defect) > tol:
        raise ValueError(f"map is not symplectic: |gamma|^2 - |delta|^2 - 1 = {b.symplectic_defect:.3g}")
    g, d = b.gamma, b.delta
    # (Im gamma)^2 - |delta|^2 = s * sinc^2 equals sin^2 w (elliptic) or -sinh^2 k
    dd = g.imag**2 - abs(d) ** 2
    if dd >= 0:
        w = math.atan2(math.sqrt(dd), g.real)
        s = w * w
        if math.pi - w < 1e-6:
            if math.pi - w < 1e-12:
                raise BranchAmbiguityError("evolution angle is pi; phi and xi are not determined")
            warnings.warn("evolution angle within 1e-6 of pi; inversion ill-conditioned", stacklevel=2)
    else:
        k = math.asinh(math.sqrt(-dd))
        s = -k * k
    sn = _sinc_sqrt(s)
    cm = _cosm1_over_s(s)
    phi = -g.imag / sn
    xi = -1j * d.conjugate() / sn
    p = phi * cm - 1j * sn
    q = -xi.conjugate() * cm
    mu = b.mu
    alpha = (mu * q.conjugate() - p * mu.conjugate()) / (abs(q) ** 2 - abs(p) ** 2)
    if abs(s) < _SERIES_THRESHOLD and s != 0:
        warnings.warn("map lies within 1e-6 of phi^2 = |xi|^2; series continuation used", stacklevel=2)
    return QuadraticHamiltonian(alpha, phi, xi)


def transform_state(state: GaussianState, b: BogoliubovMap) -> GaussianState:
    """Output Gaussian state ``U rho U^dag``; purity is carried over unchanged."""
    m = b.matrix()
    mean = m @ state.mean() + np.array([b.mu.real, b.mu.imag])
    cov = m @ state.covariance() @ m.T
    return GaussianState.from_moments(mean, cov, delta=state.delta)


def amplifier_gain(h: QuadraticHamiltonian):
    return forward_map(h).gain()


# ---------------------------------------------------------------------------
# identification from data


def _predicted_moments(h_vec, probes):
    b = forward_map(QuadraticHamiltonian.from_vector(h_vec))
    m = b.matrix()
    out = []
    for p in probes:
        out.append(m @ p.mean() + [b.mu.real, b.mu.imag])
        v = m @ p.covariance() @ m.T
        out.append([v[0, 0], v[0, 1], v[1, 1]])
    return np.concatenate(out)


def identifiability(probes: Sequence[GaussianState], tol=1e-8):
    """Directions in ``(alpha_re, alpha_im, phi, xi_re, xi_im)`` left free by the probes.

    Rank is constant along the group orbit, so the Jacobian of the output
    moments is evaluated at the identity device.
    """
    h0 = np.zeros(5)
    jac = np.empty((_predicted_moments(h0, probes).size, 5))
    for j in range(5):
        e = np.zeros(5)
        e[j] = 1e-6
        jac[:, j] = (_predicted_moments(h0 + e, probes) - _predicted_moments(h0 - e, probes)) / 2e-6
    _, sv, vt = np.linalg.svd(jac)
    null = [vt[i] for i in range(5) if i >= sv.size or sv[i] < tol * sv[0]]
    return [{k: float(c) for k, c in zip(PARAM_NAMES, np.round(v, 12))} for v in null]


def _euler_matrix(p):
    a, k, c = p

    def rot(t):
        return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])

    return rot(a) @ np.diag([math.exp(k), math.exp(-k)]) @ rot(c)


def _whiten(cov):
    evals, evecs = np.linalg.eigh(cov)
    return evecs @ np.diag(evals**-0.5) @ evecs.T


def solve_map(inputs: Sequence[GaussianState], outputs: Sequence[GaussianState], n_starts=12):
    """Bogoliubov map best matching the input -> output Gaussian moments.

    Residuals are whitened by each output covariance so mean and
    covariance mismatches enter on the same statistical footing.
    """
    targets = [(o.mean(), o.covariance(), _whiten(o.covariance())) for o in outputs]

    def resid(p):
        m = _euler_matrix(p[:3])
        mu = p[3:]
        out = []
        for inp, (mo, vo, w) in zip(inputs, targets):
            out.append(w @ (m @ inp.mean() + mu - mo))
            r = w @ (m @ inp.covariance() @ m.T) @ w - np.eye(2)
            out.append(np.array([r[0, 0], r[0, 1], r[1, 1]]) / math.sqrt(2))
        return np.concatenate(out)

    best = None
    for a in np.linspace(0, math.pi, n_starts, endpoint=False):
        for c in (0.0, math.pi / 2):
            m0 = _euler_matrix((a, 0.0, c))
            mu0 = outputs[0].mean() - m0 @ inputs[0].mean()
            res = optimize.least_squares(resid, np.concatenate([[a, 0.0, c], mu0]), xtol=1e-14, ftol=1e-14, gtol=1e-14)
            if best is None or res.cost < best.cost:
                best = res
    m = _euler_matrix(best.x[:3])
    return BogoliubovMap.from_matrix(m, complex(best.x[3], best.x[4])), float(best.cost)


def simulate_device(h: QuadraticHamiltonian, probe: GaussianState, det, n, seed, phase=None):
    """Homodyne records of ``probe`` after passing through the device ``h``."""
    from .measurement_sim import sample_homodyne

    return sample_homodyne(transform_state(probe, forward_map(h)), det, n, seed, phase=phase)


def identify_hamiltonian(
    probes,
    output_records,
    det: DetectorEfficiency,
    *,
    n_blocks=20,
    n_starts=8,
    seed=0,
):
    """Maximum-likelihood Hamiltonian from homodyne data on known Gaussian probes.

    Each probe's output state is fitted by maximum likelihood (orientation
    free, purity fixed to the probe's because the evolution is unitary), the
    Bogoliubov map is solved from input/output moments and inverted on the
    principal branch. Errors are delete-one-block jackknife estimates.

    A single probe never suffices: a rotation of the device can be traded
    for a displacement. At least two probes with different means, or
    different covariances, are required; otherwise
    :class:`UnidentifiableError` lists the free directions.
    """
    if isinstance(probes, GaussianState):
        probes = [probes]
    if isinstance(output_records, HomodyneRecords):
        output_records = [output_records]
    probes = list(probes)
    output_records = list(output_records)
    if len(probes) != len(output_records):
        raise ValueError("need one record set per probe")
    free = identifiability(probes)
    if free:
        raise UnidentifiableError(
            f"probe configuration leaves {len(free)} direction(s) unconstrained: {free}", free
        )

    fits = [
        fit_gaussian_state(rec, det, orientation=True, fixed_delta=p.delta, n_starts=n_starts, seed=seed)
        for p, rec in zip(probes, output_records)
    ]
    outputs = [f[0] for f in fits]
    bmap, cost = solve_map(probes, outputs)
    h = invert_map(bmap, tol=1e-8)
    flags = [fl for _, r in fits for fl in r.flags]
    converged = all(r.converged for _, r in fits)

    std = np.full(5, np.nan)
    if n_blocks and n_blocks >= 2:
        splits = [_block_indices(len(rec), n_blocks) for rec in output_records]
        nb = min(len(s) for s in splits)
        reps = []
        for b in range(nb):
            outs = []
            for rec, sp, p, st in zip(output_records, splits, probes, outputs):
                keep = np.setdiff1d(np.arange(len(rec)), sp[b], assume_unique=True)
                fs, _ = fit_gaussian_state(
                    rec[keep], det, orientation=True, fixed_delta=p.delta, n_starts=1, init=st
                )
                outs.append(fs)
            bm, _ = solve_map(probes, outs, n_starts=4)
            reps.append(invert_map(bm, tol=1e-8).as_vector())
        reps = np.array(reps)
        std = np.sqrt((nb - 1) / nb * np.sum((reps - reps.mean(axis=0)) ** 2, axis=0))

    result = EstimationResult(
        estimate=h.as_vector(),
        std_error=std,
        n_samples=sum(len(r) for r in output_records),
        converged=converged,
        log_likelihood_at_max=sum(r.log_likelihood_at_max for _, r in fits),
        flags=tuple(flags),
        info={"map": bmap, "outputs": outputs, "moment_cost": cost, "gain": bmap.gain()},
    )
    return h, result
