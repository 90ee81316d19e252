"""Seeded Monte-Carlo generation of homodyne, heterodyne and ON/OFF records."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .core_model import DetectorEfficiency, GaussianState, homodyne_moments

_U53 = float(1 << 53)


@dataclass(frozen=True)
class RngSeed:
    """Key of an independent random stream.

    Equal ``(master_seed, stream_id)`` pairs give identical streams no matter
    how many other streams were drawn before or concurrently.
    """

    master_seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.master_seed < 1 << 64):
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream_id):
        return RngSeed(self.master_seed, stream_id)


def as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed), 0)


def open_uniform(rng, size):
    """Uniform variates on the open interval (0, 1) with 53-bit resolution."""
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k + 0.5) / _U53


def standard_normal(rng, size):
    # inverse-CDF transform: one uniform per variate, no rejection loop
    return ndtri(open_uniform(rng, size))


@dataclass(frozen=True, eq=False)
class HomodyneRecords:
    """Columnar homodyne data: local-oscillator phases and quadrature outcomes."""

    phase: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        phase = np.asarray(self.phase, dtype=float).reshape(-1)
        x = np.asarray(self.x, dtype=float).reshape(-1)
        if phase.shape != x.shape:
            raise ValueError("phase and x must have equal length")
        if not (np.all(np.isfinite(phase)) and np.all(np.isfinite(x))):
            raise ValueError("records must be finite")
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "x", x)

    def __len__(self):
        return self.x.size

    def __getitem__(self, idx):
        return HomodyneRecords(self.phase[idx], self.x[idx])

    def __eq__(self, other):
        if not isinstance(other, HomodyneRecords):
            return NotImplemented
        return np.array_equal(self.phase, other.phase) and np.array_equal(self.x, other.x)

    def to_csv(self, path):
        _write_csv(path, ("phase", "x"), (self.phase, self.x))

    @classmethod
    def from_csv(cls, path):
        cols = _read_csv(path, ("phase", "x"))
        return cls(cols["phase"], cols["x"])


@dataclass(frozen=True, eq=False)
class HeterodyneRecords:
    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ValueError("records must be finite")
        object.__setattr__(self, "alpha", a)

    def __len__(self):
        return self.alpha.size

    def __getitem__(self, idx):
        return HeterodyneRecords(self.alpha[idx])

    def __eq__(self, other):
        if not isinstance(other, HeterodyneRecords):
            return NotImplemented
        return np.array_equal(self.alpha, other.alpha)

    def to_csv(self, path):
        _write_csv(path, ("alpha_re", "alpha_im"), (self.alpha.real, self.alpha.imag))

    @classmethod
    def from_csv(cls, path):
        cols = _read_csv(path, ("alpha_re", "alpha_im"))
        return cls(cols["alpha_re"] + 1j * cols["alpha_im"])


@dataclass(frozen=True)
class ClickRecord:
    n_total: int
    n_clicks: int

    def __post_init__(self):
        if self.n_total < 1:
            raise ValueError("n_total must be positive")
        if not (0 <= self.n_clicks <= self.n_total):
            raise ValueError("n_clicks must lie in [0, n_total]")

    def to_csv(self, path):
        _write_csv(path, ("n_total", "n_clicks"), ([self.n_total], [self.n_clicks]), fmt="d")

    @classmethod
    def from_csv(cls, path):
        cols = _read_csv(path, ("n_total", "n_clicks"))
        return cls(int(cols["n_total"][0]), int(cols["n_clicks"][0]))


def format_float(v):
    """17 significant digits: round-trips any double exactly."""
    return format(float(v), ".17g")


def _write_csv(path, header, columns, fmt="g17"):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            if fmt == "d":
                w.writerow([str(int(v)) for v in row])
            else:
                w.writerow([format_float(v) for v in row])


def _read_csv(path, required):
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and not set(required) <= set(rows[0]):
        raise ValueError(f"{path}: expected columns {required}, got {list(rows[0])}")
    return {k: np.array([float(row[k]) for row in rows]) for k in required}


def sample_homodyne(
    state: GaussianState,
    det: DetectorEfficiency,
    n: int,
    seed,
    phase: float | None = None,
) -> HomodyneRecords:
    """Draw ``n`` homodyne outcomes.

    ``phase=None`` draws each local-oscillator phase uniformly on [0, 2 pi);
    a number fixes it for all records.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = as_seed(seed).generator()
    if phase is None:
        phases = 2 * np.pi * open_uniform(rng, n)
    else:
        phases = np.full(n, float(phase))
    mean, var = homodyne_moments(state, det, phases)
    x = mean + np.sqrt(var) * standard_normal(rng, n)
    return HomodyneRecords(phases, x)


def sample_heterodyne(amplitude: float, psi: float, n: int, seed) -> HeterodyneRecords:
    """Heterodyne outcomes of the coherent state ``amplitude * e^{i psi}``."""
    if n < 1:
        raise ValueError("n must be positive")
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    rng = as_seed(seed).generator()
    g = standard_normal(rng, (n, 2)) / math.sqrt(2.0)
    alpha = amplitude * complex(math.cos(psi), math.sin(psi)) + g[:, 0] + 1j * g[:, 1]
    return HeterodyneRecords(alpha)


def click_probability(alpha_sq, eta):
    """Probability that an ON/OFF detector clicks on a coherent pulse."""
    return -math.expm1(-alpha_sq * eta)


def sample_onoff(alpha_sq: float, eta_true: float, n: int, seed) -> ClickRecord:
    if n < 1:
        raise ValueError("n must be positive")
    if alpha_sq < 0:
        raise ValueError("alpha_sq must be nonnegative")
    if not (0.0 < eta_true <= 1.0):
        raise ValueError("eta_true must lie in (0, 1]")
    rng = as_seed(seed).generator()
    p = click_probability(alpha_sq, eta_true)
    return ClickRecord(n, int(rng.binomial(n, p)))
