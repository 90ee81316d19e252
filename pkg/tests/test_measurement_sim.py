import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from qoptml.core_model import Convention, DetectorEfficiency, GaussianState, homodyne_moments
from qoptml.measurement_sim import (
    ClickRecord,
    HeterodyneRecords,
    HomodyneRecords,
    RngSeed,
    click_probability,
    sample_heterodyne,
    sample_homodyne,
    sample_onoff,
)


def test_vacuum_fixed_phase_moments():
    rec = sample_homodyne(GaussianState(), DetectorEfficiency(), 10**6, RngSeed(1, 0), phase=0.0)
    assert abs(rec.x.mean()) < 4 * 0.5 / 1e3
    assert rec.x.var() == pytest.approx(0.25, abs=0.002)
    assert np.all(rec.phase == 0.0)


def test_squeezed_axis_variance():
    n = 200000
    rec = sample_homodyne(GaussianState(1.0, 1.0), DetectorEfficiency(), n, RngSeed(2, 0), phase=math.pi / 2)
    v = math.exp(-2) / 4
    se = v * math.sqrt(2 / (n - 1))
    assert abs(rec.x.var(ddof=1) - v) < 3 * se


def test_random_phases_uniform():
    rec = sample_homodyne(GaussianState(), DetectorEfficiency(), 50000, RngSeed(3, 0))
    assert rec.phase.min() >= 0 and rec.phase.max() < 2 * math.pi
    assert stats.kstest(rec.phase / (2 * math.pi), "uniform").pvalue > 1e-3


@pytest.mark.parametrize("convention", list(Convention))
def test_moment_matching_lossy(convention):
    state = GaussianState(0.8, 0.4, 1.0 - 0.5j, 0.3)
    det = DetectorEfficiency(0.7, convention)
    n = 10**6
    rec = sample_homodyne(state, det, n, RngSeed(4, 1), phase=1.1)
    mean, var = homodyne_moments(state, det, 1.1)
    assert abs(rec.x.mean() - mean) < 5 * math.sqrt(var / n)
    assert abs(rec.x.var() - var) < 5 * var * math.sqrt(2 / n)


def test_homodyne_determinism():
    s, d = GaussianState(0.9, 0.3, 1j), DetectorEfficiency(0.8)
    assert sample_homodyne(s, d, 1000, RngSeed(5, 7)) == sample_homodyne(s, d, 1000, RngSeed(5, 7))
    assert sample_homodyne(s, d, 1000, RngSeed(5, 7)) != sample_homodyne(s, d, 1000, RngSeed(5, 8))


def test_stream_independent_of_draw_order():
    s, d = GaussianState(), DetectorEfficiency()
    a = sample_homodyne(s, d, 100, RngSeed(9, 3))
    sample_homodyne(s, d, 5000, RngSeed(9, 2))
    assert sample_homodyne(s, d, 100, RngSeed(9, 3)) == a


def test_streams_pass_two_sample_ks():
    s, d = GaussianState(0.9, 0.5, 0.5), DetectorEfficiency(0.9)
    a = sample_homodyne(s, d, 20000, RngSeed(11, 0), phase=0.3).x
    b = sample_homodyne(s, d, 20000, RngSeed(11, 1), phase=0.3).x
    assert stats.ks_2samp(a, b).pvalue > 1e-3
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(20000)


def test_heterodyne_vacuum_second_moment():
    rec = sample_heterodyne(0.0, 0.0, 200000, RngSeed(12, 0))
    assert np.mean(np.abs(rec.alpha) ** 2) == pytest.approx(1.0, abs=5 * math.sqrt(1 / 200000))


def test_heterodyne_mean():
    n = 10**5
    rec = sample_heterodyne(5.0, 0.0, n, RngSeed(13, 0))
    assert abs(rec.alpha.mean() - 5.0) < 4 / math.sqrt(2 * n)


def test_heterodyne_determinism():
    assert sample_heterodyne(2.0, 0.3, 100, RngSeed(1, 1)) == sample_heterodyne(2.0, 0.3, 100, RngSeed(1, 1))


def test_onoff_vacuum_never_clicks():
    assert sample_onoff(0.0, 1.0, 1000, RngSeed(0, 0)).n_clicks == 0


def test_onoff_saturates():
    assert sample_onoff(1e4, 0.5, 1000, RngSeed(0, 0)).n_clicks == 1000


def test_onoff_click_fraction():
    n = 10**6
    rec = sample_onoff(1.0, 0.9, n, RngSeed(14, 0))
    p = 1 - math.exp(-0.9)
    assert p == pytest.approx(0.59343, abs=1e-5)
    assert abs(rec.n_clicks / n - p) < 4 * math.sqrt(p * (1 - p) / n)
    assert click_probability(1.0, 0.9) == pytest.approx(p)


def test_click_record_validation():
    with pytest.raises(ValueError):
        ClickRecord(10, 11)
    with pytest.raises(ValueError):
        ClickRecord(0, 0)


def test_sampler_argument_validation():
    with pytest.raises(ValueError):
        sample_homodyne(GaussianState(), DetectorEfficiency(), 0, RngSeed())
    with pytest.raises(ValueError):
        sample_onoff(1.0, 0.0, 10, RngSeed())
    with pytest.raises(ValueError):
        RngSeed(-1, 0)


def test_homodyne_csv_round_trip(tmp_path):
    rec = sample_homodyne(GaussianState(0.7, 0.2, 1 + 1j), DetectorEfficiency(0.8), 500, RngSeed(15, 0))
    rec.to_csv(tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text().splitlines()[0] == "phase,x"
    assert HomodyneRecords.from_csv(tmp_path / "h.csv") == rec


def test_heterodyne_csv_round_trip(tmp_path):
    rec = sample_heterodyne(1.5, 0.4, 300, RngSeed(16, 0))
    rec.to_csv(tmp_path / "a.csv")
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "alpha_re,alpha_im"
    assert HeterodyneRecords.from_csv(tmp_path / "a.csv") == rec


def test_click_csv_round_trip(tmp_path):
    rec = ClickRecord(1000, 417)
    rec.to_csv(tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text() == "n_total,n_clicks\n1000,417\n"
    assert ClickRecord.from_csv(tmp_path / "c.csv") == rec


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 2**32), st.integers(1, 50))
def test_seed_determinism_property(master, stream, n):
    s = GaussianState(0.9, 0.1, 0.3)
    a = sample_homodyne(s, DetectorEfficiency(0.9), n, RngSeed(master, stream))
    b = sample_homodyne(s, DetectorEfficiency(0.9), n, RngSeed(master, stream))
    assert a == b
    assert np.all(np.isfinite(a.x))
