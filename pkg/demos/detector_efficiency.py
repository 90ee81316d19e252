"""
Calibrating a detector's quantum efficiency
===========================================

Two calibrations: a linear (homodyne) detector probed with a strongly
squeezed reference, where maximum likelihood beats the naive mean-value
estimate, and an ON/OFF detector fed weak coherent pulses.
"""

import math

import numpy as np

from qoptml import (
    ClickRecord,
    Convention,
    DetectorEfficiency,
    GaussianState,
    RngSeed,
    SqueezedProbe,
    bounds,
    eta_mle_linear,
    eta_mle_onoff,
    eta_naive,
    sample_homodyne,
    sample_onoff,
)

# %%
# Linear detector: one photon, 99% of it in squeezing, 50 blocks of 50 records
probe = SqueezedProbe.from_photons(1.0, 0.99)
print(f"probe x0={probe.x0:.3f}, r={probe.r:.3f}")
state = GaussianState(1.0, -probe.r, probe.x0)  # squeezed along the measured quadrature
for eta in (0.2, 0.5, 0.9):
    x = sample_homodyne(state, DetectorEfficiency(eta, Convention.RAW), 2500, RngSeed(3, int(100 * eta)), phase=0.0).x
    blocks = x.reshape(50, 50)
    ml = np.array([eta_mle_linear(b, probe, n_blocks=0).estimate for b in blocks])
    nv = np.array([eta_naive(b, probe).estimate for b in blocks])
    print(f"eta={eta}: ML {ml.mean():.3f} +- {ml.std():.3f}   naive {nv.mean():.3f} +- {nv.std():.3f}")

# The full data set at once, with jackknife error and the two closed forms
res = eta_mle_linear(x, probe)
print("all records:", round(res.estimate, 4), "+-", round(res.std_error, 4),
      "| closed form", round(res.info["closed_form"], 4), "| unscaled variant", round(res.info["closed_form_unscaled"], 4))

# %%
# ON/OFF detector: clicks on 10^4 pulses with |alpha|^2 = 1
clicks = sample_onoff(1.0, 0.7, 10**4, RngSeed(4, 0))
res = eta_mle_onoff(clicks, 1.0)
print(f"\n{clicks.n_clicks} clicks -> eta = {res.estimate:.4f} +- {res.std_error:.4f}")
print("weak-pulse simplified error:", bounds.onoff_std_simplified(0.7, 1.0, 10**4))
print("no clicks at all:", eta_mle_onoff(ClickRecord(1000, 0), 1.0).flags)
