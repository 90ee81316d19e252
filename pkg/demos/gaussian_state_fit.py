"""
Reconstructing a squeezed thermal state from homodyne data
===========================================================

We simulate homodyne detection at random phase on a squeezed thermal state,
fit the four Gaussian parameters by maximum likelihood and compare the
photon-number distribution of the fit with the true one.
"""

import numpy as np

from qoptml import (
    DetectorEfficiency,
    GaussianState,
    RngSeed,
    fit_gaussian_state,
    photon_budget,
    photon_number_distribution,
    sample_homodyne,
    state_overlap,
)

# 0.1 thermal photons and 3 squeezing photons, seen by a detector of efficiency 0.8
truth = GaussianState.from_photon_numbers(n_th=0.1, n_sq=3.0)
det = DetectorEfficiency(0.8)
records = sample_homodyne(truth, det, 50000, RngSeed(2024, 0))
print(f"{len(records)} records, first phases {np.round(records.phase[:3], 3)}")

# The fit works on (log Delta, r, Re mu, Im mu); errors come from the observed information
fit, result = fit_gaussian_state(records, det)
for name, v, e in zip(("delta", "r", "mu_re", "mu_im"), result.estimate, result.std_error):
    print(f"{name:6s} = {v:+.4f} +- {e:.4f}")
print("overlap with the true state:", round(state_overlap(truth, fit), 5))

# Photon statistics of truth and reconstruction
tb, fb = photon_budget(truth), photon_budget(fit)
p_true = photon_number_distribution(tb.n_th, truth.r, 12)
p_fit = photon_number_distribution(fb.n_th, fit.r, 12)
print(" n   p_true   p_fit")
for n, (a, b) in enumerate(zip(p_true, p_fit)):
    print(f"{n:2d}  {a:.4f}   {b:.4f}")
