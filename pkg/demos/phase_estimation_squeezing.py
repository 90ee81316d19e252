"""
Phase estimation with squeezed probes
=====================================

A displaced squeezed state carries a phase shift psi into its squeezed
quadrature. For a fixed total photon number we trade coherent amplitude for
squeezing and watch the Monte-Carlo phase error follow the Cramer-Rao bound,
with and without detector losses.
"""

import math

import numpy as np

from qoptml import DetectorEfficiency, GaussianState, RngSeed, bounds, phase_mle_squeezed, sample_homodyne

n, N, reps = 50.0, 5000, 100

for eta in (1.0, 0.8):
    print(f"\neta = {eta}")
    print(" fraction  sigma_mc   sigma_bound")
    for i, f in enumerate(np.arange(0.0, 1.0, 0.1)):
        A, r = math.sqrt(n * (1 - f)), math.asinh(math.sqrt(n * f))
        probe = GaussianState(1.0, r, A)
        est = [
            phase_mle_squeezed(
                sample_homodyne(probe, DetectorEfficiency(eta), N, RngSeed(7, 1000 * i + k), phase=math.pi / 2).x,
                A, r, eta,
            ).estimate
            for k in range(reps)
        ]
        bound = math.sqrt(bounds.phase_crlb_squeezed(A, r, eta, N))
        print(f"   {f:.1f}    {np.std(est, ddof=1):.2e}   {bound:.2e}")

# Optimal splitting of the photons, and the coherent-state reference
A, r = bounds.optimal_probe(n)
print(f"\noptimal probe at n={n:g}: A^2={A * A:.2f}, n_sq={math.sinh(r) ** 2:.2f}")
print("optimal sigma:", math.sqrt(bounds.phase_crlb_squeezed(A, r, 1.0, N)))
print("coherent random-phase bound:", bounds.phase_crlb_coherent(n, N))
