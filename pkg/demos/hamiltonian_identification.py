"""
Identifying a quadratic device Hamiltonian
==========================================

A device acting as ``H = alpha a + h.c. + phi a^dag a + (xi a^2 + h.c.)/2``
turns Gaussian probes into Gaussian outputs. We send two displaced squeezed
probes through a phase-sensitive amplifier, fit the outputs and recover the
five real couplings, including the amplifier gain.
"""

import math

from qoptml import DetectorEfficiency, GaussianState, QuadraticHamiltonian, RngSeed, UnidentifiableError
from qoptml.hamiltonian_id import amplifier_gain, forward_map, identify_hamiltonian, invert_map, simulate_device

device = QuadraticHamiltonian(alpha=0.1 + 0.05j, phi=0.3, xi=0.5)
b = forward_map(device)
print("Bogoliubov map:", b)
print("round trip:", invert_map(b))

probes = [GaussianState(1.0, 0.5, 2.0), GaussianState(1.0, 0.5, 2j)]
det = DetectorEfficiency()
records = [simulate_device(device, p, det, 50000, RngSeed(11, k)) for k, p in enumerate(probes)]

# One probe is never enough: a rotation of the device can be traded for a displacement
try:
    identify_hamiltonian(probes[:1], records[:1], det)
except UnidentifiableError as err:
    print("\nsingle probe:", err.directions)

est, res = identify_hamiltonian(probes, records, det, n_blocks=10)
print("\nparam      true    estimate  jackknife")
for name, t, e, s in zip(("alpha_re", "alpha_im", "phi", "xi_re", "xi_im"), device.as_vector(), res.estimate,
                         res.std_error):
    print(f"{name:8s} {t:+.4f}  {e:+.4f}   {s:.4f}")
print(f"gain: true {amplifier_gain(device):.4f}, estimated {res.info['gain']:.4f} (e^(2|xi|) = {math.exp(1):.4f} at phi=0)")
