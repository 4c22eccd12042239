"""Closed-form predictions: scar IPR scaling, decay envelopes, butterfly speed.

Everything here is arithmetic: the leading-order localization model fitted
from one exact-diagonalization point extrapolates the scar IPR to sizes far
beyond dense reach; the two decay envelopes separate interacting protection
(log-linear) from a bare drive (log-quadratic); and the perturbative flip
amplitudes give the lightcone speed, averaged over field samples that avoid
accidental single-spin echoes.
"""
import numpy as np

from catscar import analytics as an

model = an.fit_vbar2(0.05, 8, 0.481725)
print(f"coupling constant fit at (lambda=0.05, N=8): vbar2 = {model.vbar2:.5f}")
for n in (10, 12, 16, 20, 36):
    val, err = an.analytic_ipr(model, 0.05, n)
    print(f"  IPR(N={n:2d}) = {val:.4f} +- {err:.4f}")

det = an.rabi_detuning(0.05, -np.pi / 2, np.pi / 2 - 0.6)
print(f"\ndrive detuning: alpha = {det.alpha:.5f}, n_z = {det.n_z:+.5f}, "
      f"lambda_eff = {det.lambda_eff:.5f}")
print(" t    interacting envelope    drive-only envelope")
for t in range(0, 31, 6):
    dtc = an.dtc_envelope(0.4251, 0.007, 36, t)
    rabi = an.rabi_envelope(det, 0.003, 36, t)
    print(f"{t:2d}    {dtc:20.6f}    {rabi:20.6f}")
print("(plot ln of each column vs t: the first is straight, the second curves down)")

print("\nbutterfly velocity over the echo-avoidance field samples:")
params = an.butterfly_velocity_samples()
for i, p in enumerate(params, start=1):
    tag = " (near echo)" if p.vb < 0.015 else ""
    print(f"  sample {i:2d}: vB = {p.vb:.4f} = {p.vb1:.4f} + {p.vb2:.4f}{tag}")
print(f"  mean vB = {np.mean([p.vb for p in params]):.4f} sites/cycle")
