"""Walk along the noisy qubit basis family {(I +- eta Z)/2} and watch every
sharpness quantity shrink as eta goes from 1 (sharp) to 0 (trivial).

    python demos/noisy_basis.py
"""

import numpy as np

from sharpkit import classify
from sharpkit import monotones as mono
from sharpkit.povm import computational_basis, noisy_basis

z_ref = computational_basis(2)   # reference used for the tuning degree

print(f"{'eta':>5} {'kind':>8} {'kappa_u(P:Z)':>13} {'tuning':>8} {'autotune':>9} {'R(P)':>7}")
for eta in np.linspace(1.0, 0.0, 6):
    p = noisy_basis(eta)
    c = classify(p)
    kind = "sharp" if c.sharp else "trivial" if c.trivial else "fuzzy"
    corr = mono.uniform_correlation(p, z_ref)
    tune = mono.tuning_degree(p, z_ref).value
    auto = mono.autotuning(p)
    rob = mono.measurement_robustness(p)
    print(f"{eta:5.2f} {kind:>8} {corr:13.6f} {tune:8.4f} {auto:9.4f} {rob:7.4f}")

# closed forms for this family, handy as a sanity check
eta = 0.6
p = noisy_basis(eta)
print()
print("correlation with Z at eta=0.6:", mono.uniform_correlation(p, z_ref), "expected", (1 + eta) / 2)
# mixing in the flipped basis with weight eta washes the bias out exactly,
# so the robustness of this family is at most eta
flipped = computational_basis(2).elements[::-1]
washed = (p.elements + eta * flipped) / (1 + eta)
print("mixed with flipped basis:", np.round(washed[0].real, 6).tolist(), "(proportional to I)")
print("robustness at eta=0.6:   ", round(mono.measurement_robustness(p), 9))

# the tuning degree always sits between the two cheap bounds
rep = mono.tuning_degree(p, z_ref)
print(f"bounds: {rep.lower:.4f} <= {rep.value:.4f} <= {rep.upper:.4f}")
