"""Sharp measurements can be steered into anything, and fuzzifying
operations are exactly what a local preprocessing with shared randomness
does to slot 0 of a programmable device.

    python demos/programmable_device.py
"""

import numpy as np

from sharpkit import channel as ch
from sharpkit.povm import extend_to_programmable, random_povm, random_sharp_povm

rng = np.random.default_rng(7)

# a sharp qutrit measurement and an arbitrary qubit target
p = random_sharp_povm(3, 3, rng)
q = random_povm(2, 3, rng)
v = ch.sharp_isometry(p, q)
print("isometry error |V^dag V - I|:", np.max(np.abs(v.conj().T @ v - np.eye(2))))
pre = ch.preprocess_from_sharp(p, q)
print("unital preprocessing hits q to", np.max(np.abs(ch.apply(pre, p.elements) - q.elements)))

# LPSR on the programmable extension vs the closed form
op = ch.random_lpsr(2, 2, 3, rng, randomness=2)
base = random_povm(2, 3, rng)
dev = ch.apply_lpsr(op, extend_to_programmable(base))
f = ch.lpsr_to_fuzzifying(op)
print(f"equivalent fuzzification: mu = {f.mu:.4f}, p = {np.round(f.dist, 4)}")
print("slot 0 vs fuzzification:", np.max(np.abs(dev.base.elements - f(base).elements)))

# and back again
back = ch.fuzzifying_to_lpsr(f)
dev2 = ch.apply_lpsr(back, extend_to_programmable(base))
print("round trip:", np.max(np.abs(dev2.base.elements - dev.base.elements)))
