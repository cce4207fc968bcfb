"""Deciding whether one measurement can be fuzzified into another.

A yes comes with the operation (checked by applying it). A no comes with
a full-rank reference measurement Z on which P is strictly less tunable
than Q is correlated, which no fuzzification could achieve.

    python demos/convertibility.py
"""

import numpy as np

from sharpkit import channel as ch
from sharpkit import preorder
from sharpkit.povm import Povm, computational_basis, noisy_basis

sharp = computational_basis(2)
fuzzy = noisy_basis(0.5)

# sharp -> fuzzy works
v = preorder.is_sharper(sharp, fuzzy)
print("sharp -> fuzzy:", v.status)
op = v.transformation
print(f"  mu = {op.mu:.4f}, p(x) = {np.round(op.dist, 4)}")
print("  residual after applying it:", v.residual)

# fuzzy -> sharp does not
v = preorder.is_sharper(fuzzy, sharp)
print("fuzzy -> sharp:", v.status)
w = v.witness
print(f"  witness: kappa*(P||Z) <= {w.lhs:.5f} < kappa(Q:Z) = {w.rhs:.5f}   margin {w.margin:.3g}")
print("  recomputed margin:", preorder.verify_witness(fuzzy, sharp, w.reference))

# two bases at 45 degrees: unitarily related, so each converts to the other
h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
x_basis = ch.apply(ch.unitary_channel(h), sharp.elements)
xb = Povm(x_basis)
print("Z basis -> X basis:", preorder.is_sharper(sharp, xb).status)

# the preprocessing order alone is stricter: a unital channel cannot send
# a full-rank element to zero, but a fuzzification can discard everything
always_first = Povm(np.array([np.eye(2), np.zeros((2, 2))]))
print("fuzzy -> deterministic, preprocessing only:", preorder.is_preprocessing_cleaner(fuzzy, always_first).status)
print("fuzzy -> deterministic, sharpness order:   ", preorder.is_sharper(fuzzy, always_first).status)

# sampled-reference check is one-sided: it can only refute
ev = preorder.always_more_tunable(fuzzy, sharp, trials=10, seed=1)
print("random references found a counterexample:", ev.violation_found, f"(worst gap {ev.worst_gap:.3g})")
