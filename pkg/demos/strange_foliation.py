"""
A Lipschitz foliation that cannot be straightened
=================================================

The strange gallery map is a C1 twist map that preserves the foliation
``eta_c = c + eps(c) cos(2 pi theta)`` with ``eps(c) = |c| exp(-c**2) / (8 pi)``.
The leaves depend on ``c`` in a Lipschitz way, but ``eps`` has a corner at
zero, so the generating function is not C1 there and no area-preserving
homeomorphism carries the horizontal lines onto the leaves.
"""
import numpy as np

from twistfol import gallery
from twistfol.exceptions import NotStraightenableError
from twistfol.foliation import bilipschitz_fit, build_generating_function, c1_report
from twistfol.maps import jacobian_array
from twistfol.rotation import leaf_invariance_defect
from twistfol.straighten import build_straightening

sm = gallery.strange_twist_map()
fmap, fol = sm.twist_map, sm.foliation

# %%
# Invariance and the differential near the zero leaf
# ---------------------------------------------------
# The map is the identity on the zero leaf and its differential approaches
# the identity linearly, which is what makes the gluing C1.

print("worst leaf defect:", max(leaf_invariance_defect(fmap, fol, c)
                                for c in np.linspace(-1, 1, 20)))
theta = np.arange(64) / 64
for R in (1e-2, 1e-3, 1e-4):
    d = jacobian_array(fmap, theta, fol.leaf(theta, np.full(64, R))) - np.eye(2)
    print(f"R={R:.0e}  |Df - I| = {np.max(np.linalg.norm(d, 2, axis=(1, 2))):.3e}")

# %%
# Regularity of the foliation
# ---------------------------
# The leaves are bi-Lipschitz in the label, yet the c-derivative of the
# generating function jumps across the zero leaf.

lip = bilipschitz_fit(fol, (-0.5, 0.5))
print(f"bi-Lipschitz constants: {lip.K_lower:.4f} .. {lip.K_upper:.4f}")
grid = build_generating_function(fol, 257, 128, (-0.5, 0.53))
rep = c1_report(grid)
print(f"largest du/dc jump {rep.max_jump:.4f} near c={rep.c_at_max:.4f}")

# %%
# The straightening gate
# ----------------------
# Building the straightening fails on any window containing the zero leaf
# and succeeds away from it.

try:
    build_straightening(grid)
except NotStraightenableError as err:
    print("refused:", err)
upper = build_straightening(build_generating_function(fol, 257, 65, (0.1, 0.9)))
print("upper half straightened; Phi(0.2, 0.5) =", upper.forward(0.2, 0.5))
