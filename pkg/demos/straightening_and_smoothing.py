"""
Straightening a smooth foliation and smoothing a generating function
====================================================================

For a smooth invariant foliation the generating function ``u`` defines an
area-preserving change of coordinates in which the map becomes the shear
``(x, c) -> (x + rho(c), c)``. Convolving ``u`` with shrinking bump kernels
converges to it in C1.
"""
import numpy as np

from twistfol import gallery
from twistfol.foliation import build_generating_function
from twistfol.straighten import (StraighteningMap, area_distortion, arnold_liouville_residual,
                                 build_straightening, mollify, random_rectangles)

psi = gallery.shear_conjugator(0.05, 0.5)
fmap, fol = gallery.integrable_family(conjugator=psi)
rho = lambda c: np.asarray(c)

# %%
# Numerical straightening
# -----------------------
# The map is built by inverting ``x = theta + du/dc`` on a 513 x 129 grid.

grid = build_generating_function(fol, 513, 129, (-0.5, 0.5))
phi = build_straightening(grid)
rects = random_rectangles((-0.45, 0.45), 20)
print(f"area distortion: {area_distortion(phi, rects):.2e}")
print(f"shear residual (grid):     {arnold_liouville_residual(fmap, phi, rho, 200, (-0.45, 0.45)):.2e}")
exact = StraighteningMap.from_conjugator(psi)
print(f"shear residual (analytic): {arnold_liouville_residual(fmap, exact, rho, 200, (-0.45, 0.45)):.2e}")

# %%
# Mollification
# -------------
# The C1 distance to ``u`` shrinks roughly like ``eps**2`` for this smooth
# generating function.

fam = mollify(build_generating_function(fol, 257, 129, (-0.5, 0.5)), [0.2, 0.1, 0.05, 0.025])
for eps, err in zip(fam.epsilon_values, fam.c1_errors):
    print(f"eps={eps:.3f}  C1 error {err:.2e}")
