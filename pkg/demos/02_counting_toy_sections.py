# Counting zeros of finite-dimensional sections
#
# The analytic moduli counts are modeled at desk scale by sections
# s : R^d -> R^m with a properness radius (all zeros inside |x| <= R, and
# |s| bounded below on the sphere).  The count is a relative Euler number:
# perturb by bump-supported finite-rank maps, shift generically, count
# transverse zeros with signs.  The point of this demo: the answer never
# depends on how you perturb.

import numpy as np

from famclass.cochain import build_point
from famclass.vnengine import (
    build_perturbation,
    builtin_family,
    check_cobordism_invariance,
    check_perturbation_independence,
    count_point,
    family_from_polynomials,
    random_perturbation,
    suspend,
    winding_number,
)

# A section that is already transverse needs no perturbation at all.
linear = builtin_family("line-linear")
print("s(x) = x:", count_point(linear).value, "zero(s):", count_point(linear).zeros)

# The cubic has three transverse zeros with signs +, -, +: signed count 1.
cubic = builtin_family("line-cubic")
res = count_point(cubic)
print("s(x) = x^3 - x:", res.value, "signs", [s for _, s in res.zeros],
      "refinement trace", res.trace)

# x^2 is tangent to zero: the construction step detects the deficient zero
# and installs a rank-one charge there; the shifted count is 0, as the
# boundary values force (s > 0 at both ends of the interval).
tangent = builtin_family("line-square-tangent")
phi = build_perturbation(tangent)
print("s(x) = x^2: charges", len(phi.charges), "count", count_point(tangent, phi).value)

# The planar squaring map has one degenerate zero of local index 2; any
# generic shift splits it into two positive zeros.  An independent oracle --
# the winding number of s/|s| around the properness circle -- must agree.
planar = builtin_family("planar-z2")
print("s(z) = z^2:", count_point(planar).value,
      "winding oracle:",
      winding_number(lambda x: planar.evaluator(np.zeros((len(x), 0)), x), 1.5))

# Well-definedness, demonstrated rather than asserted: different random
# perturbations, and inflation by unused shift directions (suspension),
# leave every count alone.
v = check_perturbation_independence(
    cubic, random_perturbation(cubic, 1), random_perturbation(cubic, 2)
)
print("two random perturbations of the cubic:", [r.value for r in v.results])
phi = build_perturbation(planar)
print("suspension:", [count_point(planar, suspend(phi, k), seed=3).value
                      for k in (0, 1, 2, 3)])

# Counts are also invariant along homotopies that avoid the boundary.
shifted = family_from_polynomials(["x1**3 - x1 + 0.1"], build_point(), 1, 2.0)
v = check_cobordism_invariance(cubic, shifted)
print("cubic vs cubic + 0.1:", [r.value for r in v.results],
      "(homotopy floor", round(v.floor, 3), ")")
