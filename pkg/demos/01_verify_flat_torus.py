"""Verifying structure equations on the product-of-circles oracle.

The product of two unit circles in flat 4-space, parametrized as
(cos u, sin u, cos v, sin v), is the standing closed-form example: its
frame coefficients are constants (lambda = 0, alpha1 = beta3 = -1, all
else zero), so every residual should sit at machine zero.
"""

import numpy as np

from normalflat import CaseSpec, GridSpec, compatibility_defect, gcr_residuals
from normalflat.families import build_product_family
from normalflat.gcr import normal_flatness_defect

case = CaseSpec("R", 0.0)
spec = GridSpec.over_box((0, np.pi / 2), (0, np.pi / 2), 64, 64)

result = build_product_family(1.0, 1.0, case, spec)
coeffs = result.coeffs
print("coefficient pattern:")
print("  lambda =", coeffs.lam.values[0, 0],
      " alpha1 =", coeffs.alpha1.values[0, 0],
      " beta3 =", coeffs.beta3.values[0, 0])

# the six scalar equations, one max per equation
res = gcr_residuals(coeffs, case)
for name, m in res.metrics().items():
    print(f"  {name:9s} max residual {m['max']:.3e}")

# the matrix-level integrability defect must agree
print("compatibility defect :", compatibility_defect(coeffs, case).max_abs())
print("normal flatness      :", normal_flatness_defect(coeffs).max_abs())
print("certificate passed   :", result.certificate["passed"])

# a deliberately broken set: alpha2 = 1 violates the Gauss equation by 1
from normalflat import CoefficientSet

bad = CoefficientSet.from_arrays(spec, alpha2=1.0)
print("\nbroken set (alpha2 = 1):")
print("  gauss residual  :", gcr_residuals(bad, case).gauss.max_abs())
print("  compat defect   :", compatibility_defect(bad, case).max_abs())
