"""The over-determined quadratic angle system dt = w0 + t w1 + t^2 w2.

The rotation angle of the not-linearly-dependent construction satisfies
a single Pfaffian equation of degree two.  Its solvability as a
two-variable system is measured by three obstruction 2-forms; when they
vanish the row-first and column-first path-ordered solutions agree to
integrator accuracy, and when they do not, the solver still returns the
path-ordered candidate together with the swap defect.
"""

import numpy as np

from normalflat import CaseSpec, FieldGrid, GridSpec
from normalflat.riccati import (
    RiccatiBlowUpError,
    build_forms,
    forms_from_vectors,
    obstruction_verdict,
    riccati_residual,
    solve_riccati,
)

case = CaseSpec("R", 0.0)

# 1. forms assembled from an input potential ---------------------------------
spec = GridSpec.over_box((0.1, 1.1), (0.1, 1.1), 65, 65)
U, V = spec.mesh()
for tag, xi in (("xi = 0", 0.0), ("xi(s) = s", lambda s: s)):
    forms = build_forms(FieldGrid(spec, U + V**2 / 2), xi, case)
    verdict, norms = obstruction_verdict(forms)
    print(f"f = u + v^2/2, {tag:10s}: obstruction {verdict:16s} "
          + " ".join(f"{k}={v:.2e}" for k, v in norms.items()))

# 2. an obstruction-free system with a closed-form solution ------------------
spec = GridSpec.over_box((0, 1), (0, 1), 129, 129)
U, V = spec.mesh()
psi = 0.3 * U * V + 0.2 * U - 0.1 * V
z = np.zeros(spec.shape)
forms = forms_from_vectors(spec, (0.3 * V + 0.2, 0.3 * U - 0.1),
                           (z, z), (0.3 * V + 0.2, 0.3 * U - 0.1))
print("\nsynthetic dt = (1 + t^2) dpsi:", obstruction_verdict(forms)[0])
sol = solve_riccati(forms, 0.2)
exact = np.tan(psi - psi[0, 0] + np.arctan(0.2))
ru, rv = riccati_residual(forms, sol.t)
print(f"  path swap defect {sol.path_defect:.2e}")
print(f"  error vs closed form {np.max(np.abs(sol.t.values - exact)):.2e}")
print(f"  equation residual off-path {max(ru.max_abs(), rv.max_abs()):.2e}")

# 3. finite-time escape is detected and located ------------------------------
spec = GridSpec.over_box((0, 2), (0, 1), 65, 17)
one = np.ones(spec.shape)
z = np.zeros(spec.shape)
forms = forms_from_vectors(spec, (one, z), (z, z), (one, z))  # dt = (1+t^2) du
try:
    solve_riccati(forms, 0.2)
except RiccatiBlowUpError as exc:
    print(f"\nblow-up detected near u = {exc.location[0]:.3f} "
          f"(tan escapes at {np.pi / 2 - np.arctan(0.2):.3f})")
