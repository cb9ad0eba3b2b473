"""Deciding whether a parallel normal vector field exists.

Three verdicts on three classic data sets:

* a round sphere sitting inside a hyperplane E^3 of E^4 (K != 0, second
  form linearly dependent) -> a parallel normal field exists;
* the flat torus (dependence minors = 1) -> none;
* the angle-potential family with a non-constant reparametrization
  (dependence holds, K = 0, but gamma + theta drifts) -> none, which is
  the subtle branch: flat normal connection and linear dependence alone
  are not enough when K matches the ambient curvature.
"""

import numpy as np

from normalflat import CaseSpec, CoefficientSet, FieldGrid, GridSpec
from normalflat.families import PhiFamilyInput, build_phi_family
from normalflat.gcr import detect_parallel_normal

case = CaseSpec("R", 0.0)
spec = GridSpec.over_box((0, 1), (0, 1), 65, 65)
U, V = spec.mesh()


def report(tag, coeffs):
    rep = detect_parallel_normal(coeffs, case)
    print(f"{tag:24s} verdict={rep.verdict:16s} regime={rep.curvature_regime:13s}"
          f" dependence={rep.ld.satisfied} spread={rep.gamma_angle_defect:.3f}")
    return rep


# sphere in a hyperplane: beta = mu = 0, alpha = e^lambda (1, 0, 1)
lam = np.log(2.0 / (1.0 + U**2 + V**2))
el = np.exp(lam)
report("sphere in hyperplane", CoefficientSet.from_arrays(
    spec, lam=lam, alpha1=el, alpha3=el))

# flat torus
report("flat torus", CoefficientSet.from_arrays(spec, alpha1=-1.0, beta3=-1.0))

# phi family, constant reparametrization: gamma + theta constant
inp0 = PhiFamilyInput(lam=FieldGrid.constant(spec, 0.0), phi=FieldGrid(spec, U),
                      theta=FieldGrid.constant(spec, np.pi / 4), xi=None)
report("phi family, xi = 0", build_phi_family(inp0, case).coeffs)

# phi family, xi(s) = s: same dependence, drifting angle combination
inp1 = PhiFamilyInput(inp0.lam, inp0.phi, inp0.theta, xi=lambda s: s)
report("phi family, xi = s", build_phi_family(inp1, case).coeffs)

# neutral-ambient time-like surface with a light-like parallel field
from normalflat.families import build_nt_light_family

nt = CaseSpec("NT", 0.0, eps=1)
light = build_nt_light_family(
    spec, FieldGrid(spec, 0.3 * U + 0.1 * np.sin(V)), lambda u: 1 + 0.2 * u**2, nt)
rep = detect_parallel_normal(light.coeffs, nt)
print(f"{'NT light-likely set':24s} verdict={rep.verdict:16s} "
      f"kind={rep.field_kind} eps={rep.ld.eps}")
