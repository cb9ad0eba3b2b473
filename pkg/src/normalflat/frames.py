"""Connection matrices of the moving frame and their integrability defect.

The frame (T1 T2 N1 N2 F) satisfies a linear system

    d/du (frame) = (frame) S,      d/dv (frame) = (frame) T,

with 5x5 coefficient matrices S, T built pointwise from the conformal
factor log lambda, the second-fundamental-form components alpha_k, beta_k
and the normal-connection components mu_1, mu_2.  The system is solvable
exactly when S_v - T_u = ST - TS; the Frobenius norm of the mismatch is
the compatibility defect measured here.  Entry patterns depend on the
signature case (see :mod:`normalflat.spaceform`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FieldGrid, GridShapeError, GridSpec, _diff_along, load_fields, save_fields
from .spaceform import CaseSpec

__all__ = ["CoefficientSet", "assemble_connection", "compatibility_defect"]

COEFF_NAMES = ("lambda", "alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3", "mu1", "mu2")


@dataclass
class CoefficientSet:
    """The nine frame-coefficient fields on one grid (all real)."""

    lam: FieldGrid
    alpha1: FieldGrid
    alpha2: FieldGrid
    alpha3: FieldGrid
    beta1: FieldGrid
    beta2: FieldGrid
    beta3: FieldGrid
    mu1: FieldGrid
    mu2: FieldGrid

    def __post_init__(self):
        spec = self.lam.spec
        for f in self.fields().values():
            if f.spec != spec:
                raise GridShapeError("coefficient fields live on different grids")
            if f.kind != "real":
                raise ValueError("coefficient fields must be real")

    @property
    def spec(self) -> GridSpec:
        return self.lam.spec

    def fields(self) -> dict[str, FieldGrid]:
        return {
            "lambda": self.lam,
            "alpha1": self.alpha1, "alpha2": self.alpha2, "alpha3": self.alpha3,
            "beta1": self.beta1, "beta2": self.beta2, "beta3": self.beta3,
            "mu1": self.mu1, "mu2": self.mu2,
        }

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: f.values for name, f in self.fields().items()}

    def alravel(self):
        """(lam, a1, a2, a3, b1, b2, b3, m1, m2) as plain arrays."""
        d = self.arrays()
        return tuple(d[n] for n in COEFF_NAMES)

    def max_abs(self) -> float:
        return max(f.max_abs() for f in self.fields().values())

    @classmethod
    def from_arrays(cls, spec: GridSpec, **named) -> "CoefficientSet":
        """Build from arrays/scalars; unspecified fields default to zero."""
        def fg(name):
            val = named.get(name, 0.0)
            if np.isscalar(val):
                return FieldGrid.constant(spec, float(val))
            return FieldGrid(spec, val)

        return cls(fg("lam"), fg("alpha1"), fg("alpha2"), fg("alpha3"),
                   fg("beta1"), fg("beta2"), fg("beta3"), fg("mu1"), fg("mu2"))

    def save(self, path) -> None:
        save_fields(path, self.fields())

    @classmethod
    def load(cls, path) -> "CoefficientSet":
        fields = load_fields(path)
        missing = [n for n in COEFF_NAMES if n not in fields]
        if missing:
            raise ValueError(f"coefficient file is missing fields: {missing}")
        return cls(*(fields[n] for n in COEFF_NAMES))


def assemble_connection(coeffs: CoefficientSet, case: CaseSpec, lam_gradients=None):
    """Pointwise connection matrices S, T as arrays of shape (nu, nv, 5, 5).

    lam_gradients optionally supplies (lambda_u, lambda_v) arrays; by
    default they come from the second-order grid calculus.
    """
    lam, a1, a2, a3, b1, b2, b3, m1, m2 = coeffs.alravel()
    spec = coeffs.spec
    if lam_gradients is None:
        lu = _diff_along(lam, spec.du, 0)
        lv = _diff_along(lam, spec.dv, 1)
    else:
        lu, lv = lam_gradients
    q = case.l0 * np.exp(2 * lam)  # L0 e^{2 lambda}
    z = np.zeros(spec.shape)
    one = np.ones(spec.shape)
    cid = case.case_id

    if cid == "R":
        S = [[lu, lv, -a1, -b1, one],
             [-lv, lu, -a2, -b2, z],
             [a1, a2, lu, -m1, z],
             [b1, b2, m1, lu, z],
             [-q, z, z, z, z]]
        T = [[lv, -lu, -a2, -b2, z],
             [lu, lv, -a3, -b3, one],
             [a2, a3, lv, -m2, z],
             [b2, b3, m2, lv, z],
             [z, -q, z, z, z]]
    elif cid == "NS":
        S = [[lu, lv, a1, b1, one],
             [-lv, lu, a2, b2, z],
             [a1, a2, lu, -m1, z],
             [b1, b2, m1, lu, z],
             [-q, z, z, z, z]]
        T = [[lv, -lu, a2, b2, z],
             [lu, lv, a3, b3, one],
             [a2, a3, lv, -m2, z],
             [b2, b3, m2, lv, z],
             [z, -q, z, z, z]]
    elif cid == "NT":
        S = [[lu, lv, -a1, b1, one],
             [lv, lu, a2, -b2, z],
             [a1, a2, lu, m1, z],
             [b1, b2, m1, lu, z],
             [-q, z, z, z, z]]
        T = [[lv, lu, -a2, b2, z],
             [lu, lv, a3, -b3, one],
             [a2, a3, lv, m2, z],
             [b2, b3, m2, lv, z],
             [z, q, z, z, z]]
    elif cid == "LS":
        S = [[lu, lv, -a1, b1, one],
             [-lv, lu, -a2, b2, z],
             [a1, a2, lu, m1, z],
             [b1, b2, m1, lu, z],
             [-q, z, z, z, z]]
        T = [[lv, -lu, -a2, b2, z],
             [lu, lv, -a3, b3, one],
             [a2, a3, lv, m2, z],
             [b2, b3, m2, lv, z],
             [z, -q, z, z, z]]
    elif cid == "LT":
        S = [[lu, lv, -a1, -b1, one],
             [lv, lu, a2, b2, z],
             [a1, a2, lu, -m1, z],
             [b1, b2, m1, lu, z],
             [-q, z, z, z, z]]
        T = [[lv, lu, -a2, -b2, z],
             [lu, lv, a3, b3, one],
             [a2, a3, lv, -m2, z],
             [b2, b3, m2, lv, z],
             [z, q, z, z, z]]
    else:  # pragma: no cover - CaseSpec already validates
        raise ValueError(f"unknown case {cid}")

    S = np.stack([np.stack(row, axis=-1) for row in S], axis=-2)
    T = np.stack([np.stack(row, axis=-1) for row in T], axis=-2)
    return S, T


def compatibility_defect(coeffs: CoefficientSet, case: CaseSpec) -> FieldGrid:
    """Frobenius norm per grid point of S_v - T_u - (ST - TS)."""
    S, T = assemble_connection(coeffs, case)
    spec = coeffs.spec
    Sv = _diff_along(S, spec.dv, 1)
    Tu = _diff_along(T, spec.du, 0)
    bracket = S @ T - T @ S
    err = Sv - Tu - bracket
    return FieldGrid(spec, np.sqrt(np.sum(err * err, axis=(-2, -1))))
