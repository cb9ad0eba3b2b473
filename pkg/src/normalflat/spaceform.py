"""Signature bookkeeping for the five ambient/surface cases.

A case is one of:

====  ========================  ==============  =====================
id    ambient space form        surface type    normal normalizations
====  ========================  ==============  =====================
R     Riemannian                space-like      <N1,N1> = <N2,N2> = +e^{2L}
NS    neutral (2,2)             space-like      <N1,N1> = <N2,N2> = -e^{2L}
NT    neutral (2,2)             time-like       <N1,N1> = -<N2,N2> = +e^{2L}
LS    Lorentzian                space-like      <N1,N1> = -<N2,N2> = +e^{2L}
LT    Lorentzian                time-like       <N1,N1> = <N2,N2> = +e^{2L}
====  ========================  ==============  =====================

For curvature L0 = 0 the model is the flat 4-space of the matching
signature; for L0 != 0 it is the quadric <x, x> = 1/L0 inside a flat
5-space.  Flat-space sign patterns are (+,...,+,-,...,-) with the minus
signs trailing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CASES",
    "CaseSpec",
    "AmbientSignature",
    "MetricConventions",
    "metric_conventions",
    "ambient_signature",
    "ambient_inner",
    "quadric_defect",
]

CASES = ("R", "NS", "NT", "LS", "LT")

# number of minus signs of the flat 4-dimensional model per case
_FLAT_MINUS = {"R": 0, "NS": 2, "NT": 2, "LS": 1, "LT": 1}

_METRIC = {
    #        g-signs    n-signs
    "R": ((1, 1), (1, 1)),
    "NS": ((1, 1), (-1, -1)),
    "NT": ((1, -1), (1, -1)),
    "LS": ((1, 1), (1, -1)),
    "LT": ((1, -1), (1, 1)),
}


@dataclass(frozen=True)
class CaseSpec:
    """Which signature case is active, plus branch switches.

    eps is the +-1 branch of the time-like/neutral pipelines (and the
    light-like dependence sign); delta the +-1 of the hyperbolic rotation.
    """

    case_id: str
    l0: float = 0.0
    eps: int = 1
    delta: int = 1

    def __post_init__(self):
        if self.case_id not in CASES:
            raise ValueError(f"unknown case {self.case_id!r}, expected one of {CASES}")
        if self.eps not in (1, -1) or self.delta not in (1, -1):
            raise ValueError("eps and delta must be +1 or -1")
        if not np.isfinite(self.l0):
            raise ValueError("l0 must be finite")

    def to_json(self) -> dict:
        return {"case": self.case_id, "l0": self.l0, "eps": self.eps, "delta": self.delta}

    @classmethod
    def from_json(cls, doc: dict) -> "CaseSpec":
        return cls(doc["case"], float(doc.get("l0", 0.0)),
                   int(doc.get("eps", 1)), int(doc.get("delta", 1)))


@dataclass(frozen=True)
class AmbientSignature:
    dim: int
    signs: tuple

    def array(self) -> np.ndarray:
        return np.asarray(self.signs, dtype=float)


@dataclass(frozen=True)
class MetricConventions:
    """Signs of <T_i, T_i> and <N_i, N_i> relative to e^{2*lambda}."""

    g_signs: tuple
    n_signs: tuple


def metric_conventions(case: CaseSpec | str) -> MetricConventions:
    cid = case if isinstance(case, str) else case.case_id
    g, n = _METRIC[cid]
    return MetricConventions(g, n)


def ambient_signature(case: CaseSpec) -> AmbientSignature:
    """Model space of the case: dimension and metric sign pattern."""
    k = _FLAT_MINUS[case.case_id]
    if case.l0 == 0:
        dim = 4
    else:
        dim = 5
        if case.l0 < 0:
            k += 1
    signs = (1,) * (dim - k) + (-1,) * k
    return AmbientSignature(dim, signs)


def ambient_inner(x, y, sig: AmbientSignature):
    """Indefinite inner product sum_i signs[i] * x[i] * y[i].

    Accepts single vectors or arrays whose last axis has length sig.dim;
    broadcasting applies over the leading axes.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[-1] != sig.dim or y.shape[-1] != sig.dim:
        raise ValueError(f"vectors must have length {sig.dim}")
    return np.sum(sig.array() * x * y, axis=-1)


def quadric_defect(point, case: CaseSpec):
    """<x, x> - 1/L0 for the curved models; rejects L0 = 0."""
    if case.l0 == 0:
        raise ValueError("flat model (L0 = 0) has no quadric constraint")
    sig = ambient_signature(case)
    return ambient_inner(point, point, sig) - 1.0 / case.l0
