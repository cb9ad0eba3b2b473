import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normalflat import CaseSpec, ambient_inner, ambient_signature, quadric_defect
from normalflat.spaceform import metric_conventions


def test_case_spec_validation():
    with pytest.raises(ValueError):
        CaseSpec("Q", 0.0)
    with pytest.raises(ValueError):
        CaseSpec("R", 0.0, eps=2)
    spec = CaseSpec.from_json({"case": "NT", "l0": -1.0, "eps": -1, "delta": 1})
    assert spec.case_id == "NT" and spec.l0 == -1.0 and spec.eps == -1


@pytest.mark.parametrize("case_id,l0,dim,signs", [
    ("R", 1.0, 5, (1, 1, 1, 1, 1)),
    ("R", 0.0, 4, (1, 1, 1, 1)),
    ("R", -1.0, 5, (1, 1, 1, 1, -1)),
    ("NS", 0.0, 4, (1, 1, -1, -1)),
    ("NT", 0.0, 4, (1, 1, -1, -1)),
    ("NS", 2.0, 5, (1, 1, 1, -1, -1)),
    ("NT", -0.5, 5, (1, 1, -1, -1, -1)),
    ("LS", 0.0, 4, (1, 1, 1, -1)),
    ("LT", 0.0, 4, (1, 1, 1, -1)),
    ("LS", 1.0, 5, (1, 1, 1, 1, -1)),
    ("LT", -1.0, 5, (1, 1, 1, -1, -1)),
])
def test_ambient_signature_table(case_id, l0, dim, signs):
    sig = ambient_signature(CaseSpec(case_id, l0))
    assert sig.dim == dim
    assert sig.signs == signs


def test_metric_conventions_table():
    assert metric_conventions("R") == metric_conventions(CaseSpec("R"))
    mc = {c: metric_conventions(c) for c in ("R", "NS", "NT", "LS", "LT")}
    assert mc["R"].g_signs == (1, 1) and mc["R"].n_signs == (1, 1)
    assert mc["NS"].n_signs == (-1, -1)
    assert mc["NT"].g_signs == (1, -1) and mc["NT"].n_signs == (1, -1)
    assert mc["LS"].g_signs == (1, 1) and mc["LS"].n_signs == (1, -1)
    assert mc["LT"].g_signs == (1, -1) and mc["LT"].n_signs == (1, 1)


def test_ambient_inner_examples():
    sig = ambient_signature(CaseSpec("R", 0.0))
    e1 = np.array([1.0, 0, 0, 0])
    assert ambient_inner(e1, e1, sig) == 1.0

    sig_n = ambient_signature(CaseSpec("NT", 0.0))
    e3 = np.array([0.0, 0, 1, 0])
    assert ambient_inner(e3, e3, sig_n) == -1.0

    sig_l = ambient_signature(CaseSpec("LS", 0.0))
    null = np.array([1.0, 0, 0, 1])
    assert ambient_inner(null, null, sig_l) == 0.0


def test_ambient_inner_shape_error():
    sig = ambient_signature(CaseSpec("R", 0.0))
    with pytest.raises(ValueError):
        ambient_inner(np.ones(5), np.ones(5), sig)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4),
       st.lists(st.floats(-10, 10), min_size=8, max_size=8),
       st.floats(-3, 3), st.floats(-3, 3))
def test_ambient_inner_symmetric_bilinear(case_idx, coords, a, b):
    case = CaseSpec(["R", "NS", "NT", "LS", "LT"][case_idx], 0.0)
    sig = ambient_signature(case)
    x = np.array(coords[:4])
    y = np.array(coords[4:])
    assert ambient_inner(x, y, sig) == pytest.approx(ambient_inner(y, x, sig), abs=1e-9)
    lhs = ambient_inner(a * x + b * y, y, sig)
    rhs = a * ambient_inner(x, y, sig) + b * ambient_inner(y, y, sig)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


def test_quadric_defect():
    case = CaseSpec("R", 1.0)
    e1 = np.array([1.0, 0, 0, 0, 0])
    assert quadric_defect(e1, case) == 0.0
    assert quadric_defect(2 * e1, case) == 3.0

    case_neg = CaseSpec("R", -1.0)
    e5 = np.array([0.0, 0, 0, 0, 1.0])  # time-like axis of the L0 < 0 model
    assert quadric_defect(e5, case_neg) == 0.0

    with pytest.raises(ValueError):
        quadric_defect(e1, CaseSpec("R", 0.0))
