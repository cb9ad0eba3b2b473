"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured figure against its pinned tolerance."""

import time

import numpy as np
import pytest

from normalflat import CaseSpec, CoefficientSet, FieldGrid, GridSpec
from normalflat.families import (
    NotldPotentials,
    PhiFamilyInput,
    build_notld_family,
    build_nt_light_family,
    build_phi_family,
    build_product_family,
)
from normalflat.frames import compatibility_defect
from normalflat.gcr import (
    curvature_minus_l0,
    dependence_minors,
    detect_parallel_normal,
    gcr_residuals,
    normal_flatness_defect,
    second_form_pseudo_norm,
)
from normalflat.integrator import integrate_frame, reconstruct_coefficients
from normalflat.riccati import (
    forms_from_vectors,
    obstruction_verdict,
    riccati_residual,
    solve_riccati,
)
from normalflat.spaceform import ambient_inner, ambient_signature

from conftest import random_coefficients


def _line(num, ok, text):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {text}")
    assert ok, text


def _torus_frame0():
    return np.array([
        [0.0, 0, 1, 0, 1],
        [1.0, 0, 0, 0, 0],
        [0.0, 0, 0, 1, 1],
        [0.0, 1, 0, 0, 0]])


def test_criterion_1_oracle_residuals():
    spec = GridSpec.over_box((0, np.pi / 2), (0, np.pi / 2), 64, 64)
    case = CaseSpec("R", 0.0)
    coeffs = CoefficientSet.from_arrays(spec, alpha1=-1.0, beta3=-1.0)
    t0 = time.perf_counter()
    worst = max(gcr_residuals(coeffs, case).max_abs(),
                compatibility_defect(coeffs, case).max_abs(),
                normal_flatness_defect(coeffs).max_abs())
    elapsed = time.perf_counter() - t0
    _line(1, worst <= 1e-12 and elapsed < 1.0,
          f"flat-torus residuals+compatibility {worst:.2e} <= 1e-12 "
          f"in {elapsed:.3f}s on 64x64")


def test_criterion_2_frame_reconstruction():
    case = CaseSpec("R", 0.0)
    errs = {}
    for n in (64, 127):
        spec = GridSpec.over_box((0, np.pi / 2), (0, np.pi / 2), n, n)
        coeffs = CoefficientSet.from_arrays(spec, alpha1=-1.0, beta3=-1.0)
        field, _ = integrate_frame(coeffs, case, _torus_frame0())
        U, V = spec.mesh()
        exact = np.stack([np.cos(U), np.sin(U), np.cos(V), np.sin(V)], axis=-1)
        errs[n] = float(np.max(np.abs(field.column(4) - exact)))
    ratio = errs[64] / errs[127]
    _line(2, errs[64] <= 1e-6 and ratio >= 8.0,
          f"max ambient error {errs[64]:.2e} <= 1e-6 on 64x64; "
          f"halving h improves {ratio:.1f}x >= 8x")


def test_criterion_3_parallel_normal_logic():
    case = CaseSpec("R", 0.0)
    spec = GridSpec.over_box((0, 1), (0, 1), 65, 65)
    U, V = spec.mesh()

    # (i) hyperplane-type coefficients
    lam = np.log(2.0 / (1.0 + U**2 + V**2))
    el = np.exp(lam)
    hyper = CoefficientSet.from_arrays(spec, lam=lam, alpha1=el, alpha3=el)
    rep_i = detect_parallel_normal(hyper, case)

    # (ii) flat torus
    torus = CoefficientSet.from_arrays(spec, alpha1=-1.0, beta3=-1.0)
    rep_ii = detect_parallel_normal(torus, case)
    minors = float(np.max(dependence_minors(torus).values))

    # (iii) phi family with xi(s) = s on the unit box
    inp = PhiFamilyInput(
        lam=FieldGrid.constant(spec, 0.0), phi=FieldGrid(spec, U),
        theta=FieldGrid.constant(spec, np.pi / 4), xi=lambda s: s)
    rep_iii = detect_parallel_normal(build_phi_family(inp, case).coeffs, case)

    ok = (rep_i.verdict == "parallel-exists"
          and rep_ii.verdict == "none" and abs(minors - 1.0) <= 1e-12
          and rep_iii.verdict == "none" and rep_iii.ld.satisfied
          and rep_iii.gamma_angle_defect >= 0.5)
    _line(3, ok,
          f"hyperplane -> {rep_i.verdict}; torus -> {rep_ii.verdict} "
          f"(minors {minors:.3f}); phi/xi=s -> {rep_iii.verdict}, dependence "
          f"satisfied, gamma+theta spread {rep_iii.gamma_angle_defect:.2f} >= 0.5")


def test_criterion_4_phi_family_residuals():
    case = CaseSpec("R", 0.0)
    spec = GridSpec.over_box((0, 1), (0, 1), 65, 65)
    U, _ = spec.mesh()
    inp = PhiFamilyInput(
        lam=FieldGrid.constant(spec, 0.0), phi=FieldGrid(spec, U),
        theta=FieldGrid.constant(spec, np.pi / 4), xi=lambda s: s)
    res = build_phi_family(inp, case)
    coeffs = res.coeffs
    scale = 1.0 + coeffs.max_abs()
    tol = 10 * spec.hmax**2 * scale
    worst = gcr_residuals(coeffs, case).max_abs()
    quad = float(np.max(np.abs(curvature_minus_l0(coeffs, case).values)))
    _line(4, worst <= tol and quad <= tol,
          f"phi-family GCR residuals {worst:.2e} and K-L0 defect {quad:.2e} "
          f"<= 10 h^2 scale = {tol:.2e}")


def test_criterion_5_notld_desk_instances():
    spec = GridSpec.over_box((0, 1), (0, 1), 65, 65)
    U, V = spec.mesh()
    built = {
        "R": build_notld_family(NotldPotentials(
            f_minus=FieldGrid(spec, U), angle=FieldGrid.constant(spec, 1.2),
            theta_minus=FieldGrid.constant(spec, 0.5)), CaseSpec("R", 0.0)),
        "NT": build_notld_family(NotldPotentials(
            f_minus=FieldGrid(spec, U), angle=FieldGrid.constant(spec, 0.7),
            t_minus=FieldGrid.constant(spec, 0.4), eps_prime=1),
            CaseSpec("NT", 0.0, eps=1)),
        "LS": build_notld_family(NotldPotentials(
            f=FieldGrid(spec, (1 + 1j) * U + (np.sqrt(2) - 1j / np.sqrt(2)) * V),
            sigma=FieldGrid.constant(spec, np.pi / 2)), CaseSpec("LS", 0.0)),
        "LT": build_notld_family(NotldPotentials(
            f=FieldGrid(spec, (1 + 1j) * U + (np.sqrt(2) + 1j / np.sqrt(2)) * V),
            sigma=FieldGrid.constant(spec, np.pi / 2)), CaseSpec("LT", 0.0)),
    }
    checks = []
    for name, res in built.items():
        cert = res.certificate
        id_worst = max(cert["identities"].values())
        checks.append(cert["residual_max"] <= 1e-10
                      and cert["flatness_defect"] <= 1e-10
                      and cert["k_minus_l0_defect"] <= 1e-10
                      and cert["nondependence_witness_min"] > 1e-3
                      and id_worst <= 1e-10)
    r = built["R"].certificate
    _line(5, all(checks),
          f"desk instances R/NT/LS/LT: residuals <= 1e-10 (R: "
          f"{r['residual_max']:.1e}), witnesses bounded away from 0, "
          f"Mobius/Pythagoras identities <= 1e-10 on all accepted inputs")


def test_criterion_6_riccati_solver():
    # zero forms
    spec0 = GridSpec.over_box((0, 1), (0, 1), 33, 33)
    z = np.zeros(spec0.shape)
    sol0 = solve_riccati(forms_from_vectors(spec0, (z, z), (z, z), (z, z)), 0.3)
    const_ok = np.max(np.abs(sol0.t.values - 0.3)) == 0.0 and sol0.path_defect == 0.0

    # constant omega0
    one = np.ones(spec0.shape)
    sol1 = solve_riccati(forms_from_vectors(spec0, (one, z), (z, z), (z, z)), 0.0)
    U0, _ = spec0.mesh()
    lin_ok = np.max(np.abs(sol1.t.values - U0)) <= 1e-13

    # obstruction-free quadratic system at h = 1/128
    spec = GridSpec.over_box((0, 1), (0, 1), 129, 129)
    U, V = spec.mesh()
    psi = 0.3 * U * V + 0.2 * U - 0.1 * V
    psiu, psiv = 0.3 * V + 0.2, 0.3 * U - 0.1
    zz = np.zeros(spec.shape)
    forms = forms_from_vectors(spec, (psiu, psiv), (zz, zz), (psiu, psiv))
    assert obstruction_verdict(forms)[0] == "identically-zero"
    sol = solve_riccati(forms, 0.2)
    ru, rv = riccati_residual(forms, sol.t)
    scale = 1 + float(np.max(np.abs(sol.t.values))) ** 2
    resid = max(ru.max_abs(), rv.max_abs())
    ok = (const_ok and lin_ok and sol.path_defect <= 1e-8
          and resid <= 20 * spec.hmax**2 * scale)
    _line(6, ok,
          f"zero-form constant exact; constant-w0 exact; path swap defect "
          f"{sol.path_defect:.2e} <= 1e-8 at h=1/128; off-path residual "
          f"{resid:.2e} <= C h^2")


def test_criterion_7_round_trips():
    t_start = time.perf_counter()
    spec = GridSpec.over_box((0, 1), (0, 1), 64, 64)
    U, V = spec.mesh()
    torus_spec = GridSpec.over_box((0, np.pi / 2), (0, np.pi / 2), 64, 64)

    runs = []
    runs.append(("product", CaseSpec("R", 0.0),
                 build_product_family(1.0, 1.0, CaseSpec("R", 0.0), torus_spec).coeffs))
    runs.append(("phi", CaseSpec("R", 0.0), build_phi_family(PhiFamilyInput(
        lam=FieldGrid.constant(spec, 0.0), phi=FieldGrid(spec, U),
        theta=FieldGrid.constant(spec, np.pi / 4), xi=lambda s: s),
        CaseSpec("R", 0.0)).coeffs))
    runs.append(("notld-R", CaseSpec("R", 0.0), build_notld_family(NotldPotentials(
        f_minus=FieldGrid(spec, U), angle=FieldGrid.constant(spec, 1.2),
        theta_minus=FieldGrid(spec, 0.5 + 0.2 * np.sin(U))), CaseSpec("R", 0.0)).coeffs))
    runs.append(("notld-NT", CaseSpec("NT", 0.0, eps=1),
                 build_notld_family(NotldPotentials(
                     f_minus=FieldGrid(spec, U), angle=FieldGrid.constant(spec, 0.7),
                     t_minus=FieldGrid(spec, 0.4 + 0.1 * np.cos(V)), eps_prime=1),
                     CaseSpec("NT", 0.0, eps=1)).coeffs))
    runs.append(("notld-LS", CaseSpec("LS", 0.0), build_notld_family(NotldPotentials(
        f=FieldGrid(spec, (1 + 1j) * U + (np.sqrt(2) - 1j / np.sqrt(2)) * V),
        sigma=FieldGrid.constant(spec, np.pi / 2)), CaseSpec("LS", 0.0)).coeffs))
    runs.append(("notld-LT", CaseSpec("LT", 0.0), build_notld_family(NotldPotentials(
        f=FieldGrid(spec, (1 + 1j) * U + (np.sqrt(2) + 1j / np.sqrt(2)) * V),
        sigma=FieldGrid.constant(spec, np.pi / 2)), CaseSpec("LT", 0.0)).coeffs))

    worst = {}
    for name, case, coeffs in runs:
        field, _ = integrate_frame(coeffs, case)
        rec, _ = reconstruct_coefficients(field.mesh(), case)
        sp = coeffs.spec
        tol = 10 * sp.hmax**2 * (1.0 + coeffs.max_abs()) ** 2
        devs = [
            np.max(np.abs(rec.lam.values - coeffs.lam.values)),
            np.max(np.abs(curvature_minus_l0(rec, case).values
                          - curvature_minus_l0(coeffs, case).values)),
            normal_flatness_defect(rec).max_abs(),
            np.max(np.abs(dependence_minors(rec).values
                          - dependence_minors(coeffs).values)),
            np.max(np.abs(second_form_pseudo_norm(rec, case).values
                          - second_form_pseudo_norm(coeffs, case).values)),
        ]
        worst[name] = (float(max(devs)), tol)

    elapsed = time.perf_counter() - t_start
    ok = all(dev <= tol for dev, tol in worst.values()) and elapsed < 60.0
    detail = ", ".join(f"{k} {dev:.1e}<={tol:.0e}" for k, (dev, tol) in worst.items())
    _line(7, ok, f"gauge-invariant round trips within 10 h^2 scale ({detail}) "
          f"in {elapsed:.1f}s < 60s")


def test_criterion_8_module_consistency():
    rng = np.random.default_rng(42)
    spec = GridSpec.over_box((0, 1), (0, 1), 33, 33)
    h2s = spec.hmax**2
    worst1 = worst2 = 0.0
    for k in range(50):
        case = CaseSpec(["R", "NS", "NT", "LS", "LT"][k % 5], rng.uniform(-1, 1))
        coeffs = random_coefficients(rng, spec)
        r = gcr_residuals(coeffs, case).max_abs()
        d = compatibility_defect(coeffs, case).max_abs()
        s = 1.0 + coeffs.max_abs()
        worst1 = max(worst1, d / (r + h2s * s))
        worst2 = max(worst2, r / (d + h2s * s))
    ok = worst1 <= 10.0 and worst2 <= 10.0
    _line(8, ok,
          f"50 random sets, all 5 cases: defect <= 10 (residual + h^2) "
          f"[max ratio {worst1:.2f}] and residual <= 10 (defect + h^2) "
          f"[max ratio {worst2:.2f}]")


def test_criterion_9_light_like_detection():
    case = CaseSpec("NT", 0.0, eps=1)
    spec = GridSpec.over_box((0, 1), (0, 1), 129, 129)
    U, V = spec.mesh()
    res = build_nt_light_family(
        spec, FieldGrid(spec, 0.25 + 0.1 * U), lambda u: np.ones_like(u), case)
    rep = detect_parallel_normal(res.coeffs, case)
    field, _ = integrate_frame(res.coeffs, case)
    sig = ambient_signature(case)
    xi = field.column(2) - case.eps * field.column(3)
    norm = np.abs(ambient_inner(xi, xi, sig))
    bound = 1e-10 * np.exp(2 * res.coeffs.lam.values)
    # the reported field itself is null too (it scales N1 - eps N2)
    from normalflat.gcr import parallel_field_coefficients
    c1, c2 = parallel_field_coefficients(rep, res.coeffs)
    full = c1.values[..., None] * field.column(2) + c2.values[..., None] * field.column(3)
    norm_full = np.abs(ambient_inner(full, full, sig))
    ok = (rep.verdict == "parallel-exists" and rep.field_kind == "light"
          and rep.ld.eps == 1 and bool(np.all(norm <= bound))
          and bool(np.all(norm_full <= 10 * bound)))
    _line(9, ok,
          f"light-likely NT set: verdict {rep.verdict} ({rep.field_kind}, "
          f"eps={rep.ld.eps}); |<N1-eps N2, N1-eps N2>| max {np.max(norm):.2e} "
          f"<= 1e-10 e^(2 lambda)")
