"""End-to-end acceptance suite.

Each test implements one numbered acceptance criterion and prints a
single ``[ACCEPTANCE n] ... PASS/FAIL`` line that bypasses output
capture, so the full verdict list is visible in any run log regardless
of which tests pass.

Criterion 1 is expected to FAIL at B = 30 G: the second-order closed
form for the L frequency genuinely deviates by ~0.25 MHz there (the
neglected third-order term), which exceeds the 0.05 MHz bound.  The
failure is kept honest rather than masked; see the README.
"""

from __future__ import annotations

import math
import time
from importlib import resources

import numpy as np
import pytest
from scipy.optimize import brentq

from sicspin import (
    FitProblem,
    HyperfineTensor,
    Measurement,
    Nucleus,
    Spectrum,
    SpinSystem,
    StateLabel,
    Transition,
    TransitionTable,
    all_transitions,
    assign,
    basis_labels,
    build_hamiltonian,
    build_rate_model,
    bundled_catalog,
    decompose_tensor,
    diagonalize,
    enhancement_analytic,
    enhancement_curve,
    enhancement_exact,
    evolve_populations,
    fit_hamiltonian,
    nuclear_polarization,
    occupancy_statistics,
    odmr_spectrum,
    perturbative_L_frequency,
    polarization_curve,
    splitting_extract,
    steady_state,
)

from conftest import make_system, random_system

GAMMA_E = 2.8025
SI_II = dict(zz=8.66, xx=9.00, yy=9.03)
SI_IV = dict(zz=-2.2, xx=-2.7, yy=-2.6)


def verdict(capsys, num: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"[ACCEPTANCE {num}] {title}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    with capsys.disabled():
        print(line)
    assert ok, line


def exact_l_down(system: SpinSystem, b: float) -> float:
    eig = diagonalize(build_hamiltonian(system, b), b)
    return eig.energy_of(-0.5, (-0.5,)) - eig.energy_of(-1.5, (-0.5,))


# --------------------------------------------------------------------- 1


def test_criterion_1_closed_form_oracle(capsys):
    t0 = time.perf_counter()

    def max_deviation(tensor: dict) -> tuple[float, float]:
        system = make_system(34.89, tensor)
        worst, worst_b = 0.0, 0.0
        for b in range(30, 151, 10):
            dev = abs(perturbative_L_frequency(system, float(b)) - exact_l_down(system, float(b)))
            if dev > worst:
                worst, worst_b = dev, float(b)
        return worst, worst_b

    max_dev, at_b = max_deviation(SI_II)
    half = {k: v / 2.0 for k, v in SI_II.items()}
    max_dev_half, _ = max_deviation(half)
    ratio = max_dev / max_dev_half
    elapsed = time.perf_counter() - t0

    ok = max_dev <= 0.05 and ratio >= 6.0 and elapsed < 1.0
    verdict(
        capsys, 1, "second-order closed form vs exact levels",
        ok,
        f"max deviation {max_dev:.4f} MHz at B={at_b:g} G, bound 0.05; "
        f"half-coupling ratio {ratio:.2f}, bound >=6; {elapsed:.2f} s",
    )


# --------------------------------------------------------------------- 2


def test_criterion_2_gslac_location(capsys):
    t0 = time.perf_counter()
    system = SpinSystem(d=35.0)

    def signed_l(b: float) -> float:
        eig = diagonalize(build_hamiltonian(system, b), b)
        return eig.energy_of(-0.5) - eig.energy_of(-1.5)

    root = brentq(signed_l, 20.0, 30.0, xtol=1e-12)
    expected = 2.0 * 35.0 / GAMMA_E
    offset = abs(root - expected)
    elapsed = time.perf_counter() - t0

    ok = offset <= 0.01 and elapsed < 1.0
    verdict(
        capsys, 2, "zero crossing of the L line at the level anticrossing",
        ok,
        f"root {root:.6f} G vs 2D/gamma_e {expected:.6f} G, offset {offset:.2e} G; "
        f"{elapsed:.2f} s",
    )


# --------------------------------------------------------------------- 3


TRUTH3 = {"B": 36.83, "D": 34.89, "A_zz": 8.66, "A_xx": 9.00, "A_yy": 9.03, "A_zx": 0.0}
FREE3 = ("B", "D", "A_zz", "A_xx", "A_yy")


def _truth_lines() -> list[Measurement]:
    system = make_system(TRUTH3["D"], SI_II)
    eig = diagonalize(build_hamiltonian(system, TRUTH3["B"]), TRUTH3["B"])
    table = all_transitions(eig, system, allow_mixed=True)
    return [Measurement(t.kind, t.label, t.branch, t.freq, 0.01) for t in table]


def _problem3(measurements, start):
    return FitProblem(
        measurements=measurements, free=FREE3, start=start, fixed={"A_zx": 0.0}
    )


def test_criterion_3_fit_round_trip(capsys):
    t0 = time.perf_counter()
    lines = _truth_lines()

    # noiseless refit from a 5%-perturbed start
    start = {k: TRUTH3[k] * 1.05 for k in FREE3}
    result = fit_hamiltonian(_problem3(lines, start))
    param_err = max(abs(result.params[k] - TRUTH3[k]) for k in FREE3)
    clean_ok = result.converged and param_err < 1e-3 and result.rms_residual < 1e-6

    # noisy Monte Carlo: empirical scatter vs reported 1-sigma
    rng = np.random.default_rng(20260824)
    fits = []
    for _ in range(100):
        noisy = [
            Measurement(m.kind, m.label, m.branch, m.freq + rng.normal(0.0, 0.01), 0.01)
            for m in lines
        ]
        fits.append(fit_hamiltonian(_problem3(noisy, dict(TRUTH3))))
    worst_ratio = 0.0
    for k in FREE3:
        scatter = float(np.std([f.params[k] for f in fits]))
        reported = float(np.mean([f.uncertainties[k] for f in fits]))
        worst_ratio = max(worst_ratio, scatter / reported)
    elapsed = time.perf_counter() - t0

    ok = clean_ok and worst_ratio <= 2.0 and elapsed < 30.0
    verdict(
        capsys, 3, "fit round-trip and uncertainty calibration",
        ok,
        f"max param error {param_err:.2e} (bound 1e-3), rms {result.rms_residual:.1e}; "
        f"scatter/reported max {worst_ratio:.2f} over 100 seeds (bound 2); {elapsed:.1f} s",
    )


# --------------------------------------------------------------------- 4


def test_criterion_4_tensor_decomposition(capsys):
    t0 = time.perf_counter()
    checks = []

    # Strong Si shell: published summary values carry quoted 1-sigma
    # digits (8.910(6), -0.130(4)).  The published component and summary
    # columns themselves differ by up to ~3 quoted sigma (they come from
    # independent roundings), so consistency is assessed at 3 sigma.
    d2 = decompose_tensor(HyperfineTensor(**SI_II))
    checks.append(("Si_II a_iso", abs(d2.a_iso - 8.910), 3 * 0.006))
    checks.append(("Si_II t", abs(d2.t_axial - (-0.130)), 3 * 0.004))

    # Weak Si shell: summary values are quoted without uncertainties, so
    # the tolerance is propagated from the component uncertainties
    # (0.003, 0.2, 0.2).
    d4 = decompose_tensor(HyperfineTensor(**SI_IV))
    sigma_iso = math.sqrt(0.003**2 + 0.2**2 + 0.2**2) / 3.0
    sigma_t = math.sqrt(0.003**2 + sigma_iso**2) / 2.0
    checks.append(("Si_IV a_iso", abs(d4.a_iso - (-2.48)), sigma_iso))
    checks.append(("Si_IV t", abs(d4.t_axial - 0.14), sigma_t))

    elapsed = time.perf_counter() - t0
    ok = all(diff <= bound for _, diff, bound in checks) and elapsed < 1.0
    detail = "; ".join(f"{name} off {diff:.4f} <= {bound:.4f}" for name, diff, bound in checks)
    verdict(capsys, 4, "tensor decomposition vs published values", ok, detail)


# --------------------------------------------------------------------- 5


def test_criterion_5_enhancement_properties(capsys):
    t0 = time.perf_counter()
    si_iv = make_system(35.0, SI_IV)

    # exact unity without hyperfine coupling
    bare = make_system(35.0, dict(zz=0.0))
    unity = enhancement_analytic(bare, 37.0) == 1.0 and abs(
        enhancement_exact(bare, 37.0, -1.5) - 1.0
    ) < 1e-9

    # exact-vs-analytic agreement away from the anticrossing
    worst = 0.0
    for lo, hi in ((10.0, 20.0), (30.0, 40.0)):
        for b in np.arange(lo, hi + 1e-9, 0.5):
            ex = enhancement_exact(si_iv, float(b), -1.5)
            an = enhancement_analytic(si_iv, float(b))
            worst = max(worst, abs(ex - an) / abs(ex))
    window_ok = worst <= 0.05

    # sublevel ordering at 37 G
    mag = {ms: abs(enhancement_exact(si_iv, 37.0, ms)) for ms in (-1.5, -0.5, 0.5, 1.5)}
    order_ok = mag[-1.5] > mag[-0.5] > mag[0.5] > mag[1.5]

    # |alpha(-3/2)| peaks within 1 G of the bare-electron anticrossing
    bs = np.arange(0.1, 60.0001, 0.1)
    curve = enhancement_curve(si_iv, bs, sublevel=-1.5, method="exact")
    finite = np.where(np.isfinite(curve.alpha), np.abs(curve.alpha), -np.inf)
    b_peak = float(bs[int(np.argmax(finite))])
    gslac = 2.0 * 35.0 / GAMMA_E
    peak_ok = abs(b_peak - gslac) <= 1.0
    elapsed = time.perf_counter() - t0

    ok = unity and window_ok and order_ok and peak_ok and elapsed < 5.0
    verdict(
        capsys, 5, "enhancement factor properties",
        ok,
        f"alpha(A=0)=1 {unity}; window disagreement {worst:.3f} (bound 0.05); "
        f"ordering {order_ok}; peak at {b_peak:.1f} G vs {gslac:.2f} G; {elapsed:.1f} s",
    )


# --------------------------------------------------------------------- 6


def test_criterion_6_dnp_model(capsys):
    t0 = time.perf_counter()
    si_ii = make_system(35.0, SI_II)
    labels = basis_labels(1)

    # probability conservation over four decades
    model = build_rate_model(si_ii, 37.0, line="A1")
    times = np.concatenate([[0.0], np.logspace(-2, 4, 49)])
    pops = evolve_populations(model, np.full(8, 1 / 8), times)
    drift = float(np.abs(pops.sum(axis=1) - 1.0).max())
    conserve_ok = drift <= 1e-9

    # opposite pumping lines polarize the anticrossing pair oppositely
    subset = (-0.5, -1.5)
    pol = {}
    for line in ("A1", "A2"):
        ss = steady_state(build_rate_model(si_ii, 37.0, line=line))
        pol[line] = nuclear_polarization(ss, tuple(labels), 0, subset)
    sign_ok = pol["A1"] * pol["A2"] < 0 and min(abs(v) for v in pol.values()) > 0.5

    # exponential buildup quality
    p0 = np.zeros(8)
    for i, lab in enumerate(labels):
        if lab.m_s == -1.5:
            p0[i] = 0.5
    curve = polarization_curve(
        model, p0, np.linspace(0.0, 20.0, 201), electron_subset=subset
    )
    r2_ok = curve.r_squared is not None and curve.r_squared >= 0.999

    # T scales as 1 / a_perp^2 in the detuned regime
    def fitted_t(a_perp: float) -> float:
        sys_a = make_system(35.0, dict(zz=8.0, xx=a_perp, yy=a_perp))
        m = build_rate_model(sys_a, 33.0, line="A1", relaxation=0.0)
        c = polarization_curve(m, np.full(8, 1 / 8), np.linspace(0.0, 4000.0, 400))
        return c.fitted_T

    ratio = fitted_t(0.1) / fitted_t(0.2)
    scaling_ok = abs(ratio - 4.0) <= 0.4
    elapsed = time.perf_counter() - t0

    ok = conserve_ok and sign_ok and r2_ok and scaling_ok and elapsed < 10.0
    verdict(
        capsys, 6, "optical-pumping polarization model",
        ok,
        f"conservation drift {drift:.1e} (bound 1e-9); "
        f"A1 {pol['A1']:+.3f} vs A2 {pol['A2']:+.3f}; R^2 {curve.r_squared:.4f}; "
        f"T-scaling ratio {ratio:.2f} vs 4; {elapsed:.1f} s",
    )


# --------------------------------------------------------------------- 7


def test_criterion_7_spectrum_round_trip(capsys):
    t0 = time.perf_counter()
    a_state = StateLabel(-1.5, (-0.5,))
    b_state = StateLabel(-0.5, (-0.5,))
    errors = {}
    for planted in (30.0, 8.66, 4.0, 2.2):
        table = TransitionTable(field_z=150.0)
        for f in (100.0 - planted / 2.0, 100.0 + planted / 2.0):
            table.entries.append(
                Transition("electron", "L", "down", f, 1.0, a_state, b_state)
            )
        lo, hi = 100.0 - planted / 2.0 - 8.0, 100.0 + planted / 2.0 + 8.0
        spectrum = odmr_spectrum(table, {a_state: 1.0}, np.arange(lo, hi, 0.02), fwhm=0.3)
        errors[planted] = abs(splitting_extract(spectrum).splitting - planted)
    elapsed = time.perf_counter() - t0

    worst = max(errors.values())
    ok = worst <= 0.04 and elapsed < 5.0
    detail = ", ".join(f"{p:g}->off {e:.4f}" for p, e in errors.items())
    verdict(
        capsys, 7, "planted doublets recovered from synthetic spectra",
        ok, f"{detail} (bound 0.04 = 2x grid step); {elapsed:.1f} s",
    )


# --------------------------------------------------------------------- 8


def test_criterion_8_shell_assignment(capsys):
    t0 = time.perf_counter()
    cat = bundled_catalog()

    top_ii = assign(cat, 8.66, 150.0)
    top_iv = assign(cat, 2.2, 150.0)
    rank_ok = (
        bool(top_ii) and top_ii[0].group == "Si_II"
        and bool(top_iv) and top_iv[0].group == "Si_IV"
    )

    n = 10_000
    res = occupancy_statistics(cat, n, seed=12345)
    worst_z = 0.0
    for e in cat.entries:
        p = 1.0 - (1.0 - cat.abundances[e.isotope]) ** e.multiplicity
        z = (res.presence_counts[e.group] - n * p) / math.sqrt(n * p * (1.0 - p))
        worst_z = max(worst_z, abs(z))
    binomial_ok = worst_z <= 3.0

    # Si-vs-C occupation bias: Si_II and C_III both have 12 sites, so
    # their presence rates should differ by the abundance-driven factor
    # (1 - (1-0.047)^12) / (1 - (1-0.011)^12) ~ 3.5
    expect_bias = (1.0 - (1.0 - 0.047) ** 12) / (1.0 - (1.0 - 0.011) ** 12)
    got_bias = res.presence_counts["Si_II"] / res.presence_counts["C_III"]
    bias_ok = abs(got_bias / expect_bias - 1.0) <= 0.2
    dominance_ok = res.strongest_counts["Si_II"] > 3 * res.strongest_counts["C_III"]
    elapsed = time.perf_counter() - t0

    ok = rank_ok and binomial_ok and bias_ok and dominance_ok and elapsed < 10.0
    verdict(
        capsys, 8, "shell assignment and occupancy statistics",
        ok,
        f"8.66->{top_ii[0].group if top_ii else 'none'}, "
        f"2.2->{top_iv[0].group if top_iv else 'none'}; worst |z| {worst_z:.2f} "
        f"(bound 3); Si/C presence bias {got_bias:.2f} vs {expect_bias:.2f}; {elapsed:.1f} s",
    )


# --------------------------------------------------------------------- 9


def test_criterion_9_property_suites(capsys):
    t0 = time.perf_counter()
    n_cases = 1000

    rng = np.random.default_rng(101)
    hermitian_ok = True
    for _ in range(n_cases):
        system = random_system(rng)
        h = build_hamiltonian(system, float(rng.uniform(-300.0, 300.0)))
        if np.abs(h - h.conj().T).max() > 1e-12 * max(1.0, np.abs(h).max()):
            hermitian_ok = False
            break

    rng = np.random.default_rng(102)
    residual_ok = True
    for _ in range(n_cases):
        system = random_system(rng)
        b = float(rng.uniform(-300.0, 300.0))
        h = build_hamiltonian(system, b)
        eig = diagonalize(h, b)
        res = np.abs(h @ eig.states - eig.states * eig.energies[np.newaxis, :]).max()
        if res > 1e-9 * max(1.0, np.abs(h).max()):
            residual_ok = False
            break

    rng = np.random.default_rng(103)
    bijective_ok = True
    for _ in range(n_cases):
        system = random_system(rng)
        b = float(rng.uniform(-300.0, 300.0))
        eig = diagonalize(build_hamiltonian(system, b), b)
        if sorted(lab.basis_index for lab in eig.labels) != list(range(eig.dimension)):
            bijective_ok = False
            break

    rng = np.random.default_rng(104)
    columns_ok = True
    for _ in range(n_cases):
        tensor = dict(
            zz=float(rng.uniform(-10, 10)),
            xx=float(rng.uniform(-10, 10)),
            yy=float(rng.uniform(-10, 10)),
            zx=float(rng.uniform(-2, 2)),
        )
        system = make_system(float(rng.uniform(5, 60)), tensor)
        model = build_rate_model(
            system,
            float(rng.uniform(1.0, 300.0)),
            line="A1" if rng.random() < 0.5 else "A2",
            gamma_opt=float(rng.uniform(0.1, 50.0)),
            relaxation=float(10 ** rng.uniform(-6, -2)),
        )
        g = model.generator
        scale = max(1.0, float(np.abs(g).max()))
        off = g - np.diag(np.diag(g))
        if np.abs(g.sum(axis=0)).max() > 1e-10 * scale or off.min() < 0:
            columns_ok = False
            break

    rng = np.random.default_rng(105)
    deterministic_ok = True
    for _ in range(n_cases):
        system = random_system(rng)
        b = float(rng.uniform(-300.0, 300.0))
        h1 = build_hamiltonian(system, b)
        h2 = build_hamiltonian(system, b)
        e1 = diagonalize(h1, b)
        e2 = diagonalize(h2, b)
        if (
            h1.tobytes() != h2.tobytes()
            or e1.energies.tobytes() != e2.energies.tobytes()
            or e1.states.tobytes() != e2.states.tobytes()
            or e1.labels != e2.labels
        ):
            deterministic_ok = False
            break

    elapsed = time.perf_counter() - t0
    suites = {
        "hermiticity": hermitian_ok,
        "eigen-residuals": residual_ok,
        "label-bijectivity": bijective_ok,
        "rate-columns": columns_ok,
        "determinism": deterministic_ok,
    }
    ok = all(suites.values()) and elapsed < 60.0
    detail = ", ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in suites.items())
    verdict(
        capsys, 9, "randomized property suites (1000 cases each)",
        ok, f"{detail}; {elapsed:.1f} s",
    )
