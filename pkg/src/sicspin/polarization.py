"""Classical rate model for optically pumped nuclear polarization at the
ground-state level anticrossing.

Populations live on the labeled eigenstates of the full Hamiltonian,
ordered like the product basis (electron sublevel major, nuclear bits
minor).  The generator combines four processes:

* optical pumping out of the line's initial electron manifold
  (A1 drives the |mS| = 1/2 doublet, A2 the |mS| = 3/2 doublet) at rate
  ``gamma_opt``;
* inter-system-crossing return, modeled as a uniform branch into the two
  unpumped electron sublevels at the same nuclear configuration
  (``gamma_opt/2`` each), so the optical cycle preserves nuclear labels;
* hyperfine flip-flops: every pair of product states connected by a
  nonzero off-diagonal Hamiltonian element ``H_ab`` exchanges population
  at the detuning-suppressed rate
  ``gamma_opt * H_ab^2 / (H_ab^2 + delta_ab^2)`` with ``delta_ab`` the
  exact labeled eigen-energy difference (symmetric in both directions);
* optional uniform relaxation ``relaxation/(n-1)`` between every pair,
  standing in for slow spin-lattice processes that release weakly coupled
  trap states.

Columns of the generator sum to zero and off-diagonal entries are
non-negative, so evolution conserves total population and positivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, null_space
from scipy.optimize import curve_fit

from .errors import NumericalError, ValidationError
from .system import (
    MS_VALUES,
    SpinSystem,
    StateLabel,
    basis_labels,
    build_hamiltonian,
    diagonalize,
)

__all__ = [
    "PUMPED_SUBLEVELS",
    "flip_flop_rate",
    "RateModel",
    "build_rate_model",
    "evolve_populations",
    "steady_state",
    "nuclear_polarization",
    "PolarizationCurve",
    "polarization_curve",
]

#: Electron sublevels addressed by each optical line.
PUMPED_SUBLEVELS: dict[str, tuple[float, float]] = {
    "A1": (0.5, -0.5),
    "A2": (1.5, -1.5),
}


def flip_flop_rate(a_perp: float, delta: float, gamma_opt: float = 10.0) -> float:
    """Detuning-suppressed flip-flop rate (1/us).

    ``a_perp`` is the transverse coupling scale |A_xx + A_yy|/2 (MHz),
    ``delta`` the energy mismatch of the pair (MHz):
    rate = gamma_opt * a_perp^2 / (a_perp^2 + delta^2).
    """
    if gamma_opt < 0:
        raise ValidationError(f"gamma_opt must be non-negative, got {gamma_opt}")
    if a_perp == 0.0:
        return 0.0
    return gamma_opt * a_perp**2 / (a_perp**2 + delta**2)


@dataclass
class RateModel:
    """Rate-equation generator over labeled eigenstates.

    ``generator[j, i]`` is the rate i -> j (1/us); diagonal entries close
    the columns to zero sum.  ``labels`` fixes the population-vector
    layout (product-basis order, independent of field).  ``channels``
    lists the individual pump / isc / flip-flop channels for inspection;
    uniform relaxation is folded into the generator only.
    """

    generator: np.ndarray
    labels: tuple[StateLabel, ...]
    energies: np.ndarray
    field_z: float
    line: str
    gamma_opt: float
    relaxation: float
    channels: list[dict] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return self.generator.shape[0]

    def index_of(self, label: StateLabel) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"no state labeled {label} in rate model") from None


def build_rate_model(
    system: SpinSystem,
    b_z: float,
    line: str = "A1",
    gamma_opt: float = 10.0,
    relaxation: float = 1e-4,
) -> RateModel:
    """Assemble the generator at field ``b_z`` (G) for optical line
    ``line`` ("A1" or "A2")."""
    if line not in PUMPED_SUBLEVELS:
        raise ValidationError(f"line must be one of {sorted(PUMPED_SUBLEVELS)}, got {line!r}")
    if gamma_opt < 0 or relaxation < 0:
        raise ValidationError("rates must be non-negative")
    if system.n_nuclei == 0:
        raise ValidationError("the polarization model requires at least one nucleus")

    h = build_hamiltonian(system, b_z)
    eig = diagonalize(h, b_z)
    labels = tuple(basis_labels(system.n_nuclei))
    pos = {lab: i for i, lab in enumerate(labels)}
    energies = np.array([eig.energies[eig.index_of(lab)] for lab in labels])

    n = len(labels)
    gen = np.zeros((n, n))
    channels: list[dict] = []

    def add(i: int, j: int, rate: float, tag: str) -> None:
        # channel i -> j
        if rate <= 0.0:
            return
        gen[j, i] += rate
        gen[i, i] -= rate
        channels.append(
            {"from": str(labels[i]), "to": str(labels[j]), "rate": rate, "kind": tag}
        )

    pumped = set(PUMPED_SUBLEVELS[line])
    unpumped = [m for m in MS_VALUES if m not in pumped]
    for i, lab in enumerate(labels):
        if lab.m_s in pumped:
            for m_target in unpumped:
                j = pos[StateLabel(m_target, lab.m_i)]
                add(i, j, gamma_opt / 2.0, "pump")

    habs = np.abs(np.asarray(h))
    for i in range(n):
        bi = labels[i].basis_index
        for j in range(i + 1, n):
            bj = labels[j].basis_index
            coupling = float(habs[bi, bj])
            if coupling <= 1e-12:
                continue
            delta = float(energies[i] - energies[j])
            rate = gamma_opt * coupling**2 / (coupling**2 + delta**2)
            add(i, j, rate, "flipflop")
            add(j, i, rate, "flipflop")

    if relaxation > 0 and n > 1:
        r = relaxation / (n - 1)
        gen += r * (np.ones((n, n)) - n * np.eye(n))

    col_err = float(np.max(np.abs(gen.sum(axis=0))))
    if col_err > 1e-10 * max(1.0, float(np.max(np.abs(gen)))):
        raise NumericalError(f"generator columns do not sum to zero (max {col_err:.3e})")

    return RateModel(
        generator=gen,
        labels=labels,
        energies=energies,
        field_z=float(b_z),
        line=line,
        gamma_opt=gamma_opt,
        relaxation=relaxation,
        channels=channels,
    )


def _validate_populations(p0, n: int) -> np.ndarray:
    p = np.asarray(p0, dtype=float).reshape(-1)
    if p.shape[0] != n:
        raise ValidationError(f"population vector has length {p.shape[0]}, expected {n}")
    if np.any(p < -1e-12):
        raise ValidationError(f"negative populations (min {float(p.min()):.3e})")
    total = float(p.sum())
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-6):
        raise ValidationError(f"populations must sum to 1 (got {total:.8f})")
    return np.clip(p, 0.0, None) / float(np.clip(p, 0.0, None).sum())


def evolve_populations(model: RateModel, p0, times) -> np.ndarray:
    """Propagate populations through ``exp(G t)`` for each time (us).

    Returns an array of shape (len(times), n).  Each output distribution
    is verified to remain normalized within 1e-9 and non-negative within
    -1e-12 (tiny negative round-off is clipped); worse violations raise
    :class:`NumericalError`.
    """
    p = _validate_populations(p0, model.dimension)
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(ts < 0):
        raise ValidationError("times must be non-negative")
    out = np.empty((ts.shape[0], model.dimension))
    for i, t in enumerate(ts):
        pt = expm(model.generator * float(t)) @ p
        total = float(pt.sum())
        if abs(total - 1.0) > 1e-9:
            raise NumericalError(f"population sum drifted to {total:.12f} at t={t:g} us")
        if float(pt.min()) < -1e-12:
            raise NumericalError(
                f"population went negative ({float(pt.min()):.3e}) at t={t:g} us"
            )
        out[i] = np.clip(pt, 0.0, None) / total
    return out


def steady_state(model: RateModel, p0=None) -> np.ndarray:
    """Stationary distribution of the generator.

    With a unique zero mode (the generic case once relaxation > 0) the
    normalized null vector is returned.  Degenerate null spaces need a
    starting distribution ``p0``; the long-time limit is then computed by
    projecting ``p0`` on the zero modes.
    """
    ns = null_space(model.generator, rcond=1e-10)
    if ns.shape[1] == 1:
        v = ns[:, 0]
        s = float(v.sum())
        if abs(s) < 1e-12:
            raise NumericalError("null vector has zero total population")
        v = v / s
        if float(v.min()) < -1e-9:
            raise NumericalError("stationary distribution has negative entries")
        return np.clip(v, 0.0, None) / float(np.clip(v, 0.0, None).sum())
    if p0 is None:
        raise NumericalError(
            f"{ns.shape[1]} independent stationary distributions exist; "
            "pass p0 to select the long-time limit"
        )
    p = _validate_populations(p0, model.dimension)
    # long-time limit via the spectral decomposition: zero-eigenvalue right
    # eigenvectors weighted by the matching left eigenvectors applied to p0
    w, vl, vr = _eig_lr(model.generator)
    zero = np.abs(w) < 1e-10 * max(1.0, float(np.max(np.abs(model.generator))))
    result = np.zeros(model.dimension)
    for k in np.nonzero(zero)[0]:
        weight = (vl[:, k].conj() @ p) / (vl[:, k].conj() @ vr[:, k])
        result += (weight * vr[:, k]).real
    total = float(result.sum())
    if abs(total - 1.0) > 1e-6:
        raise NumericalError(f"projected stationary distribution sums to {total:.8f}")
    return np.clip(result, 0.0, None) / float(np.clip(result, 0.0, None).sum())


def _eig_lr(g: np.ndarray):
    from scipy.linalg import eig

    w, vl, vr = eig(g, left=True, right=True)
    return w, vl, vr


def nuclear_polarization(
    p,
    labels: tuple[StateLabel, ...],
    nucleus: int = 0,
    electron_subset: tuple[float, ...] | None = None,
) -> float:
    """Polarization <2 mI> of one nucleus, optionally restricted to a set
    of electron sublevels (e.g. the anticrossing manifold (-0.5, -1.5)).

    Returns +1 for fully "up" (mI = +1/2), -1 for fully "down".  The
    restricted variant renormalizes by the population inside the subset;
    an empty subset population raises :class:`NumericalError`.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != len(labels):
        raise ValidationError(f"population length {p.shape[0]} != label count {len(labels)}")
    if labels and nucleus >= len(labels[0].m_i):
        raise ValidationError(f"nucleus index {nucleus} out of range")
    keep = np.ones(len(labels), dtype=bool)
    if electron_subset is not None:
        subset = set(float(m) for m in electron_subset)
        keep = np.array([lab.m_s in subset for lab in labels])
    total = float(p[keep].sum())
    if total <= 1e-15:
        raise NumericalError("no population in the selected electron subset")
    signed = sum(
        float(p[i]) * (2.0 * labels[i].m_i[nucleus])
        for i in range(len(labels))
        if keep[i]
    )
    return signed / total


@dataclass
class PolarizationCurve:
    """Nuclear polarization vs. time, with an exponential buildup fit
    P(t) = P_inf (1 - exp(-t/T)) + P0 when the curve supports one."""

    times: np.ndarray
    values: np.ndarray
    fitted_T: float | None = None
    fitted_p_inf: float | None = None
    fitted_p0: float | None = None
    r_squared: float | None = None

    def to_csv(self, path: str | None = None) -> str:
        lines = ["t_us,P"]
        for t, v in zip(self.times, self.values):
            lines.append(f"{format(float(t), '.12g')},{format(float(v), '.12g')}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def polarization_curve(
    model: RateModel,
    p0,
    times,
    nucleus: int = 0,
    electron_subset: tuple[float, ...] | None = None,
) -> PolarizationCurve:
    """Evolve ``p0`` and record the nuclear polarization at each time.

    The buildup-time fit is attempted on every curve; flat or degenerate
    curves simply leave ``fitted_T`` (and friends) as None.
    """
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    pops = evolve_populations(model, p0, ts)
    vals = np.array(
        [nuclear_polarization(pops[i], model.labels, nucleus, electron_subset) for i in range(len(ts))]
    )
    curve = PolarizationCurve(times=ts, values=vals)

    span = float(vals.max() - vals.min())
    if len(ts) >= 4 and span > 1e-10:
        def shape(t, p_inf, tau, p_start):
            return p_inf * (1.0 - np.exp(-t / tau)) + p_start

        # initial guesses: start value, asymptote from the tail, time scale
        # from the first crossing of 63% of the span
        p_start0 = float(vals[0])
        p_inf0 = float(vals[-1]) - p_start0
        target = p_start0 + 0.632 * (float(vals[-1]) - p_start0)
        crossing = np.nonzero(
            (vals - target) * np.sign(float(vals[-1]) - p_start0 or 1.0) >= 0
        )[0]
        tau0 = float(ts[crossing[0]]) if len(crossing) and ts[crossing[0]] > 0 else float(ts[-1]) / 5.0
        try:
            popt, _ = curve_fit(
                shape,
                ts,
                vals,
                p0=[p_inf0 if p_inf0 != 0 else span, max(tau0, 1e-6), p_start0],
                bounds=([-2.0, 1e-9, -2.0], [2.0, np.inf, 2.0]),
                maxfev=10000,
            )
            pred = shape(ts, *popt)
            ss_res = float(np.sum((vals - pred) ** 2))
            ss_tot = float(np.sum((vals - vals.mean()) ** 2))
            curve.fitted_p_inf = float(popt[0])
            curve.fitted_T = float(popt[1])
            curve.fitted_p0 = float(popt[2])
            curve.r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else None
        except (RuntimeError, ValueError):
            pass  # leave fit fields absent for degenerate curves
    return curve
