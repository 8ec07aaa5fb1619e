"""Least-squares estimation of Hamiltonian parameters from measured line
positions, with uncertainty propagation.

A :class:`FitProblem` pairs measured transition frequencies (keyed by
kind / label / branch, like the transition tables) with a choice of free
parameters among B, D, A_zz, A_xx, A_yy, A_zx for a single-nucleus
system.  The solver is a damped Gauss-Newton (Levenberg-Marquardt)
iteration on sigma-normalized residuals with central-difference
Jacobians; accepted steps strictly decrease the cost.  Parameter
covariance is rms^2 (J^T J)^-1 where rms^2 is the mean squared
normalized residual (slightly optimistic at low degrees of freedom; the
Monte-Carlo calibration test bounds the resulting under-coverage).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .constants import GAMMA_E_MHZ_PER_G
from .errors import MatchingError, NonIdentifiableError, NumericalError, ValidationError
from .system import HyperfineTensor, Nucleus, SpinSystem, build_hamiltonian, diagonalize
from .transitions import all_transitions

__all__ = [
    "PARAM_NAMES",
    "PARAM_BOUNDS",
    "Measurement",
    "FitProblem",
    "residuals",
    "FitResult",
    "fit_hamiltonian",
    "TensorDecomposition",
    "decompose_tensor",
]

#: Fittable parameters, in canonical order.
PARAM_NAMES: tuple[str, ...] = ("B", "D", "A_zz", "A_xx", "A_yy", "A_zx")

#: Physical box constraints applied to every iterate.
PARAM_BOUNDS: dict[str, tuple[float, float]] = {
    "B": (0.0, 1000.0),
    "D": (0.0, 100.0),
    "A_zz": (-500.0, 500.0),
    "A_xx": (-500.0, 500.0),
    "A_yy": (-500.0, 500.0),
    "A_zx": (-500.0, 500.0),
}


@dataclass(frozen=True)
class Measurement:
    """One measured line: key into the transition table plus frequency.

    ``sigma`` is the 1-sigma frequency uncertainty in MHz (default
    0.01 MHz).
    """

    kind: str
    label: str
    branch: str
    freq: float
    sigma: float = 0.01

    def __post_init__(self) -> None:
        if self.kind not in ("electron", "nuclear"):
            raise ValidationError(f"measurement kind must be electron/nuclear, got {self.kind!r}")
        if self.sigma <= 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.freq):
            raise ValidationError(f"frequency must be finite, got {self.freq}")


@dataclass
class FitProblem:
    """Measurements plus the parameterization of the model.

    ``free`` selects the adjustable parameters (order fixes the parameter
    vector); ``start`` provides their initial values; ``fixed`` pins the
    rest.  B and D must appear in one of the two.  Hyperfine components
    absent from both default to zero.
    """

    measurements: list[Measurement]
    free: tuple[str, ...]
    start: dict[str, float]
    fixed: dict[str, float] = field(default_factory=dict)
    isotope: str = "Si29"
    gamma_e: float = GAMMA_E_MHZ_PER_G
    gamma_n: float | None = None

    def __post_init__(self) -> None:
        self.free = tuple(self.free)
        if not self.measurements:
            raise ValidationError("fit problem has no measurements")
        for name in self.free:
            if name not in PARAM_NAMES:
                raise ValidationError(f"unknown free parameter {name!r} (known: {PARAM_NAMES})")
            if name not in self.start:
                raise ValidationError(f"free parameter {name!r} missing from start values")
        for name in self.fixed:
            if name not in PARAM_NAMES:
                raise ValidationError(f"unknown fixed parameter {name!r}")
            if name in self.free:
                raise ValidationError(f"parameter {name!r} is both free and fixed")
        for required in ("B", "D"):
            if required not in self.free and required not in self.fixed:
                raise ValidationError(f"parameter {required!r} must be free or fixed")

    def parameter_values(self, theta) -> dict[str, float]:
        values = {name: 0.0 for name in PARAM_NAMES}
        values.update(self.fixed)
        values.update(dict(zip(self.free, np.asarray(theta, dtype=float))))
        return values

    def system_at(self, theta) -> tuple[SpinSystem, float]:
        v = self.parameter_values(theta)
        tensor = HyperfineTensor(zz=v["A_zz"], xx=v["A_xx"], yy=v["A_yy"], zx=v["A_zx"])
        nucleus = Nucleus(self.isotope, tensor, gamma_n=self.gamma_n)
        return SpinSystem(d=v["D"], nuclei=(nucleus,), gamma_e=self.gamma_e), v["B"]

    def initial_theta(self) -> np.ndarray:
        return _project(np.array([self.start[p] for p in self.free], dtype=float), self.free)

    @classmethod
    def from_dict(cls, raw: dict) -> "FitProblem":
        if not isinstance(raw, dict):
            raise ValidationError("fit problem must be a JSON object")
        try:
            meas = [
                Measurement(
                    kind=str(m["kind"]),
                    label=str(m["label"]),
                    branch=str(m["branch"]),
                    freq=float(m["freq_MHz"]),
                    sigma=float(m.get("sigma_MHz", 0.01)),
                )
                for m in raw["measurements"]
            ]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed measurement list: {exc}") from exc
        if "free" not in raw or "start" not in raw:
            raise ValidationError("fit problem requires 'free' and 'start' fields")
        return cls(
            measurements=meas,
            free=tuple(str(p) for p in raw["free"]),
            start={str(k): float(v) for k, v in raw["start"].items()},
            fixed={str(k): float(v) for k, v in raw.get("fixed", {}).items()},
            isotope=str(raw.get("isotope", "Si29")),
            gamma_e=float(raw.get("gamma_e_MHzPerG", GAMMA_E_MHZ_PER_G)),
            gamma_n=(
                float(raw["gamma_n_MHzPerG"]) if "gamma_n_MHzPerG" in raw else None
            ),
        )

    @classmethod
    def from_json(cls, source: str) -> "FitProblem":
        text = source
        if "{" not in source:
            try:
                with open(source, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ValidationError(f"cannot read fit problem file {source!r}: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid fit problem JSON: {exc}") from exc


def _project(theta: np.ndarray, names: tuple[str, ...]) -> np.ndarray:
    out = theta.copy()
    for i, name in enumerate(names):
        lo, hi = PARAM_BOUNDS[name]
        out[i] = min(max(out[i], lo), hi)
    return out


def model_frequencies(problem: FitProblem, theta) -> np.ndarray:
    """Model frequency for each measurement at parameter vector ``theta``.

    Labeled transitions are used even through mixed regions (the greedy
    label bijection keeps keys defined there); unmatched measurement keys
    raise :class:`MatchingError`.
    """
    system, b = problem.system_at(theta)
    eig = diagonalize(build_hamiltonian(system, b), b)
    table = all_transitions(eig, system, allow_mixed=True)
    out = np.empty(len(problem.measurements))
    for i, m in enumerate(problem.measurements):
        out[i] = table.match(m.kind, m.label, m.branch, near=m.freq).freq
    return out


def residuals(problem: FitProblem, theta) -> np.ndarray:
    """Sigma-normalized residuals (model - measured) / sigma."""
    model = model_frequencies(problem, theta)
    meas = np.array([m.freq for m in problem.measurements])
    sig = np.array([m.sigma for m in problem.measurements])
    return (model - meas) / sig


def _jacobian(problem: FitProblem, theta: np.ndarray) -> np.ndarray:
    m = len(problem.measurements)
    n = len(theta)
    jac = np.empty((m, n))
    for i in range(n):
        step = max(1e-4, 1e-6 * abs(theta[i]))
        tp = theta.copy()
        tm = theta.copy()
        tp[i] += step
        tm[i] -= step
        jac[:, i] = (residuals(problem, tp) - residuals(problem, tm)) / (2.0 * step)
    return jac


def _check_rank(jac: np.ndarray, names: tuple[str, ...]) -> None:
    n = jac.shape[1]
    _, s, vt = np.linalg.svd(jac, full_matrices=True)  # vt always n x n
    smax = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > 1e-10 * smax)) if smax > 0 else 0
    if rank < n:
        direction = vt[-1]
        combo = " ".join(
            f"{c:+.3f}*{name}" for c, name in zip(direction, names) if abs(c) > 1e-3
        )
        raise NonIdentifiableError(
            "least-squares problem is rank deficient: the parameter combination "
            f"[{combo}] does not change the measured frequencies "
            f"(singular values {np.array2string(s, precision=3)})",
            direction=direction,
            param_names=names,
        )


class TensorDecomposition(NamedTuple):
    """Isotropic (contact) and axial (dipolar) parts of a hyperfine tensor."""

    a_iso: float
    t_axial: float


def decompose_tensor(tensor: HyperfineTensor | tuple[float, float, float]) -> TensorDecomposition:
    """Split diagonal components into A_iso = (A_xx + A_yy + A_zz)/3 and
    T = (A_zz - A_iso)/2.

    Accepts a :class:`HyperfineTensor` or an (A_xx, A_yy, A_zz) triple.
    """
    if isinstance(tensor, HyperfineTensor):
        return TensorDecomposition(tensor.isotropic, tensor.axial)
    try:
        xx, yy, zz = (float(v) for v in tensor)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"expected a tensor or (xx, yy, zz) triple: {exc}") from exc
    iso = (xx + yy + zz) / 3.0
    return TensorDecomposition(iso, (zz - iso) / 2.0)


@dataclass
class FitResult:
    """Converged parameter estimates with uncertainties.

    ``residuals_mhz`` holds raw (un-normalized) model-minus-measured
    values per measurement; ``rms_residual`` is their root mean square.
    """

    params: dict[str, float]
    uncertainties: dict[str, float]
    covariance: np.ndarray
    free: tuple[str, ...]
    residuals_mhz: np.ndarray
    rms_residual: float
    cost: float
    iterations: int
    converged: bool
    message: str

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "uncertainties": self.uncertainties,
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "free": list(self.free),
            "residuals_MHz": [float(v) for v in self.residuals_mhz],
            "rms_residual_MHz": self.rms_residual,
            "cost": self.cost,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
        }

    def to_json(self, path: str | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        return text


def fit_hamiltonian(
    problem: FitProblem,
    max_iter: int = 100,
    cost_tol: float = 1e-10,
    grad_tol: float = 1e-8,
) -> FitResult:
    """Levenberg-Marquardt fit of the free parameters.

    Iterates damped normal-equation steps, accepting only cost decreases
    (the accepted-cost sequence is monotone).  Convergence is declared on
    a relative cost change below ``cost_tol`` or an infinity-norm gradient
    below ``grad_tol``; hitting ``max_iter`` returns ``converged=False``.
    Rank-deficient Jacobians raise :class:`NonIdentifiableError` naming
    the flat parameter combination.
    """
    theta = problem.initial_theta()
    names = problem.free
    m, n = len(problem.measurements), len(theta)

    r = residuals(problem, theta)
    cost = 0.5 * float(r @ r)
    lam = 1e-3
    message = "max_iter reached"
    converged = False
    iterations = 0
    jac = _jacobian(problem, theta)
    _check_rank(jac, names)

    for iterations in range(1, max_iter + 1):
        grad = jac.T @ r
        if float(np.max(np.abs(grad))) < grad_tol:
            converged = True
            message = "gradient below tolerance"
            break
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag[diag <= 0] = 1.0
        accepted = False
        for _ in range(25):  # inner damping search
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 5.0
                continue
            cand = _project(theta + step, names)
            rc = residuals(problem, cand)
            cost_c = 0.5 * float(rc @ rc)
            if cost_c < cost:
                rel_drop = (cost - cost_c) / max(cost, 1e-300)
                theta, r, cost = cand, rc, cost_c
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                if rel_drop < cost_tol:
                    converged = True
                    message = "cost change below tolerance"
                break
            lam *= 5.0
        if not accepted:
            converged = True
            message = "no downhill step found (stationary within damping range)"
            break
        if converged:
            break
        jac = _jacobian(problem, theta)

    jac = _jacobian(problem, theta)
    _check_rank(jac, names)
    jtj = jac.T @ jac
    try:
        jtj_inv = np.linalg.inv(jtj)
    except np.linalg.LinAlgError as exc:
        raise NonIdentifiableError(
            f"normal matrix is singular at the solution: {exc}",
            direction=np.linalg.svd(jac)[2][-1],
            param_names=names,
        ) from exc

    # rms^2 of the normalized residuals scales (J^T J)^-1; for zero-noise
    # round trips this collapses the reported uncertainties to ~0 as it should
    ssr = float(r @ r)
    s2 = ssr / m
    cov = s2 * jtj_inv
    sigmas = np.array([meas.sigma for meas in problem.measurements])
    raw = r * sigmas

    if not np.all(np.isfinite(cov)):
        raise NumericalError("covariance computation produced non-finite values")

    return FitResult(
        params={name: float(v) for name, v in zip(names, theta)},
        uncertainties={name: float(math.sqrt(max(cov[i, i], 0.0))) for i, name in enumerate(names)},
        covariance=cov,
        free=names,
        residuals_mhz=raw,
        rms_residual=float(np.sqrt(np.mean(raw**2))),
        cost=cost,
        iterations=iterations,
        converged=converged,
        message=message,
    )
