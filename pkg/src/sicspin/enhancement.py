"""Hyperfine enhancement of nuclear transition moments near the ground-state
level anticrossing.

Close to the anticrossing the electron-nuclear flip-flop coupling admixes
electron character into nominally nuclear transitions, multiplying their
effective drive moment by an enhancement factor alpha that can reach
several hundred.  Two routes are provided:

* ``enhancement_exact`` reads alpha off the full Hamiltonian as the signed
  drive matrix element between the two nuclear branches of one electron
  sublevel, divided by the bare nuclear moment gamma_n/2.
* ``enhancement_analytic`` evaluates the two-level closed form for the
  anticrossing pair: with

      tan(2 theta) = -(sqrt(3)/2)(A_xx + A_yy)
                     / (-A_zz + B (gamma_n - gamma_e) + 2 D)

  (principal-branch arctan, theta -> +/- pi/4 when the denominator
  vanishes), the factor is

      alpha = -sqrt(3) (gamma_e / gamma_n) sin(theta) + cos(theta).

The analytic form is the exact diagonalization of the isolated
{(-3/2, up), (-1/2, down)} block, so it tracks the exact result to a few
percent near the anticrossing and degrades with distance from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HybridizedStateError, ValidationError
from .system import (
    EigenSolution,
    SpinSystem,
    StateLabel,
    build_hamiltonian,
    diagonalize,
    parse_ms_tag,
)
from .transitions import signed_drive_element

__all__ = [
    "mixing_angle",
    "enhancement_analytic",
    "enhancement_exact",
    "enhancement_curve",
    "EnhancementCurve",
    "rabi_frequency",
]


def _nucleus_of(system: SpinSystem, nucleus: int):
    if not system.nuclei:
        raise ValidationError("enhancement requires at least one nucleus")
    if not 0 <= nucleus < system.n_nuclei:
        raise ValidationError(
            f"nucleus index {nucleus} out of range (system has {system.n_nuclei})"
        )
    return system.nuclei[nucleus]


def mixing_angle(system: SpinSystem, b_z: float, nucleus: int = 0) -> float:
    """Two-level mixing angle theta (radians) of the anticrossing pair.

    Principal branch: theta in (-pi/4, pi/4] away from the crossing,
    +/- pi/4 exactly on it (vanishing denominator).  A zero numerator
    (no transverse hyperfine coupling) gives theta = 0 regardless of the
    denominator.
    """
    nuc = _nucleus_of(system, nucleus)
    t = nuc.tensor
    num = -(math.sqrt(3.0) / 2.0) * (t.xx + t.yy)
    den = -t.zz + b_z * (nuc.gamma_n - system.gamma_e) + 2.0 * system.d
    if num == 0.0:
        return 0.0
    if den == 0.0:
        return math.pi / 4.0 if num > 0 else -math.pi / 4.0
    return 0.5 * math.atan(num / den)


def enhancement_analytic(system: SpinSystem, b_z: float, nucleus: int = 0) -> float:
    """Closed-form enhancement factor for the anticrossing pair
    {(-3/2, up), (-1/2, down)} of the chosen nucleus."""
    nuc = _nucleus_of(system, nucleus)
    theta = mixing_angle(system, b_z, nucleus)
    return -math.sqrt(3.0) * (system.gamma_e / nuc.gamma_n) * math.sin(theta) + math.cos(theta)


def enhancement_exact(
    system: SpinSystem,
    b_z: float,
    sublevel: float | str = -1.5,
    nucleus: int = 0,
    eig: EigenSolution | None = None,
) -> float:
    """Exact signed enhancement factor for the nuclear transition of
    ``nucleus`` within the electron ``sublevel``.

    Defined as the signed drive matrix element between the two labeled
    nuclear branches divided by gamma_n/2.  Other nuclei (if any) are held
    in their ``up`` branch.  Raises :class:`HybridizedStateError` when
    either involved eigenstate keeps less than half its weight on its
    label (deep in the anticrossing) so no single nuclear transition can
    be identified.
    """
    nuc = _nucleus_of(system, nucleus)
    m_s = parse_ms_tag(sublevel) if isinstance(sublevel, str) else float(sublevel)
    if eig is None:
        eig = diagonalize(build_hamiltonian(system, b_z), b_z)
    spect = [0.5] * system.n_nuclei
    up = list(spect)
    dn = list(spect)
    up[nucleus] = 0.5
    dn[nucleus] = -0.5
    lab_up = StateLabel(m_s, tuple(up))
    lab_dn = StateLabel(m_s, tuple(dn))
    for lab in (lab_up, lab_dn):
        ov = float(eig.overlaps[eig.index_of(lab)])
        if ov < 0.5:
            raise HybridizedStateError(
                f"state {lab} at B={b_z:g} G is hybridized (label overlap {ov:.3f} < 0.5); "
                "no single nuclear transition exists there"
            )
    elem = signed_drive_element(eig, lab_up, lab_dn, system)
    return elem / (nuc.gamma_n / 2.0)


@dataclass
class EnhancementCurve:
    """Enhancement factor sampled over a field sweep."""

    b: np.ndarray
    alpha: np.ndarray
    sublevel: float
    method: str
    nucleus: int = 0

    def to_csv(self, path: str | None = None) -> str:
        lines = ["B_G,alpha"]
        for b, a in zip(self.b, self.alpha):
            lines.append(f"{format(float(b), '.12g')},{format(float(a), '.12g')}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def enhancement_curve(
    system: SpinSystem,
    b_values,
    sublevel: float | str = -1.5,
    method: str = "exact",
    nucleus: int = 0,
) -> EnhancementCurve:
    """Sweep the enhancement factor over ``b_values`` (G).

    ``method`` is ``exact`` or ``analytic``.  Hybridized points of the
    exact sweep are recorded as NaN rather than aborting the sweep.
    """
    if method not in ("exact", "analytic"):
        raise ValidationError(f"method must be 'exact' or 'analytic', got {method!r}")
    m_s = parse_ms_tag(sublevel) if isinstance(sublevel, str) else float(sublevel)
    bs = np.asarray(b_values, dtype=float)
    alphas = np.empty_like(bs)
    for i, b in enumerate(bs):
        if method == "analytic":
            alphas[i] = enhancement_analytic(system, float(b), nucleus)
        else:
            try:
                alphas[i] = enhancement_exact(system, float(b), m_s, nucleus)
            except HybridizedStateError:
                alphas[i] = math.nan
    return EnhancementCurve(b=bs, alpha=alphas, sublevel=m_s, method=method, nucleus=nucleus)


def rabi_frequency(alpha: float, gamma_n: float, b1: float) -> float:
    """Nuclear Rabi frequency (MHz) for an enhanced transition driven by a
    transverse field of amplitude ``b1`` (G): |alpha * gamma_n * b1| / 2."""
    if not (math.isfinite(alpha) and math.isfinite(gamma_n) and math.isfinite(b1)):
        raise ValidationError("alpha, gamma_n and b1 must be finite")
    return abs(alpha * gamma_n * b1) / 2.0
