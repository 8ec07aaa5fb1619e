"""Transition enumeration, frequencies, moments, and the second-order
closed form for the lowest electron spin transition.

Electron transitions connect neighboring mS sublevels at fixed nuclear
configuration and are tagged L (-3/2 <-> -1/2), C (-1/2 <-> +1/2) and
R (+1/2 <-> +3/2) in order of zero-field frequency.  Nuclear transitions
flip a single nucleus within one electron sublevel.  All frequencies are
reported as |Delta E| in MHz.

Transition moments are magnetic-dipole matrix elements of the transverse
drive operator

    M = gamma_e Sx (x) 1 + sum_k gamma_n(k) 1 (x) Ix(k)

normalized to |gamma_n| / 2 of the first nucleus, so a bare nuclear spin
flip has moment 1 and enhanced nuclear transitions near the level
anticrossing show moments of order of the enhancement factor.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import LabelingError, MatchingError, ValidationError
from .system import (
    ELECTRON_SPIN,
    MS_VALUES,
    EigenSolution,
    SpinSystem,
    StateLabel,
    config_string,
    spin_operators,
)

__all__ = [
    "Transition",
    "TransitionTable",
    "electron_transitions",
    "nuclear_transitions",
    "all_transitions",
    "signed_drive_element",
    "transition_moment",
    "perturbative_L_frequency",
    "ELECTRON_LINES",
]

#: Electron line tags and the (lower, upper) mS values they connect.
ELECTRON_LINES: dict[str, tuple[float, float]] = {
    "L": (-1.5, -0.5),
    "C": (-0.5, 0.5),
    "R": (0.5, 1.5),
}


@dataclass(frozen=True)
class Transition:
    """One labeled transition between two labeled eigenstates."""

    kind: str  # "electron" | "nuclear"
    label: str  # L/C/R for electron; mS tag for nuclear
    branch: str  # nuclear configuration string ("n/a" when empty)
    freq: float  # |Delta E| in MHz
    moment: float  # normalized drive matrix element magnitude
    state_a: StateLabel
    state_b: StateLabel
    nucleus: int | None = None  # flipped nucleus index for nuclear kind

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.kind, self.label, self.branch)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "branch": self.branch,
            "freq_MHz": self.freq,
            "moment": self.moment,
            "state_a": str(self.state_a),
            "state_b": str(self.state_b),
            "nucleus": self.nucleus,
        }


@dataclass
class TransitionTable:
    """Ordered collection of transitions with CSV/JSON export and lookup."""

    entries: list[Transition] = field(default_factory=list)
    field_z: float = 0.0

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def select(
        self,
        kind: str | None = None,
        label: str | None = None,
        branch: str | None = None,
    ) -> list[Transition]:
        """All entries matching the given key components."""
        out = []
        for t in self.entries:
            if kind is not None and t.kind != kind:
                continue
            if label is not None and t.label != label:
                continue
            if branch is not None and t.branch != branch:
                continue
            out.append(t)
        return out

    def match(
        self,
        kind: str,
        label: str,
        branch: str,
        near: float | None = None,
    ) -> Transition:
        """Single entry for a (kind, label, branch) key.

        Ambiguities (several entries under one key) are resolved by the
        entry closest in frequency to ``near``; a missing key raises
        :class:`MatchingError` naming it.
        """
        hits = self.select(kind, label, branch)
        if not hits:
            raise MatchingError(
                f"no transition matches key (kind={kind!r}, label={label!r}, branch={branch!r})"
            )
        if len(hits) == 1:
            return hits[0]
        if near is None:
            raise MatchingError(
                f"{len(hits)} transitions match key (kind={kind!r}, label={label!r}, "
                f"branch={branch!r}); provide a frequency to disambiguate"
            )
        return min(hits, key=lambda t: (abs(t.freq - near), t.freq))

    def to_csv(self, path: str | None = None) -> str:
        """Render as CSV with header ``kind,label,branch,freq_MHz,moment``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kind", "label", "branch", "freq_MHz", "moment"])
        for t in self.entries:
            writer.writerow(
                [t.kind, t.label, t.branch, format(t.freq, ".12g"), format(t.moment, ".12g")]
            )
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    def to_json(self, path: str | None = None) -> str:
        text = json.dumps(
            {"B_G": self.field_z, "transitions": [t.to_dict() for t in self.entries]},
            indent=2,
            sort_keys=True,
        )
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        return text


def _drive_operator(system: SpinSystem) -> np.ndarray:
    sx, _, _ = spin_operators(ELECTRON_SPIN)
    n = system.n_nuclei
    dim_n = 2**n
    op = system.gamma_e * np.kron(sx, np.eye(dim_n, dtype=complex))
    ix, _, _ = spin_operators(0.5)
    for k, nuc in enumerate(system.nuclei):
        chain = np.eye(1, dtype=complex)
        for j in range(n):
            chain = np.kron(chain, ix if j == k else np.eye(2, dtype=complex))
        op += nuc.gamma_n * np.kron(np.eye(4, dtype=complex), chain)
    return op


def _moment_norm(system: SpinSystem) -> float:
    """Normalization |gamma_n|/2 of the first nucleus (gamma_e/2 for the
    bare electron system, where no nuclear scale exists)."""
    if system.nuclei:
        return abs(system.nuclei[0].gamma_n) / 2.0
    return system.gamma_e / 2.0


def signed_drive_element(
    eig: EigenSolution,
    state_a: StateLabel,
    state_b: StateLabel,
    system: SpinSystem,
) -> float:
    """Signed (un-normalized) drive matrix element <a|M|b> in MHz/G.

    With canonical eigenvector phases this is deterministic; for the real
    symmetric c-axis Hamiltonians it is real, and its sign carries the
    relative phase of the hybridized states (used by the enhancement
    factor).  Complex Hermitian cases return the real part after verifying
    the imaginary part is negligible.
    """
    op = _drive_operator(system)
    va = eig.state_of(state_a)
    vb = eig.state_of(state_b)
    elem = complex(np.conj(va) @ (op @ vb))
    if abs(elem.imag) > 1e-9 * (abs(elem) + 1.0):
        # with xy/zy tensor components the element may be genuinely complex;
        # report magnitude with the sign of the dominant real part
        return float(abs(elem) if elem.real >= 0 else -abs(elem))
    return float(elem.real)


def transition_moment(
    eig: EigenSolution,
    state_a: StateLabel,
    state_b: StateLabel,
    system: SpinSystem,
) -> float:
    """Normalized transition moment |<a|M|b>| / (|gamma_n(1)|/2)."""
    return abs(signed_drive_element(eig, state_a, state_b, system)) / _moment_norm(system)


def _nuclear_configs(n: int) -> list[tuple[float, ...]]:
    out = []
    for bits in range(2**n):
        out.append(
            tuple(0.5 if ((bits >> (n - 1 - k)) & 1) == 0 else -0.5 for k in range(n))
        )
    return out


def _check_mixed(eig: EigenSolution, allow_mixed: bool) -> None:
    if eig.mixed and not allow_mixed:
        worst = float(np.min(eig.overlaps))
        raise LabelingError(
            f"eigenstates at B={eig.field_z:g} G are hybridized (min label overlap "
            f"{worst:.3f} < 0.5); labeled transitions are ambiguous there. "
            "Pass allow_mixed=True to override."
        )


def electron_transitions(
    eig: EigenSolution,
    system: SpinSystem,
    allow_mixed: bool = False,
) -> TransitionTable:
    """L/C/R electron transitions for every nuclear configuration.

    Yields 3 * 2**N entries.  Raises :class:`LabelingError` on a mixed
    solution unless ``allow_mixed`` is set.
    """
    _check_mixed(eig, allow_mixed)
    table = TransitionTable(field_z=eig.field_z)
    configs = _nuclear_configs(system.n_nuclei)
    op = _drive_operator(system)
    norm = _moment_norm(system)
    for line, (ms_lo, ms_hi) in ELECTRON_LINES.items():
        for cfg in configs:
            a = StateLabel(ms_lo, cfg)
            b = StateLabel(ms_hi, cfg)
            ia, ib = eig.index_of(a), eig.index_of(b)
            freq = abs(float(eig.energies[ib] - eig.energies[ia]))
            elem = complex(np.conj(eig.states[:, ia]) @ (op @ eig.states[:, ib]))
            table.entries.append(
                Transition(
                    kind="electron",
                    label=line,
                    branch=config_string(cfg),
                    freq=freq,
                    moment=abs(elem) / norm,
                    state_a=a,
                    state_b=b,
                )
            )
    return table


def nuclear_transitions(
    eig: EigenSolution,
    system: SpinSystem,
    allow_mixed: bool = False,
) -> TransitionTable:
    """Single-nucleus spin-flip transitions within each electron sublevel.

    Yields 4 * N * 2**(N-1) entries.  The branch string shows the
    spectator configuration with ``*`` marking the flipped nucleus
    (single-nucleus systems use ``n/a``).
    """
    _check_mixed(eig, allow_mixed)
    table = TransitionTable(field_z=eig.field_z)
    n = system.n_nuclei
    op = _drive_operator(system)
    norm = _moment_norm(system)
    for m_s in MS_VALUES:
        for k in range(n):
            for cfg in _nuclear_configs(n):
                if cfg[k] != 0.5:  # enumerate each pair once, from the "up" side
                    continue
                cfg_dn = tuple(-0.5 if j == k else m for j, m in enumerate(cfg))
                a = StateLabel(m_s, cfg)
                b = StateLabel(m_s, cfg_dn)
                ia, ib = eig.index_of(a), eig.index_of(b)
                freq = abs(float(eig.energies[ib] - eig.energies[ia]))
                elem = complex(np.conj(eig.states[:, ia]) @ (op @ eig.states[:, ib]))
                branch = "n/a" if n == 1 else config_string(cfg, star_index=k)
                table.entries.append(
                    Transition(
                        kind="nuclear",
                        label=a.ms_tag,
                        branch=branch,
                        freq=freq,
                        moment=abs(elem) / norm,
                        state_a=a,
                        state_b=b,
                        nucleus=k,
                    )
                )
    return table


def all_transitions(
    eig: EigenSolution,
    system: SpinSystem,
    allow_mixed: bool = False,
) -> TransitionTable:
    """Electron and nuclear transitions in one table."""
    table = electron_transitions(eig, system, allow_mixed)
    table.entries.extend(nuclear_transitions(eig, system, allow_mixed).entries)
    return table


def perturbative_L_frequency(
    system: SpinSystem,
    b_z: float,
    branch: str = "down",
) -> float:
    """Second-order closed form for the L transition frequency on the
    lower (mI = -1/2) nuclear branch of a single-nucleus system.

    Returns the signed frequency

        gamma_e B - 2D - A_zz/2 - A_zx^2 / (4 A_zz)
        + (3/16) (A_xx + A_yy)^2 / (gamma_e B - 2D + A_zz)

    (negative below the level anticrossing).  Accurate away from the
    anticrossing; the neglected third-order terms grow as the detuning
    shrinks.  Only the ``down`` branch has this closed form.  ``A_zz = 0``
    is outside the domain (the formula divides by it).  Nonzero xy/zy
    components or A_xx significantly different from A_yy violate the
    derivation's assumptions and produce a warning (the value is still
    computed).
    """
    if branch != "down":
        raise ValidationError(
            f"closed form exists only for the 'down' (mI=-1/2) branch, got {branch!r}"
        )
    if system.n_nuclei != 1:
        raise ValidationError(
            f"closed form is defined for a single-nucleus system, got {system.n_nuclei} nuclei"
        )
    t = system.nuclei[0].tensor
    if t.zz == 0.0:
        raise ValidationError("A_zz = 0 is outside the formula's domain (division by A_zz)")
    if t.xy != 0.0 or t.zy != 0.0:
        warnings.warn(
            "perturbative_L_frequency assumes zero xy/zy tensor components; "
            f"got xy={t.xy:g}, zy={t.zy:g} (value computed anyway)",
            stacklevel=2,
        )
    scale = max(abs(t.xx), abs(t.yy))
    if scale > 0 and abs(t.xx - t.yy) > 0.05 * scale:
        warnings.warn(
            "perturbative_L_frequency assumes A_xx close to A_yy; "
            f"got xx={t.xx:g}, yy={t.yy:g} (value computed anyway)",
            stacklevel=2,
        )
    detuning = system.gamma_e * b_z - 2.0 * system.d
    denom = detuning + t.zz
    if abs(denom) < 1e-9:
        raise ValidationError(
            "second-order denominator gamma_e*B - 2D + A_zz vanishes at this field"
        )
    return (
        detuning
        - t.zz / 2.0
        - t.zx**2 / (4.0 * t.zz)
        + (3.0 / 16.0) * (t.xx + t.yy) ** 2 / denom
    )
