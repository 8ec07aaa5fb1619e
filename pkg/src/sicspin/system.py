"""Spin system definition, Hamiltonian construction and labeled diagonalization.

The model is a single S = 3/2 electronic spin with an axial zero-field
splitting, Zeeman-coupled to a magnetic field along the symmetry (c) axis,
and hyperfine-coupled to up to six I = 1/2 nuclei:

    H = D (Sz^2 + S(S+1)/3) + gamma_e B Sz
        + sum_k S . A(k) . I(k) + sum_k gamma_n(k) B Iz(k)

with energies in MHz, fields in gauss.  The product basis is ordered with
the electron factor first (mS descending: +3/2, +1/2, -1/2, -3/2) and each
nuclear factor with mI = +1/2 ("up") before mI = -1/2 ("down"); the basis
index is ``ie * 2**N + nuclear_bits`` with bit k = 0 for up.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .constants import DIMENSION_CAP, GAMMA_E_MHZ_PER_G, gamma_n_for
from .errors import NumericalError, ValidationError

__all__ = [
    "ELECTRON_SPIN",
    "MS_VALUES",
    "spin_operators",
    "HyperfineTensor",
    "Nucleus",
    "SpinSystem",
    "StateLabel",
    "ms_tag",
    "parse_ms_tag",
    "branch_token",
    "config_string",
    "basis_labels",
    "build_hamiltonian",
    "diagonalize",
    "EigenSolution",
]

#: Electronic spin quantum number of the modeled center.
ELECTRON_SPIN: float = 1.5

#: Electron sublevels in basis order (descending mS).
MS_VALUES: tuple[float, ...] = (1.5, 0.5, -0.5, -1.5)

_MS_TAGS = {1.5: "+3/2", 0.5: "+1/2", -0.5: "-1/2", -1.5: "-3/2"}
_TAG_MS = {v: k for k, v in _MS_TAGS.items()}


def ms_tag(m_s: float) -> str:
    """Human-readable tag for an electron sublevel, e.g. ``-3/2``."""
    try:
        return _MS_TAGS[float(m_s)]
    except KeyError:
        raise ValidationError(f"not an S=3/2 sublevel: mS={m_s}") from None


def parse_ms_tag(tag: str) -> float:
    """Inverse of :func:`ms_tag`; accepts ``+3/2``/``3/2`` style strings."""
    key = tag.strip()
    if key and key[0] not in "+-":
        key = "+" + key
    try:
        return _TAG_MS[key]
    except KeyError:
        raise ValidationError(f"unknown electron sublevel tag {tag!r}") from None


def branch_token(m_i: float) -> str:
    """ASCII branch token for a single nuclear projection (up/down)."""
    if m_i == 0.5:
        return "up"
    if m_i == -0.5:
        return "down"
    raise ValidationError(f"not a spin-1/2 projection: mI={m_i}")


def config_string(m_i: Sequence[float], star_index: int | None = None) -> str:
    """Join nuclear projections into a branch string like ``up,down``.

    ``star_index`` replaces that nucleus token with ``*`` (used to mark the
    flipped nucleus in multi-nucleus nuclear transitions).  An empty
    configuration renders as ``n/a``.
    """
    if len(m_i) == 0:
        return "n/a"
    parts = [branch_token(m) for m in m_i]
    if star_index is not None:
        parts[star_index] = "*"
    return ",".join(parts)


def spin_operators(s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin matrices (Sx, Sy, Sz) for spin quantum number ``s``.

    Basis ordered by descending magnetic quantum number, so
    ``Sz = diag(s, s-1, ..., -s)``.  Sx and Sz are real, Sy is purely
    imaginary; all are returned as complex arrays.
    """
    twice = round(2 * s)
    if twice < 0 or abs(2 * s - twice) > 1e-12:
        raise ValidationError(f"spin must be a non-negative half-integer, got {s}")
    dim = twice + 1
    m = s - np.arange(dim)
    sz = np.diag(m).astype(complex)
    # ladder coefficients: <m+1| S+ |m> = sqrt(s(s+1) - m(m+1))
    cplus = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    splus = np.zeros((dim, dim), dtype=complex)
    splus[np.arange(dim - 1), np.arange(1, dim)] = cplus
    sminus = splus.conj().T
    sx = (splus + sminus) / 2
    sy = (splus - sminus) / (2j)
    return sx, sy, sz


@dataclass(frozen=True)
class HyperfineTensor:
    """Symmetric hyperfine interaction tensor, components in MHz.

    Only six independent components are stored; the matrix property
    assembles the full symmetric 3x3 array.  ``zx`` couples Sz with Ix
    (and Sx with Iz) and is the component that mixes nuclear branches of
    neighboring electron sublevels at level anticrossings.
    """

    zz: float
    xx: float = 0.0
    yy: float = 0.0
    zx: float = 0.0
    xy: float = 0.0
    zy: float = 0.0

    def __post_init__(self) -> None:
        for name in ("zz", "xx", "yy", "zx", "xy", "zy"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"hyperfine component {name} must be finite, got {v}")

    @property
    def matrix(self) -> np.ndarray:
        """Full symmetric tensor with row/column order (x, y, z)."""
        return np.array(
            [
                [self.xx, self.xy, self.zx],
                [self.xy, self.yy, self.zy],
                [self.zx, self.zy, self.zz],
            ],
            dtype=float,
        )

    @property
    def isotropic(self) -> float:
        """Isotropic (contact) part, (A_xx + A_yy + A_zz)/3."""
        return (self.xx + self.yy + self.zz) / 3.0

    @property
    def axial(self) -> float:
        """Axial (dipolar) part, (A_zz - A_iso)/2."""
        return (self.zz - self.isotropic) / 2.0

    @property
    def perp(self) -> float:
        """Transverse flip-flop scale, |A_xx + A_yy|/2."""
        return abs(self.xx + self.yy) / 2.0

    def to_dict(self) -> dict[str, float]:
        return {
            "zz": self.zz,
            "xx": self.xx,
            "yy": self.yy,
            "zx": self.zx,
            "xy": self.xy,
            "zy": self.zy,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "HyperfineTensor":
        """Build from a mapping; accepts both ``zx``/``xz`` style key orders."""
        if not isinstance(raw, dict):
            raise ValidationError(f"hyperfine tensor must be a mapping, got {type(raw).__name__}")
        alias = {"xz": "zx", "yx": "xy", "yz": "zy"}
        known = {"zz", "xx", "yy", "zx", "xy", "zy"}
        vals: dict[str, float] = {}
        for key, value in raw.items():
            k = alias.get(str(key), str(key))
            if k not in known:
                raise ValidationError(f"unknown hyperfine component {key!r}")
            if k in vals and vals[k] != float(value):
                raise ValidationError(f"conflicting values for symmetric component {k!r}")
            vals[k] = float(value)
        if "zz" not in vals:
            raise ValidationError("hyperfine tensor requires at least the zz component")
        return cls(**vals)


@dataclass(frozen=True)
class Nucleus:
    """A spin-1/2 nucleus with its hyperfine tensor.

    ``gamma_n`` (MHz/G, signed) defaults to the built-in value for the
    isotope; unknown isotopes must provide it explicitly.
    """

    isotope: str
    tensor: HyperfineTensor
    gamma_n: float | None = None

    def __post_init__(self) -> None:
        if self.gamma_n is None:
            object.__setattr__(self, "gamma_n", gamma_n_for(self.isotope))
        if not math.isfinite(self.gamma_n):
            raise ValidationError(f"gamma_n must be finite, got {self.gamma_n}")

    def to_dict(self) -> dict:
        return {
            "isotope": self.isotope,
            "gamma_n_MHzPerG": self.gamma_n,
            "A_MHz": self.tensor.to_dict(),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Nucleus":
        if not isinstance(raw, dict):
            raise ValidationError(f"nucleus must be a mapping, got {type(raw).__name__}")
        if "isotope" not in raw:
            raise ValidationError("nucleus requires an 'isotope' field")
        if "A_MHz" not in raw:
            raise ValidationError("nucleus requires an 'A_MHz' tensor field")
        gamma = raw.get("gamma_n_MHzPerG")
        return cls(
            isotope=str(raw["isotope"]),
            tensor=HyperfineTensor.from_dict(raw["A_MHz"]),
            gamma_n=None if gamma is None else float(gamma),
        )


@dataclass(frozen=True)
class SpinSystem:
    """Electron S=3/2 plus a list of coupled spin-1/2 nuclei.

    Parameters
    ----------
    d : float
        Zero-field splitting parameter D in MHz (2D is the zero-field
        separation between the |mS|=3/2 and |mS|=1/2 doublets).
    nuclei : tuple of Nucleus
        Coupled nuclei; the Hilbert-space dimension 4 * 2**N is capped at
        256 (N <= 6).
    gamma_e : float
        Electron gyromagnetic ratio in MHz/G (positive).
    """

    d: float
    nuclei: tuple[Nucleus, ...] = field(default_factory=tuple)
    gamma_e: float = GAMMA_E_MHZ_PER_G

    def __post_init__(self) -> None:
        if not math.isfinite(self.d):
            raise ValidationError(f"D must be finite, got {self.d}")
        if not math.isfinite(self.gamma_e) or self.gamma_e <= 0:
            raise ValidationError(f"gamma_e must be finite and positive, got {self.gamma_e}")
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        if self.dimension > DIMENSION_CAP:
            raise ValidationError(
                f"Hilbert-space dimension {self.dimension} exceeds cap {DIMENSION_CAP} "
                f"({len(self.nuclei)} nuclei)"
            )

    @property
    def n_nuclei(self) -> int:
        return len(self.nuclei)

    @property
    def dimension(self) -> int:
        return 4 * 2 ** len(self.nuclei)

    @property
    def gslac_field(self) -> float:
        """Field (G) where the mS=-1/2 and mS=-3/2 levels would cross
        without hyperfine coupling: B = 2D/gamma_e."""
        return 2.0 * self.d / self.gamma_e

    def with_nucleus(self, nucleus: Nucleus) -> "SpinSystem":
        return replace(self, nuclei=self.nuclei + (nucleus,))

    def to_dict(self) -> dict:
        return {
            "D_MHz": self.d,
            "gamma_e_MHzPerG": self.gamma_e,
            "nuclei": [n.to_dict() for n in self.nuclei],
        }

    def to_json(self, path: str | None = None, indent: int = 2) -> str:
        """Serialize to JSON; writes to ``path`` when given, always returns
        the JSON text."""
        text = json.dumps(self.to_dict(), indent=indent, sort_keys=True)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, raw: dict) -> "SpinSystem":
        if not isinstance(raw, dict):
            raise ValidationError(f"spin system must be a mapping, got {type(raw).__name__}")
        if "D_MHz" not in raw:
            raise ValidationError("spin system requires a 'D_MHz' field")
        nuclei = tuple(Nucleus.from_dict(n) for n in raw.get("nuclei", []))
        return cls(
            d=float(raw["D_MHz"]),
            gamma_e=float(raw.get("gamma_e_MHzPerG", GAMMA_E_MHZ_PER_G)),
            nuclei=nuclei,
        )

    @classmethod
    def from_json(cls, source: str) -> "SpinSystem":
        """Deserialize from a JSON string or a path to a JSON file."""
        text = source
        if "{" not in source:
            try:
                with open(source, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ValidationError(f"cannot read spin system file {source!r}: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid spin system JSON: {exc}") from exc
        return cls.from_dict(raw)


@dataclass(frozen=True, order=True)
class StateLabel:
    """Product-basis label (mS, mI_1, ..., mI_N) attached to an eigenstate."""

    m_s: float
    m_i: tuple[float, ...] = ()

    @property
    def ms_tag(self) -> str:
        return ms_tag(self.m_s)

    @property
    def branch(self) -> str:
        """ASCII nuclear-branch string (``up,down,...`` or ``n/a``)."""
        return config_string(self.m_i)

    @property
    def basis_index(self) -> int:
        """Index of the matching product-basis vector."""
        ie = MS_VALUES.index(self.m_s)
        bits = 0
        for m in self.m_i:
            bits = bits * 2 + (0 if m == 0.5 else 1)
        return ie * 2 ** len(self.m_i) + bits

    def display(self) -> str:
        """Arrow-decorated form for human-readable output."""
        arrows = "".join("↑" if m == 0.5 else "↓" for m in self.m_i)
        inner = self.ms_tag if not arrows else f"{self.ms_tag},{arrows}"
        return f"|{inner}>"

    def __str__(self) -> str:  # ASCII, stable for CSV/JSON use
        if not self.m_i:
            return self.ms_tag
        return f"{self.ms_tag};{self.branch}"


def basis_labels(n_nuclei: int) -> list[StateLabel]:
    """All product-basis labels in basis (index) order."""
    labels = []
    for m_s in MS_VALUES:
        for bits in range(2**n_nuclei):
            m_i = tuple(
                0.5 if ((bits >> (n_nuclei - 1 - k)) & 1) == 0 else -0.5
                for k in range(n_nuclei)
            )
            labels.append(StateLabel(m_s, m_i))
    return labels


def _embed_nuclear(op: np.ndarray, k: int, n_nuclei: int) -> np.ndarray:
    """Embed a single-nucleus operator at position k of the nuclear chain."""
    out = np.eye(1, dtype=complex)
    for j in range(n_nuclei):
        out = np.kron(out, op if j == k else np.eye(2, dtype=complex))
    return out


def build_hamiltonian(system: SpinSystem, b_z: float) -> np.ndarray:
    """Full Hamiltonian matrix (MHz) at c-axis field ``b_z`` (G).

    Returns a real symmetric array when every tensor has zero xy and zy
    components (the generic c-axis case), otherwise a complex Hermitian
    array.
    """
    if not math.isfinite(b_z):
        raise ValidationError(f"field must be finite, got {b_z}")
    n = system.n_nuclei
    sx, sy, sz = spin_operators(ELECTRON_SPIN)
    s_tot = ELECTRON_SPIN * (ELECTRON_SPIN + 1)
    h_e = system.d * (sz @ sz + (s_tot / 3.0) * np.eye(4)) + system.gamma_e * b_z * sz

    dim_n = 2**n
    h = np.kron(h_e, np.eye(dim_n, dtype=complex))
    ix, iy, iz = spin_operators(0.5)
    s_ops = (sx, sy, sz)
    i_ops = (ix, iy, iz)
    for k, nuc in enumerate(system.nuclei):
        a = nuc.tensor.matrix
        for i in range(3):
            for j in range(3):
                if a[i, j] == 0.0:
                    continue
                h += a[i, j] * np.kron(s_ops[i], _embed_nuclear(i_ops[j], k, n))
        h += nuc.gamma_n * b_z * np.kron(np.eye(4, dtype=complex), _embed_nuclear(iz, k, n))

    if all(nuc.tensor.xy == 0.0 and nuc.tensor.zy == 0.0 for nuc in system.nuclei):
        return np.ascontiguousarray(h.real)
    return h


@dataclass(frozen=True)
class EigenSolution:
    """Eigen-decomposition with product-basis labels.

    Eigenstates are kept in ascending-energy order (``energies[i]``,
    eigenvector ``states[:, i]``).  Each eigenstate carries exactly one
    product label, assigned greedily by descending basis overlap so the
    label map is a bijection even through anticrossings.  ``overlaps[i]``
    is the squared overlap with the labeling basis state; the solution is
    flagged ``mixed`` when any overlap drops below 0.5.  Eigenvector phases
    are canonical: the largest-magnitude component of each column is real
    and positive, which makes downstream signed matrix elements
    deterministic.
    """

    field_z: float
    energies: np.ndarray
    states: np.ndarray
    labels: tuple[StateLabel, ...]
    overlaps: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.energies)

    @property
    def mixed(self) -> bool:
        """True when at least one eigenstate has < 50% weight on its label."""
        return bool(np.any(self.overlaps < 0.5))

    def index_of(self, label: StateLabel) -> int:
        index = getattr(self, "_index", None)
        if index is None:
            index = {lab: i for i, lab in enumerate(self.labels)}
            object.__setattr__(self, "_index", index)
        try:
            return index[label]
        except KeyError:
            raise ValidationError(f"no eigenstate labeled {label}") from None

    def energy_of(self, m_s: float, m_i: Iterable[float] = ()) -> float:
        return float(self.energies[self.index_of(StateLabel(m_s, tuple(m_i)))])

    def state_of(self, label: StateLabel) -> np.ndarray:
        return self.states[:, self.index_of(label)]


def _canonicalize_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each eigenvector so its largest-|.| component is real positive."""
    out = vecs.copy()
    for i in range(out.shape[1]):
        col = out[:, i]
        j = int(np.argmax(np.abs(col)))
        pivot = col[j]
        if np.iscomplexobj(out):
            phase = pivot / abs(pivot) if pivot != 0 else 1.0
            out[:, i] = col / phase
        elif pivot < 0:
            out[:, i] = -col
    return out


def diagonalize(h: np.ndarray, b_z: float) -> EigenSolution:
    """Diagonalize a Hamiltonian from :func:`build_hamiltonian` and attach
    product-basis labels.

    The number of nuclei is inferred from the dimension (4 * 2**N).  The
    eigen-residual ``max|H v - E v|`` is verified against
    ``1e-9 * max|H|``; failure raises :class:`NumericalError`.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"Hamiltonian must be square, got shape {h.shape}")
    dim = h.shape[0]
    if dim % 4 != 0 or (dim // 4) & (dim // 4 - 1) != 0:
        raise ValidationError(f"dimension {dim} is not 4 * 2**N")
    herm_err = float(np.max(np.abs(h - h.conj().T)))
    scale = float(np.max(np.abs(h))) or 1.0
    if herm_err > 1e-10 * scale:
        raise ValidationError(f"Hamiltonian is not Hermitian (max asymmetry {herm_err:.3e})")
    n_nuclei = (dim // 4).bit_length() - 1

    energies, vecs = np.linalg.eigh(h)
    residual = float(np.max(np.abs(h @ vecs - vecs * energies)))
    if residual > 1e-9 * scale:
        raise NumericalError(
            f"eigen-decomposition residual {residual:.3e} exceeds 1e-9 * |H| = {1e-9 * scale:.3e}"
        )
    vecs = _canonicalize_phases(vecs)

    labels = basis_labels(n_nuclei)
    ov = np.abs(vecs) ** 2  # ov[b, s]: weight of basis b in eigenstate s
    # Greedy bijective assignment: biggest overlap first; ties broken by
    # lower eigenstate energy, then by basis and eigenstate index.
    order = sorted(
        ((-ov[b, s], energies[s], b, s) for b in range(dim) for s in range(dim)),
    )
    label_of_state: list[StateLabel | None] = [None] * dim
    overlap_of_state = np.zeros(dim)
    used_basis = [False] * dim
    assigned = 0
    for neg_ov, _, b, s in order:
        if used_basis[b] or label_of_state[s] is not None:
            continue
        used_basis[b] = True
        label_of_state[s] = labels[b]
        overlap_of_state[s] = -neg_ov
        assigned += 1
        if assigned == dim:
            break

    return EigenSolution(
        field_z=float(b_z),
        energies=energies,
        states=vecs,
        labels=tuple(label_of_state),  # type: ignore[arg-type]
        overlaps=overlap_of_state,
    )
