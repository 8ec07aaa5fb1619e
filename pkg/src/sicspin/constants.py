"""Physical constants and unit conventions.

All frequencies are in MHz, magnetic fields in gauss (G), times in
microseconds (us); gyromagnetic ratios are therefore in MHz/G and
carry their sign.

The defaults can be overridden without touching code by pointing the
environment variable ``SICSPIN_CONSTANTS`` at a JSON file, e.g.::

    {"gamma_e": 2.8024, "gamma_n": {"Si29": -8.46e-4}}

Overrides are merged over the built-in values at import of
:func:`load_constants` callers (the CLI consults them when building
default systems).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import ValidationError

__all__ = [
    "GAMMA_E_MHZ_PER_G",
    "GAMMA_N_MHZ_PER_G",
    "DEFAULT_ZFS_MHZ",
    "DIMENSION_CAP",
    "Constants",
    "load_constants",
    "gamma_n_for",
]

#: Electron gyromagnetic ratio, MHz/G (positive sign convention: the
#: electron Zeeman term enters as +gamma_e * B * Sz).
GAMMA_E_MHZ_PER_G: float = 2.8025

#: Nuclear gyromagnetic ratios by isotope, MHz/G (signed).
GAMMA_N_MHZ_PER_G: dict[str, float] = {
    "Si29": -8.465e-4,
    "C13": +1.0705e-3,
}

#: Default zero-field splitting parameter 2D = 70 MHz -> D = 35 MHz.
DEFAULT_ZFS_MHZ: float = 35.0

#: Largest Hilbert-space dimension accepted by the Hamiltonian builder
#: (4 electron levels x 2^N nuclei; 256 = six spin-1/2 nuclei).
DIMENSION_CAP: int = 256


@dataclass(frozen=True)
class Constants:
    """Resolved constant set (built-ins merged with optional overrides)."""

    gamma_e: float = GAMMA_E_MHZ_PER_G
    gamma_n: dict[str, float] = field(default_factory=lambda: dict(GAMMA_N_MHZ_PER_G))
    zfs: float = DEFAULT_ZFS_MHZ


def load_constants(path: str | None = None) -> Constants:
    """Return the constant set, honoring an override file.

    Parameters
    ----------
    path : str, optional
        JSON file with any of the keys ``gamma_e``, ``gamma_n`` (mapping
        isotope -> MHz/G) and ``zfs``.  When omitted the environment
        variable ``SICSPIN_CONSTANTS`` is consulted; when that is unset,
        built-ins are returned.
    """
    if path is None:
        path = os.environ.get("SICSPIN_CONSTANTS")
    if not path:
        return Constants()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read constants override file {path!r}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError(f"constants override file {path!r} must hold a JSON object")
    gamma_n = dict(GAMMA_N_MHZ_PER_G)
    gamma_n.update({str(k): float(v) for k, v in raw.get("gamma_n", {}).items()})
    return Constants(
        gamma_e=float(raw.get("gamma_e", GAMMA_E_MHZ_PER_G)),
        gamma_n=gamma_n,
        zfs=float(raw.get("zfs", DEFAULT_ZFS_MHZ)),
    )


def gamma_n_for(isotope: str, constants: Constants | None = None) -> float:
    """Gyromagnetic ratio (MHz/G) for a known isotope.

    Unknown isotopes raise :class:`ValidationError`; supply an explicit
    ``gamma_n`` on the nucleus instead.
    """
    table = (constants or Constants()).gamma_n
    try:
        return table[isotope]
    except KeyError:
        known = ", ".join(sorted(table))
        raise ValidationError(
            f"no built-in gyromagnetic ratio for isotope {isotope!r} (known: {known}); "
            "pass gamma_n explicitly"
        ) from None
