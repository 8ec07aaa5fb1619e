"""Shared fixtures: reference spin systems used across the test modules."""

from __future__ import annotations

import numpy as np
import pytest

from sicspin import HyperfineTensor, Nucleus, SpinSystem

# Reference hyperfine tensors (MHz) for two well-characterized Si shells.
SI_II = dict(zz=8.66, xx=9.00, yy=9.03)
SI_IV = dict(zz=-2.2, xx=-2.7, yy=-2.6)


@pytest.fixture
def bare_system() -> SpinSystem:
    """Electron spin only, D = 35 MHz."""
    return SpinSystem(d=35.0)


@pytest.fixture
def si_ii_system() -> SpinSystem:
    """One Si29 nucleus with the strong-shell tensor, D = 35 MHz."""
    return SpinSystem(d=35.0, nuclei=(Nucleus("Si29", HyperfineTensor(**SI_II)),))


@pytest.fixture
def si_ii_system_d3489() -> SpinSystem:
    """Same nucleus at the ODMR-calibrated D = 34.89 MHz."""
    return SpinSystem(d=34.89, nuclei=(Nucleus("Si29", HyperfineTensor(**SI_II)),))


@pytest.fixture
def si_iv_system() -> SpinSystem:
    """One Si29 nucleus with the weak-shell tensor, D = 35 MHz."""
    return SpinSystem(d=35.0, nuclei=(Nucleus("Si29", HyperfineTensor(**SI_IV)),))


def make_system(d: float, *tensors: dict, isotope: str = "Si29") -> SpinSystem:
    """Build a system from keyword-tensor dicts, all with the same isotope."""
    nuclei = tuple(Nucleus(isotope, HyperfineTensor(**t)) for t in tensors)
    return SpinSystem(d=d, nuclei=nuclei)


def random_tensor(rng: np.random.Generator, scale: float = 10.0) -> HyperfineTensor:
    """Random symmetric-tensor components, uniform in [-scale, scale]."""
    zz, xx, yy, zx, xy, zy = rng.uniform(-scale, scale, size=6)
    return HyperfineTensor(zz=zz, xx=xx, yy=yy, zx=zx, xy=xy, zy=zy)


def random_system(rng: np.random.Generator, max_nuclei: int = 2) -> SpinSystem:
    """Random system with 0..max_nuclei nuclei of random isotopes."""
    n = int(rng.integers(0, max_nuclei + 1))
    nuclei = tuple(
        Nucleus(
            "Si29" if rng.random() < 0.5 else "C13",
            random_tensor(rng),
        )
        for _ in range(n)
    )
    return SpinSystem(d=float(rng.uniform(5.0, 60.0)), nuclei=nuclei)
