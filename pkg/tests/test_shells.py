"""Lattice-shell catalog, splitting prediction, assignment, occupancy MC."""

from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

from sicspin import (
    HyperfineTensor,
    ShellCatalog,
    ShellEntry,
    ValidationError,
    assign,
    bundled_catalog,
    occupancy_statistics,
    predicted_splitting,
)

# frozen exact doublet splittings of the bundled groups at 150 G, D = 35
FROZEN_SPLITTINGS = {
    "C_I": 30.0,
    "Si_II": 8.467,
    "C_III": 4.803,
    "Si_IV": 2.217,
    "C_V": 3.962,
    "C_VI": 0.418,
}


# ----------------------------------------------------------------- catalog


def test_bundled_catalog_contents():
    cat = bundled_catalog()
    assert [e.group for e in cat.entries] == list(FROZEN_SPLITTINGS)
    assert cat.abundances == {"Si29": 0.047, "C13": 0.011}
    by = {e.group: e for e in cat.entries}
    assert by["Si_II"].multiplicity == 12
    assert by["Si_II"].tensor.zz == 8.66
    assert by["Si_IV"].multiplicity == 6
    assert by["C_VI"].multiplicity == 24
    assert by["C_I"].source == "placeholder"
    assert by["C_V"].source == "placeholder"
    assert {e.source for e in cat.entries} <= {"DFT", "experimental", "placeholder"}
    assert all(e.isotope in cat.abundances for e in cat.entries)


def test_catalog_validation():
    t = HyperfineTensor(zz=1.0)
    with pytest.raises(ValidationError):
        ShellEntry("G", "C13", 0, t, "DFT")
    with pytest.raises(ValidationError):
        ShellEntry("G", "C13", 4, t, "guessed")
    with pytest.raises(ValidationError):
        ShellCatalog(abundances={"C13": 1.2}, entries=[])
    with pytest.raises(ValidationError):
        ShellCatalog(
            abundances={"C13": 0.011},
            entries=[ShellEntry("G", "C13", 4, t, "DFT"), ShellEntry("G", "C13", 2, t, "DFT")],
        )
    with pytest.raises(ValidationError):
        ShellCatalog(
            abundances={"C13": 0.011}, entries=[ShellEntry("G", "Si29", 4, t, "DFT")]
        )
    with pytest.raises(ValidationError):
        bundled_catalog().entry("Si_XX")


def test_catalog_json_roundtrip(tmp_path):
    cat = bundled_catalog()
    path = tmp_path / "catalog.json"
    cat.to_json(str(path))
    back = ShellCatalog.from_json(str(path))
    assert back.to_dict() == cat.to_dict()


# ----------------------------------------------------------- splittings


def test_exact_splittings_at_150_g():
    cat = bundled_catalog()
    for group, expect in FROZEN_SPLITTINGS.items():
        got = predicted_splitting(cat.entry(group), 150.0)
        assert got == pytest.approx(expect, abs=2e-3), group


def test_secular_splitting_is_abs_zz():
    cat = bundled_catalog()
    for group in FROZEN_SPLITTINGS:
        e = cat.entry(group)
        assert predicted_splitting(e, 150.0, method="secular") == abs(e.tensor.zz)


def test_zz_only_tensor_splits_exactly_by_zz():
    t = HyperfineTensor(zz=30.0)
    assert predicted_splitting(t, 150.0, isotope="C13") == pytest.approx(30.0, abs=1e-9)


def test_low_field_warning():
    cat = bundled_catalog()
    with pytest.warns(UserWarning, match="anticrossing"):
        predicted_splitting(cat.entry("Si_II"), 50.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        predicted_splitting(cat.entry("Si_II"), 150.0)


def test_predicted_splitting_validation():
    cat = bundled_catalog()
    with pytest.raises(ValidationError):
        predicted_splitting(cat.entry("Si_II"), 150.0, line="Q")
    with pytest.raises(ValidationError):
        predicted_splitting(cat.entry("Si_II"), 150.0, method="guess")
    # a bare tensor defaults to Si29; the gyromagnetic sign barely matters
    si = predicted_splitting(HyperfineTensor(zz=5.0, xx=5.0, yy=5.0), 150.0)
    c = predicted_splitting(HyperfineTensor(zz=5.0, xx=5.0, yy=5.0), 150.0, isotope="C13")
    assert si == pytest.approx(c, rel=1e-2)
    assert si != c


# ----------------------------------------------------------- assignment


def test_assignment_rankings():
    cat = bundled_catalog()
    cases = {8.66: "Si_II", 2.2: "Si_IV", 4.0: "C_V", 30.0: "C_I"}
    for measured, expect in cases.items():
        ranked = assign(cat, measured, 150.0)
        assert ranked, measured
        assert ranked[0].group == expect, (measured, [a.group for a in ranked])
    assert assign(cat, 6.5, 150.0) == []


def test_assignment_probabilities_normalized():
    cat = bundled_catalog()
    ranked = assign(cat, 4.3, 150.0, tolerance=1.0)
    assert len(ranked) >= 2  # C_III and C_V both within 1 MHz
    total = sum(a.probability for a in ranked)
    assert total == pytest.approx(1.0, rel=1e-9)
    scores = [a.score for a in ranked]
    assert scores == sorted(scores, reverse=True)
    groups = {a.group for a in ranked}
    assert groups == {"C_III", "C_V"}


def test_assignment_score_favors_abundant_multiplied_sites():
    # equidistant candidates rank by abundance * multiplicity
    t = HyperfineTensor(zz=5.0)
    cat = ShellCatalog(
        abundances={"Si29": 0.047, "C13": 0.011},
        entries=[
            ShellEntry("si", "Si29", 12, t, "DFT"),
            ShellEntry("c", "C13", 12, t, "DFT"),
        ],
    )
    ranked = assign(cat, 5.0, 150.0)
    assert ranked[0].group == "si"
    assert ranked[0].probability > ranked[1].probability
    assert ranked[0].predicted == ranked[1].predicted


def test_assignment_validation():
    cat = bundled_catalog()
    with pytest.raises(ValidationError):
        assign(cat, -1.0, 150.0)
    with pytest.raises(ValidationError):
        assign(cat, 8.66, 150.0, tolerance=0.0)


# ----------------------------------------------------------- occupancy MC


def test_occupancy_reproducible_and_seed_sensitive():
    cat = bundled_catalog()
    a = occupancy_statistics(cat, 2000, seed=7)
    b = occupancy_statistics(cat, 2000, seed=7)
    c = occupancy_statistics(cat, 2000, seed=8)
    assert a.strongest_counts == b.strongest_counts
    assert a.presence_counts == b.presence_counts
    assert a.strongest_counts != c.strongest_counts


def test_occupancy_presence_matches_binomial():
    cat = bundled_catalog()
    n = 10000
    res = occupancy_statistics(cat, n, seed=12345)
    assert sum(res.strongest_counts.values()) + res.none_count == n
    for e in cat.entries:
        p = 1.0 - (1.0 - cat.abundances[e.isotope]) ** e.multiplicity
        mean, sd = n * p, math.sqrt(n * p * (1.0 - p))
        z = (res.presence_counts[e.group] - mean) / sd
        assert abs(z) <= 3.0, (e.group, z)


def test_occupancy_strongest_hierarchy():
    # Exact hierarchy: group g dominates when present and every
    # stronger-splitting group is absent.
    cat = bundled_catalog()
    n = 10000
    res = occupancy_statistics(cat, n, seed=12345)
    order = sorted(
        (e for e in cat.entries), key=lambda e: res.splittings[e.group], reverse=True
    )
    detectable = [e for e in order if res.splittings[e.group] >= res.detection_floor]
    absent_prob = 1.0
    for e in detectable:
        p_here = 1.0 - (1.0 - cat.abundances[e.isotope]) ** e.multiplicity
        expect = absent_prob * p_here
        sd = math.sqrt(n * expect * (1.0 - expect))
        z = (res.strongest_counts[e.group] - n * expect) / sd
        assert abs(z) <= 3.5, (e.group, z)
        absent_prob *= 1.0 - p_here
    # sub-floor groups never dominate at the default floor
    assert res.strongest_counts["C_VI"] == 0
    # per-site Si/C dominance bias: Si_II leads C_III by roughly the
    # abundance ratio once multiplicity is divided out (both mult 12)
    si = res.strongest_counts["Si_II"]
    c3 = res.strongest_counts["C_III"]
    assert 3.0 < si / c3 < 7.0  # frozen 6.34 raw; abundance ratio 4.27


def test_occupancy_lower_floor_reveals_weak_shell():
    cat = bundled_catalog()
    res = occupancy_statistics(cat, 10000, seed=12345, detection_floor=0.1)
    assert res.strongest_counts["C_VI"] > 0


def test_occupancy_histogram_and_csv():
    cat = bundled_catalog()
    res = occupancy_statistics(cat, 5000, seed=3)
    hist = res.histogram()
    assert sum(hist.values()) == 5000
    assert 0.0 in hist  # defects with nothing detectable
    assert 8.5 in hist  # Si_II bin (8.467 rounds to 8.5)
    text = res.to_csv()
    lines = text.splitlines()
    assert lines[0] == "splitting_bin_MHz,count"
    assert len(lines) == 1 + len(hist)


def test_occupancy_validation():
    cat = bundled_catalog()
    with pytest.raises(ValidationError):
        occupancy_statistics(cat, 0, seed=1)
