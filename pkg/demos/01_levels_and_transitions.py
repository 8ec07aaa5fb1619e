"""Energy levels and labeled transitions of the spin-3/2 center.

Sweeps the axial magnetic field, plots the four electron sublevels of
the bare center next to the eight hyperfine-split levels with one
strongly coupled 29Si nucleus, and tabulates the labeled transitions at
a typical working field.  The level anticrossing of the lower doublet
(where the L line crosses zero) sits at B = 2D / gamma_e.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sicspin import (
    GAMMA_E_MHZ_PER_G,
    HyperfineTensor,
    Nucleus,
    SpinSystem,
    all_transitions,
    build_hamiltonian,
    diagonalize,
)

OUT = Path(__file__).resolve().parent / "output"
OUT.mkdir(exist_ok=True)

D = 35.0
BARE = SpinSystem(d=D)
COUPLED = SpinSystem(
    d=D, nuclei=(Nucleus("Si29", HyperfineTensor(zz=8.66, xx=9.00, yy=9.03)),)
)
GSLAC = 2.0 * D / GAMMA_E_MHZ_PER_G


def sorted_levels(system: SpinSystem, fields: np.ndarray) -> np.ndarray:
    rows = []
    for b in fields:
        eig = diagonalize(build_hamiltonian(system, float(b)), float(b))
        rows.append(eig.energies)
    return np.array(rows)


def main() -> None:
    fields = np.arange(0.0, 200.5, 0.5)
    bare = sorted_levels(BARE, fields)
    coupled = sorted_levels(COUPLED, fields)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, levels, title in (
        (ax1, bare, "bare electron (S = 3/2)"),
        (ax2, coupled, "with one $^{29}$Si nucleus"),
    ):
        ax.plot(fields, levels, lw=1)
        ax.axvline(GSLAC, color="gray", ls=":", lw=1)
        ax.set_xlabel("B (G)")
        ax.set_title(title)
    ax1.set_ylabel("E (MHz)")
    ax1.annotate(
        f"anticrossing\n{GSLAC:.2f} G", (GSLAC, bare.max() * 0.75), fontsize=8
    )
    fig.tight_layout()
    fig.savefig(OUT / "levels_vs_field.png", dpi=150)
    print(f"wrote {OUT / 'levels_vs_field.png'}")

    b_work = 150.0
    eig = diagonalize(build_hamiltonian(COUPLED, b_work), b_work)
    table = all_transitions(eig, COUPLED)
    print(f"\nlabeled transitions at B = {b_work:g} G:")
    print(table.to_csv(str(OUT / "transitions_150G.csv")), end="")
    print(f"wrote {OUT / 'transitions_150G.csv'}")

    l_lines = sorted(t.freq for t in table.select("electron", "L"))
    print(
        f"\nL doublet splitting at {b_work:g} G: "
        f"{l_lines[1] - l_lines[0]:.3f} MHz (secular |A_zz| = 8.66)"
    )


if __name__ == "__main__":
    main()
