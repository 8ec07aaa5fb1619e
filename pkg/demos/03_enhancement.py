"""Hyperfine enhancement of the nuclear gyromagnetic ratio.

Near the ground-state level anticrossing the electron-nuclear mixing
multiplies the effective nuclear gyromagnetic ratio by a factor alpha
that can exceed several hundred and flips sign across the anticrossing.
This demo sweeps alpha for a weakly coupled 29Si shell, compares the
exact matrix-element calculation with the closed-form mixing-angle
expression, and shows the resulting nuclear Rabi-frequency boost.
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
    enhancement_curve,
    gamma_n_for,
    rabi_frequency,
)

OUT = Path(__file__).resolve().parent / "output"
OUT.mkdir(exist_ok=True)

D = 35.0
SYSTEM = SpinSystem(
    d=D, nuclei=(Nucleus("Si29", HyperfineTensor(zz=-2.2, xx=-2.7, yy=-2.6)),)
)
GSLAC = 2.0 * D / GAMMA_E_MHZ_PER_G


def main() -> None:
    fields = np.arange(0.5, 60.01, 0.25)
    exact = enhancement_curve(SYSTEM, fields, sublevel=-1.5, method="exact")
    analytic = enhancement_curve(SYSTEM, fields, sublevel=-1.5, method="analytic")

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.8))
    ax1.plot(exact.b, exact.alpha, lw=1, label="exact")
    ax1.plot(analytic.b, analytic.alpha, lw=1, ls="--", label="mixing angle")
    ax1.axvline(GSLAC, color="gray", ls=":", lw=1)
    ax1.set_ylim(-450, 450)
    ax1.set_xlabel("B (G)")
    ax1.set_ylabel(r"$\alpha$  (mS = $-3/2$)")
    ax1.set_title("sign flip across the anticrossing")
    ax1.legend(fontsize=8)

    for ms, color in ((-1.5, "C0"), (-0.5, "C1"), (0.5, "C2"), (1.5, "C3")):
        curve = enhancement_curve(SYSTEM, fields, sublevel=ms, method="exact")
        ax2.semilogy(curve.b, np.abs(curve.alpha), lw=1, color=color, label=f"mS = {ms:+g}")
    ax2.axvline(GSLAC, color="gray", ls=":", lw=1)
    ax2.set_xlabel("B (G)")
    ax2.set_ylabel(r"$|\alpha|$")
    ax2.set_title("all sublevels")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(OUT / "enhancement.png", dpi=150)
    exact.to_csv(str(OUT / "enhancement_exact.csv"))
    print(f"wrote {OUT / 'enhancement.png'} and {OUT / 'enhancement_exact.csv'}")

    finite = np.where(np.isfinite(exact.alpha), np.abs(exact.alpha), -np.inf)
    i = int(np.argmax(finite))
    alpha_peak = float(exact.alpha[i])
    print(
        f"\npeak |alpha| = {abs(alpha_peak):.0f} at B = {exact.b[i]:.2f} G "
        f"(bare-electron anticrossing at {GSLAC:.2f} G)"
    )

    gamma_n = gamma_n_for("Si29")
    b1 = 2.0
    bare = rabi_frequency(1.0, gamma_n, b1)
    boosted = rabi_frequency(alpha_peak, gamma_n, b1)
    print(
        f"nuclear Rabi frequency for a {b1:g} G drive: {bare * 1e3:.3f} kHz bare, "
        f"{boosted * 1e3:.0f} kHz enhanced (x{abs(alpha_peak):.0f})"
    )


if __name__ == "__main__":
    main()
