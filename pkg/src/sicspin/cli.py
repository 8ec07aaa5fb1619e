"""Command-line interface.

Subcommands: levels, transitions, spectrum, fit, enhance, dnp, assign,
rabi, ramsey.  Every output file is written atomically (temp file +
rename) and accompanied by a run manifest ``<name>.manifest.json``
recording the command, arguments, SHA-256 hashes of input files, package
and library versions, the RNG seed (when one is used) and the resolved
constants -- but no timestamps, so repeated runs with the same inputs
produce byte-identical outputs and manifests.

Exit codes: 0 on success, 1 for validation/usage errors, 2 for numerical
failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile

import numpy as np
import scipy

from . import __version__
from .constants import load_constants
from .enhancement import enhancement_curve
from .errors import NumericalError, SicspinError, ValidationError
from .fitting import FitProblem, fit_hamiltonian
from .polarization import build_rate_model, polarization_curve
from .shells import ShellCatalog, assign as assign_groups, bundled_catalog, occupancy_statistics
from .spectra import odmr_spectrum, odnmr_spectrum, rabi_trace, ramsey_trace
from .system import (
    SpinSystem,
    StateLabel,
    basis_labels,
    build_hamiltonian,
    diagonalize,
    parse_ms_tag,
)
from .transitions import all_transitions, electron_transitions, nuclear_transitions

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as ValidationError so
    the process exits with code 1 (argparse's default would be 2, which
    this tool reserves for numerical failures)."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _manifest_path(out_path: str) -> str:
    stem, _ = os.path.splitext(out_path)
    return stem + ".manifest.json"


def _write_output(out_path: str, text: str, manifest: dict) -> None:
    _atomic_write(out_path, text)
    manifest = dict(manifest)
    manifest["output"] = os.path.basename(out_path)
    _atomic_write(
        _manifest_path(out_path), json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _build_manifest(args: argparse.Namespace, inputs: dict[str, str]) -> dict:
    arguments = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")
    }
    consts = load_constants()
    return {
        "command": args.command,
        "arguments": arguments,
        "input_sha256": {path: _sha256(path) for path in sorted(inputs.values())},
        "seed": getattr(args, "seed", None),
        "constants": {
            "gamma_e_MHzPerG": consts.gamma_e,
            "gamma_n_MHzPerG": dict(sorted(consts.gamma_n.items())),
            "zfs_MHz": consts.zfs,
        },
        "versions": {
            "sicspin": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
    }


def _load_system(args: argparse.Namespace, inputs: dict[str, str]) -> SpinSystem:
    if getattr(args, "system", None):
        inputs["system"] = args.system
        return SpinSystem.from_json(args.system)
    consts = load_constants()
    d = args.d if getattr(args, "d", None) is not None else consts.zfs
    return SpinSystem(d=d, gamma_e=consts.gamma_e)


def _field_grid(start: float, stop: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValidationError(f"step must be positive, got {step}")
    if stop < start:
        raise ValidationError(f"stop ({stop}) must be >= start ({start})")
    return np.arange(start, stop + step / 2.0, step)


def _time_grid(t_max: float, n_times: int) -> np.ndarray:
    if t_max <= 0:
        raise ValidationError(f"t-max must be positive, got {t_max}")
    if n_times < 2:
        raise ValidationError(f"n-times must be >= 2, got {n_times}")
    return np.linspace(0.0, t_max, n_times)


def _parse_label(text: str, n_nuclei: int) -> StateLabel:
    parts = text.split(";")
    m_s = parse_ms_tag(parts[0])
    if len(parts) == 1 or parts[1] in ("", "n/a"):
        m_i: tuple[float, ...] = ()
    else:
        tokens = parts[1].split(",")
        values = {"up": 0.5, "down": -0.5}
        try:
            m_i = tuple(values[t.strip()] for t in tokens)
        except KeyError as exc:
            raise ValidationError(f"bad nuclear token in label {text!r}: {exc}") from None
    if len(m_i) != n_nuclei:
        raise ValidationError(
            f"label {text!r} has {len(m_i)} nuclear tokens, system has {n_nuclei}"
        )
    return StateLabel(m_s, m_i)


def _prepare_populations(spec: str, system: SpinSystem) -> dict[StateLabel, float]:
    labels = basis_labels(system.n_nuclei)
    if spec == "uniform":
        return {lab: 1.0 / len(labels) for lab in labels}
    for prefix in ("ms:", "electron:"):  # same meaning, both accepted
        if spec.startswith(prefix):
            m_s = parse_ms_tag(spec[len(prefix):])
            manifold = [lab for lab in labels if lab.m_s == m_s]
            return {lab: 1.0 / len(manifold) for lab in manifold}
    if spec.startswith("state:"):
        return {_parse_label(spec[6:], system.n_nuclei): 1.0}
    raise ValidationError(
        f"unknown preparation {spec!r} (use 'uniform', 'ms:<tag>', 'electron:<tag>' "
        "or 'state:<label>')"
    )


def _load_populations(path: str, system: SpinSystem) -> dict[StateLabel, float]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read populations file {path!r}: {exc}") from exc
    labels = basis_labels(system.n_nuclei)
    if isinstance(raw, dict) and "populations" in raw:
        raw = raw["populations"]
    if isinstance(raw, list):
        if len(raw) != len(labels):
            raise ValidationError(
                f"populations list has length {len(raw)}, expected {len(labels)}"
            )
        return {lab: float(p) for lab, p in zip(labels, raw)}
    if isinstance(raw, dict):
        return {
            _parse_label(str(k), system.n_nuclei): float(v) for k, v in raw.items()
        }
    raise ValidationError("populations file must hold a list or a label -> value map")


# ---------------------------------------------------------------- commands


def cmd_levels(args: argparse.Namespace) -> int:
    inputs: dict[str, str] = {}
    system = _load_system(args, inputs)
    grid = _field_grid(args.b_start, args.b_stop, args.b_step)
    lines = ["B_G,label,E_MHz"]
    for b in grid:
        eig = diagonalize(build_hamiltonian(system, float(b)), float(b))
        for i in range(eig.dimension):
            lines.append(
                f"{format(float(b), '.12g')},{eig.labels[i]},{format(float(eig.energies[i]), '.12g')}"
            )
    _write_output(args.out, "\n".join(lines) + "\n", _build_manifest(args, inputs))
    print(f"wrote {len(grid)} field points x {system.dimension} levels to {args.out}")
    return 0


def cmd_transitions(args: argparse.Namespace) -> int:
    inputs: dict[str, str] = {}
    system = _load_system(args, inputs)
    eig = diagonalize(build_hamiltonian(system, args.b), args.b)
    if args.kind == "electron":
        table = electron_transitions(eig, system, allow_mixed=args.allow_mixed)
    elif args.kind == "nuclear":
        table = nuclear_transitions(eig, system, allow_mixed=args.allow_mixed)
    else:
        table = all_transitions(eig, system, allow_mixed=args.allow_mixed)
    fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
    text = table.to_json() if fmt == "json" else table.to_csv()
    _write_output(args.out, text, _build_manifest(args, inputs))
    print(f"wrote {len(table)} transitions to {args.out}")
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    inputs: dict[str, str] = {}
    system = _load_system(args, inputs)
    eig = diagonalize(build_hamiltonian(system, args.b), args.b)
    table = all_transitions(eig, system, allow_mixed=args.allow_mixed)
    if args.populations:
        inputs["populations"] = args.populations
        populations = _load_populations(args.populations, system)
    else:
        populations = _prepare_populations(args.prepare, system)
    entries = [t for t in table if t.kind == ("electron" if args.kind == "odmr" else "nuclear")]
    if not entries:
        raise ValidationError(f"no {args.kind} transitions exist for this system")
    if args.grid_start is None or args.grid_stop is None:
        freqs = [t.freq for t in entries]
        lo = min(freqs) - 10.0 * args.fwhm
        hi = max(freqs) + 10.0 * args.fwhm
    else:
        lo, hi = args.grid_start, args.grid_stop
    step = args.grid_step if args.grid_step is not None else args.fwhm / 10.0
    grid = _field_grid(lo, hi, step)
    maker = odmr_spectrum if args.kind == "odmr" else odnmr_spectrum
    spectrum = maker(table, populations, grid, fwhm=args.fwhm, lineshape=args.lineshape)
    _write_output(args.out, spectrum.to_csv(), _build_manifest(args, inputs))
    print(f"wrote {args.kind} spectrum ({len(grid)} points) to {args.out}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    inputs = {"problem": args.problem}
    problem = FitProblem.from_json(args.problem)
    result = fit_hamiltonian(problem, max_iter=args.max_iter, cost_tol=args.tol)
    _write_output(args.out, result.to_json(), _build_manifest(args, inputs))
    status = "converged" if result.converged else "NOT converged"
    print(f"fit {status} in {result.iterations} iterations; rms residual "
          f"{result.rms_residual:.3e} MHz")
    for name in result.free:
        print(f"  {name} = {result.params[name]:.6f} +/- {result.uncertainties[name]:.6f}")
    if not result.converged:
        raise NumericalError(f"fit did not converge: {result.message}")
    return 0


def cmd_enhance(args: argparse.Namespace) -> int:
    inputs: dict[str, str] = {}
    system = _load_system(args, inputs)
    grid = _field_grid(args.b_start, args.b_stop, args.b_step)
    curve = enhancement_curve(
        system, grid, sublevel=args.sublevel, method=args.method, nucleus=args.nucleus
    )
    _write_output(args.out, curve.to_csv(), _build_manifest(args, inputs))
    finite = np.isfinite(curve.alpha)
    if np.any(finite):
        peak = float(np.nanmax(np.abs(curve.alpha)))
        print(f"wrote enhancement curve ({len(grid)} points, peak |alpha| = {peak:.1f}) "
              f"to {args.out}")
    else:
        print(f"wrote enhancement curve ({len(grid)} points) to {args.out}")
    return 0


def cmd_dnp(args: argparse.Namespace) -> int:
    inputs: dict[str, str] = {}
    system = _load_system(args, inputs)
    model = build_rate_model(
        system, args.b, line=args.line, gamma_opt=args.gamma_opt, relaxation=args.relaxation
    )
    pops = _prepare_populations(args.prepare, system)
    p0 = np.array([pops.get(lab, 0.0) for lab in model.labels])
    subset = (-0.5, -1.5) if args.scope == "manifold" else None
    times = _time_grid(args.t_max, args.n_times)
    curve = polarization_curve(model, p0, times, nucleus=args.nucleus, electron_subset=subset)
    _write_output(args.out, curve.to_csv(), _build_manifest(args, inputs))
    if curve.fitted_T is not None:
        print(
            f"nuclear polarization ({args.scope}): P(0)={curve.values[0]:+.4f} -> "
            f"P({args.t_max:g} us)={curve.values[-1]:+.4f}; buildup T={curve.fitted_T:.3f} us "
            f"(R^2={curve.r_squared:.5f})"
        )
    else:
        print(
            f"nuclear polarization ({args.scope}): P(0)={curve.values[0]:+.4f} -> "
            f"P({args.t_max:g} us)={curve.values[-1]:+.4f}; no buildup fit (flat curve)"
        )
    return 0


def cmd_assign(args: argparse.Namespace) -> int:
    inputs: dict[str, str] = {}
    if args.catalog:
        inputs["catalog"] = args.catalog
        catalog = ShellCatalog.from_json(args.catalog)
    else:
        catalog = bundled_catalog()

    if args.monte_carlo is not None:
        result = occupancy_statistics(
            catalog,
            n_defects=args.monte_carlo,
            seed=args.seed,
            b_z=args.b,
            line=args.line,
            detection_floor=args.detection_floor,
        )
        _write_output(args.out, result.to_csv(), _build_manifest(args, inputs))
        detected = result.n_defects - result.none_count
        print(
            f"simulated {result.n_defects} defects (seed {args.seed}): "
            f"{detected} with a detectable satellite doublet"
        )
        for group, count in sorted(result.strongest_counts.items()):
            if count:
                print(f"  {group}: strongest for {count} defects "
                      f"({result.splittings[group]:.2f} MHz)")
        return 0

    if args.splitting is None:
        raise ValidationError("provide --splitting (or --monte-carlo N)")
    ranking = assign_groups(
        catalog,
        splitting=args.splitting,
        b_z=args.b,
        line=args.line,
        tolerance=args.tolerance,
        proximity_sigma=args.proximity_sigma,
    )
    payload = {
        "measured_MHz": args.splitting,
        "B_G": args.b,
        "line": args.line,
        "candidates": [a.to_dict() for a in ranking],
    }
    _write_output(
        args.out,
        json.dumps(payload, indent=2, sort_keys=True) + "\n",
        _build_manifest(args, inputs),
    )
    if ranking:
        best = ranking[0]
        print(
            f"best match: {best.group} (predicted {best.predicted:.3f} MHz, "
            f"probability {best.probability:.2f}); {len(ranking)} candidate(s) written"
        )
    else:
        print(f"no catalog group within {args.tolerance:g} MHz of {args.splitting:g} MHz")
    return 0


def cmd_rabi(args: argparse.Namespace) -> int:
    if args.omega is None:
        if args.alpha is None or args.gamma_n is None or args.b1 is None:
            raise ValidationError("provide --omega, or all of --alpha, --gamma-n and --b1")
        from .enhancement import rabi_frequency

        omega = rabi_frequency(args.alpha, args.gamma_n, args.b1)
    else:
        omega = args.omega
    trace = rabi_trace(
        omega, _time_grid(args.t_max, args.n_times), detuning=args.detuning, decay=args.decay
    )
    _write_output(args.out, trace.to_csv(), _build_manifest(args, {}))
    print(f"wrote driven-oscillation trace (Rabi frequency {omega:.6g} MHz) to {args.out}")
    return 0


def cmd_ramsey(args: argparse.Namespace) -> int:
    trace = ramsey_trace(
        args.detuning, args.t2star, _time_grid(args.t_max, args.n_times), envelope=args.envelope
    )
    _write_output(args.out, trace.to_csv(), _build_manifest(args, {}))
    print(f"wrote free-precession trace (detuning {args.detuning:g} MHz, "
          f"T2*={args.t2star:g} us) to {args.out}")
    return 0


# ----------------------------------------------------------------- parser


def _add_system_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--system", help="spin system JSON file (default: bare electron)")
    sub.add_argument("--d", type=float, default=None,
                     help="zero-field splitting D in MHz for the default system")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="sicspin",
        description="Spin-3/2 center spin physics: levels, transitions, spectra, "
        "anticrossing polarization, estimation and shell assignment.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = subs.add_parser("levels", help="energy levels over a field sweep (CSV)")
    _add_system_options(p)
    p.add_argument("--b-start", type=float, default=0.0, help="sweep start in G")
    p.add_argument("--b-stop", type=float, default=200.0, help="sweep stop in G")
    p.add_argument("--b-step", type=float, default=1.0, help="sweep step in G")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_levels)

    p = subs.add_parser("transitions", help="transition table at one field (CSV/JSON)")
    _add_system_options(p)
    p.add_argument("--b", type=float, required=True, help="field in G")
    p.add_argument("--kind", choices=("all", "electron", "nuclear"), default="all")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="default: inferred from --out extension")
    p.add_argument("--allow-mixed", action="store_true",
                   help="keep labeled transitions through hybridized regions")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transitions)

    p = subs.add_parser("spectrum", help="synthetic ODMR/ODNMR spectrum (CSV)")
    _add_system_options(p)
    p.add_argument("--b", type=float, required=True, help="field in G")
    p.add_argument("--kind", choices=("odmr", "odnmr"), default="odmr")
    p.add_argument("--fwhm", type=float, default=0.3, help="linewidth in MHz")
    p.add_argument("--lineshape", choices=("lorentzian", "gaussian"), default="lorentzian")
    p.add_argument("--grid-start", type=float, default=None, help="grid start in MHz")
    p.add_argument("--grid-stop", type=float, default=None, help="grid stop in MHz")
    p.add_argument("--grid-step", type=float, default=None, help="grid step in MHz")
    p.add_argument("--prepare", default="ms:-3/2",
                   help="population preset: uniform | ms:<tag> | state:<label>")
    p.add_argument("--populations", default=None,
                   help="JSON file with explicit populations (overrides --prepare)")
    p.add_argument("--allow-mixed", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = subs.add_parser("fit", help="least-squares Hamiltonian fit (JSON result)")
    p.add_argument("--problem", required=True, help="fit problem JSON file")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-10, help="relative cost tolerance")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = subs.add_parser("enhance", help="enhancement factor over a field sweep (CSV)")
    _add_system_options(p)
    p.add_argument("--b-start", type=float, required=True)
    p.add_argument("--b-stop", type=float, required=True)
    p.add_argument("--b-step", type=float, default=0.1)
    p.add_argument("--sublevel", default="-3/2", help="electron sublevel tag")
    p.add_argument("--method", choices=("exact", "analytic"), default="exact")
    p.add_argument("--nucleus", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_enhance)

    p = subs.add_parser("dnp", help="optically pumped nuclear polarization curve (CSV)")
    _add_system_options(p)
    p.add_argument("--b", type=float, required=True, help="field in G")
    p.add_argument("--line", choices=("A1", "A2"), default="A1")
    p.add_argument("--gamma-opt", type=float, default=10.0, help="pump rate in 1/us")
    p.add_argument("--relaxation", type=float, default=1e-4,
                   help="uniform relaxation rate in 1/us")
    p.add_argument("--t-max", type=float, default=200.0, help="final time in us")
    p.add_argument("--n-times", type=int, default=201)
    p.add_argument("--nucleus", type=int, default=0)
    p.add_argument("--prepare", default="electron:-3/2",
                   help="initial populations: uniform | electron:<tag> | state:<label>")
    p.add_argument("--scope", choices=("manifold", "global"), default="manifold",
                   help="polarization within the anticrossing manifold or over all states")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dnp)

    p = subs.add_parser("assign", help="shell assignment or occupancy statistics")
    p.add_argument("--splitting", type=float, default=None, help="measured splitting in MHz")
    p.add_argument("--b", type=float, default=150.0, help="field in G")
    p.add_argument("--line", choices=("L", "C", "R"), default="L")
    p.add_argument("--catalog", default=None, help="catalog JSON (default: bundled)")
    p.add_argument("--tolerance", type=float, default=0.5, help="match window in MHz")
    p.add_argument("--proximity-sigma", type=float, default=0.2,
                   help="proximity score width in MHz")
    p.add_argument("--monte-carlo", type=int, default=None,
                   help="simulate N random defects instead of assigning one splitting")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for --monte-carlo")
    p.add_argument("--detection-floor", type=float, default=1.0,
                   help="smallest resolvable splitting in MHz")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assign)

    p = subs.add_parser("rabi", help="driven nuclear oscillation trace (CSV)")
    p.add_argument("--omega", type=float, default=None, help="Rabi frequency in MHz")
    p.add_argument("--alpha", type=float, default=None,
                   help="enhancement factor (with --gamma-n and --b1)")
    p.add_argument("--gamma-n", type=float, default=None, help="MHz/G")
    p.add_argument("--b1", type=float, default=None, help="drive amplitude in G")
    p.add_argument("--detuning", type=float, default=0.0, help="MHz")
    p.add_argument("--decay", type=float, default=None, help="decay time in us")
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--n-times", type=int, default=401)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rabi)

    p = subs.add_parser("ramsey", help="free-precession fringe trace (CSV)")
    p.add_argument("--detuning", type=float, required=True, help="MHz")
    p.add_argument("--t2star", type=float, required=True, help="dephasing time in us")
    p.add_argument("--envelope", choices=("gaussian", "exponential"), default="gaussian")
    p.add_argument("--t-max", type=float, default=300.0)
    p.add_argument("--n-times", type=int, default=601)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ramsey)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except SicspinError as exc:  # any other package error counts as numerical
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
