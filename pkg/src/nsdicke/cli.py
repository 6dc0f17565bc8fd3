"""Command-line interface.

Subcommands: fixed-points, thresholds, stability-scan, evolve, sweep, quantum.
Settings come from flags, then an optional flat JSON ``--config`` file, then
built-in defaults. Exit codes: 0 success, 2 usage error, 3 numerical
failure, 4 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .core import ModelParams, parity_transform
from .errors import NumericalError, ParameterError, ResourceError, TruncationWarning
from .steadystate import (LABEL_ORDER, PhaseLabel, all_fixed_points, by_label,
                          critical_couplings)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_RESOURCE = 0, 2, 3, 4

EVOLVE_PRESETS = {
    # name -> (initial, t_final); all at lam = 2, N2/N1 = 0.3
    "fig3": ("fig3", 1000.0),
    "figS3a": (PhaseLabel.MINUS_ZFO_N.value, 1000.0),
    "figS3c": (PhaseLabel.PLUS_ZFI_N.value, 1000.0),
}


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o)}")


def _clean(obj):
    """NaN/inf -> None so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _write(out_dir: Path | None, name: str, text: str) -> None:
    if out_dir is not None:
        (out_dir / name).write_text(text)


# parameters

def _add_model_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--omega-c", type=float, default=1.0, help="cavity frequency (kappa units)")
    g.add_argument("--omega-a", type=float, default=1.0, help="atomic frequency")
    g.add_argument("--kappa", type=float, default=1.0, help="cavity decay rate")
    g.add_argument("--lambda", dest="lam", type=float, default=0.0, help="coupling")
    g.add_argument("--n1", type=float, default=1.0, help="ensemble-1 size N1")
    g.add_argument("--n2-ratio", type=float, default=0.3, help="N2/N1")
    g.add_argument("--n2", type=float, default=None, help="absolute N2 (overrides --n2-ratio)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON object of option values")
    p.add_argument("--out-dir", help="directory for output files")
    p.add_argument("--reproducible", action="store_true",
                   help="omit timestamps so repeated runs give identical files")


def _params(args) -> ModelParams:
    n2 = args.n2 if args.n2 is not None else args.n2_ratio * args.n1
    return ModelParams(omega_c=args.omega_c, omega_a=args.omega_a, kappa=args.kappa,
                       lam=args.lam, n1=args.n1, n2=n2)


def _out_dir(args) -> Path | None:
    if not args.out_dir:
        return None
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _meta(args, extra=None) -> dict:
    from .sweep import metadata

    m = metadata(_params(args), args.reproducible, __version__)
    if extra:
        m.update(extra)
    return m


# subcommands

def cmd_fixed_points(args) -> int:
    from .stability import classify_stability

    p = _params(args)
    xfo, xfi = critical_couplings(p)
    records = []
    n_stable = 0
    for rec in all_fixed_points(p):
        d = rec.to_dict()
        if rec.exists:
            rep = classify_stability(rec, p, args.eps_stab, args.eps_zero)
            d["stability"] = rep.to_dict()
            n_stable += rep.verdict.value == "stable"
        else:
            d["stability"] = None
        records.append(d)
    report = _clean({
        "params": vars(p), "critical_couplings": {"xFo": xfo, "xFi": xfi},
        "n_existing": sum(r["exists"] for r in records), "n_stable": n_stable,
        "fixed_points": records,
    })
    text = _dump(report)
    print(text)
    _write(_out_dir(args), "fixed_points.json", text + "\n")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    p = _params(args)
    xfo, xfi = critical_couplings(p)
    print(_dump(_clean({"params": vars(p), "lambda_c_xFo": xfo, "lambda_c_xFi": xfi})))
    out = _out_dir(args)
    if out is not None:
        from .sweep import _header

        lines = [_header(_meta(args)), "n2_over_n1,lambda_c_xFo,lambda_c_xFi\n"]
        for r in np.linspace(0.0, 1.0, args.points):
            fo, fi = critical_couplings(p.replace(n2=float(r) * p.n1))
            lines.append(f"{float(r)!r},{'nan' if math.isinf(fo) else repr(fo)},{fi!r}\n")
        (out / "thresholds.csv").write_text("".join(lines))
        (out / "thresholds.gp").write_text(
            "set datafile separator ','\nset xlabel 'N2/N1'\nset ylabel 'lambda_c/kappa'\n"
            "plot 'thresholds.csv' using 1:2 with lines title 'xFo', "
            "'' using 1:3 with lines title 'xFi'\n")
    return EXIT_OK


def cmd_stability_scan(args) -> int:
    from .stability import SCAN_COLUMNS, bifurcation_scan, locate_crossing

    p = _params(args)
    grid = np.linspace(args.lambda_min, args.lambda_max, args.points)
    rows = bifurcation_scan(p, grid, eps_stab=args.eps_stab, eps_zero=args.eps_zero)
    crossings = {}
    for label in (PhaseLabel.MINUS_ZFO_N, PhaseLabel.MINUS_ZFI_N):
        lead = [(r.lam, r.re_lead) for r in rows if r.label is label]
        for (l0, f0), (l1, f1) in zip(lead, lead[1:]):
            if f0 < 0 < f1:
                crossings[label.value] = locate_crossing(p, label, l0, l1)
                break
    xfo, xfi = critical_couplings(p)
    report = _clean({"crossings": crossings, "critical_couplings": {"xFo": xfo, "xFi": xfi},
                     "rows": len(rows)})
    print(_dump(report))
    out = _out_dir(args)
    if out is not None:
        from .sweep import _fmt, _header

        with open(out / "stability_scan.csv", "w") as fh:
            fh.write(_header(_meta(args)))
            fh.write(",".join(SCAN_COLUMNS) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(v) for v in r.as_tuple()) + "\n")
        _write(out, "stability_scan.json", _dump(report) + "\n")
    return EXIT_OK


def cmd_evolve(args) -> int:
    from .dynamics import (Controls, basin_initial_state, classify_attractor,
                           fig3_initial_state, integrate)

    if args.preset:
        init, t_final = EVOLVE_PRESETS[args.preset]
        args.lam, args.n2_ratio, args.n2 = 2.0, 0.3, None
        args.init = init
        if args.t_final is None:
            args.t_final = t_final
    p = _params(args)
    t_final = args.t_final if args.t_final is not None else 1000.0
    delta = complex(args.delta_a, 0) * complex(math.cos(args.delta_phase),
                                               math.sin(args.delta_phase))
    if args.init == "fig3":
        x0 = fig3_initial_state(p, delta)
    else:
        try:
            label = PhaseLabel(args.init)
        except ValueError:
            names = [lab.value for lab in LABEL_ORDER]
            raise UsageError(f"--init must be 'fig3' or a phase label {names}")
        rec = by_label(all_fixed_points(p))[label]
        if not rec.exists:
            raise UsageError(f"{label.value} does not exist at lambda={p.lam}")
        x0 = basin_initial_state(p, label, delta)
    if args.parity_flip:
        x0 = parity_transform(x0)
    controls = Controls(rtol=args.rtol, atol=args.atol, method=args.method,
                        n_samples=args.samples)
    traj = integrate(x0, p, t_final, controls)
    verdict = classify_attractor(traj, controls=controls)
    report = _clean({"verdict": verdict.to_dict(), "t_final": t_final,
                     "norm_drift": traj.norm_drift(), "n_rhs": traj.n_rhs,
                     "final_state": traj.final.to_vector().tolist()})
    print(_dump(report))
    out = _out_dir(args)
    if out is not None:
        traj.write_csv(out / "trajectory.csv")
        _write(out, "verdict.json", _dump(_clean(verdict.to_dict())) + "\n")
        (out / "evolve.gp").write_text(
            "set datafile separator ','\nset key autotitle columnhead\n"
            "set multiplot layout 2,1\nset xlabel 't kappa'\n"
            "plot 'trajectory.csv' using 1:4 with lines, '' using 1:7 with lines\n"
            "set xlabel 'Re a'\nset ylabel 'Im a'\n"
            "plot 'trajectory.csv' using 2:3 with lines\nunset multiplot\n")
    return EXIT_OK


def _parse_axis(text: str):
    from .sweep import Axis

    try:
        name, lo, hi, count = text.split(":")
        return Axis(name, float(lo), float(hi), int(count))
    except ValueError as exc:
        raise UsageError(f"axis must look like name:min:max:count, got {text!r} ({exc})")


def cmd_sweep(args) -> int:
    from .steadystate import LABEL_ORDER as labels
    from .sweep import (QUANTITIES, GridSpec, line_cut, phase_diagram, summary, surface,
                        write_line_cut_csv, write_matrix, write_phase_csv)

    out = _out_dir(args)
    p = _params(args)
    if args.kind == "line-cut":
        lams = np.linspace(args.lambda_min, args.lambda_max, args.points)
        rows = line_cut(p, lams)
        meta = _meta(args)
        if out is not None:
            write_line_cut_csv(rows, out / "line_cut.csv", meta)
            (out / "line_cut.gp").write_text(
                "set datafile separator ','\nset xlabel 'lambda/kappa'\n"
                "plot for [L in '+zFo-N -zFo-N +zFi-N -zFi-N +xFo-SR -xFo-SR +xFi-SR -xFi-SR'] "
                "'line_cut.csv' using ($2 eq L ? $1 : NaN):8 with lines title L\n")
        print(_dump({"rows": len(rows), "points": int(args.points)}))
        return EXIT_OK

    grid = GridSpec(_parse_axis(args.axis1), _parse_axis(args.axis2), p, centers=args.centers)
    cells = phase_diagram(grid, jobs=args.jobs, backend=args.backend)
    from .sweep import metadata

    meta = metadata(grid, args.reproducible, __version__)
    info = _clean(summary(cells, grid))
    if out is not None:
        write_phase_csv(cells, grid, out / "phase_diagram.csv", meta)
        xs1, xs2 = grid.coordinates()
        counts = np.array([c.n_fixed_points for c in cells], float).reshape(xs1.size, xs2.size)
        write_matrix(out / "n_fixed_points.dat", xs1, xs2, counts, meta)
        surf_dir = out / "surfaces"
        surf_dir.mkdir(exist_ok=True)
        for label in labels:
            for q in QUANTITIES:
                write_matrix(surf_dir / f"{q}_{label.value}.dat", xs1, xs2,
                             surface(q, label, grid, cells))
        _write(out, "summary.json", _dump({"metadata": meta, **info}) + "\n")
        (out / "phase_diagram.gp").write_text(
            f"set xlabel '{grid.axis1.name}'\nset ylabel '{grid.axis2.name}'\n"
            "set view map\nsplot 'n_fixed_points.dat' nonuniform matrix with image notitle\n")
    print(_dump({k: info[k] for k in ("cells", "fixed_point_counts", "stable_sets")}))
    return EXIT_OK


def cmd_quantum(args) -> int:
    from .quantum import (HilbertSpec, count_q_lobes, default_n_max, evolve_master,
                          initial_state, parity_paired, partial_trace_field, q_grid)

    if args.preset == "fig4":
        args.lam, args.n1, args.n2 = 1.01, 4, 3
        args.init = args.init or "fig3"
    for name in ("n1", "n2"):
        v = getattr(args, name)
        if v is not None and v != int(v):
            raise UsageError(f"--{name} must be an integer number of atoms for quantum runs")
    n1 = int(args.n1)
    n2 = int(args.n2) if args.n2 is not None else int(round(args.n2_ratio * args.n1))
    args.n2 = float(n2)
    p = _params(args)
    n_max = args.n_max if args.n_max is not None else default_n_max(p, n1, n2)
    spec = HilbertSpec(n_max, n1, n2, budget=args.budget)
    report = {"dimension": spec.dim, "n_max": n_max, "n1": n1, "n2": n2}
    if args.dimension_only:
        print(_dump(report))
        return EXIT_OK
    init = args.init or "fig3"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        res = evolve_master(initial_state(init, spec), p, spec, args.t_final, args.dt,
                            n_samples=args.samples)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rf = partial_trace_field(res.rho, spec)
    grid = q_grid(rf, args.q_extent, args.q_points)
    lobes = count_q_lobes(grid, args.threshold)
    report.update({
        "init": init, "dt": res.dt, "steps": res.n_steps, "t_final": args.t_final,
        "diagnostics": res.diagnostics, "q_normalization": grid.normalization(),
        "lobes": lobes.to_dict(),
        "lobes_parity_paired": parity_paired(lobes.centroids, 1.5 * grid.spacing),
        "truncation_warning": bool(caught),
    })
    nph = res.series.column("n_phot")
    t = res.series.column("t")
    if p.lam == 0 and nph[0] > 0:
        ok = nph > 1e-12
        slope = np.polyfit(t[ok], np.log(nph[ok]), 1)[0]
        report["photon_decay_rate"] = float(-slope)
    print(_dump(_clean(report)))
    out = _out_dir(args)
    if out is not None:
        res.series.write_csv(out / "observables.csv")
        grid.write_csv(out / "q_function.csv")
        grid.write_matrix(out / "q_matrix.dat")
        _write(out, "lobes.json", _dump(_clean(report)) + "\n")
        (out / "quantum.gp").write_text(
            "set xlabel 'Re alpha'\nset ylabel 'Im alpha'\nset view map\nset size square\n"
            "splot 'q_matrix.dat' nonuniform matrix with image notitle\n")
    return EXIT_OK


# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsdicke", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        _add_model_args(sp)
        _add_common(sp)
        sp.set_defaults(func=func)
        return sp

    def add_tolerances(sp):
        sp.add_argument("--eps-stab", type=float, default=1e-9,
                        help="growth-rate margin for the stable verdict")
        sp.add_argument("--eps-zero", type=float, default=1e-8,
                        help="magnitude below which an eigenvalue is a zero mode")

    fp = add("fixed-points", cmd_fixed_points, "all eight fixed points with stability")
    add_tolerances(fp)

    th = add("thresholds", cmd_thresholds, "critical couplings (and their N2/N1 curves)")
    th.add_argument("--points", type=int, default=101, help="N2/N1 samples for the curve file")

    sc = add("stability-scan", cmd_stability_scan, "verdicts along a lambda grid")
    sc.add_argument("--lambda-min", type=float, default=0.0)
    sc.add_argument("--lambda-max", type=float, default=3.0)
    sc.add_argument("--points", type=int, default=200)
    add_tolerances(sc)

    ev = add("evolve", cmd_evolve, "integrate the mean-field equations")
    ev.add_argument("--preset", choices=sorted(EVOLVE_PRESETS))
    ev.add_argument("--init", default="fig3", help="'fig3' or a fixed-point label to perturb")
    ev.add_argument("--delta-a", type=float, default=1e-3, help="seed field magnitude")
    ev.add_argument("--delta-phase", type=float, default=0.0, help="seed field phase (rad)")
    ev.add_argument("--parity-flip", action="store_true", help="start from the parity image")
    ev.add_argument("--t-final", type=float, default=None)
    ev.add_argument("--samples", type=int, default=20001)
    ev.add_argument("--rtol", type=float, default=1e-10)
    ev.add_argument("--atol", type=float, default=1e-12)
    ev.add_argument("--method", choices=("DOP853", "RK45"), default="DOP853")

    sw = add("sweep", cmd_sweep, "phase diagram, surfaces or a lambda line cut")
    sw.add_argument("--kind", choices=("phase", "line-cut"), default="phase")
    sw.add_argument("--axis1", default="n2_over_n1:0:1:50")
    sw.add_argument("--axis2", default="lambda:0:3:50")
    sw.add_argument("--centers", action="store_true", help="use cell centres, not nodes")
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--backend", choices=("lapack", "qr"), default="lapack")
    sw.add_argument("--lambda-min", type=float, default=0.0)
    sw.add_argument("--lambda-max", type=float, default=3.0)
    sw.add_argument("--points", type=int, default=301)

    qu = add("quantum", cmd_quantum, "Lindblad evolution and Husimi Q readout")
    qu.add_argument("--preset", choices=("fig4",))
    qu.add_argument("--init", choices=("fig3", "ground", "fock1", "zfi"), default=None)
    qu.add_argument("--n-max", type=int, default=None)
    qu.add_argument("--t-final", type=float, default=20.0)
    qu.add_argument("--dt", type=float, default=None)
    qu.add_argument("--samples", type=int, default=201)
    qu.add_argument("--q-points", type=int, default=101)
    qu.add_argument("--q-extent", type=float, default=None)
    qu.add_argument("--threshold", type=float, default=0.5)
    qu.add_argument("--budget", type=int, default=4096)
    qu.add_argument("--dimension-only", action="store_true")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> None:
    """Install config-file values as defaults of the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}")
    if not isinstance(cfg, dict) or any(isinstance(v, (dict, list)) for v in cfg.values()):
        raise UsageError("config must be a flat JSON object")
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in sub_action.choices), None)
    if command is None:
        return
    sp = sub_action.choices[command]
    dests = {a.dest for a in sp._actions}
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    cfg = {("lam" if k == "lambda" else k): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - dests)
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {unknown}")
    sp.set_defaults(**cfg)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
