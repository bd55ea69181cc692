"""Command-line interface: ``nsyk <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import ensemble as ens
from .complexity import ensemble_plateau, singular_complexity
from .couplings import MODES, ModelConfig, sample_couplings
from .errors import NSYKError
from .form_factor import default_alpha, linear_grid, log_grid
from .io import export_curve, export_histogram, export_spacing_stats, export_spectrum_csv, write_csv, write_record
from .rmt import EnsembleClass, reference_mean_r, reference_spacing_curve
from .spacing import spacing_histogram, spacing_ratios


def _sector(value: str):
    if value == "full":
        return "full"
    v = int(value)
    if v not in (1, -1):
        raise argparse.ArgumentTypeError("sector must be +1, -1 or full")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--n", type=int, nargs="+", default=[16], help="number of Majoranas")
    p.add_argument("--p", type=float, nargs="+", default=[1.0], help="sparsity")
    p.add_argument("--mode", choices=MODES, default="non-hermitian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100, help="number of realizations")
    p.add_argument("--alpha", type=float, default=None, help="Gaussian filter width (default: N-scaled 3.27)")
    p.add_argument("--sector", type=_sector, default=1)
    p.add_argument("--trim", type=float, default=0.10, help="edge fraction dropped per side")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--resume", action="store_true", help="reuse valid records under --store/--out")
    p.add_argument("--store", type=Path, default=None, help="directory of persisted spectra to read")
    p.add_argument("--no-collapse", dest="collapse", action="store_false",
                   help="keep exactly degenerate levels in spacing statistics")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _spectra(args, N, p):
    if args.store is not None:
        return ens.load_spectra(args.store, N, p, args.samples, args.mode, args.seed, args.sector)
    configs = ens.ensemble_configs(N, p, args.samples, args.mode, args.seed)
    return ens.compute_spectra(configs, args.sector, args.threads)


def _meta(args, N, p, **extra):
    return dict(N=N, p=p, mode=args.mode, seed=args.seed, sector=args.sector, trim=args.trim,
                n_realizations=args.samples, **extra)


def cmd_sample(args):
    cfg = ModelConfig(args.n[0], args.p[0], args.mode, args.seed, args.index)
    text = sample_couplings(cfg).to_text()
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def cmd_spectrum(args):
    cfg = ModelConfig(args.n[0], args.p[0], args.mode, args.seed, args.index)
    spectrum = ens.compute_spectrum(cfg, args.sector)
    out = args.out or Path(f"spectrum_N{cfg.N}_p{cfg.p:g}_r{cfg.realization_index}.bin")
    if out.suffix == ".csv":
        export_spectrum_csv(out, spectrum)
    else:
        write_record(out, spectrum)
    print(out)


def cmd_run(args):
    if args.config:
        manifest = ens.RunManifest.from_dict(yaml.safe_load(args.config.read_text()))
    else:
        manifest = ens.RunManifest(N=args.n, p=args.p, n_realizations=args.samples, mode=args.mode,
                                   master_seed=args.seed, sector=args.sector, alpha=args.alpha,
                                   edge_trim=args.trim)
    out = args.out or Path("nsyk_run")
    print(yaml.safe_dump({"resolved_manifest": manifest.to_dict()}, sort_keys=False), end="")
    data = ens.run_ensemble(manifest, out, threads=args.threads, resume=args.resume)
    print(f"content_hash: {data['content_hash']}")


def cmd_rstat(args):
    rows = []
    for N in args.n:
        for p in args.p:
            spectra = _spectra(args, N, p)
            er = ens.ensemble_r(spectra, args.trim, args.collapse)
            print(f"N={N} p={p:g} <r_sigma>={er.mean:.4f} +- {er.std_error:.4f} "
                  f"(used {er.n_used}, rejected {er.n_rejected})")
            rows.append((N, p, er.mean, er.std_error, er.n_used))
            if args.out and len(args.n) == 1 and len(args.p) == 1:
                stats = [spacing_ratios(s, args.trim, ens.COLLAPSE_TOL, args.collapse) for s in spectra]
                export_spacing_stats(args.out, stats, _meta(args, N, p, tolerance=ens.COLLAPSE_TOL))
    if args.out and not (len(args.n) == 1 and len(args.p) == 1):
        cols = list(zip(*rows))
        write_csv(args.out, dict(N=cols[0], p=cols[1], r_sigma=cols[2], r_error=cols[3], n_used=cols[4]),
                  dict(mode=args.mode, seed=args.seed, trim=args.trim, n_realizations=args.samples))


def cmd_hist(args):
    N, p = args.n[0], args.p[0]
    hist = spacing_histogram(_spectra(args, N, p), bins=args.bins, edge_trim=args.trim, collapse=args.collapse,
                             degeneracy_tolerance=ens.COLLAPSE_TOL)
    out = args.out or Path(f"hist_N{N}_p{p:g}.csv")
    export_histogram(out, hist, _meta(args, N, p, tolerance=ens.COLLAPSE_TOL))
    print(out)


def _grid(args):
    if args.linear:
        return linear_grid(args.t_min, args.t_max, args.points)
    return log_grid(args.t_min, args.t_max, args.points)


def cmd_sff(args):
    N, p = args.n[0], args.p[0]
    alpha = default_alpha(N) if args.alpha is None else args.alpha
    curve = ens.form_factor_ensemble(N, p, args.samples, _grid(args), alpha, args.mode, args.seed, args.sector,
                                     args.threads, args.store)
    out = args.out or Path(f"sff_N{N}_p{p:g}.csv")
    export_curve(out, curve.t, curve.values, _meta(args, N, p, alpha=alpha), "sigma_ff")
    print(out)


def cmd_thouless(args):
    N = args.n[0]
    sweep = ens.thouless_sweep(N, args.p, args.samples, _grid(args), args.alpha, args.threshold, args.mode,
                               args.seed, args.sector, args.threads, args.store)
    for p in sorted(sweep.t_th, reverse=True):
        print(f"p={p:g} t_Th={sweep.t_th[p]:.4g}")
    summary = dict(N=N, mode=args.mode, seed=args.seed, n_realizations=args.samples, threshold=args.threshold,
                   alpha=args.alpha if args.alpha is not None else default_alpha(N),
                   window=[sweep.ramp.t_lo, sweep.ramp.t_hi], ramp_slope=sweep.ramp.slope)
    if sweep.fit is not None:
        summary.update(a=sweep.fit.a, b=sweep.fit.b, c=sweep.fit.c)
        print(f"fit: t_Th = {sweep.fit.a:.4g} / p^{sweep.fit.b:.4g} + {sweep.fit.c:.4g}")
    out = args.out or Path(f"thouless_N{N}.csv")
    ps = sorted(sweep.t_th, reverse=True)
    write_csv(out, {"p": ps, "t_th": [sweep.t_th[p] for p in ps]}, summary)
    out.with_suffix(".json").write_text(json.dumps(summary, indent=2) + "\n")
    print(out)


def cmd_complexity(args):
    N = args.n[0]
    rows = []
    for p in args.p:
        spectra = _spectra(args, N, p)
        curve = singular_complexity(spectra, _grid(args), args.beta)
        plateau = ensemble_plateau(spectra)
        rows.append((p, plateau))
        print(f"N={N} p={p:g} plateau={plateau:.6g}")
        if len(args.p) == 1:
            out = args.out or Path(f"complexity_N{N}_p{p:g}.csv")
            export_curve(out, curve.t, curve.values, _meta(args, N, p, beta=args.beta, plateau=plateau), "C")
            print(out)
    if len(args.p) > 1:
        out = args.out or Path(f"plateau_N{N}.csv")
        write_csv(out, {"p": [r[0] for r in rows], "plateau": [r[1] for r in rows]},
                  dict(N=N, mode=args.mode, seed=args.seed, n_realizations=args.samples))
        print(out)


def cmd_pcrit(args):
    points = []
    out_dir = args.out or Path("pcrit")
    for N in args.n:
        grid = None if args.p == [1.0] else args.p
        res = ens.scan_sparsity(N, grid, args.samples, args.mode, args.seed, args.sector, args.trim,
                                args.collapse, args.threads, args.store)
        print(f"N={N} r_dense={res.r_dense:.4f} p_crit={res.p_crit:.5g} k={res.k:.3f}")
        write_csv(out_dir / f"scan_N{N}.csv",
                  dict(p=res.p_grid, r_sigma=res.r_sigma, r_error=res.r_error, rejected=res.n_rejected),
                  dict(res.metadata, p_crit=res.p_crit, k=res.k, r_dense=res.r_dense))
        points.append((N, res.p_crit))
    if len(points) >= 3:
        fit = ens.fit_pcrit_scaling(points)
        print(f"k = {fit.k:.4f} (relative rms {fit.relative_rms:.3g}{', poor fit' if fit.poor_fit else ''})")
        write_csv(out_dir / "pcrit_fit.csv", {"N": [n for n, _ in points], "p_crit": [pc for _, pc in points],
                                               "residual": fit.residuals},
                  dict(k=fit.k, relative_rms=fit.relative_rms, poor_fit=fit.poor_fit))


def cmd_rmt_ref(args):
    cls = EnsembleClass.parse(args.ensemble)
    mean, se = reference_mean_r(cls, args.dim, args.samples, args.seed, args.trim)
    print(f"{cls.value} dim={args.dim}: <r>={mean:.4f} +- {se:.4f} (reference {cls.reference_r})")
    hist = reference_spacing_curve(cls, args.dim, args.samples, args.seed, bins=args.bins, edge_trim=args.trim)
    out = args.out or Path(f"rmt_{cls.value}_{args.dim}.csv")
    export_histogram(out, hist, dict(ensemble=cls.value, dim=args.dim, n_samples=args.samples, seed=args.seed,
                                     trim=args.trim, mean_r=mean, r_error=se))
    print(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsyk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--t-min", type=float, default=1e-2)
    grid.add_argument("--t-max", type=float, default=1e6)
    grid.add_argument("--points", type=int, default=400)
    grid.add_argument("--linear", action="store_true", help="linear instead of log time grid")

    s = sub.add_parser("sample", parents=[common], help="emit one realization's couplings")
    s.add_argument("--index", type=int, default=0)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("spectrum", parents=[common], help="one realization -> spectrum file")
    s.add_argument("--index", type=int, default=0)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("run", parents=[common], help="run a full manifest")
    s.add_argument("--config", type=Path, default=None, help="YAML manifest")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("rstat", parents=[common], help="ensemble mean spacing ratio")
    s.set_defaults(func=cmd_rstat)

    s = sub.add_parser("hist", parents=[common], help="spacing distribution")
    s.add_argument("--bins", type=int, default=None)
    s.set_defaults(func=cmd_hist)

    s = sub.add_parser("sff", parents=[common, grid], help="filtered singular form factor")
    s.set_defaults(func=cmd_sff)

    s = sub.add_parser("thouless", parents=[common, grid], help="Thouless times and a/p^b + c fit")
    s.add_argument("--threshold", type=float, default=0.20)
    s.set_defaults(func=cmd_thouless)

    s = sub.add_parser("complexity", parents=[common, grid], help="singular complexity and plateau")
    s.add_argument("--beta", type=float, default=0.0)
    s.set_defaults(func=cmd_complexity)

    s = sub.add_parser("pcrit", parents=[common], help="sparsity scans, p_crit and k fit")
    s.set_defaults(func=cmd_pcrit)

    s = sub.add_parser("rmt-ref", parents=[common], help="sampled GOE/GUE/GSE/Poisson references")
    s.add_argument("--ensemble", default="GOE")
    s.add_argument("--dim", type=int, default=512)
    s.add_argument("--bins", type=int, default=None)
    s.set_defaults(func=cmd_rmt_ref)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (NSYKError, FileNotFoundError) as exc:
        print(f"nsyk {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
