"""Command line front end.

Subcommands, each writing its delimited or JSON output under --out and, unless
--no-figures is given, PNG figures next to it:

  verify       run the check registry, write report.json
  spectrum     predicted against computed eigenvalues, write spectrum.csv
  decompose    invariant-block inventory, write decomposition.json
  symbols      membership certificates, write certificates.json
  convergence  truncation refinement study, write convergence.json

Exit status is 0 when everything checked out, 1 when at least one check
failed or refused honesty could not be restored by the run itself, and 2 for
configuration, usage, or runtime errors.  A config file can also come from
the HHODGE_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import sys

from . import figures as figs
from . import harness as hz
from . import multipliers as mul


def _shared_flags() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH",
                        help="INI config file (default: $HHODGE_CONFIG when set)")
    shared.add_argument("--n", action="append", type=int, metavar="N",
                        help="group rank; repeat for several")
    shared.add_argument("--lambda", dest="lam", action="append", type=float,
                        metavar="LAM", help="frequency parameter; repeat for several")
    shared.add_argument("--max-degree", type=int, metavar="N",
                        help="Fock truncation degree")
    shared.add_argument("--buffer", type=int, metavar="B",
                        help="truncation buffer width")
    shared.add_argument("--degree", action="append", type=int, metavar="K",
                        help="restrict to form degree K; repeat for several")
    shared.add_argument("--tol-e", type=float, metavar="TOL",
                        help="tolerance for exact (tier E) identities")
    shared.add_argument("--tol-c", type=float, metavar="TOL",
                        help="tolerance for computed (tier C) routes")
    shared.add_argument("--out", metavar="DIR", help="output directory")
    shared.add_argument("--seed", type=int, metavar="SEED",
                        help="seed for randomized probes")
    shared.add_argument("--jobs", type=int, metavar="J",
                        help="worker threads for independent checks")
    shared.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering")
    return shared


def _overrides(args: argparse.Namespace) -> dict:
    ov: dict = {}
    if args.n:
        ov["n_values"] = tuple(args.n)
    if args.lam:
        ov["lam_values"] = tuple(args.lam)
    if args.max_degree is not None:
        ov["max_degree"] = args.max_degree
    if args.buffer is not None:
        ov["buffer"] = args.buffer
    if args.degree:
        ov["degrees"] = tuple(args.degree)
    if args.tol_e is not None:
        ov["tol_e"] = args.tol_e
    if args.tol_c is not None:
        ov["tol_c"] = args.tol_c
    if args.out is not None:
        ov["out_dir"] = args.out
    if args.seed is not None:
        ov["seed"] = args.seed
    if args.jobs is not None:
        ov["jobs"] = args.jobs
    if args.no_figures:
        ov["figures"] = False
    if getattr(args, "suite", None):
        ov["suites"] = tuple(args.suite)
    return ov


def _emit_figures(paths: list[str]) -> None:
    for p in paths:
        print(f"wrote {p}")


def cmd_verify(cfg: hz.RunConfig, args: argparse.Namespace) -> int:
    report = hz.run_verify(cfg)
    path = hz.write_report(report, cfg.out_dir)
    s = report["body"]["summary"]
    print(f"wrote {path}")
    print(f"checks: {s['pass']} pass, {s['fail']} fail, "
          f"{s['refused']} refused, {s['skipped']} skipped")
    for suite, worst in s["worst-residual-by-suite"].items():
        print(f"  {suite}: worst residual {worst:.3e}")
    if cfg.figures:
        _emit_figures(figs.render_report_figures(report, cfg.out_dir))
    return hz.report_exit_code(report)


def cmd_spectrum(cfg: hz.RunConfig, args: argparse.Namespace) -> int:
    rows = hz.spectrum_table(cfg)
    path = hz.write_spectrum_csv(rows, cfg.out_dir)
    bad = sum(1 for r in rows if not r["ok"])
    print(f"wrote {path}")
    print(f"rows: {len(rows)}, mismatched: {bad}")
    if cfg.figures:
        _emit_figures(figs.render_spectrum_figures(rows, cfg.out_dir))
    return hz.spectrum_exit_code(rows)


def cmd_decompose(cfg: hz.RunConfig, args: argparse.Namespace) -> int:
    inv = hz.decomposition_inventory(cfg)
    path = hz.write_inventory(inv, cfg.out_dir)
    print(f"wrote {path}")
    bad = 0
    for entry in inv["entries"]:
        blocks = sum(len(dk["blocks"]) for dk in entry["degrees"])
        print(f"n={entry['n']} lambda={entry['lambda']:g}: {blocks} blocks across "
              f"{len(entry['degrees'])} degrees")
        for row in entry["primitive-table"]:
            if (row["rank"] > 0) != row["expected-nontrivial"]:
                bad += 1
                print(f"  primitive rank mismatch at (p,q)=({row['p']},{row['q']}): "
                      f"rank {row['rank']}, expected nontrivial: "
                      f"{row['expected-nontrivial']}")
    return 0 if bad == 0 else 1


def cmd_symbols(cfg: hz.RunConfig, args: argparse.Namespace) -> int:
    exprs = tuple(args.expr or ())
    bundle = hz.symbol_certificates(cfg, expressions=exprs, target_class=args.cls)
    path = hz.write_certificates(bundle, cfg.out_dir)
    s = bundle["summary"]
    print(f"wrote {path}")
    print(f"library: {'pass' if s['library-passed'] else 'FAIL'}, "
          f"algebra: {'pass' if s['algebra-passed'] else 'FAIL'}")
    for u in bundle["user"]:
        for r in u["results"]:
            verdict = "pass" if r["passed"] else "FAIL"
            print(f"  {u['expression']!r} in {u['class']} at n={r['n']}: {verdict}")
    if cfg.figures:
        _emit_figures(figs.render_certificate_figures(bundle, cfg.out_dir))
    return hz.certificates_exit_code(bundle)


def cmd_convergence(cfg: hz.RunConfig, args: argparse.Namespace) -> int:
    study = hz.convergence_study(cfg)
    path = hz.write_convergence(study, cfg.out_dir)
    s = study["summary"]
    print(f"wrote {path}")
    print(f"ladder {study['degrees']}: {s['records']} records, {s['fail']} failed")
    if cfg.figures:
        _emit_figures(figs.render_convergence_figures(study, cfg.out_dir))
    return hz.convergence_exit_code(study)


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    parser = argparse.ArgumentParser(
        prog="hhodge",
        description="machine verification of the Hodge Laplacian model "
                    "on the Heisenberg group")
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", parents=[shared],
                        help="run the check registry and write report.json")
    pv.add_argument("--suite", action="append", choices=hz.SUITES,
                    help="restrict to one suite; repeat for several")
    pv.set_defaults(func=cmd_verify)

    ps = sub.add_parser("spectrum", parents=[shared],
                        help="tabulate predicted against computed eigenvalues")
    ps.set_defaults(func=cmd_spectrum)

    pd = sub.add_parser("decompose", parents=[shared],
                        help="write the invariant-block inventory")
    pd.set_defaults(func=cmd_decompose)

    py = sub.add_parser("symbols", parents=[shared],
                        help="certify symbol class memberships")
    py.add_argument("--expr", action="append", metavar="EXPR",
                    help="symbol expression to certify; repeat for several")
    py.add_argument("--class", dest="cls", metavar="SPEC",
                    help="target class 'rho,sigma,tau', optional leading '*'")
    py.set_defaults(func=cmd_symbols)

    pc = sub.add_parser("convergence", parents=[shared],
                        help="residual decay under truncation refinement")
    pc.add_argument("--suite", action="append", choices=hz.SUITES,
                    help="restrict to one suite; repeat for several")
    pc.set_defaults(func=cmd_convergence)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = hz.load_config(args.config)
        cfg = hz.apply_overrides(cfg, **_overrides(args))
        return args.func(cfg, args)
    except hz.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except mul.SymbolParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
