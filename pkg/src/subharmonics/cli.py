"""Command-line front end.

    subharmonics chain --n-max 13
    subharmonics roots --n-max 13 --svg
    subharmonics fixed-points --n 4 --A 3
    subharmonics two-periodic --A 2 --b-max 10 --svg
    subharmonics branch --n 3 --root-index 1 --side + --svg
    subharmonics atlas --n-max 8 --svg
    subharmonics check

Every run writes ``manifest.json`` next to its outputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
import time
from fractions import Fraction
from importlib import metadata
from pathlib import Path
from typing import List, Optional

from .config import FORMATS, ConfigError, RunConfig, load_config

log = logging.getLogger("subharmonics")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def _version(dist: str) -> str:
    try:
        return metadata.version(dist)
    except metadata.PackageNotFoundError:
        return "unknown"


class Run:
    """Collects output files and writes them, one at a time, under output_dir."""

    def __init__(self, command: str, config: RunConfig, argv: List[str]):
        self.command = command
        self.config = config
        self.argv = argv
        self.out = Path(config.output_dir)
        self.files: List[str] = []
        self.t0 = time.perf_counter()
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise SystemExit(f"cannot create output directory {self.out}: {exc}")

    def path(self, name: str) -> Path:
        return self.out / name

    def write(self, name: str, text: str) -> Path:
        p = self.path(name)
        try:
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text)
        except OSError as exc:
            raise SystemExit(f"cannot write {p}: {exc}")
        self.files.append(name)
        return p

    def add(self, name: str) -> None:
        self.files.append(name)

    def manifest(self, status: int, extra: Optional[dict] = None) -> Path:
        data = {
            "command": self.command,
            "argv": self.argv,
            "config": self.config.as_dict(),
            "versions": {
                "python": platform.python_version(),
                "artifact": _version("artifact"),
                "mpmath": _version("mpmath"),
                "matplotlib": _version("matplotlib"),
            },
            "wall_time_seconds": round(time.perf_counter() - self.t0, 3),
            "outputs": sorted(set(self.files)),
            "exit_status": status,
        }
        if extra:
            data.update(extra)
        p = self.path("manifest.json")
        p.write_text(json.dumps(data, indent=2) + "\n")
        return p


def _want_svg(args, cfg: RunConfig) -> bool:
    return bool(getattr(args, "svg", False)) or cfg.format == "svg"


def _table_format(cfg: RunConfig) -> str:
    return "json" if cfg.format == "json" else "csv"


# commands -----------------------------------------------------------------

def cmd_chain(args, cfg: RunConfig, run: Run) -> int:
    from .polychain import build_chain_recurrence, build_chain_via_eprime, chain_to_json, check_structure,\
        prime_divisibility

    chain = build_chain_recurrence(cfg.n_max)
    run.write("chain.json", chain_to_json(chain) + "\n")
    for i, p in enumerate(chain, start=1):
        print(f"p_{i} = {p}")
    status = EXIT_OK
    if args.check:
        report = check_structure(chain)
        other = build_chain_via_eprime(cfg.n_max)
        mismatch = [i + 1 for i, (a, b) in enumerate(zip(chain, other)) if a != b]
        lines = report.lines()
        lines.append(f"dual construction mismatches: {mismatch or 'none'}")
        primes = prime_divisibility(chain)
        lines.append("prime n, non-leading coefficients divisible by n (informational): "
                     + ", ".join(f"{n}:{'yes' if ok else 'no'}" for n, ok in primes.items()))
        run.write("structure.txt", "\n".join(lines) + "\n")
        ok = report.ok and not mismatch
        print(f"structure: {'all pass' if ok else 'VIOLATIONS'}")
        for v in report.violations:
            print(f"  {v}")
        status = EXIT_OK if ok else EXIT_VIOLATION
    return status


def cmd_roots(args, cfg: RunConfig, run: Run) -> int:
    from .roots import RootTable, check_interlacing, gap_statistics, separate_rows

    table = RootTable.build(cfg.n_max)
    if args.width:
        table = table.refine_all(Fraction(args.width))
    digits = args.digits
    if _table_format(cfg) == "json":
        rows = [{"n": n, "index": i, "lo": str(r.lo), "hi": str(r.hi), "is_exact_two": r.is_exact_two}
                for n in table for i, r in enumerate(table[n], start=1)]
        run.write("roots.json", json.dumps(rows, indent=1) + "\n")
    else:
        run.write("roots.csv", table.to_csv(digits))
    lines = []
    status = EXIT_OK
    for n in range(3, cfg.n_max + 1):
        rep = check_interlacing(separate_rows(table, n), n)
        lines.append(f"n={n}: {'pass' if rep.passed else 'FAIL ' + rep.reason}  " + " < ".join(rep.ordering))
        if not rep.passed:
            status = EXIT_VIOLATION
    bad_counts = [n for n in table if len(table[n]) != n // 2]
    if bad_counts:
        status = EXIT_VIOLATION
        lines.append(f"root count mismatch at n = {bad_counts}")
    stats = gap_statistics(table)
    lines.append("gaps: " + ", ".join(f"{k}={v:.6g}" for k, v in stats.items()))
    run.write("interlacing.txt", "\n".join(lines) + "\n")
    print(f"{table.total()} roots for 2 <= n <= {cfg.n_max}")
    if _want_svg(args, cfg):
        from .plotting import plot_root_ladder
        plot_root_ladder(table, run.path("roots.svg"))
        run.add("roots.svg")
    return status


def cmd_fixed_points(args, cfg: RunConfig, run: Run) -> int:
    from .poincare import fixed_points, fixed_points_csv

    A = Fraction(args.A)
    fp = fixed_points(args.n, A, cfg.tol_fraction, policy=cfg.policy, cells=args.cells)
    if _table_format(cfg) == "json":
        rows = [{"n": p.n, "A": str(p.A), "x_lo": str(p.lo), "x_hi": str(p.hi),
                 "residual_width": p.residual_width, "trivial": p.trivial} for p in fp]
        run.write("fixed_points.json", json.dumps(rows, indent=1) + "\n")
    else:
        run.write("fixed_points.csv", fixed_points_csv([fp]))
    for p in fp:
        print(f"x = {float(p):.15g}{'  (trivial)' if p.trivial else ''}")
    if not fp.trivial_isolated:
        print("note: A is tangential; zeros closer than 2^-32 to x = 1 are not resolved")
    return EXIT_OK


def cmd_two_periodic(args, cfg: RunConfig, run: Run) -> int:
    from .twoperiodic import pitchfork_data, solve_2T, trace_2T_curve

    A = Fraction(args.A)
    if args.B is not None:
        res = solve_2T(A, Fraction(args.B), cfg.tol_fraction, policy=cfg.policy)
        lines = ["A,B,v0_lo,v0_hi,u0_lo,u0_hi"]
        from .roots import decimal_string
        for s in res.states:
            u_lo, u_hi = s.u0.to_strings(20)
            lines.append(f"{A},{res.B},{decimal_string(s.v0.lo, 25, True)},{decimal_string(s.v0.hi, 25, False)},{u_lo},{u_hi}")
        run.write("two_periodic.csv", "\n".join(lines) + "\n")
        print(f"{len(res)} nontrivial 2T states at A={A}, B={res.B}")
        return EXIT_OK
    pf = pitchfork_data(A)
    b_max = Fraction(args.b_max) if args.b_max else 5 * pf.B_crit
    curve = trace_2T_curve(A, b_max, args.steps, spacing=args.spacing)
    run.write("two_periodic_curve.csv", curve.to_csv())
    run.write("pitchfork.json", json.dumps({k: str(v) for k, v in vars(pf).items()}, indent=1) + "\n")
    print(f"B_crit = {pf.B_crit}, phi'''(1) = {pf.d3phi_at_1}; {len(curve.points)} grid points, "
          f"{len(curve.failures)} failures, monotone: {curve.is_monotone()}")
    if _want_svg(args, cfg):
        from .plotting import plot_two_periodic
        plot_two_periodic(curve, run.path("two_periodic.svg"))
        run.add("two_periodic.svg")
    return EXIT_OK


def cmd_branch(args, cfg: RunConfig, run: Run) -> int:
    from .continuation import local_expansion, trace_branch
    from .polychain import ChainContext
    from .roots import isolate_positive_roots

    roots = isolate_positive_roots(ChainContext(args.n)[args.n], args.n)
    if not 1 <= args.root_index <= len(roots):
        raise SystemExit(f"p_{args.n} has {len(roots)} positive roots; --root-index out of range")
    root = roots[args.root_index - 1]
    sides = {"+": [1], "-": [-1], "both": [1, -1]}[args.side]
    branches = [trace_branch(args.n, root, s, cfg.A_max, prec=cfg.precision_start_bits) for s in sides]
    exp = local_expansion(args.n, root)
    status = EXIT_OK
    for b in branches:
        tag = "plus" if b.side > 0 else "minus"
        run.write(f"branch_n{args.n}_r{args.root_index}_{tag}.csv", b.to_csv())
        print(f"{b.label}: {b.status}, {len(b.samples)} samples, A_min = {b.A_min:.10g}, folds at "
              + (", ".join(f"A={b.samples[i].A:.6g}" for i in b.folds) or "none"))
        if b.side_violations():
            status = EXIT_VIOLATION
    run.write(f"expansion_n{args.n}_r{args.root_index}.json", json.dumps(vars(exp), indent=1) + "\n")
    print(f"A1 = {exp.A1:.12g} +- {exp.A1_err:.2g}, A2 = {exp.A2:.12g} +- {exp.A2_err:.2g}")
    if _want_svg(args, cfg):
        from .plotting import plot_branches
        name = f"branch_n{args.n}_r{args.root_index}.svg"
        plot_branches(branches, run.path(name), A_max=cfg.A_max)
        run.add(name)
    return status


def cmd_atlas(args, cfg: RunConfig, run: Run) -> int:
    from .continuation import build_atlas

    atlas = build_atlas(cfg.n_max, cfg.A_max, workers=cfg.workers, prec=cfg.precision_start_bits)
    run.write("atlas.json", atlas.to_json() + "\n")
    for c in atlas.components:
        for b in c.branches:
            tag = "plus" if b.side > 0 else "minus"
            run.write(f"branches/n{c.owner}_r{b.r:.8f}_{tag}.csv", b.to_csv())
    lines = ["order\tcomponents\towners"]
    for row in atlas.census():
        owners = ", ".join(f"order {m}: {k}" for m, k in sorted(row.owners.items()))
        lines.append(f"{row.order}\t{row.components}\t{owners}")
    lines.append("")
    lines.append("component\tside\tA_min\tfolds\tstatus")
    violations = []
    for c in atlas.components:
        for b in c.branches:
            lines.append(f"n={c.owner} r={b.r:.10f}\t{'+' if b.side > 0 else '-'}\t{b.A_min:.10f}\t"
                         f"{len(b.folds)}\t{b.status}")
            if b.side_violations() or b.touches_trivial(1e-6) or b.uncertified():
                violations.append(b.label)
    expected = [1] + [n // 2 for n in range(2, cfg.n_max + 1)]
    if atlas.census_counts() != expected:
        violations.append(f"census {atlas.census_counts()} != root counts {expected}")
    violations += [f"{a} meets {b}" for a, b in atlas.disjointness_violations()]
    if atlas.failures:
        lines.append("")
        lines += ["failure: " + f for f in atlas.failures]
    if violations:
        lines += ["violation: " + v for v in violations]
    run.write("summary.txt", "\n".join(lines) + "\n")
    print("\n".join(lines))
    if _want_svg(args, cfg):
        from .plotting import plot_atlas
        plot_atlas(atlas, run.path("atlas.svg"))
        run.add("atlas.svg")
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_check(args, cfg: RunConfig, run: Run) -> int:
    from .checks import run_checks

    results = run_checks(min(cfg.n_max, 30) if args.n_max else 30, seed=cfg.seed, quick=args.quick)
    lines = [r.line() for r in results]
    run.write("check.txt", "\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


# parser ----------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, n_max: bool = True) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--output-dir", "-o", dest="output_dir", help="directory for outputs (default: out)")
    p.add_argument("--format", choices=FORMATS, help="table format; svg also renders the figure")
    p.add_argument("--precision-start", dest="precision_start_bits", type=int, help="starting precision in bits")
    p.add_argument("--precision-ceiling", dest="precision_ceiling_bits", type=int, help="precision ceiling in bits")
    p.add_argument("--tol", help="target enclosure width, e.g. 1e-20 or 1/10**20 as a decimal")
    p.add_argument("--seed", type=int, help="seed for randomized checks")
    p.add_argument("--workers", type=int, help="worker processes for independent tasks")
    p.add_argument("-v", "--verbose", action="store_true")
    if n_max:
        p.add_argument("--n-max", dest="n_max", type=int, help="largest order n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subharmonics", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chain", help="build p_1 .. p_n and optionally check their structure")
    _common(p)
    p.add_argument("--check", action="store_true", help="run the structural checks")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("roots", help="certified positive roots of p_2 .. p_n")
    _common(p)
    p.add_argument("--width", help="refine every interval to this width, e.g. 1e-30")
    p.add_argument("--digits", type=int, default=20, help="decimal places in the CSV")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("fixed-points", help="zeros of phi_n(A, .) on (0, n)")
    _common(p, n_max=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--A", required=True, help="forcing integral, exact decimal or fraction")
    p.add_argument("--cells", type=int, default=1024, help="initial grid cells")
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("two-periodic", help="2T states: one (A, B) or the curve over B")
    _common(p, n_max=False)
    p.add_argument("--A", required=True)
    p.add_argument("--B", help="solve at this B instead of tracing the curve")
    p.add_argument("--b-max", dest="b_max", help="end of the B grid (default 5 * 4/A)")
    p.add_argument("--steps", type=int, default=60)
    p.add_argument("--spacing", choices=("linear", "geometric"), default="geometric")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_two_periodic)

    p = sub.add_parser("branch", help="trace the half-branches seeded at one root of p_n")
    _common(p, n_max=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--root-index", dest="root_index", type=int, default=1, help="1-based, ascending")
    p.add_argument("--side", choices=("+", "-", "both"), default="both")
    p.add_argument("--a-max", dest="A_max", type=float)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("atlas", help="all components up to order n_max")
    _common(p)
    p.add_argument("--a-max", dest="A_max", type=float)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_atlas)

    p = sub.add_parser("check", help="run the built-in property suite")
    _common(p)
    p.add_argument("--quick", action="store_true", help="fewer random samples")
    p.set_defaults(func=cmd_check)
    return parser


_CONFIG_KEYS = ("n_max", "A_max", "precision_start_bits", "precision_ceiling_bits", "tol", "output_dir",
                "format", "seed", "workers")


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    try:
        cfg = load_config(args.config, **overrides)
    except (ConfigError, OSError) as exc:
        parser.error(str(exc))
    run = Run(args.command, cfg, argv)
    status = args.func(args, cfg, run)
    run.manifest(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
