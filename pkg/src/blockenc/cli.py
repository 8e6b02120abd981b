"""Command-line entry point.

Subcommands write into an output directory (``--out``, else the
``BLOCKENC_OUT`` environment variable, else ``./blockenc-out``) and record
their configuration in ``manifest.json``.  Every other file is a pure
function of the configuration, so reruns with the same seed are
byte-identical.

Exit codes: 0 ok, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import platform
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
OUT_ENV = "BLOCKENC_OUT"
DEFAULT_OUT = "blockenc-out"
COMPARE_GRID = "1e-20:1e-2:50"
REGIME_EPS_GRID = "1e-20:1e-2:200"
REGIME_X_GRID = "0:1e6:201"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    eps: float | None = None
    eps_grid: str | None = None
    seed: int = 42
    trials: int | None = None
    output_dir: str = DEFAULT_OUT
    format: str = "csv"

    def __post_init__(self):
        if self.eps is not None and not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if self.trials is not None and self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise ConfigError("seed must be unsigned")


def parse_grid(spec: str, log: bool = True) -> np.ndarray:
    """``min:max:count`` to a grid (log-spaced unless ``log`` is false)."""
    try:
        lo_s, hi_s, n_s = spec.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError as exc:
        raise ConfigError(f"bad grid {spec!r}; expected min:max:count") from exc
    if n < 1:
        raise ConfigError("grid count must be positive")
    if log:
        if lo <= 0 or hi <= 0:
            raise ConfigError("log grid bounds must be positive")
        return np.logspace(math.log10(lo), math.log10(hi), n)
    return np.linspace(lo, hi, n)


def resolve_out(flag: str | None) -> Path:
    return Path(flag or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def versions() -> dict:
    import scipy
    return {"blockenc": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def write_manifest(out: Path, cfg: RunConfig) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": cfg.command,
        "config": asdict(cfg),
        "versions": versions(),
        "started_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    p = out / "manifest.json"
    p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return p


def _dump_json(obj) -> str:
    from .report import _json_default
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


# -- verify -----------------------------------------------------------------

@dataclass
class Check:
    name: str
    measured: object
    expected: object
    tolerance: float | None
    passed: bool
    detail: str = ""


def _num_check(name: str, measured: float, expected: float, tol: float, detail: str = "") -> Check:
    return Check(name, float(measured), float(expected), tol,
                 bool(abs(measured - expected) <= tol), detail)


def _max_check(name: str, measured: float, tol: float, detail: str = "") -> Check:
    return Check(name, float(measured), 0.0, tol, bool(measured <= tol), detail)


def run_verification(corrupt: tuple[int, int] | None = None, lemma_trials_n: int = 1000,
                     seed: int = 42, full_sfable: bool = False) -> list[Check]:
    """The invariant suite behind ``verify``.

    ``corrupt`` perturbs one entry of the elementwise F1 build; the dual-build
    check then fails and names the entry.
    """
    from .algebraic import (GATE_R1, GATE_R2, SUB_R1, SUB_R2, build_constituents,
                            build_gate_optimized, build_sub_optimized, prep_pair,
                            prep_top_left, verify_constituent_circuits)
    from .bencs import lemma_trials
    from .f1 import build_f1_algebraic, build_f1_elementwise, build_lattice, f1_stats
    from .unstructured import build_qrom, build_sfable, build_unary_iteration

    checks: list[Check] = []
    lat = build_lattice()
    b = build_f1_algebraic(lat)
    elem = build_f1_elementwise(lat)
    if corrupt is not None:
        elem[corrupt] += 1.0
    diff = np.abs(elem - b.f1)
    loc = np.unravel_index(int(diff.argmax()), diff.shape)
    checks.append(_max_check("f1.dual_build", diff.max(), 1e-13,
                             f"largest deviation at index {tuple(int(i) for i in loc)}"))

    st = f1_stats(b)
    checks.append(_num_check("f1.nnz", st["nnz"], 722, 0))
    checks.append(_num_check("f1.unique", st["unique"], 14, 0))
    checks.append(_num_check("f1.norm_over_64", st["norm_over_64"], 0.0905, 2e-4))
    checks.append(_num_check("f1.hadamard_max_abs", st["hadamard_max_abs"], 1.002, 1e-3))

    cs = build_constituents(b)
    rep = verify_constituent_circuits(cs, b, strict=False)
    for k, v in rep.checks.items():
        checks.append(_max_check(f"constituent.{k}", v, rep.tolerance))
    for name, exp in (("A_v1", 0.866), ("A3_v1", 0.6495), ("C_enc", 0.4219)):
        checks.append(_num_check(f"constituent.alpha.{name}", getattr(cs, name).nominal_alpha,
                                 exp, 1e-4))

    encs = {
        "unary": build_unary_iteration(b).encoding,
        "qrom": build_qrom(b).encoding,
        "sfable": build_sfable(b, simulate=full_sfable).encoding,
        "gate_opt": build_gate_optimized(b),
        "sub_opt": build_sub_optimized(b),
    }
    expected_alpha = {"unary": 0.0905, "qrom": 0.0905, "sfable": 0.0903,
                      "gate_opt": 0.0225, "sub_opt": 0.0397}
    f_norm = b.f1 / b.norm_f1
    for m, enc in encs.items():
        blk = enc.block / enc.alpha
        checks.append(_max_check(f"{m}.exact_block", np.abs(blk - f_norm).max(), 1e-10))
        checks.append(_num_check(f"{m}.alpha", enc.alpha, expected_alpha[m], 2e-4))

    rng = np.random.default_rng(seed)
    for label, (r1, r2), formula in (
            ("gate", (GATE_R1, GATE_R2), lambda a, b_, c, d: (32 * (a + b_ + 6 * c) - d) / 257),
            ("sub", (SUB_R1, SUB_R2), lambda a, b_, c, d: (32 * (a + b_) + 81 * c - d) / 146)):
        left, right = prep_pair(r1, r2)
        worst = 0.0
        for _ in range(100):
            a, b_, c, d = rng.normal(size=4)
            got = prep_top_left(left, right, [a, b_, c, c, d, d, d, d])
            worst = max(worst, abs(got - formula(a, b_, c, d)))
        checks.append(_max_check(f"prep.{label}", worst, 1e-12))

    for lemma, insts in lemma_trials(rng, lemma_trials_n).items():
        bad = sum(not i.holds for i in insts)
        worst = max(i.actual / i.bound for i in insts if i.bound > 0)
        checks.append(Check(f"lemma.{lemma}", bad, 0, 0, bad == 0,
                            f"{len(insts)} instances, max actual/bound {worst:.4f}"))
    return checks


def cmd_verify(args, cfg: RunConfig, out: Path) -> int:
    corrupt = None
    if args.corrupt:
        try:
            i, j = (int(v) for v in args.corrupt.split(","))
        except ValueError as exc:
            raise ConfigError("--corrupt expects I,J") from exc
        if not (0 <= i < 64 and 0 <= j < 64):
            raise ConfigError("--corrupt index outside 0..63")
        corrupt = (i, j)
    checks = run_verification(corrupt, seed=cfg.seed, full_sfable=args.full)
    ok = all(c.passed for c in checks)
    report = {"ok": ok, "checks": [asdict(c) for c in checks],
              "failures": [c.name for c in checks if not c.passed]}
    (out / "verify.json").write_text(_dump_json(report))
    for c in checks:
        if not c.passed:
            print(f"FAIL {c.name}: measured {c.measured} expected {c.expected} "
                  f"(tol {c.tolerance}) {c.detail}".rstrip())
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return EXIT_OK if ok else EXIT_FAIL


# -- cost / compare / regime ------------------------------------------------

def _emit(out: Path, fmt: str, stem: str, columns: Sequence[str], rows: list[Sequence],
          meta: dict) -> None:
    from .report import to_csv, write_outputs
    if fmt == "csv":
        write_outputs(out, {f"{stem}.csv": to_csv(columns, rows)}, meta)
    else:
        payload = {"columns": list(columns), "rows": [list(r) for r in rows], "metadata": meta}
        write_outputs(out, {f"{stem}.json": _dump_json(payload)})


def cmd_cost(args, cfg: RunConfig, out: Path) -> int:
    from .costs import method_costs
    from .report import sidecar
    eps = cfg.eps if cfg.eps is not None else 1e-10
    rows = []
    for c in method_costs():
        t = c.t_count(eps)
        rows.append((c.method, c.a, c.b, eps, t, c.alpha, t / c.alpha))
        print(f"{c.method:9s} T = {c.a:8.2f} log2(1/eps) + {c.b:10.2f} -> {t:12.1f}  "
              f"alpha {c.alpha:.5f}")
    _emit(out, cfg.format, "cost", ("method", "a", "b", "eps", "t_count", "alpha", "merit"),
          rows, sidecar(eps=eps))
    return EXIT_OK


def cmd_compare(args, cfg: RunConfig, out: Path) -> int:
    from .report import COMPARISON_COLUMNS, comparison_table, sidecar
    grid = parse_grid(cfg.eps_grid or COMPARE_GRID)
    rows = comparison_table(grid)
    _emit(out, cfg.format, "comparison", COMPARISON_COLUMNS,
          [(r.method, r.eps, r.t_count, r.alpha, r.figure_of_merit) for r in rows],
          sidecar(eps_grid=cfg.eps_grid or COMPARE_GRID))
    print(f"{len(rows)} rows")
    return EXIT_OK


def cmd_regime(args, cfg: RunConfig, out: Path) -> int:
    from .report import (REGIME_COLUMNS, REGIME_METHODS, boundaries_csv, regime_boundaries,
                         regime_map, sidecar, write_outputs)
    eps_spec = cfg.eps_grid or REGIME_EPS_GRID
    x_spec = args.x_grid or REGIME_X_GRID
    eps = parse_grid(eps_spec)
    xs = parse_grid(x_spec, log=False)
    pts = regime_map(xs, eps)
    lines = regime_boundaries(eps_min=float(eps.min()), eps_max=float(eps.max()),
                              points=len(eps))
    meta = sidecar(eps_grid=eps_spec, x_grid=x_spec, methods=list(REGIME_METHODS))
    _emit(out, cfg.format, "regime", REGIME_COLUMNS,
          [(p.x, p.log2_inv_eps, p.winner) for p in pts], meta)
    if cfg.format == "csv":
        write_outputs(out, {"boundaries.csv": boundaries_csv(lines)})
    else:
        write_outputs(out, {"boundaries.json": _dump_json(lines)})
    print(f"{len(pts)} grid points, {sum(len(v) for v in lines.values())} boundary points")
    return EXIT_OK


# -- simulate ---------------------------------------------------------------

def cmd_simulate(args, cfg: RunConfig, out: Path) -> int:
    from .costs import method_costs
    from .montecarlo import DEFAULT_GRID, METHODS, qrom_correlation_note, simulate_average
    from .report import TABLE1_COLUMNS, sidecar, table1, write_outputs

    methods = args.methods.split(",") if args.methods else list(METHODS)
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ConfigError(f"unknown methods {sorted(unknown)}")
    grid = parse_grid(cfg.eps_grid) if cfg.eps_grid else np.array(DEFAULT_GRID)
    fits = {}
    for m in methods:
        try:
            fits[m] = simulate_average(m, grid, cfg.trials, rng_seed=cfg.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        f = fits[m]
        print(f"{m:9s} fit {f.a:8.2f} log2(1/e) + {f.b:10.2f}  ({f.samples} trials, "
              f"bound held in {sum(r.error <= r.bound for r in f.records)})")
    rows = table1(fits)
    costs = {c.method: c for c in method_costs()}
    extra = {"seed": cfg.seed, "eps_grid": [float(e) for e in grid],
             "trials": {m: f.samples for m, f in fits.items()},
             "soundness": {m: f.sound() for m, f in fits.items()}}
    if "unary" in fits and "qrom" in fits:
        note = qrom_correlation_note(fits["unary"], fits["qrom"],
                                     costs["unary"].b, costs["qrom"].b)
        extra["gaps"] = {"unary": note.unary_gap, "qrom": note.qrom_gap}
    table_rows = [(r.method, r.bound_a, r.bound_b, r.avg_a, r.avg_b) for r in rows]
    _emit(out, cfg.format, "table1", TABLE1_COLUMNS, table_rows, sidecar(**extra))
    trial_rows = [(r.method, r.eps, r.error, r.t_charged)
                  for f in fits.values() for r in f.records]
    _emit_trials(out, cfg.format, trial_rows, write_outputs)
    return EXIT_OK


def _emit_trials(out: Path, fmt: str, rows, write_outputs) -> None:
    from .report import to_csv
    cols = ("method", "eps_budgeted", "error_achieved", "t_charged")
    if fmt == "csv":
        write_outputs(out, {"trials.csv": to_csv(cols, rows)})
    else:
        write_outputs(out, {"trials.json": _dump_json({"columns": cols, "rows": rows})})


# -- export -----------------------------------------------------------------

def _matrix_csv(m: np.ndarray) -> str:
    return "\n".join(",".join(repr(float(v)) for v in row) for row in m) + "\n"


def _write_mtx(path: Path, m: np.ndarray) -> None:
    import scipy.io
    import scipy.sparse
    scipy.io.mmwrite(str(path), scipy.sparse.coo_matrix(m), precision=17)


def cmd_export(args, cfg: RunConfig, out: Path) -> int:
    from .f1 import default_bundle
    from .unstructured import (build_schedule, profile_csv, sfable_angles,
                               sfable_magnitude_profile)
    b = default_bundle()
    mats = {"f1": b.f1, "C": b.C, "W": b.W, "P": b.P, "G6": b.G6}
    if args.what != "all":
        mats = {k: v for k, v in mats.items() if k == args.what}
    for name, m in mats.items():
        (out / f"{name}.csv").write_text(_matrix_csv(m))
        _write_mtx(out / f"{name}.mtx", m)
    if args.what in ("all", "schedule"):
        (out / "schedule.csv").write_text(build_schedule(b.f1, args.order).to_csv())
    if args.what in ("all", "profile"):
        (out / "profile.csv").write_text(profile_csv(sfable_magnitude_profile(sfable_angles(b.f1))))
    print(f"wrote {args.what} to {out}")
    return EXIT_OK


# -- wiring -----------------------------------------------------------------

COMMANDS: dict[str, Callable] = {
    "verify": cmd_verify, "cost": cmd_cost, "compare": cmd_compare,
    "regime": cmd_regime, "simulate": cmd_simulate, "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", type=float, help="target accuracy")
    common.add_argument("--eps-grid", help="log grid as min:max:count")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--trials", type=int, help="Monte Carlo trials per grid point")
    common.add_argument("--out", help=f"output directory (else ${OUT_ENV}, else ./{DEFAULT_OUT})")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="blockenc",
                                description="Block encodings of the 64x64 CFD matrix F1.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--corrupt", metavar="I,J", help="fault injection: shift one F1 entry")
    v.add_argument("--full", action="store_true",
                   help="simulate the full S-FABLE circuit (about a minute)")
    sub.add_parser("cost", parents=[common], help="T-count table at one eps")
    sub.add_parser("compare", parents=[common], help="T(eps)/alpha over an eps grid")
    r = sub.add_parser("regime", parents=[common], help="winner map over (x, eps)")
    r.add_argument("--x-grid", help="linear state-prep cost grid min:max:count")
    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo average-case fits")
    s.add_argument("--methods", help="comma-separated subset of methods")
    e = sub.add_parser("export", parents=[common], help="dump matrices, schedule, profile")
    e.add_argument("--what", default="all",
                   choices=("all", "f1", "C", "W", "P", "G6", "schedule", "profile"))
    e.add_argument("--order", default="row", choices=("row", "col"))
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = resolve_out(args.out)
        cfg = RunConfig(command=args.command, eps=args.eps, eps_grid=args.eps_grid,
                        seed=args.seed, trials=args.trials, output_dir=str(out),
                        format=args.format)
        if cfg.eps_grid:
            parse_grid(cfg.eps_grid)
        try:
            write_manifest(out, cfg)
        except OSError as exc:
            raise ConfigError(f"cannot write to {out}: {exc}") from exc
        return COMMANDS[args.command](args, cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
