"""Command-line surface.

Subcommands: ``kernel`` (build and export a base matrix), ``wigner``
(evaluate a state distribution on a grid), ``verify`` (run the condition
report), ``repr`` (operator representations), ``tabulate`` (the periodic
special functions).  Outputs are deterministic given the configuration and
seed: every file starts with a provenance header (version and config echo,
no timestamps) and numbers are printed with 17 significant digits.  With
``--plot`` a rendered figure is written next to the data file.

Exit codes: 0 on success (including expected condition violations),
1 when a verification report deviates from the expected verdicts,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .fock import (BasisWindow, number_operator, identity_operator,
                   parse_state_spec, theta_operator, STATE_SPEC_GRAMMAR)
from .kernel import make_kernel, kernel_to_text, support_antidiagonals
from .periodics import UnitFunction, r_theta, sawtooth, square_wave
from .verify import full_report
from .wigner import op_representation, symmetric_product_rep, wigner_of_state

_OPS = ("theta", "N", "sym(N,theta)", "identity")


@dataclass
class RunConfig:
    """Echoed into every output header; fully determines a run."""

    command: str
    variant: str = ""
    nmin: int | None = None
    nmax: int = 64
    theta_nodes: int = 256
    seed: int = 42
    tol: float | None = None
    out: str | None = None
    fmt: str = "rows"
    plot: bool = False
    extra: dict | None = None

    def echo(self) -> str:
        items = {
            "command": self.command, "variant": self.variant, "nmin": self.nmin,
            "nmax": self.nmax, "theta_nodes": self.theta_nodes, "seed": self.seed,
            "tol": self.tol, "format": self.fmt,
        }
        if self.extra:
            items.update(self.extra)
        return " ".join(f"{k}={v}" for k, v in sorted(items.items()) if v is not None)


def _g17(x: float) -> str:
    return f"{float(x):.17g}"


def _write_rows(path: str, config: RunConfig, columns, rows) -> None:
    with open(path, "w") as fh:
        fh.write(f"# npwigner {config.command} {__version__}\n")
        fh.write(f"# config: {config.echo()}\n")
        fh.write(f"# columns: {' '.join(columns)}\n")
        for row in rows:
            fh.write("\t".join(_g17(v) if isinstance(v, float) else str(v)
                               for v in row) + "\n")


def _write_doc(path: str, config: RunConfig, payload: dict) -> None:
    doc = {"tool": "npwigner", "version": __version__,
           "command": config.command, "config": config.echo()}
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _plot_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".png"


def _resolve_window(variant: str, nmin, nmax) -> BasisWindow:
    physical = variant in ("s1", "s2")
    if physical:
        return BasisWindow(0, nmax)
    return BasisWindow(-nmax if nmin is None else nmin, nmax)


def _grid_rows_real(grid):
    for i, n in enumerate(grid.n_values):
        for j, th in enumerate(grid.thetas):
            yield (int(n), float(th), float(grid.values[i, j]))


def _grid_rows_complex(rep):
    for i, n in enumerate(rep.n_values):
        for j, th in enumerate(rep.thetas):
            v = rep.values[i, j]
            yield (int(n), float(th), float(v.real), float(v.imag))


def cmd_kernel(cfg: RunConfig, parser) -> int:
    window = (BasisWindow(-cfg.nmax, cfg.nmax) if cfg.variant in ("s1", "s2")
              else _resolve_window(cfg.variant, cfg.nmin, cfg.nmax))
    kern = make_kernel(cfg.variant, window)
    support = support_antidiagonals(kern, tol=1e-15)
    print(f"kernel {cfg.variant}: window [{window.n_min}, {window.n_max}], "
          f"{len(support)} nonzero anti-diagonals"
          + (f" at k+l in {support}" if len(support) <= 4 else ""))
    if cfg.fmt == "rows":
        with open(cfg.out, "w") as fh:
            fh.write(f"# npwigner kernel {__version__}\n")
            fh.write(f"# config: {cfg.echo()}\n")
            fh.write(kernel_to_text(kern))
    else:
        idx = kern.window.values()
        rows = [[int(idx[i]), int(idx[j]),
                 _g17(kern.base[i, j].real), _g17(kern.base[i, j].imag)]
                for i in range(window.dim) for j in range(window.dim)]
        _write_doc(cfg.out, cfg, {
            "variant": kern.variant, "physical": kern.physical,
            "window": [window.n_min, window.n_max], "base_rows": rows,
            "support_antidiagonals": support})
    if cfg.plot:
        from .plotting import save_base_magnitude
        save_base_magnitude(_plot_path(cfg.out), window.values(), kern.base,
                            f"base matrix, variant {cfg.variant}")
    return 0


def cmd_wigner(cfg: RunConfig, parser) -> int:
    state_window = _resolve_window(cfg.variant, cfg.nmin, cfg.nmax)
    try:
        rho, improper = parse_state_spec(cfg.extra["state"], state_window)
    except (ValueError, IndexError) as exc:
        parser.error(str(exc))
    span = state_window.n_max - state_window.n_min
    base_window = BasisWindow(-span, span)
    kern = make_kernel(cfg.variant, base_window)
    grid = wigner_of_state(kern, rho, thetas=cfg.theta_nodes,
                           validate=not improper)
    header_extra = {"state": cfg.extra["state"], "improper": improper,
                    "window": f"[{state_window.n_min},{state_window.n_max}]"}
    cfg.extra.update(header_extra)
    if cfg.fmt == "rows":
        _write_rows(cfg.out, cfg, ("n", "theta", "value"), _grid_rows_real(grid))
    else:
        _write_doc(cfg.out, cfg, {
            "variant": grid.variant, "n": [int(n) for n in grid.n_values],
            "theta": [_g17(t) for t in grid.thetas],
            "values": [[_g17(v) for v in row] for row in grid.values],
            "imag_max": _g17(grid.meta.get("imag_max", 0.0))})
    if cfg.plot:
        from .plotting import save_grid_heatmap
        save_grid_heatmap(_plot_path(cfg.out), grid.n_values, grid.thetas,
                          grid.values, f"distribution, {cfg.extra['state']}, "
                          f"variant {cfg.variant}", "value")
    return 0


def cmd_repr(cfg: RunConfig, parser) -> int:
    op_name = cfg.extra["op"]
    if op_name not in _OPS:
        parser.error(f"unknown operator {op_name!r}; choose from {_OPS}")
    window = _resolve_window(cfg.variant, cfg.nmin, cfg.nmax)
    n_lo = -(-window.n_min // 2)
    n_hi = window.n_max // 2
    n_values = np.arange(n_lo, n_hi + 1)
    span = max(abs(window.n_min - n_hi), abs(window.n_max - n_lo))
    base_window = BasisWindow(-span, span)
    kern = make_kernel(cfg.variant, base_window)
    if op_name == "sym(N,theta)":
        rep = symmetric_product_rep(kern, window, n_values, cfg.theta_nodes)
    else:
        op = {"theta": theta_operator, "N": number_operator,
              "identity": identity_operator}[op_name](window)
        rep = op_representation(kern, op, n_values, cfg.theta_nodes)
    if cfg.fmt == "rows":
        _write_rows(cfg.out, cfg, ("n", "theta", "re", "im"),
                    _grid_rows_complex(rep))
    else:
        _write_doc(cfg.out, cfg, {
            "variant": rep.variant, "op": op_name,
            "n": [int(n) for n in rep.n_values],
            "theta": [_g17(t) for t in rep.thetas],
            "re": [[_g17(v.real) for v in row] for row in rep.values],
            "im": [[_g17(v.imag) for v in row] for row in rep.values]})
    if cfg.plot:
        from .plotting import save_grid_heatmap
        save_grid_heatmap(_plot_path(cfg.out), rep.n_values, rep.thetas,
                          rep.values.real, f"representation of {op_name}, "
                          f"variant {cfg.variant}", "real part")
    return 0


def cmd_verify(cfg: RunConfig, parser) -> int:
    window = _resolve_window(cfg.variant, cfg.nmin, cfg.nmax)
    report = full_report(cfg.variant, window, seed=cfg.seed,
                         tol_override=cfg.tol)
    print(report.to_text())
    if cfg.out:
        _write_doc(cfg.out, cfg, {"report": report.as_dict()})
        if cfg.plot:
            from .plotting import save_report_bars
            save_report_bars(_plot_path(cfg.out), report)
    elif cfg.plot:
        parser.error("--plot for verify needs --out to derive the figure path")
    return 0 if report.ok() else 1


def cmd_tabulate(cfg: RunConfig, parser) -> int:
    points = cfg.extra["points"]
    terms = cfg.extra["terms"]
    if points < 2:
        parser.error("need at least two tabulation points")
    u = UnitFunction()
    theta = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    cols = {
        "U": u(theta),
        "f2": square_wave(theta),
        "R": r_theta(theta, terms),
        "sawtooth": sawtooth(theta),
    }
    rows = ((float(t),) + tuple(float(c[i]) for c in cols.values())
            for i, t in enumerate(theta))
    if cfg.fmt == "rows":
        _write_rows(cfg.out, cfg, ("theta",) + tuple(cols), rows)
    else:
        _write_doc(cfg.out, cfg, {
            "theta": [_g17(t) for t in theta],
            **{k: [_g17(v) for v in c] for k, c in cols.items()}})
    if cfg.plot:
        from .plotting import save_columns
        from .plotting import save_columns as _sc  # noqa: F401
        save_columns(_plot_path(cfg.out), theta, cols, r"$\theta$",
                     "periodic special functions")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npwigner",
        description="Number-phase Wigner kernels: build, evaluate, verify.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_out=True, variants=True):
        if variants:
            p.add_argument("--variant", required=False, default="w2",
                           choices=["w1", "w2", "w3", "s1", "s2"])
        p.add_argument("--nmin", type=int, default=None,
                       help="lower window edge (extended variants; default -nmax)")
        p.add_argument("--nmax", type=int, default=64)
        p.add_argument("--theta-nodes", type=int, default=256, dest="theta_nodes")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--tol", type=float, default=None,
                       help="override every check threshold (verify only)")
        p.add_argument("--out", required=need_out,
                       help="output file path")
        p.add_argument("--format", choices=["rows", "doc"], default="rows",
                       dest="fmt")
        p.add_argument("--plot", action="store_true",
                       help="render a figure next to the output file")

    p_kernel = sub.add_parser("kernel", help="export a kernel base matrix")
    common(p_kernel)

    p_wigner = sub.add_parser("wigner", help="evaluate a state distribution")
    common(p_wigner)
    p_wigner.add_argument("--state", required=True,
                          help=f"state spec: {STATE_SPEC_GRAMMAR}")

    p_repr = sub.add_parser("repr", help="operator representation grid")
    common(p_repr)
    p_repr.add_argument("--op", required=True,
                        help=f"operator: {', '.join(_OPS)}")

    p_verify = sub.add_parser("verify", help="run the condition report")
    common(p_verify, need_out=False)

    p_tab = sub.add_parser("tabulate", help="tabulate the periodic functions")
    common(p_tab, variants=False)
    p_tab.add_argument("--points", type=int, default=512)
    p_tab.add_argument("--terms", type=int, default=200,
                       help="series terms for the odd-harmonic sum column")
    return parser


def _limit_threads() -> None:
    # Only supported environment override: thread count for the BLAS pools.
    want = os.environ.get("NPWIGNER_THREADS")
    if not want:
        return
    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(int(want))
    except Exception:
        pass


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _limit_threads()
    cfg = RunConfig(
        command=args.command,
        variant=getattr(args, "variant", ""),
        nmin=args.nmin, nmax=args.nmax,
        theta_nodes=args.theta_nodes, seed=args.seed, tol=args.tol,
        out=args.out, fmt=args.fmt, plot=args.plot, extra={})
    if args.command == "wigner":
        cfg.extra["state"] = args.state
    if args.command == "repr":
        cfg.extra["op"] = args.op
    if args.command == "tabulate":
        cfg.extra.update(points=args.points, terms=args.terms)
    handlers = {"kernel": cmd_kernel, "wigner": cmd_wigner, "repr": cmd_repr,
                "verify": cmd_verify, "tabulate": cmd_tabulate}
    try:
        return handlers[args.command](cfg, parser)
    except (ValueError, IndexError) as exc:
        parser.error(str(exc))
        return 2  # unreachable; parser.error exits


if __name__ == "__main__":
    sys.exit(main())
