"""Command-line driver.

Subcommands: ``npr-table`` (subjective annuity premium table),
``solve`` (one free-boundary solve with policy export), ``simulate``
(Monte Carlo under a solved policy) and ``surface`` (age sweep).

Exit codes: 0 success, 2 configuration error, 3 numerical
non-convergence, 4 grid/domain error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import config as cfgmod
from . import hjb, model, mortality, policy, sim
from .errors import (AnnuitizeError, ConfigError, DomainError, GridTooSmall,
                     IoError, NoConvergence)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOCONV = 3
EXIT_GRID = 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annuitize",
        description="Annuitization timing with habit formation and "
                    "endogenous labor supply.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a 'section.key = value' file")
        p.add_argument("--out", help="output file path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, help="override sim.seed")
        p.add_argument("--plot", action="store_true",
                       help="render figures next to the data output")

    p = sub.add_parser("npr-table",
                       help="subjective annuity premium ratios by modal age")
    common(p)

    p = sub.add_parser("solve", help="solve the stopping problem at one age")
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo under the solved policy")
    common(p)
    p.add_argument("--policy", help="previously exported policy table")
    p.add_argument("--benchmark", action="store_true",
                   help="paired comparison against the constant-weight, "
                        "no-labor benchmark")
    p.add_argument("--trace", action="store_true",
                   help="write per-step path trace CSV")

    p = sub.add_parser("surface", help="free-boundary solves across ages")
    common(p)
    return parser


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _plot_path(out, suffix=""):
    import os
    stem = os.path.splitext(out)[0] if out else "annuitize"
    return f"{stem}{suffix}.png"


def cmd_npr_table(args) -> int:
    cfg = cfgmod.load_config(args.config)
    modal = cfgmod.float_list(cfg["npr.modal_ages"], "npr.modal_ages")
    n, lam = cfg["mortality.n"], cfg["mortality.lam"]
    m_obj, r = cfg["npr.objective_m"], cfg["npr.r"]
    objective = mortality.GompertzParams(n=n, m=m_obj, lam=lam)
    rows = []
    for m_tilde in modal:
        subjective = mortality.GompertzParams(n=n, m=m_tilde, lam=lam)
        rows.append((m_tilde, mortality.npr(subjective, objective, r)))

    print(f"# n={n:g} lambda={lam:g} r={r:g} m_obj={m_obj:g}")
    print("m_tilde    npr")
    for m_tilde, value in rows:
        print(f"{m_tilde:7.1f} {value:8.4f}")

    if args.out:
        if args.format == "json":
            payload = {"n": n, "lam": lam, "r": r, "m_obj": m_obj,
                       "rows": [{"m_tilde": m, "npr": v} for m, v in rows]}
            _write_text(args.out, json.dumps(payload, indent=2) + "\n")
        else:
            lines = ["m_tilde,npr"]
            lines += [f"{float(m)!r},{float(v)!r}" for m, v in rows]
            _write_text(args.out, "\n".join(lines) + "\n")
    if args.plot:
        from . import plots
        plots.npr_figure([m for m, _ in rows], [v for _, v in rows],
                         _plot_path(args.out, "_npr"))
    return EXIT_OK


def _solve_from_config(cfg, age=None):
    params = cfgmod.build_model_params(cfg, age)
    violations = model.validate(params)
    if violations:
        raise ConfigError("invalid configuration: " + "; ".join(violations))
    grid = cfgmod.build_grid(cfg)
    solver = cfgmod.build_solver_config(cfg)
    return hjb.solve_vi(grid, params, solver), params


def _print_solve_summary(result):
    print(f"sweeps            {result.sweeps}")
    if result.y_star is None:
        print("no stopping region")
    else:
        print(f"y_tilde           {result.y_tilde:.6g}"
              if result.y_tilde is not None else "y_tilde           (none)")
        print(f"y_star            {result.y_star:.6g}")
        print(f"value_matching    {result.value_match_residual:.3e}")
        print(f"smooth_pasting    {result.smooth_pasting_residual:.3e}")
    print(f"max_hjb_residual  {np.max(np.abs(result.hjb_residual)):.3e}")


def cmd_solve(args) -> int:
    cfg = cfgmod.load_config(args.config)
    result, _ = _solve_from_config(cfg)
    _print_solve_summary(result)
    table = policy.from_solve(result, age=cfg["run.age"])
    if args.out:
        policy.export(table, args.out, fmt=args.format)
        print(f"policy written to {args.out}")
    if args.plot:
        from . import plots
        plots.policy_figure(table, _plot_path(args.out, "_policy"))
        plots.value_figure(result, _plot_path(args.out, "_value"))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = cfgmod.load_config(args.config)
    terminal_value = None
    if args.policy:
        table = policy.load(args.policy)
        params = table.params
    else:
        result, params = _solve_from_config(cfg)
        table = policy.from_solve(result, age=cfg["run.age"])
        # value paths still alive at the horizon cap with the solved
        # continuation value instead of silently dropping their tail
        y_nodes, v_nodes = result.y.copy(), result.value.copy()
        terminal_value = lambda yy: np.interp(yy, y_nodes, v_nodes)
    spec = cfgmod.build_sim_discount(cfg, cfg["run.age"])
    sim_cfg = cfgmod.build_sim_config(cfg, seed=args.seed)

    trace_path = None
    if args.trace:
        trace_path = _plot_path(args.out, "_trace").replace(".png", ".csv")
    stats = sim.simulate(table, spec, sim_cfg, trace_path=trace_path,
                         terminal_value=terminal_value)

    print(f"seed              {stats.seed}")
    print(f"paths             {stats.n_paths}")
    print(f"mean_utility      {stats.mean_utility:.6g}")
    print(f"ci_half_width     {stats.ci_half_width:.6g}")
    for q in sorted(stats.tau_quantiles):
        print(f"tau_q{int(q * 100):02d}           {stats.tau_quantiles[q]:.4g}")
    print(f"frac_never_stop   {stats.frac_never_stopped:.4g}")
    print(f"frac_insolvent    {stats.frac_insolvent:.4g}")

    if args.benchmark:
        bench = policy.merton_benchmark(params, table.y, table.y_star)
        gap = sim.compare(table, bench, spec, sim_cfg)
        print(f"benchmark_gap     {gap['mean_diff']:.6g}")
        print(f"gap_ci_half       {gap['ci_half_width']:.6g}")

    if args.out:
        payload = {"seed": stats.seed, "n_paths": stats.n_paths,
                   "mean_utility": stats.mean_utility,
                   "ci_half_width": stats.ci_half_width,
                   "tau_quantiles": {str(k): v
                                     for k, v in stats.tau_quantiles.items()},
                   "frac_never_stopped": stats.frac_never_stopped,
                   "frac_insolvent": stats.frac_insolvent}
        if args.format == "json":
            _write_text(args.out, json.dumps(payload, indent=2) + "\n")
        else:
            lines = ["key,value"]
            lines += [f"{k},{v}" for k, v in payload.items()
                      if k != "tau_quantiles"]
            lines += [f"tau_q{int(float(q) * 100):02d},{v}"
                      for q, v in payload["tau_quantiles"].items()]
            _write_text(args.out, "\n".join(lines) + "\n")
    if args.plot:
        from . import plots
        plots.simulation_figure(stats, _plot_path(args.out, "_sim"))
    return EXIT_OK


def cmd_surface(args) -> int:
    cfg = cfgmod.load_config(args.config)
    ages = cfgmod.float_list(cfg["run.ages"], "run.ages")
    if sorted(ages) != ages:
        raise ConfigError("run.ages must be increasing")

    rows = []
    boundary_entries = []
    failed = []
    for age in ages:
        try:
            result, _ = _solve_from_config(cfg, age)
        except (NoConvergence, GridTooSmall) as exc:
            failed.append((age, str(exc)))
            continue
        table = policy.from_solve(result, age=age)
        boundary_entries.append((age, result.y_tilde, result.y_star))
        for i in range(table.y.size):
            rows.append((age, table.y[i], table.region[i], table.kappa[i],
                         table.b[i], table.p[i], table.p[i] * table.y[i]))

    header = "age," + policy.CSV_HEADER
    lines = [header]
    lines += [f"{float(a)!r},{float(y)!r},{reg},{float(k)!r},{float(b)!r},"
              f"{float(p)!r},{float(py)!r}" for a, y, reg, k, b, p, py in rows]
    out = args.out or "surface.csv"
    _write_text(out, "\n".join(lines) + "\n")
    print(f"surface written to {out} ({len(rows)} rows, "
          f"{len(ages) - len(failed)}/{len(ages)} ages)")
    for age, yt, ys in boundary_entries:
        yt_s = f"{yt:.6g}" if yt is not None else "-"
        ys_s = f"{ys:.6g}" if ys is not None else "-"
        print(f"age {age:5.1f}  y_tilde {yt_s:>10}  y_star {ys_s:>10}")

    # companion survival-curve family over the premium table's modal ages
    modal = cfgmod.float_list(cfg["npr.modal_ages"], "npr.modal_ages")
    n, lam = cfg["mortality.n"], cfg["mortality.lam"]
    t_grid = np.linspace(0.0, 40.0, 81)
    surv_lines = ["m,t,survival"]
    surv_entries = []
    for m in modal:
        law = mortality.GompertzParams(n=n, m=m, lam=lam)
        s_vals = [mortality.survival(law, t) for t in t_grid]
        surv_entries.append((f"m={m:g}", t_grid, np.asarray(s_vals)))
        surv_lines += [f"{float(m)!r},{float(t)!r},{float(s)!r}"
                       for t, s in zip(t_grid, s_vals)]
    surv_out = _plot_path(out, "_survival").replace(".png", ".csv")
    _write_text(surv_out, "\n".join(surv_lines) + "\n")

    if args.plot:
        from . import plots
        plots.surface_figure(boundary_entries, _plot_path(out, "_boundaries"))
        plots.survival_figure(surv_entries, _plot_path(out, "_survival"))

    if failed:
        for age, msg in failed:
            print(f"age {age:g} failed: {msg}", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


_COMMANDS = {
    "npr-table": cmd_npr_table,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "surface": cmd_surface,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DomainError, IoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoConvergence as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except GridTooSmall as exc:
        print(f"error: {exc} (try raising grid.y_max)", file=sys.stderr)
        return EXIT_GRID
    except AnnuitizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
