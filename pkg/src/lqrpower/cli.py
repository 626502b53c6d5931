"""Command line front end.

Exit codes: 0 success, 2 validation/parse error, 3 infeasible,
4 numerical failure.  Power budgets are accepted in dBW on the command
line and converted once at this boundary; everything below works in SI
units.
"""

from __future__ import annotations

import functools
import math
import sys
from pathlib import Path

import click

from . import allocator, figures, loopsim, model
from .errors import InfeasibleStability, LqrPowerError
from .model import (
    METHOD_CLOSED_FORM,
    METHOD_EXACT,
    METHOD_WATER_FILLING,
)

_METHOD_FLAGS = {
    "exact": METHOD_EXACT,
    "closed": METHOD_CLOSED_FORM,
    "wf": METHOD_WATER_FILLING,
}


def _fmt(x: float) -> str:
    """Locale-independent numeric cell: 12 significant digits."""
    return f"{x:.12g}"


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except LqrPowerError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


@click.group()
def cli():
    """Transmit-power allocation minimizing the sum LQR cost of control loops."""


@cli.command()
@click.argument("out_file", type=click.Path(dir_okay=False, writable=True))
@click.option("--spec", "spec_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Scenario spec JSON; defaults match the "
              "reference setup (5 robots, 5 km field, 1 km altitude).")
@click.option("--pmax-dbw", type=float, default=5.0, show_default=True,
              help="Power budget stored in the scenario file.")
@_handle_errors
def gen(out_file, spec_file, pmax_dbw):
    """Generate a fully materialized scenario file."""
    spec = model.load_spec(spec_file) if spec_file else model.ScenarioSpec()
    problem = model.generate_scenario(spec, model.dbw_to_watts(pmax_dbw))
    model.save_scenario(out_file, problem, spec)
    click.echo(
        f"wrote {out_file}: {problem.num_loops} loops, seed {spec.seed}, "
        f"p_max {_fmt(problem.p_max_w)} W"
    )


def _load_problem(scenario_file, pmax_dbw):
    problem = model.load_scenario(scenario_file)
    if pmax_dbw is not None:
        problem = model.AllocationProblem(
            loops=problem.loops, p_max_w=model.dbw_to_watts(pmax_dbw))
    return problem


@cli.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(sorted(_METHOD_FLAGS)), default="exact",
              show_default=True)
@click.option("--pmax-dbw", type=float, default=None,
              help="Override the file's power budget.")
@click.option("--out", "out_file", type=click.Path(dir_okay=False, writable=True),
              default=None, help="Result JSON path "
              "[default: <scenario>.result.json].")
@_handle_errors
def solve(scenario_file, method, pmax_dbw, out_file):
    """Allocate power for one scenario and print the per-loop table."""
    problem = _load_problem(scenario_file, pmax_dbw)
    result = allocator.solve(problem, _METHOD_FLAGS[method])
    if out_file is None:
        p = Path(scenario_file)
        out_file = str(p.with_name(p.stem + ".result.json"))
    model.save_result(out_file, result)

    click.echo(f"method: {result.method}   p_max: {_fmt(problem.p_max_w)} W")
    click.echo(f"{'loop':>4}  {'gain':>14}  {'h_bits':>10}  {'p_w':>14}  "
               f"{'lqr_cost':>14}")
    for k, loop in enumerate(problem.loops):
        click.echo(
            f"{k:>4}  {_fmt(loop.channel.gain):>14}  {_fmt(loop.h_bits):>10}  "
            f"{_fmt(result.powers_w[k]):>14}  {_fmt(result.lqr_costs[k]):>14}"
        )
    click.echo(f"total power {_fmt(sum(result.powers_w))} W   "
               f"total cost {_fmt(result.total_cost)}   "
               f"lambda {_fmt(result.lam)}")
    click.echo(f"result written to {out_file}")


def _parse_range(text: str) -> list[float]:
    try:
        lo, hi, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise click.BadParameter("expected lo:hi:step") from None
    if step <= 0 or hi < lo:
        raise click.BadParameter("expected lo <= hi and step > 0")
    values = []
    k = 0
    while True:
        v = lo + k * step
        if v > hi + 1e-9:
            break
        values.append(v)
        k += 1
    return values


def _parse_methods(text: str) -> list[str]:
    methods = []
    for token in text.split(","):
        token = token.strip()
        if token not in _METHOD_FLAGS:
            raise click.BadParameter(
                f"unknown method {token!r}; choose from {sorted(_METHOD_FLAGS)}")
        methods.append(_METHOD_FLAGS[token])
    return methods


@cli.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--pmax-range", default="-10:20:1", show_default=True,
              help="Budget sweep in dBW as lo:hi:step.")
@click.option("--methods", default="exact,closed,wf", show_default=True,
              help="Comma-separated subset of exact, closed, wf.")
@click.option("--out", "out_file", type=click.Path(dir_okay=False, writable=True),
              default="-", help="CSV path, or - for standard output.")
@click.option("--plot", "plot_file", type=click.Path(dir_okay=False, writable=True),
              default=None, help="Also render the sweep as a figure file.")
@_handle_errors
def sweep(scenario_file, pmax_range, methods, out_file, plot_file):
    """Sweep the power budget and emit one CSV row per (budget, method)."""
    problem = model.load_scenario(scenario_file)
    methods = _parse_methods(methods)
    dbw_values = _parse_range(pmax_range)
    floor_total = math.fsum(loop.derived.cost_floor for loop in problem.loops)

    K = problem.num_loops
    header = (["p_max_dbw", "method", "total_lqr_cost"]
              + [f"p_{k}" for k in range(1, K + 1)] + ["lqr_cost_floor"])
    lines = [",".join(header)]
    rows = []
    for dbw in dbw_values:
        budget = model.AllocationProblem(
            loops=problem.loops, p_max_w=model.dbw_to_watts(dbw))
        for method in methods:
            try:
                result = allocator.solve(budget, method)
            except InfeasibleStability:
                lines.append(",".join(
                    [_fmt(dbw), method, "infeasible"] + [""] * K
                    + [_fmt(floor_total)]))
                rows.append(dict(p_max_dbw=dbw, method=method, total_cost=None))
                continue
            lines.append(",".join(
                [_fmt(dbw), method, _fmt(result.total_cost)]
                + [_fmt(p) for p in result.powers_w] + [_fmt(floor_total)]))
            rows.append(dict(p_max_dbw=dbw, method=method,
                             total_cost=result.total_cost))

    text = "\n".join(lines) + "\n"
    if out_file == "-":
        click.echo(text, nl=False)
    else:
        Path(out_file).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_file}")
    if plot_file:
        figures.plot_cost_sweep(rows, floor_total, plot_file)
        click.echo(f"wrote {plot_file}")


@cli.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--pmax-dbw", type=float, default=5.0, show_default=True)
@click.option("--out", "out_file", type=click.Path(dir_okay=False, writable=True),
              default="-", help="CSV path, or - for standard output.")
@click.option("--plot", "plot_file", type=click.Path(dir_okay=False, writable=True),
              default=None, help="Also render the comparison as a figure file.")
@_handle_errors
def compare(scenario_file, pmax_dbw, out_file, plot_file):
    """Per-channel allocation of every method at one budget.

    Channels are sorted by descending gain; one row per channel, one
    column per method.
    """
    problem = _load_problem(scenario_file, pmax_dbw)
    order = sorted(range(problem.num_loops),
                   key=lambda k: -problem.loops[k].channel.gain)
    results = {m: allocator.solve(problem, m)
               for m in (METHOD_EXACT, METHOD_CLOSED_FORM, METHOD_WATER_FILLING)}

    header = ["channel", "gain", "h_bits", "p_min_w",
              METHOD_EXACT, METHOD_CLOSED_FORM, METHOD_WATER_FILLING]
    lines = [",".join(header)]
    channels = []
    for rank, k in enumerate(order, start=1):
        loop = problem.loops[k]
        row = {m: results[m].powers_w[k] for m in results}
        channels.append(dict(gain=loop.channel.gain, **row))
        lines.append(",".join(
            [str(rank), _fmt(loop.channel.gain), _fmt(loop.h_bits),
             _fmt(loop.p_min_w)] + [_fmt(row[m]) for m in
                                    (METHOD_EXACT, METHOD_CLOSED_FORM,
                                     METHOD_WATER_FILLING)]))

    text = "\n".join(lines) + "\n"
    if out_file == "-":
        click.echo(text, nl=False)
    else:
        Path(out_file).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_file}")
    if plot_file:
        figures.plot_allocation_comparison(channels, pmax_dbw, plot_file)
        click.echo(f"wrote {plot_file}")


@cli.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--horizon", type=int, default=100_000, show_default=True)
@click.option("--seeds", default="0", show_default=True,
              help="Comma-separated simulation seeds.")
@_handle_errors
def validate(scenario_file, horizon, seeds):
    """Check each plant's simulated cost against its predicted floor."""
    problem = model.load_scenario(scenario_file)
    try:
        seed_list = [int(s) for s in seeds.split(",")]
    except ValueError:
        raise click.BadParameter("expected comma-separated integers") from None

    click.echo(f"{'loop':>4}  {'seed':>6}  {'horizon':>9}  {'empirical':>14}  "
               f"{'floor':>14}  {'rel_error':>12}")
    for k, loop in enumerate(problem.loops):
        for seed in seed_list:
            try:
                report = loopsim.simulate_ideal(loop.plant, horizon, seed)
            except LqrPowerError as exc:
                click.echo(f"{k:>4}  {seed:>6}  {'-':>9}  failed: {exc}")
                continue
            click.echo(
                f"{k:>4}  {seed:>6}  {report.horizon:>9}  "
                f"{_fmt(report.empirical_cost):>14}  "
                f"{_fmt(report.predicted_floor):>14}  "
                f"{_fmt(report.rel_error):>12}"
            )


def main():
    cli()


if __name__ == "__main__":
    main()
