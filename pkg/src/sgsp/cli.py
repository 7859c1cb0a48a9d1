"""Command line: ``sgsp run <config>`` plus one subcommand per probe family."""

from __future__ import annotations

import sys

import click

from .scenario import (
    EXIT_CONFIG,
    ConfigError,
    ProbeConfig,
    Scenario,
    bundled_scenarios,
    load_scenario,
    run_scenario,
)


@click.group()
@click.option("--out", type=click.Path(file_okay=False),
              help="Output root (default: $SGSP_OUT or ./sgsp_out).")
@click.option("--seed", type=int, help="Seed override for every randomized probe.")
@click.option("--tol", type=float, help="Ball-membership tolerance override.")
@click.pass_context
def cli(ctx, out, seed, tol):
    """Specification-property laboratory for C0-semigroups."""
    ctx.obj = {"out": out, "seed": seed, "tol": tol}


def _execute(ctx, scenario: Scenario):
    opts = ctx.obj
    try:
        code = run_scenario(scenario, opts["out"], opts["seed"], opts["tol"], echo=click.echo)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        code = EXIT_CONFIG
    ctx.exit(code)


def _single(name, engine, kind, params, seed=None):
    params = {k: str(v) for k, v in params.items() if v is not None}
    return Scenario(name, engine, [ProbeConfig(name, kind, params, seed)])


@cli.command()
@click.argument("config")
@click.pass_context
def run(ctx, config):
    """Run a scenario file, or a bundled scenario by name."""
    bundled = bundled_scenarios()
    path = bundled.get(config, config)
    try:
        scenario = load_scenario(path)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        ctx.exit(EXIT_CONFIG)
    _execute(ctx, scenario)


@cli.command("list")
def list_scenarios():
    """List bundled scenarios."""
    for name in bundled_scenarios():
        click.echo(name)


def _weight_options(f):
    f = click.option("--weight", default="expdecay", show_default=True,
                     help="expdecay | constant | rationaldecay")(f)
    f = click.option("--rate", type=float, help="ExpDecay rate.")(f)
    f = click.option("--level", type=float, help="Constant level.")(f)
    f = click.option("--q", type=float, help="RationalDecay exponent.")(f)
    return f


def _translation_engine(weight, rate, level, q):
    eng = {"kind": "translation", "weight": weight}
    eng.update({k: str(v) for k, v in (("rate", rate), ("level", level), ("q", q))
                if v is not None})
    return eng


@cli.command()
@_weight_options
@click.option("--count", type=int, default=20, show_default=True)
@click.option("--probe-seed", type=int, default=0, show_default=True)
@click.pass_context
def shadow(ctx, weight, rate, level, q, count, probe_seed):
    """Construct and verify a seeded suite of shadowing certificates."""
    sc = _single("shadow", _translation_engine(weight, rate, level, q), "shadow",
                 {"count": count}, probe_seed)
    _execute(ctx, sc)


@cli.command()
@_weight_options
@click.option("--radius-u", type=float, default=0.5, show_default=True)
@click.option("--radius-w", type=float, default=0.5, show_default=True)
@click.option("--t-max", type=float, default=50.0, show_default=True)
@click.option("--t-step", type=float, default=0.1, show_default=True)
@click.pass_context
def mixing(ctx, weight, rate, level, q, radius_u, radius_w, t_max, t_step):
    """Scan mixing return sets around a tent."""
    sc = _single("mixing", _translation_engine(weight, rate, level, q), "mixing",
                 {"radius_u": radius_u, "radius_w": radius_w, "t_max": t_max, "t_step": t_step})
    _execute(ctx, sc)


@cli.command()
@click.option("--set", "set_", default="dyadic", show_default=True,
              help="dyadic | full | empty | intervals")
@click.option("--intervals", help="a:b,c:d for --set intervals")
@click.option("--horizon", type=float, default=4.0 ** 10, show_default=True)
@click.option("--step", type=float, default=1.0, show_default=True)
@click.pass_context
def densities(ctx, set_, intervals, horizon, step):
    """Upper/lower density of a time set."""
    sc = _single("densities", {"kind": "translation"}, "densities",
                 {"set": set_, "intervals": intervals, "horizon": horizon, "step": step})
    _execute(ctx, sc)


@cli.command()
@_weight_options
@click.option("--suite-size", type=int, default=10, show_default=True)
@click.option("--probe-seed", type=int, default=0, show_default=True)
@click.pass_context
def equivalences(ctx, weight, rate, level, q, suite_size, probe_seed):
    """Probe the integral dichotomy for a translation semigroup."""
    sc = _single("equivalences", _translation_engine(weight, rate, level, q), "equivalences",
                 {"suite_size": suite_size}, probe_seed)
    _execute(ctx, sc)


@cli.command()
@click.option("--engine", "engine_kind", default="hhte", show_default=True,
              type=click.Choice(["translation", "hhte", "wave", "blackscholes"]))
@click.option("--t-min", type=float, default=-1.0, show_default=True)
@click.option("--t-max", type=float, default=1.0, show_default=True)
@click.option("--count", type=int, default=21, show_default=True)
@click.pass_context
def eigenfield(ctx, engine_kind, t_min, t_max, count):
    """Eigenvector-field residuals and span surrogate (default engine parameters)."""
    sc = _single("eigenfield", {"kind": engine_kind}, "eigenfield",
                 {"t_min": t_min, "t_max": t_max, "count": count})
    _execute(ctx, sc)


@cli.command()
@click.option("--engine", "engine_kind", default="translation", show_default=True,
              type=click.Choice(["translation", "hhte", "wave", "blackscholes"]))
@click.option("--count", type=int, default=20, show_default=True)
@click.option("--probe-seed", type=int, default=0, show_default=True)
@click.pass_context
def laws(ctx, engine_kind, count, probe_seed):
    """Semigroup-law residuals on seeded states."""
    sc = _single("laws", {"kind": engine_kind}, "laws", {"count": count}, probe_seed)
    _execute(ctx, sc)


def main(argv=None):
    return cli.main(args=argv, prog_name="sgsp", standalone_mode=True)


if __name__ == "__main__":
    sys.exit(main())
