import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

try:
    import click
except ImportError:
    print("❌ Error: 'click' is required. Please install carnotmod with dependencies.")
    print("   pip install carnotmod")
    sys.exit(1)

from .errors import (
    CarnotError,
    DomainError,
    SolverError,
    StructuralError,
    UnsupportedError,
    ValidationError,
)
from .experiments import Experiment, RunOutcome, merge_config, read_config_file, run
from .report import dumps

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

ALGEBRAS = click.Choice(["hR", "hC", "hQ", "euclid"])
INTEGRANDS = click.Choice(["gauss", "annulus", "bump", "file"])


def _exit_code(error: CarnotError) -> int:
    if isinstance(error, SolverError):
        return EXIT_NUMERICAL
    if isinstance(error, ValidationError | DomainError | StructuralError | UnsupportedError):
        return EXIT_INVALID
    return EXIT_NUMERICAL


def _error_payload(experiment: Experiment, error: CarnotError) -> dict[str, Any]:
    details: Any = None
    if isinstance(error, ValidationError):
        details = error.pydantic_errors
    elif isinstance(error, SolverError):
        details = error.info
    return {
        "experiment": experiment.value,
        "error": type(error).__name__,
        "message": str(error),
        "details": details,
        "exit_code": _exit_code(error),
    }


def _print_summary(outcome: RunOutcome) -> None:
    name = outcome.config.experiment.value
    if outcome.passed is True:
        click.echo(f"✅ {name}: all checks passed")
    elif outcome.passed is False:
        click.echo(f"❌ {name}: checks failed")
    else:
        click.echo(f"📋 {name}: finished")
    if outcome.manifest is not None:
        for artifact in outcome.manifest.artifacts:
            click.echo(f"   • {artifact.kind}: {artifact.path}")


def execute(experiment: Experiment, options: dict[str, Any]) -> None:
    """Build the config from --config and flags, run it, exit with the run status.

    Without --out the report JSON goes to stdout; progress lines go to stderr.
    Errors print a one-line JSON payload to stdout.
    """
    config_path = options.pop("config_path", None)
    if "radii" in options:
        options["radii"] = list(options["radii"]) or None

    click.echo(f"🚀 Running {experiment.value}...", err=True)
    try:
        file_data = read_config_file(config_path) if config_path else None
        config = merge_config(experiment, file_data, options)
        outcome = run(config)
    except CarnotError as e:
        click.echo(f"❌ Error: {e}", err=True)
        click.echo(dumps(_error_payload(experiment, e), indent=None))
        sys.exit(_exit_code(e))

    if outcome.manifest is None:
        click.echo(dumps(outcome.payload()))
    else:
        _print_summary(outcome)
    sys.exit(outcome.exit_code)


def common_options(fn: Callable[..., Any]) -> Callable[..., Any]:
    """--config, --algebra/--space, --n, --seed, --threads and --out."""
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="JSON config file (a previous report works too); flags take precedence",
        ),
        click.option("--algebra", "--space", "algebra", type=ALGEBRAS, help="Algebra family"),
        click.option("--n", type=int, help="Family parameter (dimension for euclid)"),
        click.option("--seed", type=int, help="Seed (required for stochastic experiments)"),
        click.option("--threads", type=int, help="Worker threads (default 1)"),
        click.option(
            "--out",
            type=click.Path(dir_okay=False, path_type=Path),
            help="Report path; tables and the manifest are written next to it",
        ),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def shape_options(fn: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option("--kh", "--k", "k", type=int, help="Horizontal subspace dimension"),
        click.option("--kv", type=int, help="Vertical subspace dimension"),
        click.option(
            "--with-reflections/--without-reflections",
            default=None,
            help="Include the orientation-reversing component",
        ),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def solver_options(fn: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option("--p", type=float, help="Exponent"),
        click.option("--tolerance", type=float, help="KKT tolerance"),
        click.option("--max-iter", type=int, help="Solver iteration cap"),
        click.option("--refinements", "--resolutions", "refinements", type=int, help="Refinement levels"),
        click.option("--floor", type=float, help="Exceptional when value[-1] < floor * value[0]"),
        click.option("--planes", type=int, help="Sampled subspaces per family"),
        click.option("--ball", type=float, help="Radius of the ball the subspaces are cut with"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@click.group()
def main():
    """carnotmod experiments"""
    pass


@main.command("group-selftest")
@common_options
@click.option("--samples", type=int, help="Random triples per identity")
def group_selftest(**options: Any):
    """Check bracket tables, H-type identities and the group law"""
    execute(Experiment.GROUP_SELFTEST, options)


@main.command("haar-test")
@common_options
@click.option("--count", type=int, help="Draws per sampler")
@click.option(
    "--with-reflections/--without-reflections",
    default=None,
    help="Include the orientation-reversing component",
)
def haar_test(**options: Any):
    """Moment tests of the Haar samplers and Grassmannian closure"""
    execute(Experiment.HAAR_TEST, options)


@main.command("ahlfors-check")
@common_options
@click.option("--radii", type=float, multiple=True, help="Ball radius (repeatable)")
@click.option("--samples", type=int, help="Samples for the c0 estimate")
@click.option("--lipschitz", type=float, help="Lipschitz constant of the graph")
def ahlfors_check(**options: Any):
    """σ-measure of the vertical plane graph in shrinking balls"""
    execute(Experiment.AHLFORS_CHECK, options)


@main.command("modulus-solve")
@common_options
@solver_options
@shape_options
@click.option(
    "--problem",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="ModulusProblem JSON file",
)
@click.option("--family", type=click.Choice(["annulus", "subspace"]), help="Generated family")
@click.option("--r-inner", type=float, help="Annulus inner radius")
@click.option("--r-outer", type=float, help="Annulus outer radius")
@click.option("--radial", type=int, help="Annulus radial cells")
@click.option("--angular", type=int, help="Annulus angular cells")
@click.option("--level", type=int, help="Refinement level of a single subspace family solve")
def modulus_solve(**options: Any):
    """Solve a discrete p-modulus problem"""
    execute(Experiment.MODULUS_SOLVE, options)


@main.command("exceptional-witness")
@common_options
@click.option("--p", type=float, help="Exponent")
@click.option("--witness", type=click.Choice(["pow", "log"]), help="Radial witness kind")
@click.option("--d-m", type=float, help="Metric dimension in the witness exponent")
@click.option("--alpha", type=float, help="Logarithmic exponent (log witness)")
@click.option("--step", type=float, help="Coarsest grid step of the L^p estimate")
@click.option("--levels", type=int, help="Grid refinements of the L^p estimate")
@click.option("--rings", type=int, help="Dyadic rings of the surface check")
@click.option("--lipschitz", type=float, help="Lipschitz constant of the graph")
@click.option(
    "--expect-exceptional/--expect-not-exceptional",
    default=None,
    help="Expected combined verdict; a mismatch exits with status 1",
)
def exceptional_witness(**options: Any):
    """Integrability and surface divergence of a witness function"""
    execute(Experiment.EXCEPTIONAL_WITNESS, options)


@main.command("crofton-verify")
@common_options
@shape_options
@click.option("--integrand", type=INTEGRANDS, help="Horizontal radial profile")
@click.option("--vertical-integrand", type=INTEGRANDS, help="Vertical radial profile (k_v > 0)")
@click.option(
    "--integrand-file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Two-column (radius, value) table for the 'file' integrand",
)
@click.option("--scale", type=float, help="Gaussian scale")
@click.option("--inner", type=float, help="Annulus inner radius")
@click.option("--outer", type=float, help="Annulus outer radius")
@click.option("--radius", type=float, help="Bump radius")
@click.option("--samples", type=int, help="Monte Carlo samples")
@click.option("--batches", type=int, help="Batches for the standard error")
def crofton_verify(**options: Any):
    """Monte Carlo verification of a Crofton-type formula"""
    execute(Experiment.CROFTON_VERIFY, options)


@main.command("corollary-trend")
@common_options
@solver_options
@shape_options
def corollary_trend(**options: Any):
    """Modulus trend of {V ∩ B(0, R)} against the Hölder bound"""
    execute(Experiment.COROLLARY_TREND, options)


if __name__ == "__main__":
    main()
