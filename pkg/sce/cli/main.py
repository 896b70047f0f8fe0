import functools
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Tuple

import click
import numpy as np
from pydantic import ValidationError

from sce.core.engine.association import AssociationEstimator
from sce.core.engine.fitter import GeneratorFitter
from sce.core.engine.regions import RegionEstimator
from sce.core.engine.sampler import PairSampler
from sce.core.enums import ExportType, ProbabilitySource
from sce.core.exceptions import BisectionError, SceError, SolverConvergenceError
from sce.core.exporters.exporter_registry import ExporterRegistry
from sce.core.io.readers import DataReader
from sce.core.logging_config import setup_logging
from sce.core.models import AssociationReport, BasisSet, ExperimentConfig, FitConfig, GeneratorSpec, RegionConfig, SampleConfig
from sce.core.runner.experiment_runner import ExperimentRunner
from sce.core.runner.workflow_runner import WorkflowRunner
from sce.datasets.synthetic import life_expectancy_standin
from sce.helpers.helper_library import HelperLibrary

EXIT_INPUT_ERROR = 2
EXIT_SOLVER_ERROR = 3

helpers = HelperLibrary.global_instance()


# region Parameter types
class RealType(click.ParamType):
    """Real number; 'inf' selects the limit generator."""
    name = "real"

    def convert(self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]) -> float:
        try:
            return helpers.number.parse_real(value)
        except ValueError:
            self.fail(f"'{value}' is not a real number", param, ctx)


class RealListType(click.ParamType):
    """Comma-separated reals, e.g. '0.25,0.5,0.75'."""
    name = "list"

    def convert(self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]) -> Tuple[float, ...]:
        if isinstance(value, tuple):
            return value
        try:
            return tuple(helpers.number.parse_real(item) for item in str(value).split(",") if item.strip())
        except ValueError:
            self.fail(f"'{value}' is not a comma-separated list of reals", param, ctx)


REAL = RealType()
REAL_LIST = RealListType()
# endregion


def handle_errors(command: Callable) -> Callable:
    """Maps failures to exit codes: 2 for bad input or domain errors, 3 for numerical non-convergence."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except (SolverConvergenceError, BisectionError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_SOLVER_ERROR)
        except click.UsageError as e:
            click.echo(f"error: {e.format_message()}", err=True)
            sys.exit(EXIT_INPUT_ERROR)
        except ValidationError as e:
            details = "; ".join(error["msg"] for error in e.errors())
            click.echo(f"error: invalid arguments: {details}", err=True)
            sys.exit(EXIT_INPUT_ERROR)
        except (SceError, ValueError, OSError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INPUT_ERROR)

    return wrapper


def emit(key: str, value: Any) -> None:
    if isinstance(value, (float, np.floating)):
        value = helpers.number.exact(value)
    click.echo(f"{key}={value}")


def load_generator(k: Optional[float], coeffs: Optional[str]) -> GeneratorSpec:
    if (k is None) == (coeffs is None):
        raise click.UsageError("give exactly one of --k or --coeffs")
    if coeffs is not None:
        return DataReader().read_coefficients(coeffs)[0]
    return GeneratorSpec.analytic(k)


@click.group()
@click.option("--log-level", default=None, help="Log level (overridden by SCE_LOG_LEVEL).")
def app(log_level: Optional[str]) -> None:
    """Semiparametric copula estimator: simulate, fit, measure association and estimate regions."""
    if log_level:
        setup_logging(level=log_level, force=True)


@app.command()
@click.option("--k", "k", type=REAL, required=True, help="Exponent of the analytic generator (k >= 1, finite).")
@click.option("--n", "n", type=int, required=True, help="Number of pairs.")
@click.option("--seed", type=int, default=0, show_default=True, help="64-bit unsigned seed.")
@click.option("--out", "out", default="sample.csv", show_default=True, help="Output CSV.")
@handle_errors
def simulate(k: float, n: int, seed: int, out: str) -> None:
    """Draw n pairs from C_k and write them as CSV `u,v`."""
    generator = GeneratorSpec.analytic(k)
    u, v = PairSampler().sample_pairs(generator, SampleConfig(n=n, seed=seed))
    ExporterRegistry().get(ExportType.SAMPLE_CSV).export((u, v), out)


@app.command()
@click.option("--in", "in_path", required=True, help="CSV with the observations in its first two columns.")
@click.option("--smax", "s_max", type=int, default=4, show_default=True, help="Basis truncation scale.")
@click.option("--ridge", type=float, default=1e-10, show_default=True, help="Tikhonov weight.")
@click.option("--out", "out", default="coefficients.txt", show_default=True, help="Coefficient file.")
@handle_errors
def fit(in_path: str, s_max: int, ridge: float, out: str) -> None:
    """Fit ψ̂ by constrained least squares and write the coefficient file."""
    x, y = DataReader().read_pairs(in_path)
    cfg = FitConfig(s_max=s_max, ridge=ridge)
    generator, result = GeneratorFitter().fit_generator(x, y, BasisSet(s_max=s_max), cfg)
    ExporterRegistry().get(ExportType.COEFFICIENTS).export((generator, result.n), out)
    emit("n", result.n)
    emit("m", result.m)
    emit("nnz", result.nnz)
    emit("objective", result.objective)
    emit("kkt_residual", result.kkt_residual)
    emit("max_violation", result.max_violation)
    emit("active_constraints", result.active_count)
    emit("feasible", str(result.is_feasible(cfg.tol_feas)).lower())


@app.command()
@click.option("--in", "in_path", required=True, help="CSV with the observations in its first two columns.")
@click.option("--coeffs", default=None, help="Coefficient file of a fitted generator.")
@handle_errors
def rho(in_path: str, coeffs: Optional[str]) -> None:
    """Print Spearman's rho (and with --coeffs the full association report) as key=value lines."""
    reader = DataReader()
    x, y = reader.read_pairs(in_path)
    ps = GeneratorFitter().rank_transform(x, y)
    estimator = AssociationEstimator()
    rho_np = estimator.rho_np(ps)
    if coeffs is None:
        emit("rho_np", rho_np)
        return
    generator, _ = reader.read_coefficients(coeffs)
    report = AssociationReport.from_rhos(rho_sp=estimator.rho_from_coefficients(generator.coefficients, generator.basis), rho_np=rho_np)
    for key, value in report.as_lines():
        emit(key, value)


@app.command()
@click.option("--method", type=click.Choice([s.value for s in ProbabilitySource]), required=True, help="Cell probability source.")
@click.option("--k", "k", type=REAL, default=None, help="Generator exponent (method=true).")
@click.option("--coeffs", default=None, help="Coefficient file (method=sp).")
@click.option("--in", "in_path", default=None, help="Data CSV (method=np).")
@click.option("--alpha", "alphas", type=REAL_LIST, default="0.25,0.5,0.75", show_default=True, help="Comma-separated levels.")
@click.option("--grid", "n_grid", type=int, default=None, help="Grid size N (default 30 for sp/true, 8 for np).")
@click.option("--out", "out", default="regions", show_default=True, help="Output prefix.")
@handle_errors
def regions(method: str, k: Optional[float], coeffs: Optional[str], in_path: Optional[str], alphas: Tuple[float, ...], n_grid: Optional[int], out: str) -> None:
    """Greedy minimum-area regions: one mask CSV per level and one PGM image."""
    source = helpers.enum.parse(ProbabilitySource, method)
    cfg = RegionConfig(alphas=alphas, n_grid=n_grid)
    estimator = RegionEstimator()
    n_grid = cfg.grid_for(source)

    if source is ProbabilitySource.TRUE:
        if k is None or coeffs is not None or in_path is not None:
            raise click.UsageError("--method true needs --k only")
        cells = estimator.cell_probs_true(GeneratorSpec.analytic(k), n_grid)
    elif source is ProbabilitySource.SP:
        if coeffs is None or k is not None or in_path is not None:
            raise click.UsageError("--method sp needs --coeffs only")
        cells = estimator.cell_probs_sp(DataReader().read_coefficients(coeffs)[0], n_grid)
    else:
        if in_path is None or k is not None or coeffs is not None:
            raise click.UsageError("--method np needs --in only")
        x, y = DataReader().read_pairs(in_path)
        cells = estimator.cell_probs_np(GeneratorFitter().rank_transform(x, y), n_grid)

    masks = estimator.nested_masks(cells, cfg.alphas, cfg.mass_tol)
    registry = ExporterRegistry()
    prefix = Path(out)
    for alpha, mask in masks.items():
        registry.get(ExportType.MASK_CSV).export(mask, str(helpers.filesystem.with_suffix_name(prefix, f"_a{alpha:g}.csv")))
        click.echo(f"alpha={alpha:g} cells={mask.selected_count} area={helpers.number.exact(mask.area)} "
                   f"mass={helpers.number.exact(mask.achieved_mass)}")
    registry.get(ExportType.MASK_PGM).export(masks, str(helpers.filesystem.with_suffix_name(prefix, ".pgm")))


@app.command()
@click.option("--k", "ks", type=REAL_LIST, default="1,2,4,6,8", show_default=True, help="Comma-separated finite exponents.")
@click.option("--n", "n", type=int, default=100, show_default=True, help="Sample size per repetition.")
@click.option("--reps", type=int, default=100, show_default=True, help="Repetitions per exponent.")
@click.option("--seed", type=int, default=1, show_default=True, help="Base seed; repetition r uses seed + r.")
@click.option("--smax", "s_max", type=int, default=4, show_default=True, help="Basis truncation scale.")
@click.option("--quad", "quad_points", type=int, default=2001, show_default=True, help="Simpson points (odd).")
@click.option("--workers", type=int, default=1, show_default=True, help="Process-pool size.")
@click.option("--out", "out", default="table1.csv", show_default=True, help="CSV report.")
@handle_errors
def table1(ks: Tuple[float, ...], n: int, reps: int, seed: int, s_max: int, quad_points: int, workers: int, out: str) -> None:
    """Monte-Carlo study of ε, ρ̂_SP and ρ̂_NP over the analytic family."""
    cfg = ExperimentConfig(ks=ks, n=n, reps=reps, seed=seed, s_max=s_max, quad_points=quad_points, workers=workers)
    runner = ExperimentRunner()
    report = runner.run(cfg)
    click.echo(runner.format_table(report))
    ExporterRegistry().get(ExportType.REPORT_CSV).export(report, out)


@app.command()
@click.option("--in", "in_path", default=None, help="Data CSV; the built-in life expectancy stand-in when omitted.")
@click.option("--smax", "s_max", type=int, default=4, show_default=True, help="Basis truncation scale.")
@click.option("--alpha", "alphas", type=REAL_LIST, default="0.25,0.5,0.75", show_default=True, help="Comma-separated levels.")
@click.option("--out", "out", default="workflow", show_default=True, help="Output prefix.")
@handle_errors
def workflow(in_path: Optional[str], s_max: int, alphas: Tuple[float, ...], out: str) -> None:
    """Rank transform, fit, association report and sp/np regions in one run."""
    if in_path is None:
        frame = life_expectancy_standin()
        x, y = frame.iloc[:, 0].to_numpy(), frame.iloc[:, 1].to_numpy()
    else:
        x, y = DataReader().read_pairs(in_path)
    runner = WorkflowRunner()
    report = runner.run(x, y, FitConfig(s_max=s_max), RegionConfig(alphas=alphas))
    runner.export(report, out)
    emit("n", report.n)
    emit("nnz", report.fit.nnz)
    for key, value in report.association.as_lines():
        emit(key, value)
    for source, masks in report.regions.items():
        for alpha, mask in masks.items():
            emit(f"{source.value}_area_{alpha:g}", mask.area)
    if report.pqd_warning:
        click.echo("warning: rho_np < 0; the model assumes positive quadrant dependence", err=True)


@app.command()
@click.option("--n", "n", type=int, default=225, show_default=True, help="Number of rows.")
@click.option("--seed", type=int, default=2006, show_default=True, help="Seed of the underlying copula sample.")
@click.option("--out", "out", default="life_expectancy_standin.csv", show_default=True, help="Output CSV.")
@handle_errors
def dataset(n: int, seed: int, out: str) -> None:
    """Write the synthetic life expectancy stand-in table."""
    frame = life_expectancy_standin(n=n, seed=seed)
    path = helpers.filesystem.prepare_output(out)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    click.echo(f"rows={frame.shape[0]} path={path.resolve()}")


@app.command()
@click.option("--k", "k", type=REAL, default=None, help="Exponent of the analytic generator (inf allowed).")
@click.option("--coeffs", default=None, help="Coefficient file of a fitted generator.")
@click.option("--points", type=int, default=101, show_default=True, help="Equispaced evaluation points on [0, 1].")
@click.option("--out", "out", default="psi.csv", show_default=True, help="Output CSV.")
@handle_errors
def psi(k: Optional[float], coeffs: Optional[str], points: int, out: str) -> None:
    """Dump ψ on an equispaced grid."""
    if points < 2:
        raise click.UsageError("--points must be at least 2")
    generator = load_generator(k, coeffs)
    x = np.linspace(0.0, 1.0, points)
    values = GeneratorFitter().model.psi_eval(generator, x)
    ExporterRegistry().get(ExportType.PSI_CSV).export((x, values), out)


if __name__ == "__main__":
    app()
