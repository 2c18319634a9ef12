"""Command-line entry points: one verb per stage plus all/serve/report."""

from __future__ import annotations

import json
import logging
import os
from importlib import resources
from pathlib import Path

import click

from .config import RUN_ROOT_ENV, load_config
from .stages import load_state, run_stage1, run_stage2, run_stage3, save_state

log = logging.getLogger(__name__)


def default_config_path() -> Path:
    return Path(str(resources.files("matnav").joinpath("fixtures/run_config.json")))


def _common_options(fn):
    fn = click.option("--seed", type=int, default=None, help="Override the generation seed.")(fn)
    fn = click.option(
        "--run-dir",
        "run_dir",
        type=click.Path(path_type=Path),
        default=None,
        help="Run directory (default: $MKNA_RUN_ROOT/<run_id> or ./runs/<run_id>).",
    )(fn)
    fn = click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        default=None,
        help="Run config JSON (default: bundled fixture config).",
    )(fn)
    return fn


def _prepare(config_path: Path | None, run_dir: Path | None, seed: int | None):
    path = config_path or default_config_path()
    cfg, base = load_config(path)
    if seed is not None:
        cfg = cfg.with_seed(seed)
    if run_dir is None:
        root = Path(os.environ.get(RUN_ROOT_ENV) or Path.cwd() / "runs")
        run_dir = root / cfg.run_id()
    run_dir.mkdir(parents=True, exist_ok=True)
    config_copy = run_dir / "config.json"
    if not config_copy.exists():
        config_copy.write_text(cfg.to_json())
    if not (run_dir / "state.json").exists():
        save_state(run_dir, load_state(run_dir, cfg))
    return cfg, base, run_dir


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for info, -vv for debug logging.")
def main(verbose: int) -> None:
    """Three-stage materials screening pipeline."""
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _echo_stage(run_dir: Path, stage: int) -> None:
    state = load_state(run_dir)
    click.echo(f"stage {stage}: {state.stages[stage]}  (run dir: {run_dir})")


@main.command()
@_common_options
def stage1(config_path, run_dir, seed):
    """Evidence: corpus -> records -> screening criterion."""
    cfg, base, run_dir = _prepare(config_path, run_dir, seed)
    criterion = run_stage1(cfg, run_dir, base)
    click.echo(
        f"criterion: {criterion.property_name} {criterion.comparator} "
        f"{criterion.threshold:g} {criterion.unit}"
    )
    _echo_stage(run_dir, 1)


@main.command()
@_common_options
def stage2(config_path, run_dir, seed):
    """Labels: database + literature -> trained predictor."""
    cfg, base, run_dir = _prepare(config_path, run_dir, seed)
    report = run_stage2(cfg, run_dir, base)
    click.echo(f"eval: rmse={report.rmse:.3f} K  r2={report.r2:.4f}  n_test={report.n_test}")
    _echo_stage(run_dir, 2)


@main.command()
@_common_options
def stage3(config_path, run_dir, seed):
    """Candidates: generate -> predict -> screen -> hull filter."""
    cfg, base, run_dir = _prepare(config_path, run_dir, seed)
    stable = run_stage3(cfg, run_dir, base)
    _echo_ranked(run_dir)
    _echo_stage(run_dir, 3)
    if not stable:
        click.echo("no candidates satisfied the criterion and stability threshold")


def _echo_ranked(run_dir: Path) -> None:
    rows = json.loads((run_dir / "stage3" / "ranked.json").read_text())
    if not rows:
        click.echo("stable candidates: none")
        return
    click.echo(f"{'formula':<16}{'theta_d_K':>12}{'e_hull_eV':>12}")
    for row in rows:
        click.echo(
            f"{row['formula']:<16}{row['predicted_theta_d']:>12.0f}{row['e_hull']:>12.3f}"
        )


@main.command(name="all")
@_common_options
def run_all(config_path, run_dir, seed):
    """Run stages 1-3 in order."""
    cfg, base, run_dir = _prepare(config_path, run_dir, seed)
    criterion = run_stage1(cfg, run_dir, base)
    click.echo(
        f"criterion: {criterion.property_name} {criterion.comparator} "
        f"{criterion.threshold:g} {criterion.unit}"
    )
    report = run_stage2(cfg, run_dir, base)
    click.echo(f"eval: rmse={report.rmse:.3f} K  r2={report.r2:.4f}  n_test={report.n_test}")
    stable = run_stage3(cfg, run_dir, base)
    _echo_ranked(run_dir)
    click.echo(f"run dir: {run_dir}")
    if not stable:
        click.echo("no candidates satisfied the criterion and stability threshold")


@main.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
)
@click.option("--host", default=None, help="Bind address (default from config).")
@click.option("--port", type=int, default=None, help="Port (default from config).")
@click.option(
    "--run-root",
    type=click.Path(path_type=Path),
    default=None,
    help="Directory holding run directories (default: $MKNA_RUN_ROOT or ./runs).",
)
def serve(config_path, host, port, run_root):
    """Serve the HTTP API (and the UI bundle when built)."""
    import uvicorn

    from .service import create_app

    path = config_path or default_config_path()
    cfg, _ = load_config(path)
    app = create_app(path, run_root=run_root)
    uvicorn.run(
        app,
        host=host or cfg.service.host,
        port=port or cfg.service.port,
        log_level="info",
    )


@main.command()
@click.option(
    "--run-dir",
    "run_dir",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    required=True,
)
def report(run_dir: Path):
    """Print a plain-text summary of a finished (or partial) run."""
    state = load_state(run_dir)
    click.echo(f"run {state.run_id}")
    for n in sorted(state.stages):
        line = f"  stage {n}: {state.stages[n]}"
        if n in state.failures:
            line += f"  [{state.failures[n]}]"
        click.echo(line)
    criterion_path = run_dir / "stage1" / "criterion.json"
    if criterion_path.exists():
        c = json.loads(criterion_path.read_text())
        click.echo(f"criterion: {c['property_name']} {c['comparator']} {c['threshold']:g} {c['unit']}")
    eval_path = run_dir / "stage2" / "eval.json"
    if eval_path.exists():
        e = json.loads(eval_path.read_text())
        click.echo(f"eval: rmse={e['rmse']:.3f} K  r2={e['r2']:.4f}  n_test={e['n_test']}")
    ranked_path = run_dir / "stage3" / "ranked.json"
    if ranked_path.exists():
        _echo_ranked(run_dir)
    for key in sorted(state.counts):
        click.echo(f"  {key} = {state.counts[key]}")


if __name__ == "__main__":
    main()
