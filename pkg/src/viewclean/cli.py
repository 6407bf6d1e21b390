"""Command-line harness: experiments, blocking reports, impact dumps, EMD
between stored views, synthetic data generation, and the labeling server.

Exit codes: 0 success, 2 configuration error, 3 missing data.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from .datasets import builtin_spec, load_dataset, spec_from_file, synthetic_spec
from .distance import DistanceConfig, view_distance, view_impact_scores
from .engine import Strategy
from .errors import ConfigError, DataError, ViewCleanError
from .experiment import (
    ExperimentConfig,
    blocking_report,
    relation_for_view,
    run_experiment,
)
from .relation import save_ground_truth, save_relation
from .synth import generate_synthetic
from .views import parse_view_result

EXIT_CONFIG = 2
EXIT_DATA = 3


def _translate_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DataError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_DATA)
        except (ConfigError, ViewCleanError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)

    return wrapper


def _load(dataset: str, data_dir: str | None):
    if dataset.endswith((".yaml", ".yml")):
        spec = spec_from_file(dataset)
    else:
        spec = builtin_spec(dataset)
    return load_dataset(spec, data_dir)


@click.group()
def main():
    """View-driven deduplication toolkit."""


@main.command()
@click.option("--dataset", required=True,
              help="restaurants, products, synthetic, or a dataset YAML path")
@click.option("--data-dir", type=click.Path(), default=None)
@click.option("--view", "views", multiple=True, required=True)
@click.option("--strategy", "strategies", multiple=True,
              type=click.Choice([s.value for s in Strategy]),
              default=(Strategy.VIEW_IMPACT.value,), show_default=True)
@click.option("--repetitions", type=int, default=20, show_default=True)
@click.option("--budget", "budgets", multiple=True, type=int, default=(150,))
@click.option("--batch", "batches", multiple=True, type=int, default=(20,))
@click.option("--initial-batch", "initial_batches", multiple=True, type=int,
              default=(13,))
@click.option("--alpha", "alphas", multiple=True, type=float, default=(0.5,))
@click.option("--window", "windows", multiple=True, type=int, default=(3,))
@click.option("--epsilon", type=float, default=0.01, show_default=True)
@click.option("--master-seed", type=int, default=0, show_default=True)
@click.option("--holdout/--no-holdout", default=True, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--cache-dir", type=click.Path(), default=None,
              help="reuse per-pair feature vectors across invocations")
@click.option("--outdir", type=click.Path(), required=True)
@_translate_errors
def experiment(dataset, data_dir, views, strategies, repetitions, budgets, batches,
               initial_batches, alphas, windows, epsilon, master_seed, holdout,
               workers, cache_dir, outdir):
    """Run seeded cleaning experiments and write metrics/summary files."""
    loaded = _load(dataset, data_dir)
    cfg = ExperimentConfig(
        views=tuple(views),
        strategies=tuple(Strategy(s) for s in strategies),
        repetitions=repetitions,
        budgets=tuple(budgets),
        batches=tuple(batches),
        initial_batches=tuple(initial_batches),
        alphas=tuple(alphas),
        windows=tuple(windows),
        epsilon=epsilon,
        master_seed=master_seed,
        holdout=holdout,
        workers=workers,
    )
    metrics, summary = run_experiment(loaded, cfg, outdir, cache_dir=cache_dir)
    click.echo(f"metrics: {metrics}")
    click.echo(f"summary: {summary}")


@main.command("blocking-report")
@click.option("--dataset", required=True)
@click.option("--data-dir", type=click.Path(), default=None)
@click.option("--view", default=None)
@_translate_errors
def blocking_report_cmd(dataset, data_dir, view):
    """Pair counts and positive fractions at each blocking stage."""
    loaded = _load(dataset, data_dir)
    report = blocking_report(loaded, view)
    click.echo(f"dataset: {report['dataset']}")
    for stage in ("base", "view_blocked", "feature_blocked"):
        if stage not in report:
            continue
        s = report[stage]
        click.echo(
            f"{stage}: rows={s['rows']} pairs={s['pairs_unordered']} "
            f"(ordered {s['pairs_ordered']}) positives={s['positives']} "
            f"({100 * s['positive_fraction']:.2f}%)"
        )


@main.command()
@click.option("--dataset", required=True)
@click.option("--data-dir", type=click.Path(), default=None)
@click.option("--view", required=True)
@click.option("--output", type=click.Path(), default=None,
              help="write scores here instead of stdout")
@_translate_errors
def impact(dataset, data_dir, view, output):
    """Dump per-record view impact scores as two-column text."""
    loaded = _load(dataset, data_dir)
    rel = relation_for_view(loaded, view)
    scores = view_impact_scores(loaded.view(view), rel)
    lines = [f"{rid}\t{score:.10g}" for rid, score in sorted(scores.items())]
    text = "\n".join(lines) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("view_a", type=click.Path(exists=True))
@click.argument("view_b", type=click.Path(exists=True))
@_translate_errors
def emd(view_a, view_b):
    """Earth mover's distance between two stored view results."""
    va = parse_view_result(Path(view_a).read_text(encoding="utf-8"))
    vb = parse_view_result(Path(view_b).read_text(encoding="utf-8"))
    click.echo(f"{view_distance(va, vb, DistanceConfig()):.10g}")


@main.command()
@click.option("--n", type=int, default=300, show_default=True)
@click.option("--dup-rate", type=float, default=0.15, show_default=True)
@click.option("--noise", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--outdir", type=click.Path(), required=True)
@_translate_errors
def synth(n, dup_rate, noise, seed, outdir):
    """Generate a synthetic dedup benchmark (data + match file)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rel, gt = generate_synthetic(n, dup_rate, noise, seed)
    save_relation(rel, outdir / "synthetic.csv")
    save_ground_truth(gt, outdir / "synthetic_matches.csv")
    click.echo(f"wrote {outdir / 'synthetic.csv'} ({len(rel.records)} records)")
    click.echo(f"wrote {outdir / 'synthetic_matches.csv'} ({len(gt.matches)} pairs)")


@main.command()
@click.option("--host", envvar="VIEWCLEAN_HOST", default="127.0.0.1", show_default=True)
@click.option("--port", envvar="VIEWCLEAN_PORT", type=int, default=8642,
              show_default=True)
@click.option("--data-dir", envvar="VIEWCLEAN_DATA_DIR", type=click.Path(),
              default=None)
@click.option("--state-dir", envvar="VIEWCLEAN_STATE_DIR", type=click.Path(),
              default=None, help="directory for session checkpoints")
@_translate_errors
def serve(host, port, data_dir, state_dir):
    """Start the HTTP labeling-session service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir=data_dir, state_dir=state_dir),
                host=host, port=port)


if __name__ == "__main__":
    main()
