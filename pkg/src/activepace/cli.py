"""Command-line entry points: run, bench, verify-oracles."""
from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click
import numpy as np

from .core import EngineConfig
from .engine import STRATEGIES
from .experiments import ExperimentSpec, NoiseSpec, SyntheticSpec, run_experiment, run_single
from .report import write_config_echo, write_curves, write_ledger

CONFIG_FIELDS = {f.name for f in dataclasses.fields(EngineConfig)}
SYNTH_FIELDS = {f.name for f in dataclasses.fields(SyntheticSpec)}
NOISE_FIELDS = {f.name for f in dataclasses.fields(NoiseSpec)}
SPEC_FIELDS = {"split_fraction", "n0", "strategy", "repeats", "dataset"}


def parse_config_file(path: str) -> dict:
    """Flat key=value file; keys map onto config/spec fields by name."""
    pairs: dict[str, str] = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{ln}: expected key=value")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def _coerce(value: str, kind):
    if kind is bool or str(kind) == "bool":
        return value.lower() in ("1", "true", "yes", "on")
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def build_spec(pairs: dict) -> ExperimentSpec:
    config_kw, synth_kw, noise_kw, spec_kw = {}, {}, {}, {}
    for key, raw in pairs.items():
        value = _coerce(raw, None)
        if key in CONFIG_FIELDS:
            config_kw[key] = value
        elif key.startswith("synthetic_") and key[10:] in SYNTH_FIELDS:
            synth_kw[key[10:]] = value
        elif key in NOISE_FIELDS:
            if key == "verification":
                value = _coerce(raw, bool)
            noise_kw[key] = value
        elif key in SPEC_FIELDS:
            spec_kw[key] = value
        else:
            raise click.ClickException(f"unknown config key {key!r}")
    return ExperimentSpec(
        config=EngineConfig(**config_kw),
        synthetic=SyntheticSpec(**synth_kw),
        noise=NoiseSpec(**noise_kw),
        **spec_kw,
    )


@click.group()
def main() -> None:
    """Incremental identification engine with self-paced and active labeling."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--synthetic", is_flag=True, help="use the built-in Gaussian benchmark")
@click.option("--dataset", type=click.Path(exists=True), default=None)
@click.option("--strategy", type=click.Choice(STRATEGIES), default=None)
@click.option("--serve", "bind", default=None, help="serve the human annotation API on ADDR:PORT")
@click.option("--seed", type=int, default=None)
@click.option("--out", "outdir", type=click.Path(), default="runs/latest")
def run(config_path, synthetic, dataset, strategy, bind, seed, outdir):
    """Execute one run (simulated oracle unless --serve is given)."""
    pairs = parse_config_file(config_path) if config_path else {}
    if dataset:
        pairs["dataset"] = dataset
    if strategy:
        pairs["strategy"] = strategy
    if seed is not None:
        pairs["seed"] = str(seed)
    spec = build_spec(pairs)
    run_seed = spec.config.seed
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_config_echo({**pairs, "strategy": spec.strategy, "seed": run_seed},
                      outdir / "config_echo.txt")
    if bind:
        from .experiments import build_engine
        from .service import serve_annotation_api

        engine = build_engine(spec, run_seed)
        serve_annotation_api(engine, bind)
        return
    ledger = run_single(spec, run_seed)
    write_ledger(ledger, outdir / "ledger.jsonl")
    single = dataclasses.replace(spec, repeats=1)
    result = run_experiment(single, [spec.strategy], base_seed=run_seed)
    paths = write_curves(result, outdir)
    click.echo(f"wrote {outdir / 'ledger.jsonl'} and {len(paths)} curve/figure files")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seeds", type=int, default=5)
@click.option("--out", "outdir", type=click.Path(), default="runs/bench")
def bench(config_path, seeds, outdir):
    """Run the full strategy matrix on the default benchmark."""
    pairs = parse_config_file(config_path) if config_path else {}
    spec = build_spec(pairs)
    spec = dataclasses.replace(spec, repeats=seeds)
    result = run_experiment(spec, ["ASPL", "RANDOM", "UNCERTAINTY", "ASPL_no_SPL",
                                   "ASPL_no_AL", "ALL"])
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_config_echo(pairs, outdir / "config_echo.txt")
    for strategy, per_seed in result.ledgers.items():
        for s, ledger in per_seed.items():
            write_ledger(ledger, outdir / f"ledger_{strategy}_seed{s}.jsonl")
    paths = write_curves(result, outdir)
    click.echo(f"bench complete; {len(paths)} summary files in {outdir}")


@main.command("verify-oracles")
@click.option("--cases", type=int, default=1000)
def verify_oracles(cases):
    """Run the brute-force / grid-search oracle suites and report agreement."""
    from .pseudolabel import solve_label_assignment
    from .selfpaced import spl_weight

    rng = np.random.default_rng(7)
    worst_label = 0.0
    for _ in range(cases):
        m = int(rng.integers(1, 7))
        s = rng.uniform(-2, 2, size=m)
        v = rng.uniform(0, 1, size=m)
        _, obj = solve_label_assignment(s, v)
        best = min(_brute_objective(s, v, j) for j in range(-1, m))
        worst_label = max(worst_label, abs(obj - best))
    worst_weight = 0.0
    grid = np.arange(0.0, 1.0 + 1e-4, 1e-4)
    for _ in range(cases):
        loss = float(rng.uniform(0, 2))
        C = float(rng.uniform(0.1, 3))
        lam = float(rng.uniform(0.05, 2))
        closed = spl_weight(loss, C, lam)
        scalar = C * grid * loss + lam * (0.5 * grid**2 - grid)
        worst_weight = max(worst_weight, abs(closed - grid[int(np.argmin(scalar))]))
    click.echo(f"label-assignment oracle: max objective gap {worst_label:.2e} over {cases} cases")
    click.echo(f"weight closed form: max argmin gap {worst_weight:.2e} over {cases} cases")
    if worst_label > 1e-12 or worst_weight > 1e-3:
        sys.exit(1)


def _brute_objective(s: np.ndarray, v: np.ndarray, positive: int) -> float:
    y = -np.ones_like(s)
    if positive >= 0:
        y[positive] = 1.0
    return float(np.sum(v * np.maximum(0.0, 1.0 - y * s)))


if __name__ == "__main__":
    main()
