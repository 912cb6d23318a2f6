"""Run artifacts: ledger records, summary curve tables, and figures."""
from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .engine import RunLedger
from .experiments import ExperimentResult


def write_ledger(ledger: RunLedger, path: str | Path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        for record in ledger.records:
            fh.write(json.dumps(record.as_dict(), sort_keys=True) + "\n")


def write_config_echo(pairs: dict, path: str | Path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        for key in sorted(pairs):
            fh.write(f"{key}={pairs[key]}\n")


def write_curves(result: ExperimentResult, outdir: str | Path) -> list[Path]:
    """Emit one CSV per strategy plus comparison figures; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for strategy, curve in result.curves.items():
        path = outdir / f"curve_{strategy}.csv"
        cols = ["iteration", "annotation_fraction", "accuracy", "annotation_demand"]
        with path.open("w") as fh:
            fh.write(",".join(cols) + "\n")
            for k in range(len(curve["iteration"])):
                fh.write(",".join(repr(curve[c][k]) for c in cols) + "\n")
        written.append(path)
    written.extend(render_figures(result, outdir))
    return written


def render_figures(result: ExperimentResult, outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    paths: list[Path] = []

    fig, ax = plt.subplots(figsize=(6, 4))
    for strategy, curve in result.curves.items():
        if strategy == "ALL":
            ax.axhline(curve["accuracy"][-1], ls="--", color="gray",
                       label="ALL (ceiling)")
            continue
        ax.plot(curve["annotation_fraction"], curve["accuracy"], marker=".",
                label=strategy)
    ax.set_xlabel("annotation fraction of training pool")
    ax.set_ylabel("rank-1 accuracy")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = outdir / "accuracy_vs_annotation.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    for strategy, curve in result.curves.items():
        if strategy == "ALL":
            continue
        ax.plot(curve["iteration"], curve["annotation_demand"], marker=".",
                label=strategy)
    ax.set_xlabel("iteration")
    ax.set_ylabel("annotations requested")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = outdir / "annotation_demand.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)
    return paths
