"""Cross-run comparison: aligned per-round tables, energy-to-target numbers,
and rendered figures.

A report takes the output directories of one or more runs (typically a sweep),
aligns their summaries by round, and writes comparison.csv,
energy_to_target.csv, report.txt, and PNG figures into the report directory.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .errors import ConfigError  # noqa: E402
from .records import format_float, read_summary_csv  # noqa: E402


@dataclass
class RunData:
    name: str
    rows: list  # summary.csv rows as dicts


def load_run(run_dir) -> RunData:
    path = Path(run_dir)
    summary = path / "summary.csv"
    if not summary.exists():
        raise ConfigError(f"{path}: not a run directory (missing summary.csv)")
    return RunData(name=path.name, rows=read_summary_csv(summary))


def align_runs(runs: list, warn=None):
    """Truncate all runs to the shortest horizon, warning when they differ."""
    horizon = min(len(run.rows) for run in runs)
    if any(len(run.rows) != horizon for run in runs):
        longest = max(len(run.rows) for run in runs)
        # sys.stderr resolved at call time so redirection works
        print(f"warning: runs differ in length ({horizon} vs {longest} rounds); "
              f"comparing the first {horizon}", file=warn or sys.stderr)
    return horizon


def _series(run: RunData, column: str, horizon: int):
    """Column values with gaps (off-cadence rounds) carried forward."""
    values = []
    last = None
    for row in run.rows[:horizon]:
        if row[column] is not None:
            last = row[column]
        values.append(last)
    return values


def energy_to_target(run: RunData, target: float):
    """First (round, cumulative energy) at which test accuracy reaches target."""
    for row in run.rows:
        if row["accuracy"] is not None and row["accuracy"] >= target:
            return row["t"], row["cumulative_energy"]
    return None


def comparison_rows(runs: list, horizon: int):
    header = ["t"]
    for run in runs:
        header += [f"{run.name}/accuracy", f"{run.name}/N_t", f"{run.name}/cumulative_energy"]
    columns = {run.name: (_series(run, "accuracy", horizon),
                          _series(run, "N_t", horizon),
                          _series(run, "cumulative_energy", horizon))
               for run in runs}
    rows = []
    for i in range(horizon):
        row = [str(i + 1)]
        for run in runs:
            acc, n, energy = columns[run.name]
            row += ["" if acc[i] is None else format_float(acc[i]),
                    "" if n[i] is None else str(n[i]),
                    "" if energy[i] is None else format_float(energy[i])]
        rows.append(row)
    return header, rows


def render_figures(runs: list, horizon: int, out_dir: Path, targets: list) -> list:
    """Accuracy, participation, and energy curves plus the energy-to-target bars."""
    rounds = list(range(1, horizon + 1))
    written = []

    def save(fig, name: str):
        path = out_dir / name
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for run in runs:
        ax.plot(rounds, _series(run, "accuracy", horizon), label=run.name)
    ax.set_xlabel("round")
    ax.set_ylabel("test accuracy")
    ax.grid(alpha=0.3)
    ax.legend()
    save(fig, "accuracy.png")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for run in runs:
        ax.plot(rounds, _series(run, "N_t", horizon), label=run.name)
    ax.set_xlabel("round")
    ax.set_ylabel("participating devices")
    ax.grid(alpha=0.3)
    ax.legend()
    save(fig, "participation.png")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for run in runs:
        ax.plot(rounds, _series(run, "cumulative_energy", horizon), label=run.name)
    ax.set_xlabel("round")
    ax.set_ylabel("cumulative consumed energy (J)")
    ax.grid(alpha=0.3)
    ax.legend()
    save(fig, "energy.png")

    if targets:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        width = 0.8 / len(runs)
        for j, run in enumerate(runs):
            heights = []
            for target in targets:
                hit = energy_to_target(run, target)
                heights.append(hit[1] if hit else 0.0)
            offsets = [i + j * width for i in range(len(targets))]
            ax.bar(offsets, heights, width=width, label=run.name)
        ax.set_xticks([i + 0.4 - width / 2 for i in range(len(targets))])
        ax.set_xticklabels([f"{t:g}" for t in targets])
        ax.set_xlabel("accuracy target")
        ax.set_ylabel("energy to reach target (J)")
        ax.grid(alpha=0.3, axis="y")
        ax.legend()
        save(fig, "energy_to_target.png")

    return written


def write_report(run_dirs, out_dir, targets=(0.5, 0.7, 0.9), stdout=None) -> Path:
    """Build the full report for the given run directories."""
    if not run_dirs:
        raise ConfigError("report: need at least one run directory")
    runs = [load_run(d) for d in run_dirs]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    horizon = align_runs(runs)

    header, rows = comparison_rows(runs, horizon)
    lines = [",".join(header)] + [",".join(row) for row in rows]
    (out / "comparison.csv").write_text("\n".join(lines) + "\n")

    target_lines = ["run,target,round,cumulative_energy"]
    text = ["run summary", "==========="]
    for run in runs:
        final_acc = _series(run, "accuracy", horizon)[-1]
        final_energy = _series(run, "cumulative_energy", horizon)[-1]
        text.append(f"{run.name}: final accuracy "
                    f"{'n/a' if final_acc is None else f'{final_acc:.4f}'}, "
                    f"energy {'n/a' if final_energy is None else f'{final_energy:.6g}'} J")
        for target in targets:
            hit = energy_to_target(run, target)
            if hit is None:
                target_lines.append(f"{run.name},{target:g},,")
                text.append(f"  target {target:g}: not reached")
            else:
                target_lines.append(
                    f"{run.name},{target:g},{hit[0]},{format_float(hit[1])}")
                text.append(f"  target {target:g}: round {hit[0]}, {hit[1]:.6g} J")
    (out / "energy_to_target.csv").write_text("\n".join(target_lines) + "\n")

    figures = render_figures(runs, horizon, out, list(targets))
    text.append("figures: " + ", ".join(f.name for f in figures))
    report_text = "\n".join(text) + "\n"
    (out / "report.txt").write_text(report_text)
    print(report_text, end="", file=stdout or sys.stdout)
    return out
