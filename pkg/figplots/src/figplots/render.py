"""Chart rendering from goodarms summary.csv files.

This package draws what the harness already computed and nothing more: bar
heights, error bars and line points come straight out of the CSV columns.
No statistic is recomputed here.

Output is deterministic: fixed figure geometry, a fixed SVG hash salt and
no embedded dates, so re-rendering identical input yields identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

# The harness summary contract, column order included.
SUMMARY_COLUMNS = (
    "algorithm", "n", "m", "k", "rho", "epsilon", "delta", "scheme",
    "h_star_mode", "runs", "mean_samples", "stderr_samples", "mistake_rate",
    "frac_b1", "frac_b2", "frac_b3",
)

FIGURES = ("fig1", "fig2", "fig3")

GROUP_COLORS = {"frac_b1": "#2b6cb0", "frac_b2": "#ecc94b", "frac_b3": "#a0aec0"}

_RC = {
    "figure.figsize": (6.4, 3.6),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "svg.hashsalt": "figplots",
}


class SchemaError(ValueError):
    """summary.csv does not match the harness contract."""


class EmptySummaryError(ValueError):
    """summary.csv has a header but no data rows."""


def load_summary(path) -> list[dict]:
    """Read and validate a summary.csv; returns its rows as dicts."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file: expected a summary.csv header") from None
        if tuple(header) != SUMMARY_COLUMNS:
            missing = [c for c in SUMMARY_COLUMNS if c not in header]
            unexpected = [c for c in header if c not in SUMMARY_COLUMNS]
            parts = []
            if missing:
                parts.append(f"missing columns: {missing}")
            if unexpected:
                parts.append(f"unexpected columns: {unexpected}")
            if not parts:
                parts.append(f"column order differs: got {header}")
            raise SchemaError("summary.csv schema mismatch: " + "; ".join(parts))
        rows = [dict(zip(SUMMARY_COLUMNS, row)) for row in reader]
    if not rows:
        raise EmptySummaryError("summary.csv has no data rows")
    return rows


def _series(rows: list[dict]) -> list[str]:
    return sorted({r["algorithm"] for r in rows})


def _save(fig, out_path: Path) -> tuple[Path, Path]:
    svg_path = out_path.with_suffix(".svg")
    png_path = out_path.with_suffix(".png")
    fig.savefig(svg_path, metadata={"Date": None})
    fig.savefig(png_path)
    plt.close(fig)
    return svg_path, png_path


def _render_fig1(rows: list[dict]):
    """Grouped bars: mean samples with stderr error bars per (n, algorithm)."""
    sizes = sorted({int(r["n"]) for r in rows})
    algos = _series(rows)
    by_key = {(r["algorithm"], int(r["n"])): r for r in rows}
    fig, ax = plt.subplots()
    width = 0.8 / len(algos)
    for i, algo in enumerate(algos):
        xs, means, errs = [], [], []
        for j, n in enumerate(sizes):
            row = by_key.get((algo, n))
            if row is None:
                continue
            xs.append(j + (i - (len(algos) - 1) / 2) * width)
            means.append(float(row["mean_samples"]))
            errs.append(float(row["stderr_samples"]))
        container = ax.bar(xs, means, width=width, yerr=errs, capsize=3,
                           label=algo)
        for patch in container.patches:
            patch.set_gid(f"series-{algo}-bar")
        if container.errorbar is not None:
            for collection in container.errorbar.lines[2]:
                collection.set_gid(f"series-{algo}-errorbars")
    ax.set_xticks(range(len(sizes)), [str(n) for n in sizes])
    ax.set_xlabel("number of arms n")
    ax.set_ylabel("samples (mean over runs)")
    ax.legend()
    fig.tight_layout()
    return fig


def _render_fig2(rows: list[dict]):
    """Per-(m, algorithm) bars stacked by pull share of the three groups."""
    ms = sorted({int(r["m"]) for r in rows})
    algos = _series(rows)
    by_key = {(r["algorithm"], int(r["m"])): r for r in rows}
    fig, ax = plt.subplots()
    width = 0.8 / len(algos)
    for i, algo in enumerate(algos):
        xs = [j + (i - (len(algos) - 1) / 2) * width for j in range(len(ms))]
        bottom = [0.0] * len(ms)
        for col in ("frac_b1", "frac_b2", "frac_b3"):
            heights = [float(by_key[(algo, m)][col]) for m in ms]
            container = ax.bar(xs, heights, width=width, bottom=bottom,
                               color=GROUP_COLORS[col],
                               label=col if i == 0 else None)
            for patch in container.patches:
                patch.set_gid(f"series-{algo}-{col}")
            bottom = [b + h for b, h in zip(bottom, heights)]
    ax.set_xticks(range(len(ms)), [f"m={m}\n" + " / ".join(algos) for m in ms])
    ax.set_ylabel("fraction of pulls")
    ax.legend()
    fig.tight_layout()
    return fig


def _render_fig3(rows: list[dict]):
    """Mean samples against k, with stderr error bars."""
    pts = sorted((int(r["k"]), float(r["mean_samples"]),
                  float(r["stderr_samples"])) for r in rows)
    fig, ax = plt.subplots()
    container = ax.errorbar([p[0] for p in pts], [p[1] for p in pts],
                            yerr=[p[2] for p in pts], marker="o", capsize=3)
    container.lines[0].set_gid("series-lucb_km-line")
    for collection in container.lines[2]:
        collection.set_gid("series-lucb_km-errorbars")
    ax.set_xlabel("k")
    ax.set_ylabel("samples (mean over runs)")
    fig.tight_layout()
    return fig


def render(figure: str, summary_path, out_path) -> tuple[Path, Path]:
    """Render one figure from a summary.csv; writes SVG and PNG.

    Args:
        figure: one of fig1 | fig2 | fig3.
        summary_path: harness summary.csv (validated against the contract).
        out_path: target path; the suffix is replaced by .svg and .png.

    Returns:
        (svg_path, png_path).
    """
    if figure not in FIGURES:
        raise SchemaError(f"unknown figure {figure!r}; use one of {FIGURES}")
    rows = load_summary(summary_path)
    with plt.rc_context(_RC):
        if figure == "fig1":
            fig = _render_fig1(rows)
        elif figure == "fig2":
            fig = _render_fig2(rows)
        else:
            fig = _render_fig3(rows)
        return _save(fig, Path(out_path))
