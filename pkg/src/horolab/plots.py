"""Optional figure rendering for run outputs.

Each renderer reads the CSV files a run wrote and saves PNG figures next to
them; the CSV remains the primary artifact and nothing here feeds back into
the numbers.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "render_equidist",
    "render_totient",
    "render_vonneumann",
    "render_duality",
]


def _read(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def render_equidist(out_dir: Path) -> list[Path]:
    """ECDF comparison per (y, alpha, observable), plus KS vs N(y)."""
    out_dir = Path(out_dir)
    made = []
    rows = _read(out_dir / "values.csv")
    cells = defaultdict(lambda: defaultdict(list))
    for r in rows:
        key = (r["y"], r["alpha"], r["observable"])
        cells[key][r["ensemble"]].append(float(r["value"]))
    for idx, ((y, alpha, obs), by_kind) in enumerate(sorted(cells.items())):
        fig, ax = plt.subplots(figsize=(6, 4))
        for kind, vals in sorted(by_kind.items()):
            xs = np.sort(vals)
            ax.step(xs, np.arange(1, len(xs) + 1) / len(xs), where="post",
                    label=f"{kind} (n={len(xs)})")
        ax.set_xlabel(obs)
        ax.set_ylabel("ECDF")
        ax.set_title(f"y = {y}, alpha = {alpha}")
        ax.legend()
        path = out_dir / f"ecdf_{idx:02d}.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        made.append(path)

    ks_path = out_dir / "ks.csv"
    if ks_path.exists():
        ks_rows = _read(ks_path)
        if ks_rows:
            fig, ax = plt.subplots(figsize=(6, 4))
            series = defaultdict(list)
            for r in ks_rows:
                series[(r["ensemble"], r["observable"])].append(
                    (int(r["N_y"]), float(r["ks_vs_horosphere"]))
                )
            for (kind, obs), pts in sorted(series.items()):
                pts.sort()
                ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-",
                        label=f"{kind} / {obs}")
            ax.set_xscale("log")
            ax.set_xlabel("N(y)")
            ax.set_ylabel("KS distance to horosphere")
            ax.legend()
            path = out_dir / "ks_vs_norm.png"
            fig.savefig(path, dpi=120, bbox_inches="tight")
            plt.close(fig)
            made.append(path)

    dk_path = out_dir / "discrepancy.csv"
    if dk_path.exists():
        dk_rows = _read(dk_path)
        if dk_rows:
            fig, ax = plt.subplots(figsize=(6, 4))
            series = defaultdict(list)
            for r in dk_rows:
                series[(r["y"], r["observable"])].append(
                    (int(r["K"]), float(r["rms"]))
                )
            for (y, obs), pts in sorted(series.items()):
                pts.sort()
                ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-",
                          label=f"y={y} / {obs}")
            ax.set_xlabel("K")
            ax.set_ylabel("RMS of D_K")
            ax.legend()
            path = out_dir / "discrepancy.png"
            fig.savefig(path, dpi=120, bbox_inches="tight")
            plt.close(fig)
            made.append(path)
    return made


def render_totient(out_dir: Path) -> list[Path]:
    """Scatter of the ratio N/(phi (log log N)^d) against N."""
    out_dir = Path(out_dir)
    rows = _read(out_dir / "totient.csv")
    ns, ratios = [], []
    for r in rows:
        ratio = float(r["ratio"])
        if not np.isnan(ratio):
            ns.append(int(r["N_y"]))
            ratios.append(ratio)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(ns, ratios, s=8, alpha=0.5)
    ax.set_xscale("log")
    ax.set_xlabel("N(y)")
    ax.set_ylabel("N / (phi (log log N)^d)")
    path = out_dir / "totient_ratio.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [path]


def render_vonneumann(out_dir: Path) -> list[Path]:
    """Log-log plot of the exact averaged norm against the fitted envelope."""
    out_dir = Path(out_dir)
    rows = _read(out_dir / "vonneumann.csv")
    Ks = [int(r["K"]) for r in rows]
    norms = [float(r["exact_norm"]) for r in rows]
    envs = [float(r["envelope"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(Ks, norms, "o-", label="exact ||A_K f - E_f||^2")
    ax.loglog(Ks, envs, "s--", label="envelope K^-s + psi(K^(1-s))")
    ax.set_xlabel("K")
    ax.legend()
    path = out_dir / "vonneumann.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [path]


def render_duality(out_dir: Path) -> list[Path]:
    """Residual of the realized duality identity against N(y)."""
    out_dir = Path(out_dir)
    rows = _read(out_dir / "duality.csv")
    ns = [int(r["N_y"]) for r in rows]
    res = [float(r["max_residual"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ns, [max(r, 1e-18) for r in res], "o", ms=3)
    ax.set_xlabel("N(y)")
    ax.set_ylabel("max residual")
    path = out_dir / "duality_residuals.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [path]
