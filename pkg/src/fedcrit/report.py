"""Results / summary / diagnostics CSV writers and optional SVG plots."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path
from statistics import median
from typing import Dict, Iterable, List, Sequence

RESULT_COLUMNS = ("dataset", "method", "n_workers", "seed", "round", "scope",
                  "roc_auc", "f_score", "dr", "g_mean")
METRICS = ("roc_auc", "f_score", "dr", "g_mean")
SUMMARY_COLUMNS = ("dataset", "method", "n_workers", "n_seeds", "round", *METRICS)
DIAGNOSTIC_COLUMNS = ("dataset", "k", "seed", "homogeneity", "minority_free",
                      "below_global", "theorem1")


class SchemaError(RuntimeError):
    """A row does not match the report schema; always a bug upstream."""


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(path, columns: Sequence[str], rows: Iterable[dict]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            if set(row) != set(columns):
                missing = set(columns) - set(row)
                extra = set(row) - set(columns)
                raise SchemaError(f"row does not fit schema (missing {sorted(missing)}, extra {sorted(extra)})")
            w.writerow([_fmt(row[c]) for c in columns])
    return path


def read_rows(path) -> List[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def summarize(rows: Iterable[dict]) -> List[dict]:
    """Median over seeds of the global metrics at each cell's final round."""
    final: Dict[tuple, dict] = {}
    for r in rows:
        if r["scope"] != "global":
            continue
        key = (r["dataset"], r["method"], int(r["n_workers"]), int(r["seed"]))
        if key not in final or int(r["round"]) > int(final[key]["round"]):
            final[key] = r
    groups = defaultdict(list)
    for (ds, method, n, _), r in final.items():
        groups[(ds, method, n)].append(r)
    out = []
    for (ds, method, n) in sorted(groups, key=lambda k: (k[0], k[1], k[2])):
        rs = groups[(ds, method, n)]
        row = {"dataset": ds, "method": method, "n_workers": n, "n_seeds": len(rs),
               "round": max(int(r["round"]) for r in rs)}
        for m in METRICS:
            row[m] = float(median(float(r[m]) for r in rs))
        out.append(row)
    return out


def emit_report(rows: List[dict], out_dir, plots: bool = False) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": write_rows(out_dir / "results.csv", RESULT_COLUMNS, rows),
        "summary": write_rows(out_dir / "summary.csv", SUMMARY_COLUMNS, summarize(rows)),
    }
    if plots:
        paths.update(plot_results(rows, out_dir))
    return paths


def _pyplot():
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "fedcrit"
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_results(rows: List[dict], out_dir) -> Dict[str, Path]:
    """F-score vs worker count per method, and per-round F-scores per cell."""
    plt = _pyplot()
    out_dir = Path(out_dir)
    paths = {}
    summary = summarize(rows)
    for ds in sorted({r["dataset"] for r in summary}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for method in sorted({r["method"] for r in summary if r["dataset"] == ds}):
            pts = sorted((r["n_workers"], r["f_score"]) for r in summary
                         if r["dataset"] == ds and r["method"] == method)
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=method)
        ax.set_xlabel("number of worker nodes")
        ax.set_ylabel("median F-score")
        ax.set_title(ds)
        ax.legend()
        paths[f"fscore_vs_workers_{ds}"] = out_dir / f"fscore_vs_workers_{ds}.svg"
        _save(fig, paths[f"fscore_vs_workers_{ds}"])
        plt.close(fig)

    cells = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if int(r["n_workers"]) > 1:
            key = (r["dataset"], r["method"], int(r["n_workers"]), int(r["seed"]))
            cells[key][r["scope"]].append((int(r["round"]), float(r["f_score"])))
    for (ds, method, n, seed), scopes in sorted(cells.items()):
        fig, ax = plt.subplots(figsize=(6, 4))
        for scope in sorted(scopes, key=lambda s: (s != "global", s)):
            pts = sorted(scopes[scope])
            style = dict(color="black", linewidth=2.5) if scope == "global" else dict(alpha=0.6)
            ax.plot([p[0] for p in pts], [p[1] for p in pts], label=scope, **style)
        ax.set_xlabel("communication round")
        ax.set_ylabel("test F-score")
        ax.set_title(f"{ds} {method} N={n} seed={seed}")
        ax.legend(fontsize="x-small", ncol=2)
        name = f"rounds_{ds}_{method}_n{n}_s{seed}"
        paths[name] = out_dir / f"{name}.svg"
        _save(fig, paths[name])
        plt.close(fig)
    return paths


def plot_diagnostics(rows: List[dict], out_dir) -> Dict[str, Path]:
    """Homogeneity and critical-imbalance counts against the number of partitions."""
    plt = _pyplot()
    out_dir = Path(out_dir)
    paths = {}
    by_k = defaultdict(list)
    for r in rows:
        by_k[(r["dataset"], int(r["k"]))].append(r)
    for ds in sorted({d for d, _ in by_k}):
        ks = sorted(k for d, k in by_k if d == ds)
        med = {col: [median(float(r[col]) for r in by_k[(ds, k)]) for k in ks]
               for col in ("homogeneity", "minority_free", "below_global")}
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(ks, med["homogeneity"], marker="o")
        ax.set_xlabel("number of data portions")
        ax.set_ylabel("homogeneity")
        ax.set_title(ds)
        paths[f"homogeneity_{ds}"] = out_dir / f"homogeneity_{ds}.svg"
        _save(fig, paths[f"homogeneity_{ds}"])
        plt.close(fig)

        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(ks, med["minority_free"], marker="o", label="no minority samples")
        ax.plot(ks, med["below_global"], marker="s", label="outlier ratio below global")
        ax.set_xlabel("number of data portions")
        ax.set_ylabel("number of portions")
        ax.set_title(ds)
        ax.legend()
        paths[f"critical_imbalance_{ds}"] = out_dir / f"critical_imbalance_{ds}.svg"
        _save(fig, paths[f"critical_imbalance_{ds}"])
        plt.close(fig)
    return paths
