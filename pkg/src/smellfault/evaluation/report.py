"""Results file, plot data and the human-readable summary table."""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .metrics import ConfusionCounts, f1_score, metrics

ISO_F1_LEVELS = tuple(round(0.1 * i, 1) for i in range(1, 10))
ISO_STEP = 0.01


def _json_param(param):
    if isinstance(param, tuple):
        return [_json_param(p) for p in param]
    if isinstance(param, (np.integer,)):
        return int(param)
    if isinstance(param, (np.floating,)):
        return float(param)
    return param


def _counts_dict(counts: ConfusionCounts, scores=None) -> dict:
    p, r, f1 = scores if scores is not None else metrics(counts)
    return {"tp": counts.tp, "fp": counts.fp, "tn": counts.tn, "fn": counts.fn, "p": p, "r": r, "f1": f1}


def entry_to_dict(entry) -> dict:
    params = [_json_param(p) for p in entry.params]
    pooled = _counts_dict(entry.pooled, entry.scores)
    return {
        "classifier": entry.classifier,
        "params": params,
        "aggregation": entry.aggregation,
        "pooled": pooled,
        "folds": [dict(_counts_dict(c), params=p) for c, p in zip(entry.folds, params)],
    }


def results_document(entries, corpus: str, seed: int, config_hash: str) -> dict:
    if not entries:
        raise ValueError("a report needs at least one entry")
    return {
        "corpus": corpus,
        "seed": seed,
        "config_hash": config_hash,
        "entries": [entry_to_dict(e) for e in entries],
    }


def dumps_results(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def plot_points_csv(doc: dict) -> str:
    """``classifier,precision,recall,f1`` with one row per entry."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["classifier", "precision", "recall", "f1"])
    for e in doc["entries"]:
        s = e["pooled"]
        writer.writerow([e["classifier"], f"{s['p']:.6f}", f"{s['r']:.6f}", f"{s['f1']:.6f}"])
    return buf.getvalue()


def iso_f1_csv(levels=ISO_F1_LEVELS, step: float = ISO_STEP) -> str:
    """Sampled F1 iso-lines: recall = f*p / (2p - f) for precision p in (f/2, 1]."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["f1", "precision", "recall"])
    n_steps = int(round(1.0 / step))
    for f in levels:
        for i in range(1, n_steps + 1):
            p = i * step
            if 2 * p <= f:
                continue
            r = f * p / (2 * p - f)
            if r <= 1.0 + 1e-12:
                writer.writerow([f"{f:.2f}", f"{p:.6f}", f"{min(r, 1.0):.6f}"])
    return buf.getvalue()


def summary_table(doc: dict) -> str:
    """Fixed-width table: classifier, parameters, precision, recall, F1."""
    rows = [("classifier", "params", "precision", "recall", "F1")]
    for e in doc["entries"]:
        s = e["pooled"]
        p, r = s["p"], s["r"]
        f1 = s.get("f1", f1_score(p, r))
        params = e.get("params", [])
        distinct = []
        for param in params:
            if param not in distinct:
                distinct.append(param)
        shown = json.dumps(distinct[0]) if len(distinct) == 1 else f"{len(distinct)} distinct"
        if len(shown) > 24:
            shown = shown[:21] + "..."
        rows.append((e["classifier"], shown, f"{p:.2f}", f"{r:.2f}", f"{f1:.2f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = []
    for j, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) if i < 2 else cell.rjust(widths[i]) for i, cell in enumerate(row)))
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
