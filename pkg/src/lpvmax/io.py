"""Plain-text file formats: JSON for models and reports, CSV for tables and signals."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .markov import SubMarkovTable
from .model import DataSet, LpvSsModel
from .strings import format_string, parse_string

SUMMARY_COLUMNS = ("snr_db", "n_mc", "mean_bfr_sim", "std_bfr_sim", "mean_bfr_pred", "std_bfr_pred", "failures")
RUN_COLUMNS = ("snr_db", "run", "seed", "status", "bfr_sim", "bfr_pred", "iterations", "converged", "final_loss")


def _num(x):
    # repr round-trips floats exactly, which keeps CSV output deterministic
    return repr(float(x))


def model_to_dict(model):
    return {
        "n_x": model.n_x, "n_u": model.n_u, "n_y": model.n_y, "n_p": model.n_p,
        **{k: getattr(model, k).tolist() for k in ("A", "B", "C", "D", "K", "Sigma_e")},
    }


def model_from_dict(d):
    return LpvSsModel(*(np.asarray(d[k], dtype=float) for k in ("A", "B", "C", "D", "K", "Sigma_e")))


def save_model(path, model):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2))


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))


def save_dataset(path, data):
    header = ["t"] + [f"u{i + 1}" for i in range(data.n_u)] + [f"p{i + 1}" for i in range(data.n_p)] \
        + [f"y{i + 1}" for i in range(data.n_y)]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for t, row in enumerate(np.hstack([data.u, data.p, data.y])):
            w.writerow([t, *map(_num, row)])


def load_dataset(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0]))
    cols = {k: [i for i, h in enumerate(header) if h.startswith(k) and h[1:].isdigit()] for k in "upy"}
    if not cols["y"]:
        raise ValueError(f"{path}: no output columns")
    return DataSet(body[:, cols["u"]], body[:, cols["p"]], body[:, cols["y"]])


def save_table(path, table):
    """One row per scalar entry: ``string, row, col, value`` (0-based row/col)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["string", "row", "col", "value"])
        for eta, block in table.entries().items():
            for (r, c), v in np.ndenumerate(block):
                w.writerow([format_string(eta, table.n_p), r, c, _num(v)])


def load_table(path, n_p, n_y, n_in, order=None, monic=False):
    entries = {}
    with open(path, newline="") as f:
        for rec in csv.DictReader(f):
            eta = parse_string(rec["string"], n_p)
            block = entries.setdefault(eta, np.zeros((n_y, n_in)))
            block[int(rec["row"]), int(rec["col"])] = float(rec["value"])
    if order is None:
        order = max((len(eta) - 1 for eta in entries), default=0)
    return SubMarkovTable.from_entries(n_p, n_y, n_in, order, entries, monic=monic)


def save_residuals(path, res):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t"] + [f"eps{i + 1}" for i in range(res.eps.shape[1])])
        for t, row in enumerate(res.eps):
            w.writerow([t, *map(_num, row)])


def save_singular_values(path, s):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["k", "sigma"])
        for k, v in enumerate(s, start=1):
            w.writerow([k, _num(v)])


def report_to_dict(report, realized=None):
    d = {
        "orders": list(report.orders),
        "iterations_used": report.iterations_used,
        "converged": report.converged,
        "loss_per_iter": [float(v) for v in report.loss_per_iter],
        "pe_order": report.pe_order,
        "pe_required": report.pe_required,
        "condition_number": _json_float(report.condition_number),
        "config": {k: getattr(report.config, k) for k in report.config.__dataclass_fields__},
    }
    if realized is not None:
        d["realization"] = {
            "n_x": realized.n_x,
            "rank_gap": _json_float(realized.rank_gap),
            "deficient": realized.deficient,
            "singular_values": [float(v) for v in realized.singular_values],
        }
    return d


def _json_float(x):
    return None if not math.isfinite(x) else float(x)


def save_report(path, report, realized=None):
    Path(path).write_text(json.dumps(report_to_dict(report, realized), indent=2))


def _snr_text(snr):
    return "inf" if math.isinf(snr) else f"{snr:g}"


def write_summary(path, summaries):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            w.writerow([_snr_text(s.snr_db), s.n_mc, _num(s.mean_bfr_sim), _num(s.std_bfr_sim),
                        _num(s.mean_bfr_pred), _num(s.std_bfr_pred), s.failures])


def write_runs(path, summaries, master_seed):
    from .experiment import run_seed_for

    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(RUN_COLUMNS)
        for s in summaries:
            by_seed = {r.run_seed: r for r in s.runs}
            errors = {getattr(e, "run_seed", None): e for e in s.errors}
            for i in range(s.n_mc):
                seed = run_seed_for(master_seed, i)
                r = by_seed.get(seed)
                if r is None:
                    err = errors.get(seed)
                    w.writerow([_snr_text(s.snr_db), i, seed, type(err).__name__ if err else "failed",
                                "", "", "", "", ""])
                else:
                    rep = r.report
                    w.writerow([_snr_text(s.snr_db), i, seed, "ok", _num(r.bfr_sim), _num(r.bfr_pred),
                                rep.iterations_used, rep.converged, _num(rep.loss_per_iter[-1])])
