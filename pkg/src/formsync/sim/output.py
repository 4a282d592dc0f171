"""CSV export of simulation logs."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def csv_columns(log) -> list[str]:
    cols = ["t"]
    for i in range(log.p):
        sc = f"sc{i + 1}_"
        if log.q is not None:
            cols += [sc + c for c in ("q1", "q2", "q3", "qd1", "qd2", "qd3", "tau1", "tau2", "tau3", "s_norm")]
        if log.r is not None:
            cols += [sc + c for c in ("x", "y", "z", "xd", "yd", "zd", "F1", "F2", "F3")]
            cols.append(sc + ("s_pos_norm" if log.q is not None else "s_norm"))
    cols += ["sync_norm", "tracking_norm"]
    if log.q is not None and log.r is not None:
        cols += ["sync_norm_pos", "tracking_norm_pos"]
    return cols


def csv_rows(log):
    for k in range(log.t.size):
        row = [log.t[k]]
        for i in range(log.p):
            if log.q is not None:
                row += list(log.q[k, i]) + list(log.q_ref[k, i]) + list(log.u[k, i])
                row.append(np.linalg.norm(log.s[k, i]))
            if log.r is not None:
                row += list(log.r[k, i]) + list(log.r_ref[k, i]) + list(log.F[k, i])
                row.append(np.linalg.norm(log.s_pos[k, i]))
        row += [log.sync_norm[k], log.tracking_norm[k]]
        if log.q is not None and log.r is not None:
            row += [log.sync_norm_pos[k], log.tracking_norm_pos[k]]
        yield row


def write_csv(log, path) -> Path:
    """Write ``log``; floats use ``repr`` so they round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_columns(log))
        for row in csv_rows(log):
            w.writerow([repr(float(v)) for v in row])
    return path
