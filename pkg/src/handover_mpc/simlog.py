"""Closed-loop run logs: in-memory rows, CSV serialization, sidecar.

The CSV column set is a fixed contract (one row per control-grid time);
richer per-step diagnostics stay on the in-memory rows and in the JSON
sidecar. By default the volatile solve_ms column is zeroed so identical
config + seed produce byte-identical files; measured times always land in
the sidecar.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IoError, ValidationError

CSV_HEADER = (
    "t,q1,q2,q3,q4,q5,q6,q7,dq1,dq2,dq3,dq4,dq5,dq6,dq7,"
    "prx,pry,prz,rr,rp,ry,phi_c,dphi,phi_h,phi_ho,w_pred,"
    "ep1,ep2,eo1,eo2,"
    "b_p1_lo,b_p1_up,b_p2_lo,b_p2_up,b_o1_lo,b_o1_up,b_o2_lo,b_o2_up,"
    "status,solve_ms"
)


@dataclass
class LogRow:
    t: float
    q: np.ndarray  # (7,)
    dq: np.ndarray  # (7,)
    p_r: np.ndarray  # (3,)
    rpy_r: np.ndarray  # (3,) roll, pitch, yaw of the tool in the world
    phi_c: float
    dphi: float
    phi_h: float
    phi_ho: float
    w_pred: float
    e_orth: np.ndarray  # (4,) ep1, ep2, eo1, eo2
    bound_vals: np.ndarray  # (4, 2) lower/upper at phi_c
    status: str
    solve_ms: float
    # diagnostics beyond the CSV contract
    e_par_p: float = 0.0
    e_par_o: float = 0.0
    d_pred: float = 0.0
    goal_e: np.ndarray = field(default_factory=lambda: np.zeros(2))
    ori_targets: np.ndarray = field(default_factory=lambda: np.zeros(2))
    anchor_widths: np.ndarray = field(default_factory=lambda: np.zeros(4))
    continuity_residual: float = 0.0
    corridor_overshoot: float = 0.0
    qp_iterations: int = 0
    objective: float = 0.0
    max_slack: float = 0.0
    dynamics_residual: float = 0.0

    def csv_values(self, solve_ms_override=None):
        vals = [
            self.t,
            *self.q,
            *self.dq,
            *self.p_r,
            *self.rpy_r,
            self.phi_c,
            self.dphi,
            self.phi_h,
            self.phi_ho,
            self.w_pred,
            *self.e_orth,
            *self.bound_vals.reshape(-1),
        ]
        ms = self.solve_ms if solve_ms_override is None else solve_ms_override
        return vals, self.status, ms


@dataclass
class SimLog:
    rows: list
    meta: dict
    hand_stream: list = field(default_factory=list)  # (t, p(3), rpy(3)) per step

    @property
    def grasped(self):
        return bool(self.meta.get("grasped", False))

    def column(self, name):
        """Numeric column as an array (CSV names)."""
        cols = CSV_HEADER.split(",")
        if name not in cols:
            raise ValidationError(f"unknown log column {name}")
        idx = cols.index(name)
        out = []
        for row in self.rows:
            vals, status, ms = row.csv_values()
            full = [*vals, status, ms]
            out.append(full[idx])
        return np.asarray(out)


def _fmt(v):
    return f"{v:.12g}"


def write_log(log: SimLog, out_dir, deterministic=True):
    """Write log.csv + meta.json into out_dir; returns the CSV path."""
    if not log.rows:
        raise ValidationError("refusing to write an empty log")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "log.csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in log.rows:
                vals, status, ms = row.csv_values(0.0 if deterministic else None)
                fh.write(",".join(_fmt(v) for v in vals) + f",{status},{_fmt(ms)}\n")
        meta = dict(log.meta)
        meta["solve_ms_per_step"] = [row.solve_ms for row in log.rows]
        meta["deterministic_csv"] = deterministic
        (out / "meta.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write log to {out}: {exc}")
    return csv_path


def read_log_csv(path):
    """Rows of a written log as (float matrix, status list)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValidationError("log CSV header mismatch")
        numeric = []
        statuses = []
        for line in fh:
            parts = line.strip().split(",")
            statuses.append(parts[38])
            numeric.append([float(v) for v in parts[:38]] + [float(parts[39])])
    return np.asarray(numeric), statuses


def phi_series(path):
    """(t, phi_c, phi_h, phi_ho) columns of a log CSV, for progress plots."""
    data, _ = read_log_csv(path)
    cols = CSV_HEADER.split(",")
    idx = [cols.index(name) for name in ("t", "phi_c", "phi_h", "phi_ho")]
    return tuple(data[:, i] for i in idx)
