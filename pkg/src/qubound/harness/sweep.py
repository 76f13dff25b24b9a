"""Parameter sweeps over the tightness families, emitted as CSV rows."""

from __future__ import annotations

import csv
import io
from itertools import groupby

import numpy as np

from qubound.errors import QuboundError
from qubound.qstate import trace_distance
from qubound.tightness import club_family, geometric_weights, qubit_family, qutrit_gentle_family

KINDS = ("qubit", "club", "qutrit")
COLUMNS = (
    "kind",
    "m",
    "delta",
    "a_ratio",
    "p",
    "fail_exact",
    "fail_simulated",
    "loss_exact",
    "bound_value",
    "ratio",
    "limit",
    "normalized_gap",
    "infidelity",
    "trace_distance",
    "monotone",
    "status",
)

PRESETS = {
    "acceptance": {
        "qubit": {"m": [1, 2, 5, 50], "delta": [1e-2, 1e-3]},
        "club": {"m": [2, 3, 4], "delta": [1e-2, 1e-3], "a_ratio": [1.0, 2.0, 0.5]},
        "qutrit": {"m": [1, 2, 5, 8], "delta": [0.3, 0.2]},
    },
}


def _row(kind, m, delta, **fields):
    row = dict.fromkeys(COLUMNS, "")
    row.update(kind=kind, m=m, delta=delta, status="ok")
    row.update(fields)
    return row


def _qubit_row(m, delta):
    rep = qubit_family(m, delta)
    return _row(
        "qubit",
        m,
        delta,
        fail_exact=rep.fail_exact,
        fail_simulated=rep.fail_simulated,
        loss_exact=rep.loss_exact,
        bound_value=rep.bound_value,
        ratio=rep.ratio,
        limit=(4 * m - 3) / m,
        normalized_gap=rep.normalized_gap,
    )


def _club_row(m, delta, a_ratio):
    p = 1.0 + 1.0 / a_ratio
    rep = club_family(m, delta, geometric_weights(m, p), p)
    return _row(
        "club",
        m,
        delta,
        a_ratio=a_ratio,
        p=p,
        fail_exact=rep.fail_exact,
        fail_simulated=rep.fail_simulated,
        loss_exact=rep.loss_exact,
        bound_value=rep.bound_value,
        ratio=rep.fail_exact / rep.bound_value,
        limit=1.0,
        normalized_gap=rep.normalized_gap,
    )


def _qutrit_row(m, delta):
    inst = qutrit_gentle_family([delta] * m)
    traj = inst.trajectory
    infid = 1.0 - float(traj.fid[-1])
    return _row(
        "qutrit",
        m,
        delta,
        fail_simulated=traj.fail,
        loss_exact=traj.loss,
        bound_value=traj.loss,
        ratio=infid / traj.loss,
        limit=1.0,
        normalized_gap=(traj.loss - infid) / delta**2,
        infidelity=infid,
        trace_distance=trace_distance(traj.rho0, traj.final_state),
    )


def _mark_monotone(rows):
    """Within each ``(kind, m, a_ratio)`` group, ordered by decreasing delta, flag
    whether the distance of ``ratio`` to its limit never grows."""
    key = lambda r: (r["kind"], r["m"], r["a_ratio"])  # noqa: E731
    ok = [r for r in rows if r["status"] == "ok"]
    for _, grp in groupby(sorted(ok, key=lambda r: (key(r), -r["delta"])), key=key):
        grp = list(grp)
        dist = [abs(r["ratio"] - r["limit"]) for r in grp]
        flag = int(all(b <= a + 1e-15 for a, b in zip(dist, dist[1:])))
        for r in grp:
            r["monotone"] = flag


def tightness_sweep(kind: str, ms, deltas, a_ratios=(1.0,)) -> list[dict]:
    """One row per grid point; failing points are kept with their error in ``status``."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    rows = []
    for m in ms:
        for delta in deltas:
            for a_ratio in a_ratios if kind == "club" else (None,):
                try:
                    if kind == "qubit":
                        rows.append(_qubit_row(m, delta))
                    elif kind == "club":
                        rows.append(_club_row(m, delta, a_ratio))
                    else:
                        rows.append(_qutrit_row(m, delta))
                except QuboundError as exc:
                    rows.append(
                        _row(kind, m, delta, a_ratio="" if a_ratio is None else a_ratio, status=type(exc).__name__)
                    )
    _mark_monotone(rows)
    return rows


def preset_rows(name: str, kinds=KINDS) -> list[dict]:
    grid = PRESETS[name]
    rows = []
    for kind in kinds:
        g = grid[kind]
        if kind == "club":
            # Pair each m with its own ratio rather than taking the product.
            for m, r in zip(g["m"], g["a_ratio"]):
                rows.extend(tightness_sweep(kind, [m], g["delta"], [r]))
        else:
            rows.extend(tightness_sweep(kind, g["m"], g["delta"]))
    return rows


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return v


def write_csv(rows, fh):
    w = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})


def to_csv(rows) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
