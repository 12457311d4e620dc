"""Config files, trace CSV output, and summary tables.

Models and scenarios are YAML documents. A model or scenario argument is
resolved in order: explicit path (anything containing a path separator or a
.yaml/.yml suffix), then $GIC_MODEL_DIR/<name>.yaml for models, then the
files bundled with the package.
"""
from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .geometry_errors import Gains
from .kinematics import RobotModel
from .se3 import Pose
from .simulation import RegulationWaypoints, Scenario, SinusoidTrack, Trace


def _load_yaml_resolved(name_or_path: str, kind: str, env_var: str | None):
    s = str(name_or_path)
    p = Path(s)
    if p.suffix in (".yaml", ".yml") or os.sep in s or "/" in s:
        if not p.exists():
            raise FileNotFoundError(f"no such {kind[:-1]} file: {s}")
        return yaml.safe_load(p.read_text()), str(p)
    if env_var:
        base = os.environ.get(env_var, "").strip()
        if base:
            cand = Path(base) / f"{s}.yaml"
            if cand.exists():
                return yaml.safe_load(cand.read_text()), str(cand)
    res = resources.files("gic") / "data" / kind / f"{s}.yaml"
    if res.is_file():
        return yaml.safe_load(res.read_text()), f"bundled:{s}"
    raise FileNotFoundError(f"unknown {kind[:-1]} {s!r} (no bundled file, "
                            f"not found via {env_var or 'path'})")


def model_from_dict(doc: dict) -> RobotModel:
    """Build a RobotModel from a parsed model document."""
    joints = np.array(doc["joints"], dtype=float)
    if joints.ndim != 2 or joints.shape[1] != 6:
        raise ValueError("joints must be a list of 6-vectors [v; w]")
    n = joints.shape[0]
    home = doc["home"]
    g0 = np.eye(4)
    g0[:3, :3] = np.array(home["R"], dtype=float)
    g0[:3, 3] = np.array(home["p"], dtype=float)
    links = doc["links"]
    if len(links) != n:
        raise ValueError(f"{n} joints but {len(links)} links")
    mass = np.empty(n)
    com0 = np.tile(np.eye(4), (n, 1, 1))
    inertia = np.empty((n, 3, 3))
    for i, link in enumerate(links):
        mass[i] = float(link["mass"])
        com0[i, :3, 3] = np.array(link["com"], dtype=float)
        if "R" in link:
            com0[i, :3, :3] = np.array(link["R"], dtype=float)
        if "inertia_diag" in link:
            inertia[i] = np.diag(np.array(link["inertia_diag"], dtype=float))
        else:
            inertia[i] = np.array(link["inertia"], dtype=float)
    return RobotModel(
        name=str(doc.get("name", "unnamed")),
        xi=joints,
        g0=g0,
        com0=com0,
        mass=mass,
        inertia=inertia,
        gravity=np.array(doc.get("gravity", [0.0, 0.0, -9.81]), dtype=float),
        description=str(doc.get("description", "")),
    )


def load_model(name_or_path: str) -> RobotModel:
    """Load a robot model by bundled name, $GIC_MODEL_DIR name, or file path."""
    doc, _ = _load_yaml_resolved(name_or_path, "models", "GIC_MODEL_DIR")
    return model_from_dict(doc)


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

def _square_gain(value, size):
    a = np.asarray(value, dtype=float)
    if a.ndim == 0:
        return float(a) * np.eye(size)
    return a  # 1-D diag or full matrix; Gains validates


def gains_from_dict(doc: dict) -> Gains:
    """kp/ko/kd may be scalars (k*I), diagonals, or full symmetric matrices."""
    return Gains(
        _square_gain(doc.get("kp", 100.0), 3),
        _square_gain(doc.get("ko", 100.0), 3),
        _square_gain(doc.get("kd", 50.0), 6),
        float(doc.get("lambda_g", 0.0)),
    )


def _pose_from_dict(doc: dict) -> Pose:
    return Pose(np.array(doc["R"], dtype=float), np.array(doc["p"], dtype=float))


def trajectory_from_dict(doc: dict):
    kind = doc.get("type")
    if kind == "waypoints":
        wps = doc["waypoints"]
        return RegulationWaypoints([w["t"] for w in wps],
                                   [_pose_from_dict(w) for w in wps])
    if kind == "sinusoid":
        return SinusoidTrack(doc["offset"], doc["amplitude"], doc["omega"],
                             doc["phase"], np.array(doc["R"], dtype=float))
    raise ValueError(f"unknown trajectory type {kind!r}")


def scenario_from_dict(doc: dict) -> Scenario:
    model = load_model(doc["model"])
    return Scenario(
        name=str(doc.get("name", "unnamed")),
        model=model,
        trajectory=trajectory_from_dict(doc["trajectory"]),
        gains=gains_from_dict(doc.get("gains", {})),
        q0=np.array(doc["q0"], dtype=float),
        qdot0=np.array(doc["qdot0"], dtype=float) if "qdot0" in doc else None,
        duration=float(doc.get("duration", 10.0)),
        dt=float(doc.get("dt", 1e-3)),
        controller=str(doc.get("controller", "gic1")),
        external_wrench=doc.get("external_wrench"),
    )


def load_scenario(name_or_path: str, *, controller=None, dt=None, duration=None,
                  kp=None, ko=None, kd=None, lambda_g=None) -> Scenario:
    """Load a scenario by bundled name or path, with optional overrides."""
    doc, _ = _load_yaml_resolved(name_or_path, "scenarios", "GIC_MODEL_DIR")
    gains_doc = dict(doc.get("gains", {}))
    for key, val in (("kp", kp), ("ko", ko), ("kd", kd), ("lambda_g", lambda_g)):
        if val is not None:
            gains_doc[key] = val
    doc = dict(doc, gains=gains_doc)
    sc = scenario_from_dict(doc)
    kw = {}
    if controller is not None:
        kw["controller"] = controller
    if dt is not None:
        kw["dt"] = float(dt)
    if duration is not None:
        kw["duration"] = float(duration)
    return sc.with_overrides(**kw) if kw else sc


# ---------------------------------------------------------------------------
# trace CSV
# ---------------------------------------------------------------------------

def _csv_columns(n: int) -> list[str]:
    return (["t"]
            + [f"q{i+1}" for i in range(n)]
            + [f"qd{i+1}" for i in range(n)]
            + ["px", "py", "pz", "qw", "qx", "qy", "qz", "psi", "phi",
               "V_lyap", "W_lyap"]
            + [f"tau{i+1}" for i in range(n)])


def write_trace_csv(trace: Trace, path) -> None:
    """One header row, one row per record, %.17g floats, LF line endings."""
    n = trace.q.shape[1]
    block = np.hstack([
        trace.t[:, None], trace.q, trace.qdot, trace.p, trace.quat,
        trace.Psi[:, None], trace.Phi[:, None],
        trace.V_lyap[:, None], trace.W_lyap[:, None], trace.tau,
    ]) if len(trace) else np.empty((0, len(_csv_columns(n))))
    with open(path, "w", newline="\n") as f:
        f.write(",".join(_csv_columns(n)) + "\n")
        for row in block:
            f.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_trace_csv(path) -> dict:
    """Parse a trace CSV back into {column: 1-D array}; lossless round-trip."""
    with open(path, "r", newline="") as f:
        header = f.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty file, expected a CSV header")
        names = header.split(",")
        rows = [line.split(",") for line in f if line.strip()]
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(names)))
    if data.shape[1] != len(names):
        raise ValueError(f"{path}: row width does not match header")
    return {name: data[:, j] for j, name in enumerate(names)}


# ---------------------------------------------------------------------------
# summary tables
# ---------------------------------------------------------------------------

_ROW_LABELS = {"x": "RMS(x-x_d)", "y": "RMS(y-y_d)", "z": "RMS(z-z_d)",
               "Psi": "RMS(Psi)", "Phi": "RMS(Phi)"}


def summary_table(traces: dict) -> str:
    """Text table of RMS metrics, one column per controller (insertion order).

    The Phi row appears only when the traces come from a time-varying
    trajectory, mirroring how regulation and tracking runs are reported.
    """
    if not traces:
        raise ValueError("no traces to summarize")
    summaries = {name: tr.summary() for name, tr in traces.items()}
    keys = ["x", "y", "z", "Psi"]
    if any("Phi" in s for s in summaries.values()):
        keys.append("Phi")
    label_w = max(len(_ROW_LABELS[k]) for k in keys)
    col_w = max(12, *(len(name) for name in summaries))
    lines = [" " * label_w + "  " + "  ".join(f"{name:>{col_w}}" for name in summaries)]
    for k in keys:
        cells = []
        for s in summaries.values():
            cells.append(f"{s[k]:>{col_w}.6g}" if k in s else " " * col_w)
        lines.append(f"{_ROW_LABELS[k]:<{label_w}}  " + "  ".join(cells))
    return "\n".join(lines)
