"""Deterministic output formats: CSV series, binary snapshots, plot scripts.

Binary snapshots are raw little-endian buffers (complex128 for operators,
float64 or complex128 for fields) with a JSON sidecar holding shape, dtype,
role and grid geometry. CSV floats use %.17g so reruns are byte-identical.
"""

import hashlib
import json
import os

import numpy as np

from .errors import IoFailure
from .hilbert import CompositeSystem, DensityOperator, LEBESGUE
from .lattice import PhaseSpaceSpec
from .wigner import PhaseSpaceField


def _fmt(x):
    return f"{x:.17g}"


def _spec_meta(space):
    if isinstance(space, PhaseSpaceSpec):
        return {"kind": "grid", "d": space.d, "n_per_axis": space.n_per_axis,
                "half_width": space.half_width,
                "covariance": [[_fmt(v) for v in row] for row in space.covariance]}
    if isinstance(space, CompositeSystem):
        return {"kind": "composite",
                "factors": [[lab, _spec_meta(s)] for lab, s in space.factors]}
    return {"kind": "levels", "dim": space.dim}


def save_density(T, path_base):
    """Row-major complex128 little-endian buffer plus a JSON sidecar."""
    m = np.ascontiguousarray(T.matrix, dtype="<c16")
    try:
        with open(path_base + ".bin", "wb") as f:
            f.write(m.tobytes())
        sidecar = {"dtype": "<c16", "shape": list(m.shape), "order": "C",
                   "object": "density_operator", "rep": T.rep,
                   "space": _spec_meta(T.space)}
        with open(path_base + ".json", "w") as f:
            json.dump(sidecar, f, indent=1, sort_keys=True)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_density(path_base, space, tol):
    try:
        with open(path_base + ".json") as f:
            meta = json.load(f)
        raw = np.fromfile(path_base + ".bin", dtype=meta["dtype"])
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    m = raw.reshape(meta["shape"])
    return DensityOperator(m, meta.get("rep", LEBESGUE), space, tol)


def save_field_binary(field, path_base):
    vals = np.asarray(field.values)
    dtype = "<c16" if np.iscomplexobj(vals) else "<f8"
    buf = np.ascontiguousarray(vals, dtype=dtype)
    try:
        with open(path_base + ".bin", "wb") as f:
            f.write(buf.tobytes())
        sidecar = {"dtype": dtype, "shape": list(buf.shape), "order": "C",
                   "object": "phase_space_field", "role": field.role,
                   "measure": field.measure,
                   "axes": [{"n": n, "half_width": L} for n, L in field.axes],
                   "space": _spec_meta(field.space)}
        with open(path_base + ".json", "w") as f:
            json.dump(sidecar, f, indent=1, sort_keys=True)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_field_binary(path_base, space, tol):
    try:
        with open(path_base + ".json") as f:
            meta = json.load(f)
        raw = np.fromfile(path_base + ".bin", dtype=meta["dtype"])
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    vals = raw.reshape(meta["shape"])
    return PhaseSpaceField(vals, meta["role"], space, meta["measure"], tol)


def save_field_csv(field, path):
    """One row per grid point: q-coordinates, p-coordinates, value."""
    from .engine import axis_coords
    d = len(field.axes)
    coords = [axis_coords(n, L) for n, L in field.axes]
    qs = [c[0] for c in coords]
    ps = [c[1] for c in coords]
    header = ",".join([f"q{i + 1}" for i in range(d)]
                      + [f"p{i + 1}" for i in range(d)] + ["value"])
    vals = np.asarray(field.values)
    try:
        with open(path, "w") as f:
            f.write(header + "\n")
            for idx in np.ndindex(vals.shape):
                row = [qs[i][idx[i]] for i in range(d)]
                row += [ps[i][idx[d + i]] for i in range(d)]
                v = vals[idx]
                cells = [_fmt(x) for x in row]
                if np.iscomplexobj(vals):
                    cells.append(_fmt(v.real) + "+" + _fmt(v.imag) + "j")
                else:
                    cells.append(_fmt(v))
                f.write(",".join(cells) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def save_diagnostics_csv(diagnostics, path):
    cols = ["t", "mass", "l2", "energy", "min_w", "purity_est"]
    try:
        with open(path, "w") as f:
            f.write(",".join(cols) + "\n")
            n = len(diagnostics["t"])
            for i in range(n):
                f.write(",".join(_fmt(float(diagnostics[c][i])) for c in cols)
                        + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def save_series_csv(columns, path):
    """Generic deterministic CSV from an ordered dict of equal-length columns."""
    names = list(columns)
    try:
        with open(path, "w") as f:
            f.write(",".join(names) + "\n")
            n = len(columns[names[0]])
            for i in range(n):
                f.write(",".join(_fmt(float(columns[c][i])) for c in names)
                        + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def gnuplot_script(csv_path, out_path, title="phase-space field"):
    """Heatmap script for a d = 1 field CSV (q, p, value columns)."""
    body = (
        "set datafile separator ','\n"
        "set pm3d map\n"
        "set xlabel 'q'\n"
        "set ylabel 'p'\n"
        f"set title '{title}'\n"
        f"splot '{os.path.basename(csv_path)}' every ::1 using 1:2:3 with pm3d "
        "notitle\n"
    )
    try:
        with open(out_path, "w") as f:
            f.write(body)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def write_manifest(out_dir, config_text, command, tol, extra=None):
    """Config hash, tool version and tolerances; no timestamps (reproducible)."""
    from . import __version__
    manifest = {
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "tool_version": __version__,
        "command": command,
        "tolerances": {k: _fmt(v) for k, v in vars(tol).items()},
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    try:
        with open(path, "w") as f:
            json.dump(manifest, f, indent=1, sort_keys=True)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return path
