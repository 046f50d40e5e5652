import json
import os

import numpy as np
from wignerlab import pure_density, wigner_from_density
from wignerlab.serialize import (gnuplot_script, load_density,
                                 load_field_binary, save_density,
                                 save_diagnostics_csv, save_field_binary,
                                 save_field_csv, write_manifest)
from wignerlab.states import displaced_state
from wignerlab.wigner import eta_density


def test_density_binary_roundtrip(lab64, tmp_path):
    T = pure_density(displaced_state(lab64, 1.0, 0.5))
    base = str(tmp_path / "density")
    save_density(T, base)
    meta = json.loads((tmp_path / "density.json").read_text())
    assert meta["dtype"] == "<c16"
    assert meta["shape"] == [64, 64]
    assert meta["space"]["kind"] == "grid"
    back = load_density(base, lab64, lab64.tol)
    assert np.abs(back.matrix - T.matrix).max() == 0.0
    # raw buffer is row-major little-endian complex128
    raw = np.fromfile(base + ".bin", dtype="<c16").reshape(64, 64)
    assert np.array_equal(raw, np.asarray(T.matrix))


def test_field_binary_roundtrip(lab64, tmp_path):
    W = wigner_from_density(pure_density(displaced_state(lab64, 1.0, 0.5)))
    base = str(tmp_path / "field")
    save_field_binary(W, base)
    back = load_field_binary(base, lab64, lab64.tol)
    assert np.array_equal(np.asarray(back.values), np.asarray(W.values))
    assert back.role == W.role
    phi = eta_density(W)
    save_field_binary(phi, str(tmp_path / "eta"))
    meta = json.loads((tmp_path / "eta.json").read_text())
    assert meta["role"] == "eta_density"


def test_field_csv_layout_and_determinism(lab32, tmp_path):
    W = wigner_from_density(pure_density(displaced_state(lab32, 1.0, 0.0)))
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    save_field_csv(W, str(p1))
    save_field_csv(W, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text().splitlines()
    assert lines[0] == "q1,p1,value"
    assert len(lines) == 1 + 32 * 32
    q0, p0, v0 = lines[1].split(",")
    assert float(q0) == lab32.grid.positions[0]
    assert float(p0) == lab32.grid.momenta[0]


def test_diagnostics_csv(tmp_path):
    diags = {k: np.array([0.0, 1.0]) for k in
             ("t", "mass", "l2", "energy", "min_w", "purity_est")}
    path = tmp_path / "d.csv"
    save_diagnostics_csv(diags, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "t,mass,l2,energy,min_w,purity_est"
    assert len(lines) == 3


def test_gnuplot_script(tmp_path):
    out = tmp_path / "plot.gp"
    gnuplot_script(str(tmp_path / "field.csv"), str(out), title="t = 0")
    text = out.read_text()
    assert "pm3d" in text
    assert "field.csv" in text


def test_manifest_contents(tmp_path):
    from wignerlab.tolerances import DEFAULT_TOL
    cfg = '{"version": "1"}'
    write_manifest(str(tmp_path), cfg, "transform", DEFAULT_TOL)
    meta = json.loads((tmp_path / "manifest.json").read_text())
    assert meta["command"] == "transform"
    assert len(meta["config_sha256"]) == 64
    assert meta["tool_version"]
    assert "trace_one" in meta["tolerances"]
    # no timestamps: a second write is byte-identical
    first = (tmp_path / "manifest.json").read_bytes()
    write_manifest(str(tmp_path), cfg, "transform", DEFAULT_TOL)
    assert (tmp_path / "manifest.json").read_bytes() == first
