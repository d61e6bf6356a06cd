"""Trajectory recording: per-step diagnostic rows, CSV output and the
final energy report."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .diagnostics import (curl_invariant, curl_seminorms, energy_base,
                          energy_report, energy_tangential)
from .families import VectorFamily
from .fields import VectorField
from .grid import Grid

CSV_HEADER = ["t", "E", "E1_tang", "C1_curl", "curl_invariant_drift",
              "div_defect", "reproj_count"]


class TrajectoryRecorder:
    """Observer computing the standard per-step diagnostic row."""

    def __init__(self, provider, grid: Grid, family: VectorFamily,
                 every: int = 1, forcing=None):
        self.provider = provider
        self.grid = grid
        self.family = family
        self.every = max(int(every), 1)
        self.forcing = forcing
        self._step = -1
        self._base_curl = None

    def __call__(self, evolver, traj, state):
        self._step += 1
        b = evolver.background(state.t)
        if self._base_curl is None:
            self._base_curl = curl_invariant(state, b, self.grid)
        if self._step % self.every:
            return None
        F_jets = ()
        if self.forcing is not None:
            F_jets = (self.forcing(state.t),)
        tang = energy_tangential(state, self.family, 1, b, self.grid,
                                 F_jets=F_jets)
        c1, _ = curl_seminorms(state, self.family, 1, b, self.grid,
                               F_jets=F_jets)
        drift = ops.two_form_norm(
            curl_invariant(state, b, self.grid) - self._base_curl, self.grid)
        return {
            "t": state.t,
            "E": energy_base(state, b, self.grid),
            "E1_tang": tang.E_r_T,
            "C1_curl": c1,
            "curl_invariant_drift": drift,
            "div_defect": max(state.defect_W, state.defect_Wdot),
            "reproj_count": traj.reprojections,
        }


def write_trajectory_csv(rows, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in CSV_HEADER])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_energy_report(state, family, r, b, grid, path,
                        extra=None) -> None:
    rep = energy_report(state, family, r, b, grid)
    payload = rep.as_dict()
    payload["tool"] = "fblin"
    if extra:
        payload.update(extra)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def write_check_report(checks, path) -> None:
    payload = {
        "tool": "fblin",
        "checks": [c if isinstance(c, dict) else c.as_dict()
                   for c in checks],
        "all_pass": all((c["pass"] if isinstance(c, dict) else c.passed)
                        for c in checks),
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
