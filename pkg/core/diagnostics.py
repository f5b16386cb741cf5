"""
Error norms, convergence orders, total entropy, discrete divergence of B and
the CSV / metadata files written by runs.
"""
import logging
import math
import os
import subprocess
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from dotenv import dotenv_values

from core.errors import ConfigError
from core.physics import (
    BX, BY, BZ, DENS, ENER, MX, MY, MZ, PRES, RHO, VELOCITY, VX, VY, VZ,
    EosParams, cons_to_prim, entropy_pair_prim, prim_to_cons,
)
from core.solver import DGField, domain_entropy

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ("rho", "vx", "vy", "vz", "p", "Bx", "By", "Bz", "W", "entropy")
ENTROPY_HEADER = "step,time,entropy"
CONVERGENCE_HEADER = "n,l1,order_l1,l2,order_l2,linf,order_linf"
NUMBER_FORMAT = "%.17g"

_PRIMITIVE = {"rho": RHO, "vx": VX, "vy": VY, "vz": VZ, "p": PRES, "Bx": BX, "By": BY, "Bz": BZ}
_CONSERVED = {"D": DENS, "mx": MX, "my": MY, "mz": MZ, "E": ENER}
VARIABLES = tuple(_PRIMITIVE) + tuple(_CONSERVED) + ("W",)


def select_variable(U, name: str, eos: EosParams, P=None):
    """One named quantity from conserved states (primitive, conserved or W)."""
    if name in _CONSERVED:
        return U[..., _CONSERVED[name]]
    if name not in _PRIMITIVE and name != "W":
        raise ConfigError(f"Unknown variable: {name} (choose from {', '.join(VARIABLES)})")
    P = cons_to_prim(U, eos) if P is None else P
    if name == "W":
        return 1.0 / np.sqrt(1.0 - np.sum(P[..., VELOCITY] ** 2, axis=-1))
    return P[..., _PRIMITIVE[name]]


def total_entropy(field_: DGField, eos: EosParams) -> float:
    """Quadrature sum of eta(U) over the mesh."""
    return domain_entropy(field_, eos)


@dataclass
class ErrorReport:
    variable: str
    n: int
    l1: float
    l2: float
    linf: float

    def as_row(self):
        return (self.n, self.l1, self.l2, self.linf)


def error_norms(field_: DGField, exact: Callable, variable: str, eos: EosParams,
                t: Optional[float] = None) -> ErrorReport:
    """
    l1 and l2 by LGL quadrature divided by the domain measure, linf over nodes.
    `exact(t, *coords)` returns primitive states.
    """
    t = field_.t if t is None else t
    coords = field_.mesh.node_coordinates(field_.op)
    P_exact = np.asarray(exact(t, *coords), dtype=float)
    U_exact = prim_to_cons(P_exact, eos)
    err = select_variable(field_.U, variable, eos) - select_variable(U_exact, variable, eos, P_exact)

    w = field_.quadrature_weights()
    measure = field_.mesh.measure
    return ErrorReport(
        variable=variable,
        n=int(field_.mesh.cells[0]),
        l1=float(np.sum(w * np.abs(err)) / measure),
        l2=float(math.sqrt(np.sum(w * err * err) / measure)),
        linf=float(np.max(np.abs(err))),
    )


@dataclass
class ConvergenceRow:
    report: ErrorReport
    order_l1: Optional[float] = None
    order_l2: Optional[float] = None
    order_linf: Optional[float] = None


def _order(coarse, fine, ratio):
    if coarse <= 0.0 or fine <= 0.0:
        return None
    return math.log(coarse / fine) / math.log(ratio)


def convergence_orders(reports) -> list:
    """Observed orders between consecutive levels: log(e_c / e_f) / log(n_f / n_c)."""
    rows = []
    previous = None
    for report in sorted(reports, key=lambda r: r.n):
        row = ConvergenceRow(report)
        if previous is not None:
            ratio = report.n / previous.n
            row.order_l1 = _order(previous.l1, report.l1, ratio)
            row.order_l2 = _order(previous.l2, report.l2, ratio)
            row.order_linf = _order(previous.linf, report.linf, ratio)
        rows.append(row)
        previous = report
    return rows


def nodal_divB(field_: DGField) -> np.ndarray:
    """Broken divergence of B at every node: D applied to Bx along x (+ By along y)."""
    mesh, op, U = field_.mesh, field_.op, field_.U
    h = mesh.spacing
    div = (2.0 / h[0]) * np.moveaxis(
        np.tensordot(op.Dmat, np.moveaxis(U[..., BX], mesh.dimension, 0), axes=(1, 0)), 0, mesh.dimension)
    if mesh.dimension == 2:
        div += (2.0 / h[1]) * np.moveaxis(
            np.tensordot(op.Dmat, np.moveaxis(U[..., BY], 3, 0), axes=(1, 0)), 0, 3)
    return div


def discrete_divB(field_: DGField) -> np.ndarray:
    """Largest |div B| inside each cell."""
    div = np.abs(nodal_divB(field_))
    dim = field_.mesh.dimension
    return div.reshape(div.shape[:dim] + (-1,)).max(axis=-1)


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def _profile_table(field_: DGField, eos: EosParams):
    P = cons_to_prim(field_.U, eos)
    W = 1.0 / np.sqrt(1.0 - np.sum(P[..., VELOCITY] ** 2, axis=-1))
    eta, _ = entropy_pair_prim(P, eos.gamma)
    columns = [P[..., RHO], P[..., VX], P[..., VY], P[..., VZ], P[..., PRES],
               P[..., BX], P[..., BY], P[..., BZ], W, eta]
    coords = field_.mesh.node_coordinates(field_.op)
    return np.column_stack([np.ravel(c) for c in coords + columns])


def write_metadata(path: str, values: dict) -> str:
    """Flat key=value sidecar next to `path`."""
    meta_path = f"{path}.meta"
    with open(meta_path, "w") as f:
        for key, value in values.items():
            f.write(f"{key}={value}\n")
    return meta_path


def read_metadata(path: str) -> dict:
    return dict(dotenv_values(path if path.endswith(".meta") else f"{path}.meta"))


def _metadata(field_: DGField, problem_name: str, extra: Optional[dict]):
    meta = {
        "problem": problem_name,
        "dimension": field_.mesh.dimension,
        "cells": "x".join(str(n) for n in field_.mesh.cells),
        "lower": ",".join(repr(v) for v in field_.mesh.lower),
        "upper": ",".join(repr(v) for v in field_.mesh.upper),
        "degree": field_.op.r,
        "time": repr(float(field_.t)),
        "build": git_describe(),
    }
    meta.update(extra or {})
    return meta


def _write_table(field_: DGField, path: str, eos: EosParams, problem_name: str, extra: Optional[dict], axes):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    header = ",".join(axes + PROFILE_COLUMNS)
    np.savetxt(path, _profile_table(field_, eos), delimiter=",", header=header, comments="", fmt=NUMBER_FORMAT)
    write_metadata(path, _metadata(field_, problem_name, extra))
    logger.info("wrote %s", path)
    return path


def write_profile(field_: DGField, path: str, eos: EosParams, problem_name: str = "",
                  extra: Optional[dict] = None) -> str:
    """1D nodal profile: one row per node, cells in order."""
    if field_.mesh.dimension != 1:
        raise ConfigError("write_profile expects a 1D field; use write_grid")
    return _write_table(field_, path, eos, problem_name, extra, ("x",))


def write_grid(field_: DGField, path: str, eos: EosParams, problem_name: str = "",
               extra: Optional[dict] = None) -> str:
    """2D nodal grid, rows in (i, j, l, m) order."""
    if field_.mesh.dimension != 2:
        raise ConfigError("write_grid expects a 2D field; use write_profile")
    return _write_table(field_, path, eos, problem_name, extra, ("x", "y"))


def read_profile(path: str):
    """(column names, data) of a profile or grid file."""
    with open(path) as f:
        names = f.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return names, data


def write_entropy_series(samples, path: str) -> str:
    """samples: iterable of (step, time, entropy)."""
    data = np.asarray(list(samples), dtype=float).reshape(-1, 3)
    np.savetxt(path, data, delimiter=",", header=ENTROPY_HEADER, comments="", fmt=NUMBER_FORMAT)
    logger.info("wrote %s (%d samples)", path, len(data))
    return path


def entropy_increases(values, slack: float = 1e-12) -> list:
    """Indices k where value[k] exceeds value[k-1] by more than slack * |value[k-1]|."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return []
    rise = values[1:] - values[:-1]
    return [int(k) + 1 for k in np.nonzero(rise > slack * np.abs(values[:-1]))[0]]


def write_convergence_table(rows, path: str) -> str:
    """CSV of errors and orders; the first level has empty orders."""
    def fmt(value):
        return "" if value is None else NUMBER_FORMAT % value

    with open(path, "w") as f:
        f.write(CONVERGENCE_HEADER + "\n")
        for row in rows:
            r = row.report
            f.write(",".join([str(r.n), fmt(r.l1), fmt(row.order_l1), fmt(r.l2), fmt(row.order_l2),
                              fmt(r.linf), fmt(row.order_linf)]) + "\n")
    logger.info("wrote %s", path)
    return path
