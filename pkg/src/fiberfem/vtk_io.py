"""Legacy VTK writers (ASCII, file version 3.0) for meshes and fields.

The background mesh exports as an unstructured grid of hexahedra, fiber
networks as polylines.  Vector point data (displacements) can be attached
to either.  ``read_vtk`` is a minimal reader for the files written here,
used to validate round trips.
"""

from __future__ import annotations

import numpy as np

from .mesh import FiberNetwork, HexMesh

# local vertex order k = kx + 2ky + 4kz mapped to VTK_HEXAHEDRON order
_HEX_PERM = (0, 1, 3, 2, 4, 5, 7, 6)
_VTK_HEXAHEDRON = 12
_VTK_POLY_LINE = 4


def _header(title: str) -> list[str]:
    return ["# vtk DataFile Version 3.0", title, "ASCII",
            "DATASET UNSTRUCTURED_GRID"]


def _format_points(points: np.ndarray) -> list[str]:
    lines = [f"POINTS {points.shape[0]} double"]
    lines += [" ".join(f"{v:.12g}" for v in p) for p in points]
    return lines


def _format_point_data(n_points: int, point_data) -> list[str]:
    if not point_data:
        return []
    lines = [f"POINT_DATA {n_points}"]
    for name, values in point_data.items():
        values = np.asarray(values, float).reshape(n_points, 3)
        lines.append(f"VECTORS {name} double")
        lines += [" ".join(f"{v:.12g}" for v in row) for row in values]
    return lines


def write_hex_vtk(mesh: HexMesh, path, point_data=None) -> None:
    """Write the background mesh, optionally with named vector fields."""
    lines = _header("background mesh") + _format_points(mesh.vertices)
    cells = mesh.cell_vertices[:, _HEX_PERM]
    lines.append(f"CELLS {mesh.n_cells} {mesh.n_cells * 9}")
    lines += ["8 " + " ".join(str(v) for v in row) for row in cells]
    lines.append(f"CELL_TYPES {mesh.n_cells}")
    lines += [str(_VTK_HEXAHEDRON)] * mesh.n_cells
    lines += _format_point_data(mesh.n_vertices, point_data)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_fiber_vtk(network: FiberNetwork, path, point_data=None) -> None:
    """Write fiber centerlines as polylines, one cell per fiber."""
    points = np.vstack([c.nodes for c in network.curves])
    lines = _header("fiber network") + _format_points(points)
    offsets = network.node_offsets()
    sizes = [c.nodes.shape[0] for c in network.curves]
    total = sum(s + 1 for s in sizes)
    lines.append(f"CELLS {len(network)} {total}")
    for off, size in zip(offsets, sizes):
        lines.append(f"{size} " + " ".join(str(off + i) for i in range(size)))
    lines.append(f"CELL_TYPES {len(network)}")
    lines += [str(_VTK_POLY_LINE)] * len(network)
    lines += _format_point_data(points.shape[0], point_data)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vtk(path) -> dict:
    """Parse a file written by this module.

    Returns a dict with ``points`` (n, 3), ``cells`` (list of index
    lists), ``cell_types`` (list of int) and ``vectors`` (name -> (n, 3)).
    """
    with open(path) as fh:
        tokens_by_line = [line.split() for line in fh]
    out = {"points": None, "cells": [], "cell_types": [], "vectors": {}}
    i = 0
    n_lines = len(tokens_by_line)
    if not tokens_by_line or tokens_by_line[0][:5] != "# vtk DataFile Version 3.0".split():
        raise ValueError("not a legacy VTK 3.0 file")
    while i < n_lines:
        tok = tokens_by_line[i]
        if not tok:
            i += 1
            continue
        key = tok[0].upper()
        if key == "POINTS":
            n = int(tok[1])
            rows = tokens_by_line[i + 1: i + 1 + n]
            out["points"] = np.array([[float(v) for v in r] for r in rows])
            i += 1 + n
        elif key == "CELLS":
            n = int(tok[1])
            for r in tokens_by_line[i + 1: i + 1 + n]:
                size = int(r[0])
                if size != len(r) - 1:
                    raise ValueError("cell size does not match its index count")
                out["cells"].append([int(v) for v in r[1:]])
            i += 1 + n
        elif key == "CELL_TYPES":
            n = int(tok[1])
            out["cell_types"] = [int(r[0]) for r in tokens_by_line[i + 1: i + 1 + n]]
            i += 1 + n
        elif key == "VECTORS":
            name = tok[1]
            n = out["points"].shape[0]
            rows = tokens_by_line[i + 1: i + 1 + n]
            out["vectors"][name] = np.array([[float(v) for v in r] for r in rows])
            i += 1 + n
        else:
            i += 1
    if out["points"] is None:
        raise ValueError("file carries no POINTS block")
    return out
