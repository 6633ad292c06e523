"""Uniform rectangular grids with homogeneous Neumann boundaries.

Fields are plain ``numpy`` arrays shaped ``grid.shape`` and holding one value
per cell centre. The boundary is handled with even (mirror) ghost cells, so a
ghost takes the value of the adjacent interior cell. Every boundary face then
has zero gradient and zero flux.

Second-derivative convention
----------------------------
``hessian_frobenius_sq`` returns ``sum_ij (d_i d_j f)^2`` over the full
symmetric Hessian, so in 2D a mixed partial is counted twice:
``f_xx^2 + f_yy^2 + 2 f_xy^2``. The discrete Sobolev norms and the gradient
inequality check all use this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MIN_CELLS = 4


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid on ``[0, extent[0]] x ... `` (1D or 2D)."""

    dim: int
    extent: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extent", tuple(float(e) for e in self.extent))
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.extent) != self.dim or len(self.cells) != self.dim:
            raise ValueError("extent and cells need one entry per axis")
        if any(c < MIN_CELLS for c in self.cells):
            raise ValueError(f"need at least {MIN_CELLS} cells per axis, got {self.cells}")
        if any(not (e > 0 and math.isfinite(e)) for e in self.extent):
            raise ValueError(f"extent must be positive, got {self.extent}")

    @classmethod
    def unit(cls, *cells: int) -> "Grid":
        return cls(len(cells), (1.0,) * len(cells), cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(e / c for e, c in zip(self.extent, self.cells))

    @property
    def size(self) -> int:
        return math.prod(self.cells)

    @property
    def measure(self) -> float:
        return math.prod(self.extent)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.h)

    def centers(self) -> list[np.ndarray]:
        """Cell-centre coordinates, one 1D array per axis."""
        return [(np.arange(n) + 0.5) * h for n, h in zip(self.cells, self.h)]

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.centers(), indexing="ij"))

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))

    def check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        return f

    def reflect(self, f: np.ndarray, axis: int) -> np.ndarray:
        return np.flip(self.check(f), axis=axis).copy()


def _face_shape(shape, axis):
    s = list(shape)
    s[axis] += 1
    return tuple(s)


def _interior(axis, ndim, sl):
    idx = [slice(None)] * ndim
    idx[axis] = sl
    return tuple(idx)


def gradient_faces(grid: Grid, f: np.ndarray) -> list[np.ndarray]:
    """Normal difference quotients on every face, one array per axis.

    Along axis ``a`` the array has ``cells[a] + 1`` entries. The first and
    last entries are the boundary faces and are exactly zero.
    """
    f = grid.check(f)
    out = []
    for axis, h in enumerate(grid.h):
        g = np.zeros(_face_shape(f.shape, axis))
        g[_interior(axis, f.ndim, slice(1, -1))] = np.diff(f, axis=axis) * (1.0 / h)
        out.append(g)
    return out


def divergence_faces(grid: Grid, fluxes: list[np.ndarray]) -> np.ndarray:
    """Cell divergence of face-normal fluxes (finite-volume difference)."""
    total = None
    for axis, (flux, h) in enumerate(zip(fluxes, grid.h)):
        term = np.diff(flux, axis=axis) * (1.0 / h)
        total = term if total is None else total + term
    return total


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Five-point (three-point in 1D) Laplacian with mirror ghosts.

    Assembled as the divergence of ``gradient_faces``, so both agree bitwise
    and the cell integral telescopes to zero.
    """
    return divergence_faces(grid, gradient_faces(grid, f))


def cell_gradient(grid: Grid, f: np.ndarray) -> list[np.ndarray]:
    """Gradient components at cell centres: mean of the two adjacent faces."""
    comps = []
    for axis, g in enumerate(gradient_faces(grid, f)):
        lo = g[_interior(axis, f.ndim, slice(None, -1))]
        hi = g[_interior(axis, f.ndim, slice(1, None))]
        comps.append(0.5 * (lo + hi))
    return comps


def gradient_magnitude(grid: Grid, f: np.ndarray) -> np.ndarray:
    comps = cell_gradient(grid, f)
    return np.sqrt(sum(c * c for c in comps))


def _padded(f):
    return np.pad(f, 1, mode="edge")


def second_partials(grid: Grid, f: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    """Upper-triangular second partials ``{(i, j): d_i d_j f}`` at cell centres."""
    f = grid.check(f)
    fp = _padded(f)
    nd = f.ndim
    centre = tuple(slice(1, -1) for _ in range(nd))

    def shifted(offsets):
        return fp[tuple(slice(1 + o, fp.shape[k] - 1 + o) for k, o in enumerate(offsets))]

    out = {}
    for i, hi in enumerate(grid.h):
        e = [0] * nd
        e[i] = 1
        plus = shifted(e)
        e[i] = -1
        minus = shifted(e)
        out[(i, i)] = (plus - 2.0 * fp[centre] + minus) / (hi * hi)
        for j in range(i + 1, nd):
            hj = grid.h[j]
            def corner(si, sj):
                o = [0] * nd
                o[i], o[j] = si, sj
                return shifted(o)
            out[(i, j)] = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4.0 * hi * hj)
    return out


def hessian_frobenius_sq(grid: Grid, f: np.ndarray) -> np.ndarray:
    """``|D^2 f|^2`` per cell, mixed partials counted twice (see module doc)."""
    total = grid.zeros()
    for (i, j), d in second_partials(grid, f).items():
        total = total + (1.0 if i == j else 2.0) * d * d
    return total


def cell_integral(grid: Grid, f: np.ndarray) -> float:
    """Midpoint quadrature of ``f`` over the domain."""
    return float(np.sum(grid.check(f)) * grid.cell_volume)


# -- snapshot files ---------------------------------------------------------

def _fmt_tuple(values):
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in values)


def field_header(grid: Grid) -> str:
    return f"# grid dim={grid.dim} cells={_fmt_tuple(grid.cells)} extent={_fmt_tuple(grid.extent)}"


def write_field_csv(path, grid: Grid, f: np.ndarray) -> None:
    """Write a snapshot: header line, then one value per line in row-major order."""
    f = grid.check(f)
    lines = [field_header(grid)]
    lines.extend(repr(float(x)) for x in f.ravel(order="C"))
    Path(path).write_text("\n".join(lines) + "\n")


def read_field_csv(path) -> tuple[Grid, np.ndarray]:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# grid "):
        raise ValueError(f"{path}: missing grid header")
    meta = dict(item.split("=", 1) for item in text[0][len("# grid "):].split())
    grid = Grid(
        int(meta["dim"]),
        tuple(float(x) for x in meta["extent"].split(",")),
        tuple(int(x) for x in meta["cells"].split(",")),
    )
    values = np.array([float(x) for x in text[1:] if x.strip()])
    if values.size != grid.size:
        raise ValueError(f"{path}: expected {grid.size} values, found {values.size}")
    return grid, values.reshape(grid.shape)
