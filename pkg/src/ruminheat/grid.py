"""Sampled sections of E0^h on truncated uniform grids.

A grid covers the box [-L_1, L_1] x ... x [-L_{2n+1}, L_{2n+1}] in the
coordinate order (x_1..x_n, y_1..y_n, t) with an odd number of points per
axis so the origin is a node.  Values outside the box are treated as zero
(zero-extension boundary policy); the fraction of the l1 mass within three
cells of the boundary is tracked as the systematic-truncation diagnostic.

Sections carry their components in the adapted E0^h frame, stored
component-major in memory as (ncomp, *shape) float64 arrays; the on-disk
binary format is node-major / component-minor with a JSON sidecar.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .group import GroupPoint, group_mul, inverse


@dataclass(frozen=True)
class GridSpec:
    """Uniform symmetric grid on the group of index n."""

    n: int
    shape: tuple
    half_widths: tuple

    def __post_init__(self):
        axes = 2 * self.n + 1
        if len(self.shape) != axes or len(self.half_widths) != axes:
            raise ValueError("expected %d axes" % axes)
        if any(m < 3 or m % 2 == 0 for m in self.shape):
            raise ValueError("each axis needs an odd point count >= 3")
        if any(w <= 0 for w in self.half_widths):
            raise ValueError("half widths must be positive")

    @staticmethod
    def cube(n: int, points: int, half_width: float, t_half_width: float | None = None) -> "GridSpec":
        """Same point count on every axis; t extent defaults to (half_width)^2."""
        axes = 2 * n + 1
        t_hw = half_width**2 if t_half_width is None else t_half_width
        return GridSpec(n, (points,) * axes, (half_width,) * (2 * n) + (t_hw,))

    @property
    def spacing(self) -> tuple:
        return tuple(2.0 * w / (m - 1) for w, m in zip(self.half_widths, self.shape))

    @property
    def nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_coords(self, axis: int) -> np.ndarray:
        m = self.shape[axis]
        w = self.half_widths[axis]
        return np.linspace(-w, w, m)

    def meshgrid(self):
        return np.meshgrid(*[self.axis_coords(a) for a in range(len(self.shape))], indexing="ij")

    def coordinate_field(self, axis: int) -> np.ndarray:
        """Broadcast coordinate values of one axis over the full grid."""
        m = self.shape[axis]
        view = [1] * len(self.shape)
        view[axis] = m
        return np.broadcast_to(self.axis_coords(axis).reshape(view), self.shape)


class GridSection:
    """Sampled section of E0^h: data[(component, *node index)]."""

    def __init__(self, spec: GridSpec, degree: int, data: np.ndarray):
        data = np.asarray(data, dtype=np.float64)
        if data.shape[1:] != spec.shape:
            raise ValueError("data does not match the grid shape")
        self.spec = spec
        self.degree = degree
        self.data = data

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @staticmethod
    def zeros(spec: GridSpec, degree: int, ncomp: int) -> "GridSection":
        return GridSection(spec, degree, np.zeros((ncomp,) + spec.shape))

    @staticmethod
    def from_function(spec: GridSpec, degree: int, funcs: Sequence[Callable]) -> "GridSection":
        """Sample per-component callables of the grid coordinates."""
        coords = spec.meshgrid()
        data = np.stack([np.asarray(f(*coords), dtype=np.float64) for f in funcs])
        return GridSection(spec, degree, data)

    def copy(self) -> "GridSection":
        return GridSection(self.spec, self.degree, self.data.copy())

    def flat(self) -> np.ndarray:
        """Component-major flattened vector used by the linear solvers."""
        return self.data.reshape(self.ncomp * self.spec.nodes)

    @staticmethod
    def from_flat(spec: GridSpec, degree: int, ncomp: int, v: np.ndarray) -> "GridSection":
        return GridSection(spec, degree, v.reshape((ncomp,) + spec.shape))

    def __add__(self, other: "GridSection") -> "GridSection":
        self._check(other)
        return GridSection(self.spec, self.degree, self.data + other.data)

    def __sub__(self, other: "GridSection") -> "GridSection":
        self._check(other)
        return GridSection(self.spec, self.degree, self.data - other.data)

    def scale(self, c: float) -> "GridSection":
        return GridSection(self.spec, self.degree, c * self.data)

    def _check(self, other: "GridSection"):
        if self.spec != other.spec or self.data.shape != other.data.shape:
            raise ValueError("grid or component mismatch")


# -- quadrature -------------------------------------------------------------


def inner_product(u: GridSection, v: GridSection) -> float:
    """Riemann-sum L2 pairing with the fiber product of the adapted frame."""
    u._check(v)
    return float(np.vdot(u.data, v.data)) * u.spec.cell_volume


def l2_norm(u: GridSection) -> float:
    return float(np.sqrt(max(inner_product(u, u), 0.0)))


def lp_norm(u: GridSection, p: float) -> float:
    """Cell-volume weighted l^p norm of the pointwise fiber norm."""
    fiber = np.sqrt(np.sum(u.data**2, axis=0))
    if p == np.inf:
        return float(fiber.max(initial=0.0))
    return float((np.sum(fiber**p) * u.spec.cell_volume) ** (1.0 / p))


def total_integral(u: GridSection) -> np.ndarray:
    """Componentwise integral (Riemann sum)."""
    return u.data.reshape(u.ncomp, -1).sum(axis=1) * u.spec.cell_volume


def boundary_mass(u: GridSection, cells: int = 3) -> float:
    """Fraction of the l1 mass within `cells` cells of the box boundary."""
    fiber = np.abs(u.data).sum(axis=0)
    total = float(fiber.sum())
    if total == 0.0:
        return 0.0
    core = fiber[tuple(slice(cells, m - cells) for m in u.spec.shape)]
    return float((total - core.sum()) / total)


# -- resampling and group convolution ----------------------------------------


def sample_at(u: GridSection, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation at physical coordinates, zero outside.

    `points` has shape (naxes, ...); returns (ncomp, ...).
    """
    spec = u.spec
    idx = [
        (points[a] + spec.half_widths[a]) / spec.spacing[a]
        for a in range(len(spec.shape))
    ]
    idx = np.stack(idx)
    out = np.empty((u.ncomp,) + points.shape[1:])
    for c in range(u.ncomp):
        out[c] = ndimage.map_coordinates(u.data[c], idx, order=1, mode="constant", cval=0.0)
    return out


def dilate_resample(u: GridSection, r: float) -> GridSection:
    """Sample u at the dilated nodes: output(p) = u(delta_{1/r} p).

    For r >= 1 the sampling stays inside the box; r < 1 would read outside
    the zero-extension region and is rejected.
    """
    if r < 1.0:
        raise ValueError("dilate_resample needs r >= 1 to stay inside the box")
    spec = u.spec
    n = spec.n
    coords = spec.meshgrid()
    scaled = [coords[a] / r for a in range(2 * n)] + [coords[2 * n] / (r * r)]
    return GridSection(spec, u.degree, sample_at(u, np.stack(scaled)))


def convolve_small(u: GridSection, kernel: GridSection, support_limit: int = 17) -> GridSection:
    """Group convolution (u * k)(p) = sum_q u(q) k(q^{-1} p) vol, scalar fields.

    The kernel is sampled on its own (small) grid; the sum runs over the
    kernel's nodes c via (u * k)(p) = sum_c u(p c^{-1}) k(c) vol_k, which
    needs one interpolated right-translate of u per kernel node.  Cost is
    O(kernel nodes x grid nodes), guarded by `support_limit` per axis.
    """
    if u.ncomp != 1 or kernel.ncomp != 1:
        raise ValueError("group convolution is implemented for scalar fields")
    kspec = kernel.spec
    if max(kspec.shape) > support_limit:
        raise ValueError("kernel support exceeds the direct-summation guard")
    spec = u.spec
    n = spec.n
    coords = np.stack(spec.meshgrid())  # (axes, *shape)
    out = np.zeros(spec.shape)
    vol_k = kspec.cell_volume
    kaxes = [kspec.axis_coords(a) for a in range(len(kspec.shape))]
    for kidx in np.ndindex(*kspec.shape):
        kval = float(kernel.data[0][kidx])
        if kval == 0.0:
            continue
        c = [kaxes[a][kidx[a]] for a in range(len(kspec.shape))]
        cpoint = GroupPoint.from_coords(c, n)
        cinv = inverse(cpoint)
        # q = p * c^{-1} componentwise over the full grid
        qx = [coords[a] + cinv.x[a] for a in range(n)]
        qy = [coords[n + a] + cinv.y[a] for a in range(n)]
        twist = sum(coords[a] * cinv.y[a] - coords[n + a] * cinv.x[a] for a in range(n))
        qt = coords[2 * n] + cinv.t + 0.5 * twist
        pts = np.stack(qx + qy + [qt])
        out += kval * sample_at(GridSection(spec, 0, u.data), pts)[0]
    return GridSection(spec, 0, out[np.newaxis] * vol_k)


def gaussian_bump(spec: GridSpec, widths, center=None) -> GridSection:
    """Unnormalized tensor Gaussian exp(-sum (c_a - mu_a)^2 / (2 w_a^2))."""
    center = center or (0.0,) * len(spec.shape)
    field = np.zeros(spec.shape)
    acc = np.zeros(spec.shape)
    for a in range(len(spec.shape)):
        c = spec.coordinate_field(a)
        acc = acc + ((c - center[a]) / widths[a]) ** 2
    field = np.exp(-0.5 * acc)
    return GridSection(spec, 0, field[np.newaxis])


def mollifier(spec: GridSpec, widths) -> GridSection:
    """Tensor Gaussian scaled to unit discrete integral."""
    g = gaussian_bump(spec, widths)
    mass = float(total_integral(g)[0])
    return g.scale(1.0 / mass)


# -- serialization -----------------------------------------------------------

MAGIC = b"RGRD"


def save_section(path: str, u: GridSection):
    """Binary payload (node-major, component-minor float64 LE) + JSON sidecar."""
    header = {
        "n": u.spec.n,
        "shape": list(u.spec.shape),
        "half_widths": list(u.spec.half_widths),
        "degree": u.degree,
        "ncomp": u.ncomp,
        "dtype": "<f8",
        "layout": "node-major,component-minor",
    }
    payload = np.ascontiguousarray(np.moveaxis(u.data, 0, -1), dtype="<f8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", 0))  # format version
        f.write(payload.tobytes())
    with open(path + ".json", "w") as f:
        json.dump(header, f, sort_keys=True, indent=1)
        f.write("\n")


def load_section(path: str) -> GridSection:
    with open(path + ".json") as f:
        header = json.load(f)
    spec = GridSpec(header["n"], tuple(header["shape"]), tuple(header["half_widths"]))
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise ValueError("not a grid section file")
        f.read(4)
        payload = np.frombuffer(f.read(), dtype="<f8")
    data = payload.reshape(tuple(header["shape"]) + (header["ncomp"],))
    return GridSection(spec, header["degree"], np.moveaxis(data, -1, 0).copy())


def section_sha256(u: GridSection) -> str:
    return hashlib.sha256(np.ascontiguousarray(u.data).tobytes()).hexdigest()


def export_axis_csv(path: str, u: GridSection, axis: int):
    """CSV of the 1-D slice through the origin along one axis."""
    spec = u.spec
    center = [m // 2 for m in spec.shape]
    rows = []
    coords = spec.axis_coords(axis)
    for i, c in enumerate(coords):
        idx = list(center)
        idx[axis] = i
        vals = [u.data[(comp,) + tuple(idx)] for comp in range(u.ncomp)]
        rows.append([c] + vals)
    with open(path, "w") as f:
        f.write(",".join(["coord"] + ["comp%d" % k for k in range(u.ncomp)]) + "\n")
        for row in rows:
            f.write(",".join("%.17g" % v for v in row) + "\n")
