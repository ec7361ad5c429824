"""Steady density profiles on [0, 1] and the hydrostatic background."""

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonPositiveDensity
from .grid import (
    SpectralGrid,
    barycentric_eval,
    barycentric_weights,
    build_grid,
    chebyshev_lobatto_nodes,
    differentiation_matrix,
    lobatto_barycentric_weights,
)

MIN_TABLE_NODES = 8

# 10x-oversampled uniform points on top of the collocation family: smooth
# profiles have their extrema either at Lobatto endpoints or captured by the
# oversampling.
_SAMPLE_N = 128


def evaluation_points(n: int = _SAMPLE_N) -> np.ndarray:
    return np.union1d(chebyshev_lobatto_nodes(n), np.linspace(0.0, 1.0, 10 * n + 1))


@dataclass(frozen=True, eq=False)
class DensityProfile:
    """Steady density rho(y) with derivative drho(y) and cached extrema."""

    kind: str  # "analytic-preset" | "tabulated"
    name: str
    rho: Callable[[np.ndarray], np.ndarray]
    drho: Callable[[np.ndarray], np.ndarray]
    inf_rho: float
    sup_rho: float
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ValidationReport:
    positive: bool
    rt_condition: bool
    y0_witness: float | None


@dataclass(frozen=True)
class SlabConfig:
    """Physical parameters: viscosity, gravity, slip coefficients, period scale."""

    mu: float
    g: float = 1.0
    k0: float = 0.0
    k1: float = 0.0
    L: float = 1.0

    def __post_init__(self):
        for nm in ("mu", "g", "k0", "k1", "L"):
            if not np.isfinite(getattr(self, nm)):
                raise ValueError(f"{nm} must be finite")
        if self.mu <= 0:
            raise ValueError("viscosity mu must be positive")
        if self.g < 0:
            raise ValueError("gravity g must be nonnegative")
        if self.L <= 0:
            raise ValueError("period scale L must be positive")


def _finish(kind: str, name: str, rho, drho, params=None) -> DensityProfile:
    ys = evaluation_points()
    r = np.asarray(rho(ys), dtype=float)
    return DensityProfile(
        kind=kind,
        name=name,
        rho=rho,
        drho=drho,
        inf_rho=float(r.min()),
        sup_rho=float(r.max()),
        params=dict(params or {}),
    )


def preset_profile(name: str, **params) -> DensityProfile:
    """Analytic presets: "exp", "linear-up", "linear-down", "tanh-layer".

    The tanh layer takes a centre y_c and width w (defaults 0.5 and 0.1).
    """
    if name == "exp":
        return _finish("analytic-preset", name, np.exp, np.exp)
    if name == "linear-up":
        return _finish(
            "analytic-preset", name,
            lambda y: 1.0 + np.asarray(y, dtype=float),
            lambda y: np.ones_like(np.asarray(y, dtype=float)),
        )
    if name == "linear-down":
        return _finish(
            "analytic-preset", name,
            lambda y: 2.0 - np.asarray(y, dtype=float),
            lambda y: -np.ones_like(np.asarray(y, dtype=float)),
        )
    if name == "tanh-layer":
        y_c = float(params.get("y_c", 0.5))
        w = float(params.get("w", 0.1))
        if w <= 0:
            raise ValueError("tanh-layer width w must be positive")
        return _finish(
            "analytic-preset", name,
            lambda y: 2.0 + np.tanh((np.asarray(y, dtype=float) - y_c) / w),
            lambda y: (1.0 / np.cosh((np.asarray(y, dtype=float) - y_c) / w) ** 2) / w,
            {"y_c": y_c, "w": w},
        )
    raise ValueError(f"unknown preset {name!r}")


def constant_profile(value: float = 1.0) -> DensityProfile:
    """Uniform density; the gravitational form vanishes identically."""
    return _finish(
        "analytic-preset", "const",
        lambda y: np.full_like(np.asarray(y, dtype=float), value),
        lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        {"value": value},
    )


def tabulated_profile(y: np.ndarray, rho_values: np.ndarray) -> DensityProfile:
    """Global polynomial through tabulated (y, rho) nodes; derivative by
    spectral differentiation of the interpolant."""
    y = np.asarray(y, dtype=float)
    r = np.asarray(rho_values, dtype=float)
    if y.size < MIN_TABLE_NODES:
        raise ValueError(f"tabulated profile needs >= {MIN_TABLE_NODES} nodes, got {y.size}")
    if y.shape != r.shape:
        raise ValueError("y and rho columns differ in length")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(r))):
        raise ValueError("tabulated profile contains non-finite values")
    if np.any(np.diff(y) <= 0):
        raise ValueError("tabulated y values must be strictly increasing")
    if abs(y[0]) > 1e-12 or abs(y[-1] - 1.0) > 1e-12:
        raise ValueError("tabulated y values must cover [0, 1]")
    y = y.copy()
    y[0], y[-1] = 0.0, 1.0

    bw = barycentric_weights(y)
    dr = differentiation_matrix(y, bw) @ r

    def rho_fn(t):
        return barycentric_eval(y, bw, r, t)

    def drho_fn(t):
        return barycentric_eval(y, bw, dr, t)

    return _finish("tabulated", "tabulated", rho_fn, drho_fn, {"nodes": y.size})


def profile_from_csv(path) -> DensityProfile:
    """Read a two-column "y,rho" file; a non-numeric first row is a header."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    ys, rs = [], []
    for row in csv.reader(io.StringIO(text)):
        if not row or not row[0].strip():
            continue
        try:
            ys.append(float(row[0]))
            rs.append(float(row[1]))
        except ValueError:
            if not ys:
                continue  # header row
            raise
    return tabulated_profile(np.array(ys), np.array(rs))


def validate_profile(p: DensityProfile) -> ValidationReport:
    """Positivity and the heavy-over-light condition.

    rt_condition is true iff rho' > 0 at some sampled point; the witness is
    the sampled argmax of rho'.  Raises NonPositiveDensity (naming the
    offending y) when the sampled infimum is not positive.
    """
    ys = evaluation_points()
    r = np.asarray(p.rho(ys), dtype=float)
    i = int(np.argmin(r))
    if r[i] <= 0.0:
        raise NonPositiveDensity(f"density not positive: rho({ys[i]:.6g}) = {r[i]:.6g}")
    # the heavy-over-light condition concerns interior points only
    inner = (ys > 0.0) & (ys < 1.0)
    yi = ys[inner]
    d = np.asarray(p.drho(yi), dtype=float)
    rt = bool(np.any(d > 0.0))
    y0 = float(yi[int(np.argmax(d))]) if rt else None
    return ValidationReport(positive=True, rt_condition=rt, y0_witness=y0)


def hydrostatic_pressure(p: DensityProfile, g: float, grid: SpectralGrid | None = None):
    """Hydrostatic pressure pbar(y) with pbar(0) = 0 and pbar' = -g rho.

    The antiderivative is obtained by inverting the differentiation matrix
    with its first row replaced by the point condition at y = 0; the result
    is returned as the barycentric interpolant through the grid nodes.
    """
    if grid is None:
        grid = build_grid(_SAMPLE_N)
    rho_n = np.asarray(p.rho(grid.nodes), dtype=float)
    A = grid.D1.copy()
    A[0, :] = 0.0
    A[0, 0] = 1.0
    rhs = rho_n.copy()
    rhs[0] = 0.0
    q = np.linalg.solve(A, rhs)
    q -= q[0]  # pin the anchor value exactly despite solver roundoff
    pbar_nodes = -g * q
    bw = lobatto_barycentric_weights(grid.n)

    def pbar(t):
        return barycentric_eval(grid.nodes, bw, pbar_nodes, t)

    return pbar
