"""Bar-chart discretization: replace f on every bin by its bin average.

The discretization f_n of an integrable f takes on each bin B_j the
constant value (1/|B_j|) * integral of f over B_j.  It is the L2
projection onto functions constant per bin, is idempotent, contracts the
sup norm, and its squared norm equals sum_j |I_j|^2 / |B_j| where I_j is
the raw bin integral; that identity connects it to the measurement
amplitudes when f = conj(phi)*psi.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grids import ConcatenatedGrid, GridLevel, ProductGrid
from .measurement import PER_BIN_LIMIT, bar_norm_squared
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    cell_integrals,
    _eval_any,
    _gl_rule,
    _tensor_nodes,
)
from .states import ONE, SeparableFunction, WaveFunction, product_field

__all__ = [
    "DiscretizedFunction",
    "discretize",
    "discretization_error",
    "norm_identity_check",
]


@dataclass
class DiscretizedFunction:
    """Piecewise-constant bar chart of a source function on a grid level."""

    level: GridLevel
    averages: np.ndarray
    source: object = None

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 0
        if pts.ndim <= 1:
            pts = np.atleast_1d(pts)
            pts = pts[:, None] if self.level.d == 1 else pts[None, :]
        if isinstance(self.level, ProductGrid):
            idx = self.level.locate_many(pts)
        else:
            idx = np.array([self.level.locate(p) for p in pts])
        out = self.averages[idx]
        return out[0] if scalar else out

    def __call__(self, *coords) -> np.ndarray:
        if len(coords) == 1:
            return self.evaluate(coords[0])
        return self.evaluate(np.stack([np.asarray(c, dtype=float)
                                       for c in coords], axis=-1))

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.averages) ** 2 * self.level.volumes()))


def _bin_integrals_separable(f: SeparableFunction, part: ProductGrid,
                             cfg: QuadratureConfig) -> np.ndarray:
    total = None
    for coeff, factors in f.terms:
        term = None
        for k in range(part.d):
            vals, _ = cell_integrals(ONE, factors[k], part.breakpoints[k], cfg)
            term = vals if term is None else np.multiply.outer(term, vals)
        term = coeff * term.ravel()
        total = term if total is None else total + term
    return total


def _bin_integrals_callable(f: Callable, part: ProductGrid,
                            cfg: QuadratureConfig) -> np.ndarray:
    pts, w = _tensor_nodes(part.breakpoints, cfg.points_per_axis_per_bin)
    vals = _eval_any(f, pts)
    p = cfg.points_per_axis_per_bin
    per_cell = (vals * w).reshape([m * p for m in part.shape])
    for k in range(part.d):
        per_cell = per_cell.reshape(
            per_cell.shape[:k] + (part.shape[k], p) + per_cell.shape[k + 1:]
        ).sum(axis=k + 1)
    return per_cell.ravel()


def discretize(f, level: GridLevel, cfg: QuadratureConfig = DEFAULT_CONFIG,
               allow_large: bool = False) -> DiscretizedFunction:
    """Per-bin averages of f on the grid level.

    ``f`` may be a separable-sum function (wavefunctions, products
    conj(phi)*psi) or a plain callable of the coordinates.  Bin integrals
    use the same exact-first path as the measurement module.
    """
    if level.num_bins > PER_BIN_LIMIT and not allow_large:
        raise ValueError(f"{level.num_bins} bins exceed the size guard; "
                         "pass allow_large=True to override")
    parts = ([level] if isinstance(level, ProductGrid)
             else list(level.parts) if isinstance(level, ConcatenatedGrid)
             else None)
    if parts is not None:
        chunks = []
        for part in parts:
            if isinstance(f, SeparableFunction):
                chunks.append(_bin_integrals_separable(f, part, cfg))
            else:
                chunks.append(_bin_integrals_callable(f, part, cfg))
        integrals = np.concatenate(chunks)
    else:
        from .quadrature import bin_inner_product
        if isinstance(f, SeparableFunction):
            integrals = np.array(
                [bin_inner_product(_one_like(f), f, b, cfg).value
                 for b in level.bins()])
        else:
            vals = []
            for b in level.bins():
                pts, w = _tensor_nodes(
                    tuple(np.array([e.lo, e.hi]) for e in b.edges),
                    cfg.points_per_axis_per_bin)
                vals.append(np.dot(w, _eval_any(f, pts)))
            integrals = np.asarray(vals)
    return DiscretizedFunction(level=level,
                               averages=integrals / level.volumes(),
                               source=f)


def _one_like(f: SeparableFunction) -> SeparableFunction:
    return SeparableFunction(domain=f.domain,
                             terms=((1.0 + 0.0j, (ONE,) * f.d),), label="1")


def discretization_error(f, level: GridLevel,
                         cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """L2 distance ||f_n - f|| between f and its bar chart on the level."""
    disc = discretize(f, level, cfg)
    parts = ([level] if isinstance(level, ProductGrid)
             else list(level.parts) if isinstance(level, ConcatenatedGrid)
             else None)
    total = 0.0
    offset = 0
    if parts is not None:
        p = cfg.points_per_axis_per_bin
        xi, wi = _gl_rule(p)
        for part in parts:
            pts, w = _tensor_nodes(part.breakpoints, p)
            vals = _eval_any(f, pts)
            per_cell = vals.reshape([m * p for m in part.shape])
            avg = disc.averages[offset:offset + part.num_bins].reshape(part.shape)
            expanded = avg
            for k in range(part.d):
                expanded = np.repeat(expanded, p, axis=k)
            diff2 = np.abs(per_cell - expanded).ravel() ** 2
            total += float(np.real(np.dot(w, diff2)))
            offset += part.num_bins
    else:
        for j, b in enumerate(level.bins()):
            pts, w = _tensor_nodes(
                tuple(np.array([e.lo, e.hi]) for e in b.edges),
                cfg.points_per_axis_per_bin)
            diff2 = np.abs(_eval_any(f, pts) - disc.averages[j]) ** 2
            total += float(np.real(np.dot(w, diff2)))
    return float(np.sqrt(max(total, 0.0)))


def norm_identity_check(phi: WaveFunction, psi: WaveFunction, level: GridLevel,
                        cfg: QuadratureConfig = DEFAULT_CONFIG
                        ) -> tuple[float, float]:
    """(lhs, rhs) of ||f_n||^2 = sum_j |<phi|P_j psi>|^2 / |B_j|, f = conj(phi)psi.

    The lhs comes from the discretizer's bin averages, the rhs from the
    measurement module's amplitudes; the identity is exact, so any gap
    isolates an integration bug.
    """
    f = product_field(phi, psi)
    lhs = discretize(f, level, cfg).norm_squared()
    rhs = bar_norm_squared(psi, phi, level, cfg)
    return lhs, rhs
