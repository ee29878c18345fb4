"""Rectangular grid schemes on the unit cube and on R^d.

A grid level at resolution index n partitions its domain into half-open
rectangular bins whose edge lengths all lie in [1/(C*n), 1/n] for a ratio
bound C > 1.  Product grids (uniform, jittered) keep one breakpoint array
per axis instead of materialising n^d bin objects; explicit bin lists are
reserved for hand-built partitions.  Grids over R^d are finite unions of
translated unit cubes, each carrying its own product grid, so no bin ever
straddles a cube boundary.

All grid objects are immutable after construction and all operations are
pure, so they are safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

__all__ = [
    "Interval",
    "Bin",
    "GridLevel",
    "ProductGrid",
    "CustomGrid",
    "ConcatenatedGrid",
    "GridScheme",
    "GridValidationReport",
    "InfeasibleGridError",
    "OutOfDomainError",
    "OverlappingCubesError",
    "uniform_grid",
    "jittered_grid",
    "rd_grid",
    "validate_grid",
    "locate_bin",
]

DEFAULT_RATIO_BOUND = 2.0

# absolute slack for edge-length / volume comparisons (per unit cube)
_TOL = 1e-12


class InfeasibleGridError(ValueError):
    """No partition with the requested cell count satisfies the edge bounds."""


class OutOfDomainError(ValueError):
    """Point lies outside the grid's declared domain."""


class OverlappingCubesError(ValueError):
    """Translated unit cubes of an R^d scheme must be pairwise disjoint."""


@dataclass(frozen=True)
class Interval:
    """Half-open interval [lo, hi) with finite endpoints."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x < self.hi


@dataclass(frozen=True)
class Bin:
    """Rectangular half-open cell, one interval per axis."""

    edges: tuple[Interval, ...]

    def __post_init__(self) -> None:
        if len(self.edges) < 1:
            raise ValueError("a bin needs at least one axis")

    @property
    def d(self) -> int:
        return len(self.edges)

    @property
    def volume(self) -> float:
        v = 1.0
        for e in self.edges:
            v *= e.length
        return v

    @property
    def lower(self) -> tuple[float, ...]:
        return tuple(e.lo for e in self.edges)

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(e.hi for e in self.edges)

    def contains(self, point: Sequence[float] | float) -> bool:
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        if pt.size != self.d:
            raise ValueError(f"point has {pt.size} coordinates, bin has {self.d}")
        return all(e.contains(x) for e, x in zip(self.edges, pt))


def _as_point(x, d: int) -> np.ndarray:
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    if pt.size != d:
        raise ValueError(f"point has {pt.size} coordinates, grid has {d}")
    return pt


class GridLevel:
    """Partition of the domain at one resolution index n.

    Concrete subclasses: :class:`ProductGrid`, :class:`CustomGrid`,
    :class:`ConcatenatedGrid`.
    """

    n: int
    d: int
    ratio_bound: float

    @property
    def num_bins(self) -> int:
        raise NotImplementedError

    def bin(self, j: int) -> Bin:
        raise NotImplementedError

    def bins(self) -> Iterator[Bin]:
        for j in range(self.num_bins):
            yield self.bin(j)

    def volumes(self) -> np.ndarray:
        raise NotImplementedError

    def locate(self, x) -> int:
        raise NotImplementedError

    @property
    def domain_bounds(self) -> tuple[tuple[float, float], ...]:
        raise NotImplementedError

    @property
    def domain_volume(self) -> float:
        v = 1.0
        for lo, hi in self.domain_bounds:
            v *= hi - lo
        return v

    @property
    def max_bin_volume(self) -> float:
        return float(self.volumes().max())

    @property
    def min_bin_volume(self) -> float:
        return float(self.volumes().min())


class ProductGrid(GridLevel):
    """Tensor-product grid defined by one breakpoint array per axis.

    Bins are enumerated in C order (axis 0 slowest), so the flat index of
    the cell with per-axis positions (i_0, ..., i_{d-1}) is
    ``ravel_multi_index``.
    """

    def __init__(self, n: int, breakpoints: Sequence[np.ndarray],
                 ratio_bound: float = DEFAULT_RATIO_BOUND):
        if n < 1:
            raise ValueError("resolution index n must be >= 1")
        if ratio_bound <= 1.0:
            raise ValueError("ratio bound C must exceed 1")
        self.n = int(n)
        self.d = len(breakpoints)
        if self.d < 1:
            raise ValueError("need at least one axis")
        self.ratio_bound = float(ratio_bound)
        bps = []
        for bp in breakpoints:
            bp = np.asarray(bp, dtype=float)
            if bp.ndim != 1 or bp.size < 2:
                raise ValueError("each axis needs at least two breakpoints")
            if not np.all(np.diff(bp) > 0):
                raise ValueError("breakpoints must be strictly increasing")
            bp.setflags(write=False)
            bps.append(bp)
        self.breakpoints: tuple[np.ndarray, ...] = tuple(bps)
        self.shape: tuple[int, ...] = tuple(bp.size - 1 for bp in bps)

    @property
    def num_bins(self) -> int:
        return int(np.prod(self.shape))

    def axis_lengths(self, k: int) -> np.ndarray:
        return np.diff(self.breakpoints[k])

    def bin(self, j: int) -> Bin:
        idx = np.unravel_index(j, self.shape)
        return Bin(tuple(
            Interval(float(self.breakpoints[k][i]), float(self.breakpoints[k][i + 1]))
            for k, i in enumerate(idx)
        ))

    def volumes(self) -> np.ndarray:
        out = np.array([1.0])
        for k in range(self.d):
            out = np.multiply.outer(out, self.axis_lengths(k))
        return out.ravel()

    @property
    def max_bin_volume(self) -> float:
        v = 1.0
        for k in range(self.d):
            v *= float(self.axis_lengths(k).max())
        return v

    @property
    def min_bin_volume(self) -> float:
        v = 1.0
        for k in range(self.d):
            v *= float(self.axis_lengths(k).min())
        return v

    def locate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorised bin lookup for an (N, d) array of points."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[1] != self.d:
            raise ValueError(f"points have {pts.shape[1]} coordinates, grid has {self.d}")
        idx = []
        for k in range(self.d):
            bp = self.breakpoints[k]
            i = np.searchsorted(bp, pts[:, k], side="right") - 1
            bad = (pts[:, k] < bp[0]) | (pts[:, k] >= bp[-1])
            if np.any(bad):
                raise OutOfDomainError(
                    f"coordinate {pts[bad][0]} outside [{bp[0]}, {bp[-1]}) on axis {k}")
            idx.append(i)
        return np.ravel_multi_index(tuple(idx), self.shape)

    def locate(self, x) -> int:
        pt = _as_point(x, self.d)
        return int(self.locate_many(pt[None, :])[0])

    @property
    def domain_bounds(self) -> tuple[tuple[float, float], ...]:
        return tuple((float(bp[0]), float(bp[-1])) for bp in self.breakpoints)


class CustomGrid(GridLevel):
    """Explicit bin list, for hand-built partitions."""

    def __init__(self, n: int, bins: Sequence[Bin],
                 ratio_bound: float = DEFAULT_RATIO_BOUND,
                 domain_bounds: Sequence[tuple[float, float]] | None = None):
        if n < 1:
            raise ValueError("resolution index n must be >= 1")
        if not bins:
            raise ValueError("need at least one bin")
        self.n = int(n)
        self.d = bins[0].d
        if any(b.d != self.d for b in bins):
            raise ValueError("all bins must share the same dimension")
        self.ratio_bound = float(ratio_bound)
        self._bins = tuple(bins)
        if domain_bounds is None:
            domain_bounds = tuple((0.0, 1.0) for _ in range(self.d))
        self._domain_bounds = tuple((float(lo), float(hi)) for lo, hi in domain_bounds)

    @property
    def num_bins(self) -> int:
        return len(self._bins)

    def bin(self, j: int) -> Bin:
        return self._bins[j]

    def volumes(self) -> np.ndarray:
        return np.array([b.volume for b in self._bins])

    def locate(self, x) -> int:
        pt = _as_point(x, self.d)
        for j, b in enumerate(self._bins):
            if b.contains(pt):
                return j
        raise OutOfDomainError(f"point {tuple(pt)} not covered by any bin")

    @property
    def domain_bounds(self) -> tuple[tuple[float, float], ...]:
        return self._domain_bounds


class ConcatenatedGrid(GridLevel):
    """Union of per-cube product grids covering a finite list of unit cubes.

    ``index_ranges[l] = (start, stop)`` gives the flat bin indices that fall
    inside cube l; bins never straddle a cube boundary.
    """

    def __init__(self, n: int, parts: Sequence[ProductGrid],
                 origins: Sequence[tuple[float, ...]],
                 ratio_bound: float = DEFAULT_RATIO_BOUND):
        if not parts:
            raise ValueError("need at least one cube")
        self.n = int(n)
        self.d = parts[0].d
        self.ratio_bound = float(ratio_bound)
        self.parts = tuple(parts)
        self.origins = tuple(tuple(float(a) for a in o) for o in origins)
        counts = [p.num_bins for p in parts]
        stops = np.cumsum(counts)
        starts = stops - np.asarray(counts)
        self.index_ranges = tuple((int(a), int(b)) for a, b in zip(starts, stops))

    @property
    def num_bins(self) -> int:
        return self.index_ranges[-1][1]

    def bin(self, j: int) -> Bin:
        for (start, stop), part in zip(self.index_ranges, self.parts):
            if start <= j < stop:
                return part.bin(j - start)
        raise IndexError(j)

    def volumes(self) -> np.ndarray:
        return np.concatenate([p.volumes() for p in self.parts])

    def locate(self, x) -> int:
        pt = _as_point(x, self.d)
        for (start, _), part in zip(self.index_ranges, self.parts):
            bounds = part.domain_bounds
            if all(lo <= c < hi for c, (lo, hi) in zip(pt, bounds)):
                return start + part.locate(pt)
        raise OutOfDomainError(f"point {tuple(pt)} outside every cube")

    @property
    def domain_bounds(self) -> tuple[tuple[float, float], ...]:
        # hull, not an exact description when the cube set is not a box
        los = [min(p.domain_bounds[k][0] for p in self.parts) for k in range(self.d)]
        his = [max(p.domain_bounds[k][1] for p in self.parts) for k in range(self.d)]
        return tuple((lo, hi) for lo, hi in zip(los, his))

    @property
    def domain_volume(self) -> float:
        return float(len(self.parts))

    @property
    def max_bin_volume(self) -> float:
        return max(p.max_bin_volume for p in self.parts)

    @property
    def min_bin_volume(self) -> float:
        return min(p.min_bin_volume for p in self.parts)


def uniform_grid(n: int, d: int = 1,
                 ratio_bound: float = DEFAULT_RATIO_BOUND) -> ProductGrid:
    """Even subdivision of [0,1)^d into n^d bins with edges of length 1/n."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    bp = np.arange(n + 1) / n
    bp[-1] = 1.0
    return ProductGrid(n, (bp,) * d, ratio_bound=ratio_bound)


def _auto_cells(n: int, C: float) -> int:
    # mid-range cell count maximises the feasible length spread; the
    # smallest feasible count m = n forces every length to exactly 1/n
    m_max = int(np.floor(C * n * (1.0 + 1e-12) + 1e-9))
    m = int(round(n * (1.0 + C) / 2.0))
    return max(n, min(m, m_max))


def _jitter_axis(n: int, C: float, m: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi = 1.0 / (C * n), 1.0 / n
    u = rng.random(m)
    u /= u.sum()
    lengths = lo + u * (1.0 - m * lo)
    over = lengths > hi
    if over.any():
        excess = float((lengths[over] - hi).sum())
        lengths[over] = hi
        room = hi - lengths
        total_room = float(room.sum())
        if total_room > 0.0:
            # feasibility (m >= n) guarantees excess <= total_room, so one
            # proportional pass keeps every length inside [lo, hi]
            lengths = lengths + excess * room / total_room
    bp = np.empty(m + 1)
    bp[0] = 0.0
    np.cumsum(lengths, out=bp[1:])
    bp[-1] = 1.0
    return bp


def jittered_grid(n: int, d: int = 1, C: float = DEFAULT_RATIO_BOUND,
                  seed: int = 0, cells_per_axis: int | None = None) -> ProductGrid:
    """Randomised partition of [0,1)^d with edge lengths in [1/(C*n), 1/n].

    Per axis, the unit interval is split into ``cells_per_axis`` cells
    (default: a mid-range count between n and C*n) whose lengths are drawn
    from normalised uniform weights and then clipped back into the bound.
    The result is a pure function of (n, d, C, seed, cells_per_axis).

    Raises
    ------
    InfeasibleGridError
        If no partition with the requested cell count can satisfy the
        bounds, i.e. unless n <= cells_per_axis <= C*n.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    if C <= 1.0:
        raise ValueError("ratio bound C must exceed 1")
    m = _auto_cells(n, C) if cells_per_axis is None else int(cells_per_axis)
    if not (n <= m and m <= C * n * (1.0 + 1e-12)):
        raise InfeasibleGridError(
            f"{m} cells of length in [1/({C}*{n}), 1/{n}] cannot tile [0,1): "
            f"need an integer cell count in [{n}, {C * n:g}]")
    bps = []
    for axis in range(d):
        ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(n), axis, m))
        bps.append(_jitter_axis(n, C, m, np.random.default_rng(ss)))
    return ProductGrid(n, bps, ratio_bound=C)


def _cubes_disjoint(a: Sequence[float], b: Sequence[float]) -> bool:
    return any(abs(x - y) >= 1.0 - _TOL for x, y in zip(a, b))


@dataclass(frozen=True)
class GridScheme:
    """Family of grid levels indexed by the resolution n.

    kind is one of "uniform", "jittered", "rd_translated_cubes" or
    "custom"; rd schemes carry a cube list plus the sub-scheme used inside
    every cube.
    """

    kind: str
    d: int = 1
    ratio_bound: float = DEFAULT_RATIO_BOUND
    seed: int = 0
    cells_per_axis: int | None = None
    cubes: tuple[tuple[float, ...], ...] | None = None
    sub_kind: str = "uniform"
    level_factory: Callable[[int], GridLevel] | None = field(
        default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "jittered", "rd_translated_cubes", "custom"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.kind == "custom" and self.level_factory is None:
            raise ValueError("custom scheme needs a level_factory")

    def level(self, n: int) -> GridLevel:
        if self.kind == "uniform":
            return uniform_grid(n, self.d, ratio_bound=self.ratio_bound)
        if self.kind == "jittered":
            return jittered_grid(n, self.d, C=self.ratio_bound,
                                 seed=self.seed, cells_per_axis=self.cells_per_axis)
        if self.kind == "rd_translated_cubes":
            if self.cubes is None:
                raise ValueError("rd scheme needs a cube list")
            return rd_grid(self, n, self.cubes)
        return self.level_factory(n)

    def with_cubes(self, cubes: Sequence[Sequence[float]]) -> "GridScheme":
        """Copy of this scheme turned into an R^d scheme over ``cubes``."""
        sub = self.sub_kind if self.kind == "rd_translated_cubes" else self.kind
        return GridScheme(
            kind="rd_translated_cubes", d=self.d, ratio_bound=self.ratio_bound,
            seed=self.seed, cells_per_axis=self.cells_per_axis,
            cubes=tuple(tuple(float(a) for a in c) for c in cubes),
            sub_kind=sub)

    def describe(self) -> dict:
        out = {"kind": self.kind, "d": self.d, "ratio_bound": self.ratio_bound}
        if self.kind == "jittered" or self.sub_kind == "jittered":
            out["seed"] = self.seed
            out["cells_per_axis"] = self.cells_per_axis
        if self.kind == "rd_translated_cubes":
            out["sub_kind"] = self.sub_kind
            out["num_cubes"] = 0 if self.cubes is None else len(self.cubes)
        return out


def rd_grid(scheme: GridScheme, n: int,
            cube_list: Sequence[Sequence[float]]) -> ConcatenatedGrid:
    """Concatenate per-cube grids over pairwise disjoint translated unit cubes.

    Every cube Q_l = prod_k [a_k, a_k+1) receives its own copy of the
    sub-scheme's level, translated by the cube corner; the returned grid
    records the flat index range of each cube's bins.
    """
    cubes = [tuple(float(a) for a in c) for c in cube_list]
    if not cubes:
        raise ValueError("need at least one cube")
    d = len(cubes[0])
    if any(len(c) != d for c in cubes):
        raise ValueError("all cubes must share the same dimension")
    for i, a in enumerate(cubes):
        for b in cubes[i + 1:]:
            if not _cubes_disjoint(a, b):
                raise OverlappingCubesError(
                    f"cubes at {a} and {b} overlap (corner distance < 1 on every axis)")
    sub = scheme.sub_kind if scheme.kind == "rd_translated_cubes" else scheme.kind
    parts = []
    for ell, corner in enumerate(cubes):
        if sub == "uniform":
            base = uniform_grid(n, d, ratio_bound=scheme.ratio_bound)
        elif sub == "jittered":
            cube_seed = int(np.random.SeedSequence(
                [int(scheme.seed), ell]).generate_state(1)[0])
            base = jittered_grid(n, d, C=scheme.ratio_bound, seed=cube_seed,
                                 cells_per_axis=scheme.cells_per_axis)
        else:
            raise ValueError(f"unsupported per-cube scheme {sub!r}")
        shifted = tuple(bp + a for bp, a in zip(base.breakpoints, corner))
        parts.append(ProductGrid(n, shifted, ratio_bound=scheme.ratio_bound))
    return ConcatenatedGrid(n, parts, cubes, ratio_bound=scheme.ratio_bound)


@dataclass
class GridValidationReport:
    """Pass/fail per structural check; failures are reported, not raised."""

    checks: dict[str, bool]
    details: dict[str, str]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def _validate_product(level: ProductGrid, checks, details) -> None:
    n, C = level.n, level.ratio_bound
    ok_len = True
    for k in range(level.d):
        lengths = level.axis_lengths(k)
        if lengths.min() < 1.0 / (C * n) - _TOL or lengths.max() > 1.0 / n + _TOL:
            ok_len = False
            details["edge_lengths"] = (
                f"axis {k}: lengths span [{lengths.min():.3e}, {lengths.max():.3e}], "
                f"required [{1.0 / (C * n):.3e}, {1.0 / n:.3e}]")
            break
    checks["edge_lengths"] = ok_len
    checks["disjoint"] = True  # strictly increasing breakpoints by construction
    checks["coverage"] = True
    checks["volume_bound"] = level.max_bin_volume <= n ** (-level.d) + _TOL
    if not checks["volume_bound"]:
        details["volume_bound"] = (
            f"max bin volume {level.max_bin_volume:.3e} > 1/n^d = {n ** (-level.d):.3e}")


def _validate_custom(level: CustomGrid, checks, details) -> None:
    n, C, d = level.n, level.ratio_bound, level.d
    bins = list(level.bins())
    lo, hi = 1.0 / (C * n) - _TOL, 1.0 / n + _TOL
    bad = [e.length for b in bins for e in b.edges if not lo <= e.length <= hi]
    checks["edge_lengths"] = not bad
    if bad:
        details["edge_lengths"] = f"edge length {bad[0]:.6g} outside [{lo:.6g}, {hi:.6g}]"

    overlap = None
    for i, a in enumerate(bins):
        for b in bins[i + 1:]:
            if all(ea.lo < eb.hi - _TOL and eb.lo < ea.hi - _TOL
                   for ea, eb in zip(a.edges, b.edges)):
                overlap = (a, b)
                break
        if overlap:
            break
    checks["disjoint"] = overlap is None
    if overlap:
        details["disjoint"] = f"bins {overlap[0].lower}..{overlap[0].upper} and " \
                              f"{overlap[1].lower}..{overlap[1].upper} overlap"

    inside = all(
        dlo - _TOL <= e.lo and e.hi <= dhi + _TOL
        for b in bins for e, (dlo, dhi) in zip(b.edges, level.domain_bounds))
    total = float(sum(b.volume for b in bins))
    checks["coverage"] = inside and abs(total - level.domain_volume) <= 1e-12 * max(
        1.0, level.domain_volume)
    if not checks["coverage"]:
        details["coverage"] = f"bin volumes sum to {total!r}, domain volume is " \
                              f"{level.domain_volume!r}"
    checks["volume_bound"] = max(b.volume for b in bins) <= n ** (-d) + _TOL


def validate_grid(level: GridLevel) -> GridValidationReport:
    """Check disjointness, coverage, edge-length bounds and the volume bound.

    Returns a report; nothing is raised on failure.
    """
    checks: dict[str, bool] = {}
    details: dict[str, str] = {}
    if isinstance(level, ProductGrid):
        _validate_product(level, checks, details)
    elif isinstance(level, ConcatenatedGrid):
        sub_reports = [validate_grid(p) for p in level.parts]
        for name in ("edge_lengths", "disjoint", "coverage", "volume_bound"):
            checks[name] = all(r.checks[name] for r in sub_reports)
            for r in sub_reports:
                if name in r.details:
                    details[name] = r.details[name]
        disjoint_cubes = all(
            _cubes_disjoint(a, b)
            for i, a in enumerate(level.origins) for b in level.origins[i + 1:])
        checks["disjoint"] = checks["disjoint"] and disjoint_cubes
    elif isinstance(level, CustomGrid):
        _validate_custom(level, checks, details)
    else:
        raise TypeError(f"unknown grid level type {type(level)!r}")
    return GridValidationReport(checks, details)


def locate_bin(level: GridLevel, x) -> int:
    """Index of the unique bin containing x (half-open convention)."""
    return level.locate(x)
