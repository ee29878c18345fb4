"""Wavefunction catalog, density states, and exact bin integrals.

States live on [0,1)^d or on R^d and are stored as finite sums of
separable terms, each term being a coefficient times a product of
one-dimensional factors.  That representation is closed under linear
combination and tensor products, keeps evaluation cheap, and lets bin
integrals factor axis by axis: the integral of conj(phi)*psi over a
rectangular cell is a sum over term pairs of products of 1-d cell
integrals, which have elementary antiderivatives for the whole trig
family (constants, sine modes, complex exponentials, indicators,
piecewise constants), for power singularities paired with constants, and
for Gaussian pairs.  Pairs without a closed form report ``None`` so the
quadrature module can take over.

Catalog factors and their natural (unit-norm) scaling:

==================  =====================================================
uniform             1 on [0,1)
sine_mode(k)        sqrt(2) sin(k pi x) on [0,1)
complex_exponential exp(2 pi i k x) on [0,1)
indicator(a,b)      (b-a)^(-1/2) on [a,b)
power_singular(a)   sqrt(1-2a) x^(-a) on [0,1), 0 < a < 1/2
gaussian(mu,sigma)  (2 pi sigma^2)^(-1/4) exp(-(x-mu)^2/(4 sigma^2)) on R
haar_like           seeded random piecewise constant on a dyadic partition
==================  =====================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erf

from .grids import Bin

__all__ = [
    "Domain",
    "Primitive1D",
    "SeparableFunction",
    "WaveFunction",
    "DensityState",
    "NonOrthogonalTermsError",
    "make_state",
    "make_density",
    "superpose",
    "tensor_product",
    "product_field",
    "exact_bin_integral",
    "exact_cell_integrals",
    "CATALOG",
]

NORM_TOL = 1e-9
ORTHO_TOL = 1e-6


class NonOrthogonalTermsError(ValueError):
    """Spectral terms of a density state must be pairwise orthogonal."""


@dataclass(frozen=True)
class Domain:
    """Either the unit cube [0,1)^d or all of R^d."""

    kind: str  # "unit_cube" | "euclidean"
    d: int

    def __post_init__(self) -> None:
        if self.kind not in ("unit_cube", "euclidean"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    @classmethod
    def unit_cube(cls, d: int = 1) -> "Domain":
        return cls("unit_cube", d)

    @classmethod
    def euclidean(cls, d: int = 1) -> "Domain":
        return cls("euclidean", d)

    def axis_bounds(self, k: int = 0) -> tuple[float, float]:
        if self.kind == "unit_cube":
            return (0.0, 1.0)
        return (-np.inf, np.inf)


# ---------------------------------------------------------------------------
# one-dimensional factors


class Primitive1D:
    """One-dimensional factor of a separable term."""

    support: tuple[float, float] = (-np.inf, np.inf)
    bounded: bool = True

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def fourier_terms(self):
        """Expansion sum_m c_m exp(i w_m x) on the support, or None."""
        return None

    def singularity(self):
        """(point, exponent) of an integrable power singularity, or None."""
        return None

    def discontinuities(self) -> tuple[float, ...]:
        """Interior jump points; quadrature cells are split on these."""
        return ()

    def smooth_eval(self, x: np.ndarray) -> np.ndarray:
        """Value with the singular power factor stripped (used by quadrature)."""
        return self(x)

    def _mask(self, x: np.ndarray, values: np.ndarray) -> np.ndarray:
        lo, hi = self.support
        if lo == -np.inf and hi == np.inf:
            return values
        return np.where((x >= lo) & (x < hi), values, 0.0)


class _One(Primitive1D):
    """Internal constant 1 on the whole line; pairs with f to give plain int f."""

    def __call__(self, x):
        return np.ones_like(np.asarray(x, dtype=float), dtype=complex)

    def fourier_terms(self):
        return [(1.0 + 0.0j, 0.0)]


ONE = _One()


@dataclass(frozen=True)
class Uniform1D(Primitive1D):
    support: tuple[float, float] = (0.0, 1.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self._mask(x, np.ones_like(x, dtype=complex))

    def fourier_terms(self):
        return [(1.0 + 0.0j, 0.0)]


@dataclass(frozen=True)
class Sine1D(Primitive1D):
    k: int
    support: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("sine mode index k must be >= 1")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self._mask(x, np.sqrt(2.0) * np.sin(self.k * np.pi * x) + 0.0j)

    def fourier_terms(self):
        c = np.sqrt(2.0) / 2.0j
        w = self.k * np.pi
        return [(c, w), (-c, -w)]


@dataclass(frozen=True)
class Cexp1D(Primitive1D):
    k: int
    support: tuple[float, float] = (0.0, 1.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self._mask(x, np.exp(2j * np.pi * self.k * x))

    def fourier_terms(self):
        return [(1.0 + 0.0j, 2.0 * np.pi * self.k)]


@dataclass(frozen=True)
class Indicator1D(Primitive1D):
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b <= 1.0):
            raise ValueError("indicator needs 0 <= a < b <= 1")
        object.__setattr__(self, "support", (self.a, self.b))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        h = 1.0 / np.sqrt(self.b - self.a)
        return self._mask(x, np.full_like(x, h, dtype=complex))

    def fourier_terms(self):
        return [(1.0 / np.sqrt(self.b - self.a) + 0.0j, 0.0)]

    def discontinuities(self) -> tuple[float, ...]:
        return (self.a, self.b)


@dataclass(frozen=True)
class PowerSingular1D(Primitive1D):
    """c * x^(-alpha) on [0,1): square integrable but unbounded at 0."""

    alpha: float
    support: tuple[float, float] = (0.0, 1.0)
    bounded: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(
                f"alpha={self.alpha} invalid: need 0 < alpha < 1/2 for square "
                "integrability of x^(-alpha)")

    @property
    def coeff(self) -> float:
        return float(np.sqrt(1.0 - 2.0 * self.alpha))

    def __call__(self, x):
        # capped at the measure-zero singular point; integration never
        # evaluates here (antiderivative / Gauss-Jacobi paths are used)
        x = np.asarray(x, dtype=float)
        safe = np.where(x > 0.0, x, 1e-12)
        return self._mask(x, self.coeff * safe ** (-self.alpha) + 0.0j)

    def singularity(self):
        return (0.0, self.alpha)

    def smooth_eval(self, x):
        x = np.asarray(x, dtype=float)
        return self._mask(x, np.full_like(x, self.coeff, dtype=complex))


@dataclass(frozen=True)
class Gaussian1D(Primitive1D):
    """Unit-norm Gaussian wave packet; |psi|^2 is the Normal(mu, sigma^2) pdf."""

    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def amp(self) -> float:
        return float((2.0 * np.pi * self.sigma ** 2) ** (-0.25))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amp * np.exp(-((x - self.mu) ** 2) / (4.0 * self.sigma ** 2)) + 0.0j


@dataclass(frozen=True)
class PiecewiseConstant1D(Primitive1D):
    breaks: tuple[float, ...]
    values: tuple[complex, ...]

    def __post_init__(self):
        if len(self.breaks) != len(self.values) + 1:
            raise ValueError("need len(breaks) == len(values) + 1")
        if not all(a < b for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "support", (self.breaks[0], self.breaks[-1]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        bp = np.asarray(self.breaks)
        idx = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, len(self.values) - 1)
        vals = np.asarray(self.values, dtype=complex)[idx]
        return self._mask(x, vals)

    def piece_at(self, x: float) -> complex:
        bp = np.asarray(self.breaks)
        i = int(np.clip(np.searchsorted(bp, x, side="right") - 1, 0, len(self.values) - 1))
        return complex(self.values[i])

    def discontinuities(self) -> tuple[float, ...]:
        return self.breaks


@dataclass(frozen=True)
class Restricted1D(Primitive1D):
    """Factor multiplied by the indicator of [lo, hi); used by collapse."""

    base: Primitive1D
    lo: float
    hi: float

    def __post_init__(self):
        blo, bhi = self.base.support
        object.__setattr__(self, "support", (max(self.lo, blo), min(self.hi, bhi)))
        object.__setattr__(self, "bounded", self.base.bounded)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self._mask(x, self.base(x))

    def fourier_terms(self):
        return self.base.fourier_terms()

    def singularity(self):
        s = self.base.singularity()
        if s is None:
            return None
        lo, hi = self.support
        return s if lo <= s[0] < hi or s[0] == lo else None

    def discontinuities(self) -> tuple[float, ...]:
        return self.base.discontinuities() + (self.lo, self.hi)

    def smooth_eval(self, x):
        x = np.asarray(x, dtype=float)
        return self._mask(x, self.base.smooth_eval(x))


@dataclass(frozen=True)
class PairFactor(Primitive1D):
    """Pointwise product conj(bra) * ket, itself usable as an axis factor."""

    bra: Primitive1D
    ket: Primitive1D

    def __post_init__(self):
        lo = max(self.bra.support[0], self.ket.support[0])
        hi = min(self.bra.support[1], self.ket.support[1])
        object.__setattr__(self, "support", (lo, hi))
        object.__setattr__(self, "bounded", self.bra.bounded and self.ket.bounded)

    def __call__(self, x):
        return np.conj(self.bra(x)) * self.ket(x)

    def fourier_terms(self):
        tb, tk = self.bra.fourier_terms(), self.ket.fourier_terms()
        if tb is None or tk is None:
            return None
        return [(np.conj(cb) * ck, -wb + wk) for cb, wb in tb for ck, wk in tk]

    def singularity(self):
        sb, sk = self.bra.singularity(), self.ket.singularity()
        if sb is None and sk is None:
            return None
        if sb is not None and sk is not None:
            if sb[0] != sk[0]:
                raise NotImplementedError("distinct singular points in one factor")
            return (sb[0], sb[1] + sk[1])
        return sb if sb is not None else sk

    def discontinuities(self) -> tuple[float, ...]:
        return self.bra.discontinuities() + self.ket.discontinuities()

    def smooth_eval(self, x):
        return np.conj(self.bra.smooth_eval(x)) * self.ket.smooth_eval(x)


# ---------------------------------------------------------------------------
# exact cell integrals


def _unwrap(p: Primitive1D) -> Primitive1D:
    while isinstance(p, Restricted1D):
        p = p.base
    return p


def _trig_cells(terms, edges: np.ndarray) -> np.ndarray:
    anti = np.zeros_like(edges, dtype=complex)
    for c, w in terms:
        if w == 0.0:
            anti += c * edges
        else:
            anti += (c / (1j * w)) * np.exp(1j * w * edges)
    return np.diff(anti)


def _power_cells(coeff: complex, gamma: float, edges: np.ndarray) -> np.ndarray:
    p = 1.0 - gamma
    anti = coeff * np.power(np.maximum(edges, 0.0), p) / p
    return np.diff(anti)


def _gauss_const_cells(g: Gaussian1D, const: complex, edges: np.ndarray) -> np.ndarray:
    a = 1.0 / (4.0 * g.sigma ** 2)
    pref = const * g.amp * 0.5 * np.sqrt(np.pi / a)
    return pref * np.diff(erf(np.sqrt(a) * (edges - g.mu)))


def _gauss_pair_cells(f: Gaussian1D, g: Gaussian1D, edges: np.ndarray) -> np.ndarray:
    a1 = 1.0 / (4.0 * f.sigma ** 2)
    a2 = 1.0 / (4.0 * g.sigma ** 2)
    a = a1 + a2
    m = (a1 * f.mu + a2 * g.mu) / a
    r = a1 * a2 * (f.mu - g.mu) ** 2 / a
    pref = f.amp * g.amp * np.exp(-r) * 0.5 * np.sqrt(np.pi / a)
    return (pref * np.diff(erf(np.sqrt(a) * (edges - m)))).astype(complex)


def _const_of(p: Primitive1D) -> complex | None:
    terms = p.fourier_terms()
    if terms is not None and len(terms) == 1 and terms[0][1] == 0.0:
        return complex(terms[0][0])
    return None


def _split_on_pieces(pcw: PiecewiseConstant1D, pcw_is_bra: bool,
                     other: Primitive1D, edges: np.ndarray):
    """Refine edges on the piecewise breaks, integrate per piece, re-aggregate."""
    inner = [b for b in pcw.breaks if edges[0] < b < edges[-1]]
    refined = np.union1d(edges, np.asarray(inner)) if inner else edges
    plain = exact_cell_integrals(ONE, other, refined)
    if plain is None:
        return None
    mids = 0.5 * (refined[:-1] + refined[1:])
    consts = np.array([pcw.piece_at(m) for m in mids])
    if pcw_is_bra:
        contrib = np.conj(consts) * plain
    else:
        # integral of conj(other) = conj(integral of other)
        contrib = consts * np.conj(plain)
    out = np.zeros(edges.size - 1, dtype=complex)
    pos = np.clip(np.searchsorted(edges, mids, side="right") - 1, 0, out.size - 1)
    np.add.at(out, pos, contrib)
    return out


def exact_cell_integrals(f: Primitive1D, g: Primitive1D,
                         edges: np.ndarray) -> np.ndarray | None:
    """Closed-form integrals of conj(f)*g over consecutive cells, or None.

    ``edges`` is a sorted 1-d array; the result has one entry per cell
    [edges[i], edges[i+1]).  Cells outside the common support contribute 0.
    """
    edges = np.asarray(edges, dtype=float)
    lo = max(f.support[0], g.support[0])
    hi = min(f.support[1], g.support[1])
    if lo >= hi:
        return np.zeros(edges.size - 1, dtype=complex)
    if np.isfinite(lo) or np.isfinite(hi):
        edges = np.clip(edges, lo if np.isfinite(lo) else None,
                        hi if np.isfinite(hi) else None)
    f, g = _unwrap(f), _unwrap(g)

    # resolve nested pair factors against the trivial partner
    if isinstance(f, _One) and isinstance(g, PairFactor):
        return exact_cell_integrals(g.bra, g.ket, edges)
    if isinstance(g, _One) and isinstance(f, PairFactor):
        inner = exact_cell_integrals(f.bra, f.ket, edges)
        return None if inner is None else np.conj(inner)

    if isinstance(f, PiecewiseConstant1D):
        return _split_on_pieces(f, True, g, edges)
    if isinstance(g, PiecewiseConstant1D):
        return _split_on_pieces(g, False, f, edges)

    tf, tg = f.fourier_terms(), g.fourier_terms()
    if tf is not None and tg is not None:
        prod = [(np.conj(cf) * cg, -wf + wg) for cf, wf in tf for cg, wg in tg]
        return _trig_cells(prod, edges)

    fp = isinstance(f, PowerSingular1D)
    gp = isinstance(g, PowerSingular1D)
    if fp and gp:
        return _power_cells(f.coeff * g.coeff, f.alpha + g.alpha, edges)
    if fp or gp:
        power = f if fp else g
        other = g if fp else f
        c = _const_of(other)
        if c is not None:
            c = c if fp else np.conj(c)  # conjugate the bra side
            return _power_cells(power.coeff * c, power.alpha, edges)
        return None

    f_gauss, g_gauss = isinstance(f, Gaussian1D), isinstance(g, Gaussian1D)
    if f_gauss and g_gauss:
        return _gauss_pair_cells(f, g, edges)
    if f_gauss or g_gauss:
        gauss = f if f_gauss else g
        other = g if f_gauss else f
        c = _const_of(other)
        if c is not None:
            # the gaussian factor is real, so only the constant's side matters
            return _gauss_const_cells(gauss, c if f_gauss else np.conj(c), edges)
        return None
    return None


# ---------------------------------------------------------------------------
# separable-sum functions and wavefunctions


Term = tuple[complex, tuple[Primitive1D, ...]]


@dataclass(frozen=True)
class SeparableFunction:
    """Finite sum of coefficient * product-of-1d-factors terms."""

    domain: Domain
    terms: tuple[Term, ...]
    label: str = ""

    def __post_init__(self):
        if not self.terms:
            raise ValueError("need at least one term")
        for _, factors in self.terms:
            if len(factors) != self.domain.d:
                raise ValueError("every term needs one factor per axis")

    @property
    def d(self) -> int:
        return self.domain.d

    @property
    def bounded(self) -> bool:
        return all(f.bounded for _, factors in self.terms for f in factors)

    def evaluate(self, points) -> np.ndarray:
        """Values at an (N, d) array of points (or (N,) when d == 1)."""
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 0
        if pts.ndim <= 1:
            pts = np.atleast_1d(pts)[:, None]
        if pts.shape[1] != self.d:
            raise ValueError(f"points have {pts.shape[1]} coordinates, need {self.d}")
        out = np.zeros(pts.shape[0], dtype=complex)
        for coeff, factors in self.terms:
            term = np.full(pts.shape[0], coeff, dtype=complex)
            for k, f in enumerate(factors):
                term *= f(pts[:, k])
            out += term
        return out[0] if scalar else out

    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)


def _axis_hull(f: Primitive1D, g: Primitive1D,
               bounds: tuple[float, float]) -> tuple[float, float]:
    lo = max(f.support[0], g.support[0], bounds[0])
    hi = min(f.support[1], g.support[1], bounds[1])
    return lo, hi


def _full_axis_pair(f: Primitive1D, g: Primitive1D,
                    bounds: tuple[float, float]) -> complex:
    """Integral of conj(f)*g over one whole axis, exact or numeric."""
    lo, hi = _axis_hull(f, g, bounds)
    if lo >= hi:
        return 0.0 + 0.0j
    edges = np.array([lo, hi])
    vals = exact_cell_integrals(f, g, edges)
    if vals is not None:
        return complex(vals[0])
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("no closed form for an infinite-range pair integral")
    from .quadrature import numeric_cell_integrals, QuadratureConfig
    # refine into panels so fixed-order quadrature resolves oscillations
    panels = np.linspace(lo, hi, 65)
    vals, _ = numeric_cell_integrals(f, g, panels, QuadratureConfig())
    return complex(vals.sum())


def inner_product(f: SeparableFunction, g: SeparableFunction) -> complex:
    """<f|g> = integral of conj(f)*g over the common domain."""
    if f.domain != g.domain:
        raise ValueError(f"domain mismatch: {f.domain} vs {g.domain}")
    total = 0.0 + 0.0j
    for cf, ff in f.terms:
        for cg, gf in g.terms:
            prod = np.conj(cf) * cg
            for k in range(f.d):
                prod *= _full_axis_pair(ff[k], gf[k], f.domain.axis_bounds(k))
                if prod == 0.0:
                    break
            total += prod
    return complex(total)


@dataclass(frozen=True)
class WaveFunction(SeparableFunction):
    """Normalised state; ||psi|| = 1 within NORM_TOL, checked on construction."""

    check_norm: bool = True
    collapsed_from: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        super().__post_init__()
        if self.check_norm:
            nsq = self.norm_squared()
            if abs(nsq - 1.0) > NORM_TOL:
                raise ValueError(f"state {self.label!r} has ||psi||^2 = {nsq!r}, not 1")

    def norm_squared(self) -> float:
        return float(np.real(inner_product(self, self)))

    def inner(self, other: "SeparableFunction") -> complex:
        return inner_product(self, other)

    def restrict(self, cell: Bin, norm_const: float) -> "WaveFunction":
        """State multiplied by the cell indicator and rescaled by norm_const."""
        new_terms = tuple(
            (coeff * norm_const,
             tuple(Restricted1D(f, e.lo, e.hi) for f, e in zip(factors, cell.edges)))
            for coeff, factors in self.terms)
        return WaveFunction(domain=self.domain, terms=new_terms,
                            label=f"{self.label}|restricted", check_norm=False,
                            collapsed_from=(self, cell, norm_const))

    def as_euclidean(self) -> "WaveFunction":
        """Same state read as an element of L^2(R^d) (supports are compact)."""
        if self.domain.kind == "euclidean":
            return self
        return replace(self, domain=Domain.euclidean(self.d), check_norm=False)


def product_field(phi: SeparableFunction, psi: SeparableFunction) -> SeparableFunction:
    """The function conj(phi)*psi as a separable sum (not normalised)."""
    if phi.domain != psi.domain:
        raise ValueError("states live on different domains")
    terms = []
    for cb, bf in phi.terms:
        for ck, kf in psi.terms:
            factors = tuple(PairFactor(b, k) for b, k in zip(bf, kf))
            terms.append((complex(np.conj(cb) * ck), factors))
    return SeparableFunction(domain=phi.domain, terms=tuple(terms),
                             label=f"conj({phi.label})*{psi.label}")


# ---------------------------------------------------------------------------
# catalog


def _factors_1d(prim: Primitive1D, d: int) -> tuple[Primitive1D, ...]:
    return (prim,) * d


def make_state(catalog: str, **params) -> WaveFunction:
    """Build a catalog state.

    Entries: ``uniform(d)``, ``sine_mode(k)``, ``sine_product(ks)``,
    ``complex_exponential(k)``, ``indicator(a, b)``,
    ``power_singular(alpha)``, ``gaussian(mu, sigma)`` (scalars or
    per-axis lists), ``haar_like(seed, pieces)``, and
    ``superpose(terms=[(coeff, state), ...])``.
    """
    if catalog == "uniform":
        d = int(params.pop("d", 1))
        _reject_extra(catalog, params)
        return WaveFunction(Domain.unit_cube(d), ((1.0 + 0.0j, _factors_1d(Uniform1D(), d)),),
                            label=f"uniform(d={d})")
    if catalog == "sine_mode":
        k = int(params.pop("k"))
        _reject_extra(catalog, params)
        return WaveFunction(Domain.unit_cube(1), ((1.0 + 0.0j, (Sine1D(k),)),),
                            label=f"sine_mode({k})")
    if catalog == "sine_product":
        ks = [int(k) for k in params.pop("ks")]
        _reject_extra(catalog, params)
        factors = tuple(Sine1D(k) for k in ks)
        return WaveFunction(Domain.unit_cube(len(ks)), ((1.0 + 0.0j, factors),),
                            label=f"sine_product({ks})")
    if catalog == "complex_exponential":
        k = int(params.pop("k"))
        _reject_extra(catalog, params)
        return WaveFunction(Domain.unit_cube(1), ((1.0 + 0.0j, (Cexp1D(k),)),),
                            label=f"complex_exponential({k})")
    if catalog == "indicator":
        a, b = float(params.pop("a")), float(params.pop("b"))
        _reject_extra(catalog, params)
        return WaveFunction(Domain.unit_cube(1), ((1.0 + 0.0j, (Indicator1D(a, b),)),),
                            label=f"indicator({a},{b})")
    if catalog == "power_singular":
        alpha = float(params.pop("alpha"))
        _reject_extra(catalog, params)
        return WaveFunction(Domain.unit_cube(1), ((1.0 + 0.0j, (PowerSingular1D(alpha),)),),
                            label=f"power_singular({alpha})")
    if catalog == "gaussian":
        mu = np.atleast_1d(np.asarray(params.pop("mu"), dtype=float))
        sigma = np.atleast_1d(np.asarray(params.pop("sigma"), dtype=float))
        _reject_extra(catalog, params)
        if mu.size != sigma.size:
            raise ValueError("mu and sigma need the same length")
        factors = tuple(Gaussian1D(float(m), float(s)) for m, s in zip(mu, sigma))
        return WaveFunction(Domain.euclidean(mu.size), ((1.0 + 0.0j, factors),),
                            label=f"gaussian(mu={mu.tolist()},sigma={sigma.tolist()})")
    if catalog == "haar_like":
        seed = int(params.pop("seed"))
        pieces = int(params.pop("pieces", 8))
        _reject_extra(catalog, params)
        if pieces < 1:
            raise ValueError("pieces must be >= 1")
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                           spawn_key=(pieces,)))
        vals = rng.standard_normal(pieces) + 1j * rng.standard_normal(pieces)
        width = 1.0 / pieces
        vals /= np.sqrt(np.sum(np.abs(vals) ** 2) * width)
        breaks = tuple(np.arange(pieces + 1) / pieces)
        prim = PiecewiseConstant1D(breaks, tuple(complex(v) for v in vals))
        return WaveFunction(Domain.unit_cube(1), ((1.0 + 0.0j, (prim,)),),
                            label=f"haar_like(seed={seed},pieces={pieces})")
    if catalog == "superpose":
        terms = params.pop("terms")
        _reject_extra(catalog, params)
        return superpose(terms)
    raise ValueError(f"unknown catalog entry {catalog!r}")


def _reject_extra(catalog: str, params: dict) -> None:
    if params:
        raise ValueError(f"unexpected parameters for {catalog!r}: {sorted(params)}")


def superpose(terms: Iterable[tuple[complex, WaveFunction]]) -> WaveFunction:
    """Renormalised linear combination of states on a common domain."""
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one term")
    domain = terms[0][1].domain
    flat: list[Term] = []
    for coeff, wf in terms:
        if wf.domain != domain:
            raise ValueError("all states must share one domain")
        for c, factors in wf.terms:
            flat.append((complex(coeff) * c, factors))
    raw = SeparableFunction(domain, tuple(flat))
    nsq = float(np.real(inner_product(raw, raw)))
    if nsq <= 0.0:
        raise ValueError("combination has zero norm")
    scale = 1.0 / np.sqrt(nsq)
    label = " + ".join(f"({c})*{wf.label}" for c, wf in terms)
    return WaveFunction(domain, tuple((c * scale, f) for c, f in flat),
                        label=f"superpose[{label}]")


def tensor_product(states: Sequence[WaveFunction]) -> WaveFunction:
    """Tensor product of 1-d (or lower-d) states into one higher-d state."""
    if not states:
        raise ValueError("need at least one factor state")
    kind = states[0].domain.kind
    if any(s.domain.kind != kind for s in states):
        raise ValueError("all factor states must share the domain kind")
    d = sum(s.d for s in states)
    terms: list[Term] = [(1.0 + 0.0j, ())]
    for s in states:
        terms = [(c0 * c1, f0 + f1) for c0, f0 in terms for c1, f1 in s.terms]
    domain = Domain(kind, d)
    label = " x ".join(s.label for s in states)
    return WaveFunction(domain, tuple(terms), label=f"tensor[{label}]")


def exact_bin_integral(psi: WaveFunction, phi: WaveFunction,
                       cell: Bin) -> complex | None:
    """Closed-form integral of conj(phi)*psi over a bin, or None if unsupported."""
    if psi.domain != phi.domain:
        raise ValueError("states live on different domains")
    if cell.d != psi.d:
        raise ValueError("bin dimension does not match the states")
    total = 0.0 + 0.0j
    for cb, bf in phi.terms:
        for ck, kf in psi.terms:
            prod = complex(np.conj(cb) * ck)
            for k, e in enumerate(cell.edges):
                vals = exact_cell_integrals(bf[k], kf[k], np.array([e.lo, e.hi]))
                if vals is None:
                    return None
                prod *= complex(vals[0])
            total += prod
    return total


# ---------------------------------------------------------------------------
# density states


@dataclass(frozen=True)
class DensityState:
    """Finite spectral list (p_l, psi_l); the dropped tail is 1 - sum p_l."""

    terms: tuple[tuple[float, WaveFunction], ...]
    declared_trace: float

    @property
    def d(self) -> int:
        return self.terms[0][1].d

    @property
    def domain(self) -> Domain:
        return self.terms[0][1].domain

    @property
    def tail_mass(self) -> float:
        return max(0.0, 1.0 - self.declared_trace)


def make_density(terms: Iterable[tuple[float, WaveFunction]],
                 renormalize: bool = False) -> DensityState:
    """Validated density state from (weight, state) pairs.

    Weights must be nonnegative and sum to at most 1 (unless
    ``renormalize``); the states must be pairwise orthogonal within
    ORTHO_TOL.
    """
    terms = [(float(p), wf) for p, wf in terms]
    if not terms:
        raise ValueError("need at least one spectral term")
    if any(p < 0.0 for p, _ in terms):
        raise ValueError("negative weight in density state")
    total = sum(p for p, _ in terms)
    if renormalize:
        if total <= 0.0:
            raise ValueError("cannot renormalise zero total weight")
        terms = [(p / total, wf) for p, wf in terms]
        total = 1.0
    elif total > 1.0 + 1e-12:
        raise ValueError(f"weights sum to {total!r} > 1; pass renormalize=True to rescale")
    domain = terms[0][1].domain
    for _, wf in terms:
        if wf.domain != domain:
            raise ValueError("all spectral terms must share one domain")
    for i, (_, a) in enumerate(terms):
        for _, b in terms[i + 1:]:
            ov = abs(inner_product(a, b))
            if ov > ORTHO_TOL:
                raise NonOrthogonalTermsError(
                    f"|<{a.label}|{b.label}>| = {ov:.3e} exceeds {ORTHO_TOL}")
    return DensityState(tuple(terms), declared_trace=total)


CATALOG = (
    "uniform",
    "sine_mode",
    "sine_product",
    "complex_exponential",
    "indicator",
    "power_singular",
    "gaussian",
    "haar_like",
    "superpose",
)
