"""Two-stage measurement: coarse position readout, then a rank-one projection.

The position stage records which bin B_j of a grid level contains the
particle (outcome X); the state collapses to P_j psi / ||P_j psi||.  The
second stage measures |phi><phi| (outcome Y in {0,1}).  The probability
of Y=1 is the sum over bins of |<phi|P_j psi>|^2 for pure states, and the
spectral-weighted sum of pure results for density states.

For product grids and separable-sum states the bin amplitudes factor
axis by axis, so totals are computed from per-axis cell-integral arrays
without enumerating bins; per-bin tables are materialised only below a
size guard (or on explicit request).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
import numpy as np

from .grids import Bin, ConcatenatedGrid, GridLevel, ProductGrid
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    bin_inner_product,
    bin_mass,
    cell_integrals,
)
from .states import DensityState, SeparableFunction, WaveFunction, inner_product

__all__ = [
    "MeasurementResult",
    "JointDistribution",
    "SampleBatch",
    "ZeroMassBinError",
    "collapse",
    "prob_y1_given_bin",
    "prob_y1_pure",
    "prob_y1_mixed",
    "joint_distribution",
    "sample_xy",
    "bar_norm_squared",
]

logger = logging.getLogger(__name__)

# per-bin tables above this size are dropped unless explicitly requested
PER_BIN_LIMIT = 10 ** 6


class ZeroMassBinError(ValueError):
    """The state carries no mass in the requested bin."""


@dataclass
class MeasurementResult:
    """Outcome probabilities of the two-stage measurement at one resolution."""

    n: int
    level: GridLevel
    p_y1: float
    p_y1_raw: float
    p_y1_error_bound: float
    mass_total: float
    per_bin_amplitude: np.ndarray | None
    per_bin_mass: np.ndarray | None
    wall_time: float

    @property
    def num_bins(self) -> int:
        return self.level.num_bins


@dataclass
class JointDistribution:
    """Per-bin table P(X=j, Y=y) for y in {0, 1}."""

    level: GridLevel
    p_y1_bins: np.ndarray
    p_y0_bins: np.ndarray

    @property
    def p_y1(self) -> float:
        return float(self.p_y1_bins.sum())

    @property
    def marginal_x(self) -> np.ndarray:
        return self.p_y1_bins + self.p_y0_bins

    @property
    def total(self) -> float:
        return float(self.marginal_x.sum())


@dataclass
class SampleBatch:
    """i.i.d. draws of (X bin index, Y outcome)."""

    x: np.ndarray
    y: np.ndarray
    seed: int
    stream: int

    @property
    def count(self) -> int:
        return self.x.size

    def as_tuples(self) -> list[tuple[int, int]]:
        return list(zip(self.x.tolist(), self.y.tolist()))


# ---------------------------------------------------------------------------
# factorised amplitude machinery


def _pair_data(phi: SeparableFunction, psi: SeparableFunction,
               part: ProductGrid, cfg: QuadratureConfig):
    """Per term-pair weights and per-axis cell integrals on one product grid."""
    weights, mats, errs = [], [], []
    for cb, bf in phi.terms:
        for ck, kf in psi.terms:
            weights.append(complex(np.conj(cb) * ck))
            m_axes, e_axes = [], []
            for k in range(part.d):
                vals, es = cell_integrals(bf[k], kf[k], part.breakpoints[k], cfg)
                m_axes.append(vals)
                e_axes.append(es)
            mats.append(m_axes)
            errs.append(e_axes)
    return weights, mats, errs


def _gram_total(weights, mats, axis_weights=None) -> float:
    """sum_j |sum_P w_P prod_k M_P,k[j_k]|^2 (optionally per-axis weighted)."""
    P = len(weights)
    d = len(mats[0])
    H = np.ones((P, P), dtype=complex)
    for k in range(d):
        G = np.empty((P, P), dtype=complex)
        for a in range(P):
            va = mats[a][k] if axis_weights is None else mats[a][k] * axis_weights[k]
            for b in range(P):
                G[a, b] = np.dot(va, np.conj(mats[b][k]))
        H *= G
    w = np.asarray(weights)
    return float(np.real(np.einsum("a,ab,b->", w, H, np.conj(w))))


def _linear_total(weights, mats) -> float:
    """sum_j sum_P w_P prod_k M_P,k[j_k]; real part (used for mass sums)."""
    total = 0.0 + 0.0j
    for w, m_axes in zip(weights, mats):
        prod = w
        for m in m_axes:
            prod *= complex(np.sum(m))
        total += prod
    return float(np.real(total))


def _gram_error(weights, mats, errs) -> float:
    """Upper-ish estimate of the quadrature error on the gram total."""
    P = len(weights)
    d = len(mats[0])
    out = 0.0
    s = np.empty(P)
    s_hi = np.empty(P)
    for a in range(P):
        prod, prod_hi = 1.0, 1.0
        for k in range(d):
            absm = np.abs(mats[a][k])
            prod *= float(np.sum(absm ** 2))
            prod_hi *= float(np.sum((absm + errs[a][k]) ** 2))
        s[a] = np.sqrt(prod)
        s_hi[a] = np.sqrt(prod_hi)
    for a in range(P):
        for b in range(P):
            out += abs(weights[a]) * abs(weights[b]) * (s_hi[a] * s_hi[b] - s[a] * s[b])
    return out


def _per_bin_arrays(weights, mats) -> np.ndarray:
    """Materialise the flat per-bin amplitude array (C order over axes)."""
    total = None
    for w, m_axes in zip(weights, mats):
        term = np.asarray(m_axes[0], dtype=complex)
        for m in m_axes[1:]:
            term = np.multiply.outer(term, m)
        term = w * term.ravel()
        total = term if total is None else total + term
    return total


def _product_parts(level: GridLevel) -> list[ProductGrid] | None:
    if isinstance(level, ProductGrid):
        return [level]
    if isinstance(level, ConcatenatedGrid):
        return list(level.parts)
    return None


def _should_keep(level: GridLevel, keep) -> bool:
    if keep == "auto":
        return level.num_bins <= PER_BIN_LIMIT
    return bool(keep)


def _pure_tables(psi: WaveFunction, phi: WaveFunction, level: GridLevel,
                 cfg: QuadratureConfig, keep: bool):
    """(p_raw, err, mass_total, amps|None, masses|None) for a pure state."""
    parts = _product_parts(level)
    if parts is not None:
        p_raw, err, mass_total = 0.0, 0.0, 0.0
        amps = [] if keep else None
        masses = [] if keep else None
        for part in parts:
            w_a, m_a, e_a = _pair_data(phi, psi, part, cfg)
            w_m, m_m, e_m = _pair_data(psi, psi, part, cfg)
            p_raw += _gram_total(w_a, m_a)
            mass_total += _linear_total(w_m, m_m)
            err += _gram_error(w_a, m_a, e_a)
            if keep:
                amps.append(_per_bin_arrays(w_a, m_a))
                masses.append(np.real(_per_bin_arrays(w_m, m_m)))
        if keep:
            amps = np.concatenate(amps)
            masses = np.concatenate(masses)
        return p_raw, err, mass_total, amps, masses

    # explicit bins: direct per-bin integrals
    amps = np.empty(level.num_bins, dtype=complex)
    masses = np.empty(level.num_bins)
    err = 0.0
    for j, b in enumerate(level.bins()):
        a = bin_inner_product(phi, psi, b, cfg)
        amps[j] = a.value
        err += 2.0 * abs(a.value) * a.error + a.error ** 2
        masses[j] = bin_mass(psi, b, cfg)
    p_raw = float(np.sum(np.abs(amps) ** 2))
    mass_total = float(np.sum(masses))
    if not keep:
        amps, masses = None, None
    return p_raw, err, mass_total, amps, masses


def _clamp_probability(raw: float) -> float:
    if raw < 0.0 or raw > 1.0:
        logger.debug("probability %r clamped to [0, 1]", raw)
    return min(max(raw, 0.0), 1.0)


# error floor: closed-form cell integrals are exact up to roundoff
_EPS_FLOOR = 1e-15


def prob_y1_pure(psi: WaveFunction, phi: WaveFunction, level: GridLevel,
                 cfg: QuadratureConfig = DEFAULT_CONFIG,
                 keep_per_bin="auto") -> MeasurementResult:
    """P(Y=1) = sum_j |<phi|P_j psi>|^2 for a pure initial state.

    ``keep_per_bin`` controls whether the per-bin amplitude and mass
    tables are stored ("auto": only up to PER_BIN_LIMIT bins).
    """
    if psi.domain != phi.domain:
        raise ValueError("psi and phi live on different domains")
    if psi.d != level.d:
        raise ValueError("state dimension does not match the grid")
    t0 = time.perf_counter()
    keep = _should_keep(level, keep_per_bin)
    p_raw, err, mass_total, amps, masses = _pure_tables(psi, phi, level, cfg, keep)
    err = max(err, _EPS_FLOOR * level.num_bins ** 0.5)
    return MeasurementResult(
        n=level.n, level=level, p_y1=_clamp_probability(p_raw), p_y1_raw=p_raw,
        p_y1_error_bound=float(err), mass_total=float(mass_total),
        per_bin_amplitude=amps, per_bin_mass=masses,
        wall_time=time.perf_counter() - t0)


def prob_y1_mixed(rho: DensityState, phi: WaveFunction, level: GridLevel,
                  cfg: QuadratureConfig = DEFAULT_CONFIG,
                  keep_per_bin="auto") -> MeasurementResult:
    """P(Y=1) = sum_l p_l sum_j |<phi|P_j psi_l>|^2 for a density state.

    The dropped spectral tail contributes at most ||phi||^2 * (1 - sum p_l),
    which is added to the error bound.
    """
    t0 = time.perf_counter()
    keep = _should_keep(level, keep_per_bin)
    p_raw, err, mass_total = 0.0, 0.0, 0.0
    amps = None  # amplitudes do not mix linearly; masses do
    masses = None
    for p_l, psi_l in rho.terms:
        r = prob_y1_pure(psi_l, phi, level, cfg, keep_per_bin=keep)
        p_raw += p_l * r.p_y1_raw
        err += p_l * r.p_y1_error_bound
        mass_total += p_l * r.mass_total
        if keep:
            masses = r.per_bin_mass * p_l if masses is None else masses + p_l * r.per_bin_mass
    phi_norm_sq = float(np.real(inner_product(phi, phi)))
    err += phi_norm_sq * rho.tail_mass
    return MeasurementResult(
        n=level.n, level=level, p_y1=_clamp_probability(p_raw), p_y1_raw=p_raw,
        p_y1_error_bound=float(err), mass_total=float(mass_total),
        per_bin_amplitude=amps, per_bin_mass=masses,
        wall_time=time.perf_counter() - t0)


def bar_norm_squared(psi: WaveFunction, phi: WaveFunction, level: GridLevel,
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """sum_j |<phi|P_j psi>|^2 / |B_j|: the squared L2 norm of the bin
    average of conj(phi)*psi (disjoint supports make the identity exact)."""
    parts = _product_parts(level)
    if parts is not None:
        total = 0.0
        for part in parts:
            w_a, m_a, _ = _pair_data(phi, psi, part, cfg)
            inv_len = [1.0 / part.axis_lengths(k) for k in range(part.d)]
            total += _gram_total(w_a, m_a, axis_weights=inv_len)
        return total
    vols = level.volumes()
    amps = np.array([bin_inner_product(phi, psi, b, cfg).value
                     for b in level.bins()])
    return float(np.sum(np.abs(amps) ** 2 / vols))


def collapse(psi: WaveFunction, cell: Bin,
             cfg: QuadratureConfig = DEFAULT_CONFIG) -> WaveFunction:
    """Post-measurement state P_B psi / ||P_B psi|| after outcome X in B.

    Raises ZeroMassBinError when the bin carries no mass.
    """
    mass = bin_mass(psi, cell, cfg)
    if mass <= 0.0:
        raise ZeroMassBinError(f"state {psi.label!r} has zero mass in bin "
                               f"{cell.lower}..{cell.upper}")
    out = psi.restrict(cell, 1.0 / np.sqrt(mass))
    nsq = out.norm_squared()
    if abs(nsq - 1.0) > 1e-9:
        raise RuntimeError(f"collapsed state norm^2 = {nsq!r}; "
                           "exact and numeric bin integrals disagree")
    return out


def prob_y1_given_bin(psi: WaveFunction, phi: WaveFunction, cell: Bin,
                      cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """|<phi|psi'>|^2 for the collapsed state psi' of the bin."""
    mass = bin_mass(psi, cell, cfg)
    if mass <= 0.0:
        raise ZeroMassBinError(f"state {psi.label!r} has zero mass in bin "
                               f"{cell.lower}..{cell.upper}")
    amp = bin_inner_product(phi, psi, cell, cfg).value
    return _clamp_probability(abs(amp) ** 2 / mass)


def _per_bin_tables(state, phi, level, cfg, keep_per_bin):
    """Materialised (amplitudes|None, masses, p1, p0) for pure or mixed input."""
    if isinstance(state, DensityState):
        p1 = None
        masses = None
        for p_l, psi_l in state.terms:
            r = prob_y1_pure(psi_l, phi, level, cfg, keep_per_bin=keep_per_bin)
            if r.per_bin_amplitude is None:
                raise ValueError(
                    f"per-bin tables for {level.num_bins} bins exceed the size "
                    f"guard; pass keep_per_bin=True to override")
            t1 = np.abs(r.per_bin_amplitude) ** 2
            p1 = p_l * t1 if p1 is None else p1 + p_l * t1
            m = p_l * r.per_bin_mass
            masses = m if masses is None else masses + m
        return None, masses, p1
    r = prob_y1_pure(state, phi, level, cfg, keep_per_bin=keep_per_bin)
    if r.per_bin_amplitude is None:
        raise ValueError(f"per-bin tables for {level.num_bins} bins exceed the "
                         f"size guard; pass keep_per_bin=True to override")
    return r.per_bin_amplitude, r.per_bin_mass, np.abs(r.per_bin_amplitude) ** 2


def joint_distribution(state, phi: WaveFunction, level: GridLevel,
                       cfg: QuadratureConfig = DEFAULT_CONFIG,
                       keep_per_bin="auto") -> JointDistribution:
    """Exact joint table P(X=j, Y=y); rows sum to the bin masses."""
    _, masses, p1 = _per_bin_tables(state, phi, level, cfg, keep_per_bin)
    p1 = np.minimum(p1, masses)  # Cauchy-Schwarz per bin, up to roundoff
    p0 = np.maximum(masses - p1, 0.0)
    return JointDistribution(level=level, p_y1_bins=p1, p_y0_bins=p0)


def sample_xy(state, phi: WaveFunction, level: GridLevel,
              cfg: QuadratureConfig = DEFAULT_CONFIG, count: int = 1,
              seed: int = 0, stream: int = 0,
              keep_per_bin="auto") -> SampleBatch:
    """i.i.d. draws of (X, Y): X by inverse CDF over the bin masses, then Y
    as a Bernoulli draw with the collapsed state's conditional probability.

    Deterministic for fixed (seed, stream); distinct streams are
    independent substreams for concurrent use.  Zero-mass bins are never
    drawn.  For density states the spectral term is drawn first.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(
        entropy=int(seed), spawn_key=(int(stream),)))

    if isinstance(state, DensityState):
        term_weights = np.array([p for p, _ in state.terms])
        term_cdf = np.cumsum(term_weights)
        term_cdf /= term_cdf[-1]
        tables = [_per_bin_tables(psi_l, phi, level, cfg, keep_per_bin)
                  for _, psi_l in state.terms]
        u_term = rng.random(count)
        u_x = rng.random(count)
        u_y = rng.random(count)
        terms = np.searchsorted(term_cdf, u_term, side="right")
        x = np.empty(count, dtype=np.int64)
        y = np.empty(count, dtype=np.int8)
        for l, (_, masses, p1) in enumerate(tables):
            pick = terms == l
            if not np.any(pick):
                continue
            cdf = np.cumsum(masses)
            cdf /= cdf[-1]
            xl = np.searchsorted(cdf, u_x[pick], side="right")
            cond = np.divide(p1, masses, out=np.zeros_like(p1),
                             where=masses > 0)
            x[pick] = xl
            y[pick] = (u_y[pick] < cond[xl]).astype(np.int8)
        return SampleBatch(x=x, y=y, seed=seed, stream=stream)

    _, masses, p1 = _per_bin_tables(state, phi, level, cfg, keep_per_bin)
    cdf = np.cumsum(masses)
    cdf /= cdf[-1]
    cond = np.divide(p1, masses, out=np.zeros_like(p1), where=masses > 0)
    u_x = rng.random(count)
    u_y = rng.random(count)
    x = np.searchsorted(cdf, u_x, side="right").astype(np.int64)
    y = (u_y < cond[x]).astype(np.int8)
    return SampleBatch(x=x, y=y, seed=seed, stream=stream)
