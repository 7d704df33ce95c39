"""Poisson spin paths and their exact path functionals.

A path is a piecewise-constant sign trajectory: an initial sign at the left
end of the horizon plus the ordered jump times of a Poisson clock.  Every
functional needed by the estimators is integrated in closed form over the
piecewise-constant sign pattern, so the only randomness is in the jump times
themselves:

* ``pair_interaction_energy``: the double integral of T_s T_r e^{-|s-r|}
  over an axis-aligned square, segment pair by segment pair.
* ``vacuum_suppression``: the nonnegative functional whose exponential damps
  jumpy paths in the vacuum semigroup element.
* ``damped_sign_integral``: int T_s e^{-|s|} ds, the random shift entering
  the position observables.

Ensembles are stored in flat (offsets + concatenated jumps) form; the
importance weight of a path on [-T, T] is exp((g^2/2) * J) with J the full
square interaction, and the effective sample size is tracked from the log
weights.  Sampling is chunked over independent seed streams and reduced in
stream order, so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, ParameterError
from .model import ModelParams

#: Default master seed: determinism by default, overridable everywhere.
DEFAULT_SEED = 20240915


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus stream id; distinct streams are independent."""

    master: int = DEFAULT_SEED
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream: int) -> "SeedSpec":
        return SeedSpec(self.master, stream)


def as_seed(seed) -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed))


def stream_chunks(n_samples: int, n_streams: int) -> list[int]:
    """Split ``n_samples`` into per-stream chunk sizes (fixed, order-stable)."""
    if n_samples < 1 or n_streams < 1:
        raise ParameterError("n_samples and n_streams must be positive")
    base, extra = divmod(n_samples, n_streams)
    return [base + (1 if i < extra else 0) for i in range(n_streams) if base or i < extra]


@dataclass
class JumpPath:
    """One realization: initial sign at the left end plus sorted jump times.

    The sign at time ``s`` is ``alpha0 * (-1)**(number of jumps <= s)``.
    """

    alpha0: int
    horizon: tuple[float, float]
    jumps: np.ndarray

    def __post_init__(self):
        if self.alpha0 not in (+1, -1):
            raise ParameterError("alpha0 must be +1 or -1")
        lo, hi = self.horizon
        if not hi > lo:
            raise ParameterError("horizon must be a nonempty interval")
        self.jumps = np.asarray(self.jumps, dtype=float)
        if self.jumps.size and (
            np.any(np.diff(self.jumps) <= 0)
            or self.jumps[0] <= lo
            or self.jumps[-1] >= hi
        ):
            raise ParameterError("jumps must be strictly ascending inside the horizon")

    @property
    def n_jumps(self) -> int:
        return int(self.jumps.size)

    def sign_at(self, s: float) -> int:
        lo, hi = self.horizon
        if not lo <= s <= hi:
            raise DomainError(f"time {s} outside horizon {self.horizon}")
        return self.alpha0 * (-1) ** int(np.searchsorted(self.jumps, s, side="right"))


def sample_jump_path(rate: float, horizon: tuple[float, float], rng, alpha0: int = +1) -> JumpPath:
    """Poisson jump times on the horizon: count ~ Poisson(rate * length),
    positions uniform order statistics (equivalently exponential waits)."""
    if rate < 0:
        raise ParameterError(f"rate must be nonnegative, got {rate}")
    lo, hi = horizon
    count = int(rng.poisson(rate * (hi - lo)))
    jumps = np.sort(rng.uniform(lo, hi, size=count))
    return JumpPath(alpha0=alpha0, horizon=(lo, hi), jumps=jumps)


# ---------------------------------------------------------------------------
# Exact segment integrals
# ---------------------------------------------------------------------------


def _square_block(length: float) -> float:
    # integral of e^{-|s-r|} over an aligned square block of side `length`
    return 2.0 * (length + np.expm1(-length))


def _disjoint_block(gap: float, len_a: float, len_b: float) -> float:
    # integral of e^{-|s-r|} over disjoint blocks separated by `gap`
    return np.exp(-gap) * np.expm1(-len_a) * np.expm1(-len_b)


def _axis_blocks(path: JumpPath, lo: float, hi: float, cuts=()) -> tuple[np.ndarray, np.ndarray]:
    """Partition [lo, hi] at jump times and extra cuts; return (edges, signs)."""
    plo, phi = path.horizon
    if lo < plo - 1e-12 or hi > phi + 1e-12:
        raise DomainError(f"square [{lo}, {hi}] exceeds the path horizon {path.horizon}")
    inner = [c for c in cuts if lo < c < hi]
    edges = np.unique(np.concatenate([[lo, hi], path.jumps[(path.jumps > lo) & (path.jumps < hi)], inner]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    signs = np.array([path.sign_at(m) for m in mids], dtype=float)
    return edges, signs


def pair_interaction_energy(path: JumpPath, square=None) -> float:
    """Exact double integral of T_s T_r e^{-|s-r|} over ``square``.

    ``square`` is ((a, b), (c, d)); by default the full horizon squared.
    Both axes are partitioned on the common refinement of jump times and
    square corners, so every block pair is either identical or disjoint and
    integrates in closed form; there is no quadrature error.
    """
    lo, hi = path.horizon
    (a, b), (c, d) = square if square is not None else ((lo, hi), (lo, hi))
    if not (b > a and d > c):
        raise ParameterError("square sides must be nonempty intervals")
    e1, s1 = _axis_blocks(path, a, b, cuts=(c, d))
    e2, s2 = _axis_blocks(path, c, d, cuts=(a, b))
    total = 0.0
    for i in range(len(s1)):
        p, q = e1[i], e1[i + 1]
        for j in range(len(s2)):
            u, v = e2[j], e2[j + 1]
            if p == u and q == v:
                block = _square_block(q - p)
            elif q <= u:
                block = _disjoint_block(u - q, q - p, v - u)
            elif v <= p:
                block = _disjoint_block(p - v, v - u, q - p)
            else:  # pragma: no cover - refinement guarantees no partial overlap
                raise DomainError("partial block overlap; square corners not refined")
            total += s1[i] * s2[j] * block
    return float(total)


def damped_sign_integral(path: JumpPath, lo: float, hi: float) -> float:
    """Exact int_lo^hi T_s e^{-|s|} ds over the piecewise-constant signs."""
    if hi <= lo:
        raise ParameterError("empty integration range")
    edges, signs = _axis_blocks(path, lo, hi, cuts=(0.0,))
    starts, ends = edges[:-1], edges[1:]
    # blocks never straddle 0 because 0 is inserted as a cut
    pieces = np.where(starts >= 0.0, np.exp(-starts) - np.exp(-ends), np.exp(ends) - np.exp(starts))
    return float(np.sum(signs * pieces))


def vacuum_suppression(path: JumpPath) -> float:
    """Nonnegative functional damping jumpy paths in the vacuum element.

    For jumps s_1 < ... < s_k on [0, t] this is

        (sum_j (-1)^(j-1) e^{-s_j})^2
        + sum_{j,k} (-1)^(j+k) e^{-s_j-s_k} min(e^{2 s_j} - 1, e^{2 s_k} - 1),

    which vanishes only on the jump-free event and equals 1 for one jump.
    """
    s = path.jumps
    if s.size == 0:
        return 0.0
    signs = np.where(np.arange(s.size) % 2 == 0, 1.0, -1.0)  # (-1)^(j-1), j from 1
    first = float(np.sum(signs * np.exp(-s)))
    grow = np.minimum.outer(s, s)
    second = float(np.sum(np.outer(signs, signs) * np.exp(-np.add.outer(s, s)) * (np.exp(2.0 * grow) - 1.0)))
    return first**2 + second


# ---------------------------------------------------------------------------
# Batched sampling and segment reductions
# ---------------------------------------------------------------------------


def _sample_segments(rng, rate: float, length: float, n: int, lo: float):
    """Jumps of n independent Poisson paths on [lo, lo+length], flat + offsets."""
    counts = rng.poisson(rate * length, size=n) if rate > 0 else np.zeros(n, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    total = int(offsets[-1])
    u = rng.uniform(0.0, length, size=total)
    if total:
        seg = np.repeat(np.arange(n), counts)
        span = length + 1.0
        keyed = np.sort(u + seg * span)
        u = keyed - np.repeat(np.arange(n), counts) * span
        np.clip(u, 0.0, length, out=u)
    return lo + u, offsets


def _segment_sums(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Per-segment sums for a flat array described by ``offsets``."""
    n = len(offsets) - 1
    out = np.zeros(n)
    if values.size == 0:
        return out
    nonempty = offsets[:-1] < offsets[1:]
    sums = np.add.reduceat(values, offsets[:-1][nonempty])
    out[nonempty] = sums
    return out


def _exclusive_prefix(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Within-segment exclusive prefix sums of a flat array."""
    if values.size == 0:
        return values.copy()
    cs = np.cumsum(values) - values
    counts = np.diff(offsets)
    base = cs[offsets[:-1][counts > 0]]
    correction = np.zeros_like(values)
    correction[:] = np.repeat(base, counts[counts > 0])
    return cs - correction


def _block_arrays(jumps: np.ndarray, offsets: np.ndarray, lo: float, hi: float, alpha0):
    """Block starts/ends/signs and block offsets for one-sided horizons."""
    counts = np.diff(offsets)
    nblocks = counts + 1
    bo = np.zeros(len(offsets), dtype=np.int64)
    np.cumsum(nblocks, out=bo[1:])
    total = int(bo[-1])
    starts = np.empty(total)
    ends = np.empty(total)
    first = bo[:-1]
    last = bo[1:] - 1
    starts[first] = lo
    mask = np.ones(total, dtype=bool)
    mask[first] = False
    starts[mask] = jumps
    ends[last] = hi
    mask = np.ones(total, dtype=bool)
    mask[last] = False
    ends[mask] = jumps
    within = np.arange(total) - np.repeat(first, nblocks)
    signs = np.repeat(np.asarray(alpha0, dtype=float), nblocks) * np.where(within % 2 == 0, 1.0, -1.0)
    return starts, ends, signs, bo


def _square_interaction_batch(jumps, offsets, lo, hi, alpha0) -> np.ndarray:
    """Per-path interaction integral over [lo, hi]^2 (exact, O(total jumps))."""
    starts, ends, signs, bo = _block_arrays(jumps, offsets, lo, hi, alpha0)
    lengths = ends - starts
    shrink = -np.expm1(-lengths)  # 1 - e^{-length}
    same = 2.0 * (lengths + np.expm1(-lengths))
    a = signs * shrink * np.exp(ends)
    b = signs * shrink * np.exp(-starts)
    cross = b * _exclusive_prefix(a, bo)
    return _segment_sums(same, bo) + 2.0 * _segment_sums(cross, bo)


def _damped_batch(jumps, offsets, lo, hi, alpha0) -> np.ndarray:
    """Per-path int T_s e^{-|s|} ds for horizons entirely on one side of 0."""
    starts, ends, signs, bo = _block_arrays(jumps, offsets, lo, hi, alpha0)
    if lo >= 0.0:
        pieces = np.exp(-starts) - np.exp(-ends)
    elif hi <= 0.0:
        pieces = np.exp(ends) - np.exp(starts)
    else:
        raise ParameterError("damped batch requires a one-sided horizon")
    return _segment_sums(signs * pieces, bo)


def _vacuum_suppression_batch(jumps, offsets) -> np.ndarray:
    """Per-path vacuum suppression for paths on [0, t]."""
    counts = np.diff(offsets)
    within = np.arange(jumps.size) - np.repeat(offsets[:-1], counts)
    signs = np.where(within % 2 == 0, 1.0, -1.0)
    first = _segment_sums(signs * np.exp(-jumps), offsets)
    diag = _segment_sums(-np.expm1(-2.0 * jumps), offsets)
    a = signs * 2.0 * np.sinh(jumps)
    b = signs * np.exp(-jumps)
    cross = 2.0 * _segment_sums(b * _exclusive_prefix(a, offsets), offsets)
    return first**2 + diag + cross


# ---------------------------------------------------------------------------
# Weighted two-sided ensembles
# ---------------------------------------------------------------------------


def default_horizon(delta: float) -> float:
    """Half-width T of the sampling window, max(8, 6/delta)."""
    if delta <= 0:
        raise ParameterError("the two-sided spin process requires delta > 0")
    return max(8.0, 6.0 / delta)


@dataclass
class WeightedPathEnsemble:
    """Independent two-sided spin paths with importance log-weights.

    Weights tilt the symmetric Poisson law by exp((g^2/2) * J) with J the
    pair-interaction integral over the full square; expectations under the
    tilted law follow from ``weighted_mean``.  ``n_eff`` collapses when
    g^2 * T grows; consumers should compare against the sample count.
    """

    params: ModelParams
    half_width: float
    alpha0: np.ndarray
    left_jumps: np.ndarray
    left_offsets: np.ndarray
    right_jumps: np.ndarray
    right_offsets: np.ndarray
    log_weights: np.ndarray
    interaction_full: np.ndarray
    damped_left: np.ndarray
    damped_right: np.ndarray
    seed: SeedSpec
    note: str = ""
    _shifted_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_samples(self) -> int:
        return len(self.log_weights)

    @property
    def cross_interaction(self) -> np.ndarray:
        """Pair interaction restricted to the mixed quadrant [-T,0] x [0,T]."""
        return self.damped_left * self.damped_right

    @property
    def normalizer(self) -> float:
        return float(logsumexp(self.log_weights))

    @property
    def n_eff(self) -> float:
        lw = self.log_weights
        return float(np.exp(2.0 * logsumexp(lw) - logsumexp(2.0 * lw)))

    def normalized_weights(self) -> np.ndarray:
        lw = self.log_weights
        w = np.exp(lw - lw.max())
        return w / w.sum()

    def weighted_mean(self, values: np.ndarray) -> tuple[complex, float]:
        """Self-normalized importance mean and linearized standard error.

        A constant estimand is exact regardless of the weights and is
        reported with zero error.
        """
        values = np.asarray(values)
        if np.all(values == values.flat[0]):
            return values.flat[0], 0.0
        w = self.normalized_weights()
        mean = np.sum(w * values)
        resid = values - mean
        var = np.sum((w * np.abs(resid)) ** 2)
        return mean, float(np.sqrt(var))

    def signs_at(self, time: float) -> np.ndarray:
        """Sign of every path at a fixed time in [-T, T]."""
        T = self.half_width
        if not -T <= time <= T:
            raise DomainError(f"time {time} outside [-{T}, {T}]")
        if time >= 0.0:
            counts = self._counts_upto("right", self.right_jumps, self.right_offsets, time)
            return np.where(counts % 2 == 0, 1.0, -1.0)
        counts_ge = np.diff(self.left_offsets) - self._counts_upto(
            "left", self.left_jumps, self.left_offsets, time
        )
        return np.where(counts_ge % 2 == 0, 1.0, -1.0)

    def _counts_upto(self, tag: str, flat: np.ndarray, offsets: np.ndarray, time: float):
        key = tag
        if key not in self._shifted_cache:
            span = 4.0 * self.half_width + 8.0
            seg = np.repeat(np.arange(len(offsets) - 1), np.diff(offsets))
            self._shifted_cache[key] = (flat + seg * span, span)
        shifted, span = self._shifted_cache[key]
        ids = np.arange(len(offsets) - 1)
        pos = np.searchsorted(shifted, time + ids * span, side="right")
        return pos - offsets[:-1]

    def paths(self) -> list[JumpPath]:
        """Materialize the ensemble as JumpPath objects (left-end convention)."""
        out = []
        T = self.half_width
        for i in range(self.n_samples):
            lj = self.left_jumps[self.left_offsets[i] : self.left_offsets[i + 1]]
            rj = self.right_jumps[self.right_offsets[i] : self.right_offsets[i + 1]]
            out.append(
                JumpPath(
                    alpha0=int(self.alpha0[i]),
                    horizon=(-T, T),
                    jumps=np.concatenate([lj, rj]),
                )
            )
        return out


def build_ground_ensemble(
    params: ModelParams,
    n_samples: int,
    T: float | None = None,
    seed=DEFAULT_SEED,
    n_streams: int = 8,
) -> WeightedPathEnsemble:
    """Sample the weighted two-sided ensemble representing the ground measure.

    Paths are rate-delta Poisson sign paths on [-T, T] built from independent
    halves glued at 0 (sign fixed to +1 there); weights are
    exp((g^2/2) * J_full).  An n_eff below 100 is flagged in ``note`` with a
    resampling recommendation.
    """
    params.require_spin_rate()
    if T is None:
        T = default_horizon(params.delta)
    if T <= 0:
        raise ParameterError("T must be positive")
    seed = as_seed(seed)
    chunks = stream_chunks(n_samples, n_streams)

    parts = []
    for stream, chunk in enumerate(chunks):
        rng = seed.child(stream).generator()
        lj, lo_ = _sample_segments(rng, params.delta, T, chunk, -T)
        rj, ro_ = _sample_segments(rng, params.delta, T, chunk, 0.0)
        parts.append((lj, lo_, rj, ro_))

    def _concat(idx):
        flats, offsets = [], [np.zeros(1, dtype=np.int64)]
        base = 0
        for part in parts:
            flats.append(part[idx])
            offsets.append(part[idx + 1][1:] + base)
            base += part[idx + 1][-1]
        return np.concatenate(flats), np.concatenate(offsets)

    left_jumps, left_offsets = _concat(0)
    right_jumps, right_offsets = _concat(2)

    left_counts = np.diff(left_offsets)
    alpha0 = np.where(left_counts % 2 == 0, 1, -1)  # sign at -T; sign at 0 is +1

    j_left = _square_interaction_batch(left_jumps, left_offsets, -T, 0.0, alpha0)
    j_right = _square_interaction_batch(right_jumps, right_offsets, 0.0, T, np.ones_like(alpha0))
    u_left = _damped_batch(left_jumps, left_offsets, -T, 0.0, alpha0)
    v_right = _damped_batch(right_jumps, right_offsets, 0.0, T, np.ones_like(alpha0))
    j_full = j_left + j_right + 2.0 * u_left * v_right
    log_weights = 0.5 * params.g**2 * j_full

    ens = WeightedPathEnsemble(
        params=params,
        half_width=float(T),
        alpha0=alpha0,
        left_jumps=left_jumps,
        left_offsets=left_offsets,
        right_jumps=right_jumps,
        right_offsets=right_offsets,
        log_weights=log_weights,
        interaction_full=j_full,
        damped_left=u_left,
        damped_right=v_right,
        seed=seed,
    )
    if ens.n_eff < 100:
        ens.note = (
            f"effective sample size {ens.n_eff:.1f} < 100; "
            "increase n_samples or reduce T (importance weights degenerate)"
        )
    return ens
