"""Trajectory-level experiments on sampled and constructed orbits.

Random orbits come from stationary Markov chains. Each orbit draws from
its own PCG64 stream, seeded by ``SeedSequence(seed, spawn_key=(index,))``,
so a batch of orbits is identical to the same orbits drawn one by one.

The stopping time replaces geometric balls by an abstract radius ``r``:
``m(x, r)`` is the number of steps before the accumulated contraction
``exp(-S_m jac)`` first drops to ``r``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EqualRatios, InadmissibleWord, NotZeroPressure, StreamExhausted
from .potential import Potential, PotentialFamily, _window_codes, birkhoff_sum, periodic_sum
from .sft import Sft, connector, parse_word, word_to_str
from .transfer import (ZERO_PRESSURE_TOL, MarkovMeasure, cylinder_measure, gibbs_bounds,
                       perron_of)

RNG_ALGORITHM = "numpy.random.PCG64 via SeedSequence(seed, spawn_key=(index,))"
CHUNK = 256


def orbit_rng(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass(frozen=True, eq=False)
class OrbitSample:
    """Finite prefix of a sampled orbit."""

    symbols: np.ndarray
    seed: int
    source: str = "markov"
    index: int = 0

    def __len__(self):
        return int(self.symbols.size)

    def __str__(self):
        return word_to_str(self.symbols.tolist())


def _cumulative(measure: MarkovMeasure):
    P = measure.stochastic
    cum = np.cumsum(P, axis=1)
    for i in range(P.shape[0]):
        last = np.flatnonzero(P[i] > 0)[-1]
        cum[i, last:] = np.inf
    start = np.cumsum(measure.stationary)
    start[np.flatnonzero(measure.stationary > 0)[-1]:] = np.inf
    return start, cum


def sample_orbits(measure: MarkovMeasure, length: int, count: int, seed: int,
                  first_index: int = 0) -> np.ndarray:
    """``(count, length)`` array of symbols; row ``i`` uses stream ``first_index + i``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    g = measure.graph
    L = g.state_len
    states = np.array(g.states, dtype=np.int8)
    steps = max(length - L, 0)
    start, cum = _cumulative(measure)
    u = np.stack([orbit_rng(seed, first_index + i).random(1 + steps) for i in range(count)])
    out = np.empty((count, max(length, L)), dtype=np.int8)
    state = np.searchsorted(start, u[:, 0], side="right")
    out[:, :L] = states[state]
    last = g.last_symbol
    for k in range(steps):
        state = np.sum(cum[state] <= u[:, k + 1, None], axis=1)
        out[:, L + k] = last[state]
    return out[:, :length]


def sample_orbit(measure: MarkovMeasure, length: int, seed: int, index: int = 0,
                 source: str = "markov") -> OrbitSample:
    """A length-``length`` path of the stationary chain, deterministic in ``(seed, index)``."""
    return OrbitSample(sample_orbits(measure, length, 1, seed, index)[0], seed, source, index)


def _symbols(x):
    return x.symbols if isinstance(x, OrbitSample) else x


def birkhoff_ratio(family: PotentialFamily, symbols, n: int) -> float:
    """``sum g / sum(-jac)`` over the first ``n`` shifts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    s = _symbols(symbols)
    if not isinstance(s, (np.ndarray, list, tuple)):
        s = np.fromiter(s, dtype=np.int64, count=n + family.depth - 1)
    return birkhoff_sum(family.g, s, n) / -birkhoff_sum(family.jac, s, n)


def batch_birkhoff_ratio(family: PotentialFamily, paths: np.ndarray, n: int) -> np.ndarray:
    """Row-wise :func:`birkhoff_ratio` for a 2-D symbol array."""
    d, p = family.depth, family.sft.alphabet_size
    if paths.shape[1] < n + d - 1:
        raise StreamExhausted(f"need {n + d - 1} symbols per path")
    codes = _window_codes(paths[:, :n + d - 1].T, d, p).T
    idx = np.searchsorted(family.g.codes, codes)
    return family.g.values[idx].sum(axis=1) / -family.jac.values[idx].sum(axis=1)


def _chunks(it, size):
    while True:
        block = np.fromiter(itertools.islice(it, size), dtype=np.int64)
        if block.size == 0:
            return
        yield block


def stopping_time(jac, symbols, r: float, chunk: int = 4096) -> int:
    """Smallest ``m`` with ``exp(-S_m jac) > r >= exp(-S_{m+1} jac)``.

    ``jac`` is a log-Jacobian potential or a family carrying one. The
    comparison is done on logarithms: ``S_m < -log r <= S_{m+1}``.
    ``symbols`` may be an infinite iterator; it is consumed in chunks.

    Raises
    ------
    StreamExhausted
        If the sum never reaches ``-log r`` within the supplied symbols.
    """
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    if isinstance(jac, PotentialFamily):
        jac = jac.jac
    target = -np.log(r)
    s = _symbols(symbols)
    d = jac.depth
    if isinstance(s, (np.ndarray, list, tuple)):
        blocks = iter([np.asarray(s, dtype=np.int64)])
    else:
        blocks = _chunks(iter(s), chunk)
    carry = np.empty(0, dtype=np.int64)
    total, m = 0.0, 0
    for block in blocks:
        buf = np.concatenate([carry, block])
        if buf.size < d:
            carry = buf
            continue
        vals = jac.along(buf)
        sums = total + np.cumsum(vals)
        hit = np.flatnonzero(sums >= target)
        if hit.size:
            return m + int(hit[0])
        total, m = float(sums[-1]), m + vals.size
        carry = buf[vals.size:]
    raise StreamExhausted(f"Birkhoff sum of jac stayed below {target:.6g}")


# -- level sets ------------------------------------------------------------------


@dataclass(frozen=True)
class ConcentrationResult:
    fraction: float
    alpha: float
    mean_ratio: float
    std_ratio: float
    q: float
    n: int
    sample_count: int
    epsilon: float
    seed: int
    rng: str = RNG_ALGORITHM

    def to_dict(self):
        return asdict(self)


def level_set_concentration(family: PotentialFamily, q: float, n: int, sample_count: int,
                            epsilon: float, seed: int) -> ConcentrationResult:
    """Fraction of ``nu_q``-samples whose length-``n`` ratio is within ``epsilon`` of ``alpha(q)``."""
    from .temperature import alpha_from_measure, nu_q

    if n < 1 or sample_count < 1 or epsilon <= 0:
        raise ValueError("need n, sample_count >= 1 and epsilon > 0")
    nu = nu_q(family, q)
    a = alpha_from_measure(family, nu)
    length = n + family.depth - 1
    ratios = np.empty(sample_count)
    for lo in range(0, sample_count, CHUNK):
        k = min(CHUNK, sample_count - lo)
        paths = sample_orbits(nu, length, k, seed, first_index=lo)
        ratios[lo:lo + k] = batch_birkhoff_ratio(family, paths, n)
    frac = float(np.mean(np.abs(ratios - a) <= epsilon))
    return ConcentrationResult(frac, a, float(ratios.mean()), float(ratios.std(ddof=1))
                               if sample_count > 1 else 0.0, q, n, sample_count, epsilon, seed)


# -- constructed orbits ---------------------------------------------------------


@dataclass(frozen=True)
class BlockSchedule:
    """Block lengths ``L1, M1, L2, M2, ...`` with every length at least
    ``growth_factor`` times the sum of all earlier ones."""

    lengths: tuple
    growth_factor: float = 4.0

    def __post_init__(self):
        if self.growth_factor < 2:
            raise ValueError("growth_factor must be >= 2")
        lengths = tuple(int(x) for x in self.lengths)
        if not lengths or min(lengths) < 1:
            raise ValueError("block lengths must be positive")
        total = 0
        for k, x in enumerate(lengths):
            if k and (x <= lengths[k - 1] or x < self.growth_factor * total):
                raise ValueError(f"block {k} of length {x} violates growth factor "
                                 f"{self.growth_factor} (prefix {total})")
            total += x
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def geometric(cls, first: int, growth_factor: float, horizon: int) -> "BlockSchedule":
        """Shortest admissible schedule: each block exactly ``ceil(growth * prefix)``."""
        lengths, total = [int(first)], int(first)
        while total < horizon:
            nxt = int(np.ceil(growth_factor * total))
            lengths.append(nxt)
            total += nxt
        return cls(tuple(lengths), growth_factor)


@dataclass
class OscillationRecord:
    """Running Birkhoff ratios of an alternating-block orbit."""

    boundaries: np.ndarray
    ratios: np.ndarray
    tail_min: float
    tail_max: float
    ratio_a: float
    ratio_b: float
    growth_factor: float
    horizon: int
    admissible: bool
    threshold_fraction: float = 0.8
    connectors: list = field(default_factory=list)

    @property
    def spread(self) -> float:
        return self.tail_max - self.tail_min

    @property
    def threshold(self) -> float:
        return self.threshold_fraction * abs(self.ratio_a - self.ratio_b)

    @property
    def certified(self) -> bool:
        return self.admissible and self.spread >= self.threshold

    def to_dict(self):
        return {"boundaries": self.boundaries.tolist(), "ratios": self.ratios.tolist(),
                "tail_min": self.tail_min, "tail_max": self.tail_max, "spread": self.spread,
                "ratio_a": self.ratio_a, "ratio_b": self.ratio_b, "threshold": self.threshold,
                "growth_factor": self.growth_factor, "horizon": self.horizon,
                "admissible": self.admissible, "certified": self.certified,
                "connectors": self.connectors}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _as_word(w):
    return parse_word(w) if isinstance(w, str) else tuple(int(s) for s in w)


def alternating_word(sft: Sft, orbit_a, orbit_b, schedule: BlockSchedule, horizon: int):
    """Concatenate blocks cut from ``orbit_a^inf`` and ``orbit_b^inf`` with connectors.

    Returns ``(symbols, boundaries, connectors)``; ``boundaries`` are the
    end positions of the blocks (connectors included).
    """
    words = (_as_word(orbit_a), _as_word(orbit_b))
    pieces, boundaries, used = [], [], []
    total, last = 0, None
    for k, length in enumerate(schedule.lengths):
        if total >= horizon:
            break
        w = words[k % 2]
        block = np.resize(np.array(w, dtype=np.int8), length)
        if last is not None:
            u = connector(sft, last, int(block[0]))
            if u:
                pieces.append(np.array(u, dtype=np.int8))
                used.append(word_to_str(u))
                total += len(u)
        pieces.append(block)
        total += length
        boundaries.append(min(total, horizon))
        last = int(block[-1])
    symbols = np.concatenate(pieces)[:horizon]
    return symbols, np.array(boundaries), used


def irregular_point(family: PotentialFamily, orbit_a, orbit_b, schedule: BlockSchedule,
                    horizon: int, *, threshold_fraction: float = 0.8) -> OscillationRecord:
    """Running ratios at the block boundaries of an alternating-block orbit.

    The tail is the second half of the boundary list; ``certified`` holds
    when the tail spread reaches ``threshold_fraction * |rho_a - rho_b|``.

    Raises
    ------
    EqualRatios
        When the two periodic orbits have the same Birkhoff ratio.
    """
    wa, wb = _as_word(orbit_a), _as_word(orbit_b)
    ra = -periodic_sum(family.g, wa) / periodic_sum(family.jac, wa)
    rb = -periodic_sum(family.g, wb) / periodic_sum(family.jac, wb)
    if abs(ra - rb) < 1e-12:
        raise EqualRatios(f"orbits {word_to_str(wa)} and {word_to_str(wb)} share ratio {ra}")
    symbols, bounds, used = alternating_word(family.sft, wa, wb, schedule, horizon + family.depth - 1)
    admissible = family.sft.is_admissible(symbols)
    cg = np.cumsum(family.g.along(symbols))
    cj = np.cumsum(family.jac.along(symbols))
    bounds = np.unique(np.minimum(bounds, cg.size))
    ratios = -cg[bounds - 1] / cj[bounds - 1]
    tail = ratios[len(ratios) // 2:]
    return OscillationRecord(bounds, ratios, float(tail.min()), float(tail.max()), ra, rb,
                             schedule.growth_factor, horizon, bool(admissible),
                             threshold_fraction, used)


def dense_splice(sft: Sft, target_cylinder, tail) -> np.ndarray:
    """``target + connector + tail``, an admissible word starting with ``target``.

    Raises
    ------
    InadmissibleWord
        If ``target_cylinder`` is not admissible.
    """
    w = _as_word(target_cylinder)
    if not w or not sft.is_admissible(w):
        raise InadmissibleWord(f"target cylinder {w} is not admissible")
    t = np.asarray(_symbols(tail), dtype=np.int8)
    u = connector(sft, w[-1], int(t[0])) if t.size else ()
    out = np.concatenate([np.array(w + tuple(u), dtype=np.int8), t])
    if not sft.is_admissible(out):
        raise InadmissibleWord("spliced word failed the admissibility scan")
    return out


# -- Monte Carlo Gibbs check -------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalGibbs:
    low: float
    high: float
    c1: float
    c2: float
    depth: int
    sample_count: int
    seed: int
    rtol: float = 1e-9

    @property
    def inside(self) -> bool:
        return self.c1 * (1 - self.rtol) <= self.low and self.high <= self.c2 * (1 + self.rtol)

    def to_dict(self):
        d = asdict(self)
        d["inside"] = self.inside
        return d


def empirical_gibbs_check(measure: MarkovMeasure, potential: Potential, samples: int,
                          depth: int, seed: int, *, tol: float = ZERO_PRESSURE_TOL) -> EmpiricalGibbs:
    """Gibbs ratios ``measure([w]) / exp(S phi(w))`` along sampled prefixes ``w``.

    Raises
    ------
    NotZeroPressure
        If ``|P(potential)| > tol``.
    """
    data = perron_of(potential.sft, potential)
    if abs(data.log_lambda) > tol:
        raise NotZeroPressure(data.log_lambda, tol)
    if depth < potential.depth:
        raise ValueError("depth must be at least the potential depth")
    c1, c2 = gibbs_bounds(potential.sft, potential, data)
    paths = sample_orbits(measure, depth, samples, seed)
    ratios = np.empty(samples)
    for i, w in enumerate(paths):
        ratios[i] = cylinder_measure(measure, w.tolist()) / np.exp(potential.along(w).sum())
    return EmpiricalGibbs(float(ratios.min()), float(ratios.max()), c1, c2, depth, samples, seed)
