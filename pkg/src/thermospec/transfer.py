"""Transfer-operator computations for locally constant potentials.

For a potential of depth ``m`` we work on the higher-block graph whose
states are the admissible words of length ``L = max(m - 1, 1)`` and whose
edges are the admissible words of length ``L + 1``. The weighted matrix

    M[s, s'] = exp(phi(s + last(s')))      (zero off the graph)

has Perron root ``lambda`` with ``P(phi) = log lambda``. With right and
left Perron vectors ``u`` and ``v`` (``v . u = 1``) the equilibrium state
is the stationary Markov chain

    P~[s, s'] = M[s, s'] u[s'] / (lambda u[s]),     pi[s] = v[s] u[s],

and the eigenmeasure (the conformal measure of the dual operator) gives a
cylinder ``w`` with last state ``s`` the mass
``u[s] prod M / lambda**edges`` when ``u`` is scaled to sum to one.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, InadmissibleWord, NotZeroPressure, SingularSystem
from .potential import Potential
from .sft import Sft, cylinders, word_to_str

PERRON_TOL = 1e-13
PERRON_MAX_ITER = 10**6
# accepted when rounding keeps the residual from reaching PERRON_TOL
PERRON_ACCEPT = 1e-12
PERRON_STALL = 200
ZERO_PRESSURE_TOL = 1e-10


# -- higher-block structure -----------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockGraph:
    """States of length ``state_len`` and the edges between them, in lex order."""

    sft: Sft
    state_len: int
    states: tuple
    state_codes: np.ndarray
    last_symbol: np.ndarray
    indptr: np.ndarray
    edge_src: np.ndarray
    edge_dst: np.ndarray

    @property
    def n_states(self):
        return len(self.states)

    @property
    def n_edges(self):
        return len(self.edge_src)

    def state_index(self, word) -> int:
        code = 0
        for s in word:
            code = code * self.sft.alphabet_size + s
        i = int(np.searchsorted(self.state_codes, code))
        if i >= len(self.state_codes) or self.state_codes[i] != code:
            raise InadmissibleWord(f"{word} is not an admissible state")
        return i

    def edge_matrix(self, edge_values) -> np.ndarray:
        """Dense state matrix with ``edge_values`` placed on the edges."""
        M = np.zeros((self.n_states, self.n_states))
        M[self.edge_src, self.edge_dst] = edge_values
        return M

    def extend(self, last):
        """Extend words ending in states ``last`` by every allowed symbol.

        Returns ``(parent, edge)``: for each child word, the index of its
        parent word and the edge used. Lex order is preserved.
        """
        starts = self.indptr[last]
        counts = self.indptr[last + 1] - starts
        parent = np.repeat(np.arange(len(last)), counts)
        first = np.cumsum(counts) - counts
        offsets = np.arange(parent.size) - np.repeat(first, counts)
        return parent, starts[parent] + offsets


@functools.lru_cache(maxsize=64)
def block_graph(sft: Sft, state_len: int) -> BlockGraph:
    p = sft.alphabet_size
    states = tuple(cylinders(sft, state_len))
    codes = np.array([_code(s, p) for s in states], dtype=np.int64)
    succ_lists = []
    for s in states:
        nxt = [s[1:] + (j,) for j in np.flatnonzero(sft.transitions[s[-1]]).tolist()]
        succ_lists.append(np.searchsorted(codes, [_code(w, p) for w in nxt]))
    indptr = np.zeros(len(states) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(x) for x in succ_lists])
    dst = np.concatenate(succ_lists).astype(np.int64)
    src = np.repeat(np.arange(len(states)), np.diff(indptr))
    last = np.array([s[-1] for s in states], dtype=np.int64)
    for arr in (codes, indptr, dst, src, last):
        arr.setflags(write=False)
    return BlockGraph(sft, state_len, states, codes, last, indptr, src, dst)


def _code(word, p):
    c = 0
    for s in word:
        c = c * p + s
    return c


def _edge_potential(potential: Potential):
    """Refine to edge depth and return ``(graph, edge values)``."""
    d = max(potential.depth, 2)
    return block_graph(potential.sft, d - 1), potential.refine(d).values


def weighted_matrix(sft: Sft, potential: Potential) -> np.ndarray:
    """Nonnegative matrix ``M[s, s'] = exp(phi(s + last(s')))`` on the block graph."""
    if potential.sft != sft:
        raise ValueError("potential is defined on a different subshift")
    graph, values = _edge_potential(potential)
    return graph.edge_matrix(np.exp(values))


# -- Perron eigendata -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class PerronData:
    """Perron root and positive eigenvectors of a nonnegative matrix.

    ``right`` is scaled to max entry 1 and ``left`` so that
    ``left @ right == 1``. When the matrix was built from a shifted
    potential, ``log_scale`` holds the shift so that
    ``log(lambda_) + log_scale`` is the pressure.
    """

    lambda_: float
    right: np.ndarray
    left: np.ndarray
    states: tuple = None
    log_scale: float = 0.0
    iterations: int = 0
    residual: float = 0.0

    @property
    def log_lambda(self) -> float:
        return math.log(self.lambda_) + self.log_scale

    def to_dict(self) -> dict:
        return {
            "states": None if self.states is None else [word_to_str(s) for s in self.states],
            "lambda": self.lambda_ * math.exp(self.log_scale),
            "log_lambda": self.log_lambda,
            "right_vec": self.right.tolist(),
            "left_vec": self.left.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _residual(M, u, v, lam):
    ru = np.max(np.abs(M @ u - lam * u)) / (lam * np.max(np.abs(u)))
    rv = np.max(np.abs(v @ M - lam * v)) / (lam * np.max(np.abs(v)))
    return max(ru, rv)


def perron(matrix, *, tol=PERRON_TOL, max_iter=PERRON_MAX_ITER, states=None,
           log_scale=0.0) -> PerronData:
    """Perron root and eigenvectors of an irreducible nonnegative matrix.

    Power iteration on ``M + s I`` (``s = max M``, which removes any
    periodicity) started from the all-ones vector. The iteration is first
    accelerated by repeated squaring of the normalised matrix, then
    polished by plain power steps until the relative eigen-residual of
    both vectors is at most ``tol``. When rounding stalls the residual
    above ``tol`` (entries of very different magnitudes), a residual of
    at most ``PERRON_ACCEPT`` that has not improved for ``PERRON_STALL``
    steps is accepted.

    Raises
    ------
    ConvergenceFailure
        If the residual is still above ``tol`` after ``max_iter`` power steps.
    """
    M = np.array(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(M < 0) or not np.all(np.isfinite(M)):
        raise ValueError("matrix must be finite and nonnegative")
    n = M.shape[0]
    shift = M.max()
    if shift <= 0:
        raise ValueError("matrix is zero")
    S = M + shift * np.eye(n)

    B = S / S.max()
    for _ in range(64):
        B2 = B @ B
        B2 /= B2.max()
        done = np.max(np.abs(B2 - B)) <= 1e-15
        B = B2
        if done:
            break
    u = B.sum(axis=1)
    v = B.sum(axis=0)
    u /= u.max()
    v /= v.max()

    residual = best = np.inf
    since_best = 0
    for it in range(max_iter + 1):
        lam = float(v @ M @ u) / float(v @ u)
        residual = _residual(M, u, v, lam)
        if residual <= tol:
            break
        if residual < best:
            best, since_best = residual, 0
        else:
            since_best += 1
            if since_best >= PERRON_STALL and residual <= max(tol, PERRON_ACCEPT):
                break
        if it == max_iter:
            raise ConvergenceFailure(it, residual)
        u = S @ u
        u /= u.max()
        v = v @ S
        v /= v.max()
    if np.any(u <= 0) or np.any(v <= 0):
        raise ConvergenceFailure(it, residual)
    v = v / float(v @ u)
    u.setflags(write=False)
    v.setflags(write=False)
    return PerronData(lam, u, v, states, log_scale, it, residual)


def perron_of(sft: Sft, potential: Potential) -> PerronData:
    """Perron data of the weighted matrix, computed with an overflow-safe shift."""
    if potential.sft != sft:
        raise ValueError("potential is defined on a different subshift")
    graph, values = _edge_potential(potential)
    c = float(values.max())
    return perron(graph.edge_matrix(np.exp(values - c)), states=graph.states, log_scale=c)


def pressure(sft: Sft, potential: Potential) -> float:
    """Topological pressure ``log lambda`` of a locally constant potential."""
    return perron_of(sft, potential).log_lambda


# -- Markov measures -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Shift-invariant Markov measure on words of length ``state_len``."""

    sft: Sft
    state_len: int
    stochastic: np.ndarray
    stationary: np.ndarray

    @property
    def graph(self) -> BlockGraph:
        return block_graph(self.sft, self.state_len)

    @property
    def states(self) -> tuple:
        return self.graph.states

    def edge_probabilities(self) -> np.ndarray:
        """Transition probability on every edge of the block graph."""
        g = self.graph
        return self.stochastic[g.edge_src, g.edge_dst]

    def edge_masses(self) -> np.ndarray:
        """Stationary mass of every ``state_len + 1`` cylinder."""
        g = self.graph
        return self.stationary[g.edge_src] * self.edge_probabilities()

    def to_dict(self) -> dict:
        return {"states": [word_to_str(s) for s in self.states],
                "stochastic": self.stochastic.tolist(),
                "stationary": self.stationary.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def stationary_distribution(P) -> np.ndarray:
    """Stationary row vector of a stochastic matrix with one recurrent class."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def markov_measure(sft: Sft, stochastic, state_len: int = 1, stationary=None) -> MarkovMeasure:
    """Wrap a row-stochastic matrix on the block graph of ``sft``.

    Transitions may be zero on allowed edges (e.g. a point mass on a
    periodic orbit) but must vanish off the graph.
    """
    g = block_graph(sft, state_len)
    P = np.array(stochastic, dtype=float)
    if P.shape != (g.n_states, g.n_states):
        raise ValueError(f"stochastic matrix must be {g.n_states}x{g.n_states}")
    allowed = g.edge_matrix(1.0) > 0
    if np.any(P[~allowed] != 0) or np.any(P < 0):
        raise ValueError("stochastic matrix puts mass on forbidden transitions")
    if not np.allclose(P.sum(axis=1), 1.0, atol=1e-12, rtol=0):
        raise ValueError("rows must sum to 1")
    pi = stationary_distribution(P) if stationary is None else np.asarray(stationary, float)
    P.setflags(write=False)
    pi.setflags(write=False)
    return MarkovMeasure(sft, state_len, P, pi)


def bernoulli(sft: Sft, probs) -> MarkovMeasure:
    """Product measure with symbol probabilities ``probs`` on a full shift."""
    probs = np.asarray(probs, dtype=float)
    P = np.tile(probs, (len(probs), 1)) * sft.transitions
    return markov_measure(sft, P, 1, stationary=probs)


def random_markov_measure(sft: Sft, rng, state_len: int = 1, concentration: float = 1.0):
    """Markov measure with independent Gamma-distributed edge weights."""
    g = block_graph(sft, state_len)
    w = rng.gamma(concentration, size=g.n_edges) + 1e-300
    P = g.edge_matrix(w)
    P /= P.sum(axis=1, keepdims=True)
    return markov_measure(sft, P, state_len)


def equilibrium_state(sft: Sft, potential: Potential) -> MarkovMeasure:
    """Unique equilibrium state of ``potential`` as a stationary Markov chain."""
    data = perron_of(sft, potential)
    return _stochasticize(sft, potential, data)


def _stochasticize(sft, potential, data):
    graph, values = _edge_potential(potential)
    u, v = data.right, data.left
    w = np.exp(values - data.log_scale) * u[graph.edge_dst] / (data.lambda_ * u[graph.edge_src])
    P = graph.edge_matrix(w)
    P /= P.sum(axis=1, keepdims=True)  # removes the residual rounding error
    pi = v * u
    pi = pi / pi.sum()
    P.setflags(write=False)
    pi.setflags(write=False)
    return MarkovMeasure(sft, graph.state_len, P, pi)


# -- cylinder masses -------------------------------------------------------


def _walk(graph, start, edge_factors, max_len, op=np.multiply):
    """Products along every admissible word of length ``state_len .. max_len``.

    Yields ``(length, codes, values, last_state)`` with words in lex order;
    ``values[w] = start[first state] * prod(edge_factors over w's edges)``.
    Pass ``op=np.add`` to accumulate sums instead.
    """
    p = graph.sft.alphabet_size
    last = np.arange(graph.n_states)
    codes = graph.state_codes.copy()
    vals = np.asarray(start, dtype=float).copy()
    length = graph.state_len
    yield length, codes, vals, last
    while length < max_len:
        parent, edge = graph.extend(last)
        last = graph.edge_dst[edge]
        codes = codes[parent] * p + graph.last_symbol[last]
        vals = op(vals[parent], edge_factors[edge])
        length += 1
        yield length, codes, vals, last


def _marginal(sft, codes, vals, from_len, to_len):
    """Sum word values over extensions: length ``from_len`` -> ``to_len``."""
    p = sft.alphabet_size
    target = np.array([_code(w, p) for w in cylinders(sft, to_len)], dtype=np.int64)
    prefix = codes // p ** (from_len - to_len)
    idx = np.searchsorted(target, prefix)
    return target, np.bincount(idx, weights=vals, minlength=len(target))


def _cylinder_tables(graph, start, edge_factors, max_len, end=None):
    """``{length: (codes, values)}`` for every length ``1 .. max_len``.

    ``end`` optionally weights each word by its last state as well.
    """
    sft = graph.sft
    out = {}
    top = max(max_len, graph.state_len)
    for length, codes, vals, last in _walk(graph, start, edge_factors, top):
        out[length] = (codes, vals if end is None else vals * end[last])
    codes, vals = out[graph.state_len]
    for length in range(1, graph.state_len):
        out[length] = _marginal(sft, codes, vals, graph.state_len, length)
    return out


def cylinder_measure(measure: MarkovMeasure, word) -> float:
    """Mass of the cylinder ``[word]``; zero for inadmissible words."""
    word = tuple(word)
    if not word:
        return 1.0
    if not measure.sft.is_admissible(word):
        return 0.0
    g = measure.graph
    L = g.state_len
    if len(word) < L:
        _, vals = _cylinder_tables(g, measure.stationary, measure.edge_probabilities(),
                                   L)[len(word)]
        return float(vals[np.searchsorted(_cylinder_codes(measure.sft, len(word)),
                                          _code(word, measure.sft.alphabet_size))])
    idx = [g.state_index(word[k:k + L]) for k in range(len(word) - L + 1)]
    mass = measure.stationary[idx[0]]
    for a, b in zip(idx, idx[1:]):
        mass *= measure.stochastic[a, b]
    return float(mass)


def _cylinder_codes(sft, length):
    p = sft.alphabet_size
    return np.array([_code(w, p) for w in cylinders(sft, length)], dtype=np.int64)


def cylinder_masses(measure: MarkovMeasure, length: int):
    """``(words, masses)`` for every admissible word of the given length."""
    tables = _cylinder_tables(measure.graph, measure.stationary,
                              measure.edge_probabilities(), length)
    return cylinders(measure.sft, length), tables[length][1]


# -- integrals ---------------------------------------------------------------


def entropy(measure: MarkovMeasure) -> float:
    """Kolmogorov-Sinai entropy ``-sum pi_i P_ij log P_ij`` (``0 log 0 = 0``)."""
    P = measure.stochastic
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(P), 0.0)
    return float(max(0.0, -measure.stationary @ terms.sum(axis=1)))


def integrate(measure: MarkovMeasure, potential: Potential) -> float:
    """``int potential d(measure)``."""
    if potential.sft != measure.sft:
        raise ValueError("potential and measure live on different subshifts")
    edge_depth = measure.state_len + 1
    if potential.depth <= edge_depth:
        return float(measure.edge_masses() @ potential.refine(edge_depth).values)
    _, masses = cylinder_masses(measure, potential.depth)
    return float(masses @ potential.values)


def free_energy(measure: MarkovMeasure, potential: Potential) -> float:
    """``h(measure) + int potential``; at most ``P(potential)``."""
    return entropy(measure) + integrate(measure, potential)


def _edge_chain(measure):
    g = measure.graph
    probs = measure.edge_probabilities()
    # edge e -> edge e' whenever e' starts where e ends
    Q = np.zeros((g.n_edges, g.n_edges))
    for e in range(g.n_edges):
        s = g.edge_dst[e]
        out = np.arange(g.indptr[s], g.indptr[s + 1])
        Q[e, out] = probs[out]
    return Q, measure.edge_masses()


def asymptotic_variance(measure: MarkovMeasure, h1: Potential, h2: Potential,
                        convention: str = "symmetric") -> float:
    """Correlation sum of ``h1`` and ``h2`` under ``measure``.

    With ``C(k) = E[h1(x) h2(sigma^k x)] - E[h1] E[h2]``:

    * ``"one_sided"``: ``sum_{k >= 0} C(k)``
    * ``"symmetric"``: ``C(0) + sum_{k >= 1} (C(k) + C(-k))``, the
      Green-Kubo variance that equals the second derivative of pressure.

    Both sums are evaluated exactly through the fundamental matrix of the
    chain on edges, ``Z = (I - Q + 1 pi)^{-1}``.

    Raises
    ------
    SingularSystem
        If the fundamental system is numerically singular.
    """
    if convention not in ("one_sided", "symmetric"):
        raise ValueError(f"unknown convention {convention!r}")
    edge_depth = measure.state_len + 1
    if max(h1.depth, h2.depth) > edge_depth:
        raise ValueError(f"potentials deeper than {edge_depth} need a finer measure")
    f1 = h1.refine(edge_depth).values
    f2 = h2.refine(edge_depth).values
    Q, w = _edge_chain(measure)
    f1 = f1 - w @ f1
    f2 = f2 - w @ f2
    K = np.eye(len(w)) - Q + np.outer(np.ones(len(w)), w)
    if np.linalg.cond(K) > 1e12:
        raise SingularSystem("fundamental matrix is numerically singular")
    z2 = np.linalg.solve(K, f2)
    one = float(w @ (f1 * z2))
    if convention == "one_sided":
        return one
    z1 = np.linalg.solve(K, f1)
    return one + float(w @ (f2 * z1)) - float(w @ (f1 * f2))


# -- Gibbs property and conformality ----------------------------------------


@dataclass(frozen=True)
class GibbsCertificate:
    """Gibbs constants from eigendata plus the exhaustive ratio check.

    The ratio of a cylinder ``w`` is ``nu([w]) / exp(S phi(w))`` where the
    Birkhoff sum runs over the windows of ``phi`` that fit inside ``w``.
    """

    c1: float
    c2: float
    checked_depth: int
    worst_ratio_low: float
    worst_ratio_high: float
    n_cylinders: int
    certified: bool
    rtol: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _require_zero_pressure(P, tol):
    if abs(P) > tol:
        raise NotZeroPressure(P, tol)


def gibbs_bounds(sft: Sft, potential: Potential, data: PerronData = None):
    """A priori constants ``(C1, C2)`` bounding every Gibbs ratio."""
    if data is None:
        data = perron_of(sft, potential)
    graph, _ = _edge_potential(potential)
    u, v = data.right, data.left
    tail = u
    if potential.depth == 1:
        # one window beyond the edges of the word: the last symbol's value
        tail = u * np.exp(-potential.values[graph.last_symbol])
    return float(v.min() * tail.min()), float(v.max() * tail.max())


def gibbs_ratios(measure: MarkovMeasure, potential: Potential, max_depth: int):
    """Gibbs ratios of every cylinder of length ``potential.depth .. max_depth``.

    The measure must live on the edge graph of ``potential`` (as
    :func:`equilibrium_state` produces).
    """
    graph, values = _edge_potential(potential)
    if measure.state_len != graph.state_len:
        raise ValueError("measure and potential use different block graphs")
    masses = _walk(graph, measure.stationary, measure.edge_probabilities(), max_depth)
    sums = _walk(graph, np.zeros(graph.n_states), values, max_depth, op=np.add)
    out = {}
    for (length, _, mass, last), (_, _, birkhoff, _) in zip(masses, sums):
        if length < potential.depth:
            continue
        if potential.depth == 1:
            birkhoff = birkhoff + potential.values[graph.last_symbol[last]]
        out[length] = mass / np.exp(birkhoff)
    return out


def gibbs_certificate(sft: Sft, potential: Potential, max_depth: int, *,
                      symmetric: bool = False, tol: float = ZERO_PRESSURE_TOL,
                      rtol: float = 1e-9) -> GibbsCertificate:
    """Exhaustively check ``C1 <= nu([w]) / exp(S phi(w)) <= C2``.

    ``C1``, ``C2`` come from the extreme components of the Perron vectors.
    With ``symmetric=True`` they are replaced by ``(1/C, C)``,
    ``C = max(C2, 1/C1)``. ``rtol`` absorbs the rounding of ``lambda``
    away from exactly 1.

    Raises
    ------
    NotZeroPressure
        If ``|P(potential)| > tol``.
    """
    data = perron_of(sft, potential)
    _require_zero_pressure(data.log_lambda, tol)
    c1, c2 = gibbs_bounds(sft, potential, data)
    if symmetric:
        c = max(c2, 1.0 / c1)
        c1, c2 = 1.0 / c, c
    measure = _stochasticize(sft, potential, data)
    low, high, count = np.inf, -np.inf, 0
    for ratios in gibbs_ratios(measure, potential, max_depth).values():
        low = min(low, float(ratios.min()))
        high = max(high, float(ratios.max()))
        count += ratios.size
    ok = c1 * (1 - rtol) <= low and high <= c2 * (1 + rtol)
    return GibbsCertificate(c1, c2, max_depth, low, high, count, bool(ok), rtol)


def eigenmeasure_tables(sft: Sft, potential: Potential, max_depth: int, data=None):
    """Cylinder masses ``{length: (codes, masses)}`` of the eigenmeasure."""
    if data is None:
        data = perron_of(sft, potential)
    graph, values = _edge_potential(potential)
    u = data.right / data.right.sum()
    factors = np.exp(values - data.log_scale) / data.lambda_
    return _cylinder_tables(graph, np.ones(graph.n_states), factors,
                            max(max_depth, potential.depth), end=u)


def conformality_check(sft: Sft, potential: Potential, max_depth: int, *,
                       strict: bool = True, tol: float = ZERO_PRESSURE_TOL) -> float:
    """Largest defect of ``m(sigma [w]) = int_[w] exp(-phi) dm`` over ``|w| <= max_depth``.

    ``m`` is the eigenmeasure of ``potential``. At zero pressure the
    identity is exact up to rounding. With ``strict=False`` a potential of
    nonzero pressure is accepted and the defect measures how far it is
    from being conformal.

    Raises
    ------
    NotZeroPressure
        In strict mode when ``|P(potential)| > tol``.
    """
    data = perron_of(sft, potential)
    if strict:
        _require_zero_pressure(data.log_lambda, tol)
    m = potential.depth
    p = sft.alphabet_size
    tables = eigenmeasure_tables(sft, potential, max_depth, data)
    defect = 0.0
    for length in range(1, max_depth + 1):
        codes, mass = tables[length]
        if length == 1:
            image = sft.transitions @ mass
        else:
            sub_codes, sub_mass = tables[length - 1]
            image = sub_mass[np.searchsorted(sub_codes, codes % p ** (length - 1))]
        if length >= m:
            idx = np.searchsorted(potential.codes, codes // p ** (length - m))
            integral = np.exp(-potential.values[idx]) * mass
        else:
            m_codes, m_mass = tables[m]
            parent = np.searchsorted(codes, m_codes // p ** (m - length))
            integral = np.bincount(parent, weights=np.exp(-potential.values) * m_mass,
                                   minlength=len(codes))
        defect = max(defect, float(np.max(np.abs(image - integral))))
    return defect
