"""Locally constant potentials, Birkhoff sums and the family ``q*g - t*jac``.

A potential of depth ``m`` assigns one real value to every admissible word
of length ``m``; on a sequence it reads the value of the leading
``m``-block. Values are kept in an array aligned with
``cylinders(sft, m)``, so vectorised lookups reduce to a ``searchsorted``
on base-``p`` word codes (lexicographic order equals numeric order).
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissibleWord, StreamExhausted, WordTooShort
from .sft import Sft, cylinders, parse_word, word_to_str


def _encode(words, p):
    codes = np.zeros(len(words), dtype=np.int64)
    for w_idx, w in enumerate(words):
        c = 0
        for s in w:
            c = c * p + s
        codes[w_idx] = c
    return codes


@functools.lru_cache(maxsize=128)
def _table(sft, depth):
    """Cached ``(words, codes)`` for the admissible words of length ``depth``."""
    words = tuple(cylinders(sft, depth))
    codes = _encode(words, sft.alphabet_size)
    codes.setflags(write=False)
    return words, codes


@functools.lru_cache(maxsize=128)
def _refine_index(sft, depth, new_depth):
    """Index of each length-``new_depth`` word's leading ``depth``-block."""
    words, _ = _table(sft, new_depth)
    _, codes = _table(sft, depth)
    idx = np.searchsorted(codes, _encode([w[:depth] for w in words], sft.alphabet_size))
    idx.setflags(write=False)
    return idx


def _window_codes(symbols, m, p):
    """Base-``p`` code of every length-``m`` window of ``symbols`` (along axis 0)."""
    s = np.asarray(symbols, dtype=np.int64)
    n = s.shape[0] - m + 1
    codes = np.zeros((n,) + s.shape[1:], dtype=np.int64)
    for j in range(m):
        codes = codes * p + s[j:j + n]
    return codes


@dataclass(frozen=True, eq=False)
class Potential:
    """Real function on sequences that depends on the first ``depth`` symbols."""

    sft: Sft
    depth: int
    values: np.ndarray
    words: tuple = field(init=False, repr=False)
    codes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        words, codes = _table(self.sft, self.depth)
        values = np.array(self.values, dtype=float)
        if values.shape != (len(words),):
            raise ValueError(f"expected {len(words)} values for depth {self.depth}, "
                             f"got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("potential values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "codes", codes)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_mapping(cls, sft, depth, mapping):
        """Build from ``{word: value}``; words may be tuples or symbol strings."""
        table = {}
        for key, v in mapping.items():
            w = parse_word(key) if isinstance(key, str) else tuple(key)
            if len(w) != depth:
                raise ValueError(f"word {key!r} does not have length {depth}")
            if not sft.is_admissible(w):
                raise InadmissibleWord(f"word {key!r} is not admissible")
            table[w] = float(v)
        words = cylinders(sft, depth)
        missing = [word_to_str(w) for w in words if w not in table]
        if missing:
            raise ValueError(f"missing values for cylinders {missing}")
        return cls(sft, depth, np.array([table[w] for w in words]))

    @classmethod
    def constant(cls, sft, c, depth=1):
        return cls(sft, depth, np.full(len(cylinders(sft, depth)), float(c)))

    @classmethod
    def per_symbol(cls, sft, values):
        return cls(sft, 1, np.asarray(values, dtype=float))

    @classmethod
    def from_function(cls, sft, depth, func):
        return cls(sft, depth, np.array([func(w) for w in cylinders(sft, depth)]))

    # -- evaluation -------------------------------------------------------

    def index_of(self, word) -> int:
        w = tuple(word)
        if len(w) < self.depth:
            raise WordTooShort(f"word of length {len(w)} is shorter than depth {self.depth}")
        if not self.sft.is_admissible(w):
            raise InadmissibleWord(f"word {w} is not admissible")
        code = _encode([w[:self.depth]], self.sft.alphabet_size)[0]
        return int(np.searchsorted(self.codes, code))

    def evaluate(self, word) -> float:
        """Value on the leading ``depth``-block of ``word``."""
        return float(self.values[self.index_of(word)])

    def along(self, symbols) -> np.ndarray:
        """Values at every shift ``k = 0 .. len(symbols) - depth``.

        ``symbols`` must be admissible; no check is made here beyond the
        lookup itself.
        """
        codes = _window_codes(symbols, self.depth, self.sft.alphabet_size)
        idx = np.searchsorted(self.codes, codes)
        idx = np.minimum(idx, len(self.codes) - 1)
        if not np.array_equal(self.codes[idx], codes):
            raise InadmissibleWord("symbol sequence contains an inadmissible block")
        return self.values[idx]

    # -- algebra ----------------------------------------------------------

    def refine(self, new_depth: int) -> "Potential":
        """Same function written on cylinders of length ``new_depth``."""
        if new_depth < self.depth:
            raise ValueError("refine cannot reduce depth")
        if new_depth == self.depth:
            return self
        return Potential(self.sft, new_depth,
                         self.values[_refine_index(self.sft, self.depth, new_depth)])

    def _aligned(self, other):
        if self.sft != other.sft:
            raise ValueError("potentials live on different subshifts")
        d = max(self.depth, other.depth)
        return self.refine(d), other.refine(d)

    def __add__(self, other):
        if isinstance(other, Potential):
            a, b = self._aligned(other)
            return Potential(self.sft, a.depth, a.values + b.values)
        return Potential(self.sft, self.depth, self.values + float(other))

    __radd__ = __add__

    def __neg__(self):
        return Potential(self.sft, self.depth, -self.values)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return Potential(self.sft, self.depth, float(c) * self.values)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Potential(depth={self.depth}, values={self.values.tolist()})"

    # -- serialisation ----------------------------------------------------

    def to_dict(self) -> dict:
        return {"depth": self.depth,
                "values": {word_to_str(w): float(v) for w, v in zip(self.words, self.values)}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, sft, data):
        return cls.from_mapping(sft, int(data["depth"]), data["values"])

    @classmethod
    def from_json(cls, sft, text):
        return cls.from_dict(sft, json.loads(text))


class JacobianPotential(Potential):
    """Potential standing for ``log|Jac f|``; must be strictly positive."""

    def __post_init__(self):
        super().__post_init__()
        if not np.all(self.values > 0):
            raise ValueError("log-Jacobian values must be strictly positive (uniform expansion)")

    @classmethod
    def wrap(cls, base: Potential) -> "JacobianPotential":
        if isinstance(base, JacobianPotential):
            return base
        return cls(base.sft, base.depth, base.values)

    def refine(self, new_depth):
        return JacobianPotential.wrap(super().refine(new_depth))


def _take(symbols, count):
    if isinstance(symbols, np.ndarray) or isinstance(symbols, (list, tuple)):
        arr = np.asarray(symbols, dtype=np.int64)[:count]
    else:
        arr = np.fromiter(itertools.islice(symbols, count), dtype=np.int64)
    if arr.size < count:
        raise StreamExhausted(f"need {count} symbols, stream supplied {arr.size}")
    return arr


def birkhoff_sum(potential: Potential, symbols, n: int) -> float:
    """``sum_{k<n} potential(sigma^k x)``; consumes ``n + depth - 1`` symbols.

    ``symbols`` may be a sequence, an array or any (possibly infinite)
    iterator.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 0.0
    block = _take(symbols, n + potential.depth - 1)
    return float(np.sum(potential.along(block)))


def periodic_sum(potential: Potential, word) -> float:
    """Birkhoff sum over one period of the periodic point ``word^infinity``."""
    w = tuple(word)
    if not w:
        raise ValueError("empty word")
    need = len(w) + potential.depth - 1
    reps = -(-need // len(w))
    return float(np.sum(potential.along((w * reps)[:need])))


def normalize_to_zero_pressure(g_raw: Potential) -> Potential:
    """Shift ``g_raw`` by the constant ``-P(g_raw)``."""
    from .transfer import pressure

    return g_raw - pressure(g_raw.sft, g_raw)


@dataclass(frozen=True, eq=False)
class PotentialFamily:
    """The pair ``(g, jac)`` on a common depth, with ``P(g) = 0``.

    ``shift`` records the constant subtracted from the raw ``g`` during
    normalisation; it is computed once by :meth:`build`.
    """

    g: Potential
    jac: JacobianPotential
    shift: float = 0.0

    def __post_init__(self):
        if self.g.sft != self.jac.sft:
            raise ValueError("g and jac must share a subshift")
        if self.g.depth != self.jac.depth:
            raise ValueError("g and jac must share a depth; use PotentialFamily.build")

    @classmethod
    def build(cls, g_raw: Potential, jac: Potential) -> "PotentialFamily":
        from .transfer import pressure

        d = max(g_raw.depth, jac.depth)
        g_raw = g_raw.refine(d)
        shift = pressure(g_raw.sft, g_raw)
        return cls(g_raw - shift, JacobianPotential.wrap(jac.refine(d)), shift)

    @property
    def sft(self) -> Sft:
        return self.g.sft

    @property
    def depth(self) -> int:
        return self.g.depth

    def phi(self, q: float, t: float) -> Potential:
        return family_phi(self, q, t)

    def ratio_bounds(self):
        """Pointwise ``(min, max)`` of ``-g / jac``."""
        r = -self.g.values / self.jac.values
        return float(r.min()), float(r.max())

    def to_dict(self) -> dict:
        return {"sft": self.sft.to_dict(), "g": self.g.to_dict(),
                "jac": self.jac.to_dict(), "shift": self.shift}


def family_phi(family: PotentialFamily, q: float, t: float) -> Potential:
    """Pointwise ``q * g - t * jac``."""
    return Potential(family.sft, family.depth, q * family.g.values - t * family.jac.values)
