"""One-sided subshifts of finite type.

A subshift is stored as its 0/1 transition matrix ``A``; a finite word
``w`` is admissible when ``A[w[k], w[k+1]] == 1`` for every consecutive
pair. Words are plain tuples of ints throughout the package; the helpers
:func:`word_to_str` and :func:`parse_word` convert to and from the
single-character-per-symbol form used in JSON files.
"""

from __future__ import annotations

import functools
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRowOrColumn, ReducibleMatrix

MAX_ALPHABET = 64
MAX_DEPTH = 16

SYMBOL_CHARS = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_-"


def word_to_str(word) -> str:
    return "".join(SYMBOL_CHARS[s] for s in word)


def parse_word(text: str) -> tuple:
    try:
        return tuple(SYMBOL_CHARS.index(c) for c in text)
    except ValueError:
        raise ValueError(f"invalid symbol in word {text!r}") from None


@dataclass(frozen=True, eq=False)
class Sft:
    """Subshift of finite type defined by a validated 0/1 transition matrix.

    Build instances with :func:`validate`; the constructor does not check
    irreducibility.
    """

    transitions: np.ndarray
    aperiodic: bool = field(default=True)

    @property
    def alphabet_size(self) -> int:
        return self.transitions.shape[0]

    def allows(self, a: int, b: int) -> bool:
        return bool(self.transitions[a, b])

    def is_admissible(self, word) -> bool:
        w = np.asarray(word, dtype=np.int64)
        if w.size == 0:
            return True
        if w.min() < 0 or w.max() >= self.alphabet_size:
            return False
        return bool(np.all(self.transitions[w[:-1], w[1:]]))

    def is_cyclically_admissible(self, word) -> bool:
        return self.is_admissible(word) and self.allows(word[-1], word[0])

    def __eq__(self, other):
        return isinstance(other, Sft) and np.array_equal(self.transitions, other.transitions)

    def __hash__(self):
        return hash(self.transitions.tobytes())

    def __repr__(self):
        return f"Sft(alphabet_size={self.alphabet_size}, transitions={self.transitions.tolist()})"

    def to_dict(self) -> dict:
        return {"alphabet_size": self.alphabet_size,
                "transitions": self.transitions.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Sft":
        A = np.asarray(data["transitions"])
        if A.ndim != 2 or A.shape[0] != data["alphabet_size"]:
            raise ValueError("transitions must be an alphabet_size x alphabet_size matrix")
        return validate(A)

    @classmethod
    def from_json(cls, text: str) -> "Sft":
        return cls.from_dict(json.loads(text))


def _reachable(A, start):
    seen = np.zeros(A.shape[0], dtype=bool)
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(A[i]):
            if not seen[j]:
                seen[j] = True
                queue.append(j)
    return seen


def validate(matrix) -> Sft:
    """Check a 0/1 matrix and wrap it as an :class:`Sft`.

    Raises
    ------
    EmptyRowOrColumn
        If some symbol has no successor or no predecessor.
    ReducibleMatrix
        For the first pair ``(i, j)`` (row-major) with no path ``i -> j``.
    """
    A = np.asarray(matrix)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("transition matrix must be square")
    p = A.shape[0]
    if p < 2:
        raise ValueError("alphabet must have at least two symbols")
    if p > MAX_ALPHABET:
        raise ValueError(f"alphabet size {p} exceeds cap {MAX_ALPHABET}")
    if not np.all((A == 0) | (A == 1)):
        raise ValueError("transition matrix entries must be 0 or 1")
    A = A.astype(np.int8)
    for i in range(p):
        if not A[i].any() or not A[:, i].any():
            raise EmptyRowOrColumn(i)
    for i in range(p):
        reach = _reachable(A, i)
        if not reach.all():
            raise ReducibleMatrix(i, int(np.flatnonzero(~reach)[0]))
    A.setflags(write=False)
    return Sft(A, aperiodic=_is_aperiodic(A))


def _is_aperiodic(A) -> bool:
    # period = gcd of cycle lengths through symbol 0, via BFS levels
    p = A.shape[0]
    level = np.full(p, -1)
    level[0] = 0
    queue = deque([0])
    period = 0
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(A[i]):
            if level[j] < 0:
                level[j] = level[i] + 1
                queue.append(j)
            else:
                period = np.gcd(period, level[i] + 1 - level[j])
    return period == 1


def full_shift(p: int) -> Sft:
    return validate(np.ones((p, p), dtype=np.int8))


def golden_mean() -> Sft:
    return validate([[1, 1], [1, 0]])


def cylinders(sft: Sft, depth: int) -> list:
    """All admissible words of length ``depth`` in lexicographic order."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > MAX_DEPTH:
        raise ValueError(f"depth {depth} exceeds cap {MAX_DEPTH}")
    return list(_cylinder_words(sft, depth))


@functools.lru_cache(maxsize=128)
def _cylinder_words(sft: Sft, depth: int) -> tuple:
    succ = [np.flatnonzero(row).tolist() for row in sft.transitions]
    words = [(i,) for i in range(sft.alphabet_size)]
    for _ in range(depth - 1):
        words = [w + (j,) for w in words for j in succ[w[-1]]]
    return tuple(words)


def _lyndon_words(p, n):
    # Duval's generation: every Lyndon word of length <= n, lexicographic order
    w = [-1]
    while w:
        w[-1] += 1
        yield tuple(w)
        m = len(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == p - 1:
            w.pop()


@dataclass(frozen=True)
class PeriodicOrbit:
    """Primitive periodic orbit, stored as its least rotation."""

    word: tuple

    @property
    def period(self) -> int:
        return len(self.word)

    def __str__(self):
        return word_to_str(self.word)


def periodic_orbits(sft: Sft, max_period: int) -> list:
    """Every periodic orbit of minimal period ``<= max_period``.

    Orbits are listed by period, then lexicographically by canonical
    word. Each orbit appears exactly once; ``(01)`` and ``(0101)`` are the
    same orbit and only the former is reported.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    found = [PeriodicOrbit(w) for w in _lyndon_words(sft.alphabet_size, max_period)
             if sft.is_cyclically_admissible(w)]
    found.sort(key=lambda o: (o.period, o.word))
    return found


def connector(sft: Sft, a: int, b: int) -> tuple:
    """Shortest word ``u`` such that ``a + u + b`` is admissible.

    Returns the empty tuple when ``a -> b`` is itself allowed.
    """
    A = sft.transitions
    if A[a, b]:
        return ()
    parent = {}
    queue = deque([a])
    seen = {a}
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(A[i]).tolist():
            if j in seen:
                continue
            seen.add(j)
            parent[j] = i
            if A[j, b]:
                path = [j]
                while parent.get(path[-1], a) != a:
                    path.append(parent[path[-1]])
                return tuple(reversed(path))
            queue.append(j)
    # unreachable for validated (irreducible) shifts
    raise ReducibleMatrix(a, b)


def splice(sft: Sft, *parts) -> tuple:
    """Concatenate words, inserting connectors wherever a junction is forbidden."""
    out = []
    for part in parts:
        part = tuple(part)
        if not part:
            continue
        if out:
            out.extend(connector(sft, out[-1], part[0]))
        out.extend(part)
    return tuple(out)
