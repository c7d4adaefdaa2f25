"""Target sets Z inside the shift and exact word counting over them.

A target is one of :class:`Full`, :class:`Subshift` (forbidden words),
:class:`FrequencyWindow` (empirical symbol frequencies in given intervals)
or a :class:`UnionOf` several of these.  Frequency constraints are applied
at the depth of the word being tested, so they are not prefix-closed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .errors import ConfigError, InvalidDepth
from .symbolic import ShiftSystem, Word, as_word

FREQ_TOL = 1e-9


@dataclass(frozen=True)
class Full:
    pass


@dataclass(frozen=True)
class Subshift:
    forbidden: tuple[Word, ...]

    def __post_init__(self):
        words = tuple(as_word(w) for w in self.forbidden)
        if not words or any(len(w) == 0 for w in words):
            raise ConfigError("a subshift needs a nonempty list of nonempty forbidden words")
        object.__setattr__(self, "forbidden", words)

    @property
    def memory(self) -> int:
        return max(len(w) for w in self.forbidden) - 1

    def allows_end(self, w: Word) -> bool:
        """True unless some forbidden word is a suffix of ``w``."""
        return not any(len(f) <= len(w) and w[len(w) - len(f):] == f for f in self.forbidden)


@dataclass(frozen=True)
class FrequencyWindow:
    """Per-symbol frequency intervals; unspecified symbols are unconstrained."""

    windows: tuple[tuple[int, float, float], ...]

    def __post_init__(self):
        # accepts {symbol: (lo, hi)} or an iterable of (symbol, lo, hi)
        if isinstance(self.windows, Mapping):
            items = [(s, *v) for s, v in self.windows.items()]
        else:
            items = list(self.windows)
        norm = []
        for sym, lo, hi in items:
            sym, lo, hi = int(sym), float(lo), float(hi)
            if not 0 <= lo <= hi <= 1:
                raise ConfigError(f"frequency window for symbol {sym} must satisfy 0 <= lo <= hi <= 1")
            norm.append((sym, lo, hi))
        if len({s for s, _, _ in norm}) != len(norm):
            raise ConfigError("frequency windows repeat a symbol")
        object.__setattr__(self, "windows", tuple(sorted(norm)))

    def depth_ok(self, counts: Sequence[int], depth: int) -> bool:
        if depth == 0:
            return True
        for sym, lo, hi in self.windows:
            c = counts[sym - 1]
            if c < lo * depth - FREQ_TOL or c > hi * depth + FREQ_TOL:
                return False
        return True


@dataclass(frozen=True)
class UnionOf:
    parts: tuple

    def __post_init__(self):
        flat = []
        for p in self.parts:
            flat.extend(p.parts if isinstance(p, UnionOf) else [p])
        if not flat:
            raise ConfigError("a union target needs at least one part")
        object.__setattr__(self, "parts", tuple(flat))


TargetSet = Union[Full, Subshift, FrequencyWindow, UnionOf]


def parts_of(Z: TargetSet) -> tuple:
    return Z.parts if isinstance(Z, UnionOf) else (Z,)


def validate_target(sys: ShiftSystem, Z: TargetSet) -> None:
    for p in parts_of(Z):
        if isinstance(p, Subshift):
            for w in p.forbidden:
                if not sys.is_admissible(w):
                    raise ConfigError(f"forbidden word {w} is not admissible in the system")
        elif isinstance(p, FrequencyWindow):
            lo = {s: 0.0 for s in range(1, sys.k + 1)}
            hi = {s: 1.0 for s in range(1, sys.k + 1)}
            for s, a, b in p.windows:
                if not 1 <= s <= sys.k:
                    raise ConfigError(f"frequency window names symbol {s} outside 1..{sys.k}")
                lo[s], hi[s] = a, b
            if sum(lo.values()) > 1 + FREQ_TOL or sum(hi.values()) < 1 - FREQ_TOL:
                raise ConfigError("frequency windows need sum(lo) <= 1 <= sum(hi)")
        elif not isinstance(p, Full):
            raise ConfigError(f"unknown target part {p!r}")


def is_sft(Z: TargetSet) -> bool:
    return all(isinstance(p, (Full, Subshift)) for p in parts_of(Z)) and not isinstance(Z, UnionOf)


# state = (suffix, alive flags per part, symbol counts or None)
State = tuple


class TargetAutomaton:
    """Finite-memory recogniser for words of ``sys`` lying in ``Z``.

    States remember just enough suffix for the transition matrix and the
    forbidden words, which parts are still alive, and (when needed) symbol
    counts.  Words reaching the same state have identical futures.
    """

    def __init__(self, sys: ShiftSystem, Z: TargetSet, track_counts: bool = False):
        validate_target(sys, Z)
        self.sys = sys
        self.parts = parts_of(Z)
        self.track_counts = track_counts or any(isinstance(p, FrequencyWindow) for p in self.parts)
        mem = [p.memory for p in self.parts if isinstance(p, Subshift)]
        self.memory = max([1] + mem)

    @property
    def initial(self) -> State:
        counts = (0,) * self.sys.k if self.track_counts else None
        return ((), (True,) * len(self.parts), counts)

    def step(self, state: State, j: int) -> State | None:
        suffix, alive, counts = state
        if suffix and not self.sys.allowed(suffix[-1], j):
            return None
        ext = suffix + (j,)
        new_alive = tuple(
            a and (not isinstance(p, Subshift) or p.allows_end(ext)) for a, p in zip(alive, self.parts)
        )
        if not any(new_alive):
            return None
        if counts is not None:
            counts = counts[: j - 1] + (counts[j - 1] + 1,) + counts[j:]
        return (ext[-self.memory:], new_alive, counts)

    def in_target(self, state: State, depth: int) -> bool:
        _, alive, counts = state
        for a, p in zip(alive, self.parts):
            if a and (not isinstance(p, FrequencyWindow) or p.depth_ok(counts, depth)):
                return True
        return False


def word_count(sys: ShiftSystem, Z: TargetSet, n: int) -> int:
    """Number of admissible length-``n`` words compatible with ``Z``."""
    if n < 1:
        raise InvalidDepth(f"word_count needs n >= 1, got {n}")
    auto = TargetAutomaton(sys, Z)
    layer: dict[State, int] = {auto.initial: 1}
    for _ in range(n):
        nxt: dict[State, int] = {}
        for st, c in layer.items():
            for j in range(1, sys.k + 1):
                s2 = auto.step(st, j)
                if s2 is not None:
                    nxt[s2] = nxt.get(s2, 0) + c
        layer = nxt
    return sum(c for st, c in layer.items() if auto.in_target(st, n))


def target_from_config(d: Mapping | None) -> TargetSet:
    if d is None:
        return Full()
    kind = d.get("kind", "full")
    if kind == "full":
        return Full()
    if kind == "subshift":
        if "forbidden" not in d:
            raise ConfigError("subshift target needs 'forbidden'")
        return Subshift(tuple(as_word(w) for w in d["forbidden"]))
    if kind == "frequency":
        if "windows" not in d:
            raise ConfigError("frequency target needs 'windows'")
        w = d["windows"]
        try:
            if isinstance(w, Mapping):
                return FrequencyWindow({int(s): (v[0], v[1]) for s, v in w.items()})
            return FrequencyWindow(tuple((e[0], e[1], e[2]) for e in w))
        except (TypeError, IndexError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed frequency windows: {exc}") from exc
    if kind == "union":
        return UnionOf(tuple(target_from_config(p) for p in d.get("parts", [])))
    raise ConfigError(f"unknown target kind {kind!r}")
