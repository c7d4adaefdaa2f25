"""One-sided shift spaces carrying prefix metrics d(x, y) = psi(x ^ y).

Symbols are 1-indexed integers ``1..k``; a word is a plain tuple of them.
Points of the shift are represented exactly as eventually periodic
sequences ``preperiod . period^inf``, which is enough to evaluate every
metric and orbit quantity without truncation error.

Because a prefix metric is an ultrametric, every open ball is a cylinder
set, and so is every Bowen ball.  The helpers here translate radii into
cylinder depths; every cover computation elsewhere is built on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import ConfigError, DepthExceeded, InsufficientDepth, InvalidDepth

Word = tuple[int, ...]

#: relative slack used for every strict radius comparison (done in log space)
LOG_TOL = 1e-12
#: how deep ball scans go before giving up for untabulated psi
DEFAULT_MAX_DEPTH = 4096


def as_word(w: Union[str, Iterable[int]]) -> Word:
    """Coerce ``"121"`` or ``[1, 2, 1]`` into a word tuple."""
    if isinstance(w, str):
        return tuple(int(c) for c in w)
    return tuple(int(c) for c in w)


def word_str(w: Word) -> str:
    if all(s < 10 for s in w):
        return "".join(str(s) for s in w)
    return ".".join(str(s) for s in w)


# ---------------------------------------------------------------------------
# psi specifications


@dataclass(frozen=True)
class Geometric:
    """``psi(w) = theta**(-|w|)``; the shift expands every distance by theta."""

    theta: float

    def __post_init__(self):
        if not self.theta > 1:
            raise ConfigError(f"geometric psi needs theta > 1, got {self.theta}")

    def log_weight(self, w: Word) -> float:
        return -len(w) * math.log(self.theta)

    def limit_factor(self, first_symbol: int) -> float:
        return float(self.theta)


@dataclass(frozen=True)
class WeightedProduct:
    """``psi(w) = prod_i theta_{w_i}^-1``, optionally times ``1/|w|``.

    The harmonic factor keeps psi decaying along branches where
    ``theta_j == 1``; without it every theta must exceed 1 for psi to
    define a metric.  That requirement is *not* enforced here so that
    :func:`validate_metric` can report it.
    """

    thetas: tuple[float, ...]
    harmonic_factor: bool = False

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        if len(self.thetas) < 2:
            raise ConfigError("weighted psi needs one theta per symbol (k >= 2)")
        if any(not t >= 1 for t in self.thetas):
            raise ConfigError(f"weighted psi needs every theta >= 1, got {self.thetas}")

    def log_weight(self, w: Word) -> float:
        logs = self._logs
        val = -sum(logs[s - 1] for s in w)
        if self.harmonic_factor and w:
            val -= math.log(len(w))
        return val

    @cached_property
    def _logs(self) -> tuple[float, ...]:
        return tuple(math.log(t) for t in self.thetas)

    def limit_factor(self, first_symbol: int) -> float:
        return self.thetas[first_symbol - 1]


@dataclass(frozen=True)
class Table:
    """Explicitly tabulated psi, valid up to ``depth_cap``.

    The empty word defaults to 1 when absent from ``values``.
    """

    values: Mapping[Word, float] = field(compare=False)
    depth_cap: int

    def __post_init__(self):
        vals = {as_word(w): float(v) for w, v in self.values.items()}
        vals.setdefault((), 1.0)
        if any(not v > 0 for v in vals.values()):
            raise ConfigError("tabulated psi values must be positive")
        if any(len(w) > self.depth_cap for w in vals):
            raise ConfigError("tabulated word longer than depth_cap")
        object.__setattr__(self, "values", vals)

    def log_weight(self, w: Word) -> float:
        if len(w) > self.depth_cap:
            raise DepthExceeded(f"psi table has depth cap {self.depth_cap}, queried |w|={len(w)}")
        try:
            return math.log(self.values[w])
        except KeyError:
            raise DepthExceeded(f"psi table has no entry for word {word_str(w)!r}") from None

    def limit_factor(self, first_symbol: int):
        return None


PsiSpec = Union[Geometric, WeightedProduct, Table]


def psi_weight(psi: PsiSpec, w: Sequence[int]) -> float:
    """Evaluate psi on a word; the empty word has weight 1."""
    w = tuple(w)
    if isinstance(psi, Geometric):
        return float(psi.theta) ** (-len(w))
    if isinstance(psi, WeightedProduct):
        prod = 1.0
        for s in w:
            prod *= psi.thetas[s - 1]
        if psi.harmonic_factor and w:
            prod *= len(w)
        return 1.0 / prod
    return math.exp(psi.log_weight(w))


def log_psi(psi: PsiSpec, w: Sequence[int]) -> float:
    return psi.log_weight(tuple(w))


def log_psi_rows(psi: PsiSpec, words: np.ndarray) -> np.ndarray:
    """log psi for every row of an ``(n, d)`` array of 1-indexed symbols."""
    n, d = words.shape
    if isinstance(psi, Geometric):
        return np.full(n, -d * math.log(psi.theta))
    if isinstance(psi, WeightedProduct):
        logs = np.log(np.asarray(psi.thetas))
        out = -logs[words - 1].sum(axis=1) if d else np.zeros(n)
        if psi.harmonic_factor and d:
            out = out - math.log(d)
        return out
    return np.array([psi.log_weight(tuple(int(s) for s in row)) for row in words])


def psi_depth_cap(psi: PsiSpec) -> int:
    return psi.depth_cap if isinstance(psi, Table) else DEFAULT_MAX_DEPTH


# ---------------------------------------------------------------------------
# the dynamical system


@dataclass(frozen=True, eq=False)
class ShiftSystem:
    """A one-sided (sub)shift on ``k`` symbols with a prefix metric.

    Parameters
    ----------
    k : int
        Alphabet size.
    psi : PsiSpec
        Metric weight function on finite words.
    transition : array_like, optional
        ``k x k`` 0/1 matrix; ``transition[i-1][j-1] == 1`` allows ``i -> j``.
        Absent means the full shift.
    log_a : sequence of float, optional
        ``log a`` per first symbol.  Defaults to ``log theta_j`` for the
        geometric and weighted metrics; required for tabulated psi.
    """

    k: int
    psi: PsiSpec
    transition: np.ndarray | None = None
    log_a: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ConfigError(f"alphabet size must be an integer >= 2, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if isinstance(self.psi, WeightedProduct) and len(self.psi.thetas) != self.k:
            raise ConfigError("weighted psi needs exactly k thetas")
        if self.transition is not None:
            A = np.asarray(self.transition, dtype=int)
            if A.shape != (self.k, self.k) or not np.isin(A, (0, 1)).all():
                raise ConfigError("transition must be a k x k 0/1 matrix")
            if (A.sum(axis=1) == 0).any() or (A.sum(axis=0) == 0).any():
                raise ConfigError("transition matrix has a dead symbol (empty row or column)")
            A.setflags(write=False)
            object.__setattr__(self, "transition", A)
        if self.log_a is None:
            if isinstance(self.psi, Geometric):
                la = (math.log(self.psi.theta),) * self.k
            elif isinstance(self.psi, WeightedProduct):
                la = tuple(math.log(t) for t in self.psi.thetas)
            else:
                raise ConfigError("log_a is required for tabulated psi")
        else:
            la = tuple(float(v) for v in self.log_a)
        if len(la) != self.k or not all(math.isfinite(v) for v in la):
            raise ConfigError("log_a needs k finite values (no critical points or singularities)")
        object.__setattr__(self, "log_a", la)

    # -- transitions ---------------------------------------------------------

    def allowed(self, i: int, j: int) -> bool:
        return self.transition is None or bool(self.transition[i - 1, j - 1])

    def successors(self, i: int | None) -> tuple[int, ...]:
        if i is None or self.transition is None:
            return tuple(range(1, self.k + 1))
        return tuple(int(j) + 1 for j in np.flatnonzero(self.transition[i - 1]))

    def is_admissible(self, w: Sequence[int]) -> bool:
        if any(not 1 <= s <= self.k for s in w):
            return False
        return all(self.allowed(a, b) for a, b in zip(w, w[1:]))

    @property
    def constant_log_a(self) -> bool:
        return max(self.log_a) - min(self.log_a) == 0.0

    def forced_extension(self, w: Word) -> Word | None:
        """Longest extension shared by all admissible sequences in ``[w]``.

        Returns ``None`` when the cylinder is a single point (the forced
        chain closes into a cycle).
        """
        if self.transition is None:
            return w
        out = list(w)
        seen = set()
        last = out[-1] if out else None
        while True:
            succ = self.successors(last)
            if len(succ) != 1:
                return tuple(out)
            if last in seen:
                return None
            seen.add(last)
            last = succ[0]
            out.append(last)

    def cylinder_log_diameter(self, w: Word) -> float:
        """log diam [w]; ``-inf`` for a one-point cylinder."""
        ext = self.forced_extension(w)
        if ext is None:
            return -math.inf
        return log_psi(self.psi, ext)


# ---------------------------------------------------------------------------
# eventually periodic points


@dataclass(frozen=True)
class SequencePoint:
    """The sequence ``preperiod . period . period . ...`` in normal form.

    The normal form uses the primitive period and the shortest preperiod,
    so two points are equal exactly when their fields are.
    """

    preperiod: Word
    period: Word

    def __post_init__(self):
        pre, per = as_word(self.preperiod), as_word(self.period)
        if not per:
            raise ConfigError("period must be a nonempty word")
        n = len(per)
        for d in range(1, n + 1):
            if n % d == 0 and per[:d] * (n // d) == per:
                per = per[:d]
                break
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def periodic(cls, period) -> "SequencePoint":
        return cls((), as_word(period))

    def symbol(self, i: int) -> int:
        """Symbol at 0-based position ``i``."""
        p = len(self.preperiod)
        if i < p:
            return self.preperiod[i]
        return self.period[(i - p) % len(self.period)]

    def prefix(self, n: int) -> Word:
        p = len(self.preperiod)
        if n <= p:
            return self.preperiod[:n]
        reps = -(-(n - p) // len(self.period))
        return (self.preperiod + self.period * reps)[:n]

    def shift(self, k: int = 1) -> "SequencePoint":
        p = len(self.preperiod)
        if k <= p:
            return SequencePoint(self.preperiod[k:], self.period)
        r = (k - p) % len(self.period)
        return SequencePoint((), self.period[r:] + self.period[:r])

    def is_admissible(self, sys: ShiftSystem) -> bool:
        probe = self.preperiod + self.period + self.period[:1]
        return sys.is_admissible(probe)

    def __str__(self):
        return f"{word_str(self.preperiod)}({word_str(self.period)})"


def common_prefix_length(x: SequencePoint, y: SequencePoint) -> int | None:
    """Length of ``x ^ y``; ``None`` when the points coincide."""
    if x == y:
        return None
    bound = max(len(x.preperiod), len(y.preperiod)) + math.lcm(len(x.period), len(y.period))
    for i in range(bound):
        if x.symbol(i) != y.symbol(i):
            return i
    return None  # unreachable for distinct normal forms


def distance(sys: ShiftSystem, x: SequencePoint, y: SequencePoint) -> float:
    n = common_prefix_length(x, y)
    if n is None:
        return 0.0
    return psi_weight(sys.psi, x.prefix(n))


@dataclass(frozen=True)
class ConformalFactor:
    ratio: float
    limit: float | None


def conformal_factor(sys: ShiftSystem, x: SequencePoint, n: int) -> ConformalFactor:
    """Finite-depth ratio ``psi(x_2..x_n) / psi(x_1..x_n)`` and its limit."""
    if n < 2:
        raise InvalidDepth(f"conformal factor needs depth n >= 2, got {n}")
    w = x.prefix(n)
    ratio = math.exp(log_psi(sys.psi, w[1:]) - log_psi(sys.psi, w))
    return ConformalFactor(ratio, sys.psi.limit_factor(w[0]))


def ball_depth_of(sys: ShiftSystem, x: SequencePoint, log_r: float, max_depth: int | None = None) -> int:
    """Depth of the cylinder equal to the open ball ``B(x, exp(log_r))``."""
    if log_r > LOG_TOL:  # radius exceeds psi(empty) = 1
        return 0
    cap = min(max_depth or DEFAULT_MAX_DEPTH, psi_depth_cap(sys.psi))
    psi = sys.psi
    if isinstance(psi, Geometric):
        step = math.log(psi.theta)
        for m in range(1, cap + 1):
            if -m * step < log_r - LOG_TOL:
                return m
        raise InsufficientDepth(f"no prefix of length <= {cap} has psi below the radius")
    lw = 0.0
    logs = psi._logs if isinstance(psi, WeightedProduct) else None
    for m in range(1, cap + 1):
        if logs is not None:
            lw -= logs[x.symbol(m - 1) - 1]
            val = lw - (math.log(m) if psi.harmonic_factor else 0.0)
        else:
            val = psi.log_weight(x.prefix(m))
        if val < log_r - LOG_TOL:
            return m
    raise InsufficientDepth(f"no prefix of length <= {cap} has psi below the radius")


def ball_to_cylinder(sys: ShiftSystem, x: SequencePoint, r: float, max_depth: int | None = None) -> int:
    """Minimal ``m`` with ``psi(x_1..x_m) < r``; ``B(x, r) = [x_1..x_m]``."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    return ball_depth_of(sys, x, math.log(r), max_depth)


def bowen_ball_to_cylinder(
    sys: ShiftSystem, x: SequencePoint, n: int, delta: float, max_depth: int | None = None
) -> int:
    """Depth of the cylinder equal to the Bowen ball ``B(x, n, delta)``.

    The ball is the intersection over ``0 <= k <= n`` of the pulled-back
    balls ``B(f^k x, delta)``, each of which is a cylinder constraining
    positions ``k+1 .. k+m_k``.
    """
    if n < 0:
        raise InvalidDepth(f"Bowen ball order must be >= 0, got {n}")
    if not delta > 0:
        raise ValueError(f"Bowen radius must be positive, got {delta}")
    log_d = math.log(delta)
    depth = 0
    for k in range(n + 1):
        m = ball_depth_of(sys, x.shift(k), log_d, max_depth)
        if m:
            depth = max(depth, k + m)
    return depth


# ---------------------------------------------------------------------------
# random points and metric validation


def random_admissible_word(sys: ShiftSystem, length: int, rng: np.random.Generator, start: int | None = None) -> Word:
    out: list[int] = []
    last = start
    for _ in range(length):
        succ = sys.successors(last)
        last = int(succ[rng.integers(len(succ))])
        out.append(last)
    return tuple(out)


def random_point(
    sys: ShiftSystem, rng: np.random.Generator, max_preperiod: int = 4, max_period: int = 4
) -> SequencePoint:
    """Draw an admissible eventually periodic point."""
    for _ in range(1000):
        pre_len = int(rng.integers(0, max_preperiod + 1))
        per_len = int(rng.integers(1, max_period + 1))
        w = random_admissible_word(sys, pre_len + per_len, rng)
        pt = SequencePoint(w[:pre_len], w[pre_len:])
        if pt.is_admissible(sys):
            return pt
    raise RuntimeError("could not draw an admissible periodic point")


def admissible_words(sys: ShiftSystem, n: int) -> list[Word]:
    words: list[Word] = [()]
    for _ in range(n):
        words = [w + (j,) for w in words for j in sys.successors(w[-1] if w else None)]
    return words


@dataclass(frozen=True)
class Violation:
    check: str
    where: str
    detail: str


@dataclass
class MetricReport:
    depth: int
    checked: dict[str, int]
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_metric(sys: ShiftSystem, depth: int, samples: int = 200, seed: int = 0,
                    exhaustive_limit: int = 200_000) -> MetricReport:
    """Check that psi really induces an ultrametric on the shift.

    (a) psi strictly decreases along prefixes, except that a single
    symbol may tie with the empty word (exhaustive when the word count
    allows, else along sampled branches); (b) psi decays along every
    constant branch and along sampled branches between depths ``D//2``
    and ``D``; (c) the ultrametric inequality holds on sampled triples.
    """
    if depth < 1:
        raise InvalidDepth("validation depth must be >= 1")
    rng = np.random.default_rng(seed)
    psi = sys.psi
    violations: list[Violation] = []
    checked = {"monotonicity": 0, "decay": 0, "ultrametric": 0}

    total = sum(sys.k ** d for d in range(depth + 1))
    if total <= exhaustive_limit:
        level: list[Word] = [()]
        for _ in range(depth):
            nxt = []
            for w in level:
                lw = psi.log_weight(w)
                for j in sys.successors(w[-1] if w else None):
                    c = w + (j,)
                    checked["monotonicity"] += 1
                    if not psi.log_weight(c) < lw - (LOG_TOL if w else -LOG_TOL):
                        violations.append(Violation("monotonicity", word_str(c), "psi does not decrease on extension"))
                    nxt.append(c)
            level = nxt
        branches = []
    else:
        branches = [random_admissible_word(sys, depth, rng) for _ in range(samples)]
        for b in branches:
            for m in range(depth):
                checked["monotonicity"] += 1
                if not psi.log_weight(b[: m + 1]) < psi.log_weight(b[:m]) - (LOG_TOL if m else -LOG_TOL):
                    violations.append(Violation("monotonicity", word_str(b[: m + 1]), "psi does not decrease on extension"))

    constant = [(j,) * depth for j in range(1, sys.k + 1) if sys.allowed(j, j)]
    branches = constant + (branches or [random_admissible_word(sys, depth, rng) for _ in range(samples)])
    half = depth // 2
    for b in branches:
        checked["decay"] += 1
        if not psi.log_weight(b) < psi.log_weight(b[:half]) - LOG_TOL:
            violations.append(Violation("decay", word_str(b),
                                        f"psi does not decrease between depths {half} and {depth}"))

    for _ in range(samples):
        x, y, z = (random_point(sys, rng) for _ in range(3))
        dxz, dxy, dyz = distance(sys, x, z), distance(sys, x, y), distance(sys, y, z)
        checked["ultrametric"] += 1
        if dxz > max(dxy, dyz) * (1 + LOG_TOL):
            violations.append(Violation("ultrametric", f"{x},{y},{z}",
                                        f"d(x,z)={dxz:.6g} > max({dxy:.6g}, {dyz:.6g})"))
    return MetricReport(depth, checked, violations)


# ---------------------------------------------------------------------------
# configuration documents


def psi_from_config(d: Mapping) -> PsiSpec:
    kind = d.get("kind")
    try:
        if kind == "geometric":
            return Geometric(float(d["theta"]))
        if kind == "weighted":
            return WeightedProduct(tuple(d["thetas"]), bool(d.get("harmonic_factor", False)))
        if kind == "table":
            return Table({as_word(w): v for w, v in d["values"].items()}, int(d["depth_cap"]))
    except KeyError as exc:
        raise ConfigError(f"psi of kind {kind!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed psi definition: {exc}") from None
    raise ConfigError(f"unknown psi kind {kind!r}; expected geometric, weighted or table")


def system_from_config(d: Mapping) -> ShiftSystem:
    """Build a :class:`ShiftSystem` from a parsed configuration mapping."""
    if "alphabet_size" not in d or "psi" not in d:
        raise ConfigError("system definition needs 'alphabet_size' and 'psi'")
    try:
        k = int(d["alphabet_size"])
    except (TypeError, ValueError):
        raise ConfigError("alphabet_size must be an integer") from None
    return ShiftSystem(
        k=k,
        psi=psi_from_config(d["psi"]),
        transition=np.asarray(d["transition"]) if d.get("transition") is not None else None,
        log_a=tuple(d["log_a"]) if d.get("log_a") is not None else None,
    )


def system_to_config(sys: ShiftSystem) -> dict:
    psi = sys.psi
    if isinstance(psi, Geometric):
        p = {"kind": "geometric", "theta": psi.theta}
    elif isinstance(psi, WeightedProduct):
        p = {"kind": "weighted", "thetas": list(psi.thetas), "harmonic_factor": psi.harmonic_factor}
    else:
        p = {"kind": "table", "depth_cap": psi.depth_cap,
             "values": {word_str(w): v for w, v in sorted(psi.values.items())}}
    out = {"alphabet_size": sys.k, "psi": p, "log_a": list(sys.log_a)}
    if sys.transition is not None:
        out["transition"] = sys.transition.tolist()
    return out
