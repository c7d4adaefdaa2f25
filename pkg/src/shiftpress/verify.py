"""Invariant suites run by ``shiftpress verify``.

Each suite returns a :class:`CheckResult` whose ``worst_margin`` is the
smallest slack seen (positive means every inequality held).  Suites that do
not apply to the configured system report ``skip``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import caratheodory as cara
from .config import JobConfig
from .cover import CylinderTree, enumerate_cover_costs, optimal_cover_dp
from .errors import InsufficientDepth, NotIrreducible, ShiftPressError
from .lyapunov import (
    ball_inclusion_check,
    birkhoff,
    distortion_radius,
    exact_exponent,
    tempered_certificate,
)
from .spectra import frequency_entropy_oracle, legendre_entropy, spectrum_table
from .symbolic import ShiftSystem, log_psi_rows, random_point, validate_metric
from .targets import FrequencyWindow, Full, Subshift, UnionOf, is_sft, parts_of
from .thermo import (
    CONE_SLACK,
    bowen_root,
    closed_form_curve,
    cone_check,
    cone_grid,
    corrupt,
)

SLACK = 1e-10


@dataclass
class CheckResult:
    name: str
    status: str  # pass | fail | skip
    worst_margin: float
    checked: int
    detail: str = ""


class _Tally:
    def __init__(self, name: str, slack: float = SLACK):
        self.name, self.slack = name, slack
        self.worst = math.inf
        self.n = 0
        self.first_fail = ""

    def add(self, margin: float, where: str = "") -> None:
        self.n += 1
        if margin < self.worst:
            self.worst = margin
        if margin < -self.slack and not self.first_fail:
            self.first_fail = where

    def result(self) -> CheckResult:
        if self.n == 0:
            return CheckResult(self.name, "skip", math.nan, 0, "nothing to check")
        ok = self.worst >= -self.slack
        return CheckResult(self.name, "pass" if ok else "fail", self.worst, self.n, "" if ok else self.first_fail)


def _skip(name: str, why: str) -> CheckResult:
    return CheckResult(name, "skip", math.nan, 0, why)


def _prefix_closed(Z) -> bool:
    return not any(isinstance(p, FrequencyWindow) for p in parts_of(Z))


def _psi_levels(sys: ShiftSystem, depth: int) -> np.ndarray:
    prob = cara.HausdorffProblem(sys, Full(), 1.0, "diam", depth)
    return np.unique(np.concatenate([log_psi_rows(sys.psi, lv.words) for lv in prob.tree.levels]))


def _tie_free(log_eps: float, levels: np.ndarray, gap: float = 1e-6) -> bool:
    return bool(np.min(np.abs(levels - log_eps)) > gap)


# ---------------------------------------------------------------------------
# caratheodory


def check_hausdorff_variants(sys, Z, rng, depth=8, n_eps=4, s_values=(0.3, 0.7, 1.0, 1.4)) -> CheckResult:
    """Sandwich between the three Hausdorff cover conventions."""
    name = "hausdorff_variant_sandwich"
    if sys.transition is not None:
        return _skip(name, "needs a full shift (cylinder diameter = psi)")
    if not _prefix_closed(Z):
        return _skip(name, "needs a prefix-closed target")
    tally = _Tally(name)
    levels = _psi_levels(sys, depth)
    floor = levels[levels > -np.inf].min()
    done = 0
    while done < n_eps:
        log_eps = float(rng.uniform(0.35 * floor, -0.05))
        if not (_tie_free(log_eps, levels) and _tie_free(log_eps - math.log(2), levels)):
            continue
        done += 1
        eps = math.exp(log_eps)
        try:
            P = {
                v: cara.HausdorffProblem(sys, Z, e, v, depth)
                for v, e in (("diam", eps), ("ball_diam", eps), ("two_r", eps))
            }
            half = cara.HausdorffProblem(sys, Z, eps / 2, "ball_diam", depth)
        except InsufficientDepth:
            continue
        for s in s_values:
            mH = P["diam"].value(s, witness=False).log_value
            mb = P["ball_diam"].value(s, witness=False).log_value
            mb2 = P["two_r"].value(s, witness=False).log_value
            mbh = half.value(s, witness=False).log_value
            where = f"eps={eps:.6g}, s={s}"
            tally.add(mH - (mb - s * math.log(2)), where)
            tally.add(mbh - mH, where)
            tally.add(mb2 - mb, where)
            tally.add(mb + s * math.log(2) - mb2, where)
    return tally.result()


def check_pesin_sandwich(sys, Z, depth=9, ts=(0.0, 0.5, 1.0), ms=(2, 3), Ns=(2, 3)) -> CheckResult:
    name = "pesin_sandwich"
    if not _prefix_closed(Z):
        return _skip(name, "needs a prefix-closed target")
    tally = _Tally(name)
    for t in ts:
        for m in ms:
            gamma = cara.lebesgue_number(sys, m)
            dmax = math.exp(cara.max_psi_at_depth(sys, m - 1))
            delta = math.sqrt(dmax) if dmax < 1 else None
            for N in Ns:
                if depth < m + N + 1:
                    continue
                pes = cara.PesinProblem(sys, Z, t, m, N, depth)
                up = cara.PressureProblem(sys, Z, t, N, gamma, depth)
                low = cara.PressureProblem(sys, Z, t, N, delta, depth) if delta else None
                for s in (0.0, 0.5, 1.0):
                    try:
                        vp = pes.value(s, witness=False).log_value
                        vu = up.value(s, witness=False).log_value
                        where = f"t={t}, m={m}, N={N}, s={s}"
                        tally.add(_log_margin(vu, vp), where)
                        if low is not None:
                            tally.add(_log_margin(vp, low.value(s, witness=False).log_value), where)
                    except InsufficientDepth:
                        continue
    return tally.result()


def _log_margin(big: float, small: float) -> float:
    """``big - small`` in log space, treating two infinities of equal sign as equal."""
    if big == small:
        return 0.0
    return big - small


def check_pressure_monotone(sys, Z, depth=10, t=0.5) -> CheckResult:
    """``m_P`` grows with ``N`` and shrinks as ``delta`` grows."""
    name = "pressure_scale_monotonicity"
    tally = _Tally(name)
    deltas = (0.15, 0.3, 0.6)
    Ns = (2, 3, 4, 5)
    ss = (0.0, 0.4, 0.8)
    vals: dict = {}
    for d in deltas:
        for N in Ns:
            try:
                prob = cara.PressureProblem(sys, Z, t, N, d, depth)
                vals[d, N] = [prob.value(s, witness=False).log_value for s in ss]
            except InsufficientDepth:
                continue
    for i, s in enumerate(ss):
        for d in deltas:
            for N, N2 in zip(Ns, Ns[1:]):
                if (d, N) in vals and (d, N2) in vals:
                    tally.add(_log_margin(vals[d, N2][i], vals[d, N][i]), f"N={N}, delta={d}, s={s}")
        for N in Ns:
            for d1, d2 in zip(deltas, deltas[1:]):
                if (d1, N) in vals and (d2, N) in vals:
                    tally.add(_log_margin(vals[d1, N][i], vals[d2, N][i]), f"delta={d1}<{d2}, N={N}, s={s}")
    return tally.result()


def check_monotone_in_s(sys, Z, depth=10) -> CheckResult:
    tally = _Tally("set_functions_monotone_in_s")
    ss = np.linspace(0.0, 2.0, 11)
    probs: list[tuple[str, Callable]] = []
    try:
        probs.append(("hausdorff", cara.HausdorffProblem(sys, Z, cara.default_eps(sys), "diam", depth)))
        probs.append(("pressure", cara.PressureProblem(sys, Z, 0.5, 2, 0.3, depth)))
    except InsufficientDepth:
        pass
    for label, p in probs:
        vals = [p.value(float(s), witness=False).log_value for s in ss]
        for a, b, s in zip(vals, vals[1:], ss):
            tally.add(_log_margin(a, b), f"{label} at s={s:.2f}")
    return tally.result()


def check_union_subadditivity(sys, Z, depth=10) -> CheckResult:
    tally = _Tally("union_subadditivity")
    a = Subshift(((1, 1),)) if sys.allowed(1, 1) else Subshift(((1,),))
    b = FrequencyWindow({1: (0.0, 0.5)})
    parts = [Z, a, b]
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            U = UnionOf((parts[i], parts[j]))
            for s in (0.5, 1.0):
                eps = cara.default_eps(sys)
                try:
                    vu = cara.hausdorff_value(sys, U, s, eps, "diam", depth).value
                    v1 = cara.hausdorff_value(sys, parts[i], s, eps, "diam", depth).value
                    v2 = cara.hausdorff_value(sys, parts[j], s, eps, "diam", depth).value
                except InsufficientDepth:
                    continue
                tally.add((v1 + v2 - vu) / max(1.0, vu), f"parts {i},{j}, s={s}")
    return tally.result()


def check_dp_exactness(rng, trials=3, depth=5) -> CheckResult:
    tally = _Tally("dp_vs_exhaustive", slack=1e-12)
    for k in range(trials):
        w = rng.uniform(0.01, 1.0, size=2 ** (depth + 1))
        # heap layout: the word of length d with binary index i sits at 2^d - 1 + i
        tree = CylinderTree.explicit(2, depth, lambda word: w[(1 << len(word)) - 1 + _index(word)])
        best = float(enumerate_cover_costs(tree).min())
        got = optimal_cover_dp(tree).cost
        tally.add(-abs(got - best) / best, f"trial {k}")
    return tally.result()


def _index(word) -> int:
    i = 0
    for s in word:
        i = 2 * i + (s - 1)
    return i


# ---------------------------------------------------------------------------
# thermo


def _curve(cfg: JobConfig):
    if not is_sft(cfg.target):
        return None, "target is not of finite type"
    try:
        return closed_form_curve(cfg.system, cfg.target), ""
    except NotIrreducible as exc:
        return None, str(exc)


def check_cone(cfg: JobConfig, curve) -> CheckResult:
    name = "cone_bounds"
    if curve is None:
        return _skip(name, "no closed-form curve")
    if cfg.corrupt_curve:
        curve = corrupt(curve, cfg.corrupt_curve["t"], cfg.corrupt_curve["bump"])
    rep = cone_check(curve, cone_grid(), slack=CONE_SLACK)
    if rep.ok:
        return CheckResult(name, "pass", rep.worst_margin, rep.checked)
    v = rep.violations[0]
    return CheckResult(name, "fail", rep.worst_margin, rep.checked, f"{v.side} at t={v.t}, h={v.h}")


def check_convexity(cfg: JobConfig, curve) -> CheckResult:
    if curve is None:
        return _skip("pressure_convexity", "no closed-form curve")
    if cfg.corrupt_curve:
        curve = corrupt(curve, cfg.corrupt_curve["t"], cfg.corrupt_curve["bump"])
    tally = _Tally("pressure_convexity")
    ts = np.round(np.arange(-3.0, 3.0001, 0.1), 12)
    for h in (0.1, 0.5, 1.0):
        for t in ts:
            a, b = float(t - h), float(t + h)
            tally.add((curve(a) + curve(b)) / 2 - curve(float(t)), f"t={t}, h={h}")
    return tally.result()


def check_root(cfg: JobConfig, curve) -> CheckResult:
    name = "bowen_root_bracket_and_residual"
    if curve is None:
        return _skip(name, "no closed-form curve")
    if not curve.alpha > 0:
        return _skip(name, "log a is not bounded below by a positive constant")
    tally = _Tally(name)
    h = curve.h_top
    tally.add(curve(h / curve.beta), "T(h/beta) >= 0")
    tally.add(-curve(h / curve.alpha), "T(h/alpha) <= 0")
    tol = 1e-12
    r = bowen_root(curve, tol=tol)
    tally.add(curve.alpha * tol - abs(r.residual), "residual")
    return tally.result()


# ---------------------------------------------------------------------------
# spectra


def check_spectrum(curve) -> list[CheckResult]:
    names = ("spectrum_quotient_identity", "entropy_spectrum_concavity", "max_entropy_point", "spectrum_peak")
    if curve is None or not curve.alpha_range[0] > 0 or curve.alpha_range[1] - curve.alpha_range[0] < 1e-9:
        return [_skip(n, "needs a strictly convex closed-form curve with positive exponents") for n in names]
    table = spectrum_table(curve)
    q = _Tally(names[0], slack=0.0)
    for r in table.rows:
        q.add(0.0 if r.L_D * r.alpha == r.L_E else -abs(r.L_D * r.alpha - r.L_E), f"alpha={r.alpha}")
    c = _Tally(names[1], slack=1e-8)
    a = table.column("alpha")
    le = table.column("L_E")
    for i in range(1, len(a) - 1):
        mid = legendre_entropy(curve, 0.5 * (a[i - 1] + a[i + 1])).value
        c.add(mid - 0.5 * (le[i - 1] + le[i + 1]), f"alpha={a[i]}")
    m = _Tally(names[2], slack=1e-8)
    m.add(-abs(legendre_entropy(curve, -curve.slope(0.0)).value - curve(0.0)))
    p = _Tally(names[3], slack=1e-4)
    if curve.alpha > 0:
        p.add(-abs(table.column("L_D").max() - bowen_root(curve).t))
    return [q.result(), c.result(), m.result(), p.result()]


def check_oracle(cfg: JobConfig, curve, n=1000, points=20) -> CheckResult:
    name = "counting_oracle_agreement"
    sys = cfg.system
    if curve is None or sys.transition is not None or sys.k != 2 or not isinstance(cfg.target, Full):
        return _skip(name, "needs a weighted full shift on two symbols")
    a1, a2 = curve.alpha_range
    if a2 - a1 < 1e-9:
        return _skip(name, "degenerate exponent range")
    bound = 10 * math.log(n) / n
    tally = _Tally(name, slack=0.0)
    for alpha in np.linspace(a1, a2, points + 2)[1:-1]:
        o = frequency_entropy_oracle(sys, float(alpha), n)
        tally.add(bound - abs(o - legendre_entropy(curve, float(alpha)).value), f"alpha={alpha:.6g}")
    return tally.result()


def check_cover_consistency(cfg: JobConfig, curve, ts=(0.0, 0.5, 1.0), tol=0.05) -> CheckResult:
    name = "cover_vs_closed_form_pressure"
    if curve is None:
        return _skip(name, "no closed-form curve")
    tally = _Tally(name, slack=0.0)
    D = cfg.depth
    for t in ts:
        est = cara.pressure_estimate(cfg.system, cfg.target, t, depths=(D - 2, D), delta=cfg.delta)
        val = est.extrapolated if est.extrapolated is not None else est.value
        tally.add(tol - abs(val - curve(t)), f"t={t}")
    return tally.result()


# ---------------------------------------------------------------------------
# lyapunov


def check_ball_inclusions(sys, rng, samples=200, eps=0.2) -> CheckResult:
    name = "ball_inclusions"
    delta0 = distortion_radius(sys, eps)
    if delta0 is None:
        return _skip(name, "no distortion radius known for this metric")
    tally = _Tally(name, slack=0.0)
    for i in range(samples):
        x = random_point(sys, rng)
        n = int(rng.integers(0, 21))
        delta = float(rng.uniform(0.02, 1.0)) * delta0
        if delta >= delta0:
            continue
        eta = tempered_certificate(sys, x, eps, max(n, 1)).eta
        rep = ball_inclusion_check(sys, x, n, delta, eps, eta, delta0=delta0)
        tally.add(float(rep.bowen_depth - rep.outer_depth), f"upper at x={x}, n={n}, delta={delta:.4g}")
        tally.add(float(rep.inner_depth - rep.bowen_depth), f"lower at x={x}, n={n}, delta={delta:.4g}")
    return tally.result()


def check_tempered_expanding(sys, rng, samples=50) -> CheckResult:
    name = "tempered_expanding_eta"
    if min(sys.log_a) < 0:
        return _skip(name, "some log a is negative")
    tally = _Tally(name, slack=0.0)
    for _ in range(samples):
        x = random_point(sys, rng)
        for D in (1, 5, 20, 80):
            tally.add(tempered_certificate(sys, x, 0.1, D).eta - 1.0, f"x={x}, D={D}")
    return tally.result()


def check_tempered_stabilization(sys, rng, samples=100, eps=0.2) -> CheckResult:
    name = "tempered_stabilization"
    tally = _Tally(name, slack=0.0)
    span = max(abs(v) for v in sys.log_a)
    tries = 0
    while tally.n < samples and tries < 20 * samples:
        tries += 1
        x = random_point(sys, rng)
        if not exact_exponent(sys, x) > 0:
            continue
        D = math.ceil(10 * (len(x.preperiod) + len(x.period)) * span / eps)
        c = tempered_certificate(sys, x, eps, max(D, 2))
        tally.add(0.0 if c.stabilized else -1.0, f"x={x}, D={D}")
    if tally.n == 0:
        return _skip(name, "no sampled point has positive exponent")
    return tally.result()


def check_cocycle(sys, rng, samples=50) -> CheckResult:
    tally = _Tally("birkhoff_cocycle", slack=0.0)
    span = max(1.0, max(abs(v) for v in sys.log_a))
    for _ in range(samples):
        x = random_point(sys, rng)
        n = int(rng.integers(2, 40))
        k = int(rng.integers(1, n))
        lhs = n * birkhoff(sys, x, n)
        rhs = k * birkhoff(sys, x, k) + (n - k) * birkhoff(sys, x.shift(k), n - k)
        tally.add(1e-12 * n * span - abs(lhs - rhs), f"x={x}, n={n}, k={k}")
    return tally.result()


def check_metric(sys, depth=10) -> CheckResult:
    rep = validate_metric(sys, depth)
    n = sum(rep.checked.values())
    if rep.ok:
        return CheckResult("metric_validation", "pass", 0.0, n)
    v = rep.violations[0]
    return CheckResult("metric_validation", "fail", -1.0, n, f"{v.check} at {v.where}")


# ---------------------------------------------------------------------------


def run_suite(cfg: JobConfig) -> list[CheckResult]:
    """Run every applicable invariant check for ``cfg``."""
    opts = cfg.verify
    rng = np.random.default_rng(cfg.seed)
    sys, Z = cfg.system, cfg.target
    depth = int(opts.get("depth", 8))
    out: list[CheckResult] = []

    def guard(name, fn):
        try:
            res = fn()
        except ShiftPressError as exc:
            res = CheckResult(name, "fail", math.nan, 0, f"{type(exc).__name__}: {exc}")
        if isinstance(res, list):
            out.extend(res)
        else:
            out.append(res)

    guard("metric_validation", lambda: check_metric(sys))
    guard("hausdorff_variant_sandwich", lambda: check_hausdorff_variants(sys, Z, rng, depth))
    guard("pesin_sandwich", lambda: check_pesin_sandwich(sys, Z, depth + 1))
    guard("pressure_scale_monotonicity", lambda: check_pressure_monotone(sys, Z, depth + 2))
    guard("set_functions_monotone_in_s", lambda: check_monotone_in_s(sys, Z, depth + 2))
    guard("union_subadditivity", lambda: check_union_subadditivity(sys, Z, depth + 2))
    guard("dp_vs_exhaustive", lambda: check_dp_exactness(rng, int(opts.get("dp_trials", 3))))
    curve, why = _curve(cfg)
    guard("cone_bounds", lambda: check_cone(cfg, curve))
    guard("pressure_convexity", lambda: check_convexity(cfg, curve))
    guard("bowen_root_bracket_and_residual", lambda: check_root(cfg, curve))
    guard("spectrum", lambda: check_spectrum(curve))
    guard("counting_oracle_agreement", lambda: check_oracle(cfg, curve))
    if opts.get("cover_consistency", True):
        guard("cover_vs_closed_form_pressure", lambda: check_cover_consistency(cfg, curve))
    guard("ball_inclusions", lambda: check_ball_inclusions(sys, rng, int(opts.get("samples", 200))))
    guard("tempered_expanding_eta", lambda: check_tempered_expanding(sys, rng))
    guard("tempered_stabilization", lambda: check_tempered_stabilization(sys, rng, int(opts.get("stabilization_samples", 100))))
    guard("birkhoff_cocycle", lambda: check_cocycle(sys, rng))
    return out
