"""Mid-rise alphabets and Sigma-Delta quantizers.

Two families of schemes are provided:

* greedy r-th order schemes, which quantize a binomial combination of past
  states plus the current input, and are stable when the alphabet has at
  least ``2*ceil(C/step) + 2**r + 1`` positive levels for inputs bounded by C;
* coarse schemes that run on an auxiliary state ``v`` with ``u = g * v`` and
  a feedback filter ``h = delta0 - Delta^r g``; any alphabet works provided
  ``||h||_1 <= gamma = 2L - 2 mu / step`` for inputs bounded by ``mu``.

All schemes satisfy ``D^r u = y - q`` with states initialized to zero.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import comb

from . import lp

log = logging.getLogger(__name__)


class QuantizationError(Exception):
    pass


class InfeasibleParameters(QuantizationError):
    pass


class InputOverrange(QuantizationError):
    def __init__(self, peak: float, limit: float):
        self.peak = peak
        self.limit = limit
        super().__init__(f"input sup-norm {peak:.6g} exceeds admissible bound {limit:.6g}")


@dataclass(frozen=True)
class Alphabet:
    """The 2L-level mid-rise alphabet {+-(2j+1) step/2 : j = 0..L-1}."""

    levels_l: int
    step: float

    def __post_init__(self):
        if self.levels_l < 1:
            raise ValueError("levels_l must be at least 1")
        if not self.step > 0:
            raise ValueError("step must be positive")

    @property
    def elements(self) -> np.ndarray:
        pos = (2 * np.arange(self.levels_l) + 1) * self.step / 2
        return np.concatenate([-pos[::-1], pos])

    @property
    def peak(self) -> float:
        """Largest input magnitude that is quantized with error at most step/2."""
        return self.levels_l * self.step

    def __len__(self) -> int:
        return 2 * self.levels_l


def make_alphabet(l: int, delta: float) -> Alphabet:
    return Alphabet(int(l), float(delta))


def greedy_levels(bound: float, delta: float, r: int) -> int:
    """Smallest L meeting the greedy stability condition for |y| <= bound."""
    return 2 * math.ceil(bound / delta) + 2**r + 1


def scalar_quantize(a: Alphabet, x: float) -> float:
    """Nearest alphabet element; ties go to the larger magnitude, 0 maps to +step/2."""
    mag = abs(x)
    j = min(math.floor(mag / a.step), a.levels_l - 1)
    out = (2 * j + 1) * a.step / 2
    return out if x >= 0 else -out


def quantize_array(a: Alphabet, x) -> np.ndarray:
    """Vectorized ``scalar_quantize``."""
    x = np.asarray(x, dtype=float)
    j = np.minimum(np.floor(np.abs(x) / a.step), a.levels_l - 1)
    out = (2 * j + 1) * a.step / 2
    return np.where(x >= 0, out, -out)


@dataclass
class SigmaDeltaTrace:
    q: np.ndarray
    u: np.ndarray
    v: np.ndarray = field(default_factory=lambda: np.zeros(0))
    r: int = 1

    def residual(self, y) -> float:
        """Sup-norm of D^r u - (y - q); zero up to rounding for a valid trace."""
        from .linalg import apply_difference

        return float(np.abs(apply_difference(self.u, self.r) - (np.asarray(y) - self.q)).max(initial=0.0))


def difference_coefficients(r: int) -> np.ndarray:
    """Taps of Delta^r: (-1)^t binom(r, t) for t = 0..r."""
    return np.array([(-1) ** t * comb(r, t, exact=True) for t in range(r + 1)], dtype=float)


def greedy_sigma_delta(y, r: int, a: Alphabet) -> SigmaDeltaTrace:
    y = np.asarray(y, dtype=float)
    if r < 1:
        raise ValueError("order r must be positive")
    if not np.all(np.isfinite(y)):
        raise ValueError("input has non-finite entries")
    m = y.size
    # predictor weights for u_{i-r}, ..., u_{i-1}
    w = -difference_coefficients(r)[1:][::-1].copy()
    u = np.zeros(m + r)  # u[:r] are the zero initial states
    q = np.zeros(m)
    step, top = a.step, a.levels_l - 1
    for i in range(m):
        arg = float(w @ u[i : i + r]) + y[i]
        # inline scalar_quantize
        j = min(math.floor(abs(arg) / step), top)
        qi = (2 * j + 1) * step / 2
        if arg < 0:
            qi = -qi
        q[i] = qi
        u[i + r] = arg - qi
    return SigmaDeltaTrace(q=q, u=u[r:], r=r)


@dataclass(frozen=True)
class FilterPair:
    """Coarse-scheme filters with h = delta0 - Delta^r g and g[0] = 1.

    ``g`` has length d + 1 and ``h`` length d + r + 1 with ``h[0] == 0``.
    """

    g: np.ndarray
    h: np.ndarray
    r: int
    gamma: float

    @property
    def g_l1(self) -> float:
        return float(np.abs(self.g).sum())

    @property
    def h_l1(self) -> float:
        return float(np.abs(self.h).sum())

    def admissible_bound(self, a: Alphabet) -> float:
        """mu such that gamma = 2L - 2 mu / step."""
        return (2 * a.levels_l - self.gamma) * a.step / 2

    def to_json(self) -> str:
        return json.dumps(
            {"r": self.r, "gamma": self.gamma, "g": self.g.tolist(), "h": self.h.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "FilterPair":
        doc = json.loads(text)
        try:
            return cls(
                g=np.asarray(doc["g"], dtype=float),
                h=np.asarray(doc["h"], dtype=float),
                r=int(doc["r"]),
                gamma=float(doc["gamma"]),
            )
        except KeyError as exc:
            raise ValueError(f"filter document missing key {exc}") from None

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "FilterPair":
        return cls.from_json(Path(path).read_text())


def feedback_filter(g, r: int) -> np.ndarray:
    """h = delta0 - Delta^r g, of length len(g) + r."""
    g = np.asarray(g, dtype=float)
    h = -np.convolve(g, difference_coefficients(r))
    h[0] += 1.0
    return h + 0.0  # no negative zeros in stored filters


def order_sweep_factor(gamma: float) -> int:
    """ceil(pi^2 / arccosh(gamma)^2)."""
    return math.ceil(math.pi**2 / math.acosh(gamma) ** 2)


def stability_constant(gamma: float) -> float:
    """C3 = ceil(pi^2 / arccosh(gamma)^2) * e / pi."""
    return order_sweep_factor(gamma) * math.e / math.pi


def _min_l1_filter(r: int, d: int, gamma: float):
    """min ||g||_1 s.t. g[0] = 1, ||delta0 - Delta^r g||_1 <= gamma; None if infeasible."""
    b = difference_coefficients(r)
    n_h = d + r  # h[1..d+r]; h[0] is identically zero
    # h[1:] = c0 + M @ g[1:]
    c0 = np.zeros(n_h)
    c0[:r] = -b[1:]
    M = np.zeros((n_h, d))
    for i in range(d):
        M[i : i + r + 1, i] = -b
    # variables: g+ (d), g- (d), s (n_h) with s >= |h|
    nv = 2 * d + n_h
    cost = np.concatenate([np.ones(2 * d), np.zeros(n_h)])
    A = np.zeros((2 * n_h + 1, nv))
    A[:n_h, :d], A[:n_h, d : 2 * d], A[:n_h, 2 * d :] = M, -M, -np.eye(n_h)
    A[n_h : 2 * n_h, :d], A[n_h : 2 * n_h, d : 2 * d] = -M, M
    A[n_h : 2 * n_h, 2 * d :] = -np.eye(n_h)
    A[-1, 2 * d :] = 1.0
    rhs = np.concatenate([-c0, c0, [gamma]])
    try:
        res = lp.linprog(cost, A_ub=A, b_ub=rhs)
    except lp.LPError as exc:
        log.debug("filter LP failed for r=%d, d=%d: %s", r, d, exc)
        return None
    tail = res.x[:d] - res.x[d : 2 * d]
    tail[np.abs(tail) < 1e-12] = 0.0
    g = np.concatenate([[1.0], tail])
    return g


def design_coarse_filter(
    r: int, gamma: float, a: Alphabet | None = None, max_d: int | None = None
) -> FilterPair:
    """Minimal-l1 filter g with ||h||_1 <= gamma.

    Sweeps the filter length d over r..sigma*r, sigma = ceil(pi^2/arccosh(gamma)^2),
    and widens the sweep if nothing in that range is feasible. Among feasible
    lengths the shortest one attaining the minimal ||g||_1 is kept.
    """
    if r < 1:
        raise ValueError("order r must be positive")
    if not gamma > 1:
        raise InfeasibleParameters(f"gamma must exceed 1, got {gamma}")
    if a is not None and gamma >= 2 * a.levels_l:
        raise InfeasibleParameters(
            f"gamma={gamma} leaves no admissible input range for L={a.levels_l}"
        )
    hi = max_d if max_d is not None else order_sweep_factor(gamma) * r
    hi = max(hi, r)
    # leave a little room so rounding cannot push ||h||_1 past gamma
    target = gamma * (1 - 1e-9)
    best = None
    d = r
    while True:
        while d <= hi:
            g = _min_l1_filter(r, d, target)
            if g is not None:
                h = feedback_filter(g, r)
                if np.abs(h).sum() <= gamma:
                    l1 = np.abs(g).sum()
                    if best is None or l1 < best[0] * (1 - 1e-9):
                        best = (l1, g, h)
            d += 1
        if best is not None:
            break
        if hi >= 8 * order_sweep_factor(gamma) * r + 32:
            raise InfeasibleParameters(f"no stable filter found for r={r}, gamma={gamma} up to d={hi}")
        log.warning("no feasible filter for r=%d, gamma=%g with d <= %d; widening", r, gamma, hi)
        hi *= 2
    _, g, _ = best
    # trailing zero taps carry no information; drop them so r = 1 gives g = (1)
    g = np.trim_zeros(g, "b")
    return FilterPair(g=g, h=feedback_filter(g, r), r=r, gamma=float(gamma))


def coarse_sigma_delta(y, f: FilterPair, a: Alphabet, check_range: bool = True) -> SigmaDeltaTrace:
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("input has non-finite entries")
    mu = f.admissible_bound(a)
    peak = float(np.abs(y).max(initial=0.0))
    if check_range and peak > mu:
        raise InputOverrange(peak, mu)
    m = y.size
    taps = f.h[1:]  # h[0] == 0 keeps the recursion causal
    n = taps.size
    v = np.zeros(m + n)  # v[:n] are the zero initial states
    q = np.zeros(m)
    rev = taps[::-1].copy()
    step, top = a.step, a.levels_l - 1
    for i in range(m):
        arg = float(rev @ v[i : i + n]) + y[i]
        j = min(math.floor(abs(arg) / step), top)
        qi = (2 * j + 1) * step / 2
        if arg < 0:
            qi = -qi
        q[i] = qi
        v[i + n] = arg - qi
    v = v[n:]
    u = np.convolve(f.g, v)[:m]
    return SigmaDeltaTrace(q=q, u=u, v=v, r=f.r)
