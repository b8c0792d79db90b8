"""Sigma-Delta quantization of random frame expansions.

A signal ``x`` on the unit sphere of R^k is encoded as ``y = E x`` with a
normalized sub-Gaussian m x k frame ``E``, quantized with a greedy or coarse
scheme of order r, and decoded with the r-th order Sobolev dual
``F = (D^{-r} E)^dagger D^{-r}``. The decoding error equals
``F D^r u = (D^{-r} E)^dagger u``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import configs, ensembles, linalg
from .quantization import (
    Alphabet,
    FilterPair,
    coarse_sigma_delta,
    design_coarse_filter,
    greedy_levels,
    greedy_sigma_delta,
)

log = logging.getLogger(__name__)

SCHEMES = ("greedy", "coarse")
CSV_FIELDS = ("lambda", "r", "scheme", "trial", "seed", "error_l2", "state_sup", "sigma_min")


def fmt(value) -> str:
    """Shortest round-trip text for CSV cells."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class FrameRunResult:
    lam: float
    r: int
    scheme: str
    error_l2: float
    state_sup: float
    seed: int
    trial: int = 0
    sigma_min: float = float("nan")
    # arrays kept for re-checking; never written to CSV
    artifacts: dict = field(default_factory=dict, repr=False, compare=False)

    def csv_row(self) -> list[str]:
        return [fmt(v) for v in (self.lam, self.r, self.scheme, self.trial, self.seed,
                                 self.error_l2, self.state_sup, self.sigma_min)]

    @classmethod
    def from_csv_row(cls, row: dict) -> "FrameRunResult":
        return cls(
            lam=float(row["lambda"]), r=int(row["r"]), scheme=row["scheme"],
            trial=int(row["trial"]), seed=int(row["seed"]),
            error_l2=float(row["error_l2"]), state_sup=float(row["state_sup"]),
            sigma_min=float(row["sigma_min"]),
        )


def select_order(lam: float, c13: float) -> int:
    """max(1, floor(sqrt(lambda) / (2 c13)))."""
    if lam < 1:
        raise ValueError("lambda must be at least 1")
    if c13 <= 0:
        raise ValueError("c13 must be positive")
    return max(1, math.floor(math.sqrt(lam) / (2 * c13)))


@lru_cache(maxsize=64)
def cached_filter(r: int, gamma: float) -> FilterPair:
    return design_coarse_filter(r, gamma)


def load_filter(r: int, gamma: float, cache_dir=None) -> FilterPair:
    """Designed filter for (r, gamma), read from or written to ``cache_dir`` if given."""
    if cache_dir is None:
        return cached_filter(r, float(gamma))
    path = Path(cache_dir) / f"filter_r{r}_gamma{float(gamma)!r}.json"
    if path.exists():
        f = FilterPair.load(path)
        if f.r == r and f.gamma == float(gamma):
            return f
    f = cached_filter(r, float(gamma))
    path.parent.mkdir(parents=True, exist_ok=True)
    f.save(path)
    return f


def run_frame_quantization(
    e,
    x,
    scheme: str,
    r: int,
    a: Alphabet,
    filt: FilterPair | None = None,
    gamma: float | None = None,
    seed: int = 0,
    trial: int = 0,
) -> FrameRunResult:
    """Quantize E x with the chosen scheme and decode with the Sobolev dual.

    For the coarse scheme either ``filt`` or ``gamma`` must be supplied.
    """
    e = linalg.as_matrix(e)
    x = np.asarray(x, dtype=float)
    m, k = e.shape
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    y = e @ x
    if scheme == "greedy":
        trace = greedy_sigma_delta(y, r, a)
    else:
        if filt is None:
            if gamma is None:
                raise ValueError("coarse scheme needs a filter or gamma")
            filt = cached_filter(r, float(gamma))
        if filt.r != r:
            raise ValueError(f"filter order {filt.r} does not match r={r}")
        trace = coarse_sigma_delta(y, filt, a)
    # F q = (D^{-r} E)^dagger D^{-r} q, applied by running sums
    a_mat = linalg.apply_inverse_difference(e, r)
    res = linalg.svd(a_mat, full_matrices=False)
    s = res.singular_values
    if s[-1] <= linalg.RANK_TOL * s[0]:
        raise linalg.SingularMatrixError(float(s[-1]), float(s[0]))
    a_pinv = (res.vt.T / s) @ res.u.T
    x_hat = a_pinv @ linalg.apply_inverse_difference(trace.q, r)
    return FrameRunResult(
        lam=m / k,
        r=r,
        scheme=scheme,
        error_l2=float(np.linalg.norm(x - x_hat)),
        state_sup=float(np.abs(trace.u).max(initial=0.0)),
        seed=seed,
        trial=trial,
        sigma_min=float(s[-1]),
        artifacts={"x": x, "y": y, "q": trace.q, "u": trace.u, "x_hat": x_hat, "a_pinv": a_pinv},
    )


@dataclass
class FrameSweepConfig:
    """One frame quantization sweep.

    ``orders`` lists fixed orders to run at every lambda; with ``orders``
    empty the order is ``select_order(lambda, c13)`` capped at ``max_order``.
    ``levels`` may be an integer L or ``"auto"``, the smallest L satisfying
    the greedy stability condition for the actual input.
    """

    lambdas: list = field(default_factory=list)
    trials: int = 1
    k: int = 4
    scheme: str = "greedy"
    family: str = "gaussian"
    orders: list = field(default_factory=list)
    c13: float = 1.0
    max_order: int = 7
    levels: object = "auto"
    step: float = 0.01
    gamma: float | None = None
    seed: int = 0
    seed_offset: int = 0
    filter_cache: str | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme: unknown scheme {self.scheme!r}")
        if self.family not in {f.value for f in ensembles.Family}:
            raise ValueError(f"family: unknown family {self.family!r}")
        if self.trials < 0:
            raise ValueError("trials: must be non-negative")
        if self.k < 1:
            raise ValueError("k: must be positive")
        if not self.step > 0:
            raise ValueError("step: must be positive")
        if self.levels != "auto" and (not isinstance(self.levels, int) or self.levels < 1):
            raise ValueError("levels: must be a positive integer or 'auto'")
        if self.scheme == "coarse":
            if self.gamma is None:
                raise ValueError("gamma: required for the coarse scheme")
            if self.levels == "auto":
                raise ValueError("levels: the coarse scheme needs a fixed L")
        for lam in self.lambdas:
            if lam < 1 or abs(lam * self.k - round(lam * self.k)) > 1e-9:
                raise ValueError(f"lambdas: {lam} * k is not a positive integer")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "FrameSweepConfig":
        return configs.from_mapping(cls, doc)

    @classmethod
    def from_json(cls, text: str) -> "FrameSweepConfig":
        return cls.from_dict(json.loads(text))

    def tasks(self) -> list[tuple[float, int, int]]:
        out = []
        for lam in self.lambdas:
            orders = self.orders or [min(select_order(lam, self.c13), self.max_order)]
            for r in orders:
                for t in range(self.trials):
                    out.append((float(lam), int(r), t))
        return out


def trial_seed(cfg, trial: int) -> int:
    return (cfg.seed + cfg.seed_offset + trial) % 2**64


def run_frame_task(cfg: FrameSweepConfig, lam: float, r: int, trial: int) -> FrameRunResult:
    m = int(round(lam * cfg.k))
    seed = trial_seed(cfg, trial)
    spec = ensembles.FrameEnsembleSpec(cfg.family, m, cfg.k, "one_over_sqrt_m", seed)
    e = ensembles.draw_frame(spec)
    x = ensembles.draw_unit_vector(cfg.k, seed, m)
    filt = None
    if cfg.scheme == "coarse":
        filt = load_filter(r, cfg.gamma, cfg.filter_cache)
        a = Alphabet(cfg.levels, cfg.step)
    elif cfg.levels == "auto":
        a = Alphabet(greedy_levels(float(np.abs(e @ x).max()), cfg.step, r), cfg.step)
    else:
        a = Alphabet(cfg.levels, cfg.step)
    out = run_frame_quantization(e, x, cfg.scheme, r, a, filt=filt, seed=seed, trial=trial)
    # keep only the scalars --verify needs; arrays would bloat worker traffic
    art = out.artifacts
    eta = art["a_pinv"] @ art["u"]
    limit = a.step / 2 * (filt.g_l1 if filt is not None else 1.0)
    out.artifacts = {
        "identity_gap": abs(out.error_l2 - float(np.linalg.norm(eta))),
        "state_limit": limit,
    }
    return out


def _safe_task(args):
    cfg, lam, r, t = args
    try:
        return run_frame_task(cfg, lam, r, t), None
    except Exception as exc:  # reported, not raised: one bad run must not sink a sweep
        return None, {"lambda": lam, "r": r, "trial": t, "error": f"{type(exc).__name__}: {exc}"}


def run_tasks(worker, cfg, tasks, jobs: int = 1, failures: list | None = None) -> list:
    args = [(cfg, *t) for t in tasks]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(worker, args, chunksize=max(1, len(args) // (4 * jobs))))
    else:
        outcomes = [worker(a) for a in args]
    records = []
    for rec, err in outcomes:
        if err is not None:
            log.warning("run failed: %s", err)
            if failures is not None:
                failures.append(err)
        else:
            records.append(rec)
    return records


def frame_error_sweep(cfg: FrameSweepConfig, jobs: int = 1, failures: list | None = None) -> list[FrameRunResult]:
    """One record per (lambda, order, trial); failed runs go to ``failures``."""
    if cfg.scheme == "coarse" and cfg.filter_cache is not None:
        # design once up front so workers only read the cache
        for r in sorted({r for _, r, _ in cfg.tasks()}):
            load_filter(r, cfg.gamma, cfg.filter_cache)
    records = run_tasks(_safe_task, cfg, cfg.tasks(), jobs, failures)
    records.sort(key=lambda rec: (rec.lam, rec.r, rec.trial))
    return records


def write_csv(records, fieldnames, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(fieldnames)
    for rec in records:
        w.writerow(rec.csv_row())


def frame_csv(records) -> str:
    buf = io.StringIO()
    write_csv(records, CSV_FIELDS, buf)
    return buf.getvalue()


def read_frame_csv(text: str) -> list[FrameRunResult]:
    return [FrameRunResult.from_csv_row(row) for row in csv.DictReader(io.StringIO(text))]
