"""Two-stage decoding of Sigma-Delta quantized compressed sensing measurements.

Stage one treats the quantization error as noise and runs a robust sparse
decoder (orthogonal matching pursuit by default) on the quantized
measurements to find the support. Stage two restricts the measurement
matrix to that support, where it is an ordinary frame, and reconstructs with
its Sobolev dual.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Protocol

import numpy as np

from . import configs, ensembles, linalg
from .frame_pipeline import fmt, run_tasks, trial_seed, write_csv
from .quantization import Alphabet, greedy_levels, greedy_sigma_delta

CSV_FIELDS = ("lambda", "n", "k", "r", "trial", "seed", "support_recovered", "coarse_error_l2", "error_l2")


class Decoder(Protocol):
    def __call__(self, phi: np.ndarray, y: np.ndarray, k: int) -> np.ndarray: ...


def best_k_support(z, k: int) -> np.ndarray:
    """Indices of the k largest magnitudes, sorted; ties favour the lower index."""
    z = np.asarray(z, dtype=float)
    order = np.lexsort((np.arange(z.size), -np.abs(z)))
    return np.sort(order[:k])


def robust_decode(phi, y, k: int, cond_limit: float = 1e12) -> np.ndarray:
    """Orthogonal matching pursuit with k iterations.

    Each step adds the column most correlated with the residual (after
    column normalization, lowest index on ties) and re-fits by least squares
    on the selected columns.
    """
    phi = linalg.as_matrix(phi)
    y = np.asarray(y, dtype=float)
    m, n = phi.shape
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    if not 1 <= k <= min(m, n):
        raise ValueError(f"sparsity k={k} out of range for a {m}x{n} matrix")
    z = np.zeros(n)
    if not np.any(y):
        return z
    norms = np.linalg.norm(phi, axis=0)
    norms[norms == 0] = np.inf
    support: list[int] = []
    residual = y.copy()
    coef = np.zeros(0)
    for _ in range(k):
        corr = np.abs(phi.T @ residual) / norms
        corr[support] = -1.0
        support.append(int(np.argmax(corr)))
        sub = phi[:, support]
        s = linalg.singular_values(sub)
        if s[-1] == 0 or s[0] / s[-1] > cond_limit:
            raise linalg.NumericalFailure(
                "ill-conditioned least squares on selected support", s[0] / max(s[-1], 1e-300)
            )
        coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
        residual = y - sub @ coef
        if np.linalg.norm(residual) <= 1e-14 * np.linalg.norm(y):
            break
    z[support] = coef
    return z


@dataclass
class CsRunResult:
    lam: float
    n: int
    k: int
    r: int
    support_recovered: bool
    coarse_error_l2: float
    error_l2: float
    seed: int = 0
    trial: int = 0
    artifacts: dict = field(default_factory=dict, repr=False, compare=False)

    def csv_row(self) -> list[str]:
        return [fmt(v) for v in (self.lam, self.n, self.k, self.r, self.trial, self.seed,
                                 self.support_recovered, self.coarse_error_l2, self.error_l2)]

    @classmethod
    def from_csv_row(cls, row: dict) -> "CsRunResult":
        flag = row["support_recovered"]
        if flag not in ("true", "false"):
            raise ValueError(f"support_recovered: expected true/false, got {flag!r}")
        return cls(
            lam=float(row["lambda"]), n=int(row["n"]), k=int(row["k"]), r=int(row["r"]),
            trial=int(row["trial"]), seed=int(row["seed"]), support_recovered=flag == "true",
            coarse_error_l2=float(row["coarse_error_l2"]), error_l2=float(row["error_l2"]),
        )


@dataclass
class TwoStageEstimate:
    z_coarse: np.ndarray
    support: np.ndarray
    z_hat: np.ndarray


def two_stage_decode(phi, q, k: int, r: int, decoder: Decoder = robust_decode) -> TwoStageEstimate:
    """Support from the robust decoder, then Sobolev-dual refinement on it."""
    phi = linalg.as_matrix(phi)
    q = np.asarray(q, dtype=float)
    z_coarse = decoder(phi, q, k)
    support = best_k_support(z_coarse, k)
    e = phi[:, support]
    a_mat = linalg.apply_inverse_difference(e, r)
    x_hat = linalg.pseudo_inverse(a_mat) @ linalg.apply_inverse_difference(q, r)
    z_hat = np.zeros(phi.shape[1])
    z_hat[support] = x_hat
    return TwoStageEstimate(z_coarse=z_coarse, support=support, z_hat=z_hat)


def noise_budget(r: int, step: float, m: int) -> float:
    """l2 bound on y - q = D^r u for a stable greedy scheme: 2^r (step/2) sqrt(m)."""
    return 2**r * step / 2 * np.sqrt(m)


def run_cs_trial(phi, z, r: int, a: Alphabet, decoder: Decoder = robust_decode,
                 seed: int = 0, trial: int = 0) -> CsRunResult:
    phi = linalg.as_matrix(phi)
    z = np.asarray(z, dtype=float)
    m, n = phi.shape
    true_support = np.flatnonzero(z)
    k = true_support.size
    y = phi @ z
    trace = greedy_sigma_delta(y, r, a)
    est = two_stage_decode(phi, trace.q, k, r, decoder)
    recovered = bool(np.array_equal(est.support, true_support))
    coarse_err = float(np.linalg.norm(z - est.z_coarse))
    if recovered:
        err = float(np.linalg.norm(z[true_support] - est.z_hat[true_support]))
    else:
        err = float("nan")
    return CsRunResult(
        lam=m / k, n=n, k=k, r=r, support_recovered=recovered,
        coarse_error_l2=coarse_err, error_l2=err, seed=seed, trial=trial,
        artifacts={"z": z, "y": y, "q": trace.q, "u": trace.u, "estimate": est},
    )


@dataclass
class CsSweepConfig:
    lambdas: list = field(default_factory=list)
    trials: int = 1
    n: int = 256
    k: int = 4
    r: int = 2
    family: str = "gaussian"
    step: float = 0.01
    levels: object = "auto"
    min_magnitude: float = 0.2
    max_magnitude: float = 1.0
    seed: int = 0
    seed_offset: int = 0

    def __post_init__(self):
        if self.family not in {f.value for f in ensembles.Family}:
            raise ValueError(f"family: unknown family {self.family!r}")
        if self.trials < 0:
            raise ValueError("trials: must be non-negative")
        if not 1 <= self.k <= self.n:
            raise ValueError("k: need 1 <= k <= n")
        if self.r < 1:
            raise ValueError("r: must be positive")
        if not self.step > 0:
            raise ValueError("step: must be positive")
        if self.levels != "auto" and (not isinstance(self.levels, int) or self.levels < 1):
            raise ValueError("levels: must be a positive integer or 'auto'")
        if not 0 < self.min_magnitude <= self.max_magnitude:
            raise ValueError("min_magnitude: need 0 < min_magnitude <= max_magnitude")
        for lam in self.lambdas:
            if lam < 1 or abs(lam * self.k - round(lam * self.k)) > 1e-9:
                raise ValueError(f"lambdas: {lam} * k is not a positive integer")
            if round(lam * self.k) > self.n:
                raise ValueError(f"lambdas: m = {lam} * k exceeds n = {self.n}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "CsSweepConfig":
        return configs.from_mapping(cls, doc)

    @classmethod
    def from_json(cls, text: str) -> "CsSweepConfig":
        return cls.from_dict(json.loads(text))

    def tasks(self) -> list[tuple[float, int]]:
        return [(float(lam), t) for lam in self.lambdas for t in range(self.trials)]


def run_cs_task(cfg: CsSweepConfig, lam: float, trial: int) -> CsRunResult:
    m = int(round(lam * cfg.k))
    seed = trial_seed(cfg, trial)
    spec = ensembles.FrameEnsembleSpec(cfg.family, m, cfg.n, "one_over_sqrt_m", seed)
    phi = ensembles.draw_frame(spec)
    z = ensembles.draw_sparse_signal(
        ensembles.SparseSignalSpec(cfg.n, cfg.k, cfg.min_magnitude, cfg.max_magnitude, seed), m
    )
    if cfg.levels == "auto":
        levels = greedy_levels(float(np.abs(phi @ z).max()), cfg.step, cfg.r)
    else:
        levels = cfg.levels
    out = run_cs_trial(phi, z, cfg.r, Alphabet(levels, cfg.step), seed=seed, trial=trial)
    art = out.artifacts
    out.artifacts = {
        "noise_sup": float(np.abs(art["y"] - art["q"]).max()),
        "noise_limit": 2**cfg.r * cfg.step / 2,
    }
    return out


def _safe_task(args):
    cfg, lam, t = args
    try:
        return run_cs_task(cfg, lam, t), None
    except Exception as exc:  # reported, not raised: one bad run must not sink a sweep
        return None, {"lambda": lam, "trial": t, "error": f"{type(exc).__name__}: {exc}"}


def cs_error_sweep(cfg: CsSweepConfig, jobs: int = 1, failures: list | None = None) -> list[CsRunResult]:
    records = run_tasks(_safe_task, cfg, cfg.tasks(), jobs, failures)
    records.sort(key=lambda rec: (rec.lam, rec.trial))
    return records


def cs_csv(records) -> str:
    buf = io.StringIO()
    write_csv(records, CSV_FIELDS, buf)
    return buf.getvalue()


def read_cs_csv(text: str) -> list[CsRunResult]:
    return [CsRunResult.from_csv_row(row) for row in csv.DictReader(io.StringIO(text))]
