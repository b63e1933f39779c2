"""Average achievable rate of quantized and centrally combined receivers."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from ..channel import cn01, node_tables, sample_channel, symbol_confusion, symbol_confusion_mc
from .config import ConfigError, ExperimentConfig, Scheme, build_scheme

MAX_OUTPUT_BITS = 20
JOINT_BUDGET = 4_000_000
RATE_COLUMNS = ("receiver", "snr_db", "draws", "rate", "stderr")


def mutual_information(tables: np.ndarray) -> np.ndarray:
    """Exact I(s; u) in bits for uniform inputs, enumerating every output vector.

    Parameters
    ----------
    tables : (..., N, M, q) per-node transition tables.

    Returns
    -------
    Array of shape ``tables.shape[:-3]``.
    """
    tables = np.asarray(tables, dtype=float)
    *batch, N, M, q = tables.shape
    joint = tables[..., 0, :, :]
    for i in range(1, N):
        joint = (joint[..., :, :, None] * tables[..., i, :, None, :]).reshape(*batch, M, -1)
    pbar = joint.mean(axis=-2, keepdims=True)
    kl = special.kl_div(joint, np.broadcast_to(pbar, joint.shape)).sum(axis=-1)
    return kl.mean(axis=-1) / np.log(2)


def mrc_mutual_information(points: np.ndarray, h: np.ndarray, rng, samples: int) -> np.ndarray:
    """Monte-Carlo I(s; y_mrc) per channel draw for the post-combining Gaussian channel.

    After maximum-ratio combining the equivalent channel is ``s + w`` with
    ``w ~ CN(0, 1/||h||^2)``.  Returns one estimate per row of ``h``.
    """
    M = points.size
    var = 1.0 / (np.abs(h) ** 2).sum(axis=-1)  # (D,)
    w = cn01(rng, (h.shape[0], M, samples)) * np.sqrt(var)[:, None, None]
    diff = points[:, None] - points[None, :]  # (M, M'): s_m - s_m'
    # log sum_m' exp(-(|s_m - s_m' + w|^2 - |w|^2) / var)
    arg = -(np.abs(diff[None, :, :, None] + w[:, :, None, :]) ** 2 - np.abs(w[:, :, None, :]) ** 2)
    arg = arg / var[:, None, None, None]
    lse = special.logsumexp(arg, axis=2)  # (D, M, S)
    return np.log2(M) - lse.mean(axis=(1, 2)) / np.log(2)


@dataclass
class RatePoint:
    receiver: str
    snr_db: float
    draws: int
    rate: float
    stderr: float


@dataclass
class RateResult:
    points: list[RatePoint]
    metadata: dict = field(default_factory=dict)

    def curve(self, receiver: str) -> list[RatePoint]:
        return sorted((p for p in self.points if p.receiver == receiver), key=lambda p: p.snr_db)

    def body_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(RATE_COLUMNS) + "\n")
        for p in self.points:
            buf.write(f"{p.receiver},{p.snr_db:g},{p.draws},{p.rate:.9f},{p.stderr:.3e}\n")
        return buf.getvalue()

    def to_csv(self) -> str:
        head = "".join(f"# metadata: {k}={json.dumps(v, default=str)}\n" for k, v in self.metadata.items())
        return head + self.body_csv()

    def to_json(self) -> dict:
        return {"metadata": self.metadata, "points": [p.__dict__ for p in self.points]}


def _quantized_rates(scheme: Scheme, cfg: ExperimentConfig, rho: float, h: np.ndarray, rng) -> np.ndarray:
    c = scheme.constellation
    if scheme.analytic:
        conf = symbol_confusion(c, rho * np.abs(h) ** 2)
    else:
        conf = symbol_confusion_mc(c.scaled(rho), h, rng, cfg.mc_samples)
    return mutual_information(node_tables(conf, scheme.outputs, scheme.q))


def achievable_rate(cfg: ExperimentConfig, draws: int = 10_000, mrc_samples: int = 64,
                    baseline_family: str = "naive") -> RateResult:
    """Average achievable rate of the coded scheme, a baseline scheme and MRC.

    The quantized rates are exact over all ``q^N`` output vectors for each
    channel draw; the expectation over channels is a sample mean over
    ``draws`` draws.  The centralized (MRC) rate adds a Monte-Carlo
    average over ``mrc_samples`` noise samples per symbol and draw.
    """
    cfg.validate()
    if cfg.N * cfg.B > MAX_OUTPUT_BITS:
        raise ConfigError([
            f"N*B = {cfg.N * cfg.B} > {MAX_OUTPUT_BITS}: exact enumeration of all 2^(NB) outputs "
            "is infeasible; reduce N or B"
        ])
    if draws < 1:
        raise ConfigError(["draws must be >= 1"])
    coded = build_scheme(cfg)
    schemes = {"coded": coded}
    if baseline_family and baseline_family != cfg.family:
        schemes["naive"] = build_scheme(replace(cfg, family=baseline_family))
    M = coded.constellation.M
    q = coded.q
    per_draw = max(1, JOINT_BUDGET // (M * q**cfg.N))
    points = []
    for p, snr in enumerate(cfg.snr_db):
        rho = 10.0 ** (snr / 10)
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, p, 2]))
        h = sample_channel(coded.channel, rng, draws)
        mc_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, p, 3]))
        for name, sch in schemes.items():
            rates = np.concatenate([
                _quantized_rates(sch, cfg, rho, h[s : s + per_draw], mc_rng)
                for s in range(0, draws, per_draw)
            ])
            rates = np.clip(rates, 0.0, min(np.log2(M), cfg.N * cfg.B))
            points.append(RatePoint(name, float(snr), draws, float(rates.mean()),
                                    float(rates.std(ddof=1) / np.sqrt(draws)) if draws > 1 else 0.0))
        pts = coded.constellation.points * np.sqrt(rho)
        step = max(1, JOINT_BUDGET // (M * M * mrc_samples))
        mrc = np.concatenate([
            mrc_mutual_information(pts, h[s : s + step], mc_rng, mrc_samples)
            for s in range(0, draws, step)
        ])
        mrc = np.clip(mrc, 0.0, np.log2(M))
        points.append(RatePoint("centralized", float(snr), draws, float(mrc.mean()),
                                float(mrc.std(ddof=1) / np.sqrt(draws)) if draws > 1 else 0.0))
    meta = {
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "constellation": coded.constellation.name,
        "N": cfg.N,
        "B": cfg.B,
        "family": cfg.family,
        "baseline_family": baseline_family if "naive" in schemes else None,
        "d_min": coded.code.d_min,
        "channel": cfg.channel,
        "draws": draws,
        "mrc_noise_samples": mrc_samples,
    }
    if cfg.channel == "fixed_gain":
        meta["gains"] = list(cfg.gains)
        meta["phase"] = "uniform[0,2pi) per draw"
    return RateResult(points, meta)
