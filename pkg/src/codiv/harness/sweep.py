"""Monte-Carlo symbol-error-rate sweeps.

Trials at each SNR point are split into fixed-size blocks.  Block ``b`` of
point ``p`` draws from ``SeedSequence([seed, p, b])``, so the error counts
depend only on the config and never on how blocks are spread over workers.
"""

from __future__ import annotations

import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..channel import cn01, sample_channel, symbol_confusion, symbol_confusion_mc
from ..fusion import (
    hamming_decode_batch,
    majority_batch,
    ml_decode_batch,
    mrc_batch,
    observed_loglik,
    subset_ml_decode_batch,
)
from ..sigmap import detect_batch
from .config import CSI_DECODERS, ExperimentConfig, Scheme, build_scheme

CSV_COLUMNS = ("decoder", "snr_db", "trials", "errors", "ser", "ci_lo", "ci_hi")
CONF_BUDGET = 4_000_000  # float64 elements per confusion sub-chunk


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    a = (1 - level) / 2
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a, k + 1, n - k))
    return lo, hi


@dataclass
class SweepPoint:
    decoder: str
    snr_db: float
    trials: int
    errors: int

    @property
    def ser(self) -> float:
        return self.errors / self.trials

    @property
    def interval(self) -> tuple[float, float]:
        return clopper_pearson(self.errors, self.trials)

    @property
    def sigma(self) -> float:
        p = self.ser
        return float(np.sqrt(p * (1 - p) / self.trials))


@dataclass
class SweepResult:
    points: list[SweepPoint]
    metadata: dict = field(default_factory=dict)

    def curve(self, decoder: str) -> list[SweepPoint]:
        return sorted((p for p in self.points if p.decoder == decoder), key=lambda p: p.snr_db)

    @property
    def decoders(self) -> list[str]:
        return list(dict.fromkeys(p.decoder for p in self.points))

    def body_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for p in self.points:
            lo, hi = p.interval
            buf.write(f"{p.decoder},{p.snr_db:g},{p.trials},{p.errors},{p.ser:.6e},{lo:.6e},{hi:.6e}\n")
        return buf.getvalue()

    def to_csv(self) -> str:
        head = "".join(
            f"# metadata: {k}={json.dumps(v, default=str)}\n" for k, v in self.metadata.items()
        )
        return head + self.body_csv()

    def to_json(self) -> dict:
        rows = []
        for p in self.points:
            lo, hi = p.interval
            rows.append(dict(decoder=p.decoder, snr_db=p.snr_db, trials=p.trials, errors=p.errors,
                             ser=p.ser, ci_lo=lo, ci_hi=hi))
        return {"metadata": self.metadata, "points": rows}

    def merged(self, other: "SweepResult", prefix: str) -> "SweepResult":
        pts = [SweepPoint(f"{prefix}/{p.decoder}", p.snr_db, p.trials, p.errors) for p in other.points]
        meta = dict(self.metadata)
        meta[prefix] = other.metadata
        return SweepResult(self.points + pts, meta)


def read_csv(text: str) -> SweepResult:
    """Parse the CSV written by :meth:`SweepResult.to_csv`."""
    meta, points = {}, []
    header = None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("metadata:"):
                k, _, v = body[len("metadata:"):].strip().partition("=")
                try:
                    meta[k] = json.loads(v)
                except json.JSONDecodeError:
                    meta[k] = v
            continue
        cells = line.split(",")
        if header is None:
            header = cells
            if tuple(header[: len(CSV_COLUMNS)]) != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV header {header}")
            continue
        row = dict(zip(header, cells))
        points.append(SweepPoint(row["decoder"], float(row["snr_db"]), int(row["trials"]), int(row["errors"])))
    return SweepResult(points, meta)


# ---------------------------------------------------------------------------


def _block_errors(cfg: ExperimentConfig, scheme: Scheme, point: int, block: int, n: int) -> dict[str, int]:
    rho = 10.0 ** (cfg.snr_db[point] / 10)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, point, block]))
    c = scheme.constellation
    pts = c.points * np.sqrt(rho)
    h = sample_channel(scheme.channel, rng, n)
    sym = rng.integers(0, c.M, n)
    noise = cn01(rng, h.shape)
    if not cfg.noise:
        noise = np.zeros_like(noise)
    y = h * pts[sym][:, None] + noise
    det = detect_batch(y, h, pts)
    N = cfg.N
    u = scheme.codebook[det, np.arange(N)]
    gain2 = np.abs(h) ** 2

    decided = {}
    if any(d in CSI_DECODERS for d in cfg.decoders):
        if not cfg.noise:
            conf_fn = lambda g: np.broadcast_to(np.eye(c.M), g.shape + (c.M, c.M))  # noqa: E731
        elif scheme.analytic:
            conf_fn = lambda g: symbol_confusion(c, rho * g)  # noqa: E731
        else:
            mc_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, point, block, 1]))
            conf_fn = None
        step = max(1, CONF_BUDGET // (N * c.M * c.M))
        lls = []
        for s in range(0, n, step):
            if conf_fn is None:
                conf = symbol_confusion_mc(c.scaled(rho), h[s : s + step], mc_rng, cfg.mc_samples)
            else:
                conf = conf_fn(gain2[s : s + step])
            lls.append(observed_loglik(conf, scheme.outputs, u[s : s + step]))
        loglik = np.concatenate(lls)
        if "ml" in cfg.decoders:
            decided["ml"] = ml_decode_batch(loglik)
        if "subset_ml" in cfg.decoders:
            decided["subset_ml"] = subset_ml_decode_batch(loglik, gain2, scheme.plan)
    if "hamming" in cfg.decoders:
        decided["hamming"] = hamming_decode_batch(u, scheme.codebook)
    if "mrc" in cfg.decoders:
        decided["mrc"] = mrc_batch(y, h, pts)
    if "uncoded_majority" in cfg.decoders:
        decided["uncoded_majority"] = majority_batch(det, c.M)
    return {d: int((decided[d] != sym).sum()) for d in cfg.decoders}


def _tasks(cfg: ExperimentConfig):
    for p in range(len(cfg.snr_db)):
        for b, start in enumerate(range(0, cfg.trials, cfg.block_size)):
            yield p, b, min(cfg.block_size, cfg.trials - start)


_WORKER_STATE: dict = {}


def _init_worker(cfg: ExperimentConfig) -> None:
    _WORKER_STATE["cfg"] = cfg
    _WORKER_STATE["scheme"] = build_scheme(cfg)


def _run_task(task):
    p, b, n = task
    return p, _block_errors(_WORKER_STATE["cfg"], _WORKER_STATE["scheme"], p, b, n)


def run_ser_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Measure the symbol error rate of every configured decoder at every SNR point."""
    cfg.validate()
    scheme = build_scheme(cfg)
    t0 = time.perf_counter()
    errors = np.zeros((len(cfg.snr_db), len(cfg.decoders)), dtype=np.int64)
    tasks = list(_tasks(cfg))
    if cfg.workers == 1:
        results = ((p, _block_errors(cfg, scheme, p, b, n)) for p, b, n in tasks)
        for p, errs in results:
            errors[p] += [errs[d] for d in cfg.decoders]
    else:
        with ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(cfg,)) as pool:
            for p, errs in pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))):
                errors[p] += [errs[d] for d in cfg.decoders]
    points = [
        SweepPoint(d, float(snr), cfg.trials, int(errors[p, j]))
        for j, d in enumerate(cfg.decoders)
        for p, snr in enumerate(cfg.snr_db)
    ]
    return SweepResult(points, sweep_metadata(cfg, scheme, time.perf_counter() - t0))


def sweep_metadata(cfg: ExperimentConfig, scheme: Scheme, wall: float) -> dict:
    report = scheme.bound_report()
    meta = {
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "label": cfg.label,
        "constellation": scheme.constellation.name,
        "M": scheme.constellation.M,
        "B": cfg.B,
        "K": cfg.K,
        "N": cfg.N,
        "family": cfg.family,
        "d_min": scheme.code.d_min,
        "channel": cfg.channel,
        "transition_tables": "analytic" if scheme.analytic else f"monte_carlo({cfg.mc_samples})",
        "subset_groups": "stride" if scheme.plan.is_stride() else "by-identical-column",
        "subset_L": scheme.plan.L,
        "trials_per_point": cfg.trials,
        "block_size": cfg.block_size,
        "wall_time_s": round(wall, 3),
    }
    if cfg.channel == "fixed_gain":
        meta["gains"] = list(cfg.gains)
        meta["phase"] = "uniform[0,2pi) per trial"
    if report is not None:
        meta["bounds"] = report.as_dict()
    return meta
