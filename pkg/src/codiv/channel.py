"""Channel draws, noise, and per-node transition probabilities Pr(u_i | s, h_i).

A node with channel ``h`` detecting coherently sees ``s + n / h``, so its
symbol confusion matrix depends on ``h`` only through the effective SNR
``gamma = rho |h|^2`` of the unit-energy constellation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .sigmap import Constellation, DegenerateChannelError, NodeRule, detect_batch

PROB_FLOOR = 1e-300
DEFAULT_MC_SAMPLES = 100_000


class UnregisteredAnalyticError(ValueError):
    """No closed form exists for the requested constellation."""


@dataclass(frozen=True)
class ChannelModel:
    kind: str
    N: int
    gains: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("iid_rayleigh", "fixed_gain"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.kind == "fixed_gain":
            if self.gains is None:
                raise ValueError("fixed_gain channel needs a gains list")
            if len(self.gains) != self.N:
                raise ValueError(f"expected {self.N} gains, got {len(self.gains)}")
            if any(g < 0 for g in self.gains):
                raise ValueError("gains must be non-negative")
            object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))


def cn01(rng: np.random.Generator, size) -> np.ndarray:
    """Circularly-symmetric CN(0, 1) samples."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * np.sqrt(0.5)


def sample_channel(model: ChannelModel, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw channel gains, shape ``(N,)`` or ``(size, N)``."""
    shape = (model.N,) if size is None else (size, model.N)
    if model.kind == "iid_rayleigh":
        return cn01(rng, shape)
    theta = rng.uniform(0.0, 2 * np.pi, shape)
    return np.asarray(model.gains) * np.exp(1j * theta)


def add_noise(x, rng: np.random.Generator):
    x = np.asarray(x, dtype=complex)
    out = x + cn01(rng, x.shape)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# exact symbol confusion matrices


def _interval_prob(a, b):
    """P(a < Z < b) for standard normal Z, accurate in both tails."""
    flip = a > 0
    lo = np.where(flip, -b, a)
    hi = np.where(flip, -a, b)
    return special.ndtr(hi) - special.ndtr(lo)


@lru_cache(maxsize=None)
def _grid_axes(unit_bytes: bytes, M: int):
    unit = np.frombuffer(unit_bytes, dtype=np.complex128)
    axes = []
    for coord in (unit.real, unit.imag):
        levels = np.unique(np.round(coord, 12))
        mids = (levels[1:] + levels[:-1]) / 2
        edges = np.concatenate([[-np.inf], mids, [np.inf]])
        cell = np.searchsorted(levels, np.round(coord, 12))
        axes.append((levels, edges, cell))
    return axes


def _grid_confusion(unit: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    M = unit.size
    sigma = np.sqrt(0.5 / np.maximum(gamma, 1e-300))[..., None, None]
    out = None
    for levels, edges, cell in _grid_axes(np.ascontiguousarray(unit).tobytes(), M):
        # per-axis cell probabilities for each distinct sent level
        x = levels[:, None]
        with np.errstate(invalid="ignore"):
            p = _interval_prob((edges[None, :-1] - x) / sigma, (edges[None, 1:] - x) / sigma)
        p = p[..., cell[:, None], cell[None, :]]
        out = p if out is None else out * p
    return np.where(gamma[..., None, None] > 0, out, 1.0 / M)


def _phase_pdf(theta, gamma):
    # density of arg(1 + w), w ~ CN(0, 1/gamma)
    c = np.cos(theta)
    rg = np.sqrt(gamma)
    return np.exp(-gamma) / (2 * np.pi) + rg * c / (2 * np.sqrt(np.pi)) * np.exp(
        -gamma * np.sin(theta) ** 2
    ) * special.erfc(-rg * c)


_PSK_LOG10_GAMMA = np.arange(-6.0, 5.5 + 1e-9, 0.02)


@lru_cache(maxsize=None)
def _psk_wedge_table(M: int) -> np.ndarray:
    """log of wedge probabilities, shape (len(grid), M); column k = offset k."""
    half = np.pi / M
    table = np.empty((_PSK_LOG10_GAMMA.size, M))
    for j, lg in enumerate(_PSK_LOG10_GAMMA):
        g = 10.0**lg
        row = np.empty(M)
        for k in range(M // 2 + 1):
            a, b = 2 * np.pi * k / M - half, 2 * np.pi * k / M + half
            if k == 0:
                # central wedge taken as 1 - rest
                continue
            val, _ = integrate.quad(_phase_pdf, a, b, args=(g,), epsabs=0, epsrel=1e-10, limit=200)
            row[k] = row[M - k] = max(val, 0.0)
        row[0] = max(1.0 - row[1:].sum(), 0.0)
        table[j] = np.log(np.maximum(row, PROB_FLOOR))
    return table


def _psk_confusion(M: int, gamma: np.ndarray) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    table = _psk_wedge_table(M)
    lg = np.log10(np.clip(gamma, 10.0 ** _PSK_LOG10_GAMMA[0], 10.0 ** _PSK_LOG10_GAMMA[-1]))
    pos = (lg - _PSK_LOG10_GAMMA[0]) / (_PSK_LOG10_GAMMA[1] - _PSK_LOG10_GAMMA[0])
    i0 = np.clip(np.floor(pos).astype(int), 0, _PSK_LOG10_GAMMA.size - 2)
    w = (pos - i0)[..., None]
    logp = table[i0] * (1 - w) + table[i0 + 1] * w
    p = np.exp(logp)
    p = p / p.sum(axis=-1, keepdims=True)
    p = np.where(gamma[..., None] > 0, p, 1.0 / M)
    offsets = (np.arange(M)[None, :] - np.arange(M)[:, None]) % M
    return p[..., offsets]


def has_analytic(c: Constellation) -> bool:
    return c.kind in ("grid", "psk")


def symbol_confusion(c: Constellation, gamma) -> np.ndarray:
    """Pr(detected = m' | sent = m) at effective SNR ``gamma``; shape (..., M, M)."""
    if c.kind == "grid":
        return _grid_confusion(c.unit(), gamma)
    if c.kind == "psk":
        return _psk_confusion(c.M, gamma)
    raise UnregisteredAnalyticError(f"no closed-form regions for constellation {c.name!r}")


def output_onehot(outputs: np.ndarray, q: int) -> np.ndarray:
    """(N, M) node outputs -> (N, M, q) indicator."""
    return (np.asarray(outputs)[..., None] == np.arange(q)).astype(float)


def node_tables(conf: np.ndarray, outputs: np.ndarray, q: int) -> np.ndarray:
    """Aggregate symbol confusions (..., N, M, M) into (..., N, M, q) output tables."""
    return np.einsum("...imk,ikq->...imq", conf, output_onehot(outputs, q))


# ---------------------------------------------------------------------------
# public table API


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Per-node row-stochastic tables ``tables[i, m, u] = Pr(u_i = u | s_m, h_i)``."""

    tables: np.ndarray
    method: str
    mc_samples: int | None = None
    log_tables: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.tables, dtype=float)
        if t.ndim != 3:
            raise ValueError("tables must have shape (N, M, q)")
        t.setflags(write=False)
        lt = np.log(np.maximum(t, PROB_FLOOR))
        lt.setflags(write=False)
        object.__setattr__(self, "tables", t)
        object.__setattr__(self, "log_tables", lt)

    @property
    def N(self) -> int:
        return self.tables.shape[0]


def _check_h(h):
    if np.any(np.asarray(h) == 0):
        raise DegenerateChannelError("h = 0: transition table undefined")


def transition_table(
    h: complex,
    constellation: Constellation,
    rule: NodeRule,
    method: str = "analytic",
    rng: np.random.Generator | None = None,
    mc_samples: int = DEFAULT_MC_SAMPLES,
) -> np.ndarray:
    """(M, q) matrix of Pr(u | s_m, h) for one node.

    ``method="analytic"`` integrates the Gaussian over the exact decision
    regions (closed form for grid constellations, quadrature for PSK).
    ``method="monte_carlo"`` simulates ``mc_samples`` receptions per symbol.
    """
    outputs = rule.outputs(constellation)
    q = rule.spec.q
    if method == "analytic":
        if constellation.energy > 0:
            _check_h(h)
        gamma = constellation.energy * abs(h) ** 2
        conf = symbol_confusion(constellation, gamma)
        return conf @ output_onehot(outputs, q)
    if method == "monte_carlo":
        if rng is None:
            raise ValueError("monte_carlo tables need an rng")
        _check_h(h)
        table = np.zeros((constellation.M, q))
        for m, s in enumerate(constellation.points):
            y = h * s + cn01(rng, mc_samples)
            det = detect_batch(y, np.full(mc_samples, h), constellation.points)
            table[m] = np.bincount(outputs[det], minlength=q) / mc_samples
        return table
    raise ValueError(f"unknown method {method!r}")


def transition_model(
    h,
    constellation: Constellation,
    rules,
    method: str = "analytic",
    rng: np.random.Generator | None = None,
    mc_samples: int = DEFAULT_MC_SAMPLES,
) -> TransitionModel:
    """Tables for every node, ``rules[i]`` paired with ``h[i]``."""
    h = np.asarray(h, dtype=complex)
    if len(rules) != h.size:
        raise ValueError("need one rule per channel gain")
    tabs = [
        transition_table(hi, constellation, r, method, rng, mc_samples) for hi, r in zip(h, rules)
    ]
    return TransitionModel(np.stack(tabs), method, mc_samples if method == "monte_carlo" else None)


def qpsk_bit_error(gamma):
    """Per-component error probability Q(sqrt(gamma)) for QPSK with E|s|^2 = rho."""
    return special.ndtr(-np.sqrt(gamma))


def symbol_confusion_mc(
    c: Constellation, h: np.ndarray, rng: np.random.Generator, mc_samples: int = DEFAULT_MC_SAMPLES
) -> np.ndarray:
    """Empirical Pr(detected = m' | sent = m) for each gain in ``h``; shape (..., M, M)."""
    h = np.asarray(h, dtype=complex)
    _check_h(h)
    flat = h.reshape(-1)
    out = np.zeros((flat.size, c.M, c.M))
    for j, hj in enumerate(flat):
        for m, s in enumerate(c.points):
            y = hj * s + cn01(rng, mc_samples)
            det = detect_batch(y, np.full(mc_samples, hj), c.points)
            out[j, m] = np.bincount(det, minlength=c.M) / mc_samples
    return out.reshape(h.shape + (c.M, c.M))
