"""Desk-scale presets that regenerate each numerical study.

Trial counts are sized for a single workstation and can be overridden
with ``reproduce --trials``.
"""

from __future__ import annotations

import numpy as np

from .config import ExperimentConfig


def _grid(lo, hi, step):
    return [float(x) for x in np.round(np.arange(lo, hi + step / 2, step), 6)]


def motivating(trials=1_000_000, seed=2013):
    base = dict(constellation="QPSK", B=1, N=3, decoders=["ml"], snr_db=_grid(10, 25, 2.5),
                trials=trials, seed=seed)
    return "ser", [
        ("naive", ExperimentConfig(family="naive", label="naive", **base)),
        ("simplex", ExperimentConfig(family="simplex", label="simplex", **base)),
    ]


def fig2(trials=1_000_000, seed=2):
    base = dict(constellation="QPSK", B=1, N=10, snr_db=_grid(0, 10, 1), trials=trials, seed=seed)
    return "ser", [
        ("scrs", ExperimentConfig(family="scrs", decoders=["ml", "hamming"], label="scrs", **base)),
        ("codeword_set", ExperimentConfig(family="codeword_set", decoders=["ml", "hamming"],
                                          label="codeword_set", **base)),
        ("uncoded", ExperimentConfig(family="scrs", decoders=["uncoded_majority", "mrc"],
                                     label="baselines", **base)),
    ]


def fig3(trials=100_000, seed=3):
    runs = []
    for N in (14, 21, 30):
        runs.append((f"N{N}", ExperimentConfig(
            constellation="8PSK", B=1, N=N, family="scrs", decoders=["ml", "subset_ml"],
            snr_db=_grid(0, 14, 2), trials=trials, seed=seed, label=f"N{N}")))
    return "ser", runs


def fig4a(trials=100_000, seed=4):
    return "ser", [
        (f"N{N}", ExperimentConfig(constellation="8PSK", B=1, N=N, family="scrs", decoders=["ml"],
                                   snr_db=_grid(0, 20, 2), trials=trials, seed=seed, label=f"N{N}"))
        for N in (7, 14, 21)
    ]


def fig4b(trials=50_000, seed=5):
    return "ser", [
        (f"N{N}", ExperimentConfig(constellation="16QAM", B=2, N=N, family="scrs", decoders=["ml"],
                                   snr_db=_grid(0, 20, 2), trials=trials, seed=seed, label=f"N{N}"))
        for N in (5, 10, 15)
    ]


def fig5a(trials=10_000, seed=6):
    return "rate", [("rayleigh", ExperimentConfig(
        constellation="QPSK", B=1, N=3, family="simplex", snr_db=_grid(0, 20, 2),
        trials=trials, seed=seed, label="rayleigh"))]


def fig5b(trials=10_000, seed=7):
    return "rate", [("fixed_gain", ExperimentConfig(
        constellation="QPSK", B=1, N=3, family="simplex", channel="fixed_gain", gains=[1.5, 0.3, 1.5],
        snr_db=_grid(0, 20, 2), trials=trials, seed=seed, label="fixed_gain"))]


PRESETS = {
    "motivating": motivating,
    "fig2": fig2,
    "fig3": fig3,
    "fig4a": fig4a,
    "fig4b": fig4b,
    "fig5a": fig5a,
    "fig5b": fig5b,
}
