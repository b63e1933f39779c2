"""Diversity-order estimation from SER-vs-SNR curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_ERRORS = 100
DEFAULT_WINDOW_DB = 10.0


@dataclass(frozen=True)
class DiversityFit:
    """Slope of -log10(SER) against log10(rho) over a window.

    When the curve does not have enough reliable points, ``estimable`` is
    False, ``slope`` is None and ``reason`` says why.
    """

    estimable: bool
    slope: float | None = None
    stderr: float | None = None
    window: tuple[float, float] | None = None
    n_points: int = 0
    reason: str = ""

    @property
    def ci95(self) -> tuple[float, float] | None:
        if not self.estimable:
            return None
        return (self.slope - 1.96 * self.stderr, self.slope + 1.96 * self.stderr)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ci95"] = self.ci95
        return d

    def __str__(self):
        if not self.estimable:
            return f"not estimable: {self.reason}"
        lo, hi = self.window
        return f"slope {self.slope:.3f} +/- {self.stderr:.3f} over [{lo:g}, {hi:g}] dB ({self.n_points} points)"


def _as_arrays(curve):
    snr, ser, err, trials = [], [], [], []
    for p in curve:
        if hasattr(p, "snr_db"):
            snr.append(p.snr_db)
            ser.append(p.ser)
            err.append(p.errors)
            trials.append(p.trials)
        else:
            s, r, *rest = p
            snr.append(s)
            ser.append(r)
            err.append(rest[0] if rest else np.inf)
            trials.append(rest[1] if len(rest) > 1 else np.inf)
    order = np.argsort(snr)
    return (np.asarray(snr, float)[order], np.asarray(ser, float)[order],
            np.asarray(err, float)[order], np.asarray(trials, float)[order])


def estimate_diversity(curve, window=None, min_errors: int = MIN_ERRORS,
                       window_db: float = DEFAULT_WINDOW_DB) -> DiversityFit:
    """Fit the high-SNR slope of an error-rate curve.

    Parameters
    ----------
    curve : iterable
        :class:`~codiv.harness.sweep.SweepPoint` objects, or tuples
        ``(snr_db, ser[, errors[, trials]])``.  Tuples without an error
        count are treated as exact (synthetic) values.
    window : (lo, hi), optional
        SNR range in dB.  By default the highest ``window_db`` dB ending at
        the last point that still has ``min_errors`` errors.
    min_errors : int
        Every point inside the window must reach this many errors.

    Returns
    -------
    DiversityFit
        Ordinary least-squares slope.  Its standard error propagates the
        binomial variance of each point through the fit.
    """
    snr, ser, err, trials = _as_arrays(curve)
    reliable = (err >= min_errors) & (ser > 0)
    if window is None:
        if not reliable.any():
            return DiversityFit(False, reason=f"no point has >= {min_errors} errors")
        hi = snr[np.flatnonzero(reliable)[-1]]
        window = (hi - window_db, hi)
    lo, hi = window
    inside = (snr >= lo - 1e-9) & (snr <= hi + 1e-9)
    if np.any(inside & ~reliable):
        bad = snr[inside & ~reliable].tolist()
        return DiversityFit(False, window=(lo, hi),
                            reason=f"points {bad} dB in the window have < {min_errors} errors")
    n = int(inside.sum())
    if n < 3:
        return DiversityFit(False, window=(lo, hi), n_points=n,
                            reason=f"only {n} reliable points in [{lo:g}, {hi:g}] dB (need 3)")
    x = snr[inside] / 10.0
    yv = -np.log10(ser[inside])
    # var(log10 p_hat) ~ (1 - p) / (k ln(10)^2); zero for exact (synthetic) points
    var = np.where(np.isfinite(err[inside]),
                   (1 - ser[inside]) / (np.maximum(err[inside], 1) * np.log(10) ** 2), 0.0)
    c = (x - x.mean()) / np.sum((x - x.mean()) ** 2)
    slope = float(np.sum(c * yv))
    stderr = float(np.sqrt(np.sum(c**2 * var)))
    return DiversityFit(True, slope, stderr, (float(lo), float(hi)), n)
