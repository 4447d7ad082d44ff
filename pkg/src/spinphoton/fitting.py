"""Nonlinear least squares, lineshape models, and calibration root solves.

The optimizer is a damped Gauss-Newton (Levenberg-Marquardt style) descent
with a central-difference Jacobian and multiplicative damping adaptation
(x10 on rejection, /10 on acceptance).  It is deterministic given identical
inputs and never accepts a step that increases the residual norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spindyn

MAX_ITERATIONS = 200
ABS_TOL = 1e-10
REL_TOL = 1e-8


class FitConvergenceError(RuntimeError):
    """Raised when a lineshape fit exhausts its iterations.

    Carries the best-so-far result in the `result` attribute.
    """

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class CalibrationError(RuntimeError):
    """Raised when a 1-D calibration root solve cannot bracket its target."""


@dataclass(frozen=True)
class DataSeries:
    """Abscissae, ordinates, and optional weights for a fit.

    x must be strictly increasing; use `data_series` to build one from
    unsorted inputs.
    """

    x: np.ndarray
    y: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.ndim != 1 or self.x.shape != self.y.shape:
            raise ValueError("x and y must be 1-D arrays of equal length")
        if self.x.size > 1 and not np.all(np.diff(self.x) > 0):
            raise ValueError("x must be strictly increasing")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != self.x.shape:
                raise ValueError("weights must match x in length")
            object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.x.size


def data_series(x, y, weights=None):
    """Build a DataSeries, sorting the points jointly by x first."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x, kind="stable")
    w = None if weights is None else np.asarray(weights, dtype=float)[order]
    return DataSeries(x[order], y[order], w)


@dataclass
class FitResult:
    """Outcome of a least-squares fit."""

    params: dict[str, float]
    residual_norm: float
    converged: bool
    iterations: int
    extras: dict[str, float] = field(default_factory=dict)


def _jacobian(model, x, params):
    """Central-difference Jacobian of model(x, *params), shape (len(x), n)."""
    n = len(params)
    jac = np.empty((x.size, n))
    for j in range(n):
        h = 1e-6 * max(abs(params[j]), 1e-3)
        hi = params.copy()
        lo = params.copy()
        hi[j] += h
        lo[j] -= h
        jac[:, j] = (model(x, *hi) - model(x, *lo)) / (2.0 * h)
    return jac


def least_squares(model, series, p0, param_names=None, max_iterations=MAX_ITERATIONS):
    """Minimize sum of squared residuals of y - model(x, *p).

    model takes (x_array, *params) and returns an array.  Residuals are
    multiplied by the series weights when present.  Returns a FitResult whose
    `converged` flag is set when the scaled residual gradient drops below
    tolerance or the step and cost changes become negligible; iteration
    exhaustion returns a non-converged result rather than raising.
    """
    if len(series) < len(p0):
        raise ValueError(
            f"need at least {len(p0)} points to fit {len(p0)} parameters, "
            f"got {len(series)}"
        )
    x, y = series.x, series.y
    w = series.weights if series.weights is not None else None
    names = list(param_names) if param_names is not None else [
        f"p{i}" for i in range(len(p0))
    ]

    def residuals(params):
        r = y - model(x, *params)
        return r * w if w is not None else r

    p = np.asarray(p0, dtype=float)
    r = residuals(p)
    cost = float(r @ r)
    lam = 1e-3
    iterations = 0
    converged = False

    for _ in range(max_iterations):
        jac = _jacobian(lambda xx, *pp: model(xx, *pp), x, p)
        if w is not None:
            jac = jac * w[:, None]
        grad = jac.T @ r
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= ABS_TOL + REL_TOL * cost:
            converged = True
            break

        jtj = jac.T @ jac
        diag = np.maximum(np.diag(jtj), 1e-30)
        accepted = False
        while lam <= 1e12:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p + step
            r_trial = residuals(trial)
            cost_trial = float(r_trial @ r_trial)
            if cost_trial < cost:
                small_step = np.max(np.abs(step)) <= REL_TOL * (1.0 + np.max(np.abs(p)))
                small_gain = (cost - cost_trial) <= ABS_TOL + REL_TOL * cost
                p, r, cost = trial, r_trial, cost_trial
                iterations += 1
                lam = max(lam / 10.0, 1e-12)
                accepted = True
                if small_step or small_gain:
                    converged = True
                break
            lam *= 10.0
        if not accepted:
            # No damping level improves the cost: treat as a stationary point.
            converged = True
            break
        if converged:
            break

    return FitResult(
        params=dict(zip(names, (float(v) for v in p))),
        residual_norm=math.sqrt(cost),
        converged=converged,
        iterations=iterations,
    )


# ---------------------------------------------------------------------------
# Lineshape models


def gaussian(x, amplitude, center, sigma, offset):
    """Gaussian peak amplitude * exp(-(x-center)^2 / (2 sigma^2)) + offset."""
    return amplitude * np.exp(-((x - center) ** 2) / (2.0 * sigma**2)) + offset


def lorentzian_dip(x, center, kappa, alpha, background):
    """Reflectivity of a bare single-sided cavity, scaled by a flat background.

    background * |1 - 2*alpha / (1 + 2i(x-center)/kappa)|^2, a Lorentzian dip
    of FWHM kappa and on-resonance value background * (1 - 2*alpha)^2.
    """
    u = 2.0 * (x - center) / kappa
    return background * (1.0 - 4.0 * alpha * (1.0 - alpha) / (1.0 + u**2))


def _edge_level(y):
    k = max(1, y.size // 10)
    return 0.5 * (float(np.mean(y[:k])) + float(np.mean(y[-k:])))


def _half_crossing_width(x, y, center_idx, half_level, rising):
    """Full width of |y| about center_idx at the given level; 0 if not found."""
    left = right = None
    for i in range(center_idx, 0, -1):
        if (y[i - 1] < half_level) == rising:
            left = x[i]
            break
    for i in range(center_idx, y.size - 1):
        if (y[i + 1] < half_level) == rising:
            right = x[i]
            break
    if left is None or right is None or right <= left:
        return 0.0
    return right - left


def fit_gaussian(series):
    """Fit amplitude, center, sigma, offset; report the peak value too.

    Initialization: offset from the edge mean, center at the extremum of the
    offset-subtracted data (fixing the amplitude sign), sigma from the
    half-maximum crossing width.  Raises FitConvergenceError (carrying the
    best-so-far result) if the optimizer does not converge.
    """
    x, y = series.x, series.y
    offset0 = _edge_level(y)
    deviation = y - offset0
    idx = int(np.argmax(np.abs(deviation)))
    amplitude0 = float(deviation[idx])
    if amplitude0 == 0.0:
        amplitude0 = 1e-12
    center0 = float(x[idx])
    width = _half_crossing_width(
        x, np.abs(deviation), idx, abs(amplitude0) / 2.0, rising=True
    )
    sigma0 = width / 2.3548 if width > 0 else (x[-1] - x[0]) / 6.0

    result = least_squares(
        gaussian,
        series,
        [amplitude0, center0, sigma0, offset0],
        param_names=["amplitude", "center", "sigma", "offset"],
    )
    result.params["sigma"] = abs(result.params["sigma"])
    result.extras["peak"] = result.params["offset"] + result.params["amplitude"]
    if not result.converged:
        raise FitConvergenceError("gaussian fit did not converge", result)
    return result


def fit_lorentzian_dip(series):
    """Fit center, kappa, alpha, background of a cavity reflectivity dip.

    The dip depth fixes alpha only up to the alpha <-> 1 - alpha degeneracy;
    the over-coupled branch (alpha > 0.5) is chosen at initialization and
    reported.  Requires the minimum to sit visibly below the edge level.
    """
    x, y = series.x, series.y
    background0 = _edge_level(y)
    if background0 <= 0:
        raise ValueError("dip fit requires a positive background level")
    idx = int(np.argmin(y))
    if y[idx] > 0.95 * background0:
        raise ValueError("no dip found: minimum is not below the background")
    center0 = float(x[idx])
    depth = min(1.0 - float(y[idx]) / background0, 1.0)
    alpha0 = 0.5 * (1.0 + math.sqrt(max(1.0 - depth, 0.0)))
    half_level = background0 * (1.0 - depth / 2.0)
    width = _half_crossing_width(x, y, idx, half_level, rising=False)
    kappa0 = width if width > 0 else (x[-1] - x[0]) / 4.0

    result = least_squares(
        lorentzian_dip,
        series,
        [center0, kappa0, alpha0, background0],
        param_names=["center", "kappa", "alpha", "background"],
    )
    result.params["kappa"] = abs(result.params["kappa"])
    if not result.converged:
        raise FitConvergenceError("lorentzian dip fit did not converge", result)
    return result


# ---------------------------------------------------------------------------
# CSV ingestion


def load_series(path):
    """Read a two-column (x,y) or three-column (x,y,w) CSV into a DataSeries.

    An optional single header line is skipped; row order is preserved before
    the joint sort, and the decimal separator must be '.'.
    """
    xs, ys, ws = [], [], []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            cells = [c.strip() for c in line.split(",")]
            try:
                values = [float(c) for c in cells]
            except ValueError:
                if lineno == 1:
                    continue  # header line
                raise ValueError(f"{path}:{lineno}: non-numeric row {line!r}")
            if len(values) == 2:
                xs.append(values[0])
                ys.append(values[1])
                ws.append(None)
            elif len(values) == 3:
                xs.append(values[0])
                ys.append(values[1])
                ws.append(values[2])
            else:
                raise ValueError(
                    f"{path}:{lineno}: expected 2 or 3 columns, got {len(values)}"
                )
    if not xs:
        raise ValueError(f"{path}: no data rows")
    weights = None if any(w is None for w in ws) else ws
    return data_series(xs, ys, weights)


# ---------------------------------------------------------------------------
# Drive-strength calibration


def bisect(func, lo, hi, target, tol, max_iterations=200):
    """Solve func(x) = target for a monotone increasing func on [lo, hi]."""
    flo, fhi = func(lo) - target, func(hi) - target
    if flo > 0 or fhi < 0:
        raise CalibrationError(
            f"no sign change on bracket [{lo}, {hi}]: "
            f"f(lo)-target={flo}, f(hi)-target={fhi}"
        )
    mid = 0.5 * (lo + hi)
    for _ in range(max_iterations):
        mid = 0.5 * (lo + hi)
        fmid = func(mid) - target
        if abs(fmid) <= tol:
            return mid
        if fmid < 0:
            lo = mid
        else:
            hi = mid
    return mid


def calibrate_beta(
    target_ratio,
    photons,
    temperature_k,
    *,
    decay_to_driven=1.2,
    decay_to_shelf=1.0,
    flip_law=None,
    duration_ns=7.0,
    dt_ns=spindyn.DEFAULT_DT_NS,
    initial=None,
    tol=1e-4,
):
    """Drive-scale beta such that the simulated switching contrast at
    (photons, temperature) equals target_ratio.

    The control drive rate is beta * sqrt(photons / duration); the contrast
    is the relative depletion of the driven ground state over the control
    window, starting from equal ground-state occupation.  Solved by bisection
    to within `tol` on the contrast; the bracket is grown geometrically and a
    CalibrationError reports diagnostics when the target cannot be bracketed.
    """
    if not 0.0 < target_ratio < 1.0:
        raise ValueError(f"target ratio must lie in (0, 1), got {target_ratio}")
    if not photons > 0:
        raise ValueError(f"photon number must be positive, got {photons}")
    law = flip_law if flip_law is not None else spindyn.SpinFlipLaw(0.6, 400.0)
    p0 = initial if initial is not None else spindyn.Populations(0.5, 0.5, 0.0)
    flip = spindyn.spin_flip_rate(law, temperature_k)

    def contrast_of(beta):
        rates = spindyn.RateParams(
            drive=beta * math.sqrt(photons / duration_ns),
            decay_to_driven=decay_to_driven,
            decay_to_shelf=decay_to_shelf,
            ground_flip=flip,
        )
        final = spindyn.integrate(p0, rates, duration_ns, dt_ns)
        return spindyn.switching_contrast(p0.driven, final.driven)

    hi = 1.0
    while contrast_of(hi) < target_ratio:
        hi *= 2.0
        if hi > 1e6:
            raise CalibrationError(
                f"cannot reach contrast {target_ratio} at n={photons}, "
                f"T={temperature_k} K: contrast({hi / 2}) = {contrast_of(hi / 2)}"
            )
    return bisect(contrast_of, 0.0, hi, target_ratio, tol)
