"""Spatially correlated standard-normal fields.

Large-scale parameters decorrelate exponentially with distance, with a
per-parameter correlation distance. A field is realized by convolving
white Gaussian noise on a regular grid with an exponential kernel
``exp(-r/a)``; the kernel scale ``a`` is calibrated numerically so the
resulting normalized autocorrelation equals ``1/e`` at exactly the
requested correlation distance (the naive choice ``a = d_corr`` does
not, because the squared kernel that the autocorrelation sees decays
twice as fast).

Values between grid nodes come from bilinear interpolation followed by
a variance restandardization, so sampled marginals stay N(0, 1) at any
query point, not only on the nodes.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

# Kernel support radius in units of the kernel scale. exp(-8) ~ 3e-4,
# negligible against unit correlations.
_TRUNCATION = 8.0

# a/h bisection results keyed by the dimensionless ratio d_corr/h.
_calibration_cache: dict[float, tuple[float, float, float]] = {}


def _kernel(a_cells: float) -> np.ndarray:
    r = int(np.ceil(_TRUNCATION * a_cells))
    y, x = np.mgrid[-r:r + 1, -r:r + 1]
    return np.exp(-np.hypot(x, y) / a_cells)


def _autocorr_at(a_cells: float, lag_cells: float) -> float:
    """Normalized autocorrelation of the kernel field at a lag along x."""
    k = _kernel(a_cells)
    # Correlation of the kernel with itself; symmetric, so no flip needed.
    corr = fftconvolve(k, k[::-1, ::-1], mode="full")
    c = corr.shape[0] // 2
    row = corr[c]
    lo = int(np.floor(lag_cells))
    frac = lag_cells - lo
    hi = min(lo + 1, row.size - c - 1)
    val = (1 - frac) * row[c + lo] + frac * row[c + hi]
    return val / corr[c, c]


def _calibrate(ratio: float) -> tuple[float, float, float]:
    """Solve for a/h so the field autocorrelation at d_corr is 1/e.

    Returns (a_cells, rho_1, rho_diag): the kernel scale in cells and the
    autocorrelation at one-cell and diagonal one-cell lags, which the
    interpolation variance correction needs.
    """
    key = round(ratio, 9)
    if key in _calibration_cache:
        return _calibration_cache[key]
    target = 1.0 / np.e
    lo, hi = ratio / 8.0, ratio * 4.0
    # autocorrelation at a fixed lag grows monotonically with kernel scale
    while _autocorr_at(lo, ratio) > target:
        lo /= 2.0
    while _autocorr_at(hi, ratio) < target:
        hi *= 2.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if _autocorr_at(mid, ratio) < target:
            lo = mid
        else:
            hi = mid
    a_cells = 0.5 * (lo + hi)
    k = _kernel(a_cells)
    corr = fftconvolve(k, k[::-1, ::-1], mode="full")
    c = corr.shape[0] // 2
    rho_1 = corr[c, c + 1] / corr[c, c]
    rho_diag = corr[c + 1, c + 1] / corr[c, c]
    result = (a_cells, float(rho_1), float(rho_diag))
    _calibration_cache[key] = result
    return result


class GaussianField:
    """One spatially correlated standard-normal field over a rectangle.

    Parameters
    ----------
    corr_dist_m : float
        Distance at which the field autocorrelation falls to 1/e.
    extent : ((xmin, xmax), (ymin, ymax))
        Region (meters) the field must cover. Queries outside it raise.
    rng : numpy.random.Generator
        Source of the white noise.
    grid_step_m : float, optional
        Grid resolution; defaults to ``corr_dist_m / 4``. Must not
        exceed ``corr_dist_m / 2``.
    """

    def __init__(self, corr_dist_m, extent, rng, grid_step_m=None):
        if corr_dist_m <= 0:
            raise ValueError("corr_dist_m must be positive")
        (xmin, xmax), (ymin, ymax) = extent
        if xmax < xmin or ymax < ymin:
            raise ValueError("extent must be non-empty")
        if grid_step_m is None:
            grid_step_m = corr_dist_m / 4.0
        if grid_step_m <= 0:
            raise ValueError("grid_step_m must be positive")
        if grid_step_m > corr_dist_m / 2.0 + 1e-12:
            raise ValueError("grid_step_m must not exceed corr_dist_m / 2")

        self.corr_dist_m = float(corr_dist_m)
        self.grid_step_m = float(grid_step_m)
        h = self.grid_step_m

        a_cells, self._rho1, self._rho_diag = _calibrate(self.corr_dist_m / h)
        pad = int(np.ceil(_TRUNCATION * a_cells))

        # one guard cell beyond each edge so bilinear interpolation has a
        # full cell around every in-extent query point
        self._x0 = xmin - h
        self._y0 = ymin - h
        nx = int(np.ceil((xmax - self._x0) / h)) + 2
        ny = int(np.ceil((ymax - self._y0) / h)) + 2
        self._xmax, self._ymax = xmax, ymax
        self._xmin, self._ymin = xmin, ymin

        kern = _kernel(a_cells)
        kern = kern / np.sqrt((kern**2).sum())
        white = rng.standard_normal((ny + 2 * pad, nx + 2 * pad))
        smooth = fftconvolve(white, kern, mode="same")
        self.values = smooth[pad:pad + ny, pad:pad + nx]
        self.shape = self.values.shape

    def sample(self, x_m, y_m) -> np.ndarray:
        """Field values at arbitrary points inside the extent, N(0,1) each."""
        x = np.atleast_1d(np.asarray(x_m, dtype=float))
        y = np.atleast_1d(np.asarray(y_m, dtype=float))
        if x.shape != y.shape:
            raise ValueError("x_m and y_m must have matching shapes")
        eps = 1e-9
        if (x < self._xmin - eps).any() or (x > self._xmax + eps).any() \
                or (y < self._ymin - eps).any() or (y > self._ymax + eps).any():
            raise ValueError("query location outside the field extent")

        h = self.grid_step_m
        gx = (x - self._x0) / h
        gy = (y - self._y0) / h
        ix = np.clip(gx.astype(int), 0, self.shape[1] - 2)
        iy = np.clip(gy.astype(int), 0, self.shape[0] - 2)
        fx = gx - ix
        fy = gy - iy

        v00 = self.values[iy, ix]
        v10 = self.values[iy, ix + 1]
        v01 = self.values[iy + 1, ix]
        v11 = self.values[iy + 1, ix + 1]
        w00 = (1 - fx) * (1 - fy)
        w10 = fx * (1 - fy)
        w01 = (1 - fx) * fy
        w11 = fx * fy
        val = w00 * v00 + w10 * v10 + w01 * v01 + w11 * v11

        # Interpolation shrinks the variance between nodes; divide by the
        # exact standard deviation of the weighted sum so marginals stay
        # standard normal everywhere.
        r1, rd = self._rho1, self._rho_diag
        var = (w00**2 + w10**2 + w01**2 + w11**2
               + 2 * r1 * (w00 * w10 + w00 * w01 + w10 * w11 + w01 * w11)
               + 2 * rd * (w00 * w11 + w10 * w01))
        return val / np.sqrt(var)


def generate_field(corr_dist_m, extent, rng, grid_step_m=None) -> GaussianField:
    """Convenience constructor matching the class signature."""
    return GaussianField(corr_dist_m, extent, rng, grid_step_m)
