"""Convex piecewise-linear upper envelopes of h(x) = ln((x+1)/(x-1)).

The envelope is a max of Q affine functions fitted by alternating least
squares: points are assigned to the line that currently attains the max,
each line is refitted on its own points, and the loop repeats until the
partition stops changing. Residuals are weighted by 1/y^2 so the fit targets
relative error. A final lift raises each line by the smallest constant that
puts it on or above the data over its cell (cell endpoints included); for a
convex target this makes the envelope an upper bound on the whole cell, not
only at the grid points.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

__all__ = [
    "MaxAffineUpperFit",
    "PwlFit",
    "EnvelopeValue",
    "xci_log",
    "fit",
    "eval_upper",
    "max_rel_error",
    "UpperBoundViolation",
    "to_csv",
    "from_csv",
    "default_fit",
]


class UpperBoundViolation(ArithmeticError):
    pass


def xci_log(x):
    """ln((x+1)/(x-1)), defined for x > 1."""
    x = np.asarray(x, dtype=float)
    return np.log1p(2.0 / (x - 1.0))


def _log_grid(x1: float, x2: float, n: int) -> np.ndarray:
    # log-spaced in the distance to the singularity at x = 1
    return 1.0 + np.geomspace(x1 - 1.0, x2 - 1.0, n)


class MaxAffineUpperFit(RegressorMixin, BaseEstimator):
    """One-dimensional max-affine regression lifted to upper-bound the targets.

    In one dimension the cells of a max-affine function are intervals ordered
    by slope, so each sweep is done with prefix sums (refit) and an upper hull
    (repartition) instead of a dense argmax.

    Parameters
    ----------
    n_segments : int
        Number of affine pieces.
    max_iter : int
        Cap on partition/refit sweeps.
    relative : bool
        Weight squared residuals by 1/y^2 (targets must be non-zero).
    lift : bool
        Raise every line so the envelope is >= y on its cell.
    log_origin : float or None
        Initial breakpoints are log-uniform in ``x - log_origin``. Defaults
        to 0 for positive data; set it to a nearby singularity of the target.
    """

    def __init__(self, n_segments=20, max_iter=20000, relative=True, lift=True, log_origin=None):
        self.n_segments = n_segments
        self.max_iter = max_iter
        self.relative = relative
        self.lift = lift
        self.log_origin = log_origin

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError("MaxAffineUpperFit expects a single feature")
        if self.n_segments < 1:
            raise ValueError("n_segments must be >= 1")
        order = np.argsort(X[:, 0], kind="stable")
        x = X[order, 0]
        yy = y[order].astype(float)
        if self.relative and np.any(yy == 0):
            raise ValueError("relative weighting needs non-zero targets")
        w = 1.0 / yy**2 if self.relative else np.ones_like(yy)
        n = len(x)
        q = max(1, min(self.n_segments, n // 2))

        origin = 0.0 if self.log_origin is None else float(self.log_origin)
        if x[0] > origin:
            edges = origin + np.geomspace(x[0] - origin, x[-1] - origin, q + 1)
        else:
            edges = np.linspace(x[0], x[-1], q + 1)
        bounds = np.searchsorted(x, edges[1:-1], side="left")
        bounds = np.unique(np.r_[0, bounds, n])

        sums = _PrefixSums(x, yy, w)
        self.n_iter_ = 0
        for it in range(self.max_iter):
            bounds = self._reseed(sums, bounds, q)
            slope, icept = sums.lines(bounds)
            new = self._hull_bounds(x, slope, icept)
            self.n_iter_ = it + 1
            if np.array_equal(new, bounds):
                break
            bounds = new
        slope, icept = sums.lines(bounds)

        if self.lift:
            icept = icept + self._lift_amounts(x, yy, slope, icept)
        keep = np.unique(np.argmax(slope[None, :] * x[:, None] + icept[None, :], axis=1))
        idx = keep[np.argsort(slope[keep], kind="stable")]
        self.coef_ = slope[idx]
        self.intercept_ = icept[idx]
        self.domain_ = (float(x[0]), float(x[-1]))
        return self

    @staticmethod
    def _hull_bounds(x, slope, icept):
        """Cell boundaries (grid indices) of max_k(slope_k*x + icept_k)."""
        order = np.lexsort((icept, slope))
        hull: list[int] = []
        starts: list[float] = []
        for k in order:
            if hull and slope[hull[-1]] == slope[k]:
                hull.pop()
                starts.pop()
            while hull:
                j = hull[-1]
                cross = (icept[j] - icept[k]) / (slope[k] - slope[j])
                if cross <= starts[-1]:
                    hull.pop()
                    starts.pop()
                else:
                    break
            starts.append(-np.inf if not hull else
                          (icept[hull[-1]] - icept[k]) / (slope[k] - slope[hull[-1]]))
            hull.append(k)
        cuts = np.searchsorted(x, np.array(starts[1:]), side="left")
        return np.unique(np.r_[0, cuts, len(x)])

    @staticmethod
    def _reseed(sums, bounds, q):
        """Split the worst cells in half until there are q cells of >= 2 points."""
        bounds = list(bounds)
        while len(bounds) - 1 < q:
            b = np.array(bounds)
            sse = sums.sse(b)
            sse[(b[1:] - b[:-1]) < 4] = -1.0
            k = int(np.argmax(sse))
            if sse[k] < 0:
                break
            bounds.insert(k + 1, (bounds[k] + bounds[k + 1]) // 2)
        return np.array(bounds)

    @staticmethod
    def _lift_amounts(x, y, slope, icept):
        labels = np.argmax(slope[None, :] * x[:, None] + icept[None, :], axis=1)
        lift = np.zeros(len(slope))
        n = len(x)
        for k in np.unique(labels):
            members = np.flatnonzero(labels == k)
            lo, hi = members[0], members[-1]
            # extend to the neighbouring grid points so cells overlap at their joints
            sel = np.arange(max(lo - 1, 0), min(hi + 2, n))
            lift[k] = np.max(y[sel] - (slope[k] * x[sel] + icept[k]))
        return lift

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, reset=False)
        return np.max(X[:, :1] * self.coef_[None, :] + self.intercept_[None, :], axis=1)


class _PrefixSums:
    """Weighted moments over index ranges, for O(1) per-cell least squares."""

    def __init__(self, x, y, w):
        z = lambda v: np.r_[0.0, np.cumsum(v)]
        self.w, self.wx, self.wy = z(w), z(w * x), z(w * y)
        self.wxx, self.wxy, self.wyy = z(w * x * x), z(w * x * y), z(w * y * y)

    def _cells(self, bounds):
        lo, hi = bounds[:-1], bounds[1:]
        return tuple(m[hi] - m[lo] for m in (self.w, self.wx, self.wy, self.wxx, self.wxy, self.wyy))

    def lines(self, bounds):
        sw, sx, sy, sxx, sxy, _ = self._cells(bounds)
        det = sw * sxx - sx * sx
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(det > 0, (sw * sxy - sx * sy) / det, 0.0)
            icept = np.where(sw > 0, (sy - slope * sx) / sw, 0.0)
        return slope, icept

    def sse(self, bounds):
        sw, sx, sy, sxx, sxy, syy = self._cells(bounds)
        a, b = self.lines(bounds)
        return a * a * sxx + 2 * a * b * sx + b * b * sw - 2 * a * sxy - 2 * b * sy + syy


@dataclass(frozen=True)
class EnvelopeValue:
    value: float
    in_domain: bool

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class PwlFit:
    """Fitted envelope of ln((x+1)/(x-1)) on [x1, x2]; lines sorted by slope."""

    coeffs: tuple[tuple[float, float], ...]
    x1: float
    x2: float

    @property
    def q_segments(self) -> int:
        return len(self.coeffs)

    @property
    def slopes(self) -> np.ndarray:
        return np.array([c[0] for c in self.coeffs])

    @property
    def intercepts(self) -> np.ndarray:
        return np.array([c[1] for c in self.coeffs])

    def __call__(self, x: float) -> float:
        return max(a * x + b for a, b in self.coeffs)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.max(x[..., None] * self.slopes + self.intercepts, axis=-1)


def fit(x1: float, x2: float, q: int, grid_points: int = 100_000, max_iter: int = 20000) -> PwlFit:
    if not x1 > 1.0:
        raise ValueError("x1 must be > 1: ln((x+1)/(x-1)) is singular at x = 1")
    if not x2 > x1:
        raise ValueError("x2 must exceed x1")
    if q < 1:
        raise ValueError("q must be >= 1")
    x = _log_grid(x1, x2, grid_points)
    est = MaxAffineUpperFit(n_segments=q, max_iter=max_iter, log_origin=1.0).fit(x[:, None], xci_log(x))
    coeffs = tuple((float(a), float(b)) for a, b in zip(est.coef_, est.intercept_))
    return PwlFit(coeffs, float(x1), float(x2))


def eval_upper(pwl: PwlFit, x: float) -> EnvelopeValue:
    return EnvelopeValue(pwl(x), pwl.x1 <= x <= pwl.x2)


def max_rel_error(pwl: PwlFit, grid_points: int = 100_000, spacing: str = "uniform") -> float:
    """Largest (envelope - h)/h on a grid over the fit domain.

    Raises UpperBoundViolation if any grid residual is negative.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    if spacing == "uniform":
        x = np.linspace(pwl.x1, pwl.x2, grid_points)
    elif spacing == "log":
        x = _log_grid(pwl.x1, pwl.x2, grid_points)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    h = xci_log(x)
    resid = pwl.evaluate(x) - h
    worst = float(resid.min())
    if worst < -1e-12 * max(1.0, float(h.max())):
        i = int(resid.argmin())
        raise UpperBoundViolation(f"envelope below target by {-worst:.3g} at x={x[i]:.6g}")
    return float(np.max(resid / h))


def to_csv(pwl: PwlFit) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "o1", "o0"])
    for k, (a, b) in enumerate(pwl.coeffs, start=1):
        w.writerow([k, repr(a), repr(b)])
    return buf.getvalue()


def from_csv(text: str, x1: float, x2: float) -> PwlFit:
    rows = list(csv.DictReader(io.StringIO(text)))
    rows.sort(key=lambda r: int(r["k"]))
    return PwlFit(tuple((float(r["o1"]), float(r["o0"])) for r in rows), x1, x2)


_DEFAULT = {}


def default_fit(x1: float = 1.001, x2: float = 200.0, q: int = 20) -> PwlFit:
    """Memoized fit; the coefficients are deterministic for given arguments."""
    key = (x1, x2, q)
    if key not in _DEFAULT:
        _DEFAULT[key] = fit(x1, x2, q)
    return _DEFAULT[key]
