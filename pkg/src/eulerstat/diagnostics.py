"""Statistical diagnostics on ensemble snapshots.

Structure function. For a band-limited field the space-and-ball-averaged
squared increment has an exact modal form: with W(x) = 2 (1 - 2 J1(x)/x)
(J1 the Bessel function of the first kind, W(0) = 0),

    S(r)^2 = (1/m) sum_i (2 pi)^2 sum_k W(|k| r) |u_i(k)|^2
           = (1/m) sum_i int_D avg_{|h|<r} |u_i(x+h) - u_i(x)|^2 dh dx,

because the average of |exp(i k.h) - 1|^2 over the disk |h| < r is
W(|k| r). The kernel satisfies 0 <= W <= 4 and W(x) <= 4 min(x^2, 1).

Energy spectrum. E(K) = (1/m) sum_i (1/2) sum_{K-1 < |k| <= K} |u_i(k)|^2
with Euclidean shells; summing all shells recovers half the mean modal
energy. The compensated spectrum multiplies by K^gamma.

Scaling exponents are least-squares slopes in log-log coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j1 as _bessel_j1

from .ensemble import EnsembleSnapshot, mean_field, variance_field
from .spectral import SpectralField, sobolev_norm, truncate_to, wavenumbers

__all__ = [
    "ScalarCurve",
    "ExponentFit",
    "increment_kernel",
    "default_r_grid",
    "default_fit_range",
    "structure_function",
    "energy_spectrum",
    "compensated_spectrum",
    "fit_exponent",
    "cauchy_rate",
    "time_regularity_ratio",
    "write_curve_csv",
]


@dataclass(frozen=True)
class ScalarCurve:
    """(abscissa, value) pairs with provenance metadata."""

    abscissa: np.ndarray
    values: np.ndarray
    kind: str = ""
    time: float = 0.0
    N: int = 0
    m: int = 0

    def __post_init__(self):
        a = np.asarray(self.abscissa, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if a.shape != v.shape or a.ndim != 1:
            raise ValueError("abscissa and values must be 1-d arrays of equal length")
        if np.any(a <= 0) or np.any(np.diff(a) <= 0):
            raise ValueError("abscissa must be positive and strictly increasing")
        a.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "abscissa", a)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ExponentFit:
    """Log-log least-squares fit: values ~ exp(intercept) * abscissa^exponent."""

    exponent: float
    intercept: float
    fit_range: tuple
    residual: float


def increment_kernel(x) -> np.ndarray:
    """Disk average of |exp(i k.h) - 1|^2 over |h| < r, as a function of x = |k| r.

    W(x) = 2 (1 - 2 J1(x)/x), continued by W(0) = 0. A short series is used
    for small x to avoid cancellation.
    """
    xx = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty_like(xx)
    small = np.abs(xx) < 0.05
    xs = xx[small]
    x2 = xs * xs
    # W = x^2/4 - x^4/96 + x^6/4608 - ...
    out[small] = x2 / 4.0 - x2 * x2 / 96.0 + x2 * x2 * x2 / 4608.0
    xl = xx[~small]
    out[~small] = 2.0 * (1.0 - 2.0 * _bessel_j1(xl) / xl)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def default_r_grid(N: int, count: int = 24) -> np.ndarray:
    """Logarithmically spaced correlation lengths in [2pi/(2N), pi/2]."""
    return np.geomspace(2.0 * np.pi / (2 * N), np.pi / 2.0, count)


def default_fit_range(N: int) -> tuple:
    """One decade of correlation lengths ending at 8 grid spacings."""
    r_max = 8.0 * 2.0 * np.pi / (2 * N)
    return (r_max / 10.0, r_max)


def _radial_power(snapshot: EnsembleSnapshot):
    """Mean modal power per integer |k|^2: (ksq values, power sums)."""
    _, _, ksq = wavenumbers(snapshot.N)
    flat_ksq = ksq.ravel()
    acc = np.zeros(int(flat_ksq.max()) + 1)
    for f in snapshot.fields:
        p = (np.abs(f.coeffs[0]) ** 2 + np.abs(f.coeffs[1]) ** 2).ravel()
        acc += np.bincount(flat_ksq, weights=p, minlength=acc.size)
    acc /= snapshot.m
    nz = np.nonzero(acc)[0]
    nz = nz[nz > 0]
    return nz.astype(np.float64), acc[nz]


def structure_function(snapshot: EnsembleSnapshot, r_values=None) -> ScalarCurve:
    """Ensemble structure function S(r) on the given correlation lengths."""
    r = default_r_grid(snapshot.N) if r_values is None else np.asarray(r_values, np.float64)
    if np.any(r <= 0):
        raise ValueError("correlation lengths must be positive")
    ksq_vals, power = _radial_power(snapshot)
    kmag = np.sqrt(ksq_vals)
    s2 = np.empty(r.shape)
    for j, rj in enumerate(r):
        s2[j] = (2.0 * np.pi) ** 2 * np.dot(increment_kernel(kmag * rj), power)
    return ScalarCurve(
        abscissa=r,
        values=np.sqrt(np.maximum(s2, 0.0)),
        kind="structure",
        time=snapshot.time,
        N=snapshot.N,
        m=snapshot.m,
    )


def max_shell(N: int) -> int:
    """Largest shell index populated by modes with |k|_inf <= N."""
    return int(np.ceil(np.sqrt(2.0) * N))


def energy_spectrum(snapshot: EnsembleSnapshot, K_max: int | None = None) -> ScalarCurve:
    """Shell-averaged energy spectrum E(K), K = 1 .. K_max.

    Shell K collects modes with K-1 < |k| <= K (Euclidean modulus). The
    default K_max covers every populated shell, so that sum_K E(K) equals
    half the mean modal energy exactly.
    """
    full = max_shell(snapshot.N)
    K_max = full if K_max is None else int(K_max)
    if K_max > full:
        raise ValueError(f"K_max={K_max} beyond the last populated shell {full}")
    ksq_vals, power = _radial_power(snapshot)
    shells = np.ceil(np.sqrt(ksq_vals)).astype(int)
    e = np.bincount(shells, weights=0.5 * power, minlength=full + 1)
    K = np.arange(1, K_max + 1, dtype=np.float64)
    return ScalarCurve(
        abscissa=K,
        values=e[1 : K_max + 1],
        kind="spectrum",
        time=snapshot.time,
        N=snapshot.N,
        m=snapshot.m,
    )


def compensated_spectrum(curve: ScalarCurve, gamma: float) -> ScalarCurve:
    """Multiply spectrum values by K^gamma."""
    return ScalarCurve(
        abscissa=curve.abscissa,
        values=curve.values * curve.abscissa ** gamma,
        kind=f"{curve.kind}_comp{gamma:g}",
        time=curve.time,
        N=curve.N,
        m=curve.m,
    )


def fit_exponent(curve: ScalarCurve, r_min: float, r_max: float) -> ExponentFit:
    """Least-squares power-law fit over abscissa values in [r_min, r_max]."""
    mask = (curve.abscissa >= r_min) & (curve.abscissa <= r_max)
    if np.count_nonzero(mask) < 3:
        raise ValueError(f"need >= 3 curve points in [{r_min:g}, {r_max:g}]")
    vals = curve.values[mask]
    if np.any(vals <= 0):
        raise ValueError("cannot fit a power law through nonpositive values")
    lx = np.log(curve.abscissa[mask])
    ly = np.log(vals)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return ExponentFit(
        exponent=float(slope),
        intercept=float(intercept),
        fit_range=(float(r_min), float(r_max)),
        residual=resid,
    )


def _modal_l2(diff_coeffs: np.ndarray) -> float:
    return float(2.0 * np.pi * np.sqrt(np.sum(np.abs(diff_coeffs) ** 2)))


def cauchy_rate(snapA: EnsembleSnapshot, snapB: EnsembleSnapshot, statistic="mean") -> float:
    """L2 distance of an ensemble statistic across one resolution doubling.

    snapB must have exactly twice the resolution of snapA at the same time.
    statistic is "mean", "variance", or an integer sample position. Mean and
    per-sample distances compare modal coefficients after truncating the
    fine field; the variance distance compares variance grids evaluated on
    the coarse synthesis grid.
    """
    if snapB.N != 2 * snapA.N:
        raise ValueError(f"resolution pair ({snapA.N}, {snapB.N}) is not a doubling")
    if abs(snapA.time - snapB.time) > 1e-12 * max(1.0, abs(snapA.time)):
        raise ValueError(f"snapshot times differ: {snapA.time} vs {snapB.time}")
    if statistic == "mean":
        coarse = truncate_to(mean_field(snapB), snapA.N)
        return _modal_l2(coarse.coeffs - mean_field(snapA).coeffs)
    if statistic == "variance":
        M = 3 * snapA.N
        diff = variance_field(snapB, M) - variance_field(snapA, M)
        return float(2.0 * np.pi * np.sqrt(np.mean(diff ** 2)))
    j = int(statistic)
    coarse = truncate_to(snapB.fields[j], snapA.N)
    return _modal_l2(coarse.coeffs - snapA.fields[j].coeffs)


def time_regularity_ratio(trajectory, L: float = 2.0) -> float:
    """Max over consecutive snapshot pairs of the negative-Sobolev rate.

    trajectory is a sequence of (time, field) pairs of a single sample. The
    reported value is max |u(t)-u(s)|_{H^-L} / ((1 + |u0|_{L2}^2) |t-s|),
    with u0 the earliest field.
    """
    traj = sorted(trajectory, key=lambda p: p[0])
    if len(traj) < 2:
        raise ValueError("need at least two snapshots of the trajectory")
    u0 = traj[0][1]
    denom_base = 1.0 + sobolev_norm(u0, 0.0) ** 2
    worst = 0.0
    for (t0, f0), (t1, f1) in zip(traj, traj[1:]):
        dt = t1 - t0
        if dt <= 0:
            raise ValueError("snapshot times must be distinct")
        diff = SpectralField(f0.N, f1.coeffs - f0.coeffs)
        worst = max(worst, sobolev_norm(diff, -L) / (denom_base * dt))
    return worst


def write_curve_csv(curve: ScalarCurve, path) -> None:
    """CSV: header '# kind,time,N,m', then 'abscissa,value' rows (17 sig digits)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {curve.kind},{curve.time:.17g},{curve.N},{curve.m}\n")
        for a, v in zip(curve.abscissa, curve.values):
            fh.write(f"{a:.17g},{v:.17g}\n")
