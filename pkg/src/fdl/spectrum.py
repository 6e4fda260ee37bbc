"""Divergence indices of partial sums, their level sets and box-counting.

Two index scales are used.  In ``lp`` mode a point gets

    beta_poly(x) = max_{n_min <= n <= N} log R_n(x) / log n

and in ``ct`` mode

    beta_log(x) = max_{n_min <= n <= N} log R_n(x) / log log n,

where R_n(x) = max_{m <= n} |S_m f(x)|.  Negative values clamp to 0.
The maximum over a finite range stands in for the limsup, so both
n_min and N are carried in every result.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import _accel
from .errors import DomainError, EmptySet
from .trigcore import is_power_of_two, partial_sum_all

N_MIN = 16
HALF_WIDTH = 0.05
_EDGE = 1e-12


@dataclass(frozen=True)
class Mode:
    kind: str  # "lp" or "ct"
    p: float | None = None

    def __post_init__(self):
        if self.kind not in ("lp", "ct"):
            raise ValueError(f"mode must be 'lp' or 'ct', got {self.kind!r}")
        if self.kind == "lp" and not (self.p and 1 < self.p < np.inf):
            raise ValueError("lp mode needs 1 < p < inf")

    @property
    def beta_max(self):
        return 1.0 / self.p if self.kind == "lp" else 1.0

    def reference(self, beta):
        """Target dimension curve: 1 - beta p (lp) or 1 (ct)."""
        beta = np.asarray(beta, dtype=np.float64)
        return 1.0 - beta * self.p if self.kind == "lp" else np.ones_like(beta)

    def label(self):
        return f"LP({self.p:g})" if self.kind == "lp" else "CT"


LP2 = Mode("lp", 2.0)
CT = Mode("ct")


def as_mode(mode, p=None):
    if isinstance(mode, Mode):
        return mode
    return Mode(str(mode).lower(), p if str(mode).lower() == "lp" else None)


def geometric_checkpoints(N, n_min=N_MIN, per_octave=4):
    """Integers n_min * 2^(i/per_octave) below N, plus N itself."""
    if N < n_min:
        raise ValueError(f"N = {N} < n_min = {n_min}")
    count = int(math.ceil(per_octave * math.log2(N / n_min))) + 1
    c = np.unique(np.round(n_min * 2.0 ** (np.arange(count) / per_octave)).astype(np.int64))
    c = c[c < N]
    return np.append(c, np.int64(N))


def _indices(runmax, checkpoints):
    """(beta_poly, beta_log) from running maxima at the checkpoints."""
    n = checkpoints.astype(np.float64)
    with np.errstate(divide="ignore"):
        lr = np.log(runmax)
    bp = np.max(lr / np.log(n), axis=-1)
    bl = np.max(lr / np.log(np.log(n)), axis=-1)
    return np.maximum(bp, 0.0), np.maximum(bl, 0.0)


@dataclass(frozen=True)
class DivergenceProfile:
    x: float
    checkpoints: np.ndarray
    running_max: np.ndarray
    beta_poly: float
    beta_log: float
    n_min: int = N_MIN

    def beta(self, mode):
        return self.beta_poly if as_mode(mode, 2.0).kind == "lp" else self.beta_log


def divergence_profile(f, x, N=None, mode="lp", n_min=N_MIN, checkpoints=None):
    """Running maximum of |S_n f(x)| and both divergence indices.

    ``mode`` only matters through ``DivergenceProfile.beta``; both
    indices are always computed.
    """
    # past the degree S_n f = f, so N may exceed it
    N = max(f.degree(), 64) if N is None else int(N)
    if N < 64:
        raise ValueError("N must be >= 64")
    cps = geometric_checkpoints(N, n_min) if checkpoints is None else np.asarray(checkpoints, np.int64)
    rm = np.maximum.accumulate(np.abs(partial_sum_all(f, float(x), N)))[cps]
    bp, bl = _indices(rm, cps)
    return DivergenceProfile(float(x), cps, rm, float(bp), float(bl), n_min)


@dataclass(frozen=True)
class GridProfile:
    """Per-point indices on the grid m/M, m = 0..M-1."""

    M: int
    N: int
    n_min: int
    checkpoints: np.ndarray
    running_max: np.ndarray
    beta_poly: np.ndarray
    beta_log: np.ndarray
    envelope: np.ndarray
    q: float

    def beta(self, mode):
        return self.beta_poly if as_mode(mode, 2.0).kind == "lp" else self.beta_log


def _split(f, N):
    pos = np.zeros(N + 1, dtype=np.complex128)
    neg = np.zeros(N + 1, dtype=np.complex128)
    for k, c in zip(f.ks, f.coeffs):
        if 0 <= k <= N:
            pos[k] = c
        elif -N <= k < 0:
            neg[-k] = c
    return pos, neg


def grid_profile(f, M, N=None, n_min=N_MIN, q=0.5, checkpoints=None):
    """Running maxima and indices at every grid point (one kernel pass).

    ``envelope`` is max_{1 <= n <= N} |S_n f(m/M)| / n^q.
    """
    if not is_power_of_two(M):
        raise ValueError(f"M = {M} must be a power of two")
    N = max(f.degree(), 64) if N is None else int(N)
    cps = geometric_checkpoints(N, n_min) if checkpoints is None else np.asarray(checkpoints, np.int64)
    pos, neg = _split(f, N)
    rm, env = _accel.profile_grid(pos, neg, M, np.arange(M, dtype=np.int64), cps, q)
    bp, bl = _indices(rm, cps)
    return GridProfile(M, N, n_min, cps, rm, bp, bl, env, float(q))


def envelope_constant(f, M, N=None, p=2.0):
    """max over the grid and 1 <= n <= N of |S_n f(x)| / n^{1/p}."""
    return float(grid_profile(f, M, N, q=1.0 / p).envelope.max())


def level_set_grid(f, mode, M, N, beta, eta, n_min=N_MIN, profile=None):
    """Grid points m/M whose index lies in [beta - eta, beta + eta]."""
    prof = profile or grid_profile(f, M, N, n_min)
    b = prof.beta(mode)
    m = np.nonzero((b >= beta - eta) & (b <= beta + eta))[0]
    return m / prof.M


def boxcount_dimension(S, s0=2, s1=None, M=None):
    """Least-squares slope of log2 #(occupied cells of size 2^-s) in s.

    Returns (dim, residual) where residual is the largest deviation of
    the log-counts from the fitted line.
    """
    x = np.asarray(S, dtype=np.float64).ravel() % 1.0
    if x.size == 0:
        raise EmptySet("box-counting needs a nonempty set")
    if s1 is None:
        if M is None:
            raise ValueError("give s1 or the grid size M")
        s1 = int(round(math.log2(M)))
    if M is not None and 2 ** s1 > M:
        raise ValueError(f"s1 = {s1} is finer than the grid 1/{M}")
    if not 2 <= s0 < s1:
        raise ValueError("need 2 <= s0 < s1")
    s = np.arange(s0, s1 + 1)
    counts = np.array([np.unique(np.floor(x * 2.0 ** k).astype(np.int64)).size for k in s], dtype=np.float64)
    y = np.log2(counts)
    slope, icpt = np.polyfit(s, y, 1)
    resid = float(np.max(np.abs(y - (slope * s + icpt))))
    return float(slope), resid


# ---------------------------------------------------------------------------
# dimension functions


@dataclass(frozen=True, order=False)
class Jauge:
    s: float
    t: float

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("s must be > 0")
        if not 0 < self.t <= 1:
            raise ValueError("t must lie in (0, 1]")


def jauge_log(j, x):
    """log phi_{s,t}(x) = s log x + (log 1/x)^(1-t)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any((x <= 0) | (x >= 1)):
        raise DomainError("jauge functions are evaluated on (0, 1)")
    y = -np.log(x)
    return -j.s * y + y ** (1.0 - j.t)


def jauge_log_depth(j, y):
    """log phi_{s,t} as a function of y = log 1/x (no underflow for huge y)."""
    y = np.asarray(y, dtype=np.float64)
    return -j.s * y + y ** (1.0 - j.t)


def jauge_eval(j, x):
    """phi_{s,t}(x) = x^s exp((log 1/x)^(1-t)) for x in (0, 1)."""
    v = np.exp(jauge_log(j, x))
    return float(v) if np.ndim(v) == 0 else v


def lexicographic_le(a, b):
    """phi_a <= phi_b near 0  iff  s_a > s_b, or s_a = s_b and t_a >= t_b."""
    return a.s > b.s or (a.s == b.s and a.t >= b.t)


@dataclass(frozen=True)
class JaugeComparison:
    a: Jauge
    b: Jauge
    verdict: str  # "a<=b", "a>=b" or "equal"
    xs: tuple
    agrees: tuple
    crossover_depth: float | None

    @property
    def all_agree(self):
        return all(self.agrees)


def _crossover(a, b):
    """Depth y* = log(1/x*) past which log phi_a - log phi_b keeps one sign.

    Scans y on a log grid up to 1e200 and refines the last sign change
    with brentq.  None when there is no sign change.
    """
    def d(y):
        return float(jauge_log_depth(a, y) - jauge_log_depth(b, y))

    ys = np.geomspace(1e-6, 1e200, 4001)
    sgn = np.sign(jauge_log_depth(a, ys) - jauge_log_depth(b, ys))
    nz = np.nonzero(sgn)[0]
    flips = [i for i, j in zip(nz, nz[1:]) if sgn[i] != sgn[j]]
    if not flips:
        return None
    i = flips[-1]
    lo, hi = ys[i], ys[nz[nz > i][0]]
    return float(brentq(d, lo, hi, xtol=1e-12 * hi, rtol=1e-14))


def jauge_compare(a, b, xs=(1e-4, 1e-8, 1e-12)):
    """Lexicographic verdict plus a numerical check at each x."""
    if a == b:
        verdict = "equal"
    elif lexicographic_le(a, b):
        verdict = "a<=b"
    else:
        verdict = "a>=b"
    agrees = []
    for x in xs:
        la, lb = float(jauge_log(a, x)), float(jauge_log(b, x))
        if verdict == "equal":
            agrees.append(la == lb)
        elif verdict == "a<=b":
            agrees.append(la <= lb)
        else:
            agrees.append(la >= lb)
    cross = None if verdict == "equal" else _crossover(a, b)
    return JaugeComparison(a, b, verdict, tuple(xs), tuple(agrees), cross)


def jauge_mass(points, s0, s1, t):
    """Sum over occupied cells of phi_{1,t}(2^-s), for s0 <= s <= s1.

    A diagnostic curve for the precised dimension (1, t); it is reported,
    never thresholded.
    """
    x = np.asarray(points, dtype=np.float64) % 1.0
    j = Jauge(1.0, t)
    out = []
    for s in range(s0, s1 + 1):
        cnt = np.unique(np.floor(x * 2.0 ** s).astype(np.int64)).size
        out.append(cnt * jauge_eval(j, 2.0 ** -s))
    return np.array(out)


# ---------------------------------------------------------------------------
# spectrum tables


@dataclass(frozen=True)
class SpectrumBin:
    beta_center: float
    half_width: float
    count: int
    dim: float
    residual: float


@dataclass(frozen=True)
class SpectrumTable:
    mode: Mode
    bins: tuple
    M: int
    N: int
    n_min: int = N_MIN
    scales: tuple = (2, 0)
    outside: int = 0
    meta: dict = field(default_factory=dict)

    def centers(self):
        return np.array([b.beta_center for b in self.bins])

    def dims(self):
        return np.array([b.dim for b in self.bins])

    def slope(self, centers):
        """Least-squares slope of dim against beta over the given bin centers
        (NaN if any of them is empty)."""
        pick = [b for b in self.bins if any(abs(b.beta_center - c) < 1e-9 for c in centers)]
        if len(pick) != len(centers) or any(b.count == 0 for b in pick):
            return float("nan")
        return float(np.polyfit([b.beta_center for b in pick], [b.dim for b in pick], 1)[0])

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["beta_center", "half_width", "count", "dim", "residual"])
        for b in self.bins:
            w.writerow([f"{b.beta_center:.17g}", f"{b.half_width:.17g}", b.count,
                        f"{b.dim:.17g}", f"{b.residual:.17g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_json_dict(self):
        c = self.centers()
        return {
            "mode": self.mode.kind,
            "p": self.mode.p,
            "M": self.M,
            "N": self.N,
            "n_min": self.n_min,
            "scales": list(self.scales),
            "outside": self.outside,
            "bins": [asdict(b) for b in self.bins],
            "reference": {"beta": c.tolist(), "dim": self.mode.reference(c).tolist(),
                          "formula": "1 - beta*p" if self.mode.kind == "lp" else "1"},
            "meta": self.meta,
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_json_dict(), indent=1, sort_keys=True, allow_nan=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json_dict(cls, d):
        mode = Mode(d["mode"], d.get("p"))
        bins = tuple(SpectrumBin(**b) for b in d["bins"])
        return cls(mode, bins, d["M"], d["N"], d["n_min"], tuple(d["scales"]), d.get("outside", 0), d.get("meta", {}))


def bin_index(beta, half_width=HALF_WIDTH):
    """Bin i covers (c_i - h, c_i + h] with c_i = 2 i h; bin 0 also takes
    everything down to 0.  Values on an edge go to the lower bin."""
    w = 2 * half_width
    return np.maximum(np.ceil((np.asarray(beta) - half_width) / w - _EDGE), 0).astype(np.int64)


def empirical_spectrum(f, mode, M, N=None, half_width=HALF_WIDTH, n_min=N_MIN, s0=2, s1=None, profile=None):
    """Box-counting dimension of each level set of the divergence index."""
    mode = as_mode(mode)
    prof = profile or grid_profile(f, M, N, n_min)
    s1 = s1 or int(round(math.log2(M)))
    b = prof.beta(mode)
    w = 2 * half_width
    nb = int(round(mode.beta_max / w)) + 1
    idx = bin_index(b, half_width)
    outside = int(np.sum(idx >= nb))
    x = np.arange(M) / M
    bins = []
    for i in range(nb):
        pts = x[idx == i]
        if pts.size == 0:
            bins.append(SpectrumBin(round(i * w, 12), half_width, 0, float("nan"), float("nan")))
            continue
        d, r = boxcount_dimension(pts, s0, s1, M)
        bins.append(SpectrumBin(round(i * w, 12), half_width, int(pts.size), float(np.clip(d, 0.0, 1.0)), r))
    return SpectrumTable(mode, tuple(bins), M, prof.N, n_min, (s0, s1), outside)
