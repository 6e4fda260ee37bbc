"""Trigonometric polynomials on T = R/Z: partial sums, Fejér sums, norms.

Conventions: e_k(t) = exp(2 pi i k t), S_n keeps |k| <= n, and
sigma_n weights coefficient k by max(0, 1 - |k|/n).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _accel
from .errors import AliasingError, TailNotDecayed


def is_power_of_two(M):
    M = int(M)
    return M >= 1 and (M & (M - 1)) == 0


def next_power_of_two(n):
    n = max(1, int(n))
    return 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class TrigPoly:
    """Coefficients of sum_{k=kmin}^{kmax} c_k e_k stored on a dense window."""

    kmin: int
    kmax: int
    coeffs: np.ndarray
    label: str = ""

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 1:
            raise ValueError("coeffs must be one-dimensional")
        if int(self.kmax) < int(self.kmin):
            raise ValueError(f"kmin={self.kmin} > kmax={self.kmax}")
        if c.shape[0] != int(self.kmax) - int(self.kmin) + 1:
            raise ValueError("coefficient count does not match the window")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "kmin", int(self.kmin))
        object.__setattr__(self, "kmax", int(self.kmax))
        object.__setattr__(self, "coeffs", c)

    # construction helpers

    @classmethod
    def monomial(cls, k, amplitude=1.0, label=None):
        return cls(k, k, np.array([amplitude]), label or f"e_{k}")

    @classmethod
    def zero(cls, label="0"):
        return cls(0, 0, np.zeros(1), label)

    @classmethod
    def from_dict(cls, mapping, label=""):
        """Build from a {k: c_k} mapping (densified)."""
        ks = sorted(mapping)
        lo, hi = ks[0], ks[-1]
        c = np.zeros(hi - lo + 1, dtype=np.complex128)
        for k in ks:
            c[k - lo] += mapping[k]
        return cls(lo, hi, c, label)

    # basic queries

    @property
    def width(self):
        return self.kmax - self.kmin + 1

    @property
    def ks(self):
        return np.arange(self.kmin, self.kmax + 1)

    def coeff(self, k):
        if self.kmin <= k <= self.kmax:
            return complex(self.coeffs[k - self.kmin])
        return 0j

    def spectrum(self, tol=0.0):
        """Frequencies whose coefficient modulus exceeds ``tol``."""
        return self.ks[np.abs(self.coeffs) > tol]

    def degree(self):
        sp = self.spectrum()
        return int(np.abs(sp).max()) if sp.size else 0

    def trimmed(self, tol=0.0):
        sp = np.flatnonzero(np.abs(self.coeffs) > tol)
        if sp.size == 0:
            return TrigPoly.zero(self.label)
        a, b = sp[0], sp[-1]
        return TrigPoly(self.kmin + a, self.kmin + b, self.coeffs[a:b + 1], self.label)

    def window(self, lo, hi):
        """Coefficients restricted to [lo, hi] (zero-padded where needed)."""
        out = np.zeros(hi - lo + 1, dtype=np.complex128)
        a, b = max(lo, self.kmin), min(hi, self.kmax)
        if a <= b:
            out[a - lo:b - lo + 1] = self.coeffs[a - self.kmin:b - self.kmin + 1]
        return TrigPoly(lo, hi, out, self.label)

    # arithmetic

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        lo, hi = min(self.kmin, other.kmin), max(self.kmax, other.kmax)
        c = self.window(lo, hi).coeffs + other.window(lo, hi).coeffs
        return TrigPoly(lo, hi, c, self.label or other.label)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, a):
        if isinstance(a, TrigPoly):
            return NotImplemented
        return TrigPoly(self.kmin, self.kmax, self.coeffs * complex(a), self.label)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def conj_reflect(self):
        """Coefficients of the pointwise complex conjugate."""
        return TrigPoly(-self.kmax, -self.kmin, np.conj(self.coeffs[::-1]), self.label)

    def derivative(self):
        return TrigPoly(self.kmin, self.kmax, 2j * np.pi * self.ks * self.coeffs, self.label + "'")

    def with_label(self, label):
        return TrigPoly(self.kmin, self.kmax, self.coeffs, label)

    def __call__(self, x):
        """Direct evaluation at arbitrary points."""
        x = np.asarray(x, dtype=np.float64)
        out = _accel.window_eval(self.coeffs, self.kmin, x.ravel())
        return out.reshape(x.shape) if x.ndim else complex(out[0])

    def to_dict(self):
        return {
            "label": self.label,
            "kmin": self.kmin,
            "kmax": self.kmax,
            "re": [float(v) for v in self.coeffs.real],
            "im": [float(v) for v in self.coeffs.imag],
        }

    @classmethod
    def from_json_dict(cls, d):
        c = np.asarray(d["re"], dtype=np.float64) + 1j * np.asarray(d["im"], dtype=np.float64)
        return cls(int(d["kmin"]), int(d["kmax"]), c, d.get("label", ""))

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return (self.kmin, self.kmax) == (other.kmin, other.kmax) and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None


def dirichlet_kernel(n):
    return TrigPoly(-n, n, np.ones(2 * n + 1), f"D_{n}")


def fejer_kernel(n):
    k = np.arange(-(n - 1), n)
    return TrigPoly(-(n - 1), n - 1, 1.0 - np.abs(k) / n, f"F_{n}")


def save_poly(P, path):
    Path(path).write_text(json.dumps(P.to_dict()) + "\n")


def load_poly(path):
    return TrigPoly.from_json_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class SampledFunction:
    """Values at t_m = m/M, m = 0..M-1, with M a power of two."""

    M: int
    samples: np.ndarray
    label: str = ""

    def __post_init__(self):
        M = int(self.M)
        if M < 2 or not is_power_of_two(M):
            raise ValueError(f"M = {M} must be a power of two >= 2")
        s = np.array(self.samples, dtype=np.complex128)
        if s.shape != (M,):
            raise ValueError("sample count does not match M")
        s.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_callable(cls, fn, M, label=""):
        return cls(M, fn(np.arange(M) / M), label)

    @property
    def t(self):
        return np.arange(self.M) / self.M

    def sup(self):
        return float(np.abs(self.samples).max())

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re", "im"])
        for t, v in zip(self.t, self.samples):
            w.writerow([f"{t:.16e}", f"{v.real:.16e}", f"{v.imag:.16e}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path, label=""):
        rows = list(csv.DictReader(io.StringIO(Path(path).read_text())))
        v = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
        return cls(len(rows), v, label)


# --------------------------------------------------------------------------
# operations


def modulate(P, m):
    """Multiply by e_m: every frequency shifts by m."""
    return TrigPoly(P.kmin + m, P.kmax + m, P.coeffs, P.label)


def _terms_by_order(P, x):
    """Per-|k| term sums a_m = c_m e_m(x) + c_{-m} e_{-m}(x) over the
    range of m where the window is nonzero.  Returns (m_lo, a)."""
    L = max(abs(P.kmin), abs(P.kmax))
    m_lo = 0 if P.kmin <= 0 <= P.kmax else min(abs(P.kmin), abs(P.kmax))
    ks = P.ks.astype(np.float64)
    t = P.coeffs * np.exp(2j * np.pi * ((ks * x) % 1.0))
    a = np.zeros(L - m_lo + 1, dtype=np.complex128)
    pos = P.ks >= 0
    np.add.at(a, P.ks[pos] - m_lo, t[pos])
    neg = ~pos
    np.add.at(a, -P.ks[neg] - m_lo, t[neg])
    return m_lo, a


def partial_sum_profile(P, x, checkpoints):
    """S_n P(x) for each n in ``checkpoints`` (strictly increasing, >= 0).

    One pass over the coefficient window, so the cost does not depend on
    how many checkpoints are requested.
    """
    cps = np.asarray(checkpoints, dtype=np.int64)
    if cps.size == 0 or cps[0] < 0 or np.any(np.diff(cps) <= 0):
        raise ValueError("checkpoints must be nonempty, nonnegative and strictly increasing")
    m_lo, a = _terms_by_order(P, float(x) % 1.0)
    run = np.cumsum(a)
    out = np.zeros(cps.size, dtype=np.complex128)
    hit = cps >= m_lo
    out[hit] = run[np.minimum(cps[hit] - m_lo, run.size - 1)]
    return out


def partial_sum_all(P, x, N):
    """S_n P(x) for n = 0..N (used by the divergence profiles)."""
    return partial_sum_profile(P, x, np.arange(N + 1))


def _grid_from_window(coeffs, k0, M):
    width = coeffs.shape[0]
    if width > M:
        raise AliasingError(f"window of width {width} does not fit on a grid of {M} points")
    buf = np.zeros(M, dtype=np.complex128)
    idx = (k0 + np.arange(width)) % M
    buf[idx] = coeffs
    return np.fft.ifft(buf) * M


def partial_sum_grid(P, M, n):
    """S_n P sampled at m/M via one inverse FFT."""
    if not is_power_of_two(M):
        raise ValueError(f"M = {M} must be a power of two")
    lo, hi = max(P.kmin, -n), min(P.kmax, n)
    if lo > hi:
        return SampledFunction(M, np.zeros(M), f"S_{n}{P.label}")
    c = P.coeffs[lo - P.kmin:hi - P.kmin + 1]
    return SampledFunction(M, _grid_from_window(c, lo, M), f"S_{n}{P.label}")


def sample(P, M):
    """P itself on the M-point grid (no truncation)."""
    if not is_power_of_two(M):
        raise ValueError(f"M = {M} must be a power of two")
    return SampledFunction(M, _grid_from_window(P.coeffs, P.kmin, M), P.label)


def fejer_sum(P, n):
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = max(P.kmin, -(n - 1)), min(P.kmax, n - 1)
    if lo > hi:
        return TrigPoly.zero(f"sigma_{n}{P.label}")
    ks = np.arange(lo, hi + 1)
    w = 1.0 - np.abs(ks) / n
    return TrigPoly(lo, hi, P.coeffs[lo - P.kmin:hi - P.kmin + 1] * w, f"sigma_{n}{P.label}")


def coefficients_from_samples(f, kmin, kmax, tail_tol=1e-10, edge=None):
    """DFT coefficients of the sampled function on [kmin, kmax].

    The ``edge`` frequencies on either side of Nyquist that fall outside
    the requested window must all have modulus <= ``tail_tol``;
    otherwise the grid is too coarse and TailNotDecayed is raised.
    """
    M = f.M
    if kmax - kmin >= M:
        raise AliasingError(f"window [{kmin}, {kmax}] needs more than {M} samples")
    c = np.fft.fft(f.samples) / M
    if edge is None:
        edge = max(1, M // 16)
    band = np.arange(M // 2 - edge + 1, M // 2 + edge + 1)
    band = band[(band < kmin) | (band > kmax)]
    # the band is symmetric around +-M/2; also test its negative aliases
    band = np.concatenate([band, band - M])
    band = band[(band < kmin) | (band > kmax)]
    if band.size:
        tail = float(np.abs(c[band % M]).max())
        if tail > tail_tol:
            raise TailNotDecayed(f"edge coefficients reach {tail:.3e} > {tail_tol:.1e} at M = {M}")
    ks = np.arange(kmin, kmax + 1)
    return TrigPoly(kmin, kmax, c[ks % M], f.label)


def lp_norm(P, p, M):
    """Trapezoid estimate of ||P||_p on M equispaced points."""
    if not is_power_of_two(M):
        raise ValueError(f"M = {M} must be a power of two")
    if M < 4 * P.width:
        raise AliasingError(f"M = {M} < 4 * width = {4 * P.width}")
    v = np.abs(sample(P, M).samples)
    if np.isinf(p):
        return float(v.max())
    return float(np.mean(v ** p) ** (1.0 / p))


def certified_lp_norm(P, p, tol=1e-6, M=None, max_M=1 << 24):
    """Double M until successive ||P||_p estimates agree to ``tol``.

    Returns (value, M, last_difference).
    """
    M = M or next_power_of_two(4 * P.width)
    prev = lp_norm(P, p, M)
    while True:
        M *= 2
        cur = lp_norm(P, p, M)
        diff = abs(cur - prev)
        if diff <= tol or M >= max_M:
            return cur, M, diff
        prev = cur


def sup_norm_grid(P, M=None):
    """Grid sup of |P| on an aliasing-safe grid (default 8x oversampled)."""
    M = M or next_power_of_two(8 * P.width)
    return float(np.abs(sample(P, M).samples).max())


def _dirichlet_panels(n, nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.arange(2 * n + 2) / (2 * n + 1)
    a, b = edges[:-1], edges[1:]
    t = 0.5 * (b - a)[:, None] * (x[None, :] + 1.0) + a[:, None]
    d = np.sin((2 * n + 1) * np.pi * t) / np.sin(np.pi * t)
    # D_n has one sign on each panel, so |D_n| is smooth there
    return float(np.sum(np.abs(d @ w) * 0.5 * (b - a)))


def dirichlet_l1_norm(n, M=8, tol=1e-6):
    """Lebesgue constant: integral of |D_n| over T.

    Gauss-Legendre with M nodes on each interval between consecutive
    zeros of D_n; M is doubled until two estimates agree to ``tol``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 1.0
    prev = _dirichlet_panels(n, M)
    while True:
        M *= 2
        cur = _dirichlet_panels(n, M)
        if abs(cur - prev) <= tol or M >= 1024:
            return cur
        prev = cur


def spectral_derivative_sup(f, refine=2):
    """Grid sup of |f'| from the trig interpolant of the samples, on the
    sample grid and on a ``refine``-times finer grid.  Returns both."""
    M = f.M
    c = np.fft.fft(f.samples) / M
    k = np.fft.fftfreq(M, d=1.0 / M)
    k[M // 2] = 0.0  # odd derivative of the Nyquist mode is ambiguous; drop it
    dc = 2j * np.pi * k * c
    coarse = float(np.abs(np.fft.ifft(dc) * M).max())
    Mf = refine * M
    buf = np.zeros(Mf, dtype=np.complex128)
    kk = k.astype(np.int64)
    buf[kk % Mf] = dc
    fine = float(np.abs(np.fft.ifft(buf) * Mf).max())
    return coarse, fine


def trig_interpolate(f, x):
    """Evaluate the trig interpolant of the samples at arbitrary points."""
    M = f.M
    c = np.fft.fft(f.samples) / M
    k = np.fft.fftfreq(M, d=1.0 / M).astype(np.int64)
    order = np.argsort(k)
    c, k = c[order], k[order]
    # split the Nyquist mode symmetrically so real data stays real
    c = np.concatenate([c, [0.5 * c[0]]])
    c[0] *= 0.5
    P = TrigPoly(int(k[0]), int(-k[0]), c)
    return P(x)
