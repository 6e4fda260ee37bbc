"""Dyadic rationals, arc families on the circle, and dyadic exponents."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DepthOverflow, ExactDyadic

# exponents beyond this cannot be carried by a double (subnormal floor)
MAX_EXACT_BITS = 1074


@dataclass(frozen=True)
class DyadicRational:
    """K / 2^J in lowest terms with K odd and 0 <= K < 2^J."""

    K: int
    J: int

    def __post_init__(self):
        if self.J < 1 or self.K % 2 == 0 or not 0 <= self.K < 2 ** self.J:
            raise ValueError(f"{self.K}/2^{self.J} is not canonical")

    @classmethod
    def reduce(cls, k, j):
        """Canonical form of k/2^j (mod 1); None for integers."""
        k %= 2 ** j
        if k == 0:
            return None
        while k % 2 == 0:
            k //= 2
            j -= 1
        return cls(k, j)

    @property
    def value(self):
        return Fraction(self.K, 2 ** self.J)

    def __float__(self):
        return self.K / 2.0 ** self.J


@dataclass(frozen=True)
class IntervalFamily:
    """Closed arcs [c - r, c + r] on T with centers in [0, 1)."""

    centers: np.ndarray
    radii: np.ndarray
    label: str = ""

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.centers, dtype=np.float64)) % 1.0
        r = np.broadcast_to(np.asarray(self.radii, dtype=np.float64), c.shape).copy()
        if np.any(r <= 0):
            raise ValueError("radii must be positive")
        c.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)

    def __len__(self):
        return self.centers.shape[0]

    def measure(self):
        """Sum of arc lengths (the Lebesgue measure when arcs are disjoint)."""
        return float(np.minimum(2 * self.radii, 1.0).sum())

    def union_measure(self):
        """Lebesgue measure of the union, exact on dyadic data."""
        return float(sum(b - a for a, b in _merged(self)))

    def pairwise_disjoint(self, strict=False):
        """True when no two arcs share interior points (touching endpoints
        count as disjoint unless ``strict``)."""
        if len(self) <= 1:
            return bool(np.all(2 * self.radii < 1))
        order = np.argsort(self.centers, kind="stable")
        c = [Fraction(float(v)) for v in self.centers[order]]
        r = [Fraction(float(v)) for v in self.radii[order]]
        for i in range(len(c)):
            j = (i + 1) % len(c)
            gap = (c[j] - c[i]) % 1
            if j == 0 and gap == 0:
                gap = Fraction(1)
            if strict and gap <= r[i] + r[j]:
                return False
            if not strict and gap < r[i] + r[j]:
                return False
        return True

    def contains(self, x):
        """Membership of each x in the closed union (vectorised)."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64)) % 1.0
        d = np.abs(x[:, None] - self.centers[None, :])
        d = np.minimum(d, 1.0 - d)
        return np.any(d <= self.radii[None, :] * (1 + 1e-12), axis=1)

    def sample_points(self, per_arc):
        """``per_arc`` equispaced points across each closed arc."""
        s = np.linspace(-1.0, 1.0, per_arc)
        return (self.centers[:, None] + self.radii[:, None] * s[None, :]) % 1.0

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["center", "radius"])
        for c, r in zip(self.centers, self.radii):
            w.writerow([f"{c:.16e}", f"{r:.16e}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _merged(F):
    """Union of the family as sorted disjoint intervals inside [0, 1]."""
    pieces = []
    for c, r in zip(F.centers, F.radii):
        c, r = Fraction(float(c)), Fraction(float(r))
        if 2 * r >= 1:
            return [(Fraction(0), Fraction(1))]
        a, b = c - r, c + r
        if a < 0:
            pieces += [(a + 1, Fraction(1)), (Fraction(0), b)]
        elif b > 1:
            pieces += [(a, Fraction(1)), (Fraction(0), b - 1)]
        else:
            pieces.append((a, b))
    pieces.sort()
    out = []
    for a, b in pieces:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return out


def covering_check(F):
    """True iff the closed arcs cover all of T (exact rational sweep)."""
    if len(F) == 0:
        return False
    m = _merged(F)
    return len(m) == 1 and m[0][0] == 0 and m[0][1] == 1


def odd_centers(J):
    """The points K/2^J with K odd, as floats (exact)."""
    return np.arange(1, 2 ** J, 2) / 2.0 ** J


def interval_family_IJj(J, j, primed=False):
    """Arcs of radius 2^-j (2^{1-j} when primed) at the odd K/2^J."""
    if not 1 <= J <= j:
        raise ValueError(f"need 1 <= J <= j, got J={J}, j={j}")
    r = 2.0 ** (1 - j) if primed else 2.0 ** (-j)
    name = "I'" if primed else "I"
    return IntervalFamily(odd_centers(J), r, f"{name}_{{{J},{j}}}")


def dyadic_family(j):
    """All I_{k,j} = [k/2^j - 2^-j, k/2^j + 2^-j], k = 0..2^j-1."""
    return IntervalFamily(np.arange(2 ** j) / 2.0 ** j, 2.0 ** (-j), f"I_{{*,{j}}}")


def blown_up_family(j, alpha):
    """[K/2^J - 2^{-j/alpha}, K/2^J + 2^{-j/alpha}] over odd K, J = [j/alpha] + 1."""
    J = int(math.floor(j / alpha)) + 1
    return IntervalFamily(odd_centers(J), 2.0 ** (-j / alpha), f"blowup_{{{j},{alpha}}}")


def ikbeta_epsilon(k, beta):
    return 1.0 / (k * math.exp(math.log(k) ** beta))


def ikbeta_family(k, beta):
    """k arcs at j/k of radius epsilon/2, epsilon = 1/(k exp((log k)^beta))."""
    if k < 2:
        raise ValueError("k must be >= 2")
    eps = ikbeta_epsilon(k, beta)
    return IntervalFamily(np.arange(k) / k, eps / 2, f"I_{k}^{beta}")


@dataclass(frozen=True)
class DyadicPoint:
    """x = sum_m 2^{-a_m}, carried exactly alongside its float value."""

    x: float
    exponents: tuple
    exact: Fraction
    alpha: float

    def approximants(self):
        """(K_m, a_m) with K_m / 2^{a_m} the m-th partial sum."""
        out = []
        s = Fraction(0)
        for a in self.exponents:
            s += Fraction(1, 2 ** a)
            out.append((int(s * 2 ** a), a))
        return out


def point_with_exponent(alpha, depth):
    """A point that is alpha-approximable along the digits a_m.

    a_1 = 2 and a_{m+1} = max(ceil(alpha * a_m), a_m + 1); the partial
    sums K_m/2^{a_m} sit within 2^{1 - a_{m+1}} of x.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if depth < 2:
        raise ValueError("depth must be >= 2")
    a = [2]
    for _ in range(depth - 1):
        a.append(max(math.ceil(alpha * a[-1]), a[-1] + 1))
    if a[-1] > MAX_EXACT_BITS:
        raise DepthOverflow(f"a_{depth} = {a[-1]} exceeds {MAX_EXACT_BITS} bits")
    exact = sum(Fraction(1, 2 ** m) for m in a)
    return DyadicPoint(float(exact), tuple(a), exact, float(alpha))


def nearest_dyadic_distance(x, j):
    """dist(x, (1/2^j) Z), exact for float x."""
    s = x * 2.0 ** j
    return abs(s - round(s)) / 2.0 ** j


def dyadic_exponent_estimate(x, jmax, jmin=4):
    """Finite-depth lower proxy of the dyadic exponent.

    max over jmin <= j <= jmax of log(1/dist(x, 2^-j Z)) / (j log 2),
    clamped below at 1.  Raises ExactDyadic if some distance vanishes.
    """
    if jmax < jmin:
        raise ValueError(f"jmax must be >= {jmin}")
    x = float(x) % 1.0
    best = 1.0
    for j in range(jmin, jmax + 1):
        d = nearest_dyadic_distance(x, j)
        if d == 0.0:
            raise ExactDyadic(x, j)
        best = max(best, -math.log2(d) / j)
    return best
