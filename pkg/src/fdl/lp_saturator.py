"""Block polynomials g_{J,j}, g_j and the truncated L^p saturating function."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import interval_family_IJj
from .errors import GenerationTooLarge, PointOutsideFamily
from .trigcore import TrigPoly, fejer_sum, modulate, partial_sum_profile
from . import _accel

GJ_CAP = 16
SATURATING_CAP = 14


@dataclass(frozen=True)
class LpBlockSpec:
    p: float
    j: int
    J: int

    def __post_init__(self):
        if not 1 < self.p < np.inf:
            raise ValueError("p must lie in (1, inf)")
        if not 1 <= self.J <= self.j:
            raise ValueError("need 1 <= J <= j")

    @property
    def c(self):
        """c_{J,j} = (1/j) 2^{-(J-j+1)/p}."""
        return 2.0 ** (-(self.J - self.j + 1) / self.p) / self.j

    @property
    def n(self):
        return (2 * self.J - 1) * 2 ** self.j - (2 ** self.j - 1)

    @property
    def m(self):
        return (2 * self.J - 1) * 2 ** self.j + (2 ** self.j - 1)


@dataclass(frozen=True)
class JumpWitness:
    x: float
    J: int
    j: int
    n1: int
    n2: int
    gap: float
    bound: float

    @property
    def holds(self):
        return self.gap >= self.bound - 1e-12


def trapezoid_hat(k, plateau, support):
    """Fourier coefficients of the centred trapezoid equal to 1 on
    [-plateau, plateau], 0 outside [-support, support], linear between."""
    k = np.asarray(k, dtype=np.float64)
    return (plateau + support) * np.sinc((plateau + support) * k) * np.sinc((support - plateau) * k)


def build_chi(J, j):
    """Coefficients of chi_{J,j} on |k| <= 2^j, in closed form."""
    if not 1 <= J <= j:
        raise ValueError(f"need 1 <= J <= j, got J={J}, j={j}")
    W = 2 ** j
    if J == j:
        c = np.zeros(2 * W + 1)
        c[W] = 1.0
        return TrigPoly(-W, W, c, f"chi_{{{J},{j}}}")
    k = np.arange(-W, W + 1)
    hat = trapezoid_hat(k, 2.0 ** (-j), 2.0 ** (1 - j))
    # sum over odd K of e^{-2 pi i k K / 2^J} = 2^J [2^J | k] - 2^{J-1} [2^{J-1} | k]
    phase = (2 ** J) * (k % 2 ** J == 0) - (2 ** (J - 1)) * (k % 2 ** (J - 1) == 0)
    return TrigPoly(-W, W, hat * phase, f"chi_{{{J},{j}}}")


def chi_values(J, j, t):
    """Pointwise values of chi_{J,j} (the piecewise-linear function itself)."""
    t = np.asarray(t, dtype=np.float64) % 1.0
    if J == j:
        return np.ones_like(t)
    c = np.arange(1, 2 ** J, 2) / 2.0 ** J
    d = np.abs(t[..., None] - c)
    d = np.minimum(d, 1.0 - d).min(axis=-1)
    a, b = 2.0 ** (-j), 2.0 ** (1 - j)
    return np.clip((b - d) / (b - a), 0.0, 1.0)


def build_block(J, j):
    """g_{J,j} = e_{(2J-1) 2^j} sigma_{2^j} chi_{J,j} (unscaled)."""
    g = modulate(fejer_sum(build_chi(J, j), 2 ** j), (2 * J - 1) * 2 ** j)
    return g.with_label(f"g_{{{J},{j}}}")


def build_gj(j, p, cap=GJ_CAP):
    """g_j = sum_J c_{J,j} g_{J,j}, spectrum inside [1, j 2^{j+1})."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if j > cap:
        raise GenerationTooLarge(f"j = {j} > cap {cap}")
    top = j * 2 ** (j + 1) - 1
    c = np.zeros(top + 1, dtype=np.complex128)
    for J in range(1, j + 1):
        spec = LpBlockSpec(p, j, J)
        b = build_block(J, j)
        c[b.kmin:b.kmax + 1] += spec.c * b.coeffs
    return TrigPoly(0, top, c, f"g_{j}[p={p:g}]")


def saturating_offset(j):
    return j * 2 ** (j + 1)


def build_saturating_lp(p, jmax, cap=SATURATING_CAP):
    """Truncation at jmax of g = sum_j j^{-2} e_{j 2^{j+1}} g_j."""
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    if jmax > cap:
        raise GenerationTooLarge(f"jmax = {jmax} > cap {cap}")
    top = jmax * 2 ** (jmax + 2) - 1
    c = np.zeros(top + 1, dtype=np.complex128)
    for j in range(1, jmax + 1):
        gj = build_gj(j, p)
        off = saturating_offset(j)
        # block occupies [j 2^{j+1}, j 2^{j+2})
        c[off + gj.kmin:off + gj.kmax + 1] += gj.coeffs / j ** 2
    return TrigPoly(0, top, c, f"g_sat[p={p:g},jmax={jmax}]")


def residual_block(f_j, j, p):
    """h_j = f_j + (1/j) e_{j 2^{j+1}} g_j for a caller-supplied f_j."""
    return f_j + (1.0 / j) * modulate(build_gj(j, p), saturating_offset(j))


def jump_bound(J, j, p, shifted=False):
    b = 2.0 ** (-(J - j + 1) / p) / (4 * j)
    return b / j ** 2 if shifted else b


def jump_indices(J, j, shifted=False):
    spec_n = (2 * J - 1) * 2 ** j - (2 ** j - 1)
    spec_m = (2 * J - 1) * 2 ** j + (2 ** j - 1)
    off = saturating_offset(j) if shifted else 0
    return spec_n - 1 + off, spec_m + off


def witness_jump(poly, x, J, j, p, shifted=False):
    """|S_{n2} - S_{n1}| at x for n1 = n_{J,j} - 1, n2 = m_{J,j}."""
    if j < 3:
        raise ValueError("the jump lemma is checked for j >= 3")
    if not interval_family_IJj(J, j).contains(x)[0]:
        raise PointOutsideFamily(f"x = {x!r} is not in I_{{{J},{j}}}")
    n1, n2 = jump_indices(J, j, shifted)
    s1, s2 = partial_sum_profile(poly, x, [n1, n2])
    return JumpWitness(float(x), J, j, n1, n2, float(abs(s2 - s1)), jump_bound(J, j, p, shifted))


def witness_jumps_batch(poly, xs, J, j, p, shifted=False):
    """Vectorised witness_jump over many points of I_{J,j}.

    The gap S_{n2} - S_{n1} is the coefficient slice (n1, n2] summed at x.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    inside = interval_family_IJj(J, j).contains(xs)
    if not inside.all():
        raise PointOutsideFamily(f"{int((~inside).sum())} points are outside I_{{{J},{j}}}")
    n1, n2 = jump_indices(J, j, shifted)
    lo, hi = n1 + 1, n2
    seg = poly.window(lo, hi)
    neg = poly.window(-hi, -lo)
    gaps = np.abs(_accel.window_eval(seg.coeffs, lo, xs) + _accel.window_eval(neg.coeffs, -hi, xs))
    bound = jump_bound(J, j, p, shifted)
    return [JumpWitness(float(x), J, j, n1, n2, float(g), bound) for x, g in zip(xs, gaps)]
