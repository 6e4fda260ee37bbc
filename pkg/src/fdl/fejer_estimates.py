"""Quantitative Fejér localization: |sigma_n theta(x)| when theta(x) = 0.

Two bounds are checked for a real Lipschitz theta with ||theta'|| <= n:

* EQ1 (n >= 8): |sigma_n theta(x)| <= 1/4 + ||theta||/2
* EQ2 (n >= 4): |sigma_n theta(x)| <= 4 + ||theta||/4
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import HypothesisViolated
from .trigcore import (
    SampledFunction,
    TrigPoly,
    fejer_sum,
    next_power_of_two,
    sample,
    spectral_derivative_sup,
    trig_interpolate,
)

HOLDS_SLACK = 1e-12
FORMS = {"EQ1": (1.0, 8), "EQ2": (2.0, 4)}


@dataclass(frozen=True)
class FejerBoundReport:
    n: int
    delta: float
    u_n: float
    bound_form: str
    lhs: float
    rhs: float
    x: float = 0.0

    @property
    def holds(self):
        return self.lhs <= self.rhs + HOLDS_SLACK


def fejer_tail_u(n, delta):
    """2 * int_0^{delta/n} (sin(n pi y)/sin(pi y))^2 y dy."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < delta <= 2:
        raise ValueError("delta must lie in (0, 2]")

    def integrand(y):
        if y == 0.0:
            return 0.0
        r = math.sin(n * math.pi * y) / math.sin(math.pi * y)
        return r * r * y

    b = delta / n
    # interior zeros of sin(n pi y) at multiples of 1/n
    pts = [m / n for m in range(1, int(math.floor(delta)) + 1) if m / n < b]
    val, _ = quad(integrand, 0.0, b, points=pts or None, epsabs=1e-12, epsrel=1e-12, limit=200)
    return 2.0 * val


def _rhs(form, sup):
    if form == "EQ1":
        return 0.25 + 0.5 * sup
    return 4.0 + 0.25 * sup


def check_fejer_localization(theta, n, x, form="EQ1", lipschitz=None):
    """Evaluate one instance of the localization lemma.

    ``theta`` is a real SampledFunction.  Its Lipschitz constant is
    measured by spectral differentiation (grid and 2x refined) unless
    the caller supplies a certified ``lipschitz`` bound, which is then
    cross-checked against the sampled divided differences.

    Raises HypothesisViolated when the lemma does not apply.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {sorted(FORMS)}")
    delta, n_min = FORMS[form]
    if n < n_min:
        raise HypothesisViolated(f"{form} needs n >= {n_min}, got n = {n}")
    if n - 1 >= theta.M // 2:
        raise HypothesisViolated(f"M = {theta.M} cannot resolve sigma_{n}")
    s = theta.samples
    sup = float(np.abs(s.real).max())
    if np.abs(s.imag).max() > 1e-9 * max(1.0, sup):
        raise HypothesisViolated("theta is not real-valued")

    x = float(x) % 1.0
    m = x * theta.M
    if m == round(m):
        tx = s[int(round(m)) % theta.M].real
    else:
        tx = float(np.real(trig_interpolate(theta, np.array([x]))[0]))
    if abs(tx) > 1e-9:
        raise HypothesisViolated(f"theta(x) = {tx:.3e} is not 0")

    if lipschitz is None:
        coarse, fine = spectral_derivative_sup(theta)
        lip = max(coarse, fine)
    else:
        lip = float(lipschitz)
        dd = float(np.abs(np.diff(np.append(s.real, s.real[0]))).max()) * theta.M
        if dd > lip * (1 + 1e-9):
            raise HypothesisViolated(f"sampled slope {dd:.6g} exceeds the stated bound {lip:.6g}")
    if lip > n * (1 + 1e-12):
        raise HypothesisViolated(f"||theta'|| = {lip:.6g} > n = {n}")

    M = theta.M
    c = np.fft.fft(s.real) / M
    ks = np.arange(-(n - 1), n)
    P = TrigPoly(-(n - 1), n - 1, c[ks % M])
    lhs = abs(fejer_sum(P, n)(x))
    return FejerBoundReport(n, delta, fejer_tail_u(n, delta), form, float(lhs), _rhs(form, sup), x)


def random_admissible_theta(rng, n, x=None, M=None, degree=None):
    """A random real trig polynomial with grid sup |theta'| <= n and theta(x) = 0.

    Returns (theta, x).
    """
    degree = degree or int(rng.integers(1, max(2, n // 2) + 1))
    M = M or next_power_of_two(8 * max(n, degree))
    x = float(rng.random()) if x is None else float(x)
    # decaying random coefficients, conjugate-symmetric so theta is real
    k = np.arange(1, degree + 1)
    a = (rng.standard_normal(degree) + 1j * rng.standard_normal(degree)) / k ** rng.uniform(0.0, 2.0)
    c = np.zeros(2 * degree + 1, dtype=np.complex128)
    c[degree + 1:] = a
    c[:degree] = np.conj(a[::-1])
    P = TrigPoly(-degree, degree, c)
    # the checker also looks at a 2x refined grid
    lip = float(np.abs(sample(P.derivative(), 2 * M).samples).max())
    scale = n * rng.uniform(0.05, 1.0) / lip
    P = scale * P
    P = P - TrigPoly.monomial(0, P(x).real)
    return SampledFunction(M, sample(P, M).samples.real, "theta"), x


def chi_theta(J, j, M=None):
    """theta = 1 - chi_{J,j} sampled from the piecewise-linear formula."""
    from .lp_saturator import chi_values

    M = M or 2 ** (j + 10)
    t = np.arange(M) / M
    return SampledFunction(M, 1.0 - chi_values(J, j, t), f"1-chi_{{{J},{j}}}")


def falsification_sweep(rng, trials, ns=(8, 16, 32, 64, 128, 256), forms=("EQ1", "EQ2")):
    """Random admissible theta across n; returns all reports."""
    out = []
    for _ in range(trials):
        n = int(rng.choice(ns))
        theta, x = random_admissible_theta(rng, n)
        for form in forms:
            out.append(check_fejer_localization(theta, n, x, form))
    return out
