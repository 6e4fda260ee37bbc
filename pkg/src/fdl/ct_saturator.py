"""Bounded polynomials with large partial sums on arcs (Kahane-Katznelson).

For k >= 2 and 0 < beta < 1 put eps = 1/(k exp((log k)^beta)) and

    f(z) = (1/k) sum_j (1+eps) / (1+eps - conj(z_j) z),   z_j = e^{2 pi i j/k}.

Summing the geometric series gives f(z) = 1/(1 - (z/(1+eps))^k), so on the
circle g = log f = -log(1 - r e_k) with r = (1+eps)^{-k}.  The polynomial

    P = (2/pi) e_n sigma_n(Im g)

has sup norm at most 1 while |S_n P| = |sigma_n g|/pi is about
(log k)^beta/pi on the k arcs of radius eps/2 around the z_j.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dyadic import ikbeta_epsilon, ikbeta_family
from .errors import GenerationTooLarge, LogBranchError, TailNotDecayed
from .trigcore import (
    SampledFunction,
    TrigPoly,
    coefficients_from_samples,
    fejer_sum,
    modulate,
    next_power_of_two,
    partial_sum_grid,
    sample,
    spectral_derivative_sup,
    sup_norm_grid,
)

CT_SATURATING_CAP = 6
MAX_GRID = 1 << 24
ONE_SIDED_TOL = 1e-14
MEAN_TOL = 1e-8


@dataclass(frozen=True)
class CtBlockSpec:
    beta: float
    delta: float
    k: int
    n: int | None = None

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 < self.delta < 1 / 3:
            raise ValueError("delta must lie in (0, 1/3)")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.n is not None and self.n < 4:
            raise ValueError("n must be >= 4")

    @property
    def epsilon(self):
        return ikbeta_epsilon(self.k, self.beta)

    def to_dict(self):
        return {"beta": self.beta, "delta": self.delta, "k": self.k, "n": self.n, "epsilon": self.epsilon}


@dataclass(frozen=True)
class CtBlock:
    spec: CtBlockSpec
    g_samples: SampledFunction | None = None
    g_coeffs: TrigPoly | None = None
    P: TrigPoly | None = None
    report: dict = field(default_factory=dict)

    @property
    def M(self):
        return self.g_samples.M if self.g_samples is not None else None


def _epsilon(k, beta):
    # k = 1 gives eps = 1; only used to test the single-term formula
    return 1.0 / (k * math.exp(math.log(k) ** beta)) if k > 1 else 1.0


def _radius(k, eps):
    """r = (1+eps)^{-k}, the modulus of (z/(1+eps))^k on the circle."""
    return math.exp(-k * math.log1p(eps))


def _f_samples(k, eps, M):
    m = np.arange(M, dtype=np.int64)
    # e_k(m/M) with an exact integer phase
    e = np.exp(2j * np.pi * (((k * m) % M) / M))
    return 1.0 / (1.0 - _radius(k, eps) * e)


@dataclass(frozen=True)
class FReport:
    """Measured constants for the four properties of f."""

    k: int
    beta: float
    epsilon: float
    M: int
    min_re_f: float
    min_abs_f: float
    max_abs_f: float
    min_re_f_arcs: float | None
    min_abs_f_arcs: float | None
    max_abs_f_arcs: float | None
    max_log_derivative: float

    @property
    def C1(self):
        """min Re f / eps."""
        return self.min_re_f / self.epsilon

    @property
    def C2(self):
        """min over the arcs of Re f, divided by exp((log k)^beta)."""
        if self.min_re_f_arcs is None:
            return None
        return self.min_re_f_arcs / math.exp(math.log(self.k) ** self.beta)

    @property
    def C3(self):
        return self.max_abs_f / math.exp(math.log(self.k) ** self.beta) if self.k > 1 else None

    @property
    def C4(self):
        """sup |f'/f| * eps^3."""
        return self.max_log_derivative * self.epsilon ** 3


def _arc_indices(k, eps, M):
    """Grid indices lying in the closed arcs |x - j/k| <= eps/2, as a (k, w) array."""
    R = int(math.floor(eps / 2 * M))
    centers = (np.arange(k, dtype=np.int64) * M) // k
    return (centers[:, None] + np.arange(-R, R + 1)[None, :]) % M


def eval_kk_f(k, beta, M=None):
    """Sample f on the M-point grid and measure its constants.

    Returns (SampledFunction, FReport).  k = 1 (eps = 1) is accepted so
    the single-term formula can be checked by hand.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    M = M or next_power_of_two(64 * k)
    if M < 64 * k or M & (M - 1):
        raise ValueError(f"M must be a power of two >= 64k = {64 * k}")
    eps = _epsilon(k, beta)
    f = _f_samples(k, eps, M)
    a = np.abs(f)
    r = _radius(k, eps)
    # f'/f in z: k z^{k-1} w / (1 - w) with w = (z/(1+eps))^k; |z| = 1
    w = r * np.exp(2j * np.pi * (((k * np.arange(M, dtype=np.int64)) % M) / M))
    logder = float(np.abs(k * w / (1.0 - w)).max())
    arcs = None
    if k >= 2:
        idx = _arc_indices(k, eps, M)
        arcs = (float(f.real[idx].min()), float(a[idx].min()), float(a[idx].max()))
    rep = FReport(
        k, float(beta), eps, M,
        float(f.real.min()), float(a.min()), float(a.max()),
        *(arcs or (None, None, None)),
        logder,
    )
    return SampledFunction(M, f, f"f[k={k},beta={beta:g}]"), rep


def build_g(k, beta, M=None, tail_tol=1e-10, delta=0.3):
    """g = log f on the circle with certified one-sided coefficients.

    The grid doubles from max(64k, M) until the DFT edge band falls
    below ``tail_tol``.  Coefficients are kept on [0, 3M/8].
    """
    spec = CtBlockSpec(beta, delta, k)
    M = max(M or 0, next_power_of_two(64 * k))
    eps = spec.epsilon
    while True:
        f = _f_samples(k, eps, M)
        if f.real.min() <= 0:
            raise LogBranchError(f"Re f = {f.real.min():.3e} <= 0 at k = {k}")
        gs = SampledFunction(M, np.log(f), f"g[k={k},beta={beta:g}]")
        del f
        W = 3 * M // 8
        try:
            c = coefficients_from_samples(gs, -W, W, tail_tol=tail_tol)
            break
        except TailNotDecayed:
            if 2 * M > MAX_GRID:
                raise
            M *= 2
    neg = c.window(-W, -1).coeffs
    pos = c.window(1, W).coeffs
    total = float(np.sum(np.abs(c.coeffs) ** 2))
    ratio = float(np.sum(np.abs(neg) ** 2)) / total if total > 0 else 0.0
    g0 = complex(c.coeff(0))
    if ratio > ONE_SIDED_TOL or abs(g0) > MEAN_TOL:
        raise TailNotDecayed(f"g is not one-sided at M = {M}: ratio {ratio:.2e}, |g(0)| {abs(g0):.2e}")
    g_coeffs = TrigPoly(0, W, np.concatenate([[g0], pos]), gs.label)

    v = gs.samples
    absg = np.abs(v)
    idx = _arc_indices(k, eps, M)
    L = math.log(k) ** beta
    report = {
        "M": M,
        "neg_energy_ratio": ratio,
        "g_hat_0": abs(g0),
        "sup_abs_im_g": float(np.abs(v.imag).max()),
        "sup_abs_g": float(absg.max()),
        "min_abs_g_arcs": float(absg[idx].min()),
        "log_k_beta": L,
        # |g| >= (log k)^beta - C on the arcs and |g| <= (log k)^beta + C' on T
        "C_lower": L - float(absg[idx].min()),
        "C_upper": float(absg.max()) - L,
    }
    return CtBlock(spec, gs, g_coeffs, None, report)


def coupling_ratios(k, beta, n, sup_dg=None):
    """Measured constants relating n to k.

    ``C_cubic`` = n / (k^3 exp(3 (log k)^beta)) is the ratio to the crude
    a-priori bound; ``C_linear`` = n eps = n / (k exp((log k)^beta)) is
    the ratio to the true growth of sup |g'| (which is 2 pi k r/(1-r)).
    """
    L = math.log(k) ** beta
    out = {
        "C_cubic": n / (k ** 3 * math.exp(3 * L)),
        "C_linear": n / (k * math.exp(L)),
        "loglog_gap": math.log(math.log(n)) - math.log(math.log(k)),
    }
    if sup_dg is not None:
        # surrogate sup |g'| eps^3 (decays with k, so only boundedness is meaningful)
        out["P4_surrogate"] = sup_dg * _epsilon(k, beta) ** 3
    return out


def resolve_n(block, rel_agreement=0.01):
    """Smallest integer n >= 4 with n >= sup |g'| (measured spectrally).

    The sup is taken on the sample grid and on a 2x refined grid; the
    two must agree to ``rel_agreement``.
    """
    coarse, fine = spectral_derivative_sup(block.g_samples, refine=2)
    top = max(coarse, fine)
    if top > 0 and abs(fine - coarse) > rel_agreement * top:
        raise TailNotDecayed(f"sup|g'| not resolved: {coarse:.6g} vs {fine:.6g} on the refined grid")
    return max(4, int(math.ceil(top)))


def build_P(k, beta, delta, n=None, M=None, identity_points=4096):
    """Complete block: g, n, P and the measured invariants.

    ``n`` may be raised above the resolved value (the bound only needs
    n >= sup |g'|), which the composite function uses for spacing.
    """
    block = build_g(k, beta, M=M, delta=delta)
    n_res = resolve_n(block)
    nn = max(n_res, n or 0)
    need = 8 * next_power_of_two(nn)
    if block.M < need:
        block = build_g(k, beta, M=need, delta=delta)
    gc = block.g_coeffs
    if nn - 1 > gc.kmax:
        raise GenerationTooLarge(f"n = {nn} exceeds the certified window {gc.kmax}")

    # one-sided g: (Im g)^(m) = g(m)/(2i) for m >= 1 and -conj(g(-m))/(2i) for m <= -1
    gpos = gc.coeffs[1:nn]
    c = np.zeros(2 * nn - 1, dtype=np.complex128)
    c[nn:] = gpos / 2j
    c[:nn - 1] = (-np.conj(gpos) / 2j)[::-1]
    img = TrigPoly(-(nn - 1), nn - 1, c, "Im g")
    sig = fejer_sum(img, nn)
    P = (2.0 / np.pi) * modulate(sig, nn)
    P = P.with_label(f"P[k={k},beta={beta:g},n={nn}]")

    sup_im = float(np.abs(block.g_samples.samples.imag).max())
    sup_sig = sup_norm_grid(sig)
    sup_P = sup_norm_grid(P)
    ident = identity_error(P, gc, nn, identity_points)
    sup_dg = max(spectral_derivative_sup(block.g_samples))
    report = dict(block.report)
    report.update(
        n_resolved=n_res,
        n=nn,
        sup_sigma_im_g=sup_sig,
        sup_P=sup_P,
        identity_rel_error=ident,
        sup_dg=sup_dg,
        **coupling_ratios(k, beta, nn, sup_dg),
    )
    spec = CtBlockSpec(beta, delta, k, nn)
    return CtBlock(spec, block.g_samples, gc, P, report)


def identity_error(P, g_coeffs, n, points=4096):
    """max | |S_n P| - |sigma_n g|/pi | / (|sigma_n g|/pi) over ``points`` grid points."""
    Mi = max(points, next_power_of_two(2 * n + 1))
    lhs = np.abs(partial_sum_grid(P, Mi, n).samples)
    rhs = np.abs(sample(fejer_sum(g_coeffs.window(0, n - 1), n), Mi).samples) / np.pi
    step = Mi // points
    lhs, rhs = lhs[::step], rhs[::step]
    return float(np.max(np.abs(lhs - rhs) / rhs))


@dataclass(frozen=True)
class CtBoundReport:
    k: int
    beta: float
    delta: float
    n: int
    M: int
    points_per_arc: int
    min_ratio: float
    target: float
    C_meas: float
    center_is_max: float
    rows: np.ndarray  # (k, 4): arc, x, |S_nP|, threshold

    @property
    def flag(self):
        return bool(self.min_ratio >= self.target)

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["arc", "x", "abs_SnP", "threshold", "holds"])
        for a, x, v, t in self.rows:
            w.writerow([int(a), f"{x:.17g}", f"{v:.17g}", f"{t:.17g}", int(v >= t)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def summary(self):
        return {
            "k": self.k, "beta": self.beta, "delta": self.delta, "n": self.n, "M": self.M,
            "points_per_arc": self.points_per_arc, "min_ratio": self.min_ratio,
            "target": self.target, "flag": self.flag, "C_meas": self.C_meas,
            "center_is_max": self.center_is_max,
        }


def verify_ct_bound(block, points_per_arc=16):
    """Check log|S_n P(x)| >= (1 - delta) beta log log n on the arcs of I_k^beta.

    Every arc gets at least ``points_per_arc`` grid points; one row per
    arc records its worst point.
    """
    s = block.spec
    k, n, eps = s.k, s.n, s.epsilon
    M = max(next_power_of_two(int(math.ceil(2 * points_per_arc / eps))), next_power_of_two(n + 1))
    S = np.abs(partial_sum_grid(block.P, M, n).samples)
    idx = _arc_indices(k, eps, M)
    vals = S[idx]
    worst = vals.argmin(axis=1)
    wv = vals[np.arange(k), worst]
    xs = idx[np.arange(k), worst] / M
    ll = math.log(math.log(n))
    thr = math.exp((1 - s.delta) * s.beta * ll)
    with np.errstate(divide="ignore"):
        ratios = np.log(wv) / ll
    R = idx.shape[1] // 2
    center_is_max = float(np.mean(vals.argmax(axis=1) == R))
    C_meas = float(np.max(s.beta * math.log(math.log(k)) - np.log(wv)))
    rows = np.column_stack([np.arange(k), xs, wv, np.full(k, thr)])
    return CtBoundReport(k, s.beta, s.delta, n, M, idx.shape[1], float(ratios.min()),
                         (1 - s.delta) * s.beta, C_meas, center_is_max, rows)


def search_k(beta, delta, k_min, k_max):
    """Smallest power of two k in [k_min, k_max] whose block passes the
    bound check.  Returns (block, report, found); when nothing passes the
    k_max block is returned with found = False."""
    k = next_power_of_two(max(2, k_min))
    while True:
        blk = build_P(k, beta, delta)
        rep = verify_ct_bound(blk)
        if rep.flag or 2 * k > k_max:
            return blk, rep, rep.flag
        k *= 2


def save_block(block, path, bound=None):
    doc = {"spec": block.spec.to_dict(), "report": block.report, "P": block.P.to_dict()}
    if bound is not None:
        doc["bound"] = bound.summary()
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_block(path):
    doc = json.loads(Path(path).read_text())
    s = doc["spec"]
    spec = CtBlockSpec(s["beta"], s["delta"], s["k"], s["n"])
    return CtBlock(spec, None, None, TrigPoly.from_json_dict(doc["P"]), doc.get("report", {}))


@dataclass(frozen=True)
class CtPlacement:
    j: int
    l: int
    beta: float
    delta: float
    k: int
    n: int
    weight: float  # eps_l / j^2

    @property
    def span(self):
        """Spectrum of e_n P_{j,l}: [n+1, 3n-1]."""
        return self.n + 1, 3 * self.n - 1


def build_saturating_ct(betas, deltas=None, epsilons=None, jmax=3, k_min=16,
                        cap=CT_SATURATING_CAP, with_layout=False):
    """g = sum_{j <= jmax} j^{-2} sum_{l <= j} eps_l e_{n_{j,l}} P_{j,l}.

    Generation j uses k = k_min 2^{j-1}.  Each n_{j,l} is at least the
    block's resolved n and at least 3 n of the previous block (plus one),
    so the spectra [n+1, 3n-1] are pairwise disjoint.  Only the first
    len(betas) indices l are used in each generation.
    """
    betas = [float(b) for b in betas]
    if len(set(betas)) != len(betas):
        raise ValueError("betas must be pairwise distinct")
    L = len(betas)
    deltas = [0.3] * L if deltas is None else [float(d) for d in deltas]
    epsilons = [2.0 ** -(l + 1) for l in range(L)] if epsilons is None else [float(e) for e in epsilons]
    if len(deltas) != L or len(epsilons) != L:
        raise ValueError("betas, deltas and epsilons must have the same length")
    if sum(epsilons) > 1 + 1e-12 or min(epsilons) <= 0:
        raise ValueError("epsilons must be positive with sum <= 1")
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    if jmax > cap:
        raise GenerationTooLarge(f"jmax = {jmax} > cap {cap}")

    parts, layout = [], []
    n_prev = 0
    for j in range(1, jmax + 1):
        k = k_min * 2 ** (j - 1)
        for l in range(min(j, L)):
            blk = build_P(k, betas[l], deltas[l], n=3 * n_prev + 1 if n_prev else None)
            n = blk.spec.n
            w = epsilons[l] / j ** 2
            parts.append((n, w * blk.P))
            layout.append(CtPlacement(j, l + 1, betas[l], deltas[l], k, n, w))
            n_prev = n
            del blk
    top = 3 * n_prev - 1
    c = np.zeros(top + 1, dtype=np.complex128)
    for n, P in parts:
        Q = modulate(P, n)
        c[Q.kmin:Q.kmax + 1] += Q.coeffs
    g = TrigPoly(0, top, c, f"g_ct[jmax={jmax}]")
    return (g, layout) if with_layout else g


__all__ = [
    "CtBlock", "CtBlockSpec", "CtBoundReport", "CtPlacement", "FReport",
    "build_P", "build_g", "build_saturating_ct", "coupling_ratios", "eval_kk_f",
    "identity_error", "load_block", "resolve_n", "save_block", "search_k", "verify_ct_bound",
]
