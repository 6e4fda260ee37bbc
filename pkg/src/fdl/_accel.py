"""Hot kernels with a numba path and a pure-numpy fallback.

The backend is picked once at import time from ``FDL_BACKEND``
(``numba`` or ``numpy``).  When unset, numba is used if it imports.
``FDL_THREADS`` caps the numba thread pool.

Both paths accumulate partial sums in the same order (increasing |k|,
one term pair per step), so they agree to roundoff and each is
bit-stable across runs.
"""

import os

import numpy as np

_requested = os.environ.get("FDL_BACKEND", "").strip().lower()

try:
    if _requested == "numpy":
        raise ImportError
    import numba
    from numba import njit, prange

    # the bundled TBB is often too old; prefer OpenMP, then the workqueue
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:
    if _requested == "numba":
        raise
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"

if HAVE_NUMBA and os.environ.get("FDL_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["FDL_THREADS"]), numba.config.NUMBA_NUM_THREADS)))

# elements per chunk for the numpy path (complex128 -> 64 MiB)
_CHUNK = 1 << 22
# re-anchor the phase recurrence every this many terms
_ANCHOR = 64

TWO_PI = 2.0 * np.pi


def twiddles(M):
    """exp(2 pi i m / M) for m = 0..M-1."""
    return np.exp(1j * TWO_PI * (np.arange(M, dtype=np.float64) / M))


# --------------------------------------------------------------------------
# direct summation at arbitrary points


def _window_eval_numpy(coeffs, k0, xs):
    K = coeffs.shape[0]
    ks = k0 + np.arange(K, dtype=np.float64)
    out = np.empty(xs.shape[0], dtype=np.complex128)
    step = max(1, _CHUNK // max(K, 1))
    for s in range(0, xs.shape[0], step):
        x = xs[s:s + step]
        ph = np.outer(x, ks) % 1.0
        out[s:s + step] = np.exp(1j * TWO_PI * ph) @ coeffs
    return out


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _window_eval_numba(coeffs, k0, xs):
        K = coeffs.shape[0]
        P = xs.shape[0]
        out = np.empty(P, dtype=np.complex128)
        for p in prange(P):
            x = xs[p]
            w = np.exp(1j * TWO_PI * x)
            acc = 0.0 + 0.0j
            z = 1.0 + 0.0j
            for i in range(K):
                if i % _ANCHOR == 0:
                    z = np.exp(1j * TWO_PI * (((k0 + i) * x) % 1.0))
                acc += coeffs[i] * z
                z *= w
            out[p] = acc
        return out


def window_eval(coeffs, k0, xs):
    """Sum_i coeffs[i] e^{2 pi i (k0+i) x} for every x in xs."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    xs = np.ascontiguousarray(np.atleast_1d(xs), dtype=np.float64)
    if HAVE_NUMBA:
        return _window_eval_numba(coeffs, np.int64(k0), xs)
    return _window_eval_numpy(coeffs, k0, xs)


# --------------------------------------------------------------------------
# running partial sums on an equispaced grid


def _profile_grid_numpy(pos, neg, tw, ms, checkpoints, q):
    M = tw.shape[0]
    N = checkpoints[-1]
    P = ms.shape[0]
    C = checkpoints.shape[0]
    runmax = np.empty((P, C))
    env = np.zeros(P)
    n = np.arange(N + 1, dtype=np.int64)
    scale = np.ones(N + 1)
    scale[1:] = np.arange(1, N + 1, dtype=np.float64) ** (-q)
    neg = neg.copy()
    neg[0] = 0.0
    step = max(1, _CHUNK // (N + 1))
    for s in range(0, P, step):
        m = ms[s:s + step]
        idx = np.outer(m, n) % M
        terms = pos[None, :] * tw[idx]
        terms += neg[None, :] * tw[(-idx) % M]
        np.cumsum(terms, axis=1, out=terms)
        mod = np.abs(terms)
        del terms
        env[s:s + step] = (mod[:, 1:] * scale[None, 1:]).max(axis=1) if N >= 1 else 0.0
        np.maximum.accumulate(mod, axis=1, out=mod)
        runmax[s:s + step] = mod[:, checkpoints]
    return runmax, env


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _profile_grid_numba(pos, neg, tw, ms, checkpoints, scale2, has_neg):
        M = tw.shape[0]
        N = checkpoints[-1]
        P = ms.shape[0]
        C = checkpoints.shape[0]
        runmax = np.empty((P, C))
        env = np.zeros(P)
        pr, pi_ = pos.real.copy(), pos.imag.copy()
        nr, ni = neg.real.copy(), neg.imag.copy()
        tr, ti = tw.real.copy(), tw.imag.copy()
        for p in prange(P):
            m = ms[p] % M
            i = 0
            ar = 0.0
            ai = 0.0
            best = 0.0
            e = 0.0
            c = 0
            for n in range(N + 1):
                ar += pr[n] * tr[i] - pi_[n] * ti[i]
                ai += pr[n] * ti[i] + pi_[n] * tr[i]
                if has_neg and n > 0:
                    # e_{-n} = conj(e_n)
                    ar += nr[n] * tr[i] + ni[n] * ti[i]
                    ai += ni[n] * tr[i] - nr[n] * ti[i]
                a2 = ar * ar + ai * ai
                if a2 > best:
                    best = a2
                r = a2 * scale2[n]
                if r > e:
                    e = r
                while c < C and checkpoints[c] == n:
                    runmax[p, c] = np.sqrt(best)
                    c += 1
                i += m
                if i >= M:
                    i -= M
            env[p] = np.sqrt(e)
        return runmax, env


def profile_grid(pos, neg, M, ms, checkpoints, q=0.5):
    """Running maxima of |S_n f| at grid points m/M.

    Parameters
    ----------
    pos, neg : complex arrays of length N+1
        ``pos[n]`` is the coefficient at n, ``neg[n]`` the one at -n
        (``neg[0]`` is ignored).
    M : int
        Grid size.
    ms : int array
        Grid indices to evaluate.
    checkpoints : int array
        Increasing n values at which the running maximum is recorded;
        the last entry is N.
    q : float
        Exponent for the envelope ``max_{1<=n<=N} |S_n f| / n**q``.

    Returns
    -------
    runmax : (len(ms), len(checkpoints)) array
    env : (len(ms),) array
    """
    pos = np.ascontiguousarray(pos, dtype=np.complex128)
    neg = np.ascontiguousarray(neg, dtype=np.complex128)
    ms = np.ascontiguousarray(ms, dtype=np.int64)
    checkpoints = np.ascontiguousarray(checkpoints, dtype=np.int64)
    tw = twiddles(M)
    if HAVE_NUMBA:
        N = int(checkpoints[-1])
        scale2 = np.zeros(N + 1)
        scale2[1:] = np.arange(1, N + 1, dtype=np.float64) ** (-2.0 * q)
        has_neg = bool(np.any(neg[1:] != 0))
        return _profile_grid_numba(pos, neg, tw, ms, checkpoints, scale2, has_neg)
    return _profile_grid_numpy(pos, neg, tw, ms, checkpoints, float(q))


def profile_grid_numpy(pos, neg, M, ms, checkpoints, q=0.5):
    """Force the numpy path (benchmarks and cross-checks)."""
    tw = twiddles(M)
    return _profile_grid_numpy(np.asarray(pos, np.complex128), np.asarray(neg, np.complex128),
                               tw, np.asarray(ms, np.int64), np.asarray(checkpoints, np.int64), float(q))


def window_eval_numpy(coeffs, k0, xs):
    """Force the numpy path (benchmarks and cross-checks)."""
    return _window_eval_numpy(np.asarray(coeffs, np.complex128), k0, np.atleast_1d(np.asarray(xs, np.float64)))
