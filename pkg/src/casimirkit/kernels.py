"""Hot inner loops: box mode sums and the Lifshitz y-integrand.

Each kernel exists twice, a numba version and a pure-numpy version with the
same signature.  ``USE_NUMBA`` (from the ``CASIMIRKIT_NUMBA`` environment
flag) picks which one the public dispatchers call.  Partial sums are always
reduced with :func:`pairwise_sum` over a fixed layout, so results do not
depend on how work is split.
"""
import math

import numpy as np

from ._jit import USE_NUMBA, njit

# kinds of box mode sum
REGULATED = 0  # sum w k exp(-d k)
THERMAL = 1  # sum w log(1 - exp(-d k))


def pairwise_sum(values) -> float:
    """Sum with a fixed binary tree (8-element leaves)."""
    v = np.ascontiguousarray(values, dtype=float).ravel()
    return float(_pairwise(v, 0, v.size))


def _pairwise(v, lo, hi):
    n = hi - lo
    if n <= 8:
        s = 0.0
        for i in range(lo, hi):
            s += v[i]
        return s
    mid = lo + n // 2
    return _pairwise(v, lo, mid) + _pairwise(v, mid, hi)


def mode_weight(n, l, p, em):
    """Degeneracy of the (n, l, p) mode.

    Dirichlet scalar: 1 when every index is >= 1.  Ideal-metal EM: 2 when
    every index is >= 1, 1 when exactly one index vanishes, else 0.
    """
    zeros = (n == 0) + (l == 0) + (p == 0)
    if em:
        return 2 if zeros == 0 else (1 if zeros == 1 else 0)
    return 1 if zeros == 0 else 0


def estimate_mode_count(sides, d, xmax):
    """Rough number of modes with d*k <= xmax, used for the term budget."""
    kmax = xmax / d
    vol = sides[0] * sides[1] * sides[2]
    return vol * kmax**3 / (6 * math.pi**2) + 1


@njit
def _box_sum_numba(ax, ay, az, em, kind, d, xmax):
    nmax = int(xmax / (d * math.pi / ax)) + 1
    partial = np.zeros(nmax + 1)
    start = 0 if em else 1
    for n in range(start, nmax + 1):
        kx = math.pi * n / ax
        if d * kx > xmax:
            break
        s = 0.0
        comp = 0.0
        l = start
        while True:
            ky = math.pi * l / ay
            kxy2 = kx * kx + ky * ky
            if d * math.sqrt(kxy2) > xmax:
                break
            p = start
            while True:
                kz = math.pi * p / az
                k = math.sqrt(kxy2 + kz * kz)
                x = d * k
                if x > xmax:
                    break
                zeros = (n == 0) + (l == 0) + (p == 0)
                if em:
                    w = 2.0 if zeros == 0 else (1.0 if zeros == 1 else 0.0)
                else:
                    w = 1.0 if zeros == 0 else 0.0
                if w != 0.0:
                    if kind == 0:
                        term = w * k * math.exp(-x)
                    else:
                        term = w * math.log1p(-math.exp(-x))
                    # Kahan-compensated accumulation inside one n-slab
                    t = term - comp
                    u = s + t
                    comp = (u - s) - t
                    s = u
                p += 1
            l += 1
        partial[n] = s
    return partial


def _box_sum_numpy(ax, ay, az, em, kind, d, xmax):
    nmax = int(xmax / (d * math.pi / ax)) + 1
    partial = np.zeros(nmax + 1)
    start = 0 if em else 1
    lmax = int(xmax / (d * math.pi / ay)) + 1
    pmax = int(xmax / (d * math.pi / az)) + 1
    l = np.arange(start, lmax + 1)
    p = np.arange(start, pmax + 1)
    ky = math.pi * l / ay
    kz = math.pi * p / az
    kyz2 = ky[:, None] ** 2 + kz[None, :] ** 2
    zeros_lp = (l[:, None] == 0).astype(int) + (p[None, :] == 0).astype(int)
    for n in range(start, nmax + 1):
        kx = math.pi * n / ax
        if d * kx > xmax:
            break
        k = np.sqrt(kx * kx + kyz2)
        x = d * k
        zeros = zeros_lp + (n == 0)
        if em:
            w = np.where(zeros == 0, 2.0, np.where(zeros == 1, 1.0, 0.0))
        else:
            w = (zeros == 0).astype(float)
        w = np.where(x <= xmax, w, 0.0)
        if kind == REGULATED:
            terms = w * k * np.exp(-x)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(w > 0, w * np.log1p(-np.exp(-np.maximum(x, 1e-300))), 0.0)
        partial[n] = terms.sum()
    return partial


def box_mode_sum(sides, em, kind, d, xmax=45.0, use_numba=None):
    """Weighted mode sum over a rectangular box.

    ``sides`` in any length unit, ``d`` in the same unit (c * delta for the
    cutoff sum, hbar c / k_B T for the thermal sum).  Returns the sum in
    inverse-length units for ``REGULATED`` and dimensionless for ``THERMAL``.
    """
    ax, ay, az = (float(s) for s in sides)
    if use_numba is None:
        use_numba = USE_NUMBA
    fn = _box_sum_numba if use_numba else _box_sum_numpy
    partial = fn(ax, ay, az, bool(em), int(kind), float(d), float(xmax))
    return pairwise_sum(partial)


# ---------------------------------------------------------------------------
# Lifshitz integrand


@njit
def _log_and_pressure(A, B, y):
    # r = (A - B)/(A + B); returns (log(1 - r^2 e^-y), r^2 e^-y / (1 - r^2 e^-y))
    S = A + B
    r = (A - B) / S
    r2 = r * r
    x = r2 * math.exp(-y)
    if x < 0.5:
        one_minus = 1.0 - x
        lg = math.log1p(-x)
    else:
        one_minus = 4.0 * A * B / (S * S) - r2 * math.expm1(-y)
        lg = math.log(one_minus)
    return lg, x / one_minus


@njit
def _lifshitz_numba(zeta, eps_t, eps_free, eps_c, eps_s, kappa_a, screened, t_nodes, t_weights):
    L = zeta.shape[0]
    N = t_nodes.shape[1]
    out = np.zeros((4, L))
    for i in range(L):
        z = zeta[i]
        et = eps_t[i]
        ef = eps_free[i]
        ec = eps_c[i]
        sum_ftm = 0.0
        sum_fte = 0.0
        sum_ptm = 0.0
        sum_pte = 0.0
        for j in range(N):
            t = t_nodes[i, j]
            w = t_weights[i, j]
            y = z + t
            y2mz2 = t * (2.0 * z + t)
            root = math.sqrt(y * y + (et - 1.0) * z * z)
            # TE
            lg, pr = _log_and_pressure(y, root, y)
            sum_fte += w * y * lg
            sum_pte += w * y * y * pr
            # TM
            A = et * y
            B = root
            if screened:
                eta = math.sqrt(y2mz2 + kappa_a * kappa_a * eps_s * et / (ec * ef))
                B = B + y2mz2 * ef / (eta * ec)
            lg, pr = _log_and_pressure(A, B, y)
            sum_ftm += w * y * lg
            sum_ptm += w * y * y * pr
        out[0, i] = sum_ftm
        out[1, i] = sum_fte
        out[2, i] = sum_ptm
        out[3, i] = sum_pte
    return out


def _log_and_pressure_np(A, B, y):
    S = A + B
    r = (A - B) / S
    r2 = r * r
    x = r2 * np.exp(-y)
    precise = 4.0 * A * B / (S * S) - r2 * np.expm1(-y)
    one_minus = np.where(x < 0.5, 1.0 - x, precise)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(x < 0.5, np.log1p(-np.minimum(x, 0.5)), np.log(np.where(x < 0.5, 1.0, precise)))
    return lg, x / one_minus


def _lifshitz_numpy(zeta, eps_t, eps_free, eps_c, eps_s, kappa_a, screened, t_nodes, t_weights):
    z = zeta[:, None]
    et = eps_t[:, None]
    t = t_nodes
    y = z + t
    y2mz2 = t * (2.0 * z + t)
    root = np.sqrt(y * y + (et - 1.0) * z * z)
    lg_te, pr_te = _log_and_pressure_np(y, root, y)
    A = et * y
    B = root
    if screened:
        ef = eps_free[:, None]
        ec = eps_c[:, None]
        eta = np.sqrt(y2mz2 + kappa_a**2 * eps_s * et / (ec * ef))
        B = B + y2mz2 * ef / (eta * ec)
    lg_tm, pr_tm = _log_and_pressure_np(A, B, y)
    w = t_weights
    return np.stack(
        [
            (w * y * lg_tm).sum(axis=1),
            (w * y * lg_te).sum(axis=1),
            (w * y * y * pr_tm).sum(axis=1),
            (w * y * y * pr_te).sum(axis=1),
        ]
    )


def lifshitz_terms(
    zeta, eps_t, eps_free, eps_c, eps_s, kappa_a, screened, t_nodes, t_weights, use_numba=None
):
    """Per-Matsubara-frequency y-integrals.

    Returns a (4, L) array: rows are int y ln(1 - r^2 e^-y) dy for TM and TE,
    then int y^2 r^2/(e^y - r^2) dy for TM and TE, each from zeta_l to infinity
    on the supplied quadrature nodes (offsets t = y - zeta_l).
    """
    if use_numba is None:
        use_numba = USE_NUMBA
    args = (
        np.ascontiguousarray(zeta, dtype=float),
        np.ascontiguousarray(eps_t, dtype=float),
        np.ascontiguousarray(eps_free, dtype=float),
        np.ascontiguousarray(eps_c, dtype=float),
        float(eps_s),
        float(kappa_a),
        bool(screened),
        np.ascontiguousarray(t_nodes, dtype=float),
        np.ascontiguousarray(t_weights, dtype=float),
    )
    if use_numba:
        return _lifshitz_numba(*args)
    # bound peak memory on long Matsubara sums
    L = args[0].shape[0]
    chunk = max(1, 2_000_000 // max(1, args[7].shape[1]))
    parts = []
    for lo in range(0, L, chunk):
        sl = slice(lo, lo + chunk)
        parts.append(
            _lifshitz_numpy(
                args[0][sl], args[1][sl], args[2][sl], args[3][sl], args[4], args[5], args[6],
                args[7][sl], args[8][sl],
            )
        )
    return np.concatenate(parts, axis=1) if parts else np.zeros((4, 0))
