"""
Numba-compiled inner loops.

The Tobit recursion is inherently sequential in t, so it is written as an explicit loop and
compiled, the same way ARMA recursions are usually handled. The accumulation order is always
t = 1..T, which keeps outputs bit-reproducible across platforms and worker counts.

All kernels take float64 arrays; the Python wrappers in the public modules do the conversion and
validation.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def tobit_path(alpha: float, beta: float, phi: np.ndarray, init: np.ndarray, u: np.ndarray,
               censor: bool) -> tuple[np.ndarray, np.ndarray]:
    """ Run the ADF-form recursion with (censor=True) or without censoring at zero.

    Args:
        alpha: Intercept.
        beta: Level coefficient.
        phi: Difference coefficients phi_1..phi_{k-1}.
        init: The k initial levels y_{-k+1}, ..., y_0, oldest first.
        u: Innovations u_1..u_T.
        censor: Apply the positive part when True.

    Returns:
        Levels y_1..y_T and the negative parts y_t^- (all zero when censor is False).
    """
    k = init.shape[0]
    p = phi.shape[0]
    n = u.shape[0]
    buf = np.empty(k + n)
    for i in range(k):
        buf[i] = init[i]
    y_minus = np.zeros(n)

    for t in range(n):
        s = k + t
        arg = alpha + beta * buf[s - 1]
        for i in range(1, p + 1):
            arg += phi[i - 1] * (buf[s - i] - buf[s - i - 1])
        arg += u[t]
        if censor and arg < 0.0:
            buf[s] = 0.0
            y_minus[t] = arg
        else:
            buf[s] = arg

    return buf[k:].copy(), y_minus


@njit(cache=True)
def limited_ar_path(phi: np.ndarray, rho: float, u: np.ndarray) -> np.ndarray:
    """ Filter u through phi(L)^{-1} from a zero pre-sample, then regulate at zero from 0. """
    p = phi.shape[0]
    n = u.shape[0]
    eps = np.empty(n)
    x = np.empty(n)
    prev = 0.0

    for t in range(n):
        e = u[t]
        for i in range(1, p + 1):
            if t - i >= 0:
                e += phi[i - 1] * eps[t - i]
        eps[t] = e
        v = prev * rho + e
        if v < 0.0:
            v = 0.0
        x[t] = v
        prev = v

    return x


@njit(cache=True)
def ar1_tstat(y: np.ndarray) -> float:
    """ t-ratio for beta = 1 in the OLS regression of y_t on (1, y_{t-1}).

    Uses centred (two-pass) sums; sigma^2 has divisor equal to the number of regression rows.
    Returns NaN when the regressor has no variation or the fit is exact.
    """
    n = y.shape[0] - 1
    xbar = 0.0
    zbar = 0.0
    for t in range(n):
        xbar += y[t]
        zbar += y[t + 1]
    xbar /= n
    zbar /= n

    sxx = 0.0
    sxz = 0.0
    for t in range(n):
        dx = y[t] - xbar
        sxx += dx * dx
        sxz += dx * (y[t + 1] - zbar)
    if sxx <= 0.0:
        return np.nan

    b = sxz / sxx
    a = zbar - b * xbar
    ssr = 0.0
    for t in range(n):
        e = y[t + 1] - a - b * y[t]
        ssr += e * e
    s2 = ssr / n
    if s2 <= 0.0:
        return np.nan

    return (b - 1.0) / np.sqrt(s2 / sxx)


@njit(cache=True)
def ar1_simulate_tstat(y0: float, alpha: float, beta: float, u: np.ndarray,
                       censor: bool) -> float:
    """ Simulate y_t = [alpha + beta*y_{t-1} + u_t]_+ (or linearly) and return t_beta. """
    n = u.shape[0]
    y = np.empty(n + 1)
    y[0] = y0
    for t in range(n):
        v = alpha + beta * y[t] + u[t]
        if censor and v < 0.0:
            v = 0.0
        y[t + 1] = v

    return ar1_tstat(y)
