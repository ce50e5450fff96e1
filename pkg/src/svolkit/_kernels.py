"""Compiled inner loops: KDE evaluation, log targets, AR-MH updates, the chain.

Densities cross into compiled code as a 7-tuple::

    (table, lo, step, points, bandwidth, center, scale)

``table`` holds log f on the uniform grid ``lo + k * step`` of the
standardized axis; an empty table (or a query off the grid) falls back to
the exact kernel sum over ``points``.
"""
import math

import numpy as np
from numba import njit

GAUSSIAN = 0
NSVM1 = 1
NSVM2 = 2

LOG_TINY = math.log(1e-300)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
SIGMA2_GUARD = 1e-12

# counters layout
C_H_UPDATES = 0
C_H_DRAWS = 1
C_H_REJECTS = 2
C_H_CAP = 3
C_S2_DRAWS = 4
C_S2_REJECTS = 5
C_D_DRAWS = 6
C_D_REJECTS = 7
C_A_DRAWS = 8
C_A_REJECTS = 9
C_PARAM_CAP = 10
N_COUNTERS = 11


@njit(cache=True)
def kde_log_exact(points, bw, z):
    n = points.shape[0]
    inv = 0.5 / (bw * bw)
    dmin = np.inf
    for i in range(n):
        d = (z - points[i]) * (z - points[i])
        if d < dmin:
            dmin = d
    s = 0.0
    for i in range(n):
        d = (z - points[i]) * (z - points[i])
        s += math.exp(-(d - dmin) * inv)
    val = -dmin * inv + math.log(s) - math.log(n * bw) - LOG_SQRT_2PI
    if val < LOG_TINY:
        return LOG_TINY
    return val


@njit(cache=True)
def kde_log_exact_many(points, bw, zs):
    out = np.empty(zs.shape[0])
    for i in range(zs.shape[0]):
        out[i] = kde_log_exact(points, bw, zs[i])
    return out


@njit(cache=True)
def dens_log(dens, z):
    """log density on the standardized axis."""
    table = dens[0]
    m = table.shape[0]
    if m > 1:
        u = (z - dens[1]) / dens[2]
        if u >= 0.0 and u <= m - 1:
            i = int(u)
            if i > m - 2:
                i = m - 2
            f = u - i
            return table[i] * (1.0 - f) + table[i + 1] * f
    return kde_log_exact(dens[3], dens[4], z)


@njit(cache=True)
def log_f_term(fd, x, raw_plugin):
    if raw_plugin:
        return dens_log(fd, x)
    return dens_log(fd, (x - fd[5]) / fd[6]) - math.log(fd[6])


@njit(cache=True)
def log_target_h(kind, y, lh, mu, s2, sigma_nu, fd, gd, raw_plugin, g_scale_raw,
                 g_joint=False, lp=0.0, ln_=0.0, alpha=0.0, delta=0.0):
    """Log conditional of h_t at ln h_t = ``lh`` (up to a constant).

    With ``g_joint`` the NSVM-2 volatility factor is g(e_t) g(e_{t+1}) on the
    one-sided AR residuals around neighbours ``lp``/``ln_`` instead of g at
    the two-sided residual.
    """
    x = y * math.exp(-0.5 * lh)
    v = -1.5 * lh
    if kind == GAUSSIAN:
        v += -0.5 * x * x - LOG_SQRT_2PI
    else:
        v += log_f_term(fd, x, raw_plugin)
    if kind == NSVM2 and g_joint:
        v += dens_log(gd, (lh - alpha - delta * lp) / sigma_nu)
        v += dens_log(gd, (ln_ - alpha - delta * lh) / sigma_nu)
    elif kind == NSVM2:
        sg = sigma_nu if g_scale_raw else math.sqrt(s2)
        v += dens_log(gd, (lh - mu) / sg)
    else:
        z = (lh - mu) / math.sqrt(s2)
        v += -0.5 * z * z - LOG_SQRT_2PI
    return v


@njit(cache=True)
def ig_params(mu, s2, y):
    lam = 2.5 + 1.0 / math.expm1(s2)
    phi = (lam - 1.0) * math.exp(mu + 0.5 * s2) + 0.5 * y * y
    return lam, phi


@njit(cache=True)
def _accept(rng, log_ratio):
    if log_ratio >= 0.0:
        return True
    return rng.random() < math.exp(log_ratio)


@njit(cache=True)
def _mh_log_ratio(accepted, w_new, w_old):
    # Tierney's AR-MH acceptance; w = log p/(c q). A capped first stage
    # falls back to the independence-sampler ratio.
    if not accepted:
        return w_new - w_old
    if w_old < 0.0:
        return 0.0
    if w_new < 0.0:
        return -w_old
    return w_new - w_old


@njit(cache=True)
def sample_h_kernel(kind, y, mu, s2, sigma_nu, h_old, c_star, rng, fd, gd,
                    raw_plugin, g_scale_raw, cap, g_joint=False, lp=0.0, ln_=0.0,
                    alpha=0.0, delta=0.0):
    """One AR-MH update of h_t. Returns (h, moved, first_stage_draws, capped)."""
    if not s2 >= SIGMA2_GUARD:
        raise ValueError("proposal degenerate: local variance below guard")
    lam, phi = ig_params(mu, s2, y)
    mode = phi / (lam + 1.0)
    lmode = math.log(mode)
    # IG kernel taken relative to its mode
    ln_c = math.log(c_star) + log_target_h(kind, y, lmode, mu, s2, sigma_nu, fd, gd,
                                           raw_plugin, g_scale_raw, g_joint, lp, ln_, alpha, delta)
    w_new = 0.0
    h_new = h_old
    accepted = False
    draws = 0
    while draws < cap:
        h_new = phi / rng.standard_gamma(lam)
        draws += 1
        lnew = math.log(h_new)
        lq = -(lam + 1.0) * (lnew - lmode) - phi / h_new + phi / mode
        w_new = log_target_h(kind, y, lnew, mu, s2, sigma_nu, fd, gd,
                             raw_plugin, g_scale_raw, g_joint, lp, ln_, alpha, delta) - lq - ln_c
        if _accept(rng, w_new):
            accepted = True
            break
    lold = math.log(h_old)
    lq_old = -(lam + 1.0) * (lold - lmode) - phi / h_old + phi / mode
    w_old = log_target_h(kind, y, lold, mu, s2, sigma_nu, fd, gd,
                         raw_plugin, g_scale_raw, g_joint, lp, ln_, alpha, delta) - lq_old - ln_c
    if _accept(rng, _mh_log_ratio(accepted, w_new, w_old)):
        return h_new, True, draws, not accepted
    return h_old, False, draws, not accepted


# ---------------------------------------------------------------- parameters

@njit(cache=True)
def suff_stats(ln_h):
    s1 = 0.0
    s2 = 0.0
    s3 = 0.0
    for t in range(ln_h.shape[0]):
        s1 += ln_h[t]
        s2 += ln_h[t] * ln_h[t]
        if t > 0:
            s3 += ln_h[t] * ln_h[t - 1]
    return s1, s2, s3


@njit(cache=True)
def s_prime(s0, alpha, delta, ln_h, s1, s2, s3):
    n = ln_h.shape[0]
    first = ln_h[0]
    last = ln_h[n - 1]
    return (s0 + (n - 1) * alpha * alpha + (1.0 + delta * delta) * s2
            - delta * delta * last * last - first * first
            - 2.0 * alpha * ((1.0 - delta) * s1 - first + delta * last)
            - 2.0 * delta * s3)


@njit(cache=True)
def delta_moments(pri, alpha, sigma2, ln_h, s1, s2, s3):
    last = ln_h[ln_h.shape[0] - 1]
    sd2 = pri[3]
    den = sigma2 + sd2 * (s2 - last * last)
    mean = (sigma2 * pri[2] + sd2 * (s3 - alpha * (s1 - last))) / den
    var = sigma2 * sd2 / den
    return mean, var


@njit(cache=True)
def alpha_moments(pri, delta, sigma2, ln_h, s1):
    n = ln_h.shape[0]
    sa2 = pri[1]
    den = sigma2 + (n - 1) * sa2
    mean = (sa2 * ((1.0 - delta) * s1 - ln_h[0] + delta * ln_h[n - 1]) + sigma2 * pri[0]) / den
    var = sigma2 * sa2 / den
    return mean, var


@njit(cache=True)
def _ar_resid_logg(ln_h, alpha, delta, sd, gd):
    v = 0.0
    for t in range(1, ln_h.shape[0]):
        v += dens_log(gd, (ln_h[t] - alpha - delta * ln_h[t - 1]) / sd)
    return v


@njit(cache=True)
def param_log_target(which, x, ln_h, alpha, delta, sigma2, pri, gd):
    """Nonparametric-error log targets: 0 sigma_nu^2, 1 delta, 2 alpha."""
    if which == 0:
        a = 0.5 * pri[4]
        b = 0.5 * pri[5]
        m = ln_h.shape[0] - 1
        return (-(a + 1.0) * math.log(x) - b / x - 0.5 * m * math.log(x)
                + _ar_resid_logg(ln_h, alpha, delta, math.sqrt(x), gd))
    sd = math.sqrt(sigma2)
    if which == 1:
        return -0.5 * (x - pri[2]) ** 2 / pri[3] + _ar_resid_logg(ln_h, alpha, x, sd, gd)
    return -0.5 * (x - pri[0]) ** 2 / pri[1] + _ar_resid_logg(ln_h, x, delta, sd, gd)


@njit(cache=True)
def _proposal_log(which, x, qa, qb):
    if which == 0:
        return -(qa + 1.0) * math.log(x) - qb / x
    return -0.5 * (x - qa) ** 2 / qb


@njit(cache=True)
def _proposal_draw(which, qa, qb, rng):
    if which == 0:
        return qb / rng.standard_gamma(qa)
    return qa + math.sqrt(qb) * rng.standard_normal()


@njit(cache=True)
def armh_param(which, qa, qb, x_old, rng, ln_h, alpha, delta, sigma2, pri, gd, cap):
    """AR-MH for a parameter; proposal IG(qa, qb) (which=0) or N(qa, qb).

    The envelope constant is p/q at the proposal mode.
    """
    mode = qb / (qa + 1.0) if which == 0 else qa
    ln_c = (param_log_target(which, mode, ln_h, alpha, delta, sigma2, pri, gd)
            - _proposal_log(which, mode, qa, qb))
    x_new = x_old
    w_new = 0.0
    accepted = False
    draws = 0
    while draws < cap:
        x_new = _proposal_draw(which, qa, qb, rng)
        draws += 1
        w_new = (param_log_target(which, x_new, ln_h, alpha, delta, sigma2, pri, gd)
                 - _proposal_log(which, x_new, qa, qb) - ln_c)
        if _accept(rng, w_new):
            accepted = True
            break
    w_old = (param_log_target(which, x_old, ln_h, alpha, delta, sigma2, pri, gd)
             - _proposal_log(which, x_old, qa, qb) - ln_c)
    if _accept(rng, _mh_log_ratio(accepted, w_new, w_old)):
        return x_new, True, draws, not accepted
    return x_old, False, draws, not accepted


@njit(cache=True)
def update_sigma2(kind, pri, sp, ln_h, alpha, delta, sigma2_old, rng, gd, cap):
    if not sp > 0.0:
        raise ValueError("s_prime must be positive")
    qa = 0.5 * (pri[4] + ln_h.shape[0] - 1)
    qb = 0.5 * sp
    if kind != NSVM2:
        return qb / rng.standard_gamma(qa), True, 1, False
    return armh_param(0, qa, qb, sigma2_old, rng, ln_h, alpha, delta, sigma2_old, pri, gd, cap)


@njit(cache=True)
def update_delta(kind, pri, alpha, sigma2, ln_h, s1, s2, s3, delta_old, rng, gd, cap):
    mean, var = delta_moments(pri, alpha, sigma2, ln_h, s1, s2, s3)
    if not var > 0.0 or not np.isfinite(mean):
        mean, var = pri[2], pri[3]
    if kind != NSVM2:
        return mean + math.sqrt(var) * rng.standard_normal(), True, 1, False
    return armh_param(1, mean, var, delta_old, rng, ln_h, alpha, delta_old, sigma2, pri, gd, cap)


@njit(cache=True)
def update_alpha(kind, pri, delta, sigma2, ln_h, s1, alpha_old, rng, gd, cap):
    mean, var = alpha_moments(pri, delta, sigma2, ln_h, s1)
    if not var > 0.0 or not np.isfinite(mean):
        mean, var = pri[0], pri[1]
    if kind != NSVM2:
        return mean + math.sqrt(var) * rng.standard_normal(), True, 1, False
    return armh_param(2, mean, var, alpha_old, rng, ln_h, alpha_old, delta, sigma2, pri, gd, cap)


# --------------------------------------------------------------------- chain

@njit(cache=True)
def run_chain_kernel(kind, y, ln_h0, alpha, delta, sigma2, n_keep, burn, c_star, pri,
                     rng, fd, gd, raw_plugin, g_scale_raw, cap, g_joint=False):
    n = y.shape[0]
    ln_h = ln_h0.copy()
    h_out = np.empty((n_keep, n))
    a_out = np.empty(n_keep)
    d_out = np.empty(n_keep)
    s_out = np.empty(n_keep)
    counts = np.zeros(N_COUNTERS, np.int64)
    for it in range(n_keep + burn):
        denom = 1.0 + delta * delta
        loc_s2 = sigma2 / denom
        sigma_nu = math.sqrt(sigma2)
        for t in range(1, n - 1):
            mu = (delta * (ln_h[t - 1] + ln_h[t + 1]) + alpha * (1.0 - delta)) / denom
            h_new, moved, draws, capped = sample_h_kernel(
                kind, y[t], mu, loc_s2, sigma_nu, math.exp(ln_h[t]), c_star, rng, fd, gd,
                raw_plugin, g_scale_raw, cap, g_joint, ln_h[t - 1], ln_h[t + 1], alpha, delta)
            if moved:
                ln_h[t] = math.log(h_new)
            else:
                counts[C_H_REJECTS] += 1
            counts[C_H_UPDATES] += 1
            counts[C_H_DRAWS] += draws
            if capped:
                counts[C_H_CAP] += 1
        ln_h[0] = alpha + delta * ln_h[1] + sigma_nu * rng.standard_normal()
        ln_h[n - 1] = alpha + delta * ln_h[n - 2] + sigma_nu * rng.standard_normal()

        s1, s2, s3 = suff_stats(ln_h)
        sp = s_prime(pri[5], alpha, delta, ln_h, s1, s2, s3)
        sigma2, moved, draws, capped = update_sigma2(kind, pri, sp, ln_h, alpha, delta,
                                                     sigma2, rng, gd, cap)
        counts[C_S2_DRAWS] += draws
        counts[C_S2_REJECTS] += 0 if moved else 1
        counts[C_PARAM_CAP] += 1 if capped else 0
        alpha, moved, draws, capped = update_alpha(kind, pri, delta, sigma2, ln_h, s1,
                                                   alpha, rng, gd, cap)
        counts[C_A_DRAWS] += draws
        counts[C_A_REJECTS] += 0 if moved else 1
        counts[C_PARAM_CAP] += 1 if capped else 0
        delta, moved, draws, capped = update_delta(kind, pri, alpha, sigma2, ln_h, s1, s2, s3,
                                                   delta, rng, gd, cap)
        counts[C_D_DRAWS] += draws
        counts[C_D_REJECTS] += 0 if moved else 1
        counts[C_PARAM_CAP] += 1 if capped else 0

        if it >= burn:
            k = it - burn
            for t in range(n):
                h_out[k, t] = math.exp(ln_h[t])
            a_out[k] = alpha
            d_out[k] = delta
            s_out[k] = sigma2
    return h_out, a_out, d_out, s_out, counts, ln_h
