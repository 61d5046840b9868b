"""Jit-compiled inner loops for the policy solver and the simulator.

Layout conventions shared by every kernel:

* `grid`    -- (G,) strictly increasing asset grid
* `vals`    -- (S, G) consumption values, one row per composite state
* `slopes`  -- (S,) linear extrapolation slopes beyond the grid
* `thr`     -- (S,) binding thresholds; consumption equals assets at or
               below the threshold (use -inf to disable, +inf for the
               identity policy)
* `alpha`   -- lower clip share for extrapolated consumption
* `P`       -- (S, S) composite transition matrix
* `Rn`/`wR` -- (S, nR) return quadrature values and (nR,) weights
* `Yn`/`wY` -- (S, nY) income quadrature values (ascending) and weights
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _u_prime(c, gamma):
    if gamma == 1.0:
        return 1.0 / c
    if gamma == 2.0:
        return 1.0 / (c * c)
    return c ** (-gamma)


@njit(cache=True, inline="always")
def _eval_policy(x, jz, grid, vals, slopes, thr, alpha):
    """Consumption and its slope at assets x in state jz.

    Piecewise linear on the grid, linear extrapolation above (clipped into
    [alpha*x, x]), proportional below the first grid point, exact identity
    at or below the binding threshold.
    """
    if x <= 0.0:
        return 0.0, 0.0
    if x <= thr[jz]:
        return x, 1.0
    G = grid.shape[0]
    if x >= grid[G - 1]:
        dc = slopes[jz]
        c = vals[jz, G - 1] + dc * (x - grid[G - 1])
        if c > x:
            c = x
            dc = 1.0
        lo = alpha * x
        if c < lo:
            c = lo
            dc = alpha
        return c, dc
    if x <= grid[0]:
        dc = vals[jz, 0] / grid[0]
        c = x * dc
        if c > x:
            c = x
            dc = 1.0
        return c, dc
    lo = 0
    hi = G - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if grid[mid] <= x:
            lo = mid
        else:
            hi = mid
    dc = (vals[jz, lo + 1] - vals[jz, lo]) / (grid[lo + 1] - grid[lo])
    return vals[jz, lo] + dc * (x - grid[lo]), dc


@njit(cache=True)
def _eval_policy_many(xs, jz, grid, vals, slopes, thr, alpha):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        c, _ = _eval_policy(xs[i], jz, grid, vals, slopes, thr, alpha)
        out[i] = c
    return out


@njit(cache=True, fastmath=True)
def _rhs_and_deriv(s, z, P, Rn, wR, Yn, wY, grid, vals, slopes, thr, alpha, gamma, paired):
    """E_z[R u'(c(R*s + Y, z'))] and its derivative w.r.t. consumption xi.

    s is savings a - xi, so dx/dxi = -R and the derivative term is
    +gamma * u'(c) / c * dc * R per node.  With `paired` false, (Rn, Yn) form
    a product rule and income nodes ascend, so the grid cell pointer only
    moves forward within each (state, return-node) pass; with `paired` true,
    column k of Rn and Yn is one joint draw.
    """
    S = P.shape[0]
    nR = Rn.shape[1]
    nY = Yn.shape[1]
    G = grid.shape[0]
    g_last = grid[G - 1]
    g0 = grid[0]
    acc = 0.0
    dacc = 0.0
    if paired:
        for jz in range(S):
            p = P[z, jz]
            if p <= 0.0:
                continue
            for k in range(nR):
                R = Rn[jz, k]
                x = R * s + Yn[jz, k]
                c, dc = _eval_policy(x, jz, grid, vals, slopes, thr, alpha)
                up = _u_prime(c, gamma)
                base = p * wR[k] * R
                acc += base * up
                dacc += base * R * gamma * up * dc / c
        return acc, dacc
    for jz in range(S):
        p = P[z, jz]
        if p <= 0.0:
            continue
        t = thr[jz]
        ratio0 = vals[jz, 0] / g0
        for k in range(nR):
            R = Rn[jz, k]
            rs = R * s
            base = p * wR[k] * R
            dbase = base * R * gamma
            # locate the cell of the first (smallest) income node
            x0 = rs + Yn[jz, 0]
            lo = 0
            hi = G - 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if grid[mid] <= x0:
                    lo = mid
                else:
                    hi = mid
            jcell = lo
            for l in range(nY):
                x = rs + Yn[jz, l]
                if x <= t:
                    c = x
                    dc = 1.0
                elif x >= g_last:
                    dc = slopes[jz]
                    c = vals[jz, G - 1] + dc * (x - g_last)
                    if c > x:
                        c = x
                        dc = 1.0
                    clo = alpha * x
                    if c < clo:
                        c = clo
                        dc = alpha
                elif x <= g0:
                    dc = ratio0
                    c = x * dc
                else:
                    while jcell + 2 < G and grid[jcell + 1] <= x:
                        jcell += 1
                    dc = (vals[jz, jcell + 1] - vals[jz, jcell]) / (
                        grid[jcell + 1] - grid[jcell]
                    )
                    c = vals[jz, jcell] + dc * (x - grid[jcell])
                up = _u_prime(c, gamma)
                w = wY[l]
                acc += base * w * up
                dacc += dbase * w * up * dc / c
    return acc, dacc


@njit(cache=True)
def _binding_rhs(z, P, Rn, wR, Yn, wY, grid, vals, slopes, thr, alpha, gamma, paired):
    """E_z[R u'(c(Y, z'))], the zero-savings expectation for the threshold."""
    acc, _ = _rhs_and_deriv(
        0.0, z, P, Rn, wR, Yn, wY, grid, vals, slopes, thr, alpha, gamma, paired
    )
    return acc


@njit(cache=True, parallel=True)
def _coleman_cells(
    grid, P, Rn, wR, Yn, wY, vals_in, slopes_in, thr_in, alpha, gamma, beta,
    abar, warm, root_tol, paired, out,
):
    """Solve the first-order condition cell by cell; writes consumption to `out`.

    Cells with assets at or below the binding threshold consume everything.
    Interior cells run safeguarded Newton on a guaranteed bracket
    (marginal utility explodes as consumption tends to zero, and the binding
    test settles the sign at the upper end).  States run in parallel; within
    a state the grid is walked upward so each cell warm-starts from its
    neighbor's root as well as from the previous iterate's value.
    """
    S = P.shape[0]
    G = grid.shape[0]
    for z in prange(S):
        prev_root = -1.0
        for i in range(G):
            a = grid[i]
            if a <= abar[z]:
                out[z, i] = a
                prev_root = -1.0
                continue
            lo = 1e-14 * a
            hi = a
            x = warm[z, i]
            if prev_root > x:
                x = prev_root  # roots increase along the grid
            if not (lo < x < hi):
                x = 0.5 * (lo + hi)
            for _ in range(200):
                acc, dacc = _rhs_and_deriv(
                    a - x, z, P, Rn, wR, Yn, wY, grid, vals_in, slopes_in, thr_in,
                    alpha, gamma, paired,
                )
                up = _u_prime(x, gamma)
                g = up - beta * acc
                if abs(g) <= root_tol:
                    break
                if g > 0.0:
                    lo = x
                else:
                    hi = x
                if hi - lo <= 4e-16 * a:
                    x = 0.5 * (lo + hi)
                    break
                gp = -gamma * up / x - beta * dacc
                xn = x - g / gp
                if xn <= lo or xn >= hi:
                    xn = 0.5 * (lo + hi)
                x = xn
            out[z, i] = x
            prev_root = x


@njit(cache=True, parallel=True)
def _euler_gap(grid, P, Rn, wR, Yn, wY, vals, slopes, thr, alpha, gamma, beta, paired, out):
    """u'(c) - beta * E_z[R u'(c(R(a-c)+Y, z'))] at every grid cell."""
    S = P.shape[0]
    G = grid.shape[0]
    for idx in prange(S * G):
        z = idx // G
        i = idx - z * G
        c = vals[z, i]
        acc, _ = _rhs_and_deriv(
            grid[i] - c, z, P, Rn, wR, Yn, wY, grid, vals, slopes, thr, alpha, gamma,
            paired,
        )
        out[z, i] = _u_prime(c, gamma) - beta * acc


@njit(cache=True, inline="always")
def _draw_state(cum_row, u):
    """Smallest index j with u < cum_row[j] (clipped to the last state)."""
    lo = 0
    hi = cum_row.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if u < cum_row[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True, parallel=True)
def _panel_period(
    a, z, u, zeta, eta, Pcum, mu_v, sig_v, chi_v, eta_std, constant_mode,
    const_R, grid, vals, slopes, thr, alpha,
):
    """One synchronous period for every agent; updates a and z in place."""
    n = a.shape[0]
    for i in prange(n):
        zi = z[i]
        c, _ = _eval_policy(a[i], zi, grid, vals, slopes, thr, alpha)
        s = a[i] - c
        zn = _draw_state(Pcum[zi], u[i])
        if constant_mode:
            R = const_R
        else:
            R = np.exp(mu_v[zn] + sig_v[zn] * zeta[i])
        a[i] = R * s + np.exp(chi_v[zn] + eta_std * eta[i])
        z[i] = zn


@njit(cache=True)
def _single_path(
    a0, z0, u, zeta, eta, Pcum, mu_v, sig_v, chi_v, eta_std, constant_mode,
    const_R, grid, vals, slopes, thr, alpha, a_path, z_path,
):
    """Sequential path of length len(u); records post-transition states."""
    a = a0
    z = z0
    for t in range(u.shape[0]):
        c, _ = _eval_policy(a, z, grid, vals, slopes, thr, alpha)
        s = a - c
        zn = _draw_state(Pcum[z], u[t])
        if constant_mode:
            R = const_R
        else:
            R = np.exp(mu_v[zn] + sig_v[zn] * zeta[t])
        a = R * s + np.exp(chi_v[zn] + eta_std * eta[t])
        z = zn
        a_path[t] = a
        z_path[t] = z
