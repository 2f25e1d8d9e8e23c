"""Exact rational reference implementations of the mean-field maps.

Written independently of the package: plain double sums over Fractions,
with every float parameter converted exactly (Fraction(float)).
"""

from fractions import Fraction as F
from math import comb, floor


def xi(k, r, p):
    return p if 2 * r <= k else 1 - p


def bpmf(k, r, q):
    return comb(k, r) * q ** r * (1 - q) ** (k - r)


def grid(gamma, p, rho, lo=0, rule=None):
    rule = gamma if rule is None else rule
    return sum((xi(rule, r, p) * bpmf(gamma, r, rho) for r in range(lo, gamma + 1)), F(0))


def nu_floor(prob, m):
    # the package floors the decimal the user typed
    return floor(F(repr(prob)) * m)


def rg_full(n, pe, p, rho):
    total = F(0)
    for k in range(n):
        w = bpmf(n - 1, k, pe)
        total += w * sum((xi(k, r, p) * bpmf(k, r, rho) for r in range(k + 1)), F(0))
    return total


def rg_nu(n, pe_float, p, rho):
    return grid(nu_floor(pe_float, n - 1), p, rho)


def grid_pe(n, pe_float, p, rho):
    nu = nu_floor(pe_float, n - 1)
    q = rho * F(pe_float)
    return sum((xi(nu, r, p) * bpmf(n - 1, r, q) for r in range(n)), F(0))


def _sw_double(n, gamma, pw, p, rho, k_lo, inner_full=False):
    total = F(0)
    for k in range(k_lo, n):
        top = k if inner_full else k - gamma
        w = bpmf(n - 1, k, pw)
        total += w * sum((xi(k, r, p) * bpmf(k, r, rho) for r in range(top + 1)), F(0))
    return total


def sw_full(n, gamma, pw, p, rho, inner_full=False):
    return _sw_double(n, gamma, pw, p, rho, gamma, inner_full)


def rg_gamma(n, gamma, pw, p, rho):
    return _sw_double(n, gamma, pw, p, rho, gamma + 1)


def grid_gamma_nu(n, gamma, pw_float, p, rho):
    nu = nu_floor(pw_float, n - gamma)
    if nu <= gamma:
        return F(0)
    return grid(nu, p, rho, lo=gamma + 1)


def grid_sw(n, gamma, pw, p, rho):
    return grid(gamma, p, rho) * (1 - pw) ** (n - gamma)


def sw_composite(n, gamma, pw_float, p, rho):
    pw = F(pw_float)
    return (F(gamma, n) * grid_sw(n, gamma, pw, p, rho)
            + F(n - gamma, n) * grid_gamma_nu(n, gamma, pw_float, p, rho))


def sw_sigma2(n, gamma, pw_float, p, rho):
    pw = F(pw_float)
    a = grid_sw(n, gamma, pw, p, rho)
    b = grid_gamma_nu(n, gamma, pw_float, p, rho)
    return F(gamma, n * n) * a * (1 - a) + F(n - gamma, n * n) * b * (1 - b)


def evaluate(kind, p, rho, n=None, gamma=None, p_e=None, p_w=None, inner="literal"):
    """Exact value of the map ``kind`` at ``rho`` (all inputs floats)."""
    P, R = F(p), F(rho)
    if kind == "grid":
        return grid(gamma, P, R)
    if kind == "rg_full":
        return rg_full(n, F(p_e), P, R)
    if kind == "rg_nu":
        return rg_nu(n, p_e, P, R)
    if kind == "grid_pe":
        return grid_pe(n, p_e, P, R)
    if kind == "sw_full":
        return sw_full(n, gamma, F(p_w), P, R, inner == "full")
    if kind == "rg_gamma":
        return rg_gamma(n, gamma, F(p_w), P, R)
    if kind == "grid_gamma_nu":
        return grid_gamma_nu(n, gamma, p_w, P, R)
    if kind == "grid_sw":
        return grid_sw(n, gamma, F(p_w), P, R)
    if kind == "sw_composite":
        return sw_composite(n, gamma, p_w, P, R)
    raise ValueError(kind)


def rel_err(approx, exact):
    exact = F(exact)
    if exact == 0:
        return abs(F(approx))
    return abs((F(approx) - exact) / exact)
