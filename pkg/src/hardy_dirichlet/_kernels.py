"""Compiled inner loops for torus sampling and vertical-line averages."""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(nogil=True, cache=True)
def lift_abs_recurrence(theta, pidx, cof, ns, coeffs, out):
    """|BF| at each row of ``theta`` via chi(n) = chi(cof[n]) z[pidx[n]]."""
    B, d = theta.shape
    N = cof.shape[0] - 1
    chi = np.empty(N + 1, np.complex128)
    z = np.empty(d, np.complex128)
    for b in range(B):
        for j in range(d):
            a = TWO_PI * theta[b, j]
            z[j] = complex(math.cos(a), math.sin(a))
        if N >= 1:
            chi[1] = 1.0
        for n in range(2, N + 1):
            chi[n] = chi[cof[n]] * z[pidx[n]]
        s = 0j
        for k in range(ns.shape[0]):
            s += coeffs[k] * chi[ns[k]]
        out[b] = abs(s)


@njit(nogil=True, cache=True)
def lift_abs_sparse(theta, ptr, cols, exps, coeffs, out):
    """|BF| at each row of ``theta`` from per-term exponent lists (CSR layout)."""
    B = theta.shape[0]
    T = coeffs.shape[0]
    for b in range(B):
        s = 0j
        for t in range(T):
            ph = 0.0
            for k in range(ptr[t], ptr[t + 1]):
                ph += exps[k] * theta[b, cols[k]]
            ph -= math.floor(ph)
            a = TWO_PI * ph
            s += coeffs[t] * complex(math.cos(a), math.sin(a))
        out[b] = abs(s)


@njit(nogil=True, cache=True)
def vertical_line_integral(t0, h, npanels, gl_x, gl_w, logs, coeffs, q):
    """Composite Gauss-Legendre integral of |sum_n a_n n^{-it}|^q over [t0, t0 + npanels h]."""
    total = 0.0
    comp = 0.0
    half = 0.5 * h
    for i in range(npanels):
        mid = t0 + (i + 0.5) * h
        panel = 0.0
        for k in range(gl_x.shape[0]):
            t = mid + half * gl_x[k]
            re = 0.0
            im = 0.0
            for j in range(logs.shape[0]):
                a = t * logs[j]
                c = math.cos(a)
                s = -math.sin(a)
                re += coeffs[j].real * c - coeffs[j].imag * s
                im += coeffs[j].real * s + coeffs[j].imag * c
            panel += gl_w[k] * (re * re + im * im) ** (0.5 * q)
        # Kahan summation across panels
        y = panel * half - comp
        tmp = total + y
        comp = (tmp - total) - y
        total = tmp
    return total
