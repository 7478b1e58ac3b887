"""Pure-Python recursions, used when the compiled extension is unavailable.

Loop order and arithmetic match ``_kernels.pyx`` exactly.
"""
import math

import numpy as np


def garch_filter(xi, a0, a, c):
    xi = np.asarray(xi, dtype=np.float64).tolist()
    a = list(map(float, a))
    c = list(map(float, c))
    n, q, qp = len(xi), len(a), len(c)
    x = [0.0] * n
    rho2 = [0.0] * n
    for k in range(n):
        s = a0
        for j in range(1, min(q, k) + 1):
            s += a[j - 1] * x[k - j] * x[k - j]
        for j in range(1, min(qp, k) + 1):
            s += c[j - 1] * rho2[k - j]
        rho2[k] = s
        x[k] = math.sqrt(s) * xi[k]
    return np.array(x, dtype=np.float64)


def arch_filter(xi, b0, b):
    xi = np.asarray(xi, dtype=np.float64).tolist()
    b = list(map(float, b))
    n, L = len(xi), len(b)
    x = [0.0] * n
    for k in range(n):
        s = b0
        for j in range(1, min(L, k) + 1):
            s += b[j - 1] * x[k - j] * x[k - j]
        x[k] = math.sqrt(s) * xi[k]
    return np.array(x, dtype=np.float64)


def bilinear_filter(xi, a0, a, c):
    xi = np.asarray(xi, dtype=np.float64).tolist()
    a = list(map(float, a))
    c = list(map(float, c))
    n, La, Lc = len(xi), len(a), len(c)
    x = [0.0] * n
    for k in range(n):
        s = a0
        for j in range(1, min(La, k) + 1):
            s += a[j - 1] * x[k - j]
        t = 0.0
        for j in range(1, min(Lc, k) + 1):
            t += c[j - 1] * x[k - j]
        x[k] = xi[k] * s + t
    return np.array(x, dtype=np.float64)
