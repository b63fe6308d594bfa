# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled row reduction over F_p.

Same contract as ``galoisres._fallback.rref_inplace``; both produce the
unique reduced row echelon form, so results agree bit for bit.
"""


cdef inline long long _inverse(long long a, long long p):
    cdef long long t = 0, new_t = 1, r = p, new_r = a, q, tmp
    while new_r != 0:
        q = r // new_r
        tmp = t - q * new_t
        t = new_t
        new_t = tmp
        tmp = r - q * new_r
        r = new_r
        new_r = tmp
    if t < 0:
        t += p
    return t


def rref_inplace(long long[:, ::1] a, long long p):
    cdef Py_ssize_t nrows = a.shape[0]
    cdef Py_ssize_t ncols = a.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef long long inv, f, t
    pivots = []
    for c in range(ncols):
        if r >= nrows:
            break
        piv = -1
        for i in range(r, nrows):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, ncols):
                t = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = t
        inv = _inverse(a[r, c], p)
        if inv != 1:
            for j in range(c, ncols):
                a[r, j] = (a[r, j] * inv) % p
        for i in range(nrows):
            if i == r:
                continue
            f = a[i, c]
            if f == 0:
                continue
            for j in range(c, ncols):
                if a[r, j] != 0:
                    t = (a[i, j] - f * a[r, j]) % p
                    if t < 0:
                        t += p
                    a[i, j] = t
        pivots.append(c)
        r += 1
    return pivots
