# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twins of ``_pykernels``; same signatures, same results."""
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t


cdef int* _matrix(R, int n) except NULL:
    cdef int* buf = <int*> malloc(n * n * sizeof(int) + 1)
    if buf == NULL:
        raise MemoryError()
    cdef int i, j
    for i in range(n):
        row = R[i]
        for j in range(n):
            buf[i * n + j] = row[j]
    return buf


cdef void _labels(int* M, int n, int t, int* out) noexcept:
    cdef int y, z
    for y in range(n):
        out[y] = y
        for z in range(n):
            if M[y * n + z] <= t:
                out[y] = z
                break


def ball_labels(R, int t):
    cdef int n = len(R)
    if n == 0:
        return []
    cdef int* M = _matrix(R, n)
    cdef int* lab = <int*> malloc(n * sizeof(int))
    try:
        _labels(M, n, t, lab)
        return [lab[i] for i in range(n)]
    finally:
        free(M)
        free(lab)


def cov_table(R, int top):
    cdef int n = len(R)
    if n == 0:
        return []
    cdef int* M = _matrix(R, n)
    cdef int* lab = <int*> malloc(n * sizeof(int))
    cdef char* seen = <char*> malloc(n)
    cdef int x, y, e, d, count
    out = [[[0] * (top + 1) for _ in range(top + 1)] for _ in range(n)]
    try:
        for e in range(top + 1):
            _labels(M, n, e, lab)
            for x in range(n):
                row_e = out[x][e]
                for d in range(top + 1):
                    for y in range(n):
                        seen[y] = 0
                    count = 0
                    for y in range(n):
                        if M[x * n + y] <= d and not seen[lab[y]]:
                            seen[lab[y]] = 1
                            count += 1
                    row_e[d] = count
        return out
    finally:
        free(M)
        free(lab)
        free(seen)


cdef int _popcount(unsigned int v) noexcept:
    cdef int c = 0
    while v:
        v &= v - 1
        c += 1
    return c


def min_cover(R, int x, int e, int d):
    cdef int n = len(R)
    if n > 20:
        raise ValueError("min_cover kernel supports at most 20 points")
    cdef int* M = _matrix(R, n)
    cdef unsigned int size = 1u << n
    cdef unsigned int* union_ = <unsigned int*> malloc(size * sizeof(unsigned int))
    cdef unsigned int* ball = <unsigned int*> malloc((n + 1) * sizeof(unsigned int))
    cdef unsigned int target = 0, mask, low, rest
    cdef int c, y, best = n + 1, k, lowi
    try:
        for y in range(n):
            if M[x * n + y] <= d:
                target |= 1u << y
        for c in range(n):
            ball[c] = 0
            for y in range(n):
                if M[c * n + y] <= e:
                    ball[c] |= 1u << y
        union_[0] = 0
        for mask in range(1, size):
            low = mask & (~mask + 1)
            rest = mask & (mask - 1)
            lowi = 0
            while (low >> lowi) != 1:
                lowi += 1
            union_[mask] = union_[rest] | ball[lowi]
            if (union_[mask] & target) == target:
                k = _popcount(mask)
                if k < best:
                    best = k
        return best if best <= n else 0
    finally:
        free(M)
        free(union_)
        free(ball)


def subset_oscillation(Rs, int e, masks, Rt):
    cdef int n = len(Rs)
    cdef int m = len(Rt)
    if n > 20 or m > 64:
        raise ValueError("subset_oscillation kernel supports <= 20 sources, <= 64 targets")
    cdef int* S = _matrix(Rs, n)
    cdef int* T = _matrix(Rt, m) if m else <int*> malloc(sizeof(int))
    cdef unsigned int size = 1u << n
    cdef int* diam = <int*> malloc(size * sizeof(int))
    cdef uint64_t* image = <uint64_t*> malloc(size * sizeof(uint64_t))
    cdef uint64_t* mk = <uint64_t*> malloc((n + 1) * sizeof(uint64_t))
    cdef unsigned int mask, rest, r
    cdef int low, j, a, b, dm, td, best = 0
    cdef uint64_t im
    try:
        for j in range(n):
            mk[j] = <uint64_t> masks[j]
        diam[0] = 0
        image[0] = 0
        for mask in range(1, size):
            low = 0
            while not (mask >> low) & 1:
                low += 1
            rest = mask & (mask - 1)
            dm = diam[rest]
            r = rest
            while r:
                j = 0
                while not (r >> j) & 1:
                    j += 1
                if S[low * n + j] > dm:
                    dm = S[low * n + j]
                r &= r - 1
            diam[mask] = dm
            image[mask] = image[rest] | mk[low]
            if dm > e:
                continue
            im = image[mask]
            td = 0
            for a in range(m):
                if (im >> a) & 1:
                    for b in range(a + 1, m):
                        if (im >> b) & 1 and T[a * m + b] > td:
                            td = T[a * m + b]
            if td > best:
                best = td
        return best
    finally:
        free(S)
        free(T)
        free(diam)
        free(image)
        free(mk)
