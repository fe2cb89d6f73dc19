"""Pure-Python kernels over integer rank matrices.

``R[x][y]`` is the rank of ``d(x, y)`` among the sorted distinct distance
values of the space (rank 0 is distance 0).  Radii are passed as rank
thresholds ``t``: a point is inside a closed ball when its rank is <= t.
"""
from itertools import combinations


def ball_labels(R, t):
    n = len(R)
    labels = [0] * n
    for y in range(n):
        row = R[y]
        for z in range(n):
            if row[z] <= t:
                labels[y] = z
                break
    return labels


def cov_table(R, top):
    """``out[x][e][d]``: number of distinct e-balls meeting the d-ball at x."""
    n = len(R)
    out = [[[0] * (top + 1) for _ in range(top + 1)] for _ in range(n)]
    order = [sorted(range(n), key=R[x].__getitem__) for x in range(n)]
    for e in range(top + 1):
        labels = ball_labels(R, e)
        for x in range(n):
            row = R[x]
            seen = set()
            pos = 0
            for d in range(top + 1):
                while pos < n and row[order[x][pos]] <= d:
                    seen.add(labels[order[x][pos]])
                    pos += 1
                out[x][e][d] = len(seen)
    return out


def min_cover(R, x, e, d):
    n = len(R)
    target = {y for y in range(n) if R[x][y] <= d}
    balls = [{y for y in range(n) if R[c][y] <= e} for c in range(n)]
    for k in range(1, n + 1):
        for centers in combinations(range(n), k):
            covered = set()
            for c in centers:
                covered |= balls[c]
            if target <= covered:
                return k
    return 0


def subset_oscillation(Rs, e, masks, Rt):
    """Max image-diameter rank over all source subsets of diameter rank <= e."""
    n = len(Rs)
    m = len(Rt)
    size = 1 << n
    diam = [0] * size
    image = [0] * size
    tdiam = {0: 0}
    best = 0
    for mask in range(1, size):
        low = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        dm = diam[rest]
        r = rest
        row = Rs[low]
        while r:
            j = (r & -r).bit_length() - 1
            if row[j] > dm:
                dm = row[j]
            r &= r - 1
        diam[mask] = dm
        image[mask] = image[rest] | masks[low]
        if dm > e:
            continue
        im = image[mask]
        td = tdiam.get(im)
        if td is None:
            pts = [j for j in range(m) if im >> j & 1]
            td = max((Rt[a][b] for a in pts for b in pts), default=0)
            tdiam[im] = td
        if td > best:
            best = td
    return best
