"""Pure-Python/numpy versions of the compiled kernels."""

import numpy as np


def skipgram_counts(seq, k, m):
    seq = np.asarray(seq, dtype=np.int64)
    pairs = seq[:-k] * m + seq[k:] if seq.size > k else np.empty(0, np.int64)
    return np.bincount(pairs, minlength=m * m).reshape(m, m).astype(np.int64)


def markov_walk(cum, u, start):
    cum = np.asarray(cum)
    n = len(u)
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out
    last = cum.shape[1] - 1
    rows = [list(r) for r in cum]
    s = int(start)
    out[0] = s
    for t in range(1, n):
        row = rows[s]
        ut = u[t]
        j = 0
        while j < last and row[j] <= ut:
            j += 1
        s = j
        out[t] = s
    return out


def smo(K, y, C, tol, max_iter):
    """SMO with second-order working-set selection on a precomputed Gram."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    alpha = np.zeros(n)
    G = -np.ones(n)
    diag = np.diag(K).copy()
    pos = y > 0
    tau = 1e-12
    it = 0
    while it < max_iter:
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (~pos & (alpha < C)) | (pos & (alpha > 0))
        v = -y * G
        if not up.any() or not low.any():
            break
        cand = np.where(up, v, -np.inf)
        i = int(np.argmax(cand))
        gmax = cand[i]
        gmin = np.min(v[low])
        b = gmax - v
        ok = low & (b > 0)
        if not ok.any() or gmax - gmin < tol:
            break
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a <= 0, tau, a)
        score = np.where(ok, -(b * b) / a, np.inf)
        j = int(np.argmin(score))
        it += 1

        old_ai, old_aj = alpha[i], alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = tau
        ai, aj = old_ai, old_aj
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        dai = (ai - old_ai) * y[i]
        daj = (aj - old_aj) * y[j]
        G += y * (K[i] * dai + K[j] * daj)
    return alpha, G, it
