"""Independent reference implementations used as test oracles.

Each one is written from the mathematical definition with explicit loops and
shares no code with the package.
"""

import itertools
import math

import numpy as np


def skipgram_counts(seq, k, m):
    """Count every (seq[t-k], seq[t]) pair by direct iteration."""
    counts = np.zeros((m, m), dtype=np.int64)
    for t in range(k, len(seq)):
        counts[seq[t - k], seq[t]] += 1
    return counts


def skipgram_probs(seq, k, m):
    c = skipgram_counts(seq, k, m).astype(float)
    out = np.zeros_like(c)
    for i in range(m):
        s = c[i].sum()
        if s > 0:
            out[i] = c[i] / s
    return out


def cmn(x, w):
    """Per-frame mean subtraction over a w-frame window shifted to stay inside."""
    t = x.shape[0]
    w = min(w, t)
    out = np.empty_like(x)
    for i in range(t):
        start = min(max(i - w // 2, 0), t - w)
        out[i] = x[i] - x[start:start + w].mean(axis=0)
    return out


def mel(f):
    return 2595.0 * math.log10(1.0 + f / 700.0)


def inv_mel(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def frame_cepstra(frame, rate, n_filters=26, n_ceps=13, nfft=None, prev_sample=None,
                  alpha=0.97):
    """Static cepstra of one raw frame: pre-emphasis, Hamming window, power
    spectrum by explicit DFT, triangular mel filters, log, orthonormal DCT-II.

    ``prev_sample`` is the sample preceding the frame (None for the first frame).
    """
    n = len(frame)
    if nfft is None:
        nfft = 1
        while nfft < n:
            nfft *= 2
    emph = [frame[0] - alpha * prev_sample if prev_sample is not None else frame[0]]
    emph += [frame[i] - alpha * frame[i - 1] for i in range(1, n)]
    win = [0.54 - 0.46 * math.cos(2 * math.pi * i / (n - 1)) for i in range(n)]
    xw = [emph[i] * win[i] for i in range(n)]
    power = []
    for k in range(nfft // 2 + 1):
        re = sum(xw[i] * math.cos(2 * math.pi * k * i / nfft) for i in range(n))
        im = -sum(xw[i] * math.sin(2 * math.pi * k * i / nfft) for i in range(n))
        power.append((re * re + im * im) / nfft)
    top = mel(rate / 2.0)
    edges = [inv_mel(top * j / (n_filters + 1)) for j in range(n_filters + 2)]
    logfb = []
    for f in range(n_filters):
        lo, mid, hi = edges[f], edges[f + 1], edges[f + 2]
        acc = 0.0
        for k, p in enumerate(power):
            hz = k * rate / nfft
            if lo < hz <= mid:
                acc += p * (hz - lo) / (mid - lo)
            elif mid < hz < hi:
                acc += p * (hi - hz) / (hi - mid)
        logfb.append(math.log(max(acc, np.finfo(float).eps)))
    ceps = []
    for q in range(n_ceps):
        scale = math.sqrt(1.0 / n_filters) if q == 0 else math.sqrt(2.0 / n_filters)
        ceps.append(scale * sum(logfb[f] * math.cos(math.pi * q * (2 * f + 1) / (2 * n_filters))
                                for f in range(n_filters)))
    return np.array(ceps)


def gmm_loglik(weights, means, variances, x):
    """Mean log of the mixture density, evaluated as a plain sum of probabilities."""
    total = 0.0
    for xt in x:
        p = 0.0
        for w, mu, var in zip(weights, means, variances):
            dens = 1.0
            for j in range(len(xt)):
                dens *= math.exp(-(xt[j] - mu[j]) ** 2 / (2 * var[j])) / math.sqrt(2 * math.pi * var[j])
            p += w * dens
        total += math.log(p)
    return total / len(x)


def qp_dual_bruteforce(k, y, c):
    """Maximise sum(a) - 1/2 a'Qa subject to y'a = 0 and 0 <= a <= C by
    enumerating every face of the box (each variable at 0, at C, or free) and
    solving the equality-constrained stationarity system on that face."""
    n = len(y)
    q = (y[:, None] * y[None, :]) * k
    best, best_a = -np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        free = [i for i in range(n) if pattern[i] == 2]
        a = np.array([0.0 if p == 0 else c for p in pattern], dtype=float)
        if free:
            fixed = [i for i in range(n) if pattern[i] != 2]
            nf = len(free)
            lhs = np.zeros((nf + 1, nf + 1))
            lhs[:nf, :nf] = q[np.ix_(free, free)]
            lhs[:nf, nf] = y[free]
            lhs[nf, :nf] = y[free]
            rhs = np.empty(nf + 1)
            rhs[:nf] = 1.0 - q[np.ix_(free, fixed)] @ a[fixed]
            rhs[nf] = -y[fixed] @ a[fixed]
            sol = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
            if np.max(np.abs(lhs @ sol - rhs)) > 1e-8:
                continue
            a[free] = sol[:nf]
        if abs(y @ a) > 1e-8 or a.min() < -1e-10 or a.max() > c + 1e-10:
            continue
        obj = a.sum() - 0.5 * a @ q @ a
        if obj > best:
            best, best_a = obj, a
    return best, best_a


def vad_surviving_frames(x, frame_len, hop, threshold_db):
    """Number of frames whose energy exceeds peak + threshold, by a plain loop."""
    n_frames = (len(x) - frame_len) // hop + 1
    energies = []
    for f in range(n_frames):
        e = sum(v * v for v in x[f * hop:f * hop + frame_len])
        energies.append(10 * math.log10(e) if e > 0 else -math.inf)
    peak = max(energies)
    return sum(1 for e in energies if e > peak + threshold_db), n_frames


def second_labels(decisions, duration):
    """Per-second labels from (start, end, label) windows, nearest centre,
    earlier window on ties; a plain loop over seconds and windows."""
    out = []
    for s in range(int(math.floor(duration + 1e-9))):
        mid = s + 0.5
        best, best_d = None, math.inf
        for start, end, label in decisions:
            d = abs((start + end) / 2 - mid)
            if d < best_d:
                best, best_d = label, d
        out.append(best)
    return out
