"""Pure-numpy decision kernels; the compiled extension mirrors these exactly.

Every reduction over the alphabet axis runs in ascending index order (numpy's
contiguous small-axis sum), matching the compiled loops, so both backends see
the same float rounding.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def lrt_statistics(freqs: np.ndarray, llr: np.ndarray) -> np.ndarray:
    """Rowwise D(f||P0) - D(f||P1) in its linear form sum_a f_a * ln(P1_a/P0_a)."""
    return (freqs * llr).sum(axis=1)


def glrt_statistics(freqs: np.ndarray, logp0: np.ndarray) -> np.ndarray:
    """Rowwise D(f||P0) with the 0*ln(0) = 0 convention."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(freqs > 0.0, freqs * (np.log(freqs) - logp0), 0.0)
    return terms.sum(axis=1)


def interp_statistics(freqs: np.ndarray, logp0: np.ndarray, logt: np.ndarray,
                      beta: float) -> np.ndarray:
    """Rowwise beta*D(f||T') - D(f||P0); logt broadcasts over rows or pairs them."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(
            freqs > 0.0,
            freqs * ((beta - 1.0) * np.log(freqs) - beta * logt + logp0),
            0.0,
        )
    return terms.sum(axis=1)


def gjs_statistics(fx: np.ndarray, fX: np.ndarray, alpha: float) -> np.ndarray:
    """Rowwise GJS_alpha(fx, fX); fX broadcasts over rows or pairs them."""
    fx = np.atleast_2d(fx)
    fX_b = np.broadcast_to(np.atleast_2d(fX), fx.shape)
    mix = (fx + alpha * fX_b) / (1.0 + alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmix = np.log(mix)
        t1 = np.where(fx > 0.0, fx * (np.log(fx) - logmix), 0.0)
        t2 = np.where(fX_b > 0.0, fX_b * (np.log(fX_b) - logmix), 0.0)
    return t1.sum(axis=1) + alpha * t2.sum(axis=1)


def seq_segment(counts_x: np.ndarray, counts_X: np.ndarray,
                test_syms: np.ndarray, train_syms: np.ndarray,
                train_take: np.ndarray, p0: np.ndarray, logp0: np.ndarray,
                n_design: int, delta: float, c_pen: float, t_start: int):
    """Advance one trial through a segment of steps; stop at the first crossing.

    Step i of the segment is time t = t_start + i + 1 and ingests one test
    symbol plus train_take[i] training symbols. counts_x / counts_X carry the
    cumulative symbol counts at t_start and are updated in place to the state
    at the stopping step (or the segment end).

    Returns (stopped, decision, tau, statistic); decision is -1 while running.
    """
    dim = p0.shape[0]
    steps = test_syms.shape[0]

    onehot_x = np.zeros((steps, dim), dtype=np.int64)
    onehot_x[np.arange(steps), test_syms] = 1
    cx = onehot_x.cumsum(axis=0) + counts_x

    take_cum = train_take.cumsum()
    if train_syms.shape[0] > 0:
        onehot_X = np.zeros((train_syms.shape[0] + 1, dim), dtype=np.int64)
        onehot_X[np.arange(1, train_syms.shape[0] + 1), train_syms] = 1
        csum_X = onehot_X.cumsum(axis=0)
    else:
        csum_X = np.zeros((1, dim), dtype=np.int64)
    cX = csum_X[take_cum] + counts_X

    t_vals = t_start + 1 + np.arange(steps, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        k_t = cX.sum(axis=1).astype(np.float64)
        fX = cX / k_t[:, None]
        tprime = (1.0 - delta) * fX + delta / dim
        logt = np.log(tprime)
        stat = (cx * (logp0 - logt)).sum(axis=1)
        pen = c_pen * np.log(t_vals + 1.0)
        gamma0 = n_design * (p0 * (logp0 - logt)).sum(axis=1) + pen
        d_train = np.where(fX > 0.0, fX * (np.log(fX) - logp0), 0.0).sum(axis=1)
        gamma1 = n_design * d_train + pen

        # the rule only starts checking at t = n_design
        armed = t_vals >= n_design
        hit0 = armed & (stat >= gamma0)
        hit1 = armed & (stat <= -gamma1)
    hit = hit0 | hit1
    if not hit.any():
        counts_x[:] = cx[-1]
        counts_X[:] = cX[-1]
        return False, -1, t_start + steps, float(stat[-1])
    i = int(np.argmax(hit))
    counts_x[:] = cx[i]
    counts_X[:] = cX[i]
    decision = 0 if hit0[i] else 1
    return True, decision, t_start + i + 1, float(stat[i])
