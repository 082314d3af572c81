"""Optimal complexity/accuracy and well-formedness frontiers.

The IB frontier traces min I(M;W) - beta * I(W;U) over encoders q(w|m) with
Blahut-Arimoto iterations, annealing over a beta schedule. The
well-formedness frontier is found by correlation-clustering local search.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp, xlogy

from . import metrics
from .errors import ScheduleEmpty

log = logging.getLogger(__name__)


@dataclass
class FrontierCurve:
    betas: np.ndarray
    complexities: np.ndarray
    accuracies: np.ndarray
    encoders: list | None = None

    def __len__(self):
        return len(self.betas)

    def rows(self):
        return zip(self.betas.tolist(), self.complexities.tolist(), self.accuracies.tolist())


@dataclass
class WellformednessFrontier:
    ks: list
    values: list
    partitions: dict = field(default_factory=dict)

    def value_at(self, k: int) -> float:
        """Best value with at most ``k`` clusters (saturates past the largest k)."""
        best = -np.inf
        for kk, v in zip(self.ks, self.values):
            if kk <= k:
                best = max(best, v)
        if not np.isfinite(best):
            raise KeyError(f"no frontier value for k <= {k}")
        return best


def log_beta_schedule(beta_min=1.0, beta_max=2.0 ** 10, steps=64) -> np.ndarray:
    return np.geomspace(beta_min, beta_max, steps)


def default_schedule() -> np.ndarray:
    """64 betas in [1, 2], where nearly all of the color curve is traced, plus 15 up to 2^10."""
    return np.unique(np.concatenate([np.geomspace(1.0, 2.0, 64), np.geomspace(2.0, 2.0 ** 10, 16)]))


class _IBProblem:
    def __init__(self, prior, meanings):
        self.p = np.asarray(prior, dtype=float)
        self.M = np.asarray(meanings, dtype=float)
        self.negH = xlogy(self.M, self.M).sum(axis=1)

    def step(self, Q, beta):
        p, M = self.p, self.M
        qw = p @ Q
        alive = qw > 0
        out = np.zeros_like(Q)
        if not alive.any():
            return out + 1.0 / Q.shape[1]
        joint = p[:, None] * Q[:, alive]
        decoder = (joint.T @ M) / qw[alive][:, None]
        log_dec = np.log(np.maximum(decoder, 1e-300))
        kl = self.negH[:, None] - M @ log_dec.T
        logits = np.log(qw[alive])[None, :] - beta * kl
        logits -= logsumexp(logits, axis=1, keepdims=True)
        out[:, alive] = np.exp(logits)
        return out

    def objective(self, Q, beta):
        return metrics.ib_objective(Q, self.p, self.M, beta)

    def solve(self, Q, beta, tol, max_iters):
        for it in range(1, max_iters + 1):
            new = self.step(Q, beta)
            delta = np.abs(new - Q).max()
            Q = new
            if delta < tol:
                break
        return Q, it


def ib_step(encoder, prior, meanings, beta) -> np.ndarray:
    """One Blahut-Arimoto update of an IB encoder ``[n_meanings, n_words]``."""
    return _IBProblem(prior, meanings).step(np.asarray(encoder, dtype=float), beta)


def merge_words(Q, prior, tol=1e-6):
    """Drop unused words and merge words with (near-)identical posteriors.

    Exact for identical posteriors q(m|w): both information terms are unchanged.
    """
    qw = prior @ Q
    Q = Q[:, qw > 1e-14]
    qw = qw[qw > 1e-14]
    post = (prior[:, None] * Q / qw).T
    d = cdist(post, post, "chebyshev")
    groups = []
    assigned = np.full(len(qw), -1)
    for w in range(len(qw)):
        if assigned[w] >= 0:
            continue
        members = np.flatnonzero((d[w] < tol) & (assigned < 0))
        assigned[members] = len(groups)
        groups.append(members)
    return np.stack([Q[:, g].sum(axis=1) for g in groups], axis=1)


def _random_encoder(rng, n, k):
    Q = rng.random((n, k)) + 1e-3
    return Q / Q.sum(axis=1, keepdims=True)


def ib_frontier(prior, meanings, schedule=None, restarts: int = 5, tol: float = 1e-7,
                max_iters: int = 100, n_words: int | None = None, direction: str = "reverse",
                rng_seed: int = 0, keep_encoders: bool = False, perturb: float = 1e-3) -> FrontierCurve:
    """Anneal Blahut-Arimoto over ``schedule`` (ascending betas).

    ``direction="reverse"`` starts from the identity encoder at the largest
    beta and warm-starts downwards, merging coinciding words between betas.
    ``"forward"`` starts from the best of ``restarts`` random encoders at the
    smallest beta and warm-starts upwards from a slightly perturbed solution
    (the collapsed encoder is a fixed point at every beta).

    With warm starts a capped number of iterations per beta suffices: an
    unconverged encoder drifts along the curve rather than below it, and
    every reported point is achievable.
    """
    schedule = default_schedule() if schedule is None else np.asarray(schedule, dtype=float)
    if len(schedule) == 0:
        raise ScheduleEmpty("beta schedule is empty")
    if np.any(np.diff(schedule) < 0):
        raise ValueError("beta schedule must be sorted ascending")
    prob = _IBProblem(prior, meanings)
    n = len(prob.p)
    k = n if n_words is None else n_words
    rng = np.random.default_rng(rng_seed)

    results = {}
    if direction == "reverse":
        Q = np.eye(n, k) if k >= n else _random_encoder(rng, n, k)
        for beta in schedule[::-1]:
            Q, _ = prob.solve(Q, beta, tol, max_iters)
            Q = merge_words(Q, prob.p)
            results[beta] = Q
    elif direction == "forward":
        beta0 = schedule[0]
        best = None
        for _ in range(max(restarts, 1)):
            Q, _ = prob.solve(_random_encoder(rng, n, k), beta0, tol, max_iters)
            obj = prob.objective(Q, beta0)
            if best is None or obj < best[0]:
                best = (obj, Q)
        Q = best[1]
        results[beta0] = Q
        for beta in schedule[1:]:
            start = (1 - perturb) * Q + perturb * _random_encoder(rng, n, k)
            Q, _ = prob.solve(start, beta, tol, max_iters)
            results[beta] = Q
    else:
        raise ValueError(f"unknown annealing direction {direction!r}")

    betas, cs, accs, encs = [], [], [], []
    for beta in schedule:
        Q = results[beta]
        betas.append(beta)
        cs.append(metrics.complexity(Q, prob.p))
        accs.append(metrics.accuracy(Q, prob.p, prob.M))
        encs.append(Q)
    return _prune(np.array(betas), np.array(cs), np.array(accs), encs if keep_encoders else None)


def _prune(betas, cs, accs, encs):
    order = np.lexsort((-accs, cs))
    keep, best = [], -np.inf
    for i in order:
        if accs[i] > best + 1e-12:
            keep.append(i)
            best = accs[i]
    keep = np.array(keep, dtype=int)
    return FrontierCurve(betas[keep], cs[keep], accs[keep],
                         [encs[i] for i in keep] if encs is not None else None)


def upper_envelope(*curves: FrontierCurve) -> FrontierCurve:
    """Non-dominated union of several curves."""
    betas = np.concatenate([c.betas for c in curves])
    cs = np.concatenate([c.complexities for c in curves])
    accs = np.concatenate([c.accuracies for c in curves])
    return _prune(betas, cs, accs, None)


# --- well-formedness frontier ------------------------------------------------

def _local_search(A, labels, k):
    n = len(labels)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    G = A @ onehot
    rows = np.arange(n)
    while True:
        gains = G - G[rows, labels][:, None]
        gains[rows, labels] = 0.0
        flat = int(np.argmax(gains))
        i, b = divmod(flat, k)
        if gains[i, b] <= 1e-12:
            return labels
        a = labels[i]
        G[:, a] -= A[:, i]
        G[:, b] += A[:, i]
        labels[i] = b


def _canonical(labels):
    # relabel by first occurrence for stable output
    order = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        out[i] = order.setdefault(lab, len(order))
    return out


def cc_partition(sim, k: int, restarts: int = 10, rng=None, init=None):
    """Best partition into at most ``k`` clusters found by single-chip moves."""
    sim = np.asarray(sim, dtype=float)
    n = len(sim)
    A = 2.0 * sim - 1.0
    np.fill_diagonal(A, 0.0)
    rng = np.random.default_rng(rng)
    starts = [np.asarray(s, dtype=int).copy() for s in (init or [])]
    starts += [rng.integers(0, k, size=n) for _ in range(restarts)]
    best, best_val = None, -np.inf
    for labels in starts:
        labels = _local_search(A, labels, k)
        val = metrics.well_formedness(labels, sim)
        if val > best_val + 1e-12:
            best, best_val = labels.copy(), val
    return _canonical(best), best_val


def cc_frontier(sim, k_range, restarts: int = 10, rng_seed: int = 0) -> WellformednessFrontier:
    """Well-formedness frontier over ``k_range``; each K also seeds from the best K-1 answer."""
    rng = np.random.default_rng(rng_seed)
    ks, values, parts = [], [], {}
    prev = None
    for k in sorted(set(int(k) for k in k_range)):
        init = [prev] if prev is not None else None
        labels, val = cc_partition(sim, k, restarts, rng, init)
        ks.append(k)
        values.append(val)
        parts[k] = labels
        prev = labels
    return WellformednessFrontier(ks, values, parts)
