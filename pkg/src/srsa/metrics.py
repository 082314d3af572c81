"""Complexity, accuracy, well-formedness and frontier distances (nats)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import NotAJoint, OutsideRange
from .game import ConditionalDistribution


@dataclass(frozen=True)
class EfficiencyPoint:
    complexity: float
    accuracy: float
    wellformedness: float = float("nan")
    n_terms: int = 0
    label: str = ""


def mutual_information(joint) -> float:
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 2 or np.any(joint < 0) or abs(joint.sum() - 1) > 1e-9:
        raise NotAJoint("joint must be a non-negative 2-D array summing to 1")
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    outer = px * py
    mask = joint > 0
    mi = float(np.sum(joint[mask] * (np.log(joint[mask]) - np.log(outer[mask]))))
    return max(mi, 0.0)


def _sender_probs(sender):
    if isinstance(sender, ConditionalDistribution):
        probs = sender.probs
        keep = ~sender.flagged
    else:
        probs = np.asarray(sender, dtype=float)
        keep = np.ones(len(probs), dtype=bool)
    return probs, keep


def _restricted_prior(prior, keep):
    p = np.asarray(prior, dtype=float) * keep
    return p / p.sum()


def complexity(sender, prior) -> float:
    """I(M;W) of p(m) S(w|m); flagged sender rows are left out."""
    probs, keep = _sender_probs(sender)
    p = _restricted_prior(prior, keep)
    return mutual_information(p[:, None] * probs)


def accuracy(sender, prior, meanings) -> float:
    """I(W;U) with p(u, w) = sum_m p(m) S(w|m) m(u)."""
    probs, keep = _sender_probs(sender)
    p = _restricted_prior(prior, keep)
    joint = (p[:, None] * meanings).T @ probs
    return mutual_information(joint / joint.sum())


def ib_objective(sender, prior, meanings, beta) -> float:
    return complexity(sender, prior) - beta * accuracy(sender, prior, meanings)


def mode_map(sender) -> np.ndarray:
    """Most probable word per meaning (ties to the lowest index)."""
    probs, _ = _sender_probs(sender)
    return np.argmax(probs, axis=1)


def n_terms(assignment) -> int:
    return int(len(np.unique(assignment)))


def well_formedness(assignment, sim, normalize: bool = False) -> float:
    """Within-category similarity plus across-category dissimilarity.

    Sums sim(i, j) over same-term pairs and 1 - sim(i, j) over the rest, for
    unordered pairs i < j. ``normalize`` divides by the number of pairs.
    """
    a = np.asarray(assignment)
    sim = np.asarray(sim, dtype=float)
    same = a[:, None] == a[None, :]
    vals = np.where(same, sim, 1.0 - sim)
    iu = np.triu_indices(len(a), k=1)
    total = float(vals[iu].sum())
    if normalize:
        return total / max(len(iu[0]), 1)
    return total


def efficiency_point(sender, prior, meanings, sim=None, label="") -> EfficiencyPoint:
    assignment = mode_map(sender)
    wf = well_formedness(assignment, sim) if sim is not None else float("nan")
    return EfficiencyPoint(complexity(sender, prior), accuracy(sender, prior, meanings),
                           wf, n_terms(assignment), label)


def frontier_accuracy_at(curve, c: float) -> float:
    xs, ys = _curve_xy(curve)
    if c > xs[-1] + 1e-9 or c < xs[0] - 1e-9:
        raise OutsideRange(f"complexity {c:.6g} outside frontier domain [{xs[0]:.6g}, {xs[-1]:.6g}]")
    return float(np.interp(c, xs, ys))


def frontier_distance(point, curve) -> float:
    """Accuracy deficit below the linearly interpolated frontier."""
    return frontier_accuracy_at(curve, point.complexity) - point.accuracy


def _curve_xy(curve):
    # the single-word encoder always sits at the origin, so the curve starts there
    if hasattr(curve, "complexities"):
        xs, ys = np.asarray(curve.complexities, float), np.asarray(curve.accuracies, float)
    else:
        pts = np.asarray(curve, dtype=float)
        xs, ys = pts[:, 0], pts[:, 1]
    if len(xs) == 0 or xs[0] > 0:
        xs, ys = np.concatenate([[0.0], xs]), np.concatenate([[0.0], ys])
    return xs, ys
