"""Brute-force exact inference by enumerating all 2^E edge assignments.

This is the reference oracle the approximate engines are tested against.
It is deliberately simple and hard-capped at 20 edge variables (about a
million assignments); anything larger raises instead of silently
grinding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError

__all__ = ["ExactResult", "exact_infer", "exact_map", "ENUMERATION_CAP"]

ENUMERATION_CAP = 20


@dataclass
class ExactResult:
    log_partition: float
    marginals: dict          # edge tuple -> P(edge on)
    map_assignment: tuple    # on-edges of the best assignment, canonical order
    map_log_score: float


def _assignment_scores(pot):
    """(masks, scores): bit matrix of all assignments and their log scores."""
    E = pot.edge_count
    if E > ENUMERATION_CAP:
        raise CapacityError(
            f"{E} edge variables exceed the enumeration cap of {ENUMERATION_CAP}")
    count = 1 << E
    masks = ((np.arange(count, dtype=np.int64)[:, None] >> np.arange(E)) & 1
             ).astype(np.float64)
    scores = masks @ pot.unary.data
    if pot.pair_count:
        both = masks[:, pot.pair_e1] * masks[:, pot.pair_e2]
        scores += both @ pot.pair_scores.data
    return masks, scores


def _logsumexp(x):
    m = np.max(x)
    return float(m + np.log(np.sum(np.exp(x - m))))


def exact_infer(pot):
    masks, scores = _assignment_scores(pot)
    log_z = _logsumexp(scores)
    marginals = {}
    for k, edge in enumerate(pot.edges):
        on = masks[:, k] == 1.0
        marginals[edge] = float(np.exp(_logsumexp(scores[on]) - log_z))
    map_edges, map_score = _map_from_scores(pot, masks, scores)
    return ExactResult(log_z, marginals, map_edges, map_score)


def _map_from_scores(pot, masks, scores):
    best = np.max(scores)
    # ties broken by the lexicographically smallest on-edge set
    candidates = np.nonzero(scores == best)[0]
    sets = [tuple(pot.edges[k] for k in range(pot.edge_count) if masks[i, k] == 1.0)
            for i in candidates]
    return min(sets), float(best)


def exact_map(pot):
    masks, scores = _assignment_scores(pot)
    edges, _ = _map_from_scores(pot, masks, scores)
    return edges
