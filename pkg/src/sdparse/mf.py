"""Mean-field inference unrolled for a fixed number of iterations.

Each edge variable keeps an independent Bernoulli posterior Q. One
synchronous update recomputes every logit from the previous iterate:

    logit^t(e)  =  s_edge(e)  +  sum over parts {e, f} of Q^{t-1}(f) * s_part

so a part couples its two member edges symmetrically: each receives the
partner's current on-probability times the part score. Updates are
Jacobi-style (all edges from the same snapshot), which makes the result
independent of edge order. Logits are clamped to +-clamp before the
sigmoid; the whole trajectory is kept and is differentiable end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

__all__ = ["BeliefState", "mf_init", "mf_step", "mf_run",
           "mf_second_order_field", "mf_backward", "DEFAULT_CLAMP"]

DEFAULT_CLAMP = 30.0


def _clamped(t, clamp):
    return t if clamp is None else ad.clamp(t, -clamp, clamp)


@dataclass
class BeliefState:
    """Posterior trajectory: logits[t] and qs[t] = sigmoid(logits[t]) for
    t = 0..T, aligned with the potential's edge order."""

    pot: object
    clamp: float
    logits: list = field(default_factory=list)  # Tensors, (E,)
    qs: list = field(default_factory=list)      # Tensors, (E,)

    @property
    def iterations(self):
        return len(self.logits) - 1

    def q1(self, t=-1):
        return self.qs[t].data

    def marginals(self, t=-1):
        q = self.qs[t].data
        return {e: float(q[k]) for k, e in enumerate(self.pot.edges)}

    @property
    def marginal_tensor(self):
        return self.qs[-1]

    def final_log_marginals(self):
        """(log Q(0), log Q(1)) as tensors, stable for extreme logits."""
        logit = self.logits[-1]
        return ad.neg(ad.softplus(logit)), ad.neg(ad.softplus(ad.neg(logit)))

    def coupling_terms(self, t):
        """Signed per-part field contributions that built iteration t.

        Yields (src_edge, dst_edge, part_type, part, value) with
        value = Q^{t-1}(src) * s_part, for t in 1..T.
        """
        pot = self.pot
        q = self.qs[t - 1].data
        s = pot.pair_scores.data
        for p in range(pot.pair_count):
            a, b = pot.pair_e1[p], pot.pair_e2[p]
            kind, part = pot.pair_types[p], pot.pair_parts[p]
            yield pot.edges[b], pot.edges[a], kind, part, float(q[b] * s[p])
            yield pot.edges[a], pot.edges[b], kind, part, float(q[a] * s[p])


def mf_init(pot, clamp=DEFAULT_CLAMP):
    """Iteration 0: posterior logits are just the unary scores."""
    logit = _clamped(pot.unary, clamp)
    return BeliefState(pot, clamp, [logit], [ad.sigmoid(logit)])


def mf_step(state):
    """Append one synchronous update to the trajectory."""
    pot = state.pot
    E = pot.edge_count
    q_prev = state.qs[-1]
    field_vec = ad.constant(np.zeros(E))
    if pot.pair_count:
        to_e1 = ad.mul(ad.take(q_prev, pot.pair_e2), pot.pair_scores)
        to_e2 = ad.mul(ad.take(q_prev, pot.pair_e1), pot.pair_scores)
        field_vec = ad.add(ad.segment_sum(to_e1, pot.pair_e1, E),
                           ad.segment_sum(to_e2, pot.pair_e2, E))
    logit = _clamped(ad.add(pot.unary, field_vec), state.clamp)
    state.logits.append(logit)
    state.qs.append(ad.sigmoid(logit))
    return state


def mf_run(pot, iterations=3, clamp=DEFAULT_CLAMP):
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    state = mf_init(pot, clamp)
    for _ in range(iterations):
        mf_step(state)
    return state


def mf_second_order_field(state, edge):
    """Field the latest iterate induces on one edge (scalar, by direct
    summation over the parts containing it)."""
    pot = state.pot
    k = pot.index[tuple(edge)]
    q = state.qs[-1].data
    s = pot.pair_scores.data
    total = 0.0
    for p in range(pot.pair_count):
        if pot.pair_e1[p] == k:
            total += q[pot.pair_e2[p]] * s[p]
        elif pot.pair_e2[p] == k:
            total += q[pot.pair_e1[p]] * s[p]
    return total


def mf_backward(upstream, state):
    """Gradients of <upstream, Q^(T)> w.r.t. the potential scores.

    Also propagates further down if the potentials came from the scorer.
    """
    pot = state.pot
    ad.backward([state.marginal_tensor], [np.asarray(upstream, dtype=np.float64)])
    unary_grad = pot.unary.grad
    pair_grad = pot.pair_scores.grad
    return {
        "unary": np.zeros(pot.edge_count) if unary_grad is None else unary_grad,
        "pairs": np.zeros(pot.pair_count) if pair_grad is None else pair_grad,
    }
