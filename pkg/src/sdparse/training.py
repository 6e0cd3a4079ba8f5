"""Losses, optimizer, training loop, and finite-difference gradient checks.

The objective interpolates a labeled and an unlabeled term,

    L = lambda * L_label + (1 - lambda) * L_edge,

where L_edge is the summed Bernoulli cross-entropy of the final inference
marginals against gold edge existence (over every candidate edge), and
L_label is the summed softmax cross-entropy of the label scores over gold
edges only, so the label scorer never trains on absent edges.

The optimizer is Adam with beta1=0, beta2=0.95 and bias correction, a
stepped learning-rate halving, and a one-time switch to AMSGrad (element-
wise max of second moments) when dev F1 stalls. L2 regularization is added
straight to the gradients. Sentences longer than a cap are dropped;
batches pack length-sorted sentences up to a token budget and are
shuffled per epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError, NumericError
from .metrics import f1
from .pipeline import parse_sentence, run_inference, sentence_potentials

__all__ = [
    "TrainConfig", "edge_loss", "label_loss", "combined_loss",
    "Optimizer", "make_batches", "train", "TrainResult",
    "gradcheck", "GradCheckResult", "sentence_loss",
]


@dataclass
class TrainConfig:
    """Optimization hyperparameters. Defaults are desk scale; ``full()``
    restores the full-scale budgets."""

    interpolation: float = 0.07   # weight on the label loss
    learning_rate: float = 1e-2
    beta1: float = 0.0
    beta2: float = 0.95
    epsilon: float = 1e-8
    lr_decay: float = 0.5
    decay_every_steps: int = 10000
    amsgrad_patience_steps: int = 5000
    early_stop_steps: int = 10000
    max_steps: int = 5000
    batch_token_budget: int = 500
    iterations: int = 3
    inference: str = "mf"
    l2: float = None
    seed: int = 1
    max_sentence_length: int = 60
    threshold: float = 0.5
    logit_clamp: float = 30.0

    def __post_init__(self):
        if self.l2 is None:
            self.l2 = 3e-9 if self.inference == "mf" else 3e-8

    @classmethod
    def desk(cls, **overrides):
        return cls(**overrides)

    @classmethod
    def full(cls, **overrides):
        base = dict(batch_token_budget=6000, max_steps=100000)
        base.update(overrides)
        return cls(**base)

    def validate(self):
        if not 0.0 <= self.interpolation <= 1.0:
            raise ConfigError(f"interpolation must be in [0,1], got {self.interpolation}")
        if self.inference not in ("mf", "lbp"):
            raise ConfigError(f"inference must be 'mf' or 'lbp', got {self.inference!r}")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        for name in ("learning_rate", "decay_every_steps", "max_steps",
                     "batch_token_budget", "max_sentence_length"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 <= self.threshold < 1.0:
            raise ConfigError("threshold must be in [0,1)")


# ------------------------------------------------------------------- losses

def edge_loss(state, gold):
    """Summed log loss of final marginals against gold edge existence."""
    pot = state.pot
    on = np.zeros(pot.edge_count)
    for head, dep in gold.edge_pairs():
        if (head, dep) in pot.index:
            on[pot.index[(head, dep)]] = 1.0
    log_q0, log_q1 = state.final_log_marginals()
    picked = ad.add(ad.mul(ad.constant(on), log_q1),
                    ad.mul(ad.constant(1.0 - on), log_q0))
    return ad.neg(ad.tensor_sum(picked))


def label_loss(scores, gold, vocab):
    """Summed softmax cross-entropy of label scores over gold edges."""
    index = scores.edge_set.index
    rows, gold_ids = [], []
    for head, dep in sorted(gold.edge_pairs()):
        rows.append(index[(head, dep)])
        gold_ids.append(vocab.label_id(gold.label_of(head, dep)))
    if not rows:
        return ad.constant(0.0)
    picked = ad.take(scores.s_label, np.asarray(rows, dtype=np.intp))
    lse = ad.logsumexp(picked, axis=1)
    onehot = np.zeros((len(rows), scores.s_label.shape[1]))
    onehot[np.arange(len(rows)), gold_ids] = 1.0
    gold_scores = ad.tensor_sum(ad.mul(picked, ad.constant(onehot)), axis=1)
    return ad.tensor_sum(ad.sub(lse, gold_scores))


def combined_loss(edge_term, label_term, interpolation):
    lam = float(interpolation)
    return ad.add(ad.mul(ad.constant(lam), label_term),
                  ad.mul(ad.constant(1.0 - lam), edge_term))


def sentence_loss(model, sentence, gold, cfg, train=False, rng=None, clamp="cfg"):
    """Combined loss of one sentence under the configured engine."""
    scores, pot = sentence_potentials(model, sentence, train=train, rng=rng)
    clamp_val = cfg.logit_clamp if clamp == "cfg" else clamp
    state = run_inference(pot, cfg.inference, cfg.iterations, clamp_val)
    return combined_loss(edge_loss(state, gold),
                         label_loss(scores, gold, model.vocab),
                         cfg.interpolation)


# ---------------------------------------------------------------- optimizer

class Optimizer:
    """Adam with bias correction, stepped lr decay, optional AMSGrad mode,
    and L2 regularization added to the raw gradients."""

    def __init__(self, params, cfg):
        self.params = params
        self.cfg = cfg
        self.step_count = 0
        self.mode = "adam"
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v_max = None

    def switch_to_amsgrad(self):
        """One-way switch; current second moments seed the running max."""
        if self.mode == "adam":
            self.mode = "amsgrad"
            self.v_max = {k: v.copy() for k, v in self.v.items()}

    def learning_rate(self):
        c = self.cfg
        return c.learning_rate * c.lr_decay ** (self.step_count // c.decay_every_steps)

    def apply(self):
        """One update from the gradients currently stored on the params."""
        c = self.cfg
        lr = self.learning_rate()
        self.step_count += 1
        t = self.step_count
        for name, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise NumericError(
                    f"non-finite gradient in parameter {name!r} at step {t}")
            if c.l2:
                g = g + c.l2 * p.data
            m = self.m[name]
            v = self.v[name]
            m *= c.beta1
            m += (1.0 - c.beta1) * g
            v *= c.beta2
            v += (1.0 - c.beta2) * g * g
            m_hat = m / (1.0 - c.beta1 ** t)
            if self.mode == "amsgrad":
                np.maximum(self.v_max[name], v, out=self.v_max[name])
                v_eff = self.v_max[name]
            else:
                v_eff = v
            v_hat = v_eff / (1.0 - c.beta2 ** t)
            p.data -= lr * m_hat / (np.sqrt(v_hat) + c.epsilon)


# ----------------------------------------------------------------- batching

def make_batches(data, token_budget, rng):
    """Pack length-sorted sentences into batches of at most ``token_budget``
    tokens, then shuffle the batch order."""
    order = sorted(range(len(data)), key=lambda i: (data[i][0].n, i))
    batches = []
    current, current_tokens = [], 0
    for i in order:
        n = data[i][0].n
        if current and current_tokens + n > token_budget:
            batches.append(current)
            current, current_tokens = [], 0
        current.append(data[i])
        current_tokens += n
    if current:
        batches.append(current)
    rng.shuffle(batches)
    return batches


# -------------------------------------------------------------------- train

@dataclass
class TrainResult:
    best_score: float
    best_step: int
    steps: int
    history: list = field(default_factory=list)
    stopped_early: bool = False
    switched_to_amsgrad: bool = False


def _dev_labeled_f1(model, data, cfg):
    preds, golds = [], []
    for sentence, gold in data:
        graph, _, _ = parse_sentence(model, sentence, cfg.inference,
                                     cfg.iterations, cfg.threshold, cfg.logit_clamp)
        preds.append(graph)
        golds.append(gold)
    return f1(preds, golds, labeled=True)[2]


def train(model, train_data, dev_data, cfg, log=None):
    """Train in place; the model ends at its best-dev-F1 parameters.

    Sentences over the length cap are dropped from training (kept in dev).
    One history row per epoch goes to ``log`` if given.
    """
    cfg.validate()
    usable = [(s, g) for s, g in train_data if s.n <= cfg.max_sentence_length]
    if not usable:
        raise ConfigError("no training sentences under the length cap")
    batch_rng = np.random.default_rng(cfg.seed)
    dropout_rng = np.random.default_rng(cfg.seed + 1)

    optimizer = Optimizer(model.params, cfg)
    result = TrainResult(best_score=-1.0, best_step=0, steps=0)
    best_arrays = model.state_arrays()

    while optimizer.step_count < cfg.max_steps:
        epoch_losses = []
        for batch in make_batches(usable, cfg.batch_token_budget, batch_rng):
            model.zero_grad()
            seed = 1.0 / len(batch)
            for sentence, gold in batch:
                loss = sentence_loss(model, sentence, gold, cfg,
                                     train=True, rng=dropout_rng)
                ad.backward([loss], [seed])
                epoch_losses.append(loss.item())
            optimizer.apply()
            if optimizer.step_count >= cfg.max_steps:
                break

        result.steps = optimizer.step_count
        score = _dev_labeled_f1(model, dev_data, cfg) if dev_data else 0.0
        row = {
            "epoch": len(result.history) + 1,
            "step": optimizer.step_count,
            "train_loss": float(np.mean(epoch_losses)),
            "dev_labeled_f1": score,
            "lr": optimizer.learning_rate(),
            "optimizer": optimizer.mode,
        }
        result.history.append(row)
        if log is not None:
            log(row)

        if score > result.best_score:
            result.best_score = score
            result.best_step = optimizer.step_count
            best_arrays = model.state_arrays()
        else:
            stalled = optimizer.step_count - result.best_step
            if stalled >= cfg.amsgrad_patience_steps and optimizer.mode == "adam":
                optimizer.switch_to_amsgrad()
                result.switched_to_amsgrad = True
            if stalled >= cfg.early_stop_steps:
                result.stopped_early = True
                break
        if dev_data and result.best_score >= 1.0:
            break

    model.load_state_arrays(best_arrays)
    return result


# ---------------------------------------------------------------- gradcheck

@dataclass
class GradCheckResult:
    max_rel_error: float
    per_combo: dict          # (engine, iterations) -> max rel error
    coords_checked: int

    def ok(self, threshold=1e-4):
        return self.max_rel_error <= threshold


def _rel_error(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def gradcheck(model, sentence, gold, cfg, engines=("mf", "lbp"),
              iteration_counts=(1, 2, 3), coords=200, step=1e-3, seed=0):
    """Central-difference check of end-to-end loss gradients.

    Samples at least ``coords`` coordinates per engine/depth combination,
    spread over every parameter group; dropout is off and the logit clamp
    is disabled so the loss is smooth at the checked points. The leaky
    activations are piecewise linear, so a coordinate whose +-step
    interval happens to straddle a kink is retried with a smaller step;
    a genuine backward bug stays visible at every step size.
    """
    rng = np.random.default_rng(seed)
    groups = model.param_groups()
    names_by_group = [sorted(names) for _, names in sorted(groups.items())]

    def pick_coordinates():
        picks = []
        per_group = max(1, coords // len(names_by_group))
        for names in names_by_group:
            for _ in range(per_group):
                name = names[rng.integers(len(names))]
                picks.append((name, int(rng.integers(model.params[name].size))))
        while len(picks) < coords:
            name = rng.choice(sorted(model.params))
            picks.append((name, int(rng.integers(model.params[name].size))))
        return picks

    per_combo = {}
    total = 0
    for engine in engines:
        for its in iteration_counts:
            combo_cfg = replace(cfg, inference=engine, iterations=its)

            def loss_value():
                return sentence_loss(model, sentence, gold, combo_cfg,
                                     clamp=None).item()

            model.zero_grad()
            loss = sentence_loss(model, sentence, gold, combo_cfg, clamp=None)
            ad.backward([loss], [1.0])
            analytic = {k: (np.zeros_like(p.data) if p.grad is None else p.grad.copy())
                        for k, p in model.params.items()}

            worst = 0.0
            for name, flat in pick_coordinates():
                data = model.params[name].data
                idx = np.unravel_index(flat, data.shape)
                keep = data[idx]
                best = math.inf
                for h in (step, step / 10.0, step / 100.0):
                    data[idx] = keep + h
                    up = loss_value()
                    data[idx] = keep - h
                    down = loss_value()
                    data[idx] = keep
                    fd = (up - down) / (2.0 * h)
                    best = min(best, _rel_error(analytic[name][idx], fd))
                    if best < 1e-7:
                        break
                worst = max(worst, best)
                total += 1
            per_combo[(engine, its)] = worst

    return GradCheckResult(max(per_combo.values()), per_combo, total)
