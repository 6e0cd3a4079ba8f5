"""Is the end-to-end gradient right?  Ask finite differences.

The training loss is differentiated through the whole stack: embeddings,
encoder, biaffine and trilinear scorers, and the unfolded inference
iterations themselves.  This script perturbs individual parameters of a
tiny model and compares the measured loss slope against the backward
pass, for both engines at several unfolding depths.

Run:  python3 demos/gradient_check.py
"""

import numpy as np

from sdparse.model import ModelConfig, ParserModel
from sdparse.sdp_io import build_vocab
from sdparse.synthetic import toy_corpus
from sdparse.training import TrainConfig, gradcheck

data = toy_corpus(np.random.default_rng(5), size=2, min_len=3, max_len=3)
sentence, gold = data[0]
vocab = build_vocab(data, min_count=1)
model = ParserModel(
    ModelConfig(word_dim=4, pos_dim=3, encoder_layers=1, encoder_hidden=4,
                unary_dim=5, binary_dim=4),
    vocab, np.random.default_rng(11))

sizes = {group: sum(model.params[n].size for n in names)
         for group, names in sorted(model.param_groups().items())}
print(f"model: {sum(sizes.values())} parameters in {len(sizes)} groups")
for group, size in sizes.items():
    print(f"  {group:>16}: {size}")

print("\nsampling 200 coordinates per engine/depth combination ...")
result = gradcheck(model, sentence, gold, TrainConfig(), coords=200, seed=0)

print(f"\n{'engine':>6} {'depth':>5} {'max relative error':>20}")
for (engine, iterations), err in sorted(result.per_combo.items()):
    print(f"{engine:>6} {iterations:>5} {err:>20.3e}")
print(f"\nchecked {result.coords_checked} coordinates; "
      f"overall max relative error = {result.max_rel_error:.3e}")
print("acceptable" if result.ok() else "NOT ACCEPTABLE",
      "(threshold 1e-4; double precision typically lands near 1e-9)")
