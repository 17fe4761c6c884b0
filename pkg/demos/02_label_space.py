"""Label-space sparsity and per-n diagnostics on a synthetic corpus.

Run: python3 demos/02_label_space.py
"""

import random

from treetag import (
    encode_relative,
    encode_dynamic,
    label_space_stats,
    per_n_f1,
    random_tree,
)
from treetag.encodings import EncodedSentence, NComponent, TagLabel
from treetag.metrics import n_token_sort_key

ALPHABET = ["S", "NP", "VP", "PP", "ADJP", "ADVP", "SBAR"]


def main():
    forest = [random_tree(seed, 40, 12, ALPHABET) for seed in range(3000)]
    encoded = [encode_relative(t) for t in forest]

    full = label_space_stats(encoded, decomposed=False)
    dec = label_space_stats(encoded, decomposed=True)
    print("corpus: %d trees" % len(forest))
    print("full (n,c,u) labels: %d distinct, %.0f%% occur <= 5 times"
          % (full.total_distinct, 100 * full.rare_fraction(5)))
    print("decomposed |N|+|C|+|U|: %d" % dec.total_distinct)
    print()
    print("Predicting three small vocabularies instead of one cross product")
    print("is the point of the multi-task decomposition.")
    print()

    rel = {tok for e in encoded for tok in e.n_tokens()}
    dyn = {tok for t in forest for tok in encode_dynamic(t).n_tokens()}
    print("distinct n tokens, relative scheme: %d" % len(rel))
    print("distinct n tokens, dynamic scheme:  %d" % len(dyn))
    print("vanished under dynamic: %s" % sorted(rel - dyn, key=n_token_sort_key))
    print()

    # simulate a noisy tagger: corrupt 10% of n components, of which deep
    # closings are the usual victims in practice
    rng = random.Random(0)
    tokens = sorted(rel, key=n_token_sort_key)
    pred = []
    for e in encoded:
        labels = []
        for lab in e.labels:
            if not lab.n.is_dummy and rng.random() < 0.10:
                labels.append(TagLabel(NComponent.from_token(rng.choice(tokens[:-1])), lab.c, lab.u))
            else:
                labels.append(lab)
        pred.append(EncodedSentence(e.sentence, labels, e.scheme))

    table = per_n_f1(encoded, pred)
    print("per-n F1 after corrupting 10% of n components:")
    for tok in sorted(table, key=n_token_sort_key):
        p, r, f = table[tok]
        print("  %-6s F1 %.3f" % (tok, f))


if __name__ == "__main__":
    main()
