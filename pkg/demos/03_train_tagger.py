"""Train the multi-task tagger on a synthetic treebank.

Run: python3 demos/03_train_tagger.py        (about half a minute)
"""

from treetag import (
    TrainConfig,
    corpus_bracket_score,
    decode,
    encode_dynamic,
    predict_greedy,
    sample_corpus,
    serialize,
    train_mtl,
)
from treetag.auxtracks import make_track
from treetag.metrics import format_bracket_report


def main():
    forest = sample_corpus(42, 200)
    corpus = []
    for tree in forest:
        encoded = encode_dynamic(tree)
        aux = {name: make_track(name, tree, encoded) for name in ("n+1", "dist")}
        corpus.append((encoded.sentence, encoded, aux))
    print("training corpus: %d trees, e.g." % len(forest))
    print("  " + serialize(forest[0]))
    print()
    print("Three main heads (n, c, u) share one windowed encoder; the")
    print("shifted-n and split-distance heads are auxiliary tasks whose")
    print("loss is down-weighted by 0.1.")
    print()

    config = TrainConfig(epochs=40)
    dev = [(c[0], t) for c, t in zip(corpus, forest)]
    model = train_mtl(corpus, config, dev=dev)
    for h in model.history[::8]:
        print("  epoch %3d  loss %.3f  F1 %.3f" % (h["epoch"], h["loss"], h["dev_f1"]))
    print()

    predictions = [decode(predict_greedy(model, c[0])) for c in corpus]
    score = corpus_bracket_score(forest, predictions)
    print("training-set score: %s" % format_bracket_report(score))
    print()
    print("sample prediction:")
    print("  gold: " + serialize(forest[3]))
    print("  pred: " + serialize(predictions[3]))


if __name__ == "__main__":
    main()
