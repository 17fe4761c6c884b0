"""Bracketing scores and label-space diagnostics."""

from collections import Counter
from dataclasses import dataclass

from .trees import Leaf, leaf_count
from .encodings import CHAIN_SEP

# POS tags deleted by the optional punctuation-stripping mode
PUNCT_POS = {"''", "``", ".", ":", ","}


@dataclass(frozen=True)
class BracketScore:
    matched: int
    gold_total: int
    pred_total: int

    @property
    def precision(self):
        return self.matched / self.pred_total if self.pred_total else 0.0

    @property
    def recall(self):
        return self.matched / self.gold_total if self.gold_total else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other):
        return BracketScore(
            self.matched + other.matched,
            self.gold_total + other.gold_total,
            self.pred_total + other.pred_total,
        )


def labeled_spans(tree, strip_punctuation=False):
    """Multiset of (label, start, end) spans of phrase nodes.

    Preterminals are excluded; ``+``-joined labels contribute one span per
    chain member over the same extent.  With strip_punctuation, leaves
    whose POS is punctuation do not count towards extents and nodes that
    cover only punctuation disappear.
    """
    spans = Counter()

    def walk(node, i):
        if isinstance(node, Leaf):
            if strip_punctuation and node.pos in PUNCT_POS:
                return i
            return i + 1
        j = i
        for child in node.children:
            j = walk(child, j)
        if j > i:
            for part in node.label.split(CHAIN_SEP):
                spans[(part, i, j)] += 1
        return j

    walk(tree, 0)
    return spans


def bracket_score(gold, predicted, strip_punctuation=False):
    """Precision/recall/F1 over labeled spans, as a BracketScore.

    Both trees must cover the same number of tokens.  Duplicate spans
    (from unary chains) match as multiset members.
    """
    if leaf_count(gold) != leaf_count(predicted):
        raise ValueError(
            "gold has %d leaves, prediction has %d"
            % (leaf_count(gold), leaf_count(predicted))
        )
    gold_spans = labeled_spans(gold, strip_punctuation)
    pred_spans = labeled_spans(predicted, strip_punctuation)
    matched = sum(min(n, gold_spans[span]) for span, n in pred_spans.items())
    return BracketScore(matched, sum(gold_spans.values()), sum(pred_spans.values()))


def corpus_bracket_score(gold_trees, predicted_trees, strip_punctuation=False):
    """Micro-averaged score over aligned tree lists."""
    if len(gold_trees) != len(predicted_trees):
        raise ValueError("corpora differ in length")
    total = BracketScore(0, 0, 0)
    for g, p in zip(gold_trees, predicted_trees):
        total = total + bracket_score(g, p, strip_punctuation)
    return total


def format_bracket_report(score):
    return "P %.2f R %.2f F1 %.2f" % (
        100 * score.precision,
        100 * score.recall,
        100 * score.f1,
    )


# ---------------------------------------------------------------------------
# Per-n diagnostics.

def per_n_f1(gold_corpus, pred_corpus):
    """Classification P/R/F1 of the n component, per distinct n token.

    Corpora must be aligned sentence by sentence with equal lengths.
    Returns {n token: (precision, recall, f1)}.
    """
    if len(gold_corpus) != len(pred_corpus):
        raise ValueError("corpora differ in length")
    tp = Counter()
    fp = Counter()
    fn = Counter()
    for g, p in zip(gold_corpus, pred_corpus):
        if len(g) != len(p):
            raise ValueError("sentence lengths differ: %d vs %d" % (len(g), len(p)))
        for gt, pt in zip(g.n_tokens(), p.n_tokens()):
            if gt == pt:
                tp[gt] += 1
            else:
                fn[gt] += 1
                fp[pt] += 1
    out = {}
    for tok in set(tp) | set(fp) | set(fn):
        p = tp[tok] / (tp[tok] + fp[tok]) if tp[tok] + fp[tok] else 0.0
        r = tp[tok] / (tp[tok] + fn[tok]) if tp[tok] + fn[tok] else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        out[tok] = (p, r, f)
    return out


def n_token_sort_key(tok):
    """Order n tokens for reports: relative by value, then absolute, DUMMY last."""
    if tok == "DUMMY":
        return (2, 0)
    if tok.startswith("r"):
        return (0, int(tok[1:]))
    return (1, int(tok[1:]))


# ---------------------------------------------------------------------------
# Label-space statistics.

@dataclass(frozen=True)
class LabelSpaceStats:
    total_distinct: int
    freq_histogram: dict

    def rare_fraction(self, threshold):
        """Fraction of distinct labels occurring `threshold` times or fewer."""
        if not self.freq_histogram:
            return 0.0
        rare = sum(1 for n in self.freq_histogram.values() if n <= threshold)
        return rare / len(self.freq_histogram)


def label_space_stats(corpus, decomposed=False):
    """Count distinct labels over an encoded corpus.

    Full mode counts whole ``n~c~u`` strings; decomposed mode counts the
    three sub-vocabularies separately (namespaced in the histogram), so
    total_distinct becomes |N|+|C|+|U|.
    """
    if not corpus:
        raise ValueError("empty corpus")
    hist = Counter()
    for encoded in corpus:
        for lab in encoded.labels:
            if decomposed:
                hist["n:" + lab.n.token()] += 1
                hist["c:" + lab.c] += 1
                hist["u:" + (lab.u if lab.u else "NONE")] += 1
            else:
                hist[lab.token()] += 1
    return LabelSpaceStats(len(hist), dict(hist))
