"""Bracketed constituent trees: reading, writing, and synthesising.

Trees are immutable once built, so they can be shared freely between
threads.  The on-disk format is the usual one-tree-per-line bracketing
(``(S (NP (D the) (N dog)) (VP (V barks)))``); literal parentheses inside
tokens are expected to be pre-escaped as ``-LRB-``/``-RRB-`` and are kept
verbatim.
"""

import random
import re
from dataclasses import dataclass


class Leaf:
    """A preterminal: POS tag over a single word."""

    __slots__ = ("pos", "word")

    def __init__(self, pos, word):
        self.pos = pos
        self.word = word

    def __eq__(self, other):
        return isinstance(other, Leaf) and self.pos == other.pos and self.word == other.word

    def __hash__(self):
        return hash((Leaf, self.pos, self.word))

    def __repr__(self):
        return "Leaf(%r, %r)" % (self.pos, self.word)


class Internal:
    """A phrase node with a nonterminal label and at least one child."""

    __slots__ = ("label", "children")

    def __init__(self, label, children):
        children = tuple(children)
        if not children:
            raise ValueError("internal node %r must have at least one child" % label)
        self.label = label
        self.children = children

    def __eq__(self, other):
        return (
            isinstance(other, Internal)
            and self.label == other.label
            and self.children == other.children
        )

    def __hash__(self):
        return hash((Internal, self.label, self.children))

    def __repr__(self):
        return "Internal(%r, %r)" % (self.label, list(self.children))


def leaves(tree):
    """Yield the Leaf nodes of `tree` left to right."""
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            yield node
        else:
            stack.extend(reversed(node.children))


def leaf_count(tree):
    return sum(1 for _ in leaves(tree))


def depth(tree):
    """Height in node levels: a bare preterminal has depth 1."""
    if isinstance(tree, Leaf):
        return 1
    return 1 + max(depth(c) for c in tree.children)


@dataclass(frozen=True)
class Sentence:
    """A tokenised sentence with one POS tag per word."""

    words: tuple
    pos: tuple

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "pos", tuple(self.pos))
        if not self.words:
            raise ValueError("sentence must be non-empty")
        if len(self.words) != len(self.pos):
            raise ValueError(
                "got %d words but %d POS tags" % (len(self.words), len(self.pos))
            )

    def __len__(self):
        return len(self.words)

    @classmethod
    def from_tree(cls, tree):
        ls = list(leaves(tree))
        return cls(tuple(l.word for l in ls), tuple(l.pos for l in ls))


class ParseError(ValueError):
    """Malformed bracketing.  `offset` is a byte offset into the input."""

    def __init__(self, message, offset, line=None):
        self.offset = offset
        self.line = line
        where = "line %d, " % line if line is not None else ""
        super().__init__("%sbyte %d: %s" % (where, offset, message))


_TOKEN_RE = re.compile(r"\(|\)|[^()\s]+")

_FUNC_RE = re.compile(r"^([^-=]+)[-=]")


def strip_function(label):
    """Drop function annotations / indices: ``NP-SBJ-1`` -> ``NP``.

    Leading hyphens (``-LRB-`` etc.) are left alone.
    """
    m = _FUNC_RE.match(label)
    return m.group(1) if m else label


def _byte_offset(text, char_pos):
    return len(text[:char_pos].encode("utf-8"))


def parse_bracketed(text, strip_functions=False):
    """Parse zero or more bracketed trees from `text`.

    Tolerates arbitrary whitespace between tokens.  A label-less wrapper
    group ``( (S ...) )`` (as in raw PTB .mrg files) is unwrapped when it
    has a single child and labelled TOP otherwise.
    """
    tokens = [(m.group(), m.start()) for m in _TOKEN_RE.finditer(text)]
    trees = []
    i = 0
    while i < len(tokens):
        tree, i = _parse_group(text, tokens, i, strip_functions)
        trees.append(tree)
    return trees


def _parse_group(text, tokens, i, strip_functions):
    tok, pos = tokens[i]
    if tok != "(":
        raise ParseError("expected '(', found %r" % tok, _byte_offset(text, pos))
    i += 1
    if i >= len(tokens):
        raise ParseError("unbalanced '('", _byte_offset(text, len(text)))

    tok, pos = tokens[i]
    if tok == ")":
        raise ParseError("empty constituent '()'", _byte_offset(text, pos))

    label = None
    if tok not in ("(", ")"):
        label = tok
        i += 1
        if i >= len(tokens):
            raise ParseError("unbalanced '('", _byte_offset(text, len(text)))
        tok, pos = tokens[i]

    if tok not in ("(", ")") and label is not None:
        # (POS word)
        word = tok
        i += 1
        if i >= len(tokens) or tokens[i][0] != ")":
            at = tokens[i][1] if i < len(tokens) else len(text)
            raise ParseError("expected ')' after leaf", _byte_offset(text, at))
        return Leaf(label, word), i + 1

    children = []
    while i < len(tokens) and tokens[i][0] == "(":
        child, i = _parse_group(text, tokens, i, strip_functions)
        children.append(child)
    if i >= len(tokens):
        raise ParseError("unbalanced '('", _byte_offset(text, len(text)))
    tok, pos = tokens[i]
    if tok != ")":
        raise ParseError("expected ')', found %r" % tok, _byte_offset(text, pos))
    i += 1

    if not children:
        raise ParseError("constituent %r has no children" % label, _byte_offset(text, pos))
    if label is None:
        if len(children) == 1:
            return children[0], i
        label = "TOP"
    if strip_functions:
        label = strip_function(label)
    return Internal(label, children), i


def serialize(tree):
    """Single-line bracketed form; inverse of parse_bracketed."""
    parts = []
    _serialize_into(tree, parts)
    return "".join(parts)


def _serialize_into(tree, parts):
    if isinstance(tree, Leaf):
        parts.append("(%s %s)" % (tree.pos, tree.word))
        return
    parts.append("(%s" % tree.label)
    for child in tree.children:
        parts.append(" ")
        _serialize_into(child, parts)
    parts.append(")")


def load_trees(path, strip_functions=False):
    """Read one tree per line; blank lines skipped.

    Raises ParseError with the offending line number on malformed input.
    """
    trees = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                parsed = parse_bracketed(line, strip_functions=strip_functions)
            except ParseError as e:
                raise ParseError(str(e), e.offset, line=lineno) from None
            if len(parsed) != 1:
                raise ParseError("expected one tree per line, got %d" % len(parsed), 0, line=lineno)
            trees.append(parsed[0])
    return trees


def save_trees(path, trees):
    with open(path, "w", encoding="utf-8") as fh:
        for tree in trees:
            fh.write(serialize(tree))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Random tree synthesis.

_POS_TAGS = ("P0", "P1", "P2", "P3", "P4", "P5")


def random_tree(rng_seed, max_leaves, max_depth, nonterminal_alphabet):
    """Deterministically sample a tree with <= max_leaves leaves and
    depth (in node levels) <= max_depth.

    The shape distribution is deliberately skewed: one child often takes
    most of the remaining leaf budget, which yields deep constituents whose
    closings drop several levels at once, and both preterminals and phrase
    nodes are occasionally wrapped in unary chains.
    """
    if max_leaves < 1 or max_depth < 1:
        raise ValueError("max_leaves and max_depth must be >= 1")
    alphabet = list(nonterminal_alphabet)
    if not alphabet:
        raise ValueError("nonterminal alphabet must be non-empty")
    rng = random.Random(rng_seed)
    n = rng.randint(1, max_leaves)
    tree, _ = _random_subtree(rng, n, max_depth, alphabet, counter=[0])
    return tree


def _random_leaf(rng, budget, alphabet, counter):
    idx = counter[0]
    counter[0] += 1
    node = Leaf(rng.choice(_POS_TAGS), "x%d" % idx)
    used = 1
    # unary chain over the preterminal, geometric length
    while used < budget and rng.random() < 0.22:
        node = Internal(rng.choice(alphabet), [node])
        used += 1
    return node, used


def _random_subtree(rng, n_leaves, budget, alphabet, counter):
    """Returns (tree, depth_used)."""
    if n_leaves == 1 or budget <= 2:
        return _random_leaf(rng, budget, alphabet, counter)

    k = rng.randint(2, min(3, n_leaves))
    # Skew the leaf budget towards a single child, preferring the last
    # position: right-branching spines below left-edge material are what
    # produce large one-step drops in shared-ancestor counts.
    shares = [1] * k
    rest = n_leaves - k
    if rest > 0:
        if rng.random() < 0.85:
            roll = rng.random()
            if roll < 0.6:
                lucky = k - 1
            elif roll < 0.9:
                lucky = 0
            else:
                lucky = rng.randrange(k)
            shares[lucky] += rest
        else:
            for _ in range(rest):
                shares[rng.randrange(k)] += 1

    kids = []
    deepest = 0
    for share in shares:
        child, d = _random_subtree(rng, share, budget - 1, alphabet, counter)
        kids.append(child)
        deepest = max(deepest, d)
    node = Internal(rng.choice(alphabet), kids)
    used = deepest + 1
    while used < budget and rng.random() < 0.05:
        node = Internal(rng.choice(alphabet), [node])
        used += 1
    return node, used


# ---------------------------------------------------------------------------
# A small PCFG for synthesising training corpora.

class PCFG:
    """Probabilistic CFG with a separate lexicon for preterminals.

    `rules` maps a nonterminal to a list of (rhs symbols, probability);
    `lexicon` maps a POS tag to the words it can emit.
    """

    def __init__(self, start, rules, lexicon):
        self.start = start
        self.rules = rules
        self.lexicon = lexicon
        self._min_depth = self._compute_min_depths()

    def _compute_min_depths(self):
        md = {pos: 1 for pos in self.lexicon}
        for sym in self.rules:
            md.setdefault(sym, 10**9)
        for _ in range(len(self.rules) + 2):
            for sym, alts in self.rules.items():
                for rhs, _p in alts:
                    if all(r in md for r in rhs):
                        cand = 1 + max(md[r] for r in rhs)
                        if cand < md[sym]:
                            md[sym] = cand
        return md

    def sample(self, rng, max_depth=10):
        return self._expand(self.start, rng, max_depth)

    def _expand(self, sym, rng, budget):
        if sym in self.lexicon:
            return Leaf(sym, rng.choice(self.lexicon[sym]))
        alts = [
            (rhs, p)
            for rhs, p in self.rules[sym]
            if 1 + max(self._min_depth[r] for r in rhs) <= budget
        ]
        if not alts:
            raise ValueError("no expansion of %r fits in depth %d" % (sym, budget))
        total = sum(p for _, p in alts)
        pick = rng.random() * total
        for rhs, p in alts:
            pick -= p
            if pick <= 0:
                break
        return Internal(sym, [self._expand(r, rng, budget - 1) for r in rhs])


def demo_grammar():
    """A compact English-like grammar used by the bundled corpora.

    PP attachment is deliberately unambiguous (PPs only adjoin to NP after
    a noun, or follow the verb directly), so the gold structure is
    recoverable from local context.
    """
    rules = {
        "S": [(("NP", "VP"), 0.9), (("VP",), 0.1)],
        "NP": [
            (("DT", "NN"), 0.45),
            (("DT", "JJ", "NN"), 0.25),
            (("NP", "PP"), 0.18),
            (("PRP",), 0.12),
        ],
        "VP": [
            (("VB", "NP"), 0.5),
            (("VB",), 0.25),
            (("VB", "PP"), 0.25),
        ],
        "PP": [(("IN", "NP"), 1.0)],
    }
    lexicon = {
        "DT": ["the", "a", "some", "this"],
        "NN": [
            "dog", "cat", "man", "park", "fish", "tree",
            "bird", "house", "car", "river", "stone", "cloud",
        ],
        "JJ": ["big", "old", "red", "lazy", "quick", "calm"],
        "VB": ["sees", "likes", "hears", "finds", "chases", "draws", "keeps", "moves"],
        "IN": ["in", "with", "near", "under"],
        "PRP": ["it", "she", "he"],
    }
    return PCFG("S", rules, lexicon)


def sample_corpus(rng_seed, count, grammar=None, max_depth=9):
    """Sample `count` trees from `grammar` (demo_grammar() by default)."""
    grammar = grammar or demo_grammar()
    rng = random.Random(rng_seed)
    return [grammar.sample(rng, max_depth=max_depth) for _ in range(count)]
