"""Auxiliary supervision tracks for the tagger.

Two kinds are supported: copies of the n component shifted by k positions
(so the model also predicts its neighbours' level changes), and syntactic
split distances (how late each boundary would be split by a top-down
parser).  Both produce one token per word; positions without a defined
value carry PAD.
"""

from dataclasses import dataclass

from .trees import Leaf, Sentence
from .encodings import collapse_unary_chains, _leaf_paths

PAD = "PAD"

DISTANCE = "dist"


def shifted_name(k):
    return "n%+d" % k


@dataclass(frozen=True)
class AuxTrack:
    """One auxiliary label per word.  `name` doubles as the task id."""

    name: str
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))


def shifted_n(encoded, k):
    """The n token of the label k positions away (PAD out of range)."""
    if k == 0:
        raise ValueError("k=0 would duplicate the main task")
    tokens = encoded.n_tokens()
    T = len(tokens)
    values = [tokens[t + k] if 0 <= t + k < T else PAD for t in range(T)]
    return AuxTrack(shifted_name(k), values)


def split_priorities(tree):
    """Bottom-up split priorities on the unary-collapsed tree.

    Leaves and preterminals count zero; a phrase node counts the maximum
    of its children plus one.  Returns {node id: priority} plus the
    collapsed skeleton, so priorities can be read off LCA nodes.
    """
    skeleton, _ = collapse_unary_chains(tree)
    prio = {}

    def walk(node):
        if isinstance(node, Leaf):
            return 0
        p = max(walk(child) for child in node.children) + 1
        prio[id(node)] = p
        return p

    walk(skeleton)
    return prio, skeleton


def syntactic_distances(tree, cap=None):
    """Distance track: each word gets the split priority of its LCA with
    the next word; the last word gets PAD.  `cap` optionally clips values
    from above (deep corpora can otherwise grow the label set without
    bound)."""
    prio, skeleton = split_priorities(tree)
    sentence = Sentence.from_tree(tree)
    if isinstance(skeleton, Leaf):
        return AuxTrack(DISTANCE, [PAD] * len(sentence))
    paths = _leaf_paths(skeleton)
    values = []
    for left, right in zip(paths, paths[1:]):
        k = 0
        for a, b in zip(left, right):
            if a is not b:
                break
            k += 1
        d = prio[id(left[k - 1])]
        if cap is not None and d > cap:
            d = cap
        values.append(str(d))
    values.append(PAD)
    return AuxTrack(DISTANCE, values)


def make_track(name, tree, encoded, cap=None):
    """Build the aux track `name` ("n+1", "n-1" or "dist") for a sentence."""
    if name == DISTANCE:
        return syntactic_distances(tree, cap=cap)
    if name.startswith("n"):
        k = int(name[1:])
        return shifted_n(encoded, k)
    raise ValueError("unknown auxiliary track %r" % name)
