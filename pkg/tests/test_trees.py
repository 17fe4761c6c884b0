import pytest

from treetag.trees import (
    Internal,
    Leaf,
    ParseError,
    Sentence,
    demo_grammar,
    depth,
    leaf_count,
    leaves,
    load_trees,
    parse_bracketed,
    random_tree,
    sample_corpus,
    save_trees,
    serialize,
    strip_function,
)

THREE_LEAF = "(S (NP (D the) (N dog)) (VP (V barks)))"


def test_parse_simple():
    trees = parse_bracketed(THREE_LEAF)
    assert len(trees) == 1
    t = trees[0]
    assert isinstance(t, Internal) and t.label == "S"
    assert leaf_count(t) == 3
    assert [l.word for l in leaves(t)] == ["the", "dog", "barks"]
    assert [l.pos for l in leaves(t)] == ["D", "N", "V"]


def test_parse_unary_chain():
    (t,) = parse_bracketed("(X (Y a))")
    assert t == Internal("X", [Leaf("Y", "a")])


def test_parse_multiple_trees():
    trees = parse_bracketed("(A (B x))  (C (D y))")
    assert len(trees) == 2


def test_parse_whitespace_insensitive():
    messy = "( S ( NP ( D the )\n\t( N dog ) ) ( VP ( V barks ) ) )"
    assert parse_bracketed(messy) == parse_bracketed(THREE_LEAF)


def test_parse_unbalanced_reports_offset():
    text = "(S (NP the)"
    with pytest.raises(ParseError) as err:
        parse_bracketed(text)
    assert err.value.offset == len(text.encode("utf-8"))


def test_parse_empty_constituent():
    with pytest.raises(ParseError):
        parse_bracketed("(S () (V b))")


def test_parse_stray_close():
    with pytest.raises(ParseError):
        parse_bracketed(")(")


def test_parse_ptb_wrapper_unwrapped():
    (t,) = parse_bracketed("( (S (NP (D the) (N dog)) (VP (V barks))) )")
    assert t.label == "S"


def test_serialize_round_trip():
    (t,) = parse_bracketed(THREE_LEAF)
    assert serialize(t) == THREE_LEAF
    assert parse_bracketed(serialize(t)) == [t]


def test_serialize_wrapped_leaf():
    t = Internal("X", [Leaf("N", "dog")])
    assert serialize(t) == "(X (N dog))"


def test_escaped_parens_kept_verbatim():
    text = "(S (-LRB- -LRB-) (N dog))"
    (t,) = parse_bracketed(text)
    assert serialize(t) == text


def test_strip_function_labels():
    assert strip_function("NP-SBJ-1") == "NP"
    assert strip_function("NP=2") == "NP"
    assert strip_function("-LRB-") == "-LRB-"
    (t,) = parse_bracketed("(S (NP-SBJ (D the) (N dog)) (VP (V barks)))",
                           strip_functions=True)
    assert t.children[0].label == "NP"


def test_internal_requires_children():
    with pytest.raises(ValueError):
        Internal("S", [])


def test_sentence_invariants():
    with pytest.raises(ValueError):
        Sentence((), ())
    with pytest.raises(ValueError):
        Sentence(("a",), ("N", "V"))
    s = Sentence.from_tree(parse_bracketed(THREE_LEAF)[0])
    assert s.words == ("the", "dog", "barks")
    assert len(s) == 3


def test_load_save_round_trip(tmp_path):
    forest = [random_tree(seed, 12, 8, ["S", "NP", "VP"]) for seed in range(20)]
    path = tmp_path / "forest.trees"
    save_trees(path, forest)
    assert load_trees(path) == forest


def test_load_trees_error_carries_line(tmp_path):
    path = tmp_path / "bad.trees"
    path.write_text("(S (A a))\n(S (B b)\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        load_trees(path)
    assert err.value.line == 2


def test_random_tree_deterministic():
    a = random_tree(7, 20, 10, ["S", "NP"])
    b = random_tree(7, 20, 10, ["S", "NP"])
    assert a == b


def test_random_tree_single_leaf():
    t = random_tree(7, 1, 6, ["S", "NP"])
    assert leaf_count(t) == 1
    node = t
    while isinstance(node, Internal):
        assert len(node.children) == 1
        node = node.children[0]
    assert isinstance(node, Leaf)


@pytest.mark.parametrize("seed", range(0, 200, 7))
def test_random_tree_respects_bounds(seed):
    t = random_tree(seed, 25, 9, ["S", "NP", "VP", "PP", "ADJP"])
    assert leaf_count(t) <= 25
    assert depth(t) <= 9


def test_random_tree_validates_arguments():
    with pytest.raises(ValueError):
        random_tree(1, 0, 5, ["S"])
    with pytest.raises(ValueError):
        random_tree(1, 5, 0, ["S"])
    with pytest.raises(ValueError):
        random_tree(1, 5, 5, [])


def test_pcfg_sample_deterministic_and_parsable():
    forest = sample_corpus(3, 50)
    assert forest == sample_corpus(3, 50)
    grammar = demo_grammar()
    for t in forest:
        assert t.label in ("S",)
        assert depth(t) <= 9
        for leaf in leaves(t):
            assert leaf.word in grammar.lexicon[leaf.pos]
