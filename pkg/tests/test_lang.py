import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splcsp import lang
from splcsp.lang import (
    Break,
    Continue,
    EmptyInputError,
    Epsilon,
    If,
    ProgramSyntaxError,
    Seq,
    While,
    check_closed,
    count_nodes,
    count_statements,
    parse_program,
    pretty_print,
)

GCD = """\
x := 1;
while x >= 1 do
  if x >= y then
    x := x - y;
    break
  else
    y := y - x;
    continue
  fi
od
"""


def test_parse_single_statement():
    tree = parse_program("x := x - y")
    assert tree == Epsilon("x := x - y")
    assert tree.span == (1, 1)


def test_parse_seq_left_associated():
    tree = parse_program("a; b; c")
    assert tree == Seq(Seq(Epsilon("a"), Epsilon("b")), Epsilon("c"))


def test_parse_if_and_while():
    tree = parse_program("if x < 1 then a else b fi")
    assert tree == If("x < 1", Epsilon("a"), Epsilon("b"))
    tree = parse_program("while x < 1 do a; break od")
    assert tree == While("x < 1", Seq(Epsilon("a"), Break()))


def test_parse_gcd_shape():
    tree = parse_program(GCD)
    assert isinstance(tree, Seq)
    assert tree.left == Epsilon("x := 1")
    loop = tree.right
    assert isinstance(loop, While)
    assert loop.guard == "x >= 1"
    branch = loop.body
    assert isinstance(branch, If)
    assert branch.then_branch == Seq(Epsilon("x := x - y"), Break())
    assert branch.else_branch == Seq(Epsilon("y := y - x"), Continue())


def test_atoms_swallow_token_runs():
    assert parse_program("a b c d") == Epsilon("a b c d")
    # keywords end the run
    assert parse_program("a b; break") == Seq(Epsilon("a b"), Break())


def test_keywords_only_match_whole_tokens():
    # "fix" contains "fi" but is a plain atom
    tree = parse_program("if x then fix else oddo fi")
    assert tree == If("x", Epsilon("fix"), Epsilon("oddo"))


def test_comments_and_blank_lines():
    src = "# leading comment\n\na := 1; # trailing\n# another\nb := 2\n"
    assert parse_program(src) == Seq(Epsilon("a := 1"), Epsilon("b := 2"))


def test_semicolon_needs_no_whitespace():
    assert parse_program("a;b") == Seq(Epsilon("a"), Epsilon("b"))


def test_spans_point_into_the_source():
    tree = parse_program("a;\n  while p do\n    b\n  od")
    assert tree.right.span == (2, 3)
    assert tree.right.body.span == (3, 5)


def test_spans_do_not_affect_equality():
    a = parse_program("a;\nb")
    b = parse_program("a; b")
    assert a == b
    assert a.right.span != b.right.span


@pytest.mark.parametrize(
    "src",
    [
        "",
        "   \n# only a comment\n",
    ],
)
def test_empty_input(src):
    with pytest.raises(EmptyInputError):
        parse_program(src)


@pytest.mark.parametrize(
    "src, line, col",
    [
        ("if x then a fi", 1, 13),  # missing else
        ("if x then a else b", 1, 18),  # missing fi: points at the last token
        ("while x do a", 1, 12),  # missing od
        ("a;; b", 1, 3),  # stray separator
        ("fi", 1, 1),
        ("a; else", 1, 4),
        ("if then a else b fi", 1, 4),  # empty guard
        ("while do a od", 1, 7),
        ("if x; y then a else b fi", 1, 5),  # separator inside guard
        ("a extra; fi", 1, 10),
    ],
)
def test_syntax_errors_carry_positions(src, line, col):
    with pytest.raises(ProgramSyntaxError) as err:
        parse_program(src)
    assert (err.value.line, err.value.col) == (line, col)


def test_trailing_garbage_rejected():
    with pytest.raises(ProgramSyntaxError):
        parse_program("if x then a else b fi fi")


def test_counts():
    tree = parse_program(GCD)
    assert count_statements(tree) == 7
    assert count_nodes(tree) == 10  # three sequencing nodes


def test_check_closed_accepts_loops():
    assert check_closed(parse_program(GCD)).is_closed


def test_check_closed_flags_top_level_jumps():
    report = check_closed(parse_program("a;\nbreak;\ncontinue"))
    assert not report.is_closed
    assert report.violations == ((2, 1), (3, 1))


def test_check_closed_if_does_not_shield():
    report = check_closed(parse_program("if p then break else a fi"))
    assert not report.is_closed
    # but a while around it does
    assert check_closed(parse_program("while q do if p then break else a fi od")).is_closed


def test_pretty_print_canonical_form():
    tree = parse_program("a ;   b;while p do c;continue od")
    assert pretty_print(tree) == "a;\nb;\nwhile p do\n  c;\n  continue\nod\n"


def test_pretty_print_round_trip_gcd():
    tree = parse_program(GCD)
    assert pretty_print(tree) == GCD
    assert parse_program(pretty_print(tree)) == tree


# ---------------------------------------------------------------------------
# properties

WORD = st.text(alphabet="abcdxyz01:=<+-", min_size=1, max_size=4).filter(
    lambda w: w not in lang.KEYWORDS
)
ATOM = st.lists(WORD, min_size=1, max_size=3).map(" ".join)


def _fold(items):
    node = items[0]
    for item in items[1:]:
        node = Seq(node, item)
    return node


SEQUENCES = st.deferred(
    lambda: st.lists(STATEMENTS, min_size=1, max_size=3).map(_fold)
)
STATEMENTS = st.deferred(
    lambda: st.one_of(
        ATOM.map(Epsilon),
        st.just(Break()),
        st.just(Continue()),
        st.builds(If, ATOM, SEQUENCES, SEQUENCES),
        st.builds(While, ATOM, SEQUENCES),
    )
)


@settings(max_examples=150)
@given(SEQUENCES)
def test_pretty_parse_round_trip(tree):
    assert parse_program(pretty_print(tree)) == tree


@settings(max_examples=100)
@given(SEQUENCES)
def test_pretty_print_idempotent(tree):
    text = pretty_print(tree)
    assert pretty_print(parse_program(text)) == text


@settings(max_examples=100)
@given(SEQUENCES)
def test_closedness_matches_reference(tree):
    def reference(node, in_loop):
        if isinstance(node, (Break, Continue)):
            return [] if in_loop else [node.span]
        out = []
        for child in lang.children(node):
            out.extend(reference(child, in_loop or isinstance(node, While)))
        return out

    report = check_closed(tree)
    assert report.is_closed == (not reference(tree, False))


@settings(max_examples=100)
@given(SEQUENCES)
def test_counts_consistent(tree):
    nodes = list(lang.walk(tree))
    assert count_nodes(tree) == len(nodes)
    seqs = sum(1 for n in nodes if isinstance(n, Seq))
    assert count_statements(tree) == len(nodes) - seqs
