import pytest

from lpterm.errors import LPSyntaxError, NotWellModed, UnknownSymbol, UnsupportedFeature
from lpterm.parser import Moding, check_well_moded, parse_program, parse_query_spec
from lpterm.terms import Symbol

from conftest import PROGRAMS, load


def test_append_is_parsed_with_list_syntax():
    program, spec = load("append")
    assert [str(c) for c in program.clauses] == [
        "append([],M,M).",
        "append('.'(X,L),M,'.'(X,N)) :- append(L,M,N).",
    ]
    assert sorted(str(f) for f in program.functions) == ["'.'", "[]"]
    assert spec.describe() == "append(i,o,o)"


def test_query_sets_moding_and_entry():
    program, spec = load("fg")
    p = program.symbol("p", 2)
    assert spec.entry == p
    assert spec.moding.inputs(p) == (1,)
    assert spec.initial_filter(program)[p] == (1,)


def test_filter_directive():
    program, spec = load("rotate")
    pi = spec.initial_filter(program)
    assert pi[program.symbol("rotate")] == (1,)
    assert pi[program.symbol(".")] == (2,)
    assert pi[program.symbol("append")] == (1, 2, 3)
    assert spec.entry == program.symbol("rotate")


def test_empty_filter_directive():
    program, spec = load("ordered")
    assert spec.initial_filter(program)[program.symbol("ordered")] == ()


def test_no_directive_gives_none():
    program = parse_program("p(a).\n")
    assert parse_query_spec("p(a).\n", program) is None


def test_empty_program_gets_a_constant():
    program = parse_program("")
    assert program.clauses == ()
    assert [f.arity for f in program.functions] == [0]


def test_program_without_constants_gets_fresh_constant():
    program = parse_program("p(s(X)) :- p(X).\n")
    consts = [f for f in program.functions if f.arity == 0]
    assert len(consts) == 1 and consts[0].name not in ("s", "p")


def test_comments_and_anonymous_variables():
    program = parse_program("% c\n/* block\n */ p(_, _) :- q(_).\nq(a).\n")
    head = program.clauses[0].head
    assert head.args[0] != head.args[1]


def test_syntax_error_has_position():
    with pytest.raises(LPSyntaxError) as e:
        parse_program("p(a).\np(b,.\n")
    assert e.value.line == 2
    assert e.value.col >= 1


def test_missing_end_is_syntax_error():
    with pytest.raises(LPSyntaxError):
        parse_program("p(a)")


@pytest.mark.parametrize("src", [
    "p(X) :- \\+ q(X).\nq(a).\n",
    "p(X) :- !, q(X).\nq(a).\n",
    "p(X) :- X is 1 + 2.\n",
    "p(X) :- q(X) ; r(X).\nq(a).\nr(a).\n",
    ":- dynamic p/1.\n",
    "p(X) :- X.\n",
    "p(X) :- write(X).\n",
    "p(\"abc\").\n",
])
def test_unsupported_features(src):
    with pytest.raises(UnsupportedFeature):
        parse_program(src)


def test_malformed_query_mode_is_syntax_error():
    text = "%query: p(i,i,x)\np(a,b,c).\n"
    with pytest.raises(LPSyntaxError):
        parse_query_spec(text, parse_program(text))


def test_query_for_unknown_predicate():
    text = "%query: q(i)\np(a).\n"
    with pytest.raises(UnknownSymbol):
        parse_query_spec(text, parse_program(text))


def test_filter_position_out_of_range():
    text = "%filter: p = [2]\np(a).\n"
    with pytest.raises(LPSyntaxError):
        parse_query_spec(text, parse_program(text))


def test_well_moded_examples():
    program, spec = load("fg")
    check_well_moded(program, spec.moding)
    program, spec = load("fg_open")
    with pytest.raises(NotWellModed) as e:
        check_well_moded(program, spec.moding)
    assert "output variable Y" in e.value.witness


def test_append_is_not_well_moded_for_i_o_o():
    program, spec = load("append")
    with pytest.raises(NotWellModed):
        check_well_moded(program, spec.moding)
    app = program.symbol("append")
    check_well_moded(program, Moding({app: ("i", "i", "o")}))


def test_derived_moding_from_filter():
    program, spec = load("rotate")
    m = spec.derived_moding(program)
    assert m.of(program.symbol("rotate")) == ("i", "o")
    assert m.of(program.symbol("append")) == ("i", "i", "i")


def test_every_corpus_file_parses():
    for path in sorted(PROGRAMS.glob("*.pl")):
        program, spec = load(path.stem)
        assert program.clauses
        assert spec is not None and spec.entry is not None
