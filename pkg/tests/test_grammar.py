"""Template defaults, property discipline, unification, parsing, persistence."""

import random

import pytest

from modoma.errors import GenerationError, GrammarError, LinearizationError, PropertyConflictError
from modoma.grammar import Grammar, LexicalEntry, Property, linearize

SESSION = 1693526400000  # epoch-millisecond session id, as the harness assigns


def entry_with(properties=(), grammar=None, word="winkelen"):
    grammar = grammar or Grammar()
    entry = grammar.new_entry(word, SESSION, grammar.next_number(SESSION))
    for feature, value in properties:
        grammar.set_property(entry, feature, value, 60)
    return grammar, entry


def test_new_entry_defaults_match_template():
    grammar = Grammar()
    entry = grammar.new_entry("winkelen", SESSION, 1)
    assert entry.memory_stack_position == 0
    assert entry.lexical_entry_number == 1
    assert entry.session_id == SESSION
    assert entry.confidence_lexical_entry == 60
    assert entry.head_directionality is None
    assert entry.confidence_head_directionality == 0
    assert entry.terminal is True
    assert entry.phonform == "winkelen"
    assert entry.semform == "A"
    assert entry.semform_index is None
    assert entry.grammatical_properties == []
    assert entry.head is entry
    assert entry.argument is None


def test_semforms_are_fresh_per_entry():
    grammar = Grammar()
    semforms = [
        grammar.new_entry(f"w{i}", SESSION, i + 1).semform for i in range(28)
    ]
    assert semforms[:3] == ["A", "B", "C"]
    assert semforms[26] == "AA"
    assert len(set(semforms)) == 28


def test_new_entry_validation():
    grammar = Grammar()
    grammar.new_entry("eet", SESSION, 1)
    with pytest.raises(GrammarError):
        grammar.new_entry("drinkt", SESSION, 1)  # same (session, number)
    grammar.new_entry("drinkt", SESSION + 1, 1)  # other session is fine
    with pytest.raises(ValueError):
        grammar.new_entry("", SESSION, 2)


def test_set_property_and_coexistence():
    grammar, entry = entry_with()
    grammar.set_property(entry, "A", "n", 60)
    assert entry.grammatical_properties == [Property("A", "n", 60)]
    grammar.set_property(entry, "B", "b", 60)
    assert [p.property_type for p in entry.grammatical_properties] == ["A", "B"]


def test_set_property_same_value_updates_confidence():
    grammar, entry = entry_with([("A", "n")])
    grammar.set_property(entry, "A", "n", 90)
    (prop,) = entry.grammatical_properties
    assert prop.confidence_property == 90


def test_set_property_conflict_is_rejected():
    grammar, entry = entry_with([("A", "n")])
    with pytest.raises(PropertyConflictError):
        grammar.set_property(entry, "A", "a", 60)
    assert entry.get_property("A").property_value == "n"


def test_set_property_validation():
    grammar, entry = entry_with()
    with pytest.raises(ValueError):
        grammar.set_property(entry, "A", "n", 101)
    stranger = Grammar().new_entry("x", 2, 1)
    with pytest.raises(GrammarError):
        grammar.set_property(stranger, "A", "n", 60)


def test_overwrite_property_replaces_and_logs():
    grammar, entry = entry_with([("A", "n")])
    grammar.overwrite_property(entry, "A", "a", 70)
    assert entry.grammatical_properties == [Property("A", "a", 70)]
    (record,) = grammar.change_log
    assert record["feature"] == "A"
    assert record["old"] == "n" and record["new"] == "a"
    grammar.overwrite_property(entry, "C", "x", 60)  # fresh feature: plain add
    assert grammar.change_log[-1]["old"] is None


def test_one_value_per_feature_after_random_operations():
    rng = random.Random(99)
    grammar = Grammar()
    entries = [grammar.new_entry(f"w{i}", SESSION, i + 1) for i in range(10)]
    for _ in range(2000):
        entry = rng.choice(entries)
        feature = rng.choice("ABC")
        value = rng.choice("xyz")
        if rng.random() < 0.5:
            try:
                grammar.set_property(entry, feature, value, rng.randint(0, 100))
            except PropertyConflictError:
                pass
        else:
            grammar.overwrite_property(entry, feature, value, rng.randint(0, 100))
    for entry in entries:
        types = [p.property_type for p in entry.grammatical_properties]
        assert len(types) == len(set(types))
        assert all(0 <= p.confidence_property <= 100
                   for p in entry.grammatical_properties)


def test_unify_without_constraints_succeeds():
    grammar, head = entry_with([("A", "a")])
    arg = grammar.new_entry("ik", SESSION, 2)
    built = grammar.unify(head, arg, "left")
    assert built is not None
    assert built.terminal is False
    assert built.head is head and built.argument is arg
    assert built.head_directionality == "left"
    # the construction projects the head's properties, by value
    assert built.grammatical_properties == [Property("A", "a", 60)]
    built.grammatical_properties[0].property_value = "z"
    assert head.get_property("A").property_value == "a"


def test_unify_direction_validation():
    grammar, head = entry_with()
    arg = grammar.new_entry("ik", SESSION, 2)
    with pytest.raises(ValueError):
        grammar.unify(head, arg, "up")


def test_require_equal_blocks_mismatched_values():
    grammar = Grammar()
    grammar.constraints.set_rule("A", "require_equal")
    noun = grammar.new_entry("fiets", SESSION, 1)
    verb = grammar.new_entry("werkt", SESSION, 2)
    grammar.set_property(noun, "A", "n", 60)
    grammar.set_property(verb, "A", "v", 60)
    assert grammar.unify(noun, verb, "left") is None
    other = grammar.new_entry("kat", SESSION, 3)
    grammar.set_property(other, "A", "n", 60)
    assert grammar.unify(noun, other, "left") is not None


def test_require_distinct_blocks_equal_values():
    grammar = Grammar()
    grammar.constraints.set_rule("A", "require_distinct")
    a = grammar.new_entry("fiets", SESSION, 1)
    b = grammar.new_entry("kat", SESSION, 2)
    grammar.set_property(a, "A", "n", 60)
    grammar.set_property(b, "A", "n", 60)
    assert grammar.unify(a, b, "left") is None
    grammar.overwrite_property(b, "A", "v", 60)
    assert grammar.unify(a, b, "left") is not None


def test_pair_list_constraint():
    grammar = Grammar()
    grammar.constraints.set_rule("A", "pairs", [("v", "n")])
    verb = grammar.new_entry("werkt", SESSION, 1)
    noun = grammar.new_entry("fiets", SESSION, 2)
    grammar.set_property(verb, "A", "v", 60)
    grammar.set_property(noun, "A", "n", 60)
    assert grammar.unify(verb, noun, "left") is not None  # (v, n) allowed
    assert grammar.unify(noun, verb, "left") is None  # (n, v) not listed


def test_missing_feature_never_blocks():
    grammar = Grammar()
    grammar.constraints.set_rule("A", "require_equal")
    tagged = grammar.new_entry("fiets", SESSION, 1)
    plain = grammar.new_entry("en", SESSION, 2)
    grammar.set_property(tagged, "A", "n", 60)
    assert grammar.unify(tagged, plain, "left") is not None
    assert grammar.unify(plain, tagged, "right") is not None


def test_linearize_terminal_and_constructions():
    grammar = Grammar()
    head = grammar.new_entry("winkelen", SESSION, 1)
    arg = grammar.new_entry("ik", SESSION, 2)
    assert linearize(head) == ["winkelen"]
    assert linearize(grammar.unify(head, arg, "left")) == ["winkelen", "ik"]
    assert linearize(grammar.unify(head, arg, "right")) == ["ik", "winkelen"]
    nested = grammar.unify(grammar.unify(head, arg, "right"),
                           grammar.new_entry("nu", SESSION, 3), "left")
    assert linearize(nested) == ["ik", "winkelen", "nu"]


def test_linearize_errors():
    grammar = Grammar()
    head = grammar.new_entry("a", SESSION, 1)
    built = grammar.unify(head, grammar.new_entry("b", SESSION, 2), "left")
    built.head_directionality = None
    with pytest.raises(LinearizationError):
        linearize(built)
    bare = LexicalEntry(session_id=0, lexical_entry_number=None, phonform=None)
    with pytest.raises(LinearizationError):
        linearize(bare)


def test_parse_single_known_word():
    grammar, _ = entry_with()
    result = grammar.parse(["winkelen"])
    assert result.judgment == "grammatical"
    assert len(result.derivations) == 1
    assert result.derivations[0].contains_unknown is False


def test_parse_single_unknown_word():
    grammar = Grammar()
    grammar.new_entry("iets", SESSION, 1)
    result = grammar.parse(["zoiets"])
    assert result.grammatical
    assert result.derivations[0].contains_unknown is True


def test_parse_empty_utterance():
    result = Grammar().parse([])
    assert result.judgment == "ungrammatical"
    assert result.derivations == []


def test_parse_multiword_with_free_combination():
    grammar = Grammar()
    for i, word in enumerate(["ik", "werkt", "nu"], start=1):
        grammar.new_entry(word, SESSION, i)
    result = grammar.parse(["ik", "werkt", "nu"])
    assert result.grammatical
    assert all(not d.contains_unknown for d in result.derivations)


def test_parse_blocked_by_constraints():
    grammar = Grammar()
    grammar.constraints.set_rule("A", "require_equal")
    a = grammar.new_entry("fiets", SESSION, 1)
    b = grammar.new_entry("werkt", SESSION, 2)
    grammar.set_property(a, "A", "n", 60)
    grammar.set_property(b, "A", "v", 60)
    assert grammar.parse(["fiets", "werkt"]).judgment == "ungrammatical"
    grammar.overwrite_property(b, "A", "n", 60)
    assert grammar.parse(["fiets", "werkt"]).judgment == "grammatical"


def test_generate_single_terminal_grammar():
    grammar = Grammar()
    grammar.new_entry("dag", SESSION, 1)
    assert grammar.generate(max_len=4, seed=0) == ["dag"]


def test_generate_empty_grammar_fails():
    with pytest.raises(GenerationError):
        Grammar().generate(max_len=3, seed=0)


def test_generate_respects_max_len_and_parses_back():
    rng = random.Random(4)
    for trial in range(25):
        grammar = Grammar()
        for i in range(rng.randint(1, 8)):
            entry = grammar.new_entry(f"w{i}", SESSION, i + 1)
            if rng.random() < 0.6:
                grammar.set_property(entry, "A", rng.choice("ab"), 60)
        tokens = grammar.generate(max_len=5, seed=trial)
        assert 1 <= len(tokens) <= 5
        assert grammar.parse(tokens).grammatical


def test_generate_round_trip_under_constraints():
    grammar = Grammar()
    grammar.constraints.set_rule("A", "require_equal")
    for i in range(6):
        entry = grammar.new_entry(f"w{i}", SESSION, i + 1)
        grammar.set_property(entry, "A", "a" if i % 2 else "b", 60)
    for seed in range(10):
        tokens = grammar.generate(max_len=4, seed=seed)
        assert grammar.parse(tokens).grammatical


def test_annotate():
    grammar = Grammar()
    winkelen = grammar.new_entry("winkelen", SESSION, 1)
    grammar.set_property(winkelen, "A", "n", 60)
    grammar.new_entry("en", SESSION, 2)  # known, no properties yet
    result = grammar.annotate(["winkelen", "en", "zoiets"])
    assert result == [
        ("winkelen", [("A", "n")]),
        ("en", []),
        ("zoiets", None),
    ]


def test_annotate_matches_index_lookups():
    rng = random.Random(13)
    grammar = Grammar()
    vocab = [f"w{i}" for i in range(12)]
    for i, word in enumerate(vocab[:8]):
        entry = grammar.new_entry(word, SESSION, i + 1)
        if rng.random() < 0.7:
            grammar.set_property(entry, "A", rng.choice("abc"), 60)
    sentence = [rng.choice(vocab) for _ in range(30)]
    for token, label in grammar.annotate(sentence):
        entries = grammar.entries_for(token)
        if not entries:
            assert label is None
        else:
            assert label == [
                (p.property_type, p.property_value)
                for p in entries[0].grammatical_properties
            ]


def test_serialized_entries_carry_every_template_field():
    grammar, entry = entry_with([("A", "n")])
    obj = grammar.to_json_obj()
    assert set(obj) == {"constraints", "entries"}
    (entry_obj,) = obj["entries"]
    assert set(entry_obj) == {
        "memory_stack_position",
        "lexical_entry_number",
        "session_id",
        "confidence_lexical_entry",
        "head_directionality",
        "confidence_head_directionality",
        "terminal",
        "phonform",
        "semform",
        "semform_index",
        "grammatical_properties",
        "head",
        "argument",
    }
    assert entry_obj["head"] == "self"
    assert entry_obj["grammatical_properties"] == [
        {"property_type": "A", "property_value": "n", "confidence_property": 60}
    ]


def test_grammar_json_round_trip():
    rng = random.Random(21)
    for _ in range(20):
        grammar = Grammar()
        grammar.constraints.set_rule("A", "require_equal")
        grammar.constraints.set_rule("B", "pairs", [("x", "y"), ("y", "x")])
        for i in range(rng.randint(1, 10)):
            entry = grammar.new_entry(f"w{i}", SESSION + rng.randint(0, 1), i + 1)
            for feature in "AB":
                if rng.random() < 0.5:
                    grammar.set_property(entry, feature, rng.choice("xy"),
                                         rng.randint(0, 100))
        copy = Grammar.from_json_obj(grammar.to_json_obj())
        assert copy == grammar


def test_grammar_file_round_trip(tmp_path):
    grammar, entry = entry_with([("A", "n")])
    path = tmp_path / "grammar.json"
    grammar.save(path)
    loaded = Grammar.load(path)
    assert loaded == grammar
    assert loaded.entries_for("winkelen")[0].head is loaded.entries_for("winkelen")[0]


def test_loaded_grammar_continues_fresh_semforms(tmp_path):
    grammar = Grammar()
    grammar.new_entry("a", SESSION, 1)
    grammar.new_entry("b", SESSION, 2)
    path = tmp_path / "g.json"
    grammar.save(path)
    loaded = Grammar.load(path)
    assert loaded.new_entry("c", SESSION, 3).semform == "C"
