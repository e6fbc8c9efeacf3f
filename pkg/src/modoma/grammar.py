"""The learning agent's grammar: feature-bearing templates it can combine.

Every lexical item is a graph template carrying identification numbers,
confidences, an optional phonological form, and a list of feature-value
pairs (at most one value per feature).  Templates combine by unification
under a configurable constraint table; head directionality linearizes a
combined structure back into tokens.  The grammar parses with a chart over
binary unifications, generates by seeded random combination, and annotates
tokens with their acquired feature-value pairs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .errors import (
    GenerationError,
    GrammarError,
    LinearizationError,
    PropertyConflictError,
)
from .labels import capital_label

GENERATION_ATTEMPTS = 10000  # unification budget per generate() call


@dataclass
class Property:
    property_type: str
    property_value: str
    confidence_property: int


@dataclass(eq=False, repr=False)
class LexicalEntry:
    """One graph template; terminals carry a phonform, constructions carry
    head and argument references plus the direction that orders them."""

    session_id: int
    lexical_entry_number: int | None
    phonform: str | None
    memory_stack_position: int = 0
    confidence_lexical_entry: int = 60
    head_directionality: str | None = None
    confidence_head_directionality: int = 0
    terminal: bool = True
    semform: str | None = None
    semform_index: int | None = None
    grammatical_properties: list[Property] = field(default_factory=list)
    head: "LexicalEntry | None" = None
    argument: "LexicalEntry | None" = None

    @property
    def entry_id(self) -> tuple[int, int | None]:
        return (self.session_id, self.lexical_entry_number)

    def get_property(self, feature: str) -> Property | None:
        for prop in self.grammatical_properties:
            if prop.property_type == feature:
                return prop
        return None

    def _ref(self, other: "LexicalEntry | None"):
        if other is None:
            return None
        return "self" if other is self else other.entry_id

    def __eq__(self, other):
        if not isinstance(other, LexicalEntry):
            return NotImplemented
        return (
            self.entry_id == other.entry_id
            and self.phonform == other.phonform
            and self.memory_stack_position == other.memory_stack_position
            and self.confidence_lexical_entry == other.confidence_lexical_entry
            and self.head_directionality == other.head_directionality
            and self.confidence_head_directionality == other.confidence_head_directionality
            and self.terminal == other.terminal
            and self.semform == other.semform
            and self.semform_index == other.semform_index
            and self.grammatical_properties == other.grammatical_properties
            and self._ref(self.head) == other._ref(other.head)
            and self._ref(self.argument) == other._ref(other.argument)
        )

    def __repr__(self):
        props = ",".join(
            f"{p.property_type}:{p.property_value}" for p in self.grammatical_properties
        )
        kind = self.phonform if self.terminal else "construction"
        return f"<LexicalEntry {self.entry_id} {kind} [{props}]>"


CONSTRAINT_MODES = ("allow_all", "require_equal", "require_distinct", "pairs")


class ConstraintTable:
    """Per-feature rules deciding which head/argument pairs may unify.

    A feature missing from either entry never blocks; the default for
    undeclared features is allow_all, so a fresh grammar combines freely.
    """

    def __init__(self):
        self._rules: dict[str, tuple[str, frozenset]] = {}

    def set_rule(self, feature: str, mode: str, pairs=()) -> None:
        if mode not in CONSTRAINT_MODES:
            raise ValueError(f"unknown constraint mode {mode!r}")
        self._rules[feature] = (mode, frozenset((h, a) for h, a in pairs))

    def allows(self, head: LexicalEntry, argument: LexicalEntry) -> bool:
        for feature, (mode, pairs) in self._rules.items():
            hp = head.get_property(feature)
            ap = argument.get_property(feature)
            if hp is None or ap is None or mode == "allow_all":
                continue
            if mode == "require_equal" and hp.property_value != ap.property_value:
                return False
            if mode == "require_distinct" and hp.property_value == ap.property_value:
                return False
            if mode == "pairs" and (hp.property_value, ap.property_value) not in pairs:
                return False
        return True

    def to_obj(self) -> dict:
        return {
            feature: {"mode": mode, "pairs": sorted(map(list, pairs))}
            for feature, (mode, pairs) in sorted(self._rules.items())
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ConstraintTable":
        table = cls()
        for feature, rule in obj.items():
            table.set_rule(feature, rule["mode"], rule.get("pairs", ()))
        return table

    def __eq__(self, other):
        if not isinstance(other, ConstraintTable):
            return NotImplemented
        return self._rules == other._rules


@dataclass
class Derivation:
    root: LexicalEntry
    contains_unknown: bool


@dataclass
class ParseResult:
    derivations: list[Derivation]
    judgment: str  # "grammatical" | "ungrammatical"

    @property
    def grammatical(self) -> bool:
        return self.judgment == "grammatical"


def _check_confidence(value: int) -> int:
    if not 0 <= value <= 100:
        raise ValueError(f"confidence {value} outside 0..100")
    return int(value)


class Grammar:
    """Store of lexical entries with a phonform index and a constraint table."""

    def __init__(self, constraints: ConstraintTable | None = None):
        self.entries: dict[tuple[int, int], LexicalEntry] = {}
        self.index: dict[str, list[tuple[int, int]]] = {}
        self.constraints = constraints or ConstraintTable()
        self.change_log: list[dict] = []
        self._semform_serial = 0

    # -- entry management ----------------------------------------------------

    def new_entry(self, phonform: str, session: int, number: int) -> LexicalEntry:
        """Create and register a terminal with the template's default values."""
        if not phonform:
            raise ValueError("phonform must be nonempty")
        key = (session, number)
        if key in self.entries:
            raise GrammarError(f"entry {key} already exists")
        entry = LexicalEntry(
            session_id=session,
            lexical_entry_number=number,
            phonform=phonform,
            semform=capital_label(self._semform_serial),
        )
        entry.head = entry  # a terminal is its own head
        self._semform_serial += 1
        self.entries[key] = entry
        self.index.setdefault(phonform, []).append(key)
        return entry

    def next_number(self, session: int) -> int:
        used = [n for s, n in self.entries if s == session]
        return max(used, default=0) + 1

    def entries_for(self, phonform: str) -> list[LexicalEntry]:
        return [self.entries[key] for key in self.index.get(phonform, [])]

    def features_in_use(self) -> set[str]:
        return {
            prop.property_type
            for entry in self.entries.values()
            for prop in entry.grammatical_properties
        }

    # -- property discipline ---------------------------------------------

    def _owned(self, entry: LexicalEntry) -> LexicalEntry:
        if self.entries.get(entry.entry_id) is not entry:
            raise GrammarError(f"entry {entry.entry_id} not in this grammar")
        return entry

    def set_property(
        self, entry: LexicalEntry, feature: str, value: str, confidence: int = 60
    ) -> LexicalEntry:
        """Attach (feature, value); same value refreshes confidence, a
        different value is a conflict the caller must overwrite explicitly."""
        self._owned(entry)
        confidence = _check_confidence(confidence)
        existing = entry.get_property(feature)
        if existing is None:
            entry.grammatical_properties.append(Property(feature, value, confidence))
        elif existing.property_value == value:
            existing.confidence_property = confidence
        else:
            raise PropertyConflictError(
                f"{entry.phonform or entry.entry_id}: feature {feature} already "
                f"holds {existing.property_value!r}, refusing {value!r}"
            )
        return entry

    def overwrite_property(
        self, entry: LexicalEntry, feature: str, value: str, confidence: int = 60
    ) -> LexicalEntry:
        """Replace any existing value for the feature and record the change."""
        self._owned(entry)
        confidence = _check_confidence(confidence)
        existing = entry.get_property(feature)
        self.change_log.append(
            {
                "kind": "overwrite_property",
                "entry": list(entry.entry_id),
                "phonform": entry.phonform,
                "feature": feature,
                "old": existing.property_value if existing else None,
                "new": value,
            }
        )
        if existing is None:
            entry.grammatical_properties.append(Property(feature, value, confidence))
        else:
            existing.property_value = value
            existing.confidence_property = confidence
        return entry

    # -- combination -------------------------------------------------------

    def unify(
        self, head: LexicalEntry, argument: LexicalEntry, direction: str
    ) -> LexicalEntry | None:
        """Combine two templates; None when the constraint table blocks them.

        The result is a construction projecting the head's properties, with
        the given direction recorded for linearization.
        """
        if direction not in ("left", "right"):
            raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")
        if not self.constraints.allows(head, argument):
            return None
        return LexicalEntry(
            session_id=head.session_id,
            lexical_entry_number=None,
            phonform=None,
            confidence_lexical_entry=min(
                head.confidence_lexical_entry, argument.confidence_lexical_entry
            ),
            head_directionality=direction,
            terminal=False,
            grammatical_properties=[
                Property(p.property_type, p.property_value, p.confidence_property)
                for p in head.grammatical_properties
            ],
            head=head,
            argument=argument,
        )

    # -- use ----------------------------------------------------------------

    def parse(self, tokens) -> ParseResult:
        """Chart search over binary unifications in both head positions.

        Unknown tokens become anonymous unconstrained terminals, so coverage
        never fails on vocabulary alone; derivations built on them are
        flagged.  Cells deduplicate structures that behave identically
        (same properties, direction, and unknown flag).
        """
        tokens = list(tokens)
        n = len(tokens)
        if n == 0:
            return ParseResult([], "ungrammatical")
        chart: dict[tuple[int, int], list[tuple[LexicalEntry, bool]]] = {}
        for i, token in enumerate(tokens):
            options = [(e, False) for e in self.entries_for(token)]
            if not options:
                options = [(_anonymous(token), True)]
            chart[(i, i)] = options
        for span in range(2, n + 1):
            for i in range(0, n - span + 1):
                j = i + span - 1
                cell: list[tuple[LexicalEntry, bool]] = []
                seen = set()
                for k in range(i, j):
                    for left, lu in chart[(i, k)]:
                        for right, ru in chart[(k + 1, j)]:
                            for built in (
                                self.unify(left, right, "left"),
                                self.unify(right, left, "right"),
                            ):
                                if built is None:
                                    continue
                                unknown = lu or ru
                                sig = (
                                    frozenset(
                                        (p.property_type, p.property_value)
                                        for p in built.grammatical_properties
                                    ),
                                    built.head_directionality,
                                    unknown,
                                )
                                if sig not in seen:
                                    seen.add(sig)
                                    cell.append((built, unknown))
                chart[(i, j)] = cell
        derivations = [
            Derivation(entry, unknown) for entry, unknown in chart[(0, n - 1)]
        ]
        return ParseResult(
            derivations, "grammatical" if derivations else "ungrammatical"
        )

    def generate(self, max_len: int, seed) -> list[str]:
        """Build a random structure from the stored terminals and linearize it.

        Each extension unifies the current structure (as head) or the new
        word (as head) in a random direction; a bounded attempt budget turns
        unproductive constraint tables into an error instead of a hang.
        """
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        terminals = [self.entries[k] for k in sorted(self.entries)]
        if not terminals:
            raise GenerationError("grammar has no entries to generate from")
        rng = random.Random(seed)
        budget = GENERATION_ATTEMPTS
        while budget > 0:
            target = rng.randint(1, max_len)
            current = rng.choice(terminals)
            used = {current.entry_id}
            length = 1
            while length < target:
                fresh = [t for t in terminals if t.entry_id not in used]
                if not fresh:
                    break
                partner = rng.choice(fresh)
                direction = rng.choice(("left", "right"))
                built = self.unify(current, partner, direction)
                budget -= 1
                if built is None:
                    built = self.unify(partner, current, direction)
                    budget -= 1
                if built is None:
                    break
                current = built
                used.add(partner.entry_id)
                length += 1
            if length == target:
                return linearize(current)
            budget -= 1
        raise GenerationError("no generable structure within the attempt budget")

    def annotate(self, tokens) -> list[tuple[str, list[tuple[str, str]] | None]]:
        """Label each token with its entry's feature-value pairs.

        Unknown tokens map to None; known tokens map to the (possibly empty)
        pair list of their first registered entry.
        """
        out = []
        for token in tokens:
            entries = self.entries_for(token)
            if not entries:
                out.append((token, None))
            else:
                out.append(
                    (
                        token,
                        [
                            (p.property_type, p.property_value)
                            for p in entries[0].grammatical_properties
                        ],
                    )
                )
        return out

    # -- persistence ----------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "constraints": self.constraints.to_obj(),
            "entries": [
                _entry_obj(self.entries[key]) for key in sorted(self.entries)
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Grammar":
        grammar = cls(ConstraintTable.from_obj(obj.get("constraints", {})))
        for entry_obj in obj["entries"]:
            entry = LexicalEntry(
                session_id=entry_obj["session_id"],
                lexical_entry_number=entry_obj["lexical_entry_number"],
                phonform=entry_obj["phonform"],
                memory_stack_position=entry_obj["memory_stack_position"],
                confidence_lexical_entry=entry_obj["confidence_lexical_entry"],
                head_directionality=entry_obj["head_directionality"],
                confidence_head_directionality=entry_obj["confidence_head_directionality"],
                terminal=entry_obj["terminal"],
                semform=entry_obj["semform"],
                semform_index=entry_obj["semform_index"],
                grammatical_properties=[
                    Property(
                        p["property_type"], p["property_value"], p["confidence_property"]
                    )
                    for p in entry_obj["grammatical_properties"]
                ],
            )
            key = entry.entry_id
            if key in grammar.entries:
                raise GrammarError(f"duplicate entry id {key} in serialized grammar")
            grammar.entries[key] = entry
            if entry.phonform:
                grammar.index.setdefault(entry.phonform, []).append(key)
        # resolve head/argument references now that all entries exist
        for entry_obj in obj["entries"]:
            entry = grammar.entries[
                (entry_obj["session_id"], entry_obj["lexical_entry_number"])
            ]
            entry.head = grammar._resolve(entry_obj["head"], entry)
            entry.argument = grammar._resolve(entry_obj["argument"], entry)
        grammar._semform_serial = len(grammar.entries)
        return grammar

    def _resolve(self, ref, entry: LexicalEntry) -> LexicalEntry | None:
        if ref is None:
            return None
        if ref == "self" or tuple(ref) == entry.entry_id:
            return entry
        key = (ref[0], ref[1])
        if key not in self.entries:
            raise GrammarError(f"dangling entry reference {key}")
        return self.entries[key]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Grammar":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))

    def __eq__(self, other):
        if not isinstance(other, Grammar):
            return NotImplemented
        return (
            self.entries == other.entries
            and self.constraints == other.constraints
        )

    def __len__(self):
        return len(self.entries)


def _anonymous(token: str) -> LexicalEntry:
    # unconstrained stand-in for a word the grammar has never seen
    entry = LexicalEntry(session_id=0, lexical_entry_number=None, phonform=token)
    entry.head = entry
    return entry


def _entry_obj(entry: LexicalEntry) -> dict:
    def ref(other):
        if other is None:
            return None
        if other is entry:
            return "self"
        return list(other.entry_id)

    return {
        "memory_stack_position": entry.memory_stack_position,
        "lexical_entry_number": entry.lexical_entry_number,
        "session_id": entry.session_id,
        "confidence_lexical_entry": entry.confidence_lexical_entry,
        "head_directionality": entry.head_directionality,
        "confidence_head_directionality": entry.confidence_head_directionality,
        "terminal": entry.terminal,
        "phonform": entry.phonform,
        "semform": entry.semform,
        "semform_index": entry.semform_index,
        "grammatical_properties": [
            {
                "property_type": p.property_type,
                "property_value": p.property_value,
                "confidence_property": p.confidence_property,
            }
            for p in entry.grammatical_properties
        ],
        "head": ref(entry.head),
        "argument": ref(entry.argument),
    }


def linearize(entry: LexicalEntry) -> list[str]:
    """Flatten a structure to tokens: direction left puts head tokens first."""
    if entry.terminal:
        if entry.phonform is None:
            raise LinearizationError("terminal without a phonform")
        return [entry.phonform]
    if entry.head_directionality not in ("left", "right"):
        raise LinearizationError("construction without head directionality")
    if entry.head is None or entry.argument is None:
        raise LinearizationError("construction missing head or argument")
    head_tokens = linearize(entry.head)
    arg_tokens = linearize(entry.argument)
    if entry.head_directionality == "left":
        return head_tokens + arg_tokens
    return arg_tokens + head_tokens
