"""Parser for the textual policy instance language (``.ppm`` documents).

Hand-written lexer and recursive-descent parser. Errors never abort the
whole parse: the parser records a diagnostic with a source span, re-syncs at
the next block boundary and keeps going, capped at `MAX_DIAGNOSTICS`
findings. A document yields an instance only when it parsed without any
diagnostic.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass, field
from typing import Optional

from ppmkit import model
from ppmkit.model import (
    ActorKind,
    Contact,
    ContactKind,
    Controller,
    DataCategory,
    DataEntry,
    DataProtectionOfficer,
    DurationUnit,
    FormOfAgreement,
    FurtherKind,
    FurtherKindName,
    LawfulBasis,
    LawfulBasisType,
    LocationKind,
    PolicyInstance,
    ProcessingRecord,
    Purpose,
    RecipientArea,
    RecipientKind,
    RecipientType,
    Region,
    Representative,
    Right,
    RightType,
    StorageDuration,
    StorageDurationKind,
    SupervisoryAuthority,
    Timing,
    normalize_name,
)

MAX_DIAGNOSTICS = 50

# Parse-error catalog. Messages carry the specifics; the titles here feed
# documentation and generic reporting.
PARSE_ERROR_CATALOG: dict[str, str] = {
    "PPM-P-001": "expected a `policy` block",
    "PPM-P-002": "unexpected input",
    "PPM-P-003": "unterminated string",
    "PPM-P-004": "unknown keyword",
    "PPM-P-005": "duplicate attribute",
    "PPM-P-006": "malformed date",
    "PPM-P-007": "malformed integer",
    "PPM-P-008": "missing required attribute",
    "PPM-P-009": "unexpected end of input",
    "PPM-P-010": "unknown actor kind",
    "PPM-P-011": "unknown location kind",
    "PPM-P-012": "unknown right type",
    "PPM-P-013": "unknown lawful basis",
    "PPM-P-014": "unknown agreement form",
    "PPM-P-015": "unknown timing",
    "PPM-P-016": "unknown recipient type",
    "PPM-P-017": "unknown recipient area",
    "PPM-P-018": "unknown processing form",
    "PPM-P-019": "invalid storage duration",
    "PPM-P-020": "invalid boolean",
    "PPM-P-021": "invalid country code",
    "PPM-P-022": "unknown contact kind",
    "PPM-P-023": "unknown data category in membership clause",
    "PPM-P-024": "expected a value",
    "PPM-P-025": "too many errors, giving up",
}


@dataclass(frozen=True)
class SourceSpan:
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def to_obj(self) -> dict:
        return {
            "start_line": self.start_line,
            "start_col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }


@dataclass(frozen=True)
class ParseDiagnostic:
    code: str
    message: str
    span: SourceSpan

    def to_obj(self) -> dict:
        return {"code": self.code, "message": self.message, "span": self.span.to_obj()}


@dataclass
class ParseResult:
    instance: Optional[PolicyInstance]
    diagnostics: list[ParseDiagnostic]
    spans: dict[str, SourceSpan] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.instance is not None and not self.diagnostics


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

WORD = "WORD"
STRING = "STRING"
INT = "INT"
DATE = "DATE"
PUNCT = "PUNCT"
BAD = "BAD"
EOF = "EOF"

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    type: str
    text: str
    value: object
    span: SourceSpan


def _lex(text: str) -> tuple[list[Token], list[ParseDiagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[ParseDiagnostic] = []
    line, col, i, n = 1, 1, 0, len(text)

    def span_from(l0: int, c0: int) -> SourceSpan:
        return SourceSpan(l0, c0, line, max(col - 1, c0))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        start_line, start_col = line, col
        if ch in "{}[]:,":
            i += 1
            col += 1
            tokens.append(Token(PUNCT, ch, ch, span_from(start_line, start_col)))
            continue
        if ch == '"':
            i += 1
            col += 1
            parts: list[str] = []
            closed = False
            while i < n:
                c = text[i]
                if c == "\n":
                    break
                if c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                if c == "\\" and i + 1 < n and text[i + 1] in _ESCAPES:
                    parts.append(_ESCAPES[text[i + 1]])
                    i += 2
                    col += 2
                    continue
                parts.append(c)
                i += 1
                col += 1
            span = span_from(start_line, start_col)
            if not closed:
                diagnostics.append(
                    ParseDiagnostic("PPM-P-003", "unterminated string", span)
                )
                tokens.append(Token(BAD, "".join(parts), None, span))
            else:
                tokens.append(Token(STRING, "".join(parts), "".join(parts), span))
            continue
        if ch.isdigit():
            j = i
            while j < n and (text[j].isdigit() or text[j] == "-"):
                j += 1
            raw = text[i:j]
            col += j - i
            i = j
            span = span_from(start_line, start_col)
            if raw.isdigit():
                tokens.append(Token(INT, raw, int(raw), span))
            elif _DATE_RE.match(raw):
                try:
                    value = datetime.date.fromisoformat(raw)
                except ValueError:
                    diagnostics.append(
                        ParseDiagnostic("PPM-P-006", f"malformed date {raw!r}", span)
                    )
                    tokens.append(Token(BAD, raw, None, span))
                else:
                    tokens.append(Token(DATE, raw, value, span))
            else:
                diagnostics.append(
                    ParseDiagnostic(
                        "PPM-P-006",
                        f"malformed date or integer {raw!r} "
                        "(dates are ISO-8601 calendar dates)",
                        span,
                    )
                )
                tokens.append(Token(BAD, raw, None, span))
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "-_"):
                j += 1
            raw = text[i:j]
            col += j - i
            i = j
            tokens.append(Token(WORD, raw, raw, span_from(start_line, start_col)))
            continue
        # anything else is noise; report once per character
        i += 1
        col += 1
        diagnostics.append(
            ParseDiagnostic(
                "PPM-P-002",
                f"unexpected character {ch!r}",
                span_from(start_line, start_col),
            )
        )
    tokens.append(Token(EOF, "", None, SourceSpan(line, col, line, col)))
    return tokens, diagnostics


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_META_KEYS = {
    "vendor",
    "url",
    "effective",
    "last-change",
    "created",
    "version",
    "min-age",
    "update-policy",
    "full-text",
}
_ITEM_KEYS = _META_KEYS | {"region", "data-entry", "data-category", "processing"}

_ENUM_ERROR = {
    ActorKind: ("PPM-P-010", "actor kind"),
    LocationKind: ("PPM-P-011", "location kind"),
    RightType: ("PPM-P-012", "right type"),
    LawfulBasisType: ("PPM-P-013", "lawful basis"),
    FormOfAgreement: ("PPM-P-014", "agreement form"),
    Timing: ("PPM-P-015", "timing"),
    RecipientKind: ("PPM-P-016", "recipient type"),
    RecipientArea: ("PPM-P-017", "recipient area"),
    FurtherKindName: ("PPM-P-018", "processing form"),
    ContactKind: ("PPM-P-022", "contact kind"),
    DurationUnit: ("PPM-P-019", "duration unit"),
}

_COUNTRY_RE = re.compile(r"^[A-Z]{2}$")


class _Abort(Exception):
    """Raised to unwind to the nearest recovery point; the diagnostic was
    already recorded."""


class _Parser:
    def __init__(self, tokens: list[Token], diagnostics: list[ParseDiagnostic]):
        self.tokens = tokens
        self.diagnostics = diagnostics
        self.pos = 0
        self.spans: dict[str, SourceSpan] = {}
        self.failed = bool(diagnostics)
        # membership claims resolved after the full document was read:
        # (owner kind, owner name, target category name, name token span)
        self.membership: list[tuple[str, str, str, SourceSpan]] = []

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != EOF:
            self.pos += 1
        return tok

    def at_word(self, *words: str) -> bool:
        tok = self.peek()
        return tok.type == WORD and tok.text in words

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok.type == PUNCT and tok.text == ch

    def error(self, code: str, message: str, span: SourceSpan) -> None:
        self.failed = True
        if len(self.diagnostics) >= MAX_DIAGNOSTICS:
            return
        self.diagnostics.append(ParseDiagnostic(code, message, span))
        if len(self.diagnostics) == MAX_DIAGNOSTICS:
            self.diagnostics[-1] = ParseDiagnostic(
                "PPM-P-025", "too many errors, giving up", span
            )

    def abort(self, code: str, message: str, span: SourceSpan) -> None:
        self.error(code, message, span)
        raise _Abort()

    def give_up(self) -> bool:
        return len(self.diagnostics) >= MAX_DIAGNOSTICS

    def expect_punct(self, ch: str) -> Token:
        tok = self.peek()
        if tok.type == PUNCT and tok.text == ch:
            return self.advance()
        if tok.type == EOF:
            self.abort("PPM-P-009", f"unexpected end of input, expected {ch!r}", tok.span)
        self.abort("PPM-P-002", f"expected {ch!r}, found {tok.text!r}", tok.span)
        raise AssertionError  # unreachable

    def expect_string(self, what: str) -> tuple[str, SourceSpan]:
        tok = self.peek()
        if tok.type == STRING:
            self.advance()
            return tok.value, tok.span
        if tok.type == EOF:
            self.abort("PPM-P-009", f"unexpected end of input, expected {what}", tok.span)
        self.abort("PPM-P-024", f"expected {what} (a quoted string), found {tok.text!r}", tok.span)
        raise AssertionError

    def expect_int(self, what: str) -> int:
        tok = self.peek()
        if tok.type == INT:
            self.advance()
            return tok.value
        self.abort("PPM-P-007", f"expected {what} (an integer), found {tok.text!r}", tok.span)
        raise AssertionError

    def expect_date(self, what: str) -> datetime.date:
        tok = self.peek()
        if tok.type == DATE:
            self.advance()
            return tok.value
        if tok.type == BAD:
            # the lexer already reported the malformed literal
            self.advance()
            raise _Abort()
        self.abort(
            "PPM-P-006",
            f"expected {what} (an ISO-8601 date), found {tok.text!r}",
            tok.span,
        )
        raise AssertionError

    def expect_bool(self, what: str) -> bool:
        tok = self.peek()
        if tok.type == WORD and tok.text in ("true", "false"):
            self.advance()
            return tok.text == "true"
        self.abort("PPM-P-020", f"expected true or false for {what}, found {tok.text!r}", tok.span)
        raise AssertionError

    def expect_enum(self, enum_cls):
        code, label = _ENUM_ERROR[enum_cls]
        tok = self.peek()
        if tok.type == WORD:
            try:
                value = enum_cls(tok.text)
            except ValueError:
                pass
            else:
                self.advance()
                return value
        self.abort(code, f"unknown {label} {tok.text!r}", tok.span)
        raise AssertionError

    def expect_name(self, what: str) -> tuple[str, SourceSpan]:
        """A STRING or bare word, for reference lists."""
        tok = self.peek()
        if tok.type in (STRING, WORD):
            self.advance()
            return str(tok.value), tok.span
        self.abort("PPM-P-024", f"expected {what}, found {tok.text!r}", tok.span)
        raise AssertionError

    def sync(self, stop_words: set[str]) -> None:
        """Skip tokens until a stop keyword or closing brace at this nesting
        depth; leaves the closing brace unconsumed."""
        depth = 0
        while True:
            tok = self.peek()
            if tok.type == EOF:
                return
            if depth == 0:
                if tok.type == WORD and tok.text in stop_words:
                    return
                if tok.type == PUNCT and tok.text == "}":
                    return
            if tok.type == PUNCT and tok.text in "{[":
                depth += 1
            elif tok.type == PUNCT and tok.text in "}]":
                depth = max(depth - 1, 0)
            self.advance()

    # -- attribute bookkeeping ----------------------------------------------

    def check_duplicate(self, seen: set[str], key: str, span: SourceSpan) -> None:
        if key in seen:
            self.error("PPM-P-005", f"duplicate attribute {key!r}", span)
        seen.add(key)

    def require(self, values: dict, keys: list[str], what: str, span: SourceSpan) -> bool:
        ok = True
        for key in keys:
            if key not in values:
                self.error(
                    "PPM-P-008", f"{what} is missing required attribute {key!r}", span
                )
                ok = False
        return ok

    # -- grammar -------------------------------------------------------------

    def parse_document(self) -> Optional[PolicyInstance]:
        tok = self.peek()
        if not self.at_word("policy"):
            self.error(
                "PPM-P-001",
                "expected a `policy` block",
                tok.span if tok.type != EOF else SourceSpan(1, 1, 1, 1),
            )
            return None
        start = self.advance()
        instance = None
        try:
            instance = self.parse_policy(start)
        except _Abort:
            pass
        tok = self.peek()
        if tok.type != EOF and not self.give_up():
            self.error("PPM-P-002", f"unexpected input after policy block: {tok.text!r}", tok.span)
        if self.failed:
            return None
        return instance

    def parse_policy(self, start: Token) -> Optional[PolicyInstance]:
        name, _ = self.expect_string("the policy name")
        self.expect_punct("{")
        meta: dict[str, object] = {"name": name}
        seen: set[str] = set()
        regions: list[Region] = []
        entries: list[DataEntry] = []
        categories: list[dict] = []  # name, members(list), parents(list of (name, span))
        processings: list[ProcessingRecord] = []
        kind_counts: dict[str, int] = {}

        while not self.at_punct("}"):
            tok = self.peek()
            if tok.type == EOF or self.give_up():
                break
            try:
                if tok.type == WORD and tok.text in _META_KEYS:
                    self.advance()
                    self.check_duplicate(seen, tok.text, tok.span)
                    self.expect_punct(":")
                    self.parse_meta_value(tok.text, meta)
                elif self.at_word("region"):
                    self.advance()
                    region = self.parse_region(len(regions))
                    if region is not None:
                        regions.append(region)
                elif self.at_word("data-entry"):
                    self.advance()
                    entry_name, span = self.expect_string("the data entry name")
                    self.spans[f"data_entries[{len(entries)}]"] = span
                    entries.append(DataEntry(entry_name))
                    for target, tspan in self.parse_in_clause():
                        self.membership.append(("entry", entry_name, target, tspan))
                elif self.at_word("data-category"):
                    self.advance()
                    cat_name, span = self.expect_string("the data category name")
                    self.spans[f"data_categories[{len(categories)}]"] = span
                    categories.append({"name": cat_name, "members": [], "subs": []})
                    for target, tspan in self.parse_in_clause():
                        self.membership.append(("category", cat_name, target, tspan))
                elif self.at_word("processing"):
                    self.advance()
                    record = self.parse_processing(len(processings), kind_counts)
                    if record is not None:
                        processings.append(record)
                else:
                    self.abort(
                        "PPM-P-004",
                        f"unknown keyword {tok.text!r} in policy block",
                        tok.span,
                    )
            except _Abort:
                self.sync(_ITEM_KEYS)
        if self.at_punct("}"):
            self.advance()
        return self.finish_policy(
            start, meta, seen, regions, entries, categories, processings, kind_counts
        )

    def parse_meta_value(self, key: str, meta: dict) -> None:
        if key == "vendor":
            meta["vendor_name"] = self.expect_string("the vendor name")[0]
        elif key == "url":
            meta["url_to_original"] = self.expect_string("the policy URL")[0]
        elif key == "effective":
            meta["effective_date"] = self.expect_date("the effective date")
        elif key == "last-change":
            meta["date_of_last_change"] = self.expect_date("the last-change date")
        elif key == "created":
            meta["date_of_creation"] = self.expect_date("the creation date")
        elif key == "version":
            meta["version_label"] = self.expect_string("the version label")[0]
        elif key == "min-age":
            tok = self.peek()
            meta["minimum_user_age"] = self.expect_int("the minimum user age")
            self.spans["minimum_user_age"] = tok.span
        elif key == "update-policy":
            meta["update_policies"] = self.expect_string("the update policy text")[0]
        elif key == "full-text":
            meta["full_text"] = self.expect_string("the full policy text")[0]

    def parse_in_clause(self) -> list[tuple[str, SourceSpan]]:
        if not self.at_word("in"):
            return []
        self.advance()
        self.expect_punct("[")
        names: list[tuple[str, SourceSpan]] = []
        while not self.at_punct("]"):
            names.append(self.expect_name("a data category name"))
            if self.at_punct(","):
                self.advance()
            elif not self.at_punct("]"):
                tok = self.peek()
                self.abort("PPM-P-002", f"expected ',' or ']', found {tok.text!r}", tok.span)
        self.advance()
        return names

    def parse_bracket_list(self, parse_item) -> list:
        self.expect_punct("[")
        items = []
        while not self.at_punct("]"):
            items.append(parse_item())
            if self.at_punct(","):
                self.advance()
            elif not self.at_punct("]"):
                tok = self.peek()
                self.abort("PPM-P-002", f"expected ',' or ']', found {tok.text!r}", tok.span)
        self.advance()
        return items

    # -- regions --------------------------------------------------------------

    def parse_region(self, index: int) -> Optional[Region]:
        name, name_span = self.expect_string("the region name")
        path = f"regions[{index}]"
        self.spans[path] = name_span
        self.expect_punct("{")
        controllers: list[Controller] = []
        rights: list[Right] = []
        dpo: Optional[DataProtectionOfficer] = None
        seen: set[str] = set()
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.type == EOF or self.give_up():
                break
            try:
                if self.at_word("controller"):
                    self.advance()
                    controller = self.parse_controller(f"{path}.controllers[{len(controllers)}]")
                    if controller is not None:
                        controllers.append(controller)
                elif self.at_word("dpo"):
                    self.advance()
                    self.check_duplicate(seen, "dpo", tok.span)
                    dpo = self.parse_dpo(f"{path}.dpo", tok.span)
                elif self.at_word("right"):
                    self.advance()
                    right = self.parse_right(f"{path}.rights[{len(rights)}]", tok.span)
                    if right is not None:
                        rights.append(right)
                else:
                    self.abort("PPM-P-004", f"unknown keyword {tok.text!r} in region block", tok.span)
            except _Abort:
                self.sync({"controller", "dpo", "right"})
        if self.at_punct("}"):
            self.advance()
        return Region(name=name, controllers=tuple(controllers), dpo=dpo, rights=tuple(rights))

    def parse_contact(self, path: str) -> Optional[Contact]:
        kind = self.expect_enum(ContactKind)
        value, span = self.expect_string("the contact value")
        self.spans[path] = span
        if not value.strip():
            self.error("PPM-P-024", "contact value must be non-empty", span)
        return Contact(kind=kind, value=value)

    def parse_controller(self, path: str) -> Optional[Controller]:
        name, name_span = self.expect_string("the controller name")
        self.spans[path] = name_span
        self.expect_punct("{")
        location: Optional[str] = None
        contacts: list[Contact] = []
        representative: Optional[Representative] = None
        seen: set[str] = set()
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.type == EOF or self.give_up():
                break
            try:
                if self.at_word("location"):
                    self.advance()
                    self.check_duplicate(seen, "location", tok.span)
                    self.expect_punct(":")
                    location = self.expect_string("the controller location")[0]
                elif self.at_word("contact"):
                    self.advance()
                    contact = self.parse_contact(f"{path}.contacts[{len(contacts)}]")
                    if contact is not None:
                        contacts.append(contact)
                elif self.at_word("representative"):
                    self.advance()
                    self.check_duplicate(seen, "representative", tok.span)
                    rep_name, _ = self.expect_string("the representative name")
                    self.expect_punct("{")
                    rep_contacts: list[Contact] = []
                    while self.at_word("contact"):
                        self.advance()
                        contact = self.parse_contact(
                            f"{path}.representative.contacts[{len(rep_contacts)}]"
                        )
                        if contact is not None:
                            rep_contacts.append(contact)
                    self.expect_punct("}")
                    representative = Representative(rep_name, tuple(rep_contacts))
                else:
                    self.abort("PPM-P-004", f"unknown keyword {tok.text!r} in controller block", tok.span)
            except _Abort:
                self.sync({"location", "contact", "representative"})
        if self.at_punct("}"):
            self.advance()
        return Controller(
            name=name,
            contacts=tuple(contacts),
            location=location,
            representative=representative,
        )

    def parse_dpo(self, path: str, span: SourceSpan) -> Optional[DataProtectionOfficer]:
        self.spans[path] = span
        self.expect_punct("{")
        name: Optional[str] = None
        contacts: list[Contact] = []
        seen: set[str] = set()
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.type == EOF or self.give_up():
                break
            try:
                if self.at_word("name"):
                    self.advance()
                    self.check_duplicate(seen, "name", tok.span)
                    self.expect_punct(":")
                    name = self.expect_string("the DPO name")[0]
                elif self.at_word("contact"):
                    self.advance()
                    contact = self.parse_contact(f"{path}.contacts[{len(contacts)}]")
                    if contact is not None:
                        contacts.append(contact)
                else:
                    self.abort("PPM-P-004", f"unknown keyword {tok.text!r} in dpo block", tok.span)
            except _Abort:
                self.sync({"name", "contact"})
        if self.at_punct("}"):
            self.advance()
        return DataProtectionOfficer(contacts=tuple(contacts), name=name)

    def parse_right(self, path: str, span: SourceSpan) -> Optional[Right]:
        self.spans[path] = span
        types = self.parse_bracket_list(lambda: self.expect_enum(RightType))
        self.expect_punct("{")
        contacts: list[Contact] = []
        description: Optional[str] = None
        law: Optional[str] = None
        authority: Optional[SupervisoryAuthority] = None
        seen: set[str] = set()
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.type == EOF or self.give_up():
                break
            try:
                if self.at_word("contact"):
                    self.advance()
                    contact = self.parse_contact(f"{path}.contacts[{len(contacts)}]")
                    if contact is not None:
                        contacts.append(contact)
                elif self.at_word("description"):
                    self.advance()
                    self.check_duplicate(seen, "description", tok.span)
                    self.expect_punct(":")
                    description = self.expect_string("the right description")[0]
                elif self.at_word("law"):
                    self.advance()
                    self.check_duplicate(seen, "law", tok.span)
                    self.expect_punct(":")
                    law = self.expect_string("the law reference")[0]
                elif self.at_word("authority"):
                    self.advance()
                    self.check_duplicate(seen, "authority", tok.span)
                    auth_name, auth_span = self.expect_string("the authority name")
                    self.spans[f"{path}.authority"] = auth_span
                    self.expect_punct("{")
                    auth_contacts: list[Contact] = []
                    while self.at_word("contact"):
                        self.advance()
                        contact = self.parse_contact(
                            f"{path}.authority.contacts[{len(auth_contacts)}]"
                        )
                        if contact is not None:
                            auth_contacts.append(contact)
                    self.expect_punct("}")
                    authority = SupervisoryAuthority(auth_name, tuple(auth_contacts))
                else:
                    self.abort("PPM-P-004", f"unknown keyword {tok.text!r} in right block", tok.span)
            except _Abort:
                self.sync({"contact", "description", "law", "authority"})
        if self.at_punct("}"):
            self.advance()
        return Right(
            types=frozenset(types),
            contacts=tuple(contacts),
            description=description,
            law=law,
            authority=authority,
        )

    # -- processings ------------------------------------------------------------

    def parse_processing(
        self, index: int, kind_counts: dict[str, int]
    ) -> Optional[ProcessingRecord]:
        tok = self.peek()
        if tok.type != WORD or tok.text not in model.PROCESSING_KINDS:
            self.abort(
                "PPM-P-004",
                f"expected a processing kind (collect, store, transmit, delete, "
                f"further), found {tok.text!r}",
                tok.span,
            )
        kind = self.advance().text
        kind_counts[kind] = kind_counts.get(kind, 0) + 1
        record_id = f"{kind}-{kind_counts[kind]}"
        if self.peek().type == STRING:
            record_id = self.advance().value
        path = f"processings[{index}]"
        self.spans[path] = tok.span
        self.expect_punct("{")

        values: dict[str, object] = {}
        seen: set[str] = set()
        purposes: list[Purpose] = []

        scalar_attrs = {
            "scenario": lambda: self.expect_string("the scenario")[0],
            "description": lambda: self.expect_string("the description")[0],
            "actor": lambda: self.expect_enum(ActorKind),
            "collection-controller": lambda: self.expect_string("the collection controller")[0],
            "protection": lambda: self.expect_string("the protection measures")[0],
            "recipient-actor": lambda: self.expect_enum(ActorKind),
            "timing": lambda: self.expect_enum(Timing),
            "legal": lambda: self.expect_bool("legal"),
            "commissioned": lambda: self.expect_bool("commissioned"),
            "safeguards": lambda: self.expect_string("the safeguards")[0],
            "automated-decision": lambda: self.expect_bool("automated-decision"),
            "adm-logic": lambda: self.expect_string("the decision-making logic")[0],
        }
        list_attrs = {
            "location": lambda: self.parse_bracket_list(lambda: self.expect_enum(LocationKind)),
            "recipient-location": lambda: self.parse_bracket_list(lambda: self.expect_enum(LocationKind)),
            "recipient-area": lambda: self.parse_bracket_list(lambda: self.expect_enum(RecipientArea)),
            "storage-location": lambda: self.parse_bracket_list(self.parse_country_code),
            "kind": lambda: self.parse_bracket_list(self.parse_further_kind),
        }
        sync_words = set(scalar_attrs) | set(list_attrs) | {
            "duration",
            "recipient-type",
            "purpose",
        }

        while not self.at_punct("}"):
            tok = self.peek()
            if tok.type == EOF or self.give_up():
                break
            try:
                if tok.type == WORD and tok.text in scalar_attrs:
                    self.advance()
                    self.check_duplicate(seen, tok.text, tok.span)
                    self.expect_punct(":")
                    values[tok.text] = scalar_attrs[tok.text]()
                elif tok.type == WORD and tok.text in list_attrs:
                    self.advance()
                    self.check_duplicate(seen, tok.text, tok.span)
                    self.expect_punct(":")
                    values[tok.text] = list_attrs[tok.text]()
                elif self.at_word("duration"):
                    self.advance()
                    self.check_duplicate(seen, "duration", tok.span)
                    self.expect_punct(":")
                    values["duration"] = self.parse_duration()
                elif self.at_word("recipient-type"):
                    self.advance()
                    self.check_duplicate(seen, "recipient-type", tok.span)
                    self.expect_punct(":")
                    values["recipient-type"] = self.parse_recipient_type()
                elif self.at_word("purpose"):
                    self.advance()
                    purpose = self.parse_purpose(f"{path}.purposes[{len(purposes)}]", tok.span)
                    if purpose is not None:
                        purposes.append(purpose)
                else:
                    self.abort(
                        "PPM-P-004",
                        f"unknown keyword {tok.text!r} in processing block",
                        tok.span,
                    )
            except _Abort:
                self.sync(sync_words)
        close_span = self.peek().span
        if self.at_punct("}"):
            self.advance()

        return self.build_processing(kind, record_id, values, purposes, close_span)

    def parse_country_code(self) -> str:
        tok = self.peek()
        if tok.type == WORD and _COUNTRY_RE.match(tok.text):
            self.advance()
            return tok.text
        self.abort(
            "PPM-P-021",
            f"expected an ISO 3166-1 alpha-2 country code (two uppercase "
            f"letters), found {tok.text!r}",
            tok.span,
        )
        raise AssertionError

    def parse_further_kind(self) -> FurtherKind:
        name = self.expect_enum(FurtherKindName)
        if name is FurtherKindName.OTHER:
            text, _ = self.expect_string("the description of the other processing form")
            return FurtherKind(name, text)
        return FurtherKind(name)

    def parse_recipient_type(self) -> RecipientType:
        kind = self.expect_enum(RecipientKind)
        if kind is RecipientKind.OTHER:
            text, _ = self.expect_string("the description of the other recipient")
            return RecipientType(kind, text)
        return RecipientType(kind)

    def parse_duration(self) -> StorageDuration:
        tok = self.peek()
        if self.at_word("fixed"):
            self.advance()
            length = self.expect_int("the period length")
            unit = self.expect_enum(DurationUnit)
            if length <= 0:
                self.error("PPM-P-019", "fixed storage period must be positive", tok.span)
            return StorageDuration(StorageDurationKind.FIXED_PERIOD, length=length, unit=unit)
        if self.at_word("until-event"):
            self.advance()
            event, span = self.expect_string("the event description")
            if not event.strip():
                self.error("PPM-P-019", "until-event text must be non-empty", span)
            return StorageDuration(StorageDurationKind.UNTIL_EVENT, event=event)
        self.abort(
            "PPM-P-019",
            f"expected `fixed <n> <days|months|years>` or `until-event \"...\"`, "
            f"found {tok.text!r}",
            tok.span,
        )
        raise AssertionError

    def parse_purpose(self, path: str, span: SourceSpan) -> Optional[Purpose]:
        self.spans[path] = span
        self.expect_punct("{")
        values: dict[str, object] = {}
        seen: set[str] = set()
        data_refs: list[str] = []
        basis: Optional[LawfulBasis] = None
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.type == EOF or self.give_up():
                break
            try:
                if self.at_word("description"):
                    self.advance()
                    self.check_duplicate(seen, "description", tok.span)
                    self.expect_punct(":")
                    values["description"] = self.expect_string("the purpose description")[0]
                elif self.at_word("agreement"):
                    self.advance()
                    self.check_duplicate(seen, "agreement", tok.span)
                    self.expect_punct(":")
                    values["agreement"] = self.expect_enum(FormOfAgreement)
                elif self.at_word("revocation"):
                    self.advance()
                    self.check_duplicate(seen, "revocation", tok.span)
                    self.expect_punct(":")
                    values["revocation"] = self.expect_string("the revocation text")[0]
                elif self.at_word("basis"):
                    self.advance()
                    self.check_duplicate(seen, "basis", tok.span)
                    self.expect_punct(":")
                    basis_type = self.expect_enum(LawfulBasisType)
                    basis_text = None
                    if self.peek().type == STRING:
                        basis_text = self.advance().value
                    basis = LawfulBasis(basis_type, basis_text)
                elif self.at_word("data"):
                    self.advance()
                    self.check_duplicate(seen, "data", tok.span)
                    self.expect_punct(":")
                    data_refs = [
                        name
                        for name, _ in self.parse_bracket_list(
                            lambda: self.expect_name("a data entry or category name")
                        )
                    ]
                else:
                    self.abort("PPM-P-004", f"unknown keyword {tok.text!r} in purpose block", tok.span)
            except _Abort:
                self.sync({"description", "agreement", "revocation", "basis", "data"})
        close_span = self.peek().span
        if self.at_punct("}"):
            self.advance()
        if not self.require(values, ["description", "agreement"], "purpose", close_span):
            return None
        return Purpose(
            description=values["description"],
            agreement=values["agreement"],
            data_refs=frozenset(data_refs),
            lawful_basis=basis,
            revocation=values.get("revocation"),
        )

    def build_processing(
        self,
        kind: str,
        record_id: str,
        values: dict,
        purposes: list[Purpose],
        span: SourceSpan,
    ) -> Optional[ProcessingRecord]:
        required = ["scenario", "actor", "location"]
        kind_required = {
            "collect": [],
            "store": ["duration"],
            "transmit": ["recipient-type", "timing", "legal"],
            "delete": [],
            "further": ["kind", "timing", "automated-decision"],
        }
        if not self.require(values, required + kind_required[kind], f"{kind} processing", span):
            return None

        if kind == "collect":
            detail = model.CollectingDetail(values.get("collection-controller"))
        elif kind == "store":
            detail = model.StoringDetail(
                duration=values["duration"],
                data_protection=values.get("protection"),
                storage_locations=frozenset(values.get("storage-location", [])),
            )
        elif kind == "transmit":
            detail = model.TransmittingDetail(
                recipient_type=values["recipient-type"],
                timing=values["timing"],
                legal_transmission=values["legal"],
                recipient_actor=values.get("recipient-actor"),
                recipient_locations=frozenset(values.get("recipient-location", [])),
                protection_measures=values.get("protection"),
                commissioned=values.get("commissioned"),
                recipient_areas=frozenset(values.get("recipient-area", [])),
                safeguards_for_regions=values.get("safeguards"),
            )
        elif kind == "delete":
            detail = model.DeletingDetail()
        else:
            detail = model.FurtherProcessingDetail(
                kinds=frozenset(values["kind"]),
                timing=values["timing"],
                automated_decision_making=values["automated-decision"],
                adm_logic=values.get("adm-logic"),
            )
        return ProcessingRecord(
            id=record_id,
            scenario=values["scenario"],
            actor=values["actor"],
            locations=frozenset(values["location"]),
            purposes=tuple(purposes),
            detail=detail,
            description=values.get("description"),
        )

    # -- assembly -----------------------------------------------------------------

    def finish_policy(
        self,
        start: Token,
        meta: dict,
        seen: set[str],
        regions: list[Region],
        entries: list[DataEntry],
        categories: list[dict],
        processings: list[ProcessingRecord],
        kind_counts: dict[str, int],
    ) -> Optional[PolicyInstance]:
        required = {
            "vendor": "vendor_name",
            "url": "url_to_original",
            "effective": "effective_date",
            "version": "version_label",
            "min-age": "minimum_user_age",
        }
        for key, attr in required.items():
            if attr not in meta:
                self.error(
                    "PPM-P-008",
                    f"policy block is missing required attribute {key!r}",
                    start.span,
                )
        if self.failed:
            return None

        declared = {normalize_name(c["name"]) for c in categories}
        by_name = {normalize_name(c["name"]): c for c in categories}
        for owner_kind, owner_name, target, span in self.membership:
            target_key = normalize_name(target)
            if target_key not in declared:
                self.error(
                    "PPM-P-023",
                    f"membership clause names undeclared data category {target!r}",
                    span,
                )
                continue
            if owner_kind == "entry":
                by_name[target_key]["members"].append(owner_name)
            else:
                by_name[target_key]["subs"].append(owner_name)
        if self.failed:
            return None

        data_categories = tuple(
            DataCategory(
                name=c["name"],
                member_entries=frozenset(c["members"]),
                sub_categories=frozenset(c["subs"]),
            )
            for c in categories
        )
        return PolicyInstance(
            name=meta["name"],
            vendor_name=meta["vendor_name"],
            url_to_original=meta["url_to_original"],
            effective_date=meta["effective_date"],
            version_label=meta["version_label"],
            minimum_user_age=meta["minimum_user_age"],
            regions=tuple(regions),
            full_text=meta.get("full_text"),
            date_of_last_change=meta.get("date_of_last_change"),
            date_of_creation=meta.get("date_of_creation"),
            update_policies=meta.get("update_policies"),
            data_entries=tuple(entries),
            data_categories=data_categories,
            processings=tuple(processings),
        )


def parse(text: str, source_name: str = "<string>") -> ParseResult:
    """Parse a ``.ppm`` document.

    Returns a `ParseResult`: an instance when the document is clean, or one
    or more diagnostics with source spans. The span map addresses model paths
    back to document locations for downstream validation reporting.
    """
    tokens, diagnostics = _lex(text)
    parser = _Parser(tokens, diagnostics)
    instance = parser.parse_document()
    return ParseResult(instance=instance, diagnostics=parser.diagnostics, spans=parser.spans)
