"""Parser and compiler for the behavioral-assemblage process notation.

Grammar (whitespace and ``//`` comments are insignificant)::

    program := header def* last-def
    header  := STATE "=" STATE ","
    def     := STATE "=" "(" alt ("|" alt)* ")" ("," | ".")
    alt     := RELEASER "->" STATE

``STATE`` identifiers are uppercase (``[A-Z][A-Z0-9_]*``), ``RELEASER``
identifiers lowercase (``[a-z][a-z0-9_]*``); the case split is enforced by the
lexer. The final definition ends with ``.``; a trailing ``,`` is accepted too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .fsm import Fsm, StateId, Transition

# Index assignments for the three reference assemblages. A source whose state
# labels match one of these sets exactly gets this numbering; anything else is
# numbered start-first, then in definition order.
CANONICAL_NUMBERINGS: tuple[dict[str, int], ...] = (
    {"OFF": 0, "DELIVER_BLUE": 1, "DELIVER_RED": 2, "ACQUIRE_BLUE": 3, "WANDER": 4, "ACQUIRE_RED": 5},
    {"OFF": 0, "GO_TO_BALL": 1, "BEHIND_BALL": 2, "WANDER": 3},
    {"OFF": 0, "GO_TO_BALL": 1, "DEFEND": 2, "WANDER": 3},
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: SourceSpan

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span.line}:{self.span.column}: {self.message}"


class AssemblageError(Exception):
    """One or more diagnostics from lexing, parsing or checking a source."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.format() for d in diagnostics))

    @property
    def span(self) -> SourceSpan:
        return self.diagnostics[0].span


@dataclass(frozen=True)
class Alternative:
    releaser: str
    target: str
    span: SourceSpan = field(default=SourceSpan(1, 1), compare=False)


@dataclass(frozen=True)
class StateDef:
    name: str
    alternatives: tuple[Alternative, ...]
    span: SourceSpan = field(default=SourceSpan(1, 1), compare=False)


@dataclass(frozen=True)
class AssemblageAst:
    process_name: str
    start_ref: str
    state_defs: tuple[StateDef, ...]


@dataclass(frozen=True)
class _Token:
    kind: str  # STATE, RELEASER, '=', '(', ')', '|', '->', ',', '.', EOF
    text: str
    span: SourceSpan


_PUNCT = {"=": "=", "(": "(", ")": ")", "|": "|", ",": ",", ".": "."}


def _describe(tok: _Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind in ("STATE", "RELEASER"):
        return f"{tok.kind.lower()} identifier '{tok.text}'"
    return f"'{tok.text}'"


def _tokenize(text: str) -> Iterator[_Token]:
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if c in " \t\r\f\v":
            col, i = col + 1, i + 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("->", i):
            yield _Token("->", "->", SourceSpan(line, col, 2))
            col, i = col + 2, i + 2
            continue
        if c in _PUNCT:
            yield _Token(c, c, SourceSpan(line, col, 1))
            col, i = col + 1, i + 1
            continue
        if c.isascii() and (c.isalnum() or c == "_"):
            j = i
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            span = SourceSpan(line, col, j - i)
            if word[0].isupper() and not any(ch.islower() for ch in word):
                yield _Token("STATE", word, span)
            elif word[0].islower() and not any(ch.isupper() for ch in word):
                yield _Token("RELEASER", word, span)
            else:
                raise AssemblageError([Diagnostic(
                    f"lexical error: identifier '{word}' mixes case or starts with a digit/underscore",
                    span,
                )])
            col, i = col + (j - i), j
            continue
        raise AssemblageError([Diagnostic(f"lexical error: unexpected character {c!r}", SourceSpan(line, col, 1))])
    yield _Token("EOF", "", SourceSpan(line, col, 1))


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(_tokenize(text))
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.tok
        if tok.kind != kind:
            raise AssemblageError([Diagnostic(f"syntax error: expected {what}, found {_describe(tok)}", tok.span)])
        self.pos += 1
        return tok

    def program(self) -> tuple[_Token, _Token, list[StateDef]]:
        name = self.expect("STATE", "process name")
        self.expect("=", "'='")
        start = self.expect("STATE", "start state reference")
        self.expect(",", "',' after process header")
        defs = []
        while True:
            defs.append(self.state_def())
            term = self.tok
            if term.kind == ".":
                self.pos += 1
                if self.tok.kind != "EOF":
                    raise AssemblageError([Diagnostic(
                        f"syntax error: unexpected {_describe(self.tok)} after final '.'", self.tok.span
                    )])
                break
            if term.kind == ",":
                self.pos += 1
                if self.tok.kind == "EOF":
                    break
                continue
            raise AssemblageError([Diagnostic(
                f"syntax error: expected ',' or '.' after definition, found {_describe(term)}", term.span
            )])
        return name, start, defs

    def state_def(self) -> StateDef:
        name = self.expect("STATE", "state name")
        self.expect("=", "'='")
        self.expect("(", "'('")
        alts = [self.alternative()]
        while self.tok.kind == "|":
            self.pos += 1
            alts.append(self.alternative())
        self.expect(")", "'|' or ')'")
        return StateDef(name.text, tuple(alts), name.span)

    def alternative(self) -> Alternative:
        rel = self.expect("RELEASER", "releaser")
        self.expect("->", "'->'")
        dst = self.expect("STATE", "target state")
        return Alternative(rel.text, dst.text, dst.span)


def _decode(source: Union[str, bytes]) -> str:
    if isinstance(source, str):
        return source
    try:
        return source.decode("utf-8")
    except UnicodeDecodeError as exc:
        head = source[: exc.start]
        line = head.count(b"\n") + 1
        col = exc.start - (head.rfind(b"\n") + 1) + 1
        raise AssemblageError([Diagnostic("lexical error: invalid UTF-8 byte", SourceSpan(line, col, 1))]) from None


def parse_assemblage(source: Union[str, bytes]) -> AssemblageAst:
    """Parse source text into an AST, checking the closed-world rules.

    Raises :class:`AssemblageError`; syntax errors stop at the first problem,
    semantic checks (duplicates, undefined references) report all of them.
    """
    text = _decode(source)
    name, start, defs = _Parser(text).program()

    diags: list[Diagnostic] = []
    defined: dict[str, StateDef] = {}
    for d in defs:
        if d.name == name.text:
            diags.append(Diagnostic(f"duplicate definition: {d.name} is the process name", d.span))
        elif d.name in defined:
            diags.append(Diagnostic(f"duplicate state definition: {d.name}", d.span))
        else:
            defined[d.name] = d
        seen: set[str] = set()
        for a in d.alternatives:
            if a.releaser in seen:
                diags.append(Diagnostic(f"duplicate releaser within {d.name}: {a.releaser}", a.span))
            seen.add(a.releaser)
    if start.text not in defined:
        diags.append(Diagnostic(f"undefined state reference: {start.text}", start.span))
    for d in defs:
        for a in d.alternatives:
            if a.target not in defined:
                diags.append(Diagnostic(f"undefined state reference: {a.target}", a.span))
    if diags:
        raise AssemblageError(diags)
    return AssemblageAst(name.text, start.text, tuple(defs))


def _numbering(ast: AssemblageAst) -> dict[str, int]:
    names = {d.name for d in ast.state_defs}
    for table in CANONICAL_NUMBERINGS:
        if set(table) == names and table.get(ast.start_ref) == 0:
            return dict(table)
    order = [ast.start_ref] + [d.name for d in ast.state_defs if d.name != ast.start_ref]
    return {label: i for i, label in enumerate(order)}


def compile_assemblage(ast: AssemblageAst, numbering: Optional[dict[str, int]] = None) -> Fsm:
    """Build the machine; ``numbering`` overrides the default index assignment."""
    index = numbering if numbering is not None else _numbering(ast)
    states = tuple(sorted((StateId(i, label) for label, i in index.items()), key=lambda s: s.index))
    alphabet: list[str] = []
    transitions = []
    for d in ast.state_defs:
        for a in d.alternatives:
            if a.releaser not in alphabet:
                alphabet.append(a.releaser)
            transitions.append(Transition(index[d.name], a.releaser, index[a.target]))
    start = index[ast.start_ref]
    return Fsm(states, tuple(alphabet), tuple(transitions), start, frozenset({start}))


def compile_source(source: Union[str, bytes]) -> Fsm:
    return compile_assemblage(parse_assemblage(source))


def render_assemblage(fsm: Fsm, process_name: str = "P") -> str:
    """Emit notation that recompiles to ``fsm``.

    States are written in the order their transitions appear, so alternative
    priority survives the round trip. Every state needs at least one outgoing
    transition since the notation cannot express a sink. A ``process_name``
    that clashes with a state label gets underscores appended.
    """
    order: list[int] = []
    for t in fsm.transitions:
        if t.source not in order:
            order.append(t.source)
    missing = [s.label for s in fsm.states if s.index not in order]
    if missing:
        raise ValueError(f"cannot render states without transitions: {', '.join(missing)}")
    label = {s.index: s.label for s in fsm.states}
    while process_name in label.values():
        process_name += "_"
    width = max(len(label[i]) for i in order)
    lines = [f"{process_name} = {label[fsm.start]},"]
    for k, src in enumerate(order):
        alts = [f"{t.releaser}->{label[t.target]}" for t in fsm.transitions if t.source == src]
        head = f"{label[src]:<{width}} = ("
        body = ("\n" + " " * (len(head) - 1) + "|").join(alts)
        lines.append(head + body + ")" + ("." if k == len(order) - 1 else ","))
    return "\n".join(lines) + "\n"
