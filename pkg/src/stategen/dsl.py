"""Parser for the line-oriented candidate language.

Grammar (one statement per line, ``#`` starts a comment)::

    program   := { init_decl } { stmt } [ if_block ] { call } [ result ]
    init_decl := NAME "=" literal
    call      := [ NAME "=" ] NAME "(" [ NAME "=" expr { "," NAME "=" expr } ] ")"
    if_block  := "if" cond "{" { call } [ result ] "}" "else" "{" { call } [ result ] "}"
    cond      := ( NAME | "dim" "(" NAME "," INT ")" ) "==" expr
    result    := "RESULT" "=" "[" [ NAME { "," NAME } ] "]"
    expr      := NAME | literal
    literal   := STRING | INT | FLOAT | True | False | None | list | record
               | "tensor" "(" list "," "seed" "=" INT ")"

Calls written after the if/else block run on both paths and are folded into
each branch.
"""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass

from .program import Call, Condition, InitDecl, Program, Ref, Split
from .values import TensorInit

KEYWORDS = {"if", "else", "RESULT", "True", "False", "None", "true", "false", "null"}


class DSLSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<float>-?(?:\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+))
  | (?P<int>-?\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==|[=(),\[\]{}:;])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            ch = text[pos]
            msg = "unterminated string" if ch in "\"'" else f"unexpected character {ch!r}"
            raise DSLSyntaxError(msg, line, col)
        kind = m.lastgroup
        if kind == "nl" or (kind == "op" and m.group() == ";"):
            tokens.append(Token("nl", "\n", line, col))
            if kind == "nl":
                line += 1
                line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise DSLSyntaxError(msg, tok.line, tok.col)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def at(self, kind, text=None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind, text=None) -> Token:
        if not self.at(kind, text):
            want = text or kind
            got = self.tok.text or self.tok.kind
            self.error(f"expected {want!r}, got {got!r}")
        return self.advance()

    def skip_nl(self):
        while self.at("nl"):
            self.advance()

    def end_of_statement(self):
        if not (self.at("nl") or self.at("eof") or self.at("op", "}")):
            self.error(f"unexpected {self.tok.text!r} after statement")

    # -- expressions
    def literal(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return int(t.text)
        if t.kind == "float":
            self.advance()
            return float(t.text)
        if t.kind == "string":
            self.advance()
            if t.text[0] == '"':
                try:
                    return json.loads(t.text)
                except json.JSONDecodeError:
                    pass
            return ast.literal_eval(t.text)
        if t.kind == "name":
            if t.text in ("True", "true"):
                self.advance()
                return True
            if t.text in ("False", "false"):
                self.advance()
                return False
            if t.text in ("None", "null"):
                self.advance()
                return None
            if t.text == "tensor" and self.toks[self.i + 1].text == "(":
                return self.tensor_literal()
        if self.at("op", "["):
            return self.list_literal()
        if self.at("op", "{"):
            return self.record_literal()
        self.error(f"expected a literal, got {t.text or t.kind!r}")

    def list_literal(self):
        self.expect("op", "[")
        items = []
        self.skip_nl()
        while not self.at("op", "]"):
            items.append(self.literal())
            self.skip_nl()
            if not self.at("op", "]"):
                self.expect("op", ",")
                self.skip_nl()
        self.expect("op", "]")
        return tuple(items)

    def record_literal(self):
        self.expect("op", "{")
        out = {}
        self.skip_nl()
        while not self.at("op", "}"):
            key = self.expect("string")
            k = self._string_value(key)
            self.expect("op", ":")
            self.skip_nl()
            out[k] = self.literal()
            self.skip_nl()
            if not self.at("op", "}"):
                self.expect("op", ",")
                self.skip_nl()
        self.expect("op", "}")
        return out

    @staticmethod
    def _string_value(tok):
        return json.loads(tok.text) if tok.text[0] == '"' else ast.literal_eval(tok.text)

    def tensor_literal(self):
        self.expect("name", "tensor")
        self.expect("op", "(")
        start = self.tok
        shape = self.list_literal()
        if not shape or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0
                                for d in shape):
            self.error("tensor shape must be a list of positive ints", start)
        self.expect("op", ",")
        self.expect("name", "seed")
        self.expect("op", "=")
        seed = self.expect("int")
        self.expect("op", ")")
        return TensorInit(tuple(shape), int(seed.text))

    def expr(self):
        t = self.tok
        if t.kind == "name" and t.text not in KEYWORDS and not (
                t.text == "tensor" and self.toks[self.i + 1].text == "("):
            self.advance()
            return Ref(t.text)
        return self.literal()

    # -- statements
    def call_rest(self, target, api_tok) -> Call:
        self.expect("op", "(")
        args = []
        seen = set()
        self.skip_nl()
        while not self.at("op", ")"):
            key = self.expect("name")
            if key.text in seen:
                self.error(f"duplicate argument {key.text!r}", key)
            seen.add(key.text)
            self.expect("op", "=")
            args.append((key.text, self.expr()))
            self.skip_nl()
            if not self.at("op", ")"):
                self.expect("op", ",")
                self.skip_nl()
        self.expect("op", ")")
        return Call(target, api_tok.text, tuple(args))

    def result_stmt(self):
        self.expect("name", "RESULT")
        self.expect("op", "=")
        self.expect("op", "[")
        names = []
        while not self.at("op", "]"):
            t = self.expect("name")
            if t.text in KEYWORDS:
                self.error(f"{t.text!r} is not a variable", t)
            names.append(t.text)
            if not self.at("op", "]"):
                self.expect("op", ",")
        self.expect("op", "]")
        return tuple(names)

    def condition(self) -> Condition:
        if self.at("name", "dim") and self.toks[self.i + 1].text == "(":
            self.advance()
            self.expect("op", "(")
            lhs = self.expect("name").text
            self.expect("op", ",")
            dim = int(self.expect("int").text)
            self.expect("op", ")")
        else:
            lhs = self.expect("name").text
            dim = None
        self.expect("op", "==")
        return Condition(lhs, self.expr(), dim)

    def block(self):
        """Calls inside braces, optionally ending with RESULT."""
        self.expect("op", "{")
        calls, result = [], None
        while True:
            self.skip_nl()
            if self.at("op", "}"):
                break
            if self.at("eof"):
                self.error("missing '}'")
            if result is not None:
                self.error("RESULT must be the last statement of a block")
            if self.at("name", "RESULT"):
                result = self.result_stmt()
            elif self.at("name", "if"):
                self.error("nested if is not supported")
            else:
                stmt = self.statement()
                if isinstance(stmt, InitDecl):
                    self.error("literal assignments belong to the input block")
                calls.append(stmt)
            self.end_of_statement()
        self.expect("op", "}")
        return calls, result

    def statement(self):
        """``name = literal``, ``name = api(...)`` or ``api(...)``."""
        first = self.expect("name")
        if first.text in KEYWORDS:
            self.error(f"unexpected keyword {first.text!r}", first)
        if self.at("op", "("):
            return self.call_rest(None, first)
        self.expect("op", "=")
        t = self.tok
        nxt = self.toks[self.i + 1]
        if t.kind == "name" and nxt.text == "(" and t.text != "tensor":
            self.advance()
            return self.call_rest(first.text, t)
        return InitDecl(first.text, self.literal())

    def program(self) -> Program:
        init, body, after = [], [], []
        split = None
        result = None
        branch_results = (None, None)
        while True:
            self.skip_nl()
            if self.at("eof"):
                break
            if result is not None:
                self.error("statements after RESULT")
            t = self.tok
            if self.at("name", "if"):
                if split is not None:
                    self.error("only one if/else is allowed")
                if_tok = self.advance()
                cond = self.condition()
                if_calls, if_res = self.block()
                self.skip_nl()
                if not self.at("name", "else"):
                    self.error("if without else")
                self.advance()
                else_calls, else_res = self.block()
                split = (cond, if_calls, else_calls)
                branch_results = (if_res, else_res)
            elif self.at("name", "RESULT"):
                result = self.result_stmt()
            elif self.at("op", "}"):
                self.error("unbalanced '}'")
            else:
                stmt = self.statement()
                if isinstance(stmt, InitDecl):
                    if body or split is not None:
                        self.error("literal assignment after the first call", t)
                    init.append(stmt)
                elif split is not None:
                    after.append(stmt)
                else:
                    body.append(stmt)
            self.end_of_statement()

        if split is None:
            return Program(tuple(init), tuple(body), None, result or ())
        cond, if_calls, else_calls = split
        if_res, else_res = branch_results
        if (if_res is None) != (else_res is None):
            self.error("RESULT must be given in both branches or in neither", if_tok)
        if if_res is not None and (result is not None or after):
            self.error("statements after the branch RESULT", if_tok)
        shared = result if result is not None else ()
        return Program(
            tuple(init), tuple(body),
            Split(cond, tuple(if_calls + after), tuple(else_calls + after),
                  if_res if if_res is not None else shared,
                  else_res if else_res is not None else shared),
            (),
        )


def parse_program(text: str) -> Program:
    """Parse candidate source; raises :class:`DSLSyntaxError` with line/column."""
    return _Parser(text).program()


_FENCE = re.compile(r"```[A-Za-z0-9_+-]*\n(.*?)```", re.DOTALL)


def strip_code_fences(text: str) -> str:
    m = _FENCE.search(text)
    return m.group(1) if m else text
