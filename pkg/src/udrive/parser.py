"""Recursive descent parser for uDrive programs and online commands.

``parse_program`` never raises on malformed input: it collects diagnostics
and resynchronizes at ``end`` keyword boundaries so every broken rule in a
file is reported in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from udrive import ast
from udrive.commands import (
    AddRule,
    CancelManoeuvreControl,
    CancelSpeedControl,
    ClearRule,
    OnlineAction,
    OnlineCommand,
    ReviseRule,
)
from udrive.diagnostics import Diagnostic, Span, error, has_errors
from udrive.lexer import Token, TokenType, tokenize

_EOF_TOKEN = Token(TokenType.EOF, "", None, Span.point(0, 0))

_RULE_KEYWORDS = {
    TokenType.KW_TRIGGER,
    TokenType.KW_CONDITION,
    TokenType.KW_THEN,
    TokenType.KW_UNTIL,
    TokenType.KW_END,
}


@dataclass
class ParseResult:
    program: ast.Program | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.program is not None and not has_errors(self.diagnostics)


class OnlineCommandError(Exception):
    """Raised when an online command does not parse or validate."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.diags: list[Diagnostic] = []

    # token plumbing

    def peek(self, offset: int = 0) -> Token:
        i = self.pos + offset
        if i >= len(self.tokens):
            if self.tokens:
                last = self.tokens[-1].span
                return Token(TokenType.EOF, "", None, Span.point(last.end_line, last.end_col))
            return _EOF_TOKEN
        return self.tokens[i]

    def at(self, ttype: TokenType) -> bool:
        return self.peek().type is ttype

    def advance(self) -> Token:
        tok = self.peek()
        if tok.type is not TokenType.EOF:
            self.pos += 1
        return tok

    def expect(self, ttype: TokenType, code: str, message: str) -> Token | None:
        tok = self.peek()
        if tok.type is ttype:
            return self.advance()
        self.diags.append(error(code, message, tok.span))
        return None

    def err(self, code: str, message: str, span: Span | None = None) -> None:
        self.diags.append(error(code, message, span or self.peek().span))

    # grammar

    def parse_program(self) -> ast.Program | None:
        rules: list[ast.Rule] = []
        if self.at(TokenType.EOF):
            self.err("EmptyProgram", "a program needs at least one rule")
            return None
        while not self.at(TokenType.EOF):
            tok = self.peek()
            if tok.type is TokenType.ERROR:
                self.err("BadToken", str(tok.value), tok.span)
                self.advance()
                continue
            if tok.type is not TokenType.KW_RULE:
                self.err("ExpectedRule", f"expected 'rule', got {tok.text!r}", tok.span)
                self.recover_to_rule()
                continue
            rule = self.parse_rule()
            if rule is not None:
                rules.append(rule)
        if not rules:
            return None
        seen: dict[str, ast.Rule] = {}
        for rule in rules:
            if rule.name in seen:
                self.err(
                    "DuplicateRuleName",
                    f"rule name {rule.name!r} is already used",
                    rule.span,
                )
            else:
                seen[rule.name] = rule
        if has_errors(self.diags):
            return None
        return ast.Program(tuple(rules))

    def recover_to_rule(self) -> None:
        """Skip to just past the next 'end', or to the next 'rule'/EOF."""
        while not self.at(TokenType.EOF):
            tok = self.peek()
            if tok.type is TokenType.KW_END:
                self.advance()
                return
            if tok.type is TokenType.KW_RULE:
                return
            self.advance()

    def parse_rule(self) -> ast.Rule | None:
        start = self.advance()  # 'rule'
        name_tok = self.expect(TokenType.STRING, "ExpectedRuleName", "expected rule name string")
        if name_tok is None:
            self.recover_to_rule()
            return None
        before = len(self.diags)

        trigger = None
        if self.expect(TokenType.KW_TRIGGER, "MissingTrigger", "expected 'trigger'") is not None:
            trigger = self.parse_event()

        conditions: list[tuple[bool, ast.ConditionExpr]] = []
        if self.at(TokenType.KW_CONDITION):
            self.advance()
            while self.at(TokenType.BANG) or self.at(TokenType.IDENT):
                negated = False
                if self.at(TokenType.BANG):
                    negated = True
                    self.advance()
                cond = self.parse_condition()
                if cond is None:
                    break
                conditions.append((negated, cond))
            if not conditions:
                self.err("EmptyConditions", "'condition' clause needs at least one condition")

        actions: list[ast.ActionCall] = []
        if self.expect(TokenType.KW_THEN, "MissingThen", "expected 'then'") is not None:
            while self.at(TokenType.IDENT):
                call = self.parse_action()
                if call is None:
                    break
                actions.append(call)
                while self.at(TokenType.SEMI):
                    self.advance()
            if not actions:
                self.err("EmptyActions", "a rule needs at least one action after 'then'")

        exit_trigger = None
        if self.at(TokenType.KW_UNTIL):
            self.advance()
            exit_trigger = self.parse_event()

        end_tok = self.expect(TokenType.KW_END, "MissingEnd", "expected 'end' to close rule")
        if end_tok is None:
            self.recover_to_rule()

        if len(self.diags) > before or trigger is None:
            if end_tok is None and not self.at(TokenType.EOF):
                pass  # recover_to_rule already ran
            return None

        span = start.span.merge(end_tok.span if end_tok else self.peek().span)
        return ast.Rule(
            name=str(name_tok.value),
            trigger=trigger,
            conditions=tuple(conditions),
            actions=tuple(actions),
            exit_trigger=exit_trigger,
            span=span,
        )

    def parse_event(self) -> ast.EventRef | None:
        tok = self.expect(TokenType.IDENT, "ExpectedEvent", "expected event name")
        if tok is None:
            return None
        name = str(tok.value)
        arg = None
        span = tok.span
        # limit(50)_detected: value sits between the name and its suffix
        if self.at(TokenType.LPAREN) and self.peek(1).type is TokenType.NUMBER:
            self.advance()
            num = self.advance()
            arg = float(num.value)  # type: ignore[arg-type]
            rp = self.expect(TokenType.RPAREN, "ExpectedRParen", "expected ')' in event")
            suffix = self.expect(
                TokenType.IDENT, "ExpectedEventSuffix", "expected event suffix after ')'"
            )
            if suffix is not None:
                name = name + str(suffix.value)
                span = span.merge(suffix.span)
            elif rp is not None:
                span = span.merge(rp.span)
        return ast.EventRef(name, arg, span)

    def parse_condition(self) -> ast.ConditionExpr | None:
        tok = self.advance()
        args, span = self.parse_args(tok.span)
        return ast.ConditionExpr(str(tok.value), args, span)

    def parse_action(self) -> ast.ActionCall | None:
        tok = self.advance()
        args, span = self.parse_args(tok.span)
        return ast.ActionCall(str(tok.value), args, span)

    def parse_args(self, head_span: Span) -> tuple[tuple[ast.Literal, ...], Span]:
        if not self.at(TokenType.LPAREN):
            return (), head_span
        self.advance()
        args: list[ast.Literal] = []
        span = head_span
        if not self.at(TokenType.RPAREN):
            while True:
                lit = self.parse_literal()
                if lit is None:
                    break
                args.append(lit)
                if self.at(TokenType.COMMA):
                    self.advance()
                    continue
                break
        closer = self.expect(TokenType.RPAREN, "ExpectedRParen", "expected ')' after arguments")
        if closer is not None:
            span = head_span.merge(closer.span)
        return tuple(args), span

    def parse_literal(self) -> ast.Literal | None:
        tok = self.peek()
        if tok.type is TokenType.NUMBER:
            self.advance()
            return ast.Literal(ast.NUMBER, float(tok.value), tok.span)  # type: ignore[arg-type]
        if tok.type is TokenType.STRING:
            self.advance()
            return ast.Literal(ast.STRING, str(tok.value), tok.span)
        if tok.type is TokenType.IDENT:
            self.advance()
            text = str(tok.value)
            if text in ("true", "false"):
                return ast.Literal(ast.BOOL, text == "true", tok.span)
            return ast.Literal(ast.ENUM, text, tok.span)
        self.err("ExpectedArgument", f"expected argument, got {tok.text!r}", tok.span)
        return None


def parse_program(text: str) -> ParseResult:
    """Parse a whole program; diagnostics carry spans for every failure."""
    parser = _Parser(text)
    program = parser.parse_program()
    return ParseResult(program, parser.diags)


def parse_rule(text: str) -> tuple[ast.Rule | None, list[Diagnostic]]:
    parser = _Parser(text)
    if not parser.at(TokenType.KW_RULE):
        parser.err("ExpectedRule", "expected 'rule'")
        return None, parser.diags
    rule = parser.parse_rule()
    if rule is not None and not parser.at(TokenType.EOF):
        parser.err("TrailingInput", "unexpected input after 'end'")
        return None, parser.diags
    return rule, parser.diags


def parse_online_command(text: str, cat) -> OnlineCommand:
    """Parse one online command: a bare action, a rule block, or a meta action.

    Raises OnlineCommandError with the first diagnostic on bad input.
    """
    from udrive.validate import validate_online_action, validate_rule

    stripped = text.strip()
    if stripped.startswith("rule"):
        rule, diags = parse_rule(text)
        if rule is None:
            raise OnlineCommandError(_first_error(diags, "rule block does not parse"))
        vdiags = validate_rule(rule, cat)
        if has_errors(vdiags):
            raise OnlineCommandError(_first_error(vdiags, "rule block is invalid"))
        return AddRule(rule)

    parser = _Parser(text)
    if not parser.at(TokenType.IDENT):
        parser.err("ExpectedCommand", "expected an action name or a rule block")
        raise OnlineCommandError(_first_error(parser.diags, "bad command"))
    call = parser.parse_action()
    if call is None or has_errors(parser.diags):
        raise OnlineCommandError(_first_error(parser.diags, "bad command"))
    if not parser.at(TokenType.EOF):
        raise OnlineCommandError(
            error("TrailingInput", "unexpected input after command", parser.peek().span)
        )

    if call.id == "clear_rule":
        if len(call.args) != 1 or call.args[0].kind != ast.STRING:
            raise OnlineCommandError(
                error("BadMetaArgs", "clear_rule takes one rule-name string", call.span)
            )
        return ClearRule(str(call.args[0].value))
    if call.id == "revise_rule":
        if (
            len(call.args) != 3
            or call.args[0].kind != ast.STRING
            or call.args[1].kind != ast.ENUM
        ):
            raise OnlineCommandError(
                error(
                    "BadMetaArgs",
                    "revise_rule takes (rule-name string, action name, value)",
                    call.span,
                )
            )
        return ReviseRule(str(call.args[0].value), str(call.args[1].value), call.args[2])
    if call.id == "cancel_speed_control":
        return CancelSpeedControl()
    if call.id == "cancel_manoeuvre_control":
        return CancelManoeuvreControl()

    vdiags = validate_online_action(call, cat)
    if has_errors(vdiags):
        raise OnlineCommandError(_first_error(vdiags, "invalid action"))
    return OnlineAction(call)


def _first_error(diags: list[Diagnostic], fallback: str) -> Diagnostic:
    for d in diags:
        if d.severity == "error":
            return d
    return error("ParseError", fallback, Span.point(1, 1))
