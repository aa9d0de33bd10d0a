"""AST for uDrive programs.

Nodes compare structurally; source spans are carried for diagnostics but
excluded from equality so ``parse(format(p)) == p`` holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from udrive.diagnostics import Span

LiteralValue = Union[float, bool, str]

NUMBER = "number"
BOOL = "bool"
ENUM = "enum"
STRING = "string"


@dataclass(frozen=True)
class Literal:
    kind: str  # number | bool | enum | string
    value: LiteralValue
    span: Span = field(default=Span.point(0, 0), compare=False)


@dataclass(frozen=True)
class EventRef:
    """Event reference; ``limit_detected`` carries its sign value as arg."""

    id: str
    arg: Optional[float] = None
    span: Span = field(default=Span.point(0, 0), compare=False)


@dataclass(frozen=True)
class ConditionExpr:
    id: str
    args: tuple[Literal, ...] = ()
    span: Span = field(default=Span.point(0, 0), compare=False)


@dataclass(frozen=True)
class ActionCall:
    id: str
    args: tuple[Literal, ...] = ()
    span: Span = field(default=Span.point(0, 0), compare=False)


@dataclass(frozen=True)
class Rule:
    name: str
    trigger: EventRef
    conditions: tuple[tuple[bool, ConditionExpr], ...]  # (negated, expr)
    actions: tuple[ActionCall, ...]
    exit_trigger: Optional[EventRef] = None
    span: Span = field(default=Span.point(0, 0), compare=False)


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...]

    def rule_named(self, name: str) -> Optional[Rule]:
        for rule in self.rules:
            if rule.name == name:
                return rule
        return None


def number(value: float) -> Literal:
    return Literal(NUMBER, float(value))


def boolean(value: bool) -> Literal:
    return Literal(BOOL, bool(value))


def enum(token: str) -> Literal:
    return Literal(ENUM, token)


def string(value: str) -> Literal:
    return Literal(STRING, value)
