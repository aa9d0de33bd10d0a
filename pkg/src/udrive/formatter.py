"""Canonical text form for programs: one clause per line, rules in order.

Round-trip law: parse(format(p)) is structurally equal to p.
"""

from __future__ import annotations

from udrive import ast


def _fmt_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _fmt_literal(lit: ast.Literal) -> str:
    if lit.kind == ast.NUMBER:
        return _fmt_number(float(lit.value))
    if lit.kind == ast.BOOL:
        return "true" if lit.value else "false"
    if lit.kind == ast.STRING:
        escaped = str(lit.value).replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return str(lit.value)


def _fmt_event(event: ast.EventRef) -> str:
    if event.arg is not None and event.id.endswith("_detected"):
        stem = event.id[: -len("_detected")]
        return f"{stem}({_fmt_number(event.arg)})_detected"
    return event.id


def _fmt_call(head: str, args: tuple[ast.Literal, ...]) -> str:
    if not args:
        return head
    return f"{head}({', '.join(_fmt_literal(a) for a in args)})"


def format_rule(rule: ast.Rule) -> str:
    name = rule.name.replace("\\", "\\\\").replace('"', '\\"')
    lines = [f'rule "{name}"', f"trigger {_fmt_event(rule.trigger)}"]
    if rule.conditions:
        conds = " ".join(
            ("!" if negated else "") + _fmt_call(cond.id, cond.args)
            for negated, cond in rule.conditions
        )
        lines.append(f"condition {conds}")
    lines.append("then")
    for call in rule.actions:
        lines.append(f"    {_fmt_call(call.id, call.args)}")
    if rule.exit_trigger is not None:
        lines.append(f"until {_fmt_event(rule.exit_trigger)}")
    lines.append("end")
    return "\n".join(lines)


def format_program(program: ast.Program) -> str:
    return "\n\n".join(format_rule(rule) for rule in program.rules) + "\n"
