"""Semantic validation of parsed programs against the catalog.

Returns diagnostics, never aborts.  Cross-rule conflicts are warnings only:
conflicting rules are legal and resolved at runtime.
"""

from __future__ import annotations

from udrive import ast
from udrive.catalog import Catalog, DomainViolation, check_args
from udrive.diagnostics import Diagnostic, error, warning


def validate_program(program: ast.Program, cat: Catalog) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for rule in program.rules:
        diags.extend(validate_rule(rule, cat))
    diags.extend(_cross_rule_conflicts(program, cat))
    return diags


def validate_rule(rule: ast.Rule, cat: Catalog) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    _check_event(rule.trigger, cat, diags)
    if rule.exit_trigger is not None:
        _check_event(rule.exit_trigger, cat, diags)
        if (rule.exit_trigger.id, rule.exit_trigger.arg) == (rule.trigger.id, rule.trigger.arg):
            diags.append(
                error(
                    "TriggerExitSame",
                    f"rule {rule.name!r}: exit trigger equals trigger",
                    rule.exit_trigger.span,
                )
            )

    for negated, cond in rule.conditions:
        spec = cat.conditions.get(cond.id)
        if spec is None:
            diags.append(
                error("UnknownIdentifier", f"unknown condition {cond.id!r}", cond.span)
            )
            continue
        if len(cond.args) != len(spec.params):
            diags.append(
                error(
                    "ArityMismatch",
                    f"{cond.id} takes {len(spec.params)} argument(s), got {len(cond.args)}",
                    cond.span,
                )
            )
            continue
        for lit, arg_spec in zip(cond.args, spec.params):
            if arg_spec.kind == ast.NUMBER:
                if lit.kind != ast.NUMBER or not (arg_spec.lo <= float(lit.value) <= arg_spec.hi):
                    diags.append(
                        error("DomainViolation", f"{cond.id}: bad {arg_spec.name}", lit.span)
                    )
            elif arg_spec.kind == ast.ENUM:
                if lit.kind != ast.ENUM or (
                    arg_spec.choices and lit.value not in arg_spec.choices
                ):
                    diags.append(
                        error(
                            "DomainViolation",
                            f"{cond.id}: {arg_spec.name} must be one of "
                            f"{', '.join(arg_spec.choices)}",
                            lit.span,
                        )
                    )

    if not rule.actions:
        diags.append(error("EmptyActions", f"rule {rule.name!r} has no actions", rule.span))

    bound: dict[str, ast.ActionCall] = {}
    for call in rule.actions:
        spec = cat.actions.get(call.id)
        if spec is None:
            diags.append(error("UnknownIdentifier", f"unknown action {call.id!r}", call.span))
            continue
        try:
            check_args(call, spec)
        except DomainViolation as exc:
            diags.append(error("DomainViolation", str(exc), call.span))
            continue
        for key in spec.param_keys:
            if key in bound:
                diags.append(
                    error(
                        "IntraRuleConflict",
                        f"rule {rule.name!r}: {call.id} and {bound[key].id} both set {key}",
                        call.span,
                    )
                )
            else:
                bound[key] = call

    return diags


def validate_online_action(call: ast.ActionCall, cat: Catalog) -> list[Diagnostic]:
    spec = cat.actions.get(call.id)
    if spec is None:
        return [error("UnknownIdentifier", f"unknown action {call.id!r}", call.span)]
    try:
        check_args(call, spec)
    except DomainViolation as exc:
        return [error("DomainViolation", str(exc), call.span)]
    return []


def _check_event(event: ast.EventRef, cat: Catalog, diags: list[Diagnostic]) -> None:
    spec = cat.events.get(event.id)
    if spec is None:
        diags.append(error("UnknownIdentifier", f"unknown event {event.id!r}", event.span))
        return
    have = 0 if event.arg is None else 1
    if have != spec.arity:
        diags.append(
            error(
                "ArityMismatch",
                f"event {event.id} takes {spec.arity} argument(s), got {have}",
                event.span,
            )
        )


def _static_bindings(rule: ast.Rule, cat: Catalog) -> dict[str, object]:
    """Parameter keys a rule binds to statically known values."""
    out: dict[str, object] = {}
    for call in rule.actions:
        spec = cat.actions.get(call.id)
        if spec is None or spec.kind != "binding":
            continue
        relative = call.id.startswith(("increase_", "decrease_")) or (
            call.id == "keep_speed" and not call.args
        )
        for key in spec.param_keys:
            out[key] = None if relative else tuple(lit.value for lit in call.args)
    return out


def _cross_rule_conflicts(program: ast.Program, cat: Catalog) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    rules = program.rules
    for i, first in enumerate(rules):
        for second in rules[i + 1 :]:
            co_trigger = (
                first.trigger.id == "always"
                or second.trigger.id == "always"
                or (first.trigger.id, first.trigger.arg)
                == (second.trigger.id, second.trigger.arg)
            )
            if not co_trigger:
                continue
            a, b = _static_bindings(first, cat), _static_bindings(second, cat)
            for key in sorted(set(a) & set(b)):
                if a[key] is not None and b[key] is not None and a[key] != b[key]:
                    diags.append(
                        warning(
                            "CrossRuleConflict",
                            f"rules {first.name!r} and {second.name!r} both set {key} "
                            "with different values; the later activation will be rejected",
                            second.span,
                        )
                    )
    return diags
