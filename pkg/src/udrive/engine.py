"""Rule engine: per tick, update the activated-rule set from events and
conditions, apply bindings and online commands to the parameter store with
conflict and priority handling, and record what happened.

Tick order (one `step`):

1. rules whose exit trigger fired are removed; their overlays drop now, so
   a paired rule triggered by the same event can take over this tick.
2. remaining program rules are admitted in textual order when their trigger
   is in the event set and all conditions hold, unless a binding conflicts
   with an active rule or an online override (different value on the same
   key).  Relative actions freeze an absolute value at admission.  A rule
   admitted while its exit trigger is also firing stays active for exactly
   this tick.
3. online commands apply last, in arrival order: parameter writes go to the
   override layer and deactivate conflicting active rules; manoeuvres are
   queued for the simulator; rule-set edits mutate the program.

Deterministic by construction: no randomness, insertion-ordered containers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from udrive import ast
from udrive.catalog import (
    Catalog,
    DomainViolation,
    ManoeuvreCommand,
    MetaCommand,
    action_binding,
)
from udrive.commands import (
    AddRule,
    CancelManoeuvreControl,
    CancelSpeedControl,
    ClearRule,
    OnlineAction,
    OnlineCommand,
    ReviseRule,
)
from udrive.diagnostics import has_errors
from udrive.params import ParameterStore, Value
from udrive.scene import Scene, eval_condition, matches


@dataclass
class ActiveRule:
    name: str
    seq: int
    tick: int
    bindings: dict[str, Value]
    expiring: bool = False


@dataclass
class CommandResult:
    command: OnlineCommand
    ok: bool
    message: str = ""


@dataclass
class StepRecord:
    tick: int
    active: tuple[str, ...]
    rejected: tuple[str, ...]
    params: dict[str, Value]
    new_manoeuvres: tuple[ManoeuvreCommand, ...]
    command_results: tuple[CommandResult, ...]
    notes: tuple[str, ...]
    ops: int


class Engine:
    """Deterministic function of (program, scene stream, command stream)."""

    def __init__(self, program: ast.Program, catalog: Catalog, params: ParameterStore):
        self.catalog = catalog
        self.rules: list[ast.Rule] = list(program.rules)
        self.params = params
        self.active: list[ActiveRule] = []
        self.tick = 0
        self._seq = 0
        self.last_step_ops = 0

    # queries

    def active_names(self) -> tuple[str, ...]:
        return tuple(entry.name for entry in self.active)

    def rule_named(self, name: str) -> Optional[ast.Rule]:
        for rule in self.rules:
            if rule.name == name:
                return rule
        return None

    def _active_entry(self, name: str) -> Optional[ActiveRule]:
        for entry in self.active:
            if entry.name == name:
                return entry
        return None

    # binding resolution

    def resolve_bindings(
        self, rule: ast.Rule, scene: Optional[Scene]
    ) -> tuple[dict[str, Value], list[ManoeuvreCommand], list[MetaCommand]]:
        """Freeze a rule's actions against the current effective parameters."""
        bindings: dict[str, Value] = {}
        manoeuvres: list[ManoeuvreCommand] = []
        metas: list[MetaCommand] = []
        ego_speed = scene.ego.speed if scene is not None else None
        for call in rule.actions:
            result = action_binding(call, self.params, ego_speed, self.catalog)
            if isinstance(result, MetaCommand):
                metas.append(result)
            elif isinstance(result, list):
                bindings.update(result)
            else:
                manoeuvres.append(result)
            self.last_step_ops += 1
        return bindings, manoeuvres, metas

    def _conflicts_with_active(self, bindings: dict[str, Value]) -> Optional[str]:
        for entry in self.active:
            for key, value in bindings.items():
                self.last_step_ops += 1
                if key in entry.bindings and entry.bindings[key] != value:
                    return entry.name
        return None

    def _conflicts_with_override(self, bindings: dict[str, Value]) -> Optional[str]:
        for key, value in bindings.items():
            override = self.params.override_value(key)
            if override is not None and override != value:
                return key
        return None

    def _deactivate(self, name: str) -> None:
        self.active = [entry for entry in self.active if entry.name != name]
        self.params.drop_overlay(name)

    # the per-tick update

    def step(
        self,
        scene: Scene,
        events: frozenset,
        online: list[OnlineCommand] | None = None,
    ) -> StepRecord:
        self.last_step_ops = 0
        rejected: list[str] = []
        notes: list[str] = []
        new_manoeuvres: list[ManoeuvreCommand] = []

        # 1. exit triggers end sustained application
        for entry in list(self.active):
            self.last_step_ops += 1
            rule = self.rule_named(entry.name)
            if rule is None or rule.exit_trigger is None:
                continue
            if matches(rule.exit_trigger.id, rule.exit_trigger.arg, events):
                self._deactivate(entry.name)
                notes.append(f"exit:{entry.name}")

        # 2. admission in textual order
        active_now = {entry.name for entry in self.active}
        for rule in self.rules:
            self.last_step_ops += 1
            if rule.name in active_now:
                continue
            if not matches(rule.trigger.id, rule.trigger.arg, events):
                continue
            conds_ok = True
            for negated, cond in rule.conditions:
                self.last_step_ops += 1
                if not eval_condition(cond, negated, scene):
                    conds_ok = False
                    break
            if not conds_ok:
                continue
            try:
                bindings, manoeuvres, metas = self.resolve_bindings(rule, scene)
            except DomainViolation as exc:
                rejected.append(rule.name)
                notes.append(f"domain:{rule.name}:{exc}")
                continue
            blocker = self._conflicts_with_active(bindings)
            if blocker is not None:
                rejected.append(rule.name)
                notes.append(f"conflict:{rule.name}:{blocker}")
                continue
            override_key = self._conflicts_with_override(bindings)
            if override_key is not None:
                rejected.append(rule.name)
                notes.append(f"override-conflict:{rule.name}:{override_key}")
                continue
            self._seq += 1
            entry = ActiveRule(rule.name, self._seq, self.tick, bindings)
            if rule.exit_trigger is not None and matches(
                rule.exit_trigger.id, rule.exit_trigger.arg, events
            ):
                entry.expiring = True
            self.active.append(entry)
            active_now.add(rule.name)
            self.params.set_overlay(rule.name, entry.seq, bindings)
            new_manoeuvres.extend(manoeuvres)
            for meta in metas:
                self._apply_meta(meta, scene, notes)

        # 3. online commands, arrival order, highest priority
        results: list[CommandResult] = []
        for command in online or []:
            results.append(self._apply_online(command, scene, new_manoeuvres, notes))

        params_snapshot = self.params.snapshot()
        record = StepRecord(
            tick=self.tick,
            active=self.active_names(),
            rejected=tuple(rejected),
            params=params_snapshot,
            new_manoeuvres=tuple(new_manoeuvres),
            command_results=tuple(results),
            notes=tuple(notes),
            ops=self.last_step_ops,
        )

        # end of tick: same-tick trigger+exit rules were active exactly once
        for entry in list(self.active):
            if entry.expiring:
                self._deactivate(entry.name)
                notes.append(f"exit:{entry.name}")

        self.tick += 1
        return record

    # online command handling

    def apply_online(self, command: OnlineCommand, scene: Optional[Scene] = None) -> CommandResult:
        """Apply one command outside the tick loop (validation path)."""
        sink: list[ManoeuvreCommand] = []
        return self._apply_online(command, scene, sink, [])

    def _apply_online(
        self,
        command: OnlineCommand,
        scene: Optional[Scene],
        manoeuvre_sink: list[ManoeuvreCommand],
        notes: list[str],
    ) -> CommandResult:
        if isinstance(command, OnlineAction):
            try:
                result = action_binding(
                    command.call,
                    self.params,
                    scene.ego.speed if scene is not None else None,
                    self.catalog,
                )
            except DomainViolation as exc:
                return CommandResult(command, False, str(exc))
            if isinstance(result, MetaCommand):
                return self._apply_meta_result(command, result, scene, notes)
            if isinstance(result, list):
                for key, value in result:
                    self._write_override(key, value, notes)
                return CommandResult(command, True)
            manoeuvre_sink.append(result)
            return CommandResult(command, True)

        if isinstance(command, AddRule):
            from udrive.validate import validate_rule

            if self.rule_named(command.rule.name) is not None:
                return CommandResult(
                    command, False, f"rule name {command.rule.name!r} is already used"
                )
            diags = validate_rule(command.rule, self.catalog)
            if has_errors(diags):
                return CommandResult(command, False, diags[0].message)
            self.rules.append(command.rule)
            notes.append(f"add:{command.rule.name}")
            return CommandResult(command, True)

        if isinstance(command, ClearRule):
            return self._clear_rule(command, command.rule_name, notes)

        if isinstance(command, ReviseRule):
            return self._revise_rule(command, notes)

        if isinstance(command, (CancelSpeedControl, CancelManoeuvreControl)):
            from udrive.catalog import ClearManoeuvres, ClearSpeedRamp

            manoeuvre_sink.append(
                ClearSpeedRamp() if isinstance(command, CancelSpeedControl) else ClearManoeuvres()
            )
            return CommandResult(command, True)

        return CommandResult(command, False, f"unsupported command {command!r}")

    def _write_override(self, key: str, value: Value, notes: list[str]) -> None:
        self.params.set_override(key, value)
        for entry in list(self.active):
            if key in entry.bindings and entry.bindings[key] != value:
                self._deactivate(entry.name)
                notes.append(f"deactivated:{entry.name}")

    def _apply_meta(self, meta: MetaCommand, scene: Optional[Scene], notes: list[str]) -> None:
        if meta.kind == "clear_rule":
            self._clear_rule(None, str(meta.args[0]), notes)
        elif meta.kind == "revise_rule":
            self._revise_rule(_meta_to_revise(meta), notes)

    def _apply_meta_result(
        self, command: OnlineCommand, meta: MetaCommand, scene, notes: list[str]
    ) -> CommandResult:
        if meta.kind == "clear_rule":
            return self._clear_rule(command, str(meta.args[0]), notes)
        result = self._revise_rule(_meta_to_revise(meta), notes)
        return CommandResult(command, result.ok, result.message)

    def _clear_rule(self, command, rule_name: str, notes: list[str]) -> CommandResult:
        rule = self.rule_named(rule_name)
        if rule is None:
            return CommandResult(command, False, f"unknown rule {rule_name!r}")
        self.rules = [r for r in self.rules if r.name != rule_name]
        self._deactivate(rule_name)
        notes.append(f"clear:{rule_name}")
        return CommandResult(command, True)

    def _revise_rule(self, command: ReviseRule, notes: list[str]) -> CommandResult:
        rule = self.rule_named(command.rule_name)
        if rule is None:
            return CommandResult(command, False, f"unknown rule {command.rule_name!r}")
        new_actions: list[ast.ActionCall] = []
        found = False
        for call in rule.actions:
            if call.id == command.action_id and not found:
                found = True
                if call.args:
                    new_args = call.args[:-1] + (command.value,)
                else:
                    new_args = (command.value,)
                new_actions.append(ast.ActionCall(call.id, new_args, call.span))
            else:
                new_actions.append(call)
        if not found:
            return CommandResult(
                command,
                False,
                f"rule {command.rule_name!r} has no action {command.action_id!r}",
            )
        revised = ast.Rule(
            rule.name, rule.trigger, rule.conditions, tuple(new_actions), rule.exit_trigger, rule.span
        )
        from udrive.validate import validate_rule

        diags = validate_rule(revised, self.catalog)
        if has_errors(diags):
            return CommandResult(command, False, diags[0].message)
        self.rules = [revised if r.name == rule.name else r for r in self.rules]
        notes.append(f"revise:{rule.name}")

        entry = self._active_entry(rule.name)
        if entry is not None:
            # rebind in place, resolving relative actions against the state
            # beneath this rule's own overlay
            self.params.drop_overlay(rule.name)
            try:
                bindings, _, _ = self.resolve_bindings(revised, None)
            except DomainViolation as exc:
                self.active = [e for e in self.active if e.name != rule.name]
                return CommandResult(command, False, str(exc))
            if (
                self._conflicts_with_active_excluding(rule.name, bindings) is not None
                or self._conflicts_with_override(bindings) is not None
            ):
                self.active = [e for e in self.active if e.name != rule.name]
                notes.append(f"deactivated:{rule.name}")
            else:
                entry.bindings = bindings
                self.params.set_overlay(rule.name, entry.seq, bindings)
        return CommandResult(command, True)

    def _conflicts_with_active_excluding(
        self, name: str, bindings: dict[str, Value]
    ) -> Optional[str]:
        for entry in self.active:
            if entry.name == name:
                continue
            for key, value in bindings.items():
                if key in entry.bindings and entry.bindings[key] != value:
                    return entry.name
        return None


def _meta_to_revise(meta: MetaCommand) -> ReviseRule:
    raw = meta.args[2]
    if isinstance(raw, bool):
        value = ast.boolean(raw)
    elif isinstance(raw, float):
        value = ast.number(raw)
    else:
        value = ast.enum(str(raw))
    return ReviseRule(str(meta.args[0]), str(meta.args[1]), value)
