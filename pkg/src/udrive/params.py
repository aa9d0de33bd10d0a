"""Layered planner-parameter store.

Lookup order: online override, newest-activation rule overlay, baseline.
Removing a layer restores whatever sits below it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Value = Union[float, bool, str, tuple[float, float]]


@dataclass
class _Overlay:
    rule_name: str
    seq: int
    bindings: dict[str, Value]


@dataclass
class ParameterStore:
    baseline: dict[str, Value]
    _overlays: list[_Overlay] = field(default_factory=list)
    _overrides: dict[str, Value] = field(default_factory=dict)

    def effective(self, key: str) -> Value:
        if key in self._overrides:
            return self._overrides[key]
        newest: Optional[_Overlay] = None
        for overlay in self._overlays:
            if key in overlay.bindings and (newest is None or overlay.seq > newest.seq):
                newest = overlay
        if newest is not None:
            return newest.bindings[key]
        return self.baseline[key]

    def effective_excluding(self, rule_name: str, key: str) -> Value:
        if key in self._overrides:
            return self._overrides[key]
        newest: Optional[_Overlay] = None
        for overlay in self._overlays:
            if overlay.rule_name == rule_name:
                continue
            if key in overlay.bindings and (newest is None or overlay.seq > newest.seq):
                newest = overlay
        if newest is not None:
            return newest.bindings[key]
        return self.baseline[key]

    def snapshot(self) -> dict[str, Value]:
        return {key: self.effective(key) for key in self.baseline}

    # overlay management (rule activations)

    def set_overlay(self, rule_name: str, seq: int, bindings: dict[str, Value]) -> None:
        self.drop_overlay(rule_name)
        self._overlays.append(_Overlay(rule_name, seq, dict(bindings)))

    def drop_overlay(self, rule_name: str) -> None:
        self._overlays = [o for o in self._overlays if o.rule_name != rule_name]

    def overlay_rules(self) -> list[str]:
        return [o.rule_name for o in self._overlays]

    # online overrides

    def set_override(self, key: str, value: Value) -> None:
        self._overrides[key] = value

    def override_value(self, key: str) -> Optional[Value]:
        return self._overrides.get(key)

    def has_override(self, key: str) -> bool:
        return key in self._overrides

    def override_keys(self) -> list[str]:
        return list(self._overrides)

    def clone_baseline(self) -> "ParameterStore":
        return ParameterStore(dict(self.baseline))
