"""Online command types: driver inputs applied mid-journey."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from udrive.ast import ActionCall, Literal, Rule


@dataclass(frozen=True)
class OnlineAction:
    call: ActionCall


@dataclass(frozen=True)
class AddRule:
    rule: Rule


@dataclass(frozen=True)
class ReviseRule:
    rule_name: str
    action_id: str
    value: Literal


@dataclass(frozen=True)
class ClearRule:
    rule_name: str


@dataclass(frozen=True)
class CancelSpeedControl:
    pass


@dataclass(frozen=True)
class CancelManoeuvreControl:
    pass


OnlineCommand = Union[
    OnlineAction,
    AddRule,
    ReviseRule,
    ClearRule,
    CancelSpeedControl,
    CancelManoeuvreControl,
]
