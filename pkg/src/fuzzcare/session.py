"""Per-diagnosis session state machine.

States move strictly forward: Init -> CollectingInputs -> Diagnosed ->
Recommended -> Closed. The result flag starts false and flips true only when
the recommendation step completes, so no report can claim success earlier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kb import INPUT_ORDER, DiagnosisReport, PatientRecord

STATES = ("Init", "CollectingInputs", "Diagnosed", "Recommended", "Closed")


class InvalidTransition(Exception):
    pass


@dataclass
class DiagnosisSession:
    id: str
    state: str = "Init"
    result: bool = False
    fields: dict = field(default_factory=dict)
    report: DiagnosisReport | None = None

    def _advance(self, to: str):
        if STATES.index(to) <= STATES.index(self.state):
            raise InvalidTransition(f"cannot move {self.state} -> {to}")
        self.state = to

    def collect(self, name: str, value):
        if self.state not in ("Init", "CollectingInputs"):
            raise InvalidTransition(f"cannot collect inputs in state {self.state}")
        if self.state == "Init":
            self._advance("CollectingInputs")
        self.fields[name] = value

    def record(self) -> PatientRecord:
        missing = [n for n in INPUT_ORDER if n not in self.fields]
        if missing:
            raise InvalidTransition(f"missing inputs: {missing}")
        return PatientRecord(**self.fields)

    def mark_diagnosed(self):
        self._advance("Diagnosed")

    def mark_recommended(self, report: DiagnosisReport):
        if self.state != "Diagnosed":
            raise InvalidTransition(f"cannot recommend from state {self.state}")
        self._advance("Recommended")
        self.report = report
        self.result = True

    def close(self):
        self._advance("Closed")
