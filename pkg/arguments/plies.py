from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Optional, Tuple

from scenarios.cases import SLOTS, CaseSlot, Outcome


class Ply(int, Enum):
    PLAINTIFF_ARGUMENT = 1
    DEFENDANT_COUNTER = 2
    PLAINTIFF_REBUTTAL = 3

    @property
    def index(self) -> int:
        return int(self.value)

    @property
    def key(self) -> str:
        return PLY_KEYS[self]

    @property
    def arguing_side(self) -> Outcome:
        return Outcome.DEFENDANT if self == Ply.DEFENDANT_COUNTER else Outcome.PLAINTIFF

    @property
    def primary_slot(self) -> CaseSlot:
        # La réplica se apoya de nuevo en c2 (y además distingue c3)
        return CaseSlot.C3 if self == Ply.DEFENDANT_COUNTER else CaseSlot.C2


PLY_KEYS = {
    Ply.PLAINTIFF_ARGUMENT: "Plaintiff's Argument",
    Ply.DEFENDANT_COUNTER: "Defendant's Counterargument",
    Ply.PLAINTIFF_REBUTTAL: "Plaintiff's Rebuttal",
}

PLIES: Tuple[Ply, ...] = tuple(Ply)

TERMINATE = "TERMINATE"


@dataclass(frozen=True)
class Abstention:
    ply_index: int
    reason: str

    def render(self) -> str:
        return f"{TERMINATE}: {self.reason}" if self.reason else TERMINATE


@dataclass(frozen=True)
class ThreePlyArgument:
    """Tres plies completos, o una abstención (TERMINATE) en un ply concreto."""

    plaintiff_argument: Optional[str] = None
    defendant_counter: Optional[str] = None
    plaintiff_rebuttal: Optional[str] = None
    abstention: Optional[Abstention] = None
    # Auditoría: algún ply sustantivo menciona TERMINATE fuera del prefijo
    terminate_in_prose: bool = field(default=False, compare=False)

    def __post_init__(self):
        texts = (self.plaintiff_argument, self.defendant_counter, self.plaintiff_rebuttal)
        if self.abstention is not None:
            if any(t is not None for t in texts):
                raise ValueError("una abstención no lleva plies")
            if self.abstention.ply_index not in (1, 2, 3):
                raise ValueError(f"ply de abstención inválido: {self.abstention.ply_index}")
            return
        if any(not (t and t.strip()) for t in texts):
            raise ValueError("los tres plies deben tener texto")

    @classmethod
    def completed(cls, plaintiff: str, defendant: str, rebuttal: str, terminate_in_prose: bool = False):
        return cls(plaintiff, defendant, rebuttal, terminate_in_prose=terminate_in_prose)

    @classmethod
    def abstained_at(cls, ply_index: int, reason: str):
        return cls(abstention=Abstention(int(ply_index), reason))

    @property
    def abstained(self) -> bool:
        return self.abstention is not None

    @property
    def plies(self) -> Tuple[str, ...]:
        if self.abstained:
            return ()
        return (self.plaintiff_argument, self.defendant_counter, self.plaintiff_rebuttal)

    def ply_text(self, ply: Ply) -> str:
        return self.plies[Ply(ply).index - 1]


@dataclass(frozen=True)
class ExtractedFactors:
    """
    per_case: factores atribuidos por el texto a cada caso (sin duplicados, en orden
    de aparición). negated/outcomes/side_mismatches son auditoría del extractor.
    """

    per_case: Dict[CaseSlot, Tuple[int, ...]]
    negated: Dict[CaseSlot, Tuple[int, ...]] = field(default_factory=dict)
    outcomes: Dict[CaseSlot, Outcome] = field(default_factory=dict)
    side_mismatches: Tuple[Tuple[CaseSlot, int], ...] = ()
    mentioned_slots: FrozenSet[CaseSlot] = frozenset()

    def __post_init__(self):
        for slot in SLOTS:
            ids = self.per_case.get(slot, ())
            if len(set(ids)) != len(ids):
                raise ValueError(f"{slot.value}: factores repetidos {ids}")

    @classmethod
    def empty(cls) -> "ExtractedFactors":
        return cls({slot: () for slot in SLOTS})

    def factors_for(self, slot: CaseSlot) -> FrozenSet[int]:
        return frozenset(self.per_case.get(CaseSlot(slot), ()))

    def negated_for(self, slot: CaseSlot) -> FrozenSet[int]:
        return frozenset(self.negated.get(CaseSlot(slot), ()))

    def as_sets(self) -> Dict[CaseSlot, FrozenSet[int]]:
        return {slot: self.factors_for(slot) for slot in SLOTS}

    def to_dict(self) -> Dict:
        data = {slot.value: list(self.per_case.get(slot, ())) for slot in SLOTS}
        if any(self.negated.values()):
            data["negated"] = {s.value: list(ids) for s, ids in self.negated.items() if ids}
        if self.outcomes:
            data["outcomes"] = {s.value: o.value for s, o in sorted(self.outcomes.items())}
        if self.side_mismatches:
            data["side_mismatches"] = [[s.value, i] for s, i in self.side_mismatches]
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "ExtractedFactors":
        return cls(
            per_case={slot: tuple(data.get(slot.value, ())) for slot in SLOTS},
            negated={CaseSlot(s): tuple(ids) for s, ids in data.get("negated", {}).items()},
            outcomes={CaseSlot(s): Outcome(o) for s, o in data.get("outcomes", {}).items()},
            side_mismatches=tuple((CaseSlot(s), int(i)) for s, i in data.get("side_mismatches", ())),
        )
