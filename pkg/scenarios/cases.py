from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Optional, Tuple

from factors.catalog import FactorCatalog, lookup

from .exceptions import InvalidTripleError


class Outcome(str, Enum):
    PLAINTIFF = "Plaintiff"
    DEFENDANT = "Defendant"


class CaseSlot(str, Enum):
    C1 = "c1"
    C2 = "c2"
    C3 = "c3"


class ScenarioMode(str, Enum):
    ARGUABLE = "Arguable"
    MISMATCHED = "Mismatched"
    NON_ARGUABLE = "NonArguable"

    @classmethod
    def parse(cls, value: str) -> "ScenarioMode":
        """Acepta "Arguable", "non-arguable", "NON_ARGUABLE", ..."""
        if isinstance(value, cls):
            return value
        key = "".join(ch for ch in str(value).lower() if ch.isalnum())
        for mode in cls:
            if mode.value.lower() == key:
                return mode
        raise ValueError(f"modo de escenario desconocido: {value!r}")


SLOTS: Tuple[CaseSlot, ...] = (CaseSlot.C1, CaseSlot.C2, CaseSlot.C3)

# Nombres de caso por posición dentro de la tripleta
SLOT_CASE_NAMES = {CaseSlot.C1: "TSC1", CaseSlot.C2: "TSC2", CaseSlot.C3: "TSC3"}


@dataclass(frozen=True)
class Case:
    name: str
    outcome: Optional[Outcome]
    factors: Tuple[int, ...]

    def __post_init__(self):
        if len(set(self.factors)) != len(self.factors):
            raise InvalidTripleError(f"{self.name}: factores duplicados {self.factors}")
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @property
    def factor_set(self) -> FrozenSet[int]:
        return frozenset(self.factors)


@dataclass(frozen=True)
class CaseTriple:
    id: str
    c1: Case
    c2: Case
    c3: Case
    mode: ScenarioMode
    seed: int
    complexity: int

    def case(self, slot: CaseSlot) -> Case:
        return {CaseSlot.C1: self.c1, CaseSlot.C2: self.c2, CaseSlot.C3: self.c3}[CaseSlot(slot)]

    def ground_truth(self) -> Dict[CaseSlot, FrozenSet[int]]:
        return {slot: self.case(slot).factor_set for slot in SLOTS}

    @property
    def n_gt(self) -> int:
        return sum(len(c.factors) for c in (self.c1, self.c2, self.c3))

    def validate(self, catalog: FactorCatalog) -> None:
        """Invariantes estructurales (no el contrato del modo: eso es classify_triple)."""
        if self.c1.outcome is not None:
            raise InvalidTripleError(f"{self.id}: c1 no debe tener resultado")
        if self.c2.outcome is None or self.c3.outcome is None:
            raise InvalidTripleError(f"{self.id}: los precedentes necesitan resultado")
        low, high = self.complexity - 1, self.complexity + 1
        for case in (self.c1, self.c2, self.c3):
            if not low <= len(case.factors) <= high:
                raise InvalidTripleError(
                    f"{self.id}: {case.name} tiene {len(case.factors)} factores, fuera de [{low}, {high}]"
                )
            for factor_id in case.factors:
                lookup(catalog, factor_id)
