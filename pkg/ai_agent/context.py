from dataclasses import dataclass
from typing import FrozenSet, Tuple

from arguments.plies import Ply
from scenarios.cases import CaseSlot, CaseTriple, Outcome


@dataclass(frozen=True)
class PlyContext:
    ply_index: int
    arguing_side: Outcome
    primary_precedent_slot: CaseSlot
    triple: CaseTriple
    prior_plies: Tuple[str, ...] = ()

    def __post_init__(self):
        ply = Ply(self.ply_index)
        if (self.arguing_side, self.primary_precedent_slot) != (ply.arguing_side, ply.primary_slot):
            raise ValueError(
                f"ply {self.ply_index} debe ser ({ply.arguing_side.value}, {ply.primary_slot.value})"
            )
        if len(self.prior_plies) != self.ply_index - 1:
            raise ValueError(f"el ply {self.ply_index} necesita {self.ply_index - 1} plies previos")

    @classmethod
    def for_ply(cls, triple: CaseTriple, ply_index: int, prior_plies=()) -> "PlyContext":
        ply = Ply(ply_index)
        return cls(ply.index, ply.arguing_side, ply.primary_slot, triple, tuple(prior_plies))

    @property
    def ply(self) -> Ply:
        return Ply(self.ply_index)

    @property
    def is_rebuttal(self) -> bool:
        return self.ply == Ply.PLAINTIFF_REBUTTAL

    @property
    def primary(self):
        return self.triple.case(self.primary_precedent_slot)

    @property
    def opposing_slot(self) -> CaseSlot:
        return CaseSlot.C2 if self.primary_precedent_slot == CaseSlot.C3 else CaseSlot.C3

    @property
    def shared_with_primary(self) -> FrozenSet[int]:
        return self.triple.c1.factor_set & self.primary.factor_set

    @property
    def primary_outcome_favorable(self) -> bool:
        return self.primary.outcome == self.arguing_side
