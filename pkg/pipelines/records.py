"""
RunRecord: resultado de un pipeline sobre una tripleta, y su forma de línea de transcript.
"""
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

from ai_agent.prompts import Method
from ai_agent.protocol import (
    AnalystReport,
    PolisherReport,
    analyst_report_from_dict,
    polisher_report_from_dict,
)
from arguments.plies import PLIES, ThreePlyArgument
from scenarios.cases import CaseSlot, Outcome, ScenarioMode

from .exceptions import RecordInvariantError

# Orden y roles fijos de los plies: (Plaintiff, c2), (Defendant, c3), (Plaintiff, c2)
ROLE_TABLE: Tuple[Tuple[Outcome, CaseSlot], ...] = tuple((p.arguing_side, p.primary_slot) for p in PLIES)

REFLECTIVE_METHODS = (Method.RMA,)


class RunStatus(str, Enum):
    COMPLETED = "Completed"
    ABSTAINED = "Abstained"
    FAILED = "Failed"


@dataclass(frozen=True)
class PlyReview:
    """Informes de una ronda de revisión de RMA (y de la re-revisión, si hubo)."""

    ply_index: int
    analyst: Optional[AnalystReport] = None
    polisher: Optional[PolisherReport] = None
    feedback: Optional[str] = None
    revised_analyst: Optional[AnalystReport] = None
    revised_polisher: Optional[PolisherReport] = None

    @property
    def revised(self) -> bool:
        return self.feedback is not None

    @property
    def final_analyst(self) -> Optional[AnalystReport]:
        return self.revised_analyst or self.analyst

    def to_dict(self) -> Dict:
        data = {"ply_index": self.ply_index}
        for name in ("analyst", "polisher", "revised_analyst", "revised_polisher"):
            report = getattr(self, name)
            if report is not None:
                data[name] = report.to_dict()
        if self.feedback is not None:
            data["feedback"] = self.feedback
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "PlyReview":
        def analyst(key):
            return analyst_report_from_dict(data[key]) if data.get(key) else None

        def polisher(key):
            return polisher_report_from_dict(data[key]) if data.get(key) else None

        return cls(
            ply_index=int(data["ply_index"]),
            analyst=analyst("analyst"),
            polisher=polisher("polisher"),
            feedback=data.get("feedback"),
            revised_analyst=analyst("revised_analyst"),
            revised_polisher=polisher("revised_polisher"),
        )


def argument_to_dict(argument: ThreePlyArgument) -> Dict:
    if argument.abstained:
        return {"abstention": {"ply_index": argument.abstention.ply_index, "reason": argument.abstention.reason}}
    return {
        "plies": {ply.key: argument.ply_text(ply) for ply in PLIES},
        "terminate_in_prose": argument.terminate_in_prose,
    }


def argument_from_dict(data: Dict) -> ThreePlyArgument:
    if "abstention" in data:
        abstention = data["abstention"]
        return ThreePlyArgument.abstained_at(int(abstention["ply_index"]), abstention.get("reason", ""))
    plies = data["plies"]
    return ThreePlyArgument.completed(
        *(plies[ply.key] for ply in PLIES),
        terminate_in_prose=bool(data.get("terminate_in_prose", False)),
    )


@dataclass(frozen=True)
class RunRecord:
    triple_id: str
    method: Method
    backend: str
    model: str
    mode: ScenarioMode
    status: RunStatus
    result: Optional[ThreePlyArgument] = None
    per_ply_reports: Tuple[PlyReview, ...] = ()
    # Una entrada por ply intentado
    revision_count_per_ply: Tuple[int, ...] = ()
    roles: Tuple[Tuple[Outcome, CaseSlot], ...] = ()
    decisions: Tuple[str, ...] = ()
    failure: Optional[str] = None
    failed_ply: Optional[int] = None
    reprompts: int = 0
    started_at: str = field(default="", compare=False)
    finished_at: str = field(default="", compare=False)

    def __post_init__(self):
        if any(count not in (0, 1) for count in self.revision_count_per_ply):
            raise RecordInvariantError(self.triple_id, f"más de una revisión por ply: {self.revision_count_per_ply}")
        if self.roles != ROLE_TABLE[: len(self.roles)]:
            raise RecordInvariantError(self.triple_id, f"asignación de roles inválida: {self.roles}")
        if len(self.revision_count_per_ply) > len(self.roles):
            raise RecordInvariantError(self.triple_id, "hay conteos de revisión para plies no intentados")
        if Method(self.method) not in REFLECTIVE_METHODS and (self.per_ply_reports or any(self.revision_count_per_ply)):
            raise RecordInvariantError(self.triple_id, f"{Method(self.method).value} no consulta analista ni pulidor")

        status = RunStatus(self.status)
        if status == RunStatus.FAILED:
            if self.result is not None or not self.failure:
                raise RecordInvariantError(self.triple_id, "un Failed lleva failure y ningún resultado")
        elif self.result is None:
            raise RecordInvariantError(self.triple_id, f"{status.value} necesita un resultado")
        elif self.result.abstained != (status == RunStatus.ABSTAINED):
            raise RecordInvariantError(self.triple_id, "Abstained si y solo si el resultado es una abstención")

    @property
    def abstained(self) -> bool:
        return self.status == RunStatus.ABSTAINED

    @property
    def completed(self) -> bool:
        return self.status == RunStatus.COMPLETED

    @property
    def failed(self) -> bool:
        return self.status == RunStatus.FAILED

    @property
    def total_revisions(self) -> int:
        return sum(self.revision_count_per_ply)

    def to_dict(self) -> Dict:
        data = {
            "triple_id": self.triple_id,
            "method": Method(self.method).value,
            "backend": self.backend,
            "model": self.model,
            "mode": ScenarioMode(self.mode).value,
            "status": RunStatus(self.status).value,
            "result": argument_to_dict(self.result) if self.result is not None else None,
            "roles": [[side.value, slot.value] for side, slot in self.roles],
            "revision_count_per_ply": list(self.revision_count_per_ply),
            "agent_reports": [review.to_dict() for review in self.per_ply_reports],
            "decisions": list(self.decisions),
            "reprompts": self.reprompts,
            "timestamps": {"started_at": self.started_at, "finished_at": self.finished_at},
        }
        if self.failure:
            data["failure"] = {"error": self.failure, "ply": self.failed_ply}
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "RunRecord":
        from .serializers import RunRecordSerializer

        serializer = RunRecordSerializer(data=data)
        if not serializer.is_valid():
            raise ValueError(f"registro inválido: {dict(serializer.errors)}")
        attrs = serializer.validated_data
        failure = attrs.get("failure") or {}
        timestamps = attrs.get("timestamps") or {}
        return cls(
            triple_id=attrs["triple_id"],
            method=Method(attrs["method"]),
            backend=attrs["backend"],
            model=attrs["model"],
            mode=ScenarioMode(attrs["mode"]),
            status=RunStatus(attrs["status"]),
            result=argument_from_dict(data["result"]) if data.get("result") else None,
            per_ply_reports=tuple(PlyReview.from_dict(r) for r in attrs["agent_reports"]),
            revision_count_per_ply=tuple(attrs["revision_count_per_ply"]),
            roles=tuple((Outcome(side), CaseSlot(slot)) for side, slot in attrs["roles"]),
            decisions=tuple(attrs["decisions"]),
            failure=failure.get("error"),
            failed_ply=failure.get("ply"),
            reprompts=attrs["reprompts"],
            started_at=timestamps.get("started_at", ""),
            finished_at=timestamps.get("finished_at", ""),
        )


def dumps_record(record: RunRecord) -> str:
    return json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True)


def loads_record(line: str) -> RunRecord:
    return RunRecord.from_dict(json.loads(line))


def roles_for(ply_count: int) -> Tuple[Tuple[Outcome, CaseSlot], ...]:
    return ROLE_TABLE[:ply_count]
