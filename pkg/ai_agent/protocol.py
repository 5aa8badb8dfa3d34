"""
Informes del Factor Analyst y del Argument Polisher: tipos, parseo estricto y serialización.
"""
import json
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

from arguments.parsing import extract_json_object

from .exceptions import MalformedReportError
from .serializers import AnalystReportSerializer, PolisherReportSerializer


class AnalysisOutcome(str, Enum):
    REQUIRES_ABSTENTION = "REQUIRES_ABSTENTION"
    REQUIRES_CORRECTION = "REQUIRES_CORRECTION"
    VALID_ARGUMENT = "VALID_ARGUMENT"


class AbstentionReason(str, Enum):
    NO_COMMON_FACTORS = "NoCommonFactors"
    UNFAVORABLE_OUTCOME = "UnfavorableOutcome"
    BOTH = "Both"


class Accuracy(str, Enum):
    ACCURATE = "Accurate"
    MINOR = "MinorInaccuracies"
    MAJOR = "MajorInaccuracies"


class Strength(str, Enum):
    STRONG = "Strong"
    MODERATE = "Moderate"
    WEAK = "Weak"


class Utilization(str, Enum):
    EXCELLENT = "Excellent"
    GOOD = "Good"
    FAIR = "Fair"
    POOR = "Poor"


@dataclass(frozen=True)
class CorrectionDetails:
    fabricated_or_misrepresented_factors: Tuple[str, ...] = ()
    misrepresented_tsc_outcome: Optional[str] = None
    other_issues_for_correction: Optional[str] = None

    def as_text(self) -> str:
        lines = [f"- {item}" for item in self.fabricated_or_misrepresented_factors]
        if self.misrepresented_tsc_outcome:
            lines.append(f"- {self.misrepresented_tsc_outcome}")
        if self.other_issues_for_correction:
            lines.append(f"- {self.other_issues_for_correction}")
        return "\n".join(lines)


@dataclass(frozen=True)
class AnalystReport:
    analysis_outcome: AnalysisOutcome
    summary: str
    reason_for_abstention: Optional[AbstentionReason] = None
    correction_details: Optional[CorrectionDetails] = None

    def __post_init__(self):
        if (self.reason_for_abstention is not None) != (self.analysis_outcome == AnalysisOutcome.REQUIRES_ABSTENTION):
            raise ValueError("abstention_details solo acompaña a REQUIRES_ABSTENTION")
        if (self.correction_details is not None) != (self.analysis_outcome == AnalysisOutcome.REQUIRES_CORRECTION):
            raise ValueError("correction_details solo acompaña a REQUIRES_CORRECTION")

    @property
    def requires_abstention(self) -> bool:
        return self.analysis_outcome == AnalysisOutcome.REQUIRES_ABSTENTION

    @property
    def requires_correction(self) -> bool:
        return self.analysis_outcome == AnalysisOutcome.REQUIRES_CORRECTION

    def to_dict(self) -> Dict:
        data = {"analysis_outcome": self.analysis_outcome.value, "summary": self.summary}
        if self.reason_for_abstention is not None:
            data["abstention_details"] = {"reason_for_abstention": self.reason_for_abstention.value}
        if self.correction_details is not None:
            details = {
                "fabricated_or_misrepresented_factors": list(
                    self.correction_details.fabricated_or_misrepresented_factors
                )
            }
            if self.correction_details.misrepresented_tsc_outcome is not None:
                details["misrepresented_tsc_outcome"] = self.correction_details.misrepresented_tsc_outcome
            if self.correction_details.other_issues_for_correction is not None:
                details["other_issues_for_correction"] = self.correction_details.other_issues_for_correction
            data["correction_details"] = details
        return data


@dataclass(frozen=True)
class PolisherReport:
    argument_segment_type: str
    accuracy_assessment: Accuracy
    strength_assessment: Strength
    factor_utilization_assessment: Utilization
    feedback_summary: str
    revision_needed: bool
    instructions_for_developer: Optional[str] = None
    polished_argument: Optional[str] = None

    def __post_init__(self):
        if bool(self.instructions_for_developer) != self.revision_needed:
            raise ValueError("instructions_for_developer existe si y solo si revision_needed")

    def to_dict(self) -> Dict:
        data = {
            "argument_segment_type": self.argument_segment_type,
            "accuracy_assessment": self.accuracy_assessment.value,
            "strength_assessment": self.strength_assessment.value,
            "factor_utilization_assessment": self.factor_utilization_assessment.value,
            "feedback_summary": self.feedback_summary,
            "revision_needed": self.revision_needed,
        }
        if self.instructions_for_developer is not None:
            data["instructions_for_developer"] = self.instructions_for_developer
        if self.polished_argument is not None:
            data["polished_argument"] = self.polished_argument
        return data


def _load(role: str, text: str) -> Dict:
    obj = extract_json_object(text)
    if obj is None:
        raise MalformedReportError(role, "no hay un objeto JSON", raw=text or "")
    return obj


def _blank_to_none(value: Optional[str]) -> Optional[str]:
    return value if value else None


def analyst_report_from_dict(data: Dict, raw: str = "") -> AnalystReport:
    serializer = AnalystReportSerializer(data=data)
    if not serializer.is_valid():
        raise MalformedReportError("analista", str(dict(serializer.errors)), raw=raw, errors=serializer.errors)
    attrs = serializer.validated_data
    abstention = attrs.get("abstention_details")
    correction = attrs.get("correction_details")
    return AnalystReport(
        analysis_outcome=AnalysisOutcome(attrs["analysis_outcome"]),
        summary=attrs["summary"],
        reason_for_abstention=AbstentionReason(abstention["reason_for_abstention"]) if abstention else None,
        correction_details=CorrectionDetails(
            tuple(correction.get("fabricated_or_misrepresented_factors", ())),
            _blank_to_none(correction.get("misrepresented_tsc_outcome")),
            _blank_to_none(correction.get("other_issues_for_correction")),
        ) if correction else None,
    )


def polisher_report_from_dict(data: Dict, raw: str = "") -> PolisherReport:
    serializer = PolisherReportSerializer(data=data)
    if not serializer.is_valid():
        raise MalformedReportError("pulidor", str(dict(serializer.errors)), raw=raw, errors=serializer.errors)
    attrs = serializer.validated_data
    instructions = _blank_to_none(attrs.get("instructions_for_developer"))
    return PolisherReport(
        argument_segment_type=attrs["argument_segment_type"],
        accuracy_assessment=Accuracy(attrs["accuracy_assessment"]),
        strength_assessment=Strength(attrs["strength_assessment"]),
        factor_utilization_assessment=Utilization(attrs["factor_utilization_assessment"]),
        feedback_summary=attrs["feedback_summary"],
        revision_needed=attrs["revision_needed"],
        instructions_for_developer=instructions,
        polished_argument=_blank_to_none(attrs.get("polished_argument")),
    )


def parse_analyst_report(text: str) -> AnalystReport:
    return analyst_report_from_dict(_load("analista", text), raw=text)


def parse_polisher_report(text: str) -> PolisherReport:
    return polisher_report_from_dict(_load("pulidor", text), raw=text)


def serialize_analyst_report(report: AnalystReport) -> str:
    return json.dumps(report.to_dict(), ensure_ascii=False, indent=2)


def serialize_polisher_report(report: PolisherReport) -> str:
    return json.dumps(report.to_dict(), ensure_ascii=False, indent=2)
