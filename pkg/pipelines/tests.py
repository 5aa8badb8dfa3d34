import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from ai_agent.agents import AgentRoster, LLMDeveloper, OracleAnalyst, OraclePolisher, build_roster
from ai_agent.context import PlyContext
from ai_agent.exceptions import AuthenticationError, TransportError
from ai_agent.mocks import MockBehavior, MockDeveloper
from ai_agent.prompts import Method, build_developer_prompt
from ai_agent.protocol import Accuracy, AnalysisOutcome, PolisherReport, Strength, Utilization
from ai_agent.service import BackendConfig, BackendKind, FixtureBackend, GenerationParams
from ai_agent.tests import ScriptedBackend
from arguments.extraction import extract_factors_canonical
from arguments.parsing import serialize_single_ply, serialize_three_ply
from arguments.plies import Ply
from factors.catalog import load_catalog
from scenarios.cases import CaseSlot, Outcome, ScenarioMode
from scenarios.generator import generate_set
from scenarios.tests import table_one_triple

from .engine import run_ma, run_pipeline, run_rma, run_sa, run_sa_ep
from .exceptions import RecordInvariantError, TranscriptFormatError
from .records import RunRecord, RunStatus, dumps_record, loads_record
from .runner import fail_matrix, read_transcript, run_matrix, transcript_path


def mock_roster(behavior=MockBehavior.FAITHFUL, fabrications=1, seed=0):
    config = BackendConfig(
        name=f"mock-{behavior.value.lower()}",
        kind=BackendKind.MOCK,
        behavior=behavior.value,
        fabrications=fabrications,
        seed=seed,
    )
    return build_roster(config)


def scripted_roster(script, **overrides):
    backend = ScriptedBackend(script, **overrides)
    developer = LLMDeveloper(backend)
    return AgentRoster(developer, OracleAnalyst(), OraclePolisher()), backend


class StubbornDeveloper:
    """Añade siempre un factor que no tiene ningún caso, incluso al revisar."""

    name = "stubborn"
    model = "stubborn-1"

    def __init__(self):
        self.mock = MockDeveloper()

    def generate(self, context, variant, feedback=None, reminder=False):
        text = self.mock.draft(context).content + " c1 also has F27 Disclosure-in-public-forum (D)."
        return serialize_single_ply(context.ply, text)


class PolishingStub:
    def __init__(self, polished):
        self.polished = polished

    def review(self, context, ply_text, report):
        return PolisherReport(
            argument_segment_type=context.ply.key,
            accuracy_assessment=Accuracy.ACCURATE,
            strength_assessment=Strength.STRONG,
            factor_utilization_assessment=Utilization.EXCELLENT,
            feedback_summary="fine",
            revision_needed=False,
            polished_argument=self.polished,
        )


# =========================
# SA / SA_EP / MA
# =========================
class SingleTurnTests(SimpleTestCase):
    def test_sa_on_arguable_completes_three_plies(self):
        record = run_sa(table_one_triple(), mock_roster())
        self.assertEqual(record.status, RunStatus.COMPLETED)
        self.assertEqual(len(record.result.plies), 3)
        self.assertEqual(record.per_ply_reports, ())
        self.assertEqual(record.revision_count_per_ply, (0, 0, 0))
        self.assertEqual(record.roles[1], (Outcome.DEFENDANT, CaseSlot.C3))

    def test_sa_non_abstaining_argues_mismatched(self):
        triple = table_one_triple(mode=ScenarioMode.MISMATCHED, swap=True)
        record = run_sa(triple, mock_roster(MockBehavior.NON_ABSTAINING))
        self.assertEqual(record.status, RunStatus.COMPLETED)

    def test_sa_ep_faithful_abstains_on_mismatched(self):
        triple = table_one_triple(mode=ScenarioMode.MISMATCHED, swap=True)
        record = run_sa_ep(triple, mock_roster())
        self.assertEqual(record.status, RunStatus.ABSTAINED)
        self.assertEqual(record.result.abstention.ply_index, 1)
        self.assertIn("developer_abstained=ply1", record.decisions)

    def test_fixture_replay(self):
        triple = table_one_triple()
        catalog = load_catalog()
        expected, _ = MockDeveloper().draft_three_ply(triple)
        with tempfile.TemporaryDirectory() as tmp:
            config = BackendConfig(name="gpt-fixture", kind=BackendKind.FIXTURE, model="gpt-test", fixture_dir=tmp)
            backend = FixtureBackend(config)
            system, user = build_developer_prompt(PlyContext.for_ply(triple, 1), None, Method.SA, catalog)
            backend.store(system, user, GenerationParams(), serialize_three_ply(expected))

            roster = AgentRoster(LLMDeveloper(backend, catalog), OracleAnalyst(catalog), OraclePolisher(catalog))
            record = run_sa(triple, roster)
        self.assertEqual(record.status, RunStatus.COMPLETED)
        self.assertEqual(record.result, expected)
        self.assertEqual(record.model, "gpt-test")

    def test_malformed_twice_fails_and_is_not_an_abstention(self):
        roster, backend = scripted_roster(["prose only", "still prose"])
        record = run_sa(table_one_triple(), roster)
        self.assertEqual(record.status, RunStatus.FAILED)
        self.assertFalse(record.abstained)
        self.assertIsNone(record.result)
        self.assertIn("MalformedOutputError", record.failure)
        self.assertEqual(len(backend.calls), 2)

    def test_reprompt_recovers(self):
        argument, _ = MockDeveloper().draft_three_ply(table_one_triple())
        roster, _ = scripted_roster(["nothing to parse", serialize_three_ply(argument)])
        record = run_sa(table_one_triple(), roster)
        self.assertEqual(record.status, RunStatus.COMPLETED)
        self.assertEqual(record.reprompts, 1)

    def test_transport_error_fails_run(self):
        roster, _ = scripted_roster([TransportError("scripted", "down")], max_retries=0)
        record = run_sa(table_one_triple(), roster)
        self.assertEqual(record.status, RunStatus.FAILED)
        self.assertIn("TransportError", record.failure)


class MultiAgentTests(SimpleTestCase):
    FIRST = "c1 and c2 share F4 Agreed-not-to-disclose (P)."
    SECOND = "c1 and c3 share F5 Agreement-not-specific (D)."
    THIRD = "c3 has F2 Bribe-employee (P), not in c1."

    def test_second_ply_prompt_carries_first_ply(self):
        roster, backend = scripted_roster([
            serialize_single_ply(Ply.PLAINTIFF_ARGUMENT, self.FIRST),
            serialize_single_ply(Ply.DEFENDANT_COUNTER, self.SECOND),
            serialize_single_ply(Ply.PLAINTIFF_REBUTTAL, self.THIRD),
        ])
        record = run_ma(table_one_triple(), roster)
        self.assertEqual(record.status, RunStatus.COMPLETED)
        self.assertEqual(record.result.plies, (self.FIRST, self.SECOND, self.THIRD))
        second_user = backend.calls[1][1]
        self.assertIn(self.FIRST, second_user)
        self.assertIn("You argue for the Defendant", second_user)
        self.assertEqual(record.per_ply_reports, ())

    def test_second_ply_malformed_twice(self):
        roster, _ = scripted_roster([serialize_single_ply(Ply.PLAINTIFF_ARGUMENT, self.FIRST), "oops", "oops again"])
        record = run_ma(table_one_triple(), roster)
        self.assertEqual(record.status, RunStatus.FAILED)
        self.assertEqual(record.failed_ply, 2)
        self.assertEqual(record.reprompts, 0)

    def test_mock_debate(self):
        record = run_ma(table_one_triple(), mock_roster())
        self.assertEqual(record.status, RunStatus.COMPLETED)
        self.assertEqual(record.revision_count_per_ply, (0, 0, 0))


# =========================
# RMA
# =========================
class ReflectiveTests(SimpleTestCase):
    def setUp(self):
        self.catalog = load_catalog()

    def test_faithful_mismatched_abstains_at_first_ply(self):
        triple = table_one_triple(mode=ScenarioMode.MISMATCHED, swap=True)
        record = run_rma(triple, mock_roster())
        self.assertEqual(record.status, RunStatus.ABSTAINED)
        self.assertEqual(record.result.abstention.ply_index, 1)
        self.assertIn("UnfavorableOutcome", record.result.abstention.reason)

    def test_analyst_abstention_wins_over_non_abstaining_developer(self):
        triple = table_one_triple(mode=ScenarioMode.MISMATCHED, swap=True)
        record = run_rma(triple, mock_roster(MockBehavior.NON_ABSTAINING))
        self.assertEqual(record.status, RunStatus.ABSTAINED)
        self.assertTrue(record.result.abstention.reason.startswith("UnfavorableOutcome"))
        review = record.per_ply_reports[0]
        self.assertEqual(review.analyst.analysis_outcome, AnalysisOutcome.REQUIRES_ABSTENTION)
        self.assertIsNone(review.polisher)
        self.assertEqual(record.revision_count_per_ply, (0,))
        self.assertIn("analyst_abstention=ply1", record.decisions)

    def test_faithful_arguable_needs_no_revision(self):
        record = run_rma(table_one_triple(), mock_roster())
        self.assertEqual(record.status, RunStatus.COMPLETED)
        self.assertEqual(record.revision_count_per_ply, (0, 0, 0))
        self.assertEqual(len(record.per_ply_reports), 3)

    def test_fabrication_is_revised_away(self):
        triples = generate_set(ScenarioMode.ARGUABLE, 5, 30, 11, self.catalog)
        roster = mock_roster(MockBehavior.FABRICATING)
        for triple in triples:
            record = run_rma(triple, roster)
            self.assertEqual(record.status, RunStatus.COMPLETED)
            self.assertEqual(record.revision_count_per_ply, (1, 0, 0))
            self.assertIn("revision_trigger=ply1:both", record.decisions)
            extracted = extract_factors_canonical(record.result, self.catalog)
            truth = triple.ground_truth()
            for slot in CaseSlot:
                self.assertLessEqual(extracted.factors_for(slot), truth[slot])
            self.assertEqual(record.per_ply_reports[0].revised_analyst.analysis_outcome, AnalysisOutcome.VALID_ARGUMENT)

    def test_unresolved_correction_is_logged_and_not_revised_again(self):
        roster = AgentRoster(StubbornDeveloper(), OracleAnalyst(), OraclePolisher())
        with self.assertLogs("pipelines.engine", level="WARNING"):
            record = run_rma(table_one_triple(), roster)
        self.assertEqual(record.status, RunStatus.COMPLETED)
        self.assertEqual(record.revision_count_per_ply, (1, 1, 1))
        self.assertIn("unresolved_correction=ply1", record.decisions)

    def test_polished_argument_replaces_ply_text(self):
        polished = "c1 and c2 share F4 Agreed-not-to-disclose (P), a strong analogy."
        roster = AgentRoster(mock_roster().developer, OracleAnalyst(), PolishingStub(polished))
        record = run_rma(table_one_triple(), roster)
        self.assertEqual(record.result.plies, (polished, polished, polished))

    def test_oracle_matrix_abstention_rates(self):
        roster = mock_roster()
        for mode, expected in (
            (ScenarioMode.ARGUABLE, RunStatus.COMPLETED),
            (ScenarioMode.MISMATCHED, RunStatus.ABSTAINED),
            (ScenarioMode.NON_ARGUABLE, RunStatus.ABSTAINED),
        ):
            for triple in generate_set(mode, 5, 90, 2024, self.catalog):
                self.assertEqual(run_pipeline(Method.RMA, triple, roster).status, expected, triple.id)


# =========================
# REGISTROS Y TRANSCRIPTS
# =========================
class RunRecordTests(SimpleTestCase):
    def test_line_round_trip_keeps_reports(self):
        triple = generate_set(ScenarioMode.ARGUABLE, 5, 1, 3)[0]
        record = run_rma(triple, mock_roster(MockBehavior.FABRICATING))
        restored = loads_record(dumps_record(record))
        self.assertEqual(restored, record)
        self.assertEqual(json.loads(dumps_record(record))["revision_count_per_ply"], [1, 0, 0])

    def test_invariants(self):
        base = dict(triple_id="t", method=Method.SA, backend="b", model="m", mode=ScenarioMode.ARGUABLE)
        with self.assertRaises(RecordInvariantError):
            RunRecord(status=RunStatus.FAILED, roles=((Outcome.DEFENDANT, CaseSlot.C3),), failure="x", **base)
        with self.assertRaises(RecordInvariantError):
            RunRecord(status=RunStatus.COMPLETED, **base)
        with self.assertRaises(RecordInvariantError):
            RunRecord(status=RunStatus.FAILED, failure="x", revision_count_per_ply=(2,),
                      roles=((Outcome.PLAINTIFF, CaseSlot.C2),), **base)


class RunMatrixTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.triples = generate_set(ScenarioMode.MISMATCHED, 5, 12, 7) + generate_set(ScenarioMode.ARGUABLE, 5, 12, 7)

    def test_writes_sorted_and_resumes(self):
        roster = mock_roster()
        summary = run_matrix(reversed(self.triples), Method.RMA, roster, self.tmp.name, workers=4)
        self.assertEqual((summary.completed, summary.abstained, summary.failed), (12, 12, 0))
        path = transcript_path(self.tmp.name, Method.RMA, roster.backend_name)
        ids = [r.triple_id for r in read_transcript(path)]
        self.assertEqual(ids, sorted(t.id for t in self.triples))

        again = run_matrix(self.triples, Method.RMA, roster, self.tmp.name, workers=2)
        self.assertEqual(again.skipped, 24)
        self.assertEqual(len(read_transcript(path)), 24)

        rerun = run_matrix(self.triples[:3], Method.RMA, roster, self.tmp.name, overwrite=True)
        self.assertEqual(rerun.skipped, 0)
        self.assertEqual(len(read_transcript(path)), 3)

    def test_deterministic_across_runs(self):
        other = tempfile.TemporaryDirectory()
        self.addCleanup(other.cleanup)
        roster = mock_roster(MockBehavior.FABRICATING)
        first = run_matrix(self.triples, Method.RMA, roster, self.tmp.name, workers=3)
        second = run_matrix(self.triples, Method.RMA, roster, other.name, workers=1)
        self.assertEqual(read_transcript(first.path), read_transcript(second.path))

    def test_malformed_transcript_names_line(self):
        path = Path(self.tmp.name) / "broken.jsonl"
        record = run_sa(self.triples[0], mock_roster())
        path.write_text(dumps_record(record) + "\n{not json}\n", encoding="utf-8")
        with self.assertRaises(TranscriptFormatError) as ctx:
            read_transcript(path)
        self.assertEqual(ctx.exception.line_number, 2)

    def test_resume_drops_cut_last_line_and_reruns_it(self):
        roster = mock_roster()
        summary = run_matrix(self.triples, Method.SA, roster, self.tmp.name)
        path = summary.path
        lines = path.read_text(encoding="utf-8").splitlines()
        # la escritura del último registro se cortó a mitad de línea
        path.write_text("".join(line + "\n" for line in lines[:-1]) + lines[-1][:40], encoding="utf-8")

        with self.assertLogs("pipelines.runner", level="WARNING"):
            resumed = run_matrix(self.triples, Method.SA, roster, self.tmp.name)
        self.assertEqual((resumed.skipped, resumed.completed + resumed.abstained), (23, 1))
        self.assertEqual(read_transcript(path), [loads_record(line) for line in lines])

    def test_cut_line_in_the_middle_is_still_an_error(self):
        roster = mock_roster()
        summary = run_matrix(self.triples[:3], Method.SA, roster, self.tmp.name)
        lines = summary.path.read_text(encoding="utf-8").splitlines()
        summary.path.write_text(f"{lines[0]}\n{lines[1][:40]}\n{lines[2]}\n", encoding="utf-8")
        with self.assertRaises(TranscriptFormatError) as ctx:
            run_matrix(self.triples[:3], Method.SA, roster, self.tmp.name)
        self.assertEqual(ctx.exception.line_number, 2)

    def test_fail_matrix_records_setup_error_per_triple(self):
        cause = AuthenticationError("gpt", "la variable ARGLAB_TEST_ABSENT_KEY no está definida")
        summary = fail_matrix(self.triples[:4], Method.RMA, "gpt", "gpt-4o-mini", cause, self.tmp.name)
        self.assertEqual((summary.total, summary.failed, summary.completed), (4, 4, 0))
        records = read_transcript(summary.path)
        self.assertEqual([r.triple_id for r in records], sorted(t.id for t in self.triples[:4]))
        for record in records:
            self.assertEqual(record.status, RunStatus.FAILED)
            self.assertIsNone(record.result)
            self.assertEqual((record.failed_ply, record.roles), (1, ()))
            self.assertTrue(record.failure.startswith("AuthenticationError"))
