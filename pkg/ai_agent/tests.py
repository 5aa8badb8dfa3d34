import json
import os
import tempfile
from unittest import mock

from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from arguments.exceptions import MalformedOutputError
from arguments.extraction import extract_factors_canonical, extract_ply_claims
from arguments.parsing import parse_single_ply, parse_three_ply
from arguments.plies import Abstention, Ply
from arguments.rendering import render_case
from factors.catalog import load_catalog
from scenarios.cases import Case, CaseSlot, CaseTriple, Outcome, ScenarioMode
from scenarios.generator import generate_triple
from scenarios.tests import table_one_triple

from . import service
from .agents import with_reprompt
from .context import PlyContext
from .exceptions import (
    AgentContractError,
    AuthenticationError,
    BackendConfigError,
    FixtureMissingError,
    MalformedReportError,
    PromptTooLongError,
    TransportError,
)
from .mocks import MockBehavior, MockDeveloper
from .oracles import consolidated_feedback, oracle_analyst, oracle_polisher
from .prompts import ENHANCED_INSTRUCTIONS, Method, build_developer_prompt
from .protocol import (
    AbstentionReason,
    Accuracy,
    AnalysisOutcome,
    AnalystReport,
    CorrectionDetails,
    PolisherReport,
    Strength,
    Utilization,
    parse_analyst_report,
    parse_polisher_report,
    serialize_analyst_report,
    serialize_polisher_report,
)
from .service import (
    BackendConfig,
    BackendKind,
    ChatBackend,
    FixtureBackend,
    GeminiBackend,
    GenerationParams,
    OpenAIBackend,
    complete,
)


class ScriptedBackend(ChatBackend):
    """Devuelve (o lanza) los elementos de `script` en orden."""

    kind = BackendKind.OPENAI

    def __init__(self, script, **overrides):
        config = BackendConfig(name="scripted", kind=BackendKind.OPENAI, model="scripted-1", backoff=0, **overrides)
        super().__init__(config)
        self.script = list(script)
        self.calls = []

    def send(self, system, user, params):
        self.calls.append((system, user, params))
        item = self.script.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def small_triple(c2_outcome=Outcome.PLAINTIFF):
    # c1 {F1, F2}, c2 {F1, F3}
    return CaseTriple(
        id="small",
        c1=Case("TSC1", None, (1, 2)),
        c2=Case("TSC2", c2_outcome, (1, 3)),
        c3=Case("TSC3", Outcome.DEFENDANT, (2, 5)),
        mode=ScenarioMode.ARGUABLE,
        seed=0,
        complexity=2,
    )


# =========================
# TRANSPORTE
# =========================
@mock.patch("ai_agent.service.time.sleep")
class CompleteTests(SimpleTestCase):
    def test_returns_text(self, sleep):
        backend = ScriptedBackend(["hello"])
        self.assertEqual(complete(backend, "sys", "user"), "hello")
        self.assertEqual(backend.calls[0][2], GenerationParams())

    def test_transient_errors_are_retried_then_raised(self, sleep):
        backend = ScriptedBackend([TransportError("scripted", "down")] * 3, max_retries=2)
        with self.assertRaises(TransportError) as ctx:
            complete(backend, "sys", "user")
        self.assertEqual(len(backend.calls), 3)
        self.assertEqual(ctx.exception.attempts, 3)
        self.assertEqual(sleep.call_count, 2)

    def test_recovers_after_transient_error(self, sleep):
        backend = ScriptedBackend([TransportError("scripted", "blip"), "", "ok"], max_retries=3)
        self.assertEqual(complete(backend, "sys", "user"), "ok")
        self.assertEqual(len(backend.calls), 3)

    def test_authentication_is_not_retried(self, sleep):
        backend = ScriptedBackend([AuthenticationError("scripted")], max_retries=3)
        with self.assertRaises(AuthenticationError):
            complete(backend, "sys", "user")
        self.assertEqual(len(backend.calls), 1)

    def test_prompt_over_limit(self, sleep):
        backend = ScriptedBackend(["never"], max_prompt_chars=10)
        with self.assertRaises(PromptTooLongError):
            complete(backend, "system prompt", "user prompt")
        self.assertEqual(backend.calls, [])

    def test_digests_are_logged_not_prompts(self, sleep):
        backend = ScriptedBackend(["answer"])
        with self.assertLogs("ai_agent.service", level="INFO") as logs:
            complete(backend, "secret system", "secret user")
        self.assertNotIn("secret", "\n".join(logs.output))


class GenerationParamsTests(SimpleTestCase):
    def test_defaults(self):
        params = GenerationParams()
        self.assertEqual((params.max_tokens, params.top_p, params.frequency_penalty, params.presence_penalty), (1000, 1.0, 0.0, 0.0))
        self.assertEqual(params.temperature, 0.0)

    def test_overrides(self):
        self.assertEqual(GenerationParams().merged({"temperature": 0.7}).temperature, 0.7)
        with self.assertRaises(BackendConfigError):
            GenerationParams().merged({"top_k": 3})


class ProviderBackendTests(SimpleTestCase):
    @mock.patch.dict(os.environ, {"ARGLAB_TEST_OPENAI_KEY": "sk-test"})
    @mock.patch("ai_agent.service.OpenAI")
    def test_openai_backend_sends_system_and_user(self, client_cls):
        response = mock.MagicMock()
        response.choices = [mock.MagicMock()]
        response.choices[0].message.content = "generated"
        client_cls.return_value.chat.completions.create.return_value = response
        config = BackendConfig(name="gpt", kind=BackendKind.OPENAI, model="gpt-4o-mini", api_key_env="ARGLAB_TEST_OPENAI_KEY")

        backend = OpenAIBackend(config)
        self.assertEqual(backend.send("sys", "usr", GenerationParams()), "generated")
        kwargs = client_cls.return_value.chat.completions.create.call_args.kwargs
        self.assertEqual(kwargs["messages"][0], {"role": "system", "content": "sys"})
        self.assertEqual(kwargs["max_tokens"], 1000)
        self.assertEqual(client_cls.call_args.kwargs["api_key"], "sk-test")

    @mock.patch.dict(os.environ, {}, clear=True)
    def test_missing_credential(self):
        config = BackendConfig(name="gpt", kind=BackendKind.OPENAI, model="m", api_key_env="ARGLAB_TEST_ABSENT_KEY")
        with self.assertRaises(AuthenticationError):
            OpenAIBackend(config)

    @mock.patch.dict(service._GEMINI_CONFIGURED, {}, clear=True)
    @mock.patch.dict(os.environ, {"ARGLAB_TEST_GEMINI_KEY": "g-test"})
    @mock.patch("ai_agent.service.genai")
    def test_gemini_backend(self, genai):
        genai.GenerativeModel.return_value.generate_content.return_value = mock.MagicMock(text="from gemini")
        config = BackendConfig(name="gemini", kind=BackendKind.GEMINI, model="gemini-2.5-flash", api_key_env="ARGLAB_TEST_GEMINI_KEY")
        backend = GeminiBackend(config)
        self.assertEqual(backend.send("sys", "usr", GenerationParams()), "from gemini")
        genai.configure.assert_called_once_with(api_key="g-test")
        self.assertEqual(genai.GenerativeModel.call_args.kwargs["system_instruction"], "sys")

    @mock.patch.dict(service._GEMINI_CONFIGURED, {}, clear=True)
    @mock.patch.dict(os.environ, {"ARGLAB_TEST_GEMINI_KEY": "g-one", "ARGLAB_TEST_GEMINI_OTHER": "g-two"})
    @mock.patch("ai_agent.service.genai")
    def test_gemini_backends_share_one_key(self, genai):
        def gemini(name, env):
            return BackendConfig(name=name, kind=BackendKind.GEMINI, model="gemini-2.5-flash", api_key_env=env)

        GeminiBackend(gemini("flash", "ARGLAB_TEST_GEMINI_KEY"))
        GeminiBackend(gemini("flash-b", "ARGLAB_TEST_GEMINI_KEY"))
        with self.assertRaises(BackendConfigError) as ctx:
            GeminiBackend(gemini("pro", "ARGLAB_TEST_GEMINI_OTHER"))
        self.assertIn("flash", str(ctx.exception))
        genai.configure.assert_called_once_with(api_key="g-one")


class FixtureBackendTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _config(self):
        # El digest incluye el modelo: captura y replay deben usar el mismo
        return BackendConfig(name="fx", kind=BackendKind.FIXTURE, model="scripted-1", fixture_dir=self.tmp.name, max_retries=0)

    def test_capture_then_replay_byte_exact(self):
        inner = ScriptedBackend(['{"a": "ünïcode"}'])
        capturing = FixtureBackend(self._config(), inner)
        first = complete(capturing, "sys", "usr")

        replaying = FixtureBackend(self._config())
        self.assertEqual(complete(replaying, "sys", "usr"), first)
        self.assertEqual(len(inner.calls), 1)

    def test_missing_fixture_is_not_retried(self):
        backend = FixtureBackend(self._config())
        with self.assertRaises(FixtureMissingError):
            complete(backend, "sys", "never recorded")


# =========================
# PROMPTS
# =========================
class DeveloperPromptTests(SimpleTestCase):
    def setUp(self):
        self.triple = table_one_triple()
        self.catalog = load_catalog()

    def test_sa_embeds_all_cases_and_schema(self):
        _, user = build_developer_prompt(PlyContext.for_ply(self.triple, 1), None, Method.SA)
        for slot in (CaseSlot.C1, CaseSlot.C2, CaseSlot.C3):
            self.assertIn(render_case(self.triple.case(slot), slot, self.catalog), user)
        for ply in Ply:
            self.assertIn(ply.key, user)
        self.assertNotIn(ENHANCED_INSTRUCTIONS, user)

    def test_sa_ep_adds_enhanced_instructions(self):
        _, user = build_developer_prompt(PlyContext.for_ply(self.triple, 1), None, Method.SA_EP)
        self.assertTrue(user.startswith(ENHANCED_INSTRUCTIONS))
        self.assertIn("TERMINATE", user)

    def test_rma_second_ply_names_defendant_and_prior_ply(self):
        first = "c1 and c2 share F4 Agreed-not-to-disclose (P)."
        context = PlyContext.for_ply(self.triple, 2, [first])
        _, user = build_developer_prompt(context, None, Method.RMA)
        self.assertIn("Defendant", user)
        self.assertIn(first, user)
        self.assertIn("Defendant's Counterargument", user)

    def test_revision_appends_feedback_verbatim(self):
        feedback = "Argument Polisher: Ensure all favorable factors for your side common to c1 and c2 are mentioned: F6 Security-measures (P)."
        _, user = build_developer_prompt(PlyContext.for_ply(self.triple, 1), feedback, Method.RMA)
        self.assertTrue(user.endswith(feedback))

    def test_context_role_assignment(self):
        roles = [(c.arguing_side, c.primary_precedent_slot) for c in (
            PlyContext.for_ply(self.triple, 1),
            PlyContext.for_ply(self.triple, 2, ["a"]),
            PlyContext.for_ply(self.triple, 3, ["a", "b"]),
        )]
        self.assertEqual(roles, [
            (Outcome.PLAINTIFF, CaseSlot.C2),
            (Outcome.DEFENDANT, CaseSlot.C3),
            (Outcome.PLAINTIFF, CaseSlot.C2),
        ])
        with self.assertRaises(ValueError):
            PlyContext(2, Outcome.PLAINTIFF, CaseSlot.C2, self.triple, ("a",))


# =========================
# INFORMES
# =========================
ANALYST_EXAMPLES = [
    ("""{
  "analysis_outcome": "REQUIRES_ABSTENTION",
  "summary": "The argument for Plaintiff, citing c2, must be abstained from. c2's actual outcome is 'Defendant', which does not favor the Plaintiff.",
  "abstention_details": {"reason_for_abstention": "Cited precedent outcome is unfavorable for the arguing party."}
}""", AnalysisOutcome.REQUIRES_ABSTENTION, AbstentionReason.UNFAVORABLE_OUTCOME),
    ("""{
  "analysis_outcome": "REQUIRES_ABSTENTION",
  "summary": "The argument must be abstained from as there are no common factors between c1 and the cited precedentX.",
  "abstention_details": {"reason_for_abstention": "No common factors found."}
}""", AnalysisOutcome.REQUIRES_ABSTENTION, AbstentionReason.NO_COMMON_FACTORS),
    ("""{
  "analysis_outcome": "REQUIRES_CORRECTION",
  "summary": "The argument requires correction. Factor F4 was claimed as common with c2, but F4 is not present in c2's actual factors.",
  "correction_details": {"fabricated_or_misrepresented_factors": ["F4 (claimed as common with c2 but not present in c2's actual factors)"]}
}""", AnalysisOutcome.REQUIRES_CORRECTION, None),
    ("""{
  "analysis_outcome": "VALID_ARGUMENT",
  "summary": "The argument segment appears valid. The cited precedent outcome favors the arguing party, and the claimed common factor (F1) is verified."
}""", AnalysisOutcome.VALID_ARGUMENT, None),
]

_word = st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd")), min_size=1, max_size=30)


@st.composite
def analyst_reports(draw):
    outcome = draw(st.sampled_from(list(AnalysisOutcome)))
    reason = draw(st.sampled_from(list(AbstentionReason))) if outcome == AnalysisOutcome.REQUIRES_ABSTENTION else None
    details = None
    if outcome == AnalysisOutcome.REQUIRES_CORRECTION:
        details = CorrectionDetails(
            tuple(draw(st.lists(_word, min_size=1, max_size=3))),
            draw(st.none() | _word),
            draw(st.none() | _word),
        )
    return AnalystReport(outcome, draw(_word), reason, details)


@st.composite
def polisher_reports(draw):
    revision = draw(st.booleans())
    return PolisherReport(
        argument_segment_type=draw(st.sampled_from([p.key for p in Ply])),
        accuracy_assessment=draw(st.sampled_from(list(Accuracy))),
        strength_assessment=draw(st.sampled_from(list(Strength))),
        factor_utilization_assessment=draw(st.sampled_from(list(Utilization))),
        feedback_summary=draw(_word),
        revision_needed=revision,
        instructions_for_developer=draw(_word) if revision else None,
        polished_argument=draw(st.none() | _word),
    )


class ReportParsingTests(SimpleTestCase):
    def test_reference_analyst_examples(self):
        for text, outcome, reason in ANALYST_EXAMPLES:
            report = parse_analyst_report(text)
            self.assertEqual(report.analysis_outcome, outcome)
            self.assertEqual(report.reason_for_abstention, reason)
        correction = parse_analyst_report(ANALYST_EXAMPLES[2][0]).correction_details
        self.assertIn("F4", correction.fabricated_or_misrepresented_factors[0])

    def test_enum_values_are_normalized(self):
        report = parse_analyst_report('{"analysis_outcome": "requires correction", "summary": "x", '
                                      '"correction_details": {"misrepresented_tsc_outcome": "c2 is Defendant"}}')
        self.assertEqual(report.analysis_outcome, AnalysisOutcome.REQUIRES_CORRECTION)
        polisher = parse_polisher_report(json.dumps({
            "argument_segment_type": "Plaintiff's Argument",
            "accuracy_assessment": "Minor Inaccuracies",
            "strength_assessment": "moderate",
            "factor_utilization_assessment": "GOOD",
            "feedback_summary": "ok",
            "revision_needed": False,
        }))
        self.assertEqual(polisher.accuracy_assessment, Accuracy.MINOR)

    def test_missing_outcome_is_malformed(self):
        with self.assertRaises(MalformedReportError):
            parse_analyst_report('{"summary": "nothing else"}')
        with self.assertRaises(MalformedReportError):
            parse_analyst_report("no json here")

    def test_details_must_match_outcome(self):
        with self.assertRaises(MalformedReportError):
            parse_analyst_report('{"analysis_outcome": "VALID_ARGUMENT", "summary": "x", '
                                 '"abstention_details": {"reason_for_abstention": "Both"}}')
        with self.assertRaises(MalformedReportError):
            parse_analyst_report('{"analysis_outcome": "REQUIRES_ABSTENTION", "summary": "x"}')
        with self.assertRaises(MalformedReportError):
            parse_polisher_report(json.dumps({
                "argument_segment_type": "Plaintiff's Argument", "accuracy_assessment": "Accurate",
                "strength_assessment": "Strong", "factor_utilization_assessment": "Excellent",
                "feedback_summary": "", "revision_needed": True,
            }))

    @settings(max_examples=100, deadline=None)
    @given(report=analyst_reports())
    def test_analyst_round_trip(self, report):
        self.assertEqual(parse_analyst_report(serialize_analyst_report(report)), report)

    @settings(max_examples=100, deadline=None)
    @given(report=polisher_reports())
    def test_polisher_round_trip(self, report):
        self.assertEqual(parse_polisher_report(serialize_polisher_report(report)), report)


class RepromptTests(SimpleTestCase):
    def test_one_reprompt_then_success(self):
        replies = iter(["not json", '{"Plaintiff\'s Argument": "c1 and c2 share F4."}'])
        calls = []

        def call(reminder):
            calls.append(reminder)
            return next(replies)

        value, _, reprompted = with_reprompt(call, lambda raw: parse_single_ply(raw, Ply.PLAINTIFF_ARGUMENT), "test")
        self.assertEqual(value, "c1 and c2 share F4.")
        self.assertTrue(reprompted)
        self.assertEqual(calls, [False, True])

    def test_second_failure_propagates(self):
        with self.assertRaises(MalformedOutputError):
            with_reprompt(lambda reminder: "still prose", parse_three_ply, "test")


# =========================
# ORÁCULOS
# =========================
class OracleAnalystTests(SimpleTestCase):
    def setUp(self):
        self.catalog = load_catalog()

    def test_unfavorable_precedent_requires_abstention(self):
        context = PlyContext.for_ply(small_triple(Outcome.DEFENDANT), 1)
        report = oracle_analyst(context, extract_ply_claims("c1 and c2 share F1."))
        self.assertEqual(report.analysis_outcome, AnalysisOutcome.REQUIRES_ABSTENTION)
        self.assertEqual(report.reason_for_abstention, AbstentionReason.UNFAVORABLE_OUTCOME)

    def test_fabricated_common_factor_requires_correction(self):
        context = PlyContext.for_ply(small_triple(), 1)
        report = oracle_analyst(context, extract_ply_claims("c1 and c2 share F1 and F4."))
        self.assertEqual(report.analysis_outcome, AnalysisOutcome.REQUIRES_CORRECTION)
        self.assertTrue(all("F4" in e for e in report.correction_details.fabricated_or_misrepresented_factors))

    def test_verified_claim_is_valid(self):
        context = PlyContext.for_ply(small_triple(), 1)
        report = oracle_analyst(context, extract_ply_claims("c1 and c2 share F1."))
        self.assertEqual(report.analysis_outcome, AnalysisOutcome.VALID_ARGUMENT)

    def test_misstated_outcome_requires_correction(self):
        context = PlyContext.for_ply(table_one_triple(), 2, ["x"])
        claims = extract_ply_claims("c3 (outcome Plaintiff) is analogous to c1. c1 and c3 share F5 (D).")
        report = oracle_analyst(context, claims)
        self.assertEqual(report.analysis_outcome, AnalysisOutcome.REQUIRES_CORRECTION)
        self.assertIn("c3", report.correction_details.misrepresented_tsc_outcome)

    def test_abstention_precedes_correction(self):
        context = PlyContext.for_ply(small_triple(Outcome.DEFENDANT), 1)
        report = oracle_analyst(context, extract_ply_claims("c1 and c2 share F4 and F27."))
        self.assertEqual(report.analysis_outcome, AnalysisOutcome.REQUIRES_ABSTENTION)

    def test_first_ply_abstains_on_every_generated_mismatched_and_non_arguable(self):
        faithful_like = MockDeveloper(MockBehavior.NON_ABSTAINING)
        for mode in (ScenarioMode.MISMATCHED, ScenarioMode.NON_ARGUABLE):
            for seed in range(300):
                context = PlyContext.for_ply(generate_triple(mode, 5, seed, self.catalog), 1)
                claims = faithful_like.draft(context).claims
                report = oracle_analyst(context, claims, self.catalog)
                self.assertTrue(report.requires_abstention, (mode, seed))

    def test_faithful_plies_on_arguable_are_valid(self):
        developer = MockDeveloper(MockBehavior.FAITHFUL)
        for seed in range(1000):
            triple = generate_triple(ScenarioMode.ARGUABLE, 5, seed, self.catalog)
            prior = []
            for ply in Ply:
                context = PlyContext.for_ply(triple, ply.index, prior)
                draft = developer.draft(context)
                report = oracle_analyst(context, extract_ply_claims(draft.content, self.catalog), self.catalog)
                self.assertEqual(report.analysis_outcome, AnalysisOutcome.VALID_ARGUMENT, (seed, ply, report))
                prior.append(draft.content)

    def test_rebuttal_with_valid_distinction_does_not_abstain(self):
        # c1∩c2 vacío, pero la réplica distingue c3 con un factor real
        triple = CaseTriple(
            id="rebuttal",
            c1=Case("TSC1", None, (4, 5, 23)),
            c2=Case("TSC2", Outcome.PLAINTIFF, (2, 7, 16)),
            c3=Case("TSC3", Outcome.DEFENDANT, (2, 5, 12)),
            mode=ScenarioMode.ARGUABLE, seed=0, complexity=3,
        )
        context = PlyContext.for_ply(triple, 3, ["a", "b"])
        distinguished = extract_ply_claims("c3 has F12 Outsider-disclosures-restricted (P), not in c1. c2 (outcome Plaintiff) is analogous to c1.")
        self.assertEqual(oracle_analyst(context, distinguished).analysis_outcome, AnalysisOutcome.VALID_ARGUMENT)
        bare = extract_ply_claims("c2 (outcome Plaintiff) is analogous to c1.")
        report = oracle_analyst(context, bare)
        self.assertEqual(report.reason_for_abstention, AbstentionReason.NO_COMMON_FACTORS)


class OraclePolisherTests(SimpleTestCase):
    def setUp(self):
        # c1∩c2 = {F4 (P), F6 (P)}
        self.triple = CaseTriple(
            id="polish",
            c1=Case("TSC1", None, (1, 4, 6)),
            c2=Case("TSC2", Outcome.PLAINTIFF, (4, 6, 7)),
            c3=Case("TSC3", Outcome.DEFENDANT, (1, 5)),
            mode=ScenarioMode.ARGUABLE, seed=0, complexity=3,
        )
        self.context = PlyContext.for_ply(self.triple, 1)

    def _review(self, text):
        claims = extract_ply_claims(text)
        analyst = oracle_analyst(self.context, claims)
        return analyst, oracle_polisher(self.context, analyst, claims)

    def test_full_coverage_needs_no_revision(self):
        _, report = self._review("c1 and c2 share F4 (P) and F6 (P).")
        self.assertFalse(report.revision_needed)
        self.assertIsNone(report.instructions_for_developer)
        self.assertEqual(report.factor_utilization_assessment, Utilization.EXCELLENT)
        self.assertEqual(report.strength_assessment, Strength.STRONG)
        self.assertEqual(report.argument_segment_type, "Plaintiff's Argument")

    def test_missing_shared_factor_names_it(self):
        _, report = self._review("c1 and c2 share F4 (P).")
        self.assertTrue(report.revision_needed)
        self.assertIn("F6 Security-measures (P)", report.instructions_for_developer)
        self.assertEqual(report.factor_utilization_assessment, Utilization.FAIR)

    def test_correction_forces_revision_and_echoes_errors(self):
        analyst, report = self._review("c1 and c2 share F4 (P), F6 (P) and F12 (P).")
        self.assertEqual(analyst.analysis_outcome, AnalysisOutcome.REQUIRES_CORRECTION)
        self.assertTrue(report.revision_needed)
        self.assertIn("F12", report.instructions_for_developer)
        self.assertEqual(report.accuracy_assessment, Accuracy.MAJOR)
        feedback = consolidated_feedback(analyst, report)
        self.assertTrue(feedback.startswith("Factor Analyst:"))
        self.assertIn("Argument Polisher:", feedback)

    def test_refuses_after_abstention(self):
        context = PlyContext.for_ply(small_triple(Outcome.DEFENDANT), 1)
        claims = extract_ply_claims("c1 and c2 share F1.")
        analyst = oracle_analyst(context, claims)
        with self.assertRaises(AgentContractError):
            oracle_polisher(context, analyst, claims)


# =========================
# MOCKS
# =========================
class MockDeveloperTests(SimpleTestCase):
    def setUp(self):
        self.catalog = load_catalog()

    def test_faithful_first_ply_on_table_one(self):
        draft = MockDeveloper().draft(PlyContext.for_ply(table_one_triple(), 1))
        self.assertIn("c1 and c2 share F4 Agreed-not-to-disclose (P).", draft.content)

    def test_faithful_abstains_on_non_arguable(self):
        triple = generate_triple(ScenarioMode.NON_ARGUABLE, 5, 3, self.catalog)
        raw = MockDeveloper().respond(PlyContext.for_ply(triple, 1), Method.SA)
        argument = parse_three_ply(raw)
        self.assertTrue(argument.abstained)
        self.assertEqual(argument.abstention.ply_index, 1)
        self.assertTrue(argument.abstention.reason.startswith("Generation stopped."))

    def test_fabricating_adds_exactly_k_foreign_factors(self):
        for k in (1, 2):
            developer = MockDeveloper(MockBehavior.FABRICATING, seed=5, fabrications=k)
            for seed in range(50):
                triple = generate_triple(ScenarioMode.ARGUABLE, 5, seed, self.catalog)
                argument, _ = developer.draft_three_ply(triple)
                extracted = extract_factors_canonical(argument, self.catalog)
                truth = triple.ground_truth()
                foreign = sum(len(extracted.factors_for(s) - truth[s]) for s in CaseSlot)
                self.assertEqual(foreign, k)

    def test_fabricating_revision_is_clean(self):
        developer = MockDeveloper(MockBehavior.FABRICATING)
        context = PlyContext.for_ply(table_one_triple(), 1)
        revised = developer.draft(context, feedback="remove the fabricated factor")
        truth = context.triple.ground_truth()
        for slot in CaseSlot:
            self.assertLessEqual(revised.claims.factors_for(slot), truth[slot])

    def test_non_abstaining_argues_without_overlap(self):
        triple = generate_triple(ScenarioMode.NON_ARGUABLE, 5, 3, self.catalog)
        argument = parse_three_ply(MockDeveloper(MockBehavior.NON_ABSTAINING).respond(PlyContext.for_ply(triple, 1), Method.SA))
        self.assertFalse(argument.abstained)

    def test_single_ply_output_parses(self):
        context = PlyContext.for_ply(table_one_triple(mode=ScenarioMode.MISMATCHED, swap=True), 1)
        value = parse_single_ply(MockDeveloper().respond(context, Method.RMA), Ply.PLAINTIFF_ARGUMENT)
        self.assertIsInstance(value, Abstention)

    @settings(max_examples=150, deadline=None)
    @given(
        mode=st.sampled_from(list(ScenarioMode)),
        behavior=st.sampled_from(list(MockBehavior)),
        seed=st.integers(min_value=0, max_value=10**9),
        complexity=st.integers(min_value=2, max_value=6),
    )
    def test_canonical_extraction_matches_declared_claims(self, mode, behavior, seed, complexity):
        triple = generate_triple(mode, complexity, seed, self.catalog)
        argument, declared = MockDeveloper(behavior, seed=seed).draft_three_ply(triple)
        extracted = extract_factors_canonical(argument, self.catalog)
        self.assertEqual(extracted.per_case, declared.per_case)
        self.assertEqual(extracted.negated, declared.negated)
        self.assertEqual(extracted.outcomes, declared.outcomes)
        if behavior == MockBehavior.FAITHFUL:
            truth = triple.ground_truth()
            for slot in CaseSlot:
                self.assertLessEqual(extracted.factors_for(slot), truth[slot])
