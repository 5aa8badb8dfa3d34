import json
import random
import tempfile
from fractions import Fraction
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from ai_agent.context import PlyContext
from ai_agent.exceptions import MalformedReportError
from ai_agent.mocks import MockBehavior
from ai_agent.oracles import oracle_analyst
from ai_agent.prompts import Method
from ai_agent.protocol import AbstentionReason, AnalysisOutcome
from ai_agent.tests import ScriptedBackend
from arguments.exceptions import AmbiguousAttributionError
from arguments.extraction import extract_ply_claims
from arguments.plies import ExtractedFactors, ThreePlyArgument
from pipelines.engine import run_rma, run_sa
from pipelines.records import RunRecord, RunStatus
from pipelines.tests import mock_roster, scripted_roster
from scenarios.cases import SLOTS, Case, CaseSlot, CaseTriple, Outcome, ScenarioMode
from scenarios.generator import classify_triple
from scenarios.tests import table_one_triple

from .aggregation import AggregationPolicy, aggregate
from .exceptions import DegenerateInputError, EmptyCellError, EvaluationError, EvaluationFormatError
from .extraction import (
    CanonicalExtractor,
    EvaluationRecord,
    EvaluationStatus,
    LLMExtractor,
    evaluate_run,
    parse_distilled,
    read_evaluations,
    write_evaluations,
)
from .metrics import MetricInputs, abstention_ratio, factor_recall, hallucination_accuracy, render_percent
from .tables import render_tables
from .utils import build_summary_pdf

DISTILLER_EXAMPLE = """{
  "c1": ["F4 Agreed-not-to-disclose (P)", "F6 Security-measures (P)", "F12 Outsider-disclosures-restricted (P)", "F1 Disclosure-in-negotiations (D)"],
  "c2": ["F4 Agreed-not-to-disclose (P)", "F6 Security-measures (P)", "F7 Brought-tools (P)"],
  "c3": ["F1 Disclosure-in-negotiations (D)", "F5 Agreement-not-specific (D)"]
}"""


def inputs(gt, extracted, abstained=False, scenario=ScenarioMode.ARGUABLE):
    return MetricInputs(
        ground_truth={slot: frozenset(gt.get(slot, ())) for slot in SLOTS},
        extracted=ExtractedFactors({slot: tuple(extracted.get(slot, ())) for slot in SLOTS}),
        abstained=abstained,
        scenario=scenario,
    )


def evaluation(triple_id, n_gt=9, n_h=0, n_util=None, status=EvaluationStatus.SCORED,
               method=Method.SA, mode=ScenarioMode.ARGUABLE, backend="model-a"):
    """EvaluationRecord con conjuntos coherentes con los conteos (todo en c1)."""
    n_util = n_gt if n_util is None else n_util
    truth = tuple(range(1, n_gt + 1))
    extracted = None
    if status == EvaluationStatus.SCORED:
        extracted = ExtractedFactors({
            CaseSlot.C1: truth[:n_util] + tuple(range(100, 100 + n_h)),
            CaseSlot.C2: (),
            CaseSlot.C3: (),
        })
    else:
        n_h, n_util = 0, 0
    return EvaluationRecord(
        triple_id=triple_id, method=method, backend=backend, model=backend, mode=mode, status=status,
        extractor="canonical", ground_truth={CaseSlot.C1: truth, CaseSlot.C2: (), CaseSlot.C3: ()},
        extracted=extracted, n_gt=n_gt, n_h=n_h, n_util=n_util,
    )


def oracle_counts(gt, extracted):
    """Recuento elemento a elemento, sin operaciones de conjuntos."""
    n_gt = n_h = n_util = 0
    for slot in SLOTS:
        truth = list(gt.get(slot, ()))
        n_gt += len(truth)
        seen = []
        for factor_id in extracted.get(slot, ()):
            if factor_id in seen:
                continue
            seen.append(factor_id)
            if factor_id in truth:
                n_util += 1
            else:
                n_h += 1
    return n_gt, n_h, n_util


factor_ids = st.integers(min_value=1, max_value=30)
slot_lists = st.fixed_dictionaries({slot: st.lists(factor_ids, max_size=8) for slot in SLOTS})
# conjuntos de verdad sin repetidos y con al menos un factor en total
ground_truths = st.fixed_dictionaries(
    {slot: st.lists(factor_ids, max_size=8, unique=True) for slot in SLOTS}
).filter(lambda gt: any(gt.values()))


# =========================
# METRICAS
# =========================
class MetricTests(SimpleTestCase):
    def test_exact_match_on_table_one_is_100(self):
        triple = table_one_triple()
        gt = {slot: triple.case(slot).factors for slot in SLOTS}
        m = inputs(gt, gt)
        self.assertEqual(m.n_gt, 9)
        self.assertEqual(render_percent(hallucination_accuracy(m)), "100.00")
        self.assertEqual(render_percent(factor_recall(m)), "100.00")

    def test_one_hallucination_over_nine(self):
        triple = table_one_triple()
        gt = {slot: triple.case(slot).factors for slot in SLOTS}
        extracted = dict(gt)
        extracted[CaseSlot.C1] = (4, 5, 23, 12)
        self.assertEqual(hallucination_accuracy(inputs(gt, extracted)), Fraction(800, 9))
        self.assertEqual(render_percent(hallucination_accuracy(inputs(gt, extracted))), "88.89")

    def test_misattribution_counts_once_per_id(self):
        # F16 pertenece a c2, no a c1
        gt = {CaseSlot.C1: (4, 5, 23), CaseSlot.C2: (2, 4, 16), CaseSlot.C3: (2, 5, 12)}
        m = inputs(gt, {CaseSlot.C1: (4, 16), CaseSlot.C2: (2, 4, 16)})
        self.assertEqual(m.n_h, 1)
        self.assertEqual(m.n_util, 4)

    def test_recall_eight_of_nine(self):
        gt = {CaseSlot.C1: (4, 5, 23), CaseSlot.C2: (2, 4, 16), CaseSlot.C3: (2, 5, 12)}
        m = inputs(gt, {CaseSlot.C1: (4, 5, 23), CaseSlot.C2: (2, 4, 16), CaseSlot.C3: (2, 5)})
        self.assertEqual(render_percent(factor_recall(m)), "88.89")

    def test_abstained_recall_is_zero(self):
        gt = {CaseSlot.C1: (1, 2)}
        self.assertEqual(factor_recall(inputs(gt, gt, abstained=True)), 0)

    def test_accuracy_is_not_clamped(self):
        m = inputs({CaseSlot.C1: (1,)}, {CaseSlot.C1: (2, 3, 4)})
        self.assertEqual(hallucination_accuracy(m), Fraction(-200))

    def test_degenerate_ground_truth(self):
        with self.assertRaises(DegenerateInputError):
            hallucination_accuracy(inputs({}, {CaseSlot.C1: (1,)}))
        with self.assertRaises(DegenerateInputError):
            factor_recall(inputs({}, {}))

    def test_abstention_ratio_values(self):
        def cell(abstained, total, mode=ScenarioMode.MISMATCHED):
            return [
                evaluation(f"t{i:03d}", mode=mode,
                           status=EvaluationStatus.ABSTAINED if i < abstained else EvaluationStatus.SCORED)
                for i in range(total)
            ]

        self.assertEqual(render_percent(abstention_ratio(cell(83, 90))), "92.22")
        self.assertEqual(render_percent(abstention_ratio(cell(0, 90))), "0.00")
        self.assertEqual(render_percent(abstention_ratio(cell(90, 90, ScenarioMode.NON_ARGUABLE))), "100.00")
        with self.assertRaises(EmptyCellError):
            abstention_ratio([])
        with self.assertRaises(EvaluationError):
            abstention_ratio(cell(1, 2, ScenarioMode.ARGUABLE))

    def test_render_percent_rounds_half_up(self):
        self.assertEqual(render_percent(Fraction(1, 8)), "0.13")
        self.assertEqual(render_percent(Fraction(-1, 3)), "-0.33")

    @settings(max_examples=500, deadline=None)
    @given(gt=ground_truths, mentions=slot_lists)
    def test_metrics_match_brute_force_oracle(self, gt, mentions):
        # menciones crudas, con repeticiones, por el mismo camino que la salida del destilador
        n_gt, n_h, n_util = oracle_counts(gt, mentions)
        distilled = json.dumps({slot.value: [f"F{factor_id}" for factor_id in mentions[slot]] for slot in SLOTS})
        m = MetricInputs(
            ground_truth={slot: frozenset(gt[slot]) for slot in SLOTS},
            extracted=parse_distilled(distilled),
        )
        self.assertEqual((m.n_gt, m.n_h, m.n_util), (n_gt, n_h, n_util))
        self.assertEqual(hallucination_accuracy(m), (1 - Fraction(n_h, n_gt)) * 100)
        self.assertEqual(factor_recall(m), Fraction(n_util, n_gt) * 100)
        self.assertEqual(
            hallucination_accuracy(m) == 100,
            all(set(mentions[slot]) <= set(gt[slot]) for slot in SLOTS),
        )

    @settings(max_examples=200, deadline=None)
    @given(flags=st.lists(st.booleans(), min_size=1, max_size=40), seed=st.integers(0, 10_000))
    def test_abstention_ratio_ignores_order(self, flags, seed):
        records = [
            evaluation(f"t{i:03d}", mode=ScenarioMode.NON_ARGUABLE,
                       status=EvaluationStatus.ABSTAINED if flag else EvaluationStatus.SCORED)
            for i, flag in enumerate(flags)
        ]
        shuffled = list(records)
        random.Random(seed).shuffle(shuffled)
        self.assertEqual(abstention_ratio(records), abstention_ratio(shuffled))


# =========================
# EXTRACCION
# =========================
class DistillerTests(SimpleTestCase):
    def test_reference_output_slot_lists(self):
        extracted = parse_distilled(DISTILLER_EXAMPLE)
        self.assertEqual(extracted.per_case[CaseSlot.C1], (4, 6, 12, 1))
        self.assertEqual(extracted.per_case[CaseSlot.C2], (4, 6, 7))
        self.assertEqual(extracted.per_case[CaseSlot.C3], (1, 5))
        self.assertEqual(extracted.side_mismatches, ())

    def test_repeated_mentions_are_deduplicated(self):
        data = json.loads(DISTILLER_EXAMPLE)
        doubled = {slot: items + items for slot, items in data.items()}
        self.assertEqual(parse_distilled(json.dumps(doubled)).per_case, parse_distilled(DISTILLER_EXAMPLE).per_case)

    def test_wrong_side_is_kept_and_logged(self):
        text = '{"c1": ["F4 Agreed-not-to-disclose (D)"], "c2": [], "c3": []}'
        extracted = parse_distilled(text)
        self.assertEqual(extracted.per_case[CaseSlot.C1], (4,))
        self.assertEqual(extracted.side_mismatches, ((CaseSlot.C1, 4),))

    def test_malformed_output(self):
        with self.assertRaises(MalformedReportError):
            parse_distilled("no json")
        with self.assertRaises(MalformedReportError):
            parse_distilled('{"c1": [], "c2": []}')
        with self.assertRaises(MalformedReportError):
            parse_distilled('{"c1": ["security measures"], "c2": [], "c3": []}')

    def test_llm_extractor_reprompts_once(self):
        backend = ScriptedBackend(["nope", DISTILLER_EXAMPLE])
        argument = ThreePlyArgument.completed("c1 shares F4 (P) with c2.", "c3 differs.", "c3 is different.")
        extracted = LLMExtractor(backend).extract(argument)
        self.assertEqual(extracted.per_case[CaseSlot.C3], (1, 5))
        self.assertEqual(len(backend.calls), 2)
        self.assertEqual(backend.calls[0][2].temperature, 0)

    def test_canonical_falls_back_to_distiller_on_ambiguity(self):
        backend = ScriptedBackend([DISTILLER_EXAMPLE])
        argument = ThreePlyArgument.completed("F4 Agreed-not-to-disclose (P) matters.", "c3 differs.", "c3 differs.")
        with self.assertRaises(AmbiguousAttributionError):
            CanonicalExtractor().extract(argument)
        extracted = CanonicalExtractor(fallback=LLMExtractor(backend)).extract(argument)
        self.assertEqual(extracted.per_case[CaseSlot.C2], (4, 6, 7))


class ReferenceErrorExamplesTests(SimpleTestCase):
    """Dos errores documentados de SA_EP: factores atribuidos a c1 que c1 no tiene."""

    MISATTRIBUTION = (
        "... Moreover, the input case has F12 Outsider-disclosures-restricted (P) and F14 "
        "Restricted-materials-used (P) supporting the trade secret claim through the implication "
        "of robust protective measures ..."
    )
    FORCED_ANALOGY = (
        "... c3 (outcome Defendant) is analogous; both (c1 and c3) share F10 Secrets-disclosed-outsiders (D) "
        "and F27 Disclosure-in-public-forum (D), indicating a lack of confidentiality and potential public "
        "knowledge of the information ..."
    )

    def arguable_triple(self):
        return CaseTriple(
            id="misattribution",
            c1=Case("TSC1", None, (1, 3, 6, 20, 25)),
            c2=Case("TSC2", Outcome.PLAINTIFF, (3, 6, 11, 12, 14, 20)),
            c3=Case("TSC3", Outcome.DEFENDANT, (3, 6, 10, 16, 25)),
            mode=ScenarioMode.ARGUABLE, seed=0, complexity=5,
        )

    def non_arguable_triple(self):
        return CaseTriple(
            id="forced-analogy",
            c1=Case("TSC1", None, (6, 15, 18, 20)),
            c2=Case("TSC2", Outcome.PLAINTIFF, (7, 10, 17, 23, 27)),
            c3=Case("TSC3", Outcome.DEFENDANT, (3, 8, 10, 22, 24, 27)),
            mode=ScenarioMode.NON_ARGUABLE, seed=0, complexity=5,
        )

    def metric_inputs(self, triple, claims):
        return MetricInputs(
            ground_truth={slot: triple.case(slot).factor_set for slot in SLOTS},
            extracted=claims,
            scenario=triple.mode,
        )

    def test_misattributed_rebuttal_requires_correction(self):
        triple = self.arguable_triple()
        self.assertEqual(classify_triple(triple), ScenarioMode.ARGUABLE)
        claims = extract_ply_claims(self.MISATTRIBUTION)
        self.assertEqual(claims.per_case[CaseSlot.C1], (12, 14))

        m = self.metric_inputs(triple, claims)
        self.assertEqual((m.n_gt, m.n_h), (16, 2))
        self.assertEqual(render_percent(hallucination_accuracy(m)), "87.50")

        report = oracle_analyst(PlyContext.for_ply(triple, 3, ["first", "second"]), claims)
        self.assertEqual(report.analysis_outcome, AnalysisOutcome.REQUIRES_CORRECTION)
        errors = report.correction_details.fabricated_or_misrepresented_factors
        self.assertEqual(len(errors), 2)
        self.assertTrue(any("F12" in e for e in errors) and any("F14" in e for e in errors))

    def test_forced_analogy_requires_abstention(self):
        triple = self.non_arguable_triple()
        self.assertEqual(classify_triple(triple), ScenarioMode.NON_ARGUABLE)
        claims = extract_ply_claims(self.FORCED_ANALOGY)
        self.assertEqual(claims.per_case[CaseSlot.C1], (10, 27))
        self.assertEqual(claims.per_case[CaseSlot.C3], (10, 27))

        m = self.metric_inputs(triple, claims)
        self.assertEqual((m.n_gt, m.n_h), (15, 2))
        self.assertEqual(render_percent(hallucination_accuracy(m)), "86.67")

        report = oracle_analyst(PlyContext.for_ply(triple, 2, ["first"]), claims)
        self.assertEqual(report.analysis_outcome, AnalysisOutcome.REQUIRES_ABSTENTION)
        self.assertEqual(report.reason_for_abstention, AbstentionReason.NO_COMMON_FACTORS)


class EvaluateRunTests(SimpleTestCase):
    def setUp(self):
        self.extractor = CanonicalExtractor()

    def test_faithful_sa_is_scored_without_hallucinations(self):
        triple = table_one_triple()
        record = run_sa(triple, mock_roster())
        result = evaluate_run(record, triple, self.extractor)
        self.assertEqual(result.status, EvaluationStatus.SCORED)
        self.assertEqual((result.n_gt, result.n_h), (9, 0))
        self.assertEqual(render_percent(hallucination_accuracy(result.metric_inputs())), "100.00")

    def test_fabricating_sa_has_one_hallucination(self):
        triple = table_one_triple()
        record = run_sa(triple, mock_roster(MockBehavior.FABRICATING, fabrications=1))
        result = evaluate_run(record, triple, self.extractor)
        self.assertEqual(result.n_h, 1)
        self.assertEqual(render_percent(hallucination_accuracy(result.metric_inputs())), "88.89")

    def test_abstained_run_skips_extraction(self):
        triple = table_one_triple(ScenarioMode.MISMATCHED, swap=True)
        record = run_rma(triple, mock_roster())
        self.assertEqual(record.status, RunStatus.ABSTAINED)
        result = evaluate_run(record, triple, self.extractor)
        self.assertEqual(result.status, EvaluationStatus.ABSTAINED)
        self.assertIsNone(result.extracted)
        self.assertEqual(factor_recall(result.metric_inputs()), 0)

    def test_failed_run_is_not_an_abstention(self):
        triple = table_one_triple()
        roster, _ = scripted_roster(["garbage", "still garbage"])
        record = run_sa(triple, roster)
        self.assertEqual(record.status, RunStatus.FAILED)
        result = evaluate_run(record, triple, self.extractor)
        self.assertEqual(result.status, EvaluationStatus.RUN_FAILED)
        self.assertFalse(result.abstained)
        self.assertIn("Malformed", result.error)

    def test_extraction_failure_is_recorded(self):
        triple = table_one_triple()
        record = RunRecord(
            triple_id=triple.id, method=Method.SA, backend="x", model="x", mode=triple.mode,
            status=RunStatus.COMPLETED,
            result=ThreePlyArgument.completed("F4 Agreed-not-to-disclose (P) helps.", "c3 differs.", "c2 differs."),
            revision_count_per_ply=(0, 0, 0), roles=run_sa(triple, mock_roster()).roles,
        )
        result = evaluate_run(record, triple, self.extractor)
        self.assertEqual(result.status, EvaluationStatus.EVALUATION_FAILED)
        self.assertIn("table1", result.error)

    def test_mismatched_triple_id(self):
        triple = table_one_triple()
        record = run_sa(table_one_triple(triple_id="other"), mock_roster())
        with self.assertRaises(ValueError):
            evaluate_run(record, triple, self.extractor)

    def test_evaluation_file_round_trip_and_bad_line(self):
        triple = table_one_triple()
        result = evaluate_run(run_sa(triple, mock_roster()), triple, self.extractor)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_evaluations(Path(tmp) / "evaluations" / "SA__mock.jsonl", [result])
            line = json.loads(path.read_text(encoding="utf-8"))
            self.assertEqual(line["metrics"]["hallucination_accuracy"], "100")
            self.assertEqual(read_evaluations(path)[0].n_h, result.n_h)
            path.write_text(path.read_text(encoding="utf-8") + "{broken\n", encoding="utf-8")
            with self.assertRaises(EvaluationFormatError) as ctx:
                read_evaluations(path)
            self.assertEqual(ctx.exception.line_number, 2)


# =========================
# AGREGACION Y TABLAS
# =========================
class AggregationTests(SimpleTestCase):
    def test_pooled_counts(self):
        cells = aggregate([evaluation("a", n_h=1), evaluation("b", n_h=0)])
        self.assertEqual(len(cells), 1)
        self.assertEqual(cells[0].acc_h, (1 - Fraction(1, 18)) * 100)
        self.assertEqual(render_percent(cells[0].acc_h), "94.44")

    def test_arguable_cell_has_no_abstention_ratio(self):
        cell = aggregate([evaluation("a")])[0]
        self.assertIsNone(cell.ratio_abstain)
        self.assertEqual(cell.rec_u, 100)

    def test_mismatched_cell_has_no_recall(self):
        records = [
            evaluation("a", mode=ScenarioMode.MISMATCHED, status=EvaluationStatus.ABSTAINED),
            evaluation("b", mode=ScenarioMode.MISMATCHED, n_h=2),
        ]
        cell = aggregate(records)[0]
        self.assertIsNone(cell.rec_u)
        self.assertEqual(cell.ratio_abstain, 50)
        self.assertEqual(cell.acc_h, (1 - Fraction(2, 9)) * 100)
        self.assertEqual(cell.counts["excluded_from_acc"], 1)

    def test_failed_runs_are_counted_but_not_scored(self):
        records = [
            evaluation("a", mode=ScenarioMode.NON_ARGUABLE, status=EvaluationStatus.ABSTAINED),
            evaluation("b", mode=ScenarioMode.NON_ARGUABLE, status=EvaluationStatus.RUN_FAILED),
        ]
        cell = aggregate(records)[0]
        self.assertEqual(cell.ratio_abstain, 100)
        self.assertEqual(cell.counts["failed"], 1)
        self.assertEqual(cell.counts["triples"], 2)
        self.assertIsNone(cell.acc_h)

    def test_abstentions_lower_arguable_recall(self):
        cell = aggregate([evaluation("a"), evaluation("b", status=EvaluationStatus.ABSTAINED)])[0]
        self.assertEqual(cell.rec_u, 50)
        self.assertEqual(cell.acc_h, 100)

    def test_negative_accuracy_is_flagged(self):
        cell = aggregate([evaluation("a", n_gt=2, n_h=5)])[0]
        self.assertTrue(cell.negative_acc_h)
        tables = render_tables([cell])
        self.assertIn("-150.00!", tables["hallucination_accuracy"]["txt"])

    def test_cells_are_ordered(self):
        records = [
            evaluation("a", method=Method.RMA, mode=ScenarioMode.NON_ARGUABLE, status=EvaluationStatus.ABSTAINED),
            evaluation("b", method=Method.SA),
            evaluation("c", method=Method.MA, backend="model-0"),
        ]
        keys = [(c.model, c.method, c.scenario) for c in aggregate(records)]
        self.assertEqual(keys, [
            ("model-0", Method.MA, ScenarioMode.ARGUABLE),
            ("model-a", Method.SA, ScenarioMode.ARGUABLE),
            ("model-a", Method.RMA, ScenarioMode.NON_ARGUABLE),
        ])

    def test_duplicate_triples_in_a_cell(self):
        with self.assertRaises(EvaluationError):
            aggregate([evaluation("a"), evaluation("a")])

    def test_empty_input(self):
        self.assertEqual(aggregate([]), [])
        tables = render_tables([])
        self.assertEqual(tables["counts"]["csv"].splitlines()[-1].split(",")[0], "Model")

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=12), min_size=1, max_size=20))
    def test_pooled_equals_mean_with_shared_ground_truth(self, hallucinations):
        records = [evaluation(f"t{i:03d}", n_h=n_h, n_util=n_h % 10) for i, n_h in enumerate(hallucinations)]
        pooled = aggregate(records, AggregationPolicy.POOLED)[0]
        mean = aggregate(records, AggregationPolicy.MEAN)[0]
        self.assertEqual(pooled.acc_h, mean.acc_h)
        self.assertEqual(pooled.rec_u, mean.rec_u)

    def test_mean_differs_from_pooled_with_uneven_ground_truth(self):
        records = [evaluation("a", n_gt=2, n_h=2), evaluation("b", n_gt=18, n_h=0)]
        self.assertEqual(aggregate(records, "pooled")[0].acc_h, 90)
        self.assertEqual(aggregate(records, "mean")[0].acc_h, 50)

    def test_unknown_policy(self):
        with self.assertRaises(EvaluationError):
            AggregationPolicy.parse("median")


class TableTests(SimpleTestCase):
    def cells(self):
        records = []
        for method, abstentions in ((Method.SA, 0), (Method.RMA, 83)):
            records += [
                evaluation(f"m{i:03d}", method=method, mode=ScenarioMode.MISMATCHED,
                           status=EvaluationStatus.ABSTAINED if i < abstentions else EvaluationStatus.SCORED)
                for i in range(90)
            ]
            records.append(evaluation("a001", method=method, n_h=1 if method == Method.SA else 0))
        return aggregate(records)

    def test_abstention_table(self):
        tables = render_tables(self.cells(), metadata={"master_seed": 7})
        rows = tables["abstention_ratio"]["csv"].splitlines()
        self.assertEqual(rows[0], "# master_seed: 7")
        self.assertEqual(rows[1], "# policy: pooled")
        self.assertEqual(rows[2], "Model,Method,Mismatched,NonArguable")
        self.assertEqual(rows[3], "model-a,SA,0.00,-")
        self.assertEqual(rows[4], "model-a,RMA,92.22*,-")

    def test_best_value_marked_per_scenario(self):
        txt = render_tables(self.cells())["hallucination_accuracy"]["txt"]
        sa_line = next(line for line in txt.splitlines() if line.startswith("model-a  SA "))
        rma_line = next(line for line in txt.splitlines() if line.startswith("model-a  RMA"))
        self.assertIn("88.89", sa_line)
        self.assertNotIn("88.89*", sa_line)
        self.assertIn("100.00*", rma_line)

    def test_recall_table_has_only_arguable(self):
        csv_rows = render_tables(self.cells())["factor_recall"]["csv"].splitlines()
        self.assertEqual(csv_rows[1], "Model,Method,Arguable")

    def test_counts_table(self):
        csv_rows = render_tables(self.cells())["counts"]["csv"].splitlines()
        self.assertIn("model-a,RMA,Mismatched,90,7,83,0,0,83", csv_rows)

    def test_rendering_is_idempotent(self):
        self.assertEqual(render_tables(self.cells()), render_tables(self.cells()))

    def test_pdf_is_deterministic(self):
        with tempfile.TemporaryDirectory() as tmp:
            first = build_summary_pdf(self.cells(), Path(tmp) / "a.pdf", metadata={"master_seed": 7}).read_bytes()
            second = build_summary_pdf(self.cells(), Path(tmp) / "b.pdf", metadata={"master_seed": 7}).read_bytes()
        self.assertTrue(first.startswith(b"%PDF"))
        self.assertEqual(first, second)
