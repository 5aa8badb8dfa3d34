import tempfile
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from factors.catalog import FactorCatalog, Side, load_catalog
from scenarios.cases import Case, CaseTriple, Outcome, ScenarioMode
from scenarios.dataset import dataset_metadata, dumps_triple, loads_triple, read_dataset, write_dataset
from scenarios.exceptions import DatasetFormatError, InfeasibleParametersError, UnclassifiableTripleError
from scenarios.generator import classify_triple, derive_seed, generate_set, generate_triple


def table_one_triple(mode=ScenarioMode.ARGUABLE, swap=False, triple_id="table1"):
    c2_outcome, c3_outcome = (Outcome.DEFENDANT, Outcome.PLAINTIFF) if swap else (Outcome.PLAINTIFF, Outcome.DEFENDANT)
    return CaseTriple(
        id=triple_id,
        c1=Case("TSC1", None, (4, 5, 23)),
        c2=Case("TSC2", c2_outcome, (2, 4, 16)),
        c3=Case("TSC3", c3_outcome, (2, 5, 12)),
        mode=mode,
        seed=0,
        complexity=3,
    )


class ClassifyTripleTests(SimpleTestCase):
    def test_table_one_rows(self):
        self.assertEqual(classify_triple(table_one_triple()), ScenarioMode.ARGUABLE)
        self.assertEqual(classify_triple(table_one_triple(swap=True)), ScenarioMode.MISMATCHED)
        non_arguable = CaseTriple(
            id="row3",
            c1=Case("TSC1", None, (6, 22)),
            c2=Case("TSC2", Outcome.PLAINTIFF, (1, 27)),
            c3=Case("TSC3", Outcome.DEFENDANT, (16, 24)),
            mode=ScenarioMode.NON_ARGUABLE, seed=0, complexity=2,
        )
        self.assertEqual(classify_triple(non_arguable), ScenarioMode.NON_ARGUABLE)

    def test_classification_ignores_generation_metadata(self):
        mislabeled = table_one_triple(mode=ScenarioMode.NON_ARGUABLE)
        self.assertEqual(classify_triple(mislabeled), ScenarioMode.ARGUABLE)

    def test_one_sided_overlap_is_unclassifiable(self):
        triple = CaseTriple(
            id="lopsided",
            c1=Case("TSC1", None, (4, 5, 23)),
            c2=Case("TSC2", Outcome.PLAINTIFF, (2, 7, 16)),
            c3=Case("TSC3", Outcome.DEFENDANT, (2, 5, 12)),
            mode=ScenarioMode.ARGUABLE, seed=0, complexity=3,
        )
        with self.assertRaises(UnclassifiableTripleError):
            classify_triple(triple)

    def test_overlap_without_usable_side_is_unclassifiable(self):
        # c1∩c2 = {F5 (D)}: nada que el demandante pueda usar
        triple = CaseTriple(
            id="wrong-side",
            c1=Case("TSC1", None, (4, 5, 23)),
            c2=Case("TSC2", Outcome.PLAINTIFF, (2, 5, 16)),
            c3=Case("TSC3", Outcome.DEFENDANT, (2, 23, 12)),
            mode=ScenarioMode.ARGUABLE, seed=0, complexity=3,
        )
        with self.assertRaises(UnclassifiableTripleError):
            classify_triple(triple)


class GenerateTripleTests(SimpleTestCase):
    def setUp(self):
        self.catalog = load_catalog()

    def test_generator_and_classifier_agree_over_1000_seeds(self):
        for mode in ScenarioMode:
            for seed in range(1000):
                triple = generate_triple(mode, 5, seed, self.catalog)
                self.assertEqual(classify_triple(triple, self.catalog), mode, triple)
                for case in (triple.c1, triple.c2, triple.c3):
                    self.assertTrue(4 <= len(case.factors) <= 6)

    def test_arguable_shared_sets_favor_each_side(self):
        for seed in range(200):
            triple = generate_triple(ScenarioMode.ARGUABLE, 3, seed, self.catalog)
            shared_c2 = triple.c1.factor_set & triple.c2.factor_set
            shared_c3 = triple.c1.factor_set & triple.c3.factor_set
            self.assertTrue(any(self.catalog.lookup(i).side == Side.P for i in shared_c2))
            self.assertTrue(any(self.catalog.lookup(i).side == Side.D for i in shared_c3))
            # los precedentes siempre conservan factores distintivos
            self.assertTrue(triple.c2.factor_set - triple.c1.factor_set)
            self.assertTrue(triple.c3.factor_set - triple.c1.factor_set)
            self.assertEqual(triple.c2.outcome, Outcome.PLAINTIFF)
            self.assertEqual(triple.c3.outcome, Outcome.DEFENDANT)

    def test_non_arguable_intersections_are_empty(self):
        for seed in range(200):
            triple = generate_triple(ScenarioMode.NON_ARGUABLE, 3, seed, self.catalog)
            self.assertFalse(triple.c1.factor_set & triple.c2.factor_set)
            self.assertFalse(triple.c1.factor_set & triple.c3.factor_set)

    def test_mismatched_only_swaps_outcomes(self):
        arguable = generate_triple(ScenarioMode.ARGUABLE, 5, 42, self.catalog)
        mismatched = generate_triple(ScenarioMode.MISMATCHED, 5, 42, self.catalog)
        self.assertEqual(arguable.c1, mismatched.c1)
        self.assertEqual(arguable.c2.factors, mismatched.c2.factors)
        self.assertEqual(mismatched.c2.outcome, Outcome.DEFENDANT)
        self.assertEqual(mismatched.c3.outcome, Outcome.PLAINTIFF)
        self.assertEqual(classify_triple(mismatched), ScenarioMode.MISMATCHED)

    def test_deterministic(self):
        first = generate_triple(ScenarioMode.ARGUABLE, 5, 7, self.catalog)
        second = generate_triple(ScenarioMode.ARGUABLE, 5, 7, self.catalog)
        self.assertEqual(first, second)

    def test_infeasible_parameters(self):
        with self.assertRaises(InfeasibleParametersError):
            generate_triple(ScenarioMode.ARGUABLE, 1, 0, self.catalog)
        with self.assertRaises(InfeasibleParametersError):
            generate_triple(ScenarioMode.NON_ARGUABLE, 13, 0, self.catalog)
        tiny = FactorCatalog(tuple(f for f in self.catalog if f.side == Side.P))
        with self.assertRaises(InfeasibleParametersError):
            generate_triple(ScenarioMode.ARGUABLE, 2, 0, tiny)

    @settings(max_examples=200, deadline=None)
    @given(
        mode=st.sampled_from(list(ScenarioMode)),
        complexity=st.integers(min_value=2, max_value=8),
        seed=st.integers(min_value=0, max_value=2**63),
    )
    def test_agreement_across_complexities(self, mode, complexity, seed):
        triple = generate_triple(mode, complexity, seed)
        self.assertEqual(classify_triple(triple), mode)


class GenerateSetTests(SimpleTestCase):
    def test_ninety_triples_with_distinct_seeds(self):
        triples = generate_set(ScenarioMode.ARGUABLE, 5, 90, 2025)
        self.assertEqual(len(triples), 90)
        self.assertEqual(len({t.seed for t in triples}), 90)
        self.assertEqual(len({t.id for t in triples}), 90)
        self.assertEqual(triples[3].seed, derive_seed(2025, 3))

    def test_singleton(self):
        self.assertEqual(len(generate_set(ScenarioMode.MISMATCHED, 4, 1, 1)), 1)

    def test_reproducible_bytes(self):
        first = [dumps_triple(t) for t in generate_set(ScenarioMode.NON_ARGUABLE, 5, 30, 9)]
        second = [dumps_triple(t) for t in generate_set(ScenarioMode.NON_ARGUABLE, 5, 30, 9)]
        self.assertEqual(first, second)

    def test_count_must_be_positive(self):
        with self.assertRaises(InfeasibleParametersError):
            generate_set(ScenarioMode.ARGUABLE, 5, 0, 1)


class DatasetFileTests(SimpleTestCase):
    def test_line_round_trip_is_bit_exact(self):
        for triple in generate_set(ScenarioMode.MISMATCHED, 5, 20, 3):
            line = dumps_triple(triple)
            self.assertEqual(dumps_triple(loads_triple(line)), line)
            self.assertEqual(loads_triple(line), triple)

    def test_c1_serializes_without_outcome(self):
        line = dumps_triple(table_one_triple())
        self.assertIn('"c1":{"name":"TSC1","factor_ids":[4,5,23]}', line)

    def test_write_and_read_dataset(self):
        catalog = load_catalog()
        triples = generate_set(ScenarioMode.ARGUABLE, 5, 12, 11, catalog)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "Arguable.jsonl"
            meta = dataset_metadata(ScenarioMode.ARGUABLE, 5, 12, 11, catalog)
            write_dataset(path, triples, meta)
            self.assertEqual(read_dataset(path), triples)
            self.assertTrue(path.with_suffix(".meta.json").exists())

    def test_bad_line_names_line_number(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "broken.jsonl"
            good = dumps_triple(table_one_triple())
            bad = good.replace('"factor_ids":[4,5,23]', '"factor_ids":[4,9,23]')
            path.write_text(good + "\n" + bad + "\n", encoding="utf-8")
            with self.assertRaises(DatasetFormatError) as ctx:
                read_dataset(path)
            self.assertEqual(ctx.exception.line_number, 2)
