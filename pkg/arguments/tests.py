import json

from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from factors.catalog import find_factor_tokens, load_catalog
from scenarios.cases import Case, CaseSlot, Outcome
from scenarios.tests import table_one_triple

from .exceptions import AmbiguousAttributionError, MalformedOutputError, MissingPlyError
from .extraction import extract_factors_canonical, extract_ply_claims
from .parsing import parse_single_ply, parse_three_ply, serialize_three_ply
from .plies import Abstention, Ply, ThreePlyArgument
from .rendering import render_case, render_triple

CORE_PROMPT_EXAMPLE = """Here is the argument:
```json
{
  "Plaintiff's Argument": "Factors F4 Agreed-not-to-disclose (P) and F6 Security-measures (P) were present in both c1 and c2 (outcome Plaintiff), supporting the Plaintiff. c1 also has F12...",
  "Defendant's Counterargument": "c2 is distinguishable because it had F7 Brought-tools (P), not in c1. Furthermore, c1 has F1 Disclosure-in-negotiations (D). c3 (outcome Defendant) is analogous; c1 and c3 share F1 Disclosure-in-negotiations (D) and F5 Agreement-not-specific (D).",
  "Plaintiff's Rebuttal": "c3 is distinguishable as c1 lacks F5 Agreement-not-specific (D) and has strong pro-plaintiff factors like F4 and F6 not in c3."
}
```"""

DISTILLER_EXAMPLE = ThreePlyArgument.completed(
    "c1 shares F4 (P) and F6 (P) with c2 (outcome Plaintiff). c1 also features F12 (P).",
    "c2 also had F7 (P), distinguishing it. c1 has F1 (D). c3 (outcome Defendant) is similar, c1 and c3 share F1 (D).",
    "c3 is different, c1 does not have F5 (D) which was in c3.",
)


class RenderCaseTests(SimpleTestCase):
    def test_precedent_rendering(self):
        c2 = Case("TSC2", Outcome.PLAINTIFF, (7, 4, 6))
        self.assertEqual(
            render_case(c2, CaseSlot.C2),
            "[TSC2] [outcome Plaintiff] [Factors: F4 Agreed-not-to-disclose (P), "
            "F6 Security-measures (P), F7 Brought-tools (P)]",
        )

    def test_current_case_has_no_outcome(self):
        rendered = render_case(Case("TSC1", None, (1, 4, 6)), CaseSlot.C1)
        self.assertNotIn("outcome", rendered)
        self.assertTrue(rendered.startswith("[TSC1] [Factors: F1 "))

    def test_rendering_reparses_to_source_factors(self):
        catalog = load_catalog()
        triple = table_one_triple()
        for slot in (CaseSlot.C1, CaseSlot.C2, CaseSlot.C3):
            rendered = render_case(triple.case(slot), slot, catalog)
            ids = {int(m.group("id")) for m in find_factor_tokens(rendered)}
            self.assertEqual(ids, triple.case(slot).factor_set)
            self.assertEqual(rendered, render_case(triple.case(slot), slot, catalog))

    def test_render_triple_has_three_lines(self):
        self.assertEqual(len(render_triple(table_one_triple()).splitlines()), 3)


class ParseThreePlyTests(SimpleTestCase):
    def test_core_prompt_example_inside_fence(self):
        argument = parse_three_ply(CORE_PROMPT_EXAMPLE)
        self.assertFalse(argument.abstained)
        self.assertTrue(argument.plaintiff_argument.startswith("Factors F4"))
        self.assertIn("F7 Brought-tools", argument.defendant_counter)
        self.assertIn("c1 lacks F5", argument.plaintiff_rebuttal)

    def test_terminate_at_defendant_ply(self):
        text = json.dumps({
            "Plaintiff's Argument": "c1 and c2 share F4 Agreed-not-to-disclose (P).",
            "Defendant's Counterargument": "TERMINATE: Generation stopped. The argument must be abstained from.",
            "Plaintiff's Rebuttal": "",
        })
        argument = parse_three_ply(text)
        self.assertTrue(argument.abstained)
        self.assertEqual(argument.abstention.ply_index, 2)
        self.assertEqual(argument.abstention.reason, "Generation stopped. The argument must be abstained from.")
        self.assertEqual(argument.plies, ())

    def test_bare_terminate_is_abstention_at_first_ply(self):
        argument = parse_three_ply("TERMINATE: no common factors")
        self.assertEqual(argument.abstention, Abstention(1, "no common factors"))

    def test_two_keys_is_missing_ply(self):
        text = json.dumps({"Plaintiff's Argument": "a", "Defendant's Counterargument": "b"})
        with self.assertRaises(MissingPlyError) as ctx:
            parse_three_ply(text)
        self.assertEqual(ctx.exception.ply, Ply.PLAINTIFF_REBUTTAL)

    def test_no_object_is_malformed(self):
        with self.assertRaises(MalformedOutputError):
            parse_three_ply("I would argue that the plaintiff wins.")
        with self.assertRaises(MalformedOutputError):
            parse_three_ply('{"Plaintiff\'s Argument": "unterminated')

    def test_terminate_inside_prose_is_flagged(self):
        text = json.dumps({
            "Plaintiff's Argument": "We will not TERMINATE here; c1 and c2 share F4 (P).",
            "Defendant's Counterargument": "c3 (outcome Defendant) is analogous.",
            "Plaintiff's Rebuttal": "c3 is different.",
        })
        argument = parse_three_ply(text)
        self.assertFalse(argument.abstained)
        self.assertTrue(argument.terminate_in_prose)

    def test_single_ply(self):
        self.assertEqual(parse_single_ply('{"Plaintiff\'s Rebuttal": "c3 differs."}', Ply.PLAINTIFF_REBUTTAL), "c3 differs.")
        self.assertEqual(
            parse_single_ply('{"Defendant\'s Counterargument": "TERMINATE: unfavorable"}', 2),
            Abstention(2, "unfavorable"),
        )
        with self.assertRaises(MissingPlyError):
            parse_single_ply('{"Plaintiff\'s Argument": "wrong ply"}', Ply.DEFENDANT_COUNTER)

    @settings(max_examples=100, deadline=None)
    @given(
        plies=st.lists(
            st.text(min_size=1).map(str.strip).filter(lambda t: t and not t.startswith("TERMINATE")),
            min_size=3, max_size=3,
        ),
        reason=st.text().map(str.strip).filter(lambda t: not t.startswith(":")),
        ply_index=st.integers(min_value=1, max_value=3),
        abstain=st.booleans(),
    )
    def test_serialization_round_trip(self, plies, reason, ply_index, abstain):
        if abstain:
            argument = ThreePlyArgument.abstained_at(ply_index, reason)
        else:
            argument = ThreePlyArgument.completed(*plies)
        self.assertEqual(parse_three_ply(serialize_three_ply(argument)), argument)


class CanonicalExtractionTests(SimpleTestCase):
    def test_distiller_example_attribution(self):
        extracted = extract_factors_canonical(DISTILLER_EXAMPLE)
        self.assertEqual(extracted.per_case[CaseSlot.C1], (4, 6, 12, 1))
        self.assertEqual(extracted.per_case[CaseSlot.C2], (4, 6, 7))
        self.assertEqual(extracted.per_case[CaseSlot.C3], (1, 5))
        self.assertEqual(extracted.negated[CaseSlot.C1], (5,))
        self.assertEqual(extracted.outcomes, {CaseSlot.C2: Outcome.PLAINTIFF, CaseSlot.C3: Outcome.DEFENDANT})

    def test_shared_sentence_lists_both_slots(self):
        extracted = extract_ply_claims("c1 and c2 share F4 (P).")
        self.assertEqual(extracted.factors_for(CaseSlot.C1), {4})
        self.assertEqual(extracted.factors_for(CaseSlot.C2), {4})
        self.assertEqual(extracted.factors_for(CaseSlot.C3), set())

    def test_negated_slot_never_receives_factor(self):
        extracted = extract_ply_claims("c1 does not have F5 (D) which was in c3.")
        self.assertEqual(extracted.factors_for(CaseSlot.C3), {5})
        self.assertNotIn(5, extracted.factors_for(CaseSlot.C1))
        for text in ("c1 lacks F5 (D).", "F5 is not present in the current case.", "F5 is missing from TSC1."):
            self.assertEqual(extract_ply_claims(text).factors_for(CaseSlot.C1), set(), text)

    def test_no_tokens_gives_empty_lists(self):
        extracted = extract_ply_claims("The plaintiff should prevail on these facts.")
        self.assertEqual(extracted.as_sets(), {slot: frozenset() for slot in CaseSlot})

    def test_unknown_ids_are_kept(self):
        extracted = extract_ply_claims("c1 and c2 share F9 and F40.")
        self.assertEqual(extracted.per_case[CaseSlot.C2], (9, 40))

    def test_side_mismatch_is_recorded(self):
        extracted = extract_ply_claims("c1 and c2 share F4 Agreed-not-to-disclose (D).")
        self.assertIn((CaseSlot.C2, 4), extracted.side_mismatches)
        self.assertEqual(extracted.per_case[CaseSlot.C2], (4,))

    def test_sentence_without_slot_is_ambiguous(self):
        with self.assertRaises(AmbiguousAttributionError) as ctx:
            extract_ply_claims("c1 and c2 share F4 (P). F6 (P) also matters.")
        self.assertEqual(ctx.exception.count, 1)
        self.assertEqual(ctx.exception.partial.per_case[CaseSlot.C2], (4,))
        lenient = extract_ply_claims("c1 and c2 share F4 (P). F6 (P) also matters.", strict=False)
        self.assertEqual(lenient.per_case[CaseSlot.C1], (4,))

    def test_abstention_extracts_nothing(self):
        extracted = extract_factors_canonical(ThreePlyArgument.abstained_at(1, "no overlap"))
        self.assertEqual(extracted, extract_ply_claims(""))
