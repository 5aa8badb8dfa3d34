import tempfile
from pathlib import Path

from django.core.management import call_command
from django.test import SimpleTestCase
from io import StringIO

from factors.catalog import Side, load_catalog, lookup, parse_factor_token
from factors.exceptions import (
    CatalogFormatError,
    FactorMismatchError,
    FactorParseError,
    UnknownFactorError,
)


class CatalogTests(SimpleTestCase):
    def setUp(self):
        self.catalog = load_catalog()

    def test_canonical_catalog_has_26_entries(self):
        self.assertEqual(self.catalog.count, 26)
        self.assertEqual(list(self.catalog.ids), sorted(self.catalog.ids))
        self.assertNotIn(9, self.catalog)
        self.assertIn(27, self.catalog)

    def test_catalog_is_stable_across_calls(self):
        self.assertIs(load_catalog(), self.catalog)

    def test_both_sides_represented(self):
        self.assertTrue(self.catalog.by_side(Side.P))
        self.assertTrue(self.catalog.by_side(Side.D))
        self.assertEqual(len(self.catalog.by_side(Side.P)) + len(self.catalog.by_side(Side.D)), 26)

    def test_known_entries(self):
        f1 = lookup(self.catalog, 1)
        self.assertEqual((f1.label, f1.side), ("Disclosure-in-negotiations", Side.D))
        f6 = lookup(self.catalog, 6)
        self.assertEqual((f6.label, f6.side), ("Security-measures", Side.P))
        f4 = lookup(self.catalog, 4)
        self.assertEqual(f4.render(), "F4 Agreed-not-to-disclose (P)")

    def test_lookup_gap_and_out_of_range(self):
        for factor_id in (9, 999, 0):
            with self.assertRaises(UnknownFactorError) as ctx:
                lookup(self.catalog, factor_id)
            self.assertEqual(ctx.exception.factor_id, factor_id)

    def test_only_uncited_ids_are_provisional(self):
        provisional = {f.id for f in self.catalog if f.provisional}
        self.assertEqual(provisional, {13, 19, 21, 26})


class ParseFactorTokenTests(SimpleTestCase):
    def setUp(self):
        self.catalog = load_catalog()

    def test_full_form(self):
        self.assertEqual(parse_factor_token(self.catalog, "F4 Agreed-not-to-disclose (P)").id, 4)

    def test_id_only_and_side_only_forms(self):
        self.assertEqual(parse_factor_token(self.catalog, "F4").id, 4)
        self.assertEqual(parse_factor_token(self.catalog, "F5 (D)").id, 5)

    def test_round_trip_for_every_entry(self):
        for factor in self.catalog:
            self.assertEqual(parse_factor_token(self.catalog, factor.render()), factor)

    def test_unknown_id(self):
        with self.assertRaises(UnknownFactorError):
            parse_factor_token(self.catalog, "F99 Made-up (P)")

    def test_no_token(self):
        with self.assertRaises(FactorParseError):
            parse_factor_token(self.catalog, "no factors here")

    def test_side_mismatch_strict_and_lenient(self):
        with self.assertRaises(FactorMismatchError) as ctx:
            parse_factor_token(self.catalog, "F4 Agreed-not-to-disclose (D)")
        self.assertEqual(ctx.exception.field, "side")
        with self.assertLogs("factors.catalog", level="WARNING"):
            factor = parse_factor_token(self.catalog, "F4 Agreed-not-to-disclose (D)", strict=False)
        self.assertEqual(factor.id, 4)

    def test_label_mismatch(self):
        with self.assertRaises(FactorMismatchError) as ctx:
            parse_factor_token(self.catalog, "F4 Security-measures (P)")
        self.assertEqual(ctx.exception.field, "label")


class CatalogOverrideTests(SimpleTestCase):
    def _write(self, text):
        tmp = tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False, encoding="utf-8")
        tmp.write(text)
        tmp.close()
        self.addCleanup(Path(tmp.name).unlink)
        return tmp.name

    def test_override_file(self):
        path = self._write(
            '{"id":1,"label":"Public-use","side":"D"}\n'
            '{"id":2,"label":"Written-contract","side":"P","provisional":true}\n'
        )
        catalog = load_catalog(path)
        self.assertEqual(catalog.count, 2)
        self.assertTrue(lookup(catalog, 2).provisional)

    def test_bad_line_is_named(self):
        path = self._write(
            '{"id":1,"label":"Public-use","side":"D"}\n'
            '{"id":2,"label":"Has spaces","side":"P"}\n'
        )
        with self.assertRaises(CatalogFormatError) as ctx:
            load_catalog(path)
        self.assertEqual(ctx.exception.line_number, 2)

    def test_labels_outside_token_grammar_are_rejected(self):
        for label in ("Third-party-access2", "NDA_signed", "non-compete"):
            with self.subTest(label=label):
                path = self._write(f'{{"id":1,"label":"{label}","side":"P"}}\n')
                with self.assertRaises(CatalogFormatError) as ctx:
                    load_catalog(path)
                self.assertEqual(ctx.exception.line_number, 1)

    def test_override_factors_round_trip_through_tokens(self):
        path = self._write(
            '{"id":1,"label":"Third-party-access","side":"P"}\n'
            '{"id":3,"label":"NDA","side":"P"}\n'
            '{"id":7,"label":"Noncompete-signed","side":"D"}\n'
        )
        catalog = load_catalog(path)
        for factor in catalog.entries:
            with self.subTest(factor=factor.render()):
                self.assertEqual(parse_factor_token(catalog, factor.render()), factor)
                self.assertEqual(parse_factor_token(catalog, f"as shown by {factor.render()}."), factor)

    def test_exported_catalog_reloads_identically(self):
        out = StringIO()
        call_command("export_catalog", stdout=out)
        path = self._write(out.getvalue())
        reloaded = load_catalog(path)
        self.assertEqual(reloaded.entries, load_catalog().entries)
