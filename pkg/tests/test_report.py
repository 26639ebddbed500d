#!/usr/bin/env python3

import os
import tempfile
import unittest

from .context import genent


class TestReport(unittest.TestCase):
    def setUp(self):
        self.tmpfile = tempfile.NamedTemporaryFile().name
        self.report = genent.report.Report(self.tmpfile)

    def tearDown(self):
        if os.path.exists(self.tmpfile):
            os.remove(self.tmpfile)

    def test_filename(self):
        self.assertEqual(self.report.filename, self.tmpfile)

    def test_defaults(self):
        for key in ("name", "version", "config_hash", "seed", "command", "parameters", "results"):
            self.assertIn(key, self.report._data)
        self.assertEqual(self.report.get("version"), genent.__version__)

    def test_no_filename(self):
        report = genent.report.Report(None)
        self.assertIsNone(report.filename)
        self.assertEqual(report.get("results"), {})

    def test_simple_set(self):
        self.report.set("aaa", 123)
        self.assertEqual(self.report._data["aaa"], 123)

    def test_nested_set(self):
        self.report.set("aaa.bbb", 123)
        self.assertEqual(self.report._data["aaa"]["bbb"], 123)

    def test_nested_update(self):
        self.report.set("aaa.bbb", 123)
        self.report.set("aaa.bbb", 456)
        self.report.set("aaa.ccc", 789)
        self.assertEqual(self.report._data["aaa"], {"bbb": 456, "ccc": 789})

    def test_nested_get(self):
        self.report._data["aaa"] = {"bbb": 123}
        self.assertEqual(self.report.get("aaa.bbb"), 123)
        self.assertEqual(self.report["aaa"], {"bbb": 123})

    def test_none_get(self):
        self.assertIsNone(self.report.get("aaa"))
        self.assertIsNone(self.report.get("aaa.bbb"))
        self.report.set("aaa", None)
        self.assertIsNone(self.report.get("aaa.bbb.ccc"))

    def test_list(self):
        self.report._data["aaa"] = {
            "bbb": "ccc",
            "ddd": {
                "eee": "fff",
                "ggg": 42,
            },
        }
        exp = ["aaa.bbb", "aaa.ddd.eee", "aaa.ddd.ggg"]
        self.assertCountEqual(self.report.list("aaa"), exp)
        self.assertCountEqual(self.report.list("results"), [])

    def test_info(self):
        self.report.set("aaa", 123)
        self.report.set("bbb.ccc", 456)
        info = self.report.info()
        self.assertIn("Filename:", info)
        self.assertIn("123", info)
        self.assertNotIn("456", info)

    def test_copy_original_object(self):
        something = {"foo": 1}
        self.report.set("results.something", something)
        something["baz"] = 3
        self.assertEqual(self.report.get("results.something.foo"), 1)
        self.assertIsNone(self.report.get("results.something.baz"))

    def test_remove(self):
        self.report.set("results.xxx", "should not be here")
        self.report.remove("results.xxx")
        self.assertIsNone(self.report.get("results.xxx"))
        self.report.remove("results.missing")

    def test_save_and_load(self):
        self.report.set("results.number", 42)
        self.report.set("results.value", -3.14)
        self.report.save()
        again = genent.report.Report(self.tmpfile)
        self.assertEqual(again, self.report)
        with open(self.tmpfile) as fp:
            content = fp.read()
        self.assertTrue(content.endswith("}\n"))

    def test_invalid_json(self):
        with open(self.tmpfile, "w") as fp:
            fp.write("{\"name\": ")
        with self.assertRaises(genent.errors.ValidityError):
            genent.report.Report(self.tmpfile)


class TestDiffAndRender(unittest.TestCase):
    def make(self, value):
        report = genent.report.Report(None)
        report.set("name", "analyze werner")
        report.set("results.class", "SEPARABLE")
        report.set("results.value", value)
        return report

    def test_no_diff(self):
        diff, tables = genent.report.diff_tables(self.make(1.0), self.make(1.0))
        self.assertEqual(len(diff), 0)
        self.assertEqual(tables, [])

    def test_value_changed(self):
        diff, tables = genent.report.diff_tables(self.make(1.0), self.make(1.5))
        title, headers, rows = tables[0]
        self.assertEqual(title, "Values changed")
        self.assertEqual(rows[0][3], "50")

    def test_main_diff(self):
        tmpdir = tempfile.mkdtemp()
        first = os.path.join(tmpdir, "first.json")
        second = os.path.join(tmpdir, "second.json")
        self.make(1.0).save(first)
        self.make(2.0).save(second)
        self.assertEqual(genent.report.main_diff([first, first]), 0)
        self.assertEqual(genent.report.main_diff([first, second, "--tables"]), 1)

    def test_render(self):
        report = self.make(1.0)
        report.set("results.ledger_rows", [{"cut": "A1:C1", "value": 1.0, "tag": "WOOTTERS_EXACT"}])
        text = genent.report.render(report)
        self.assertIn("Werner class: SEPARABLE", text)
        self.assertIn("A1:C1", text)
        self.assertIn("WOOTTERS_EXACT", text)


if __name__ == "__main__":
    unittest.main()
