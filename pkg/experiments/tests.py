import io
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from unittest import mock

import yaml
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from ai_agent.prompts import Method
from ai_agent.service import BackendKind
from arguments.plies import ThreePlyArgument
from pipelines.records import RunRecord, RunStatus, dumps_record, roles_for
from pipelines.runner import read_transcript, transcript_path
from reports.aggregation import AggregationPolicy
from reports.extraction import EvaluationStatus, evaluation_path, read_evaluations
from reports.metrics import render_percent
from scenarios.cases import ScenarioMode
from scenarios.dataset import dataset_path, read_dataset

from .config import ExperimentConfig, load_config, parse_config, with_overrides
from .exceptions import ConfigError, MissingInputError
from .models import ExperimentRun, ReportSnapshot
from .services import (
    EXIT_EVALUATION_FAILURES,
    EXIT_OK,
    EXIT_RUN_FAILURES,
    cmd_evaluate,
    cmd_gen_cases,
    cmd_report,
    cmd_run,
)


def raw_config(output_dir, **overrides):
    raw = {
        "name": "test",
        "dataset": {"modes": ["Arguable", "Mismatched", "NonArguable"], "complexity": 5, "count": 6, "master_seed": 2025},
        "methods": ["SA", "RMA"],
        "backends": {
            "faithful": {"kind": "mock", "behavior": "Faithful"},
            "fabricating": {"kind": "mock", "behavior": "Fabricating", "fabrications": 1, "seed": 3},
        },
        "generators": ["faithful"],
        "evaluator": "canonical",
        "agents": {"analyst": "oracle", "polisher": "oracle"},
        "workers": 2,
        "output_dir": str(output_dir),
    }
    raw.update(overrides)
    return raw


def write_config(directory, **overrides) -> Path:
    path = Path(directory) / "experiment.yaml"
    path.write_text(yaml.safe_dump(raw_config(Path(directory) / "out", **overrides)), encoding="utf-8")
    return path


class TempDirMixin:
    def setUp(self):
        super().setUp()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def config(self, **overrides) -> ExperimentConfig:
        return load_config(write_config(self.root, **overrides))


# =========================
# CONFIG
# =========================
class ConfigTests(TempDirMixin, SimpleTestCase):
    def test_loads_yaml(self):
        config = self.config()
        self.assertEqual(config.name, "test")
        self.assertEqual(config.methods, (Method.SA, Method.RMA))
        self.assertEqual(config.dataset.modes, tuple(ScenarioMode))
        self.assertEqual(config.backends["fabricating"].kind, BackendKind.MOCK)
        self.assertEqual(config.backends["fabricating"].fabrications, 1)
        self.assertEqual(config.workers, 2)

    def test_dataset_defaults(self):
        raw = raw_config(self.root)
        del raw["dataset"]
        config = parse_config(raw)
        self.assertEqual((config.dataset.complexity, config.dataset.count), (5, 90))
        self.assertEqual(len(config.dataset.modes), 3)

    def test_unknown_method_is_a_config_error(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(raw_config(self.root, methods=["SA", "CoT"]))
        self.assertIn("methods", ctx.exception.errors)

    def test_unresolved_backend_names(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(raw_config(self.root, generators=["gpt"], evaluator="judge"))
        self.assertIn("generators", ctx.exception.errors)
        self.assertIn("evaluator", ctx.exception.errors)

    def test_llm_agents_need_real_generators(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(raw_config(self.root, agents={"analyst": "llm"}))
        self.assertIn("agents", ctx.exception.errors)

    def test_backend_field_validation(self):
        backends = {
            "gpt": {"kind": "openai"},
            "replay": {"kind": "fixture"},
            "odd": {"kind": "mock", "params": {"temperatur": 0.2}},
        }
        with self.assertRaises(ConfigError) as ctx:
            parse_config(raw_config(self.root, backends=backends, generators=["gpt"]))
        errors = ctx.exception.errors["backends"]
        self.assertEqual(set(errors), {"gpt", "replay", "odd"})

    def test_invalid_counts(self):
        with self.assertRaises(ConfigError):
            parse_config(raw_config(self.root, workers=0))
        with self.assertRaises(ConfigError):
            parse_config(raw_config(self.root, dataset={"count": 0}))

    def test_fixture_wraps_inner_provider(self):
        backends = {
            "gpt": {"kind": "openai", "model": "gpt-4o-mini", "api_key_env": "OPENAI_API_KEY"},
            "gpt-replay": {"kind": "fixture", "fixture_dir": "fx", "inner": "gpt"},
        }
        config = parse_config(raw_config(self.root, backends=backends, generators=["gpt-replay"]))
        self.assertEqual(config.backends["gpt-replay"].inner.model, "gpt-4o-mini")

    def test_overrides(self):
        config = with_overrides(self.config(), modes=["mismatched"], methods="MA, sa-ep", seed=9, workers=1,
                                fixture_dir=str(self.root / "fx"))
        self.assertEqual(config.dataset.modes, (ScenarioMode.MISMATCHED,))
        self.assertEqual(config.methods, (Method.MA, Method.SA_EP))
        self.assertEqual(config.dataset.master_seed, 9)
        self.assertEqual(config.workers, 1)
        # los mocks no se envuelven en fixtures
        self.assertEqual(config.backend("faithful").kind, BackendKind.MOCK)
        with self.assertRaises(ConfigError):
            with_overrides(config, methods="SA,XYZ")
        with self.assertRaises(ConfigError):
            with_overrides(config, workers=0)

    def test_bad_yaml(self):
        path = self.root / "broken.yaml"
        path.write_text("methods: [SA\n", encoding="utf-8")
        with self.assertRaises(ConfigError):
            load_config(path)

    def test_digest_ignores_output_dir(self):
        first = parse_config(raw_config(self.root / "a"))
        second = parse_config(raw_config(self.root / "b"))
        self.assertEqual(first.digest, second.digest)
        self.assertNotEqual(first.digest, parse_config(raw_config(self.root, methods=["MA"])).digest)


# =========================
# GEN-CASES
# =========================
class GenCasesTests(TempDirMixin, SimpleTestCase):
    def test_one_file_per_mode(self):
        config = self.config()
        result = cmd_gen_cases(config)
        self.assertEqual([s.mode for s in result.modes], list(ScenarioMode))
        for summary in result.modes:
            self.assertTrue(summary.ok)
            path = dataset_path(config.datasets_dir, summary.mode)
            self.assertEqual(len(path.read_text(encoding="utf-8").splitlines()), 6)
            self.assertTrue(path.with_suffix(".meta.json").exists())

    def test_single_triple(self):
        config = self.config(dataset={"modes": ["Arguable"], "count": 1})
        cmd_gen_cases(config)
        self.assertEqual(len(read_dataset(dataset_path(config.datasets_dir, ScenarioMode.ARGUABLE))), 1)

    def test_rerun_is_byte_identical(self):
        config = self.config()
        cmd_gen_cases(config)
        first = {m: dataset_path(config.datasets_dir, m).read_bytes() for m in ScenarioMode}
        cmd_gen_cases(config)
        second = {m: dataset_path(config.datasets_dir, m).read_bytes() for m in ScenarioMode}
        self.assertEqual(first, second)

    def test_run_without_dataset(self):
        with self.assertRaises(MissingInputError):
            cmd_run(self.config())


# =========================
# EXPERIMENTO COMPLETO
# =========================
class EndToEndTests(TempDirMixin, TestCase):
    def full_run(self, config, pdf=False):
        cmd_gen_cases(config)
        self.assertEqual(cmd_run(config).exit_code, EXIT_OK)
        self.assertEqual(cmd_evaluate(config).exit_code, EXIT_OK)
        return cmd_report(config, pdf=pdf)

    def cell(self, cells, method, scenario, model="faithful"):
        return next(c for c in cells if (c.model, c.method, c.scenario) == (model, method, scenario))

    def test_oracle_rma_abstains_exactly_when_it_should(self):
        config = self.config(dataset={"count": 90, "master_seed": 2025}, methods=["RMA"], workers=4)
        cells = self.full_run(config).cells
        for scenario in (ScenarioMode.MISMATCHED, ScenarioMode.NON_ARGUABLE):
            self.assertEqual(render_percent(self.cell(cells, Method.RMA, scenario).ratio_abstain), "100.00")
        arguable = self.cell(cells, Method.RMA, ScenarioMode.ARGUABLE)
        self.assertEqual(arguable.counts["abstained"], 0)
        self.assertEqual(arguable.counts["completed"], 90)
        self.assertEqual(render_percent(arguable.acc_h), "100.00")
        self.assertGreater(arguable.rec_u, 0)

    def test_revision_removes_fabrication_that_sa_keeps(self):
        config = self.config(
            dataset={"modes": ["Arguable"], "count": 90, "master_seed": 5},
            generators=["fabricating"],
        )
        cells = self.full_run(config).cells
        n_gt = sum(t.n_gt for t in read_dataset(dataset_path(config.datasets_dir, ScenarioMode.ARGUABLE)))
        sa = self.cell(cells, Method.SA, ScenarioMode.ARGUABLE, "fabricating")
        rma = self.cell(cells, Method.RMA, ScenarioMode.ARGUABLE, "fabricating")
        self.assertEqual(sa.acc_h, (1 - Fraction(90, n_gt)) * 100)
        self.assertEqual(rma.acc_h, 100)

    def test_full_experiment_is_deterministic(self):
        first = parse_config(raw_config(self.root / "first"), name="test")
        second = parse_config(raw_config(self.root / "second"), name="test")
        self.full_run(first, pdf=True)
        self.full_run(second, pdf=True)
        for name in sorted(p.name for p in first.reports_dir.iterdir()):
            self.assertEqual(
                (first.reports_dir / name).read_bytes(),
                (second.reports_dir / name).read_bytes(),
                name,
            )

    def test_report_is_idempotent_and_registered(self):
        config = self.config()
        result = self.full_run(config)
        before = (config.reports_dir / "hallucination_accuracy.txt").read_text(encoding="utf-8")
        cmd_report(config)
        self.assertEqual((config.reports_dir / "hallucination_accuracy.txt").read_text(encoding="utf-8"), before)
        self.assertIn(f"# config_digest: {config.digest}", before)
        self.assertEqual(ReportSnapshot.objects.filter(run_name="test").count(), 2)
        self.assertEqual(len(result.files), 8)
        runs = ExperimentRun.objects.filter(name="test")
        self.assertEqual(sorted(r.method for r in runs), ["RMA", "SA"])
        self.assertTrue(all(r.triples == 18 for r in runs))

    def test_resume_does_not_duplicate(self):
        config = self.config()
        cmd_gen_cases(config)
        cmd_run(config)
        again = cmd_run(config)
        path = transcript_path(config.output_dir, Method.SA, "faithful")
        ids = [r.triple_id for r in read_transcript(path)]
        self.assertEqual(len(ids), len(set(ids)))
        self.assertEqual(len(ids), 18)
        self.assertTrue(all(s.skipped == 18 for s in again.summaries))

    def test_mean_policy_is_recorded(self):
        config = self.config()
        self.full_run(config)
        cmd_report(config, policy=AggregationPolicy.MEAN)
        text = (config.reports_dir / "factor_recall.csv").read_text(encoding="utf-8")
        self.assertIn("# policy: mean", text)

    def test_empty_transcripts_give_empty_tables(self):
        config = self.config()
        cmd_gen_cases(config)
        for method in config.methods:
            path = transcript_path(config.output_dir, method, "faithful")
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("", encoding="utf-8")
        result = cmd_report(config)
        self.assertEqual(result.cells, [])
        counts = (config.reports_dir / "counts.csv").read_text(encoding="utf-8").splitlines()
        self.assertTrue(counts[-1].startswith("Model,Method,Scenario"))


class FailureTests(TempDirMixin, TestCase):
    def test_failed_runs_are_not_abstentions(self):
        backends = {"replay": {"kind": "fixture", "fixture_dir": str(self.root / "empty-fixtures"), "model": "gpt-x"}}
        config = self.config(backends=backends, generators=["replay"], methods=["SA"],
                             dataset={"modes": ["Mismatched"], "count": 4})
        cmd_gen_cases(config)
        run = cmd_run(config)
        self.assertEqual(run.exit_code, EXIT_RUN_FAILURES)
        self.assertEqual(run.failed, 4)
        cmd_evaluate(config)
        statuses = {e.status for e in read_evaluations(evaluation_path(config.output_dir, Method.SA, "replay"))}
        self.assertEqual(statuses, {EvaluationStatus.RUN_FAILED})
        cell = cmd_report(config).cells[0]
        self.assertIsNone(cell.ratio_abstain)
        self.assertEqual((cell.counts["failed"], cell.counts["abstained"]), (4, 0))

    def _write_unattributed_transcript(self, config):
        triples = read_dataset(dataset_path(config.datasets_dir, ScenarioMode.ARGUABLE))
        lines = [
            dumps_record(RunRecord(
                triple_id=t.id, method=Method.SA, backend="faithful", model="mock", mode=t.mode,
                status=RunStatus.COMPLETED, roles=roles_for(3), revision_count_per_ply=(0, 0, 0),
                result=ThreePlyArgument.completed("F4 Agreed-not-to-disclose (P) helps.", "c3 differs.", "c2 differs."),
            ))
            for t in triples
        ]
        path = transcript_path(config.output_dir, Method.SA, "faithful")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    def test_extraction_failure_exit_code(self):
        config = self.config(methods=["SA"], dataset={"modes": ["Arguable"], "count": 2})
        cmd_gen_cases(config)
        self._write_unattributed_transcript(config)
        result = cmd_evaluate(config)
        self.assertEqual(result.exit_code, EXIT_EVALUATION_FAILURES)
        self.assertEqual(result.evaluation_failed, 2)
        report = cmd_report(config)
        self.assertEqual((report.exit_code, report.evaluation_failed), (EXIT_EVALUATION_FAILURES, 2))

    def test_report_flags_failures_from_on_the_fly_evaluation(self):
        config = self.config(methods=["SA"], dataset={"modes": ["Arguable"], "count": 2})
        cmd_gen_cases(config)
        self._write_unattributed_transcript(config)
        report = cmd_report(config)
        self.assertEqual(report.exit_code, EXIT_EVALUATION_FAILURES)
        self.assertTrue(evaluation_path(config.output_dir, Method.SA, "faithful").exists())
        self.assertTrue((config.reports_dir / "counts.csv").exists())
        cell = report.cells[0]
        self.assertEqual(cell.counts["evaluation_failed"], 2)

    @mock.patch.dict(os.environ, {}, clear=False)
    def test_generator_without_credential_does_not_stop_the_matrix(self):
        os.environ.pop("ARGLAB_TEST_ABSENT_KEY", None)
        backends = {
            "gpt": {"kind": "openai", "model": "gpt-4o-mini", "api_key_env": "ARGLAB_TEST_ABSENT_KEY"},
            "faithful": {"kind": "mock", "behavior": "Faithful"},
        }
        config = self.config(backends=backends, generators=["gpt", "faithful"], methods=["SA"],
                             dataset={"modes": ["Arguable"], "count": 3})
        cmd_gen_cases(config)
        with self.assertLogs("experiments.services", level="ERROR"):
            run = cmd_run(config)
        self.assertEqual(run.exit_code, EXIT_RUN_FAILURES)
        by_backend = {s.backend: s for s in run.summaries}
        self.assertEqual((by_backend["gpt"].failed, by_backend["gpt"].completed), (3, 0))
        self.assertEqual((by_backend["faithful"].failed, by_backend["faithful"].completed), (0, 3))

        failed = read_transcript(transcript_path(config.output_dir, Method.SA, "gpt"))
        self.assertEqual({r.status for r in failed}, {RunStatus.FAILED})
        self.assertTrue(all("AuthenticationError" in r.failure for r in failed))
        self.assertEqual(len(read_transcript(transcript_path(config.output_dir, Method.SA, "faithful"))), 3)

        self.assertEqual(cmd_evaluate(config).exit_code, EXIT_OK)
        cells = {c.model: c for c in cmd_report(config).cells}
        self.assertEqual(cells["gpt"].counts["failed"], 3)
        self.assertIsNone(cells["gpt"].acc_h)
        self.assertEqual(render_percent(cells["faithful"].acc_h), "100.00")


class CommandTests(TempDirMixin, TestCase):
    def test_commands_chain(self):
        config_path = write_config(self.root, methods=["RMA"], dataset={"modes": ["NonArguable"], "count": 3})
        for name in ("gen_cases", "run", "evaluate", "report"):
            call_command(name, config=str(config_path), stdout=io.StringIO())
        table = (self.root / "out" / "reports" / "abstention_ratio.txt").read_text(encoding="utf-8")
        self.assertIn("100.00", table)

    def test_unknown_method_flag_exits_2(self):
        config_path = write_config(self.root)
        with self.assertRaises(CommandError) as ctx:
            call_command("gen_cases", config=str(config_path), methods="SA,XYZ")
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_dataset_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("run", config=str(write_config(self.root)))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_partial_failures_exit_3(self):
        backends = {"replay": {"kind": "fixture", "fixture_dir": str(self.root / "fx"), "model": "gpt-x"}}
        config_path = write_config(self.root, backends=backends, generators=["replay"], methods=["SA"],
                                   dataset={"modes": ["Arguable"], "count": 2})
        call_command("gen_cases", config=str(config_path), stdout=io.StringIO())
        with self.assertRaises(CommandError) as ctx:
            call_command("run", config=str(config_path), stdout=io.StringIO())
        self.assertEqual(ctx.exception.returncode, 3)
