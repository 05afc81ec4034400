import json
import logging

from django.conf import settings
from django.core.management.base import CommandError
from django.db import DatabaseError

from lab.management.base import ToolkitCommand
from lab.models import ExperimentRun
from lab.pipeline import ExperimentRunner, load_manifest
from lab.utils import finish_run, record_result

logger = logging.getLogger(__name__)


class Command(ToolkitCommand):
    help = "Train and evaluate every tokenizer configuration of an experiment manifest"

    def add_arguments(self, parser):
        parser.add_argument('manifest', metavar='MANIFEST.json')
        parser.add_argument('--workers', type=int, default=None, help="override the manifest's worker count")
        parser.add_argument('--no-record', action='store_true', help="do not store the run in the database")

    def handle(self, *args, **options):
        summary = self.guarded(self.execute_run, **options)
        self.stdout.write(f"{summary.manifest.output_dir}: {len(summary.results)} entries, {len(summary.failed)} failed")
        if summary.failed:
            failed = ', '.join(f"{r.entry.config_id} ({r.error})" for r in summary.failed)
            raise CommandError(f"failed grid entries: {failed}", returncode=summary.exit_code)

    def execute_run(self, manifest, workers, no_record, **options):
        experiment = load_manifest(manifest, defaults=settings.MORPHOTOK)
        if workers is not None:
            experiment = experiment.with_workers(workers)
        experiment.validate()

        run = None if no_record else self._start_record(manifest, experiment)

        def on_entry(result):
            if run is not None:
                record_result(run, result)

        summary = ExperimentRunner(experiment, on_entry=on_entry).run()
        if run is not None:
            finish_run(run, summary)
        return summary

    def _start_record(self, manifest, experiment):
        try:
            with open(manifest, encoding='utf-8') as handle:
                data = json.load(handle)
            run = ExperimentRun.objects.create(
                name=experiment.name,
                manifest_path=str(manifest),
                manifest=data,
                output_dir=str(experiment.output_dir),
                seed=experiment.seed,
                status=ExperimentRun.STATUS_RUNNING,
            )
        except DatabaseError as exc:
            logger.warning("Run not recorded, database unavailable: %s", exc)
            return None
        self.stdout.write(f"Recording as run #{run.id} (ws/runs/{run.id}/)")
        return run
