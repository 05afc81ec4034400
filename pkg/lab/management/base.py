import json

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from lab.exceptions import CorpusError, ManifestError, MorphotokError

# input problems (bad manifest, missing or unreadable files) exit with 2
INPUT_ERRORS = (ManifestError, CorpusError, FileNotFoundError)


def lab_setting(name):
    return settings.MORPHOTOK[name]


class ToolkitCommand(BaseCommand):
    """Base for toolkit commands: library errors become CommandError with an exit code."""

    def guarded(self, handler, **options):
        try:
            return handler(**options)
        except INPUT_ERRORS as exc:
            raise CommandError(str(exc), returncode=2) from exc
        except MorphotokError as exc:
            raise CommandError(str(exc), returncode=1) from exc

    def write_json(self, data, out=None):
        text = json.dumps(data, ensure_ascii=False, indent=1, sort_keys=True)
        if out:
            with open(out, 'w', encoding='utf-8') as handle:
                handle.write(text + '\n')
            self.stdout.write(f"Wrote {out}")
        else:
            self.stdout.write(text)


class LabCommand(ToolkitCommand):
    """
    A management command with sub-actions (`manage.py tok train ...`).
    Subclasses define `add_actions(subparsers)` and one `handle_<action>`
    method per action.
    """

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='action', metavar='ACTION', required=True)
        self.add_actions(subparsers)

    def add_actions(self, subparsers):
        raise NotImplementedError

    def handle(self, *args, **options):
        action = options['action'].replace('-', '_')
        self.guarded(getattr(self, f'handle_{action}'), **options)
