"""`python -m morphotok <command> ...` runs a management command; `--version` prints the toolkit version."""
import os
import sys


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] in (['--version'], ['-V']):
        from morphotok import __version__
        print(f"morphotok {__version__}")
        return 0
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'morphotok.settings')
    from django.core.management import execute_from_command_line
    execute_from_command_line(['morphotok', *argv])
    return 0


if __name__ == '__main__':
    sys.exit(main())
