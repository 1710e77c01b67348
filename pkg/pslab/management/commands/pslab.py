""" The pslab command: run one experiment and write its reports """
from django.core.management.base import BaseCommand, CommandError
import json
import logging
from pslab.runner import SUBCOMMANDS, run

VERBOSITY_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}

class Command(BaseCommand):
    help = 'Run a pslab experiment; reports are written as JSON and CSV into --out.'

    def add_arguments(self, parser):
        parser.add_argument('subcommand', choices=sorted(SUBCOMMANDS))
        parser.add_argument('--config', help='JSON experiment config')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--max-len', dest='max_len', type=int)
        parser.add_argument('--out', default='.')
        parser.add_argument('--format', dest='output_format', default='json',
                            choices=('json', 'csv', 'text'))
        parser.add_argument('--jobs', type=int, default=1)

    def handle(self, *args, **options):
        logging.getLogger('pslab').setLevel(VERBOSITY_LEVELS.get(options['verbosity'], logging.DEBUG))
        config = {}
        if options['config']:
            try:
                with open(options['config'], encoding='utf-8') as fd:
                    config = json.load(fd)
            except (OSError, ValueError) as exc:
                raise CommandError('Cannot read config %s: %s' % (options['config'], exc))
        if not isinstance(config, dict):
            raise CommandError('Config %s must hold a JSON object' % options['config'])
        for key in ('seed', 'max_len'):
            if options[key] is not None:
                config[key] = options[key]

        status = run(options['subcommand'], config, out=options['out'],
                     output_format=options['output_format'], jobs=options['jobs'],
                     stdout=self.stdout)
        if status:
            raise CommandError('%s finished with status %d, see %s'
                               % (options['subcommand'], status, options['out']),
                               returncode=status)
