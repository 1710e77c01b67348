from django.core.management import call_command
from django.core.management.base import CommandError
import io
import json
import pslab
from pslab.orbit import HASH_DEDUP
from pslab.runner import SUBCOMMANDS, run
from pslab.test_utils.context_managers import ReportDirectory
from pslab.test_utils.testcase import PslabTestCase

_QUARTER_TURN = [[0.0, -1.0], [1.0, 0.0]]


class RunnerTests(PslabTestCase):
    def test_subcommands(self):
        self.assertEqual(sorted(SUBCOMMANDS), ['bms', 'convexity', 'exponent', 'hilbert',
                                               'kappa', 'limitset', 'ps', 'selftest', 'track'])
        with self.assertRaises(ValueError):
            run('foo', {})

    def test_kappa(self):
        with ReportDirectory() as directory:
            status = run('kappa', {'fixture': 'F1', 'max_len': 3}, out=directory.name)
            self.assertEqual(status, 0)
            report = directory.read_json('kappa.json')
            table = directory.read_csv('kappa-kappa.csv')
            self.assertTrue(directory.exists('orbit.jsonl'))
            self.assertFalse(directory.exists('error.json'))
        header = report['header']
        self.assertEqual(header['subcommand'], 'kappa')
        self.assertEqual(header['version'], pslab.__version__)
        self.assertEqual(header['norm'], 'sup')
        self.assertEqual(len(header['config_hash']), 64)
        self.assertIsNone(header['seed'])
        self.assertEqual(report['result']['elements'], 7)
        self.assertEqual(report['result']['sphere_sizes'], [1, 2, 2, 2])
        self.assertEqual(sorted(report['result']['min_gaps']), ['1', '2', '3'])
        self.assertEqual(table[0], ['word', 'length', 'kappa_1', 'kappa_2', 'kappa_3',
                                    'lambda_1', 'lambda_2', 'lambda_3'])
        self.assertEqual([row[0] for row in table[1:]], ['', 'a', 'A', 'aa', 'AA', 'aaa', 'AAA'])

    def test_invalid_config(self):
        with ReportDirectory() as directory:
            self.assertEqual(run('kappa', {}, out=directory.name), 2)
            error = directory.read_json('error.json')
            self.assertFalse(directory.exists('kappa.json'))
        self.assertEqual(error['error'], 'InvalidConfig')
        self.assertEqual(error['fields']['__all__'][0]['code'], 'group')

        with ReportDirectory() as directory:
            self.assertEqual(run('track', {'fixture': 'F3'}, out=directory.name), 2)
            error = directory.read_json('error.json')
        self.assertEqual(error['fields']['seed'][0]['code'], 'required')

    def test_pslab_error(self):
        config = {'generators': {'a': _QUARTER_TURN}, 'policy': HASH_DEDUP, 'max_len': 4}
        with ReportDirectory() as directory:
            self.assertEqual(run('kappa', config, out=directory.name), 3)
            error = directory.read_json('error.json')
        self.assertEqual(error['error'], 'DiscretenessSuspect')
        self.assertEqual(error['header']['config']['dim'], 2)

    def test_deterministic(self):
        config = {'fixture': 'F3', 'seed': 11, 'samples': 3, 'track_length': 8}
        outputs = []
        for _ in range(2):
            with ReportDirectory() as directory:
                self.assertEqual(run('track', dict(config), out=directory.name), 0)
                outputs.append((directory.read_bytes('track.json'),
                                directory.read_bytes('track-traces.csv')))
        self.assertEqual(outputs[0], outputs[1])
        report = json.loads(outputs[0][0].decode('utf-8'))
        self.assertEqual(report['result']['traces'], 3)
        self.assertEqual(report['header']['seed'], 11)

    def test_selftest(self):
        with ReportDirectory() as directory:
            status = run('selftest', {'fixture': 'F1', 'seed': 0, 'samples': 3, 'max_len': 6},
                         out=directory.name)
            report = directory.read_json('selftest.json')
        result = report['result']
        self.assertEqual(status, 0 if result['passed'] else 1)
        names = [check['name'] for check in result['checks']]
        self.assertIn('kappa_inverse_d3', names)
        self.assertIn('hilbert_radial', names)
        for name in ('quint_limit_F3', 'north_south_F3', 'conical_convergence_F3',
                     'shadow_lemma_growth_F2', 'conformality_F2', 'kaimanovich_bound_F2',
                     'hilbert_entropy_bound_F2', 'sl2_so21_exponent', 'middle_eigenvalues_F3',
                     'convexity_strict_F3'):
            self.assertIn(name, names)
        self.assertTrue(all(check['samples'] > 0 for check in result['checks']))

    def test_text_output(self):
        stdout = io.StringIO()
        with ReportDirectory() as directory:
            run('kappa', {'fixture': 'F1', 'max_len': 2}, out=directory.name,
                output_format='text', stdout=stdout)
        lines = stdout.getvalue().splitlines()
        self.assertTrue(any(line.startswith('header.subcommand') for line in lines))
        self.assertFalse(any(line.startswith('header.settings') for line in lines))


class CommandTests(PslabTestCase):
    def test_command(self):
        stdout = io.StringIO()
        with ReportDirectory() as directory:
            config = directory.path('config.json')
            with open(config, 'w', encoding='utf-8') as fd:
                json.dump({'fixture': 'F1', 'max_len': 5}, fd)
            call_command('pslab', 'kappa', '--config', config, '--max-len', '2',
                         '--out', directory.name, '--format', 'csv', stdout=stdout)
            report = directory.read_json('kappa.json')
        self.assertEqual(report['header']['config']['max_len'], 2)
        self.assertEqual(report['result']['elements'], 5)
        self.assertTrue(stdout.getvalue().strip().endswith('kappa-kappa.csv'))

    def test_failure_status(self):
        with ReportDirectory() as directory:
            with self.assertRaises(CommandError) as context:
                call_command('pslab', 'track', '--config', directory.path('missing.json'),
                             '--out', directory.name, stdout=io.StringIO())
            self.assertIn('missing.json', str(context.exception))

            config = directory.path('config.json')
            with open(config, 'w', encoding='utf-8') as fd:
                json.dump({'fixture': 'F3'}, fd)
            with self.assertRaises(CommandError) as context:
                call_command('pslab', 'track', '--config', config, '--out', directory.name,
                             stdout=io.StringIO())
            self.assertEqual(context.exception.returncode, 2)
