""" Report rendering: headers identifying a run, JSON with sorted keys,
    CSV tables and a plain text summary.
"""
from django.core.serializers.json import DjangoJSONEncoder
import csv
import hashlib
import json
import numpy as np
import os
import pslab
from pslab.settings import pslab_settings, settings_snapshot

__all__ = (
    'ReportEncoder',
    'to_json',
    'config_hash',
    'report_header',
    'write_json',
    'write_csv',
    'render_text',
    'output_path',
)

#===============================================================================

class ReportEncoder(DjangoJSONEncoder):
    """ JSON encoder for numpy values and pslab objects """
    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if hasattr(o, 'as_dict'):
            return o.as_dict()
        if hasattr(o, 'tolist'):
            return o.tolist()
        return super(ReportEncoder, self).default(o)


def to_json(data, indent=2):
    return json.dumps(data, cls=ReportEncoder, sort_keys=True, indent=indent,
                      ensure_ascii=False, allow_nan=True)

def config_hash(config):
    """ sha256 of the canonical JSON form of a config """
    canonical = json.dumps(config, cls=ReportEncoder, sort_keys=True, separators=(',', ':'),
                           ensure_ascii=False)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

def report_header(subcommand, config, seed):
    """ Everything a report is a function of, besides the code """
    return {
        'subcommand': subcommand,
        'version': pslab.__version__,
        'config': config,
        'config_hash': config_hash(config),
        'seed': seed,
        'norm': pslab_settings.NORM,
        'settings': settings_snapshot(),
    }

#===============================================================================

def write_json(data, path):
    with open(path, 'w', encoding='utf-8') as fd:
        fd.write(to_json(data))
        fd.write('\n')
    return path

def write_csv(header, rows, path):
    with open(path, 'w', encoding='utf-8', newline='') as fd:
        writer = csv.writer(fd, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(value) for value in row])
    return path

def _csv_cell(value):
    if isinstance(value, (list, tuple, np.ndarray)):
        return ' '.join(repr(float(item)) for item in np.ravel(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value

def _flatten(data, prefix=''):
    if isinstance(data, dict):
        for key in sorted(data):
            for item in _flatten(data[key], '%s%s.' % (prefix, key)):
                yield item
    elif isinstance(data, (list, tuple)) and len(data) > 8:
        yield prefix[:-1], '[%d items]' % len(data)
    else:
        yield prefix[:-1], data

def render_text(report, skip=('config', 'settings')):
    """ Aligned 'key: value' lines, nested keys joined with dots """
    lines = [(key, value) for key, value in _flatten(report)
             if not set(key.split('.')).intersection(skip)]
    width = max((len(key) for key, _ in lines), default=0)
    return '\n'.join('%s  %s' % (key.ljust(width), json.dumps(value, cls=ReportEncoder))
                     for key, value in lines)

def output_path(directory, name):
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)
