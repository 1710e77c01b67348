import csv
import json
import os.path
import tempfile
import warnings

#===============================================================================

class ReportDirectory(tempfile.TemporaryDirectory):
    """ Scratch output directory with readers for the files experiments write """
    def __enter__(self):
        super(ReportDirectory, self).__enter__()
        return self

    def path(self, name):
        return os.path.join(self.name, name)

    def exists(self, name):
        return os.path.exists(self.path(name))

    def read_json(self, name):
        with open(self.path(name), encoding='utf-8') as fd:
            return json.load(fd)

    def read_bytes(self, name):
        with open(self.path(name), 'rb') as fd:
            return fd.read()

    def read_csv(self, name):
        with open(self.path(name), encoding='utf-8', newline='') as fd:
            return list(csv.reader(fd))

#===============================================================================

class AssertThrowsWarningContext(object):
    """ Asserts a block emits exactly number warnings, all of class klass """
    def __init__(self, test_case, klass, number):
        self.test_case = test_case
        self.klass = klass
        self.number = number
        self.ctx = warnings.catch_warnings(record=True)

    def __enter__(self):
        self.caught = self.ctx.__enter__()
        warnings.simplefilter('always')
        return self.caught

    def __exit__(self, type, value, traceback):
        self.ctx.__exit__(type, value, traceback)
        if type is not None:
            return False
        categories = [warning.category.__name__ for warning in self.caught]
        self.test_case.assertEqual(len(self.caught), self.number,
                                   '%d warnings thrown (%s), %d expected'
                                   % (len(self.caught), ', '.join(categories), self.number))
        for warning in self.caught:
            self.test_case.assertTrue(issubclass(warning.category, self.klass),
                                      '%s warning thrown, %s expected'
                                      % (warning.category.__name__, self.klass.__name__))
