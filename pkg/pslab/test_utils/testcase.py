from django.test import SimpleTestCase
import numpy as np
from pslab.flags import flag_distance
from pslab.test_utils.context_managers import AssertThrowsWarningContext

__all__ = ('PslabTestCase',)

#===============================================================================

class PslabTestCase(SimpleTestCase):
    def setUp(self):
        if hasattr(self, 'create_fixtures'):
            self.create_fixtures()

    def assertThrowsWarning(self, klass, number=1):
        return AssertThrowsWarningContext(self, klass, number)

    def assertVectorAlmostEqual(self, first, second, tolerance=1e-9, msg=None):
        'Sup-norm comparison of vectors, Cartan vectors included'
        first, second = np.asarray(first, dtype=float), np.asarray(second, dtype=float)
        self.assertEqual(first.shape, second.shape, msg)
        error = float(np.abs(first - second).max()) if first.size else 0.0
        self.assertLessEqual(error, tolerance, msg or '%r != %r (error %g)'
                             % (first.tolist(), second.tolist(), error))

    def assertFlagAlmostEqual(self, first, second, tolerance=1e-8, msg=None):
        distance = flag_distance(first, second)
        self.assertLessEqual(distance, tolerance, msg or 'flags are %g apart' % distance)
