from mpmath import mp
from pslab.fixtures import klein_generators, load_fixture
from pslab.hilbert import Ball, orbit_positions
from pslab.orbit import enumerate_orbit
from pslab.settings import pslab_settings
from pslab.test_utils.data import HILBERT_MAX_LEN, KLEIN_BASEPOINT, ORBIT, SEED
from pslab.utils import make_rng

# Enumerations are costly and read-only, so they are shared across tests
_orbits = {}
_hilbert_orbits = {}

class Fixture(object):
    def create_fixtures(self):
        pass

#===============================================================================

class RandomFixture(Fixture):
    seed = SEED

    def create_fixtures(self):
        super(RandomFixture, self).create_fixtures()
        self.rng = make_rng(self.seed)

#===============================================================================

class OrbitFixture(Fixture):
    """ Loads self.orbits[key] for each key of ORBIT listed in orbit_keys """
    orbit_keys = ()

    def create_fixtures(self):
        super(OrbitFixture, self).create_fixtures()
        self.orbits = {}
        for key in self.orbit_keys:
            assert key in ORBIT, 'Unknown orbit fixture %r' % key
            self.orbits[key] = self.get_orbit(key)

    @staticmethod
    def get_orbit(key):
        if key not in _orbits:
            data = ORBIT[key]
            _orbits[key] = enumerate_orbit(load_fixture(data.fixture, data.policy), data.max_len)
        return _orbits[key]

#===============================================================================

class KleinFixture(Fixture):
    """ F2 acting on the Klein disk, with its orbit of the centre """
    hilbert_max_len = HILBERT_MAX_LEN

    def create_fixtures(self):
        super(KleinFixture, self).create_fixtures()
        self.disk = Ball([0, 0], 1)
        self.basepoint = list(KLEIN_BASEPOINT)
        with mp.workdps(pslab_settings.HILBERT_DPS):
            self.klein = klein_generators()
        key = self.hilbert_max_len
        if key not in _hilbert_orbits:
            _hilbert_orbits[key] = orbit_positions(self.disk, self.klein, self.basepoint, key)
        self.hilbert_orbit = _hilbert_orbits[key]
