""" Named generator sets used by the experiments and the test suite.

    F1          cyclic diagonal group <diag(e, 1, 1/e)> in SL(3, R)
    F1-scale2   cyclic diagonal group <diag(e^2, 1, e^-2)>
    F2-SL2      Fuchsian Schottky group in SL(2, R), translation lengths 3
                and 3.5 along perpendicular axes
    F2          its image in SO(2, 1) < SL(3, R) under the adjoint representation
    F3          Zariski dense ping-pong pair in SL(3, R)
"""
import logging
import numpy as np
from mpmath import mp
from scipy.spatial.transform import Rotation
from pslab.cartan import jordan_projection
from pslab.orbit import FREE_REDUCED, GeneratorSet

__all__ = (
    'FIXTURES',
    'load_fixture',
    'adjoint_representation',
    'klein_generators',
)

logger = logging.getLogger(__name__)

# translation lengths of the F2 generators are twice these
_F2_HALF_LENGTHS = (1.5, 1.75)
_F3_ROTATIONS = (('zxz', (0.7, 1.1, 2.3)), ('zxz', (2.9, 0.6, 0.4)))
_F3_SPECTRA = ((5.0, 1.0, -6.0), (4.5, -0.5, -4.0))
_F3_MIN_GAP = 1.0

#===============================================================================
# Adjoint representation, written for any number type

def _mul(x, y):
    return [[x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
            [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]]]

def _adjoint_rows(g):
    """ Matrix of X -> g X g^-1 on sl(2) in the basis diag(1,-1), [[0,1],[1,0]],
        [[0,1],[-1,0]], in which the Killing form is diag(1, 1, -1).
    """
    inverse = [[g[1][1], -g[0][1]], [-g[1][0], g[0][0]]]
    basis = ([[1, 0], [0, -1]], [[0, 1], [1, 0]], [[0, 1], [-1, 0]])
    columns = []
    for element in basis:
        image = _mul(_mul(g, element), inverse)
        columns.append((image[0][0], (image[0][1] + image[1][0]) / 2,
                        (image[0][1] - image[1][0]) / 2))
    return [[columns[col][row] for col in range(3)] for row in range(3)]

def adjoint_representation(g):
    """ Ad(g) in SO(2, 1) for g in SL(2, R) """
    g = np.asarray(getattr(g, 'matrix', g), dtype=float)
    return np.array(_adjoint_rows(g.tolist()), dtype=float)

#===============================================================================
# Fixtures

def _sl2_generators(exp, rotation):
    """ a = diag(e^s, e^-s), b = r diag(e^t, e^-t) r^-1 with r a quarter turn of H^2 """
    s, t = _F2_HALF_LENGTHS
    a = [[exp(s), 0], [0, exp(-s)]]
    c, sn = rotation
    r, r_inv = [[c, -sn], [sn, c]], [[c, sn], [-sn, c]]
    b = _mul(_mul(r, [[exp(t), 0], [0, exp(-t)]]), r_inv)
    return a, b

def _f1(scale):
    def build():
        entries = np.array([scale, 0.0, -scale])
        return GeneratorSet([('a', np.diag(np.exp(entries)))], FREE_REDUCED)
    return build

def _f2_sl2():
    a, b = _sl2_generators(np.exp, (np.cos(np.pi / 4), np.sin(np.pi / 4)))
    return GeneratorSet([('a', np.array(a, dtype=float)), ('b', np.array(b, dtype=float))])

def _f2():
    sl2 = _f2_sl2()
    return GeneratorSet([(label, adjoint_representation(sl2.generators[label]))
                         for label in sl2.labels])

def _f3():
    generators = []
    for label, (axes, angles), spectrum in zip('ab', _F3_ROTATIONS, _F3_SPECTRA):
        k = Rotation.from_euler(axes, angles).as_matrix()
        generators.append((label, k @ np.diag(np.exp(spectrum)) @ k.T))
    fixture = GeneratorSet(generators)
    for label in fixture.labels:
        gaps = -np.diff(np.asarray(jordan_projection(fixture.generators[label])))
        if gaps.min() < _F3_MIN_GAP:
            raise ValueError('Fixture F3 generator %r lost its spectral gaps: %r'
                             % (label, gaps.tolist()))
    return fixture

FIXTURES = {
    'F1': _f1(1.0),
    'F1-scale2': _f1(2.0),
    'F2-SL2': _f2_sl2,
    'F2': _f2,
    'F3': _f3,
}

def load_fixture(name, policy=None):
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise ValueError('Unknown fixture %r, choose among %s' % (name, ', '.join(sorted(FIXTURES))))
    generators = builder()
    logger.debug('Loaded fixture %s: %r', name, generators)
    return generators if policy is None else generators.with_policy(policy)

def klein_generators():
    """ F2 acting on the Klein disk, as mpmath matrices at the working precision.
        Built from the closed forms so that the group preserves the disk to
        the full working precision.
    """
    a, b = _sl2_generators(mp.exp, (mp.cos(mp.pi / 4), mp.sin(mp.pi / 4)))
    return {'a': mp.matrix(_adjoint_rows(a)), 'b': mp.matrix(_adjoint_rows(b))}
