from collections import namedtuple
import math

#===============================================================================

SEED = 20240611

#===============================================================================

OrbitData = namedtuple('OrbitData', 'fixture max_len policy')

ORBIT = {
    'cyclic': OrbitData(fixture='F1', max_len=24, policy=None),
    'cyclic_dedup': OrbitData(fixture='F1', max_len=24, policy='HashDedup'),
    'cyclic_scale2': OrbitData(fixture='F1-scale2', max_len=20, policy=None),
    'fuchsian': OrbitData(fixture='F2', max_len=6, policy=None),
    'fuchsian_long': OrbitData(fixture='F2', max_len=8, policy=None),
    'fuchsian_sl2': OrbitData(fixture='F2-SL2', max_len=6, policy=None),
    'dense': OrbitData(fixture='F3', max_len=6, policy=None),
}

#===============================================================================

ComparisonData = namedtuple('ComparisonData', 'dim p point lhs rhs slack middle_equal')

COMPARISON = (
    ComparisonData(dim=5, p=2, point=(2, 1, 0, -1, -2), lhs=4.0, rhs=3.0, slack=1.0,
                   middle_equal=False),
    ComparisonData(dim=5, p=2, point=(4, 0, 0, 0, -4), lhs=8.0, rhs=8.0, slack=0.0,
                   middle_equal=True),
    ComparisonData(dim=3, p=1, point=(3, 0, -3), lhs=3.0, rhs=3.0, slack=0.0,
                   middle_equal=True),
    ComparisonData(dim=6, p=2, point=(3, 2, 1, -1, -2, -3), lhs=6.0, rhs=3.0, slack=3.0,
                   middle_equal=False),
)

#===============================================================================

CartanData = namedtuple('CartanData', 'matrix kappa')

# log of the top singular value of the shear [[1, 3], [0, 1]]
_SHEAR = math.log((3 + math.sqrt(13)) / 2)

CARTAN = (
    CartanData(matrix=((2, 0), (0, 0.5)), kappa=(0.6931471805599453, -0.6931471805599453)),
    CartanData(matrix=((0, 0, 1), (0, 1, 0), (1, 0, 0)), kappa=(0, 0, 0)),
    CartanData(matrix=((1, 3), (0, 1)), kappa=(_SHEAR, -_SHEAR)),
)

#===============================================================================

# Klein disk model of the hyperbolic plane
DISK_RADIAL = (0.0, 0.3, 0.5, 0.9, 0.999)
KLEIN_BASEPOINT = (0.0, 0.0)
HILBERT_MAX_LEN = 3
