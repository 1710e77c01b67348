""" Hilbert geometry of properly convex domains in an affine chart of
    projective space: chords, the cross-ratio metric, orbit growth, and the
    measures nu_p and lambda_n averaging orbit points seen from a basepoint.

    Orbit points of a convex cocompact group approach the boundary like
    exp(-2t) at Hilbert distance t, so everything that touches them runs in
    mpmath at PSLAB['HILBERT_DPS'] digits; results leave the module as floats.
"""
import itertools
import logging
import numpy as np
from mpmath import mp
from scipy.spatial import ConvexHull, QhullError
from scipy.special import logsumexp
from pslab.exceptions import CoincidentPoints, DomainNotPreserved, RayExitFailure
from pslab.orbit import count_regression
from pslab.settings import pslab_settings

__all__ = (
    'Ball',
    'Polytope',
    'DomainPoint',
    'GammaMeasure',
    'HilbertOrbit',
    'chord',
    'hilbert_distance',
    'hyperbolic_distance',
    'projective_apply',
    'orbit_positions',
    'check_preserved',
    'hilbert_critical_exponent',
    'kaimanovich_nu',
    'ray_point',
    'lambda_n',
    'synchronization_offset',
)

logger = logging.getLogger(__name__)

#===============================================================================
# Vector helpers on lists of mpf

def _vec(coords):
    return [mp.mpf(value) for value in coords]

def _sub(x, y):
    return [a - b for a, b in zip(x, y)]

def _add(x, y):
    return [a + b for a, b in zip(x, y)]

def _scale(c, x):
    return [c * a for a in x]

def _dot(x, y):
    return mp.fsum(a * b for a, b in zip(x, y))

def _norm(x):
    return mp.sqrt(_dot(x, x))

def _matvec(matrix, vector):
    return [mp.fsum(row[k] * vector[k] for k in range(len(vector))) for row in matrix]

def _rows(matrix):
    """ Nested lists of mpf from an mpmath or numpy matrix """
    if isinstance(matrix, mp.matrix):
        return [[matrix[i, j] for j in range(matrix.cols)] for i in range(matrix.rows)]
    return [_vec(row) for row in np.asarray(matrix, dtype=float).tolist()]

def projective_apply(matrix, coords):
    """ Image of a chart point under a projective transformation, or None if
        it leaves the chart.
    """
    image = _matvec(_rows(matrix) if not isinstance(matrix, list) else matrix,
                    _vec(coords) + [mp.mpf(1)])
    if image[-1] <= 0:
        return None
    return [value / image[-1] for value in image[:-1]]

#===============================================================================
# Domains

class ConvexDomain(object):
    """ A bounded convex open subset of the affine chart R^m """
    kind = None

    @property
    def dim(self):
        raise NotImplementedError()

    def exit_parameter(self, origin, direction):
        """ Smallest t > 0 with origin + t direction on the boundary """
        raise NotImplementedError()

    def contains(self, coords, margin=None):
        raise NotImplementedError()

    def samples(self):
        """ Interior points used to test that a transformation preserves the domain """
        raise NotImplementedError()

    def point(self, coords):
        return DomainPoint(self, coords)


class Ball(ConvexDomain):
    kind = 'Ball'

    def __init__(self, center, radius):
        with mp.workdps(pslab_settings.HILBERT_DPS):
            self.center = _vec(center)
            self.radius = mp.mpf(radius)
        if not self.radius > 0:
            raise ValueError('Ball radius must be positive, got %r' % radius)

    @property
    def dim(self):
        return len(self.center)

    def exit_parameter(self, origin, direction):
        offset = _sub(origin, self.center)
        a, b = _dot(direction, direction), _dot(direction, offset)
        c = _dot(offset, offset) - self.radius ** 2
        return (-b + mp.sqrt(b * b - a * c)) / a

    def contains(self, coords, margin=None):
        margin = pslab_settings.DOMAIN_MARGIN if margin is None else margin
        return _norm(_sub(_vec(coords), self.center)) < self.radius - margin

    def samples(self):
        points = [list(self.center)]
        for axis, sign in itertools.product(range(self.dim), (-1, 1)):
            point = list(self.center)
            point[axis] += sign * self.radius * mp.mpf('0.9')
            points.append(point)
        return points

    def as_dict(self):
        return {'kind': self.kind, 'center': [float(value) for value in self.center],
                'radius': float(self.radius)}


class Polytope(ConvexDomain):
    kind = 'Polytope'

    def __init__(self, vertices):
        vertices = np.asarray(vertices, dtype=float)
        try:
            hull = ConvexHull(vertices)
        except (QhullError, ValueError) as exc:
            raise ValueError('Polytope vertices must affinely span the chart: %s' % exc)
        self.vertices = vertices[hull.vertices]
        with mp.workdps(pslab_settings.HILBERT_DPS):
            # inside: normal . x + offset < 0
            self.facets = [(_vec(equation[:-1]), mp.mpf(equation[-1])) for equation in hull.equations]

    @property
    def dim(self):
        return self.vertices.shape[1]

    def exit_parameter(self, origin, direction):
        best = None
        for normal, offset in self.facets:
            speed = _dot(normal, direction)
            if speed > 0:
                t = -(_dot(normal, origin) + offset) / speed
                if best is None or t < best:
                    best = t
        return best

    def contains(self, coords, margin=None):
        margin = pslab_settings.DOMAIN_MARGIN if margin is None else margin
        coords = _vec(coords)
        return all(_dot(normal, coords) + offset < -margin for normal, offset in self.facets)

    def samples(self):
        centroid = self.vertices.mean(axis=0)
        return [_vec(centroid)] + [_vec(centroid + 0.9 * (vertex - centroid))
                                   for vertex in self.vertices]

    def image(self, matrix):
        """ The polytope g Omega, for g keeping it inside the chart """
        images = [projective_apply(matrix, vertex) for vertex in self.vertices]
        if any(image is None for image in images):
            raise ValueError('Transformation moves the polytope out of the affine chart')
        return Polytope([[float(value) for value in image] for image in images])

    def as_dict(self):
        return {'kind': self.kind, 'vertices': self.vertices.tolist()}


class DomainPoint(object):
    """ A point strictly inside a domain """
    __slots__ = ('domain', 'coords')

    def __init__(self, domain, coords):
        with mp.workdps(pslab_settings.HILBERT_DPS):
            coords = _vec(coords)
            if len(coords) != domain.dim:
                raise ValueError('Point of dimension %d in a domain of dimension %d'
                                 % (len(coords), domain.dim))
            if not domain.contains(coords):
                raise ValueError('Point %r is not strictly inside the domain'
                                 % [float(value) for value in coords])
        self.domain = domain
        self.coords = coords

    def tolist(self):
        return [float(value) for value in self.coords]

    def __repr__(self):
        return '<DomainPoint %r>' % self.tolist()


def _coords(point):
    return point.coords if isinstance(point, DomainPoint) else _vec(point)

#===============================================================================
# Metric

def _chord(domain, p, q):
    direction = _sub(q, p)
    if all(value == 0 for value in direction):
        raise CoincidentPoints([float(value) for value in p])
    forward = domain.exit_parameter(p, direction)
    backward = domain.exit_parameter(p, _scale(-1, direction))
    return _sub(p, _scale(backward, direction)), _add(p, _scale(forward, direction))

def chord(domain, p, q):
    """ Boundary points (a, b) with p, q on the open segment (a, b), in the
        order a, p, q, b.
    """
    with mp.workdps(pslab_settings.HILBERT_DPS):
        a, b = _chord(domain, _coords(p), _coords(q))
        return [float(value) for value in a], [float(value) for value in b]

def _distance(domain, p, q):
    if all(x == y for x, y in zip(p, q)):
        return mp.mpf(0)
    a, b = _chord(domain, p, q)
    return mp.log((_norm(_sub(a, q)) * _norm(_sub(b, p))) /
                  (_norm(_sub(a, p)) * _norm(_sub(b, q)))) / 2

def hilbert_distance(domain, p, q):
    """ Half the log of the cross ratio of a, p, q, b """
    with mp.workdps(pslab_settings.HILBERT_DPS):
        return float(_distance(domain, _coords(p), _coords(q)))

def _ball_distance(ball, p, q):
    p = _scale(1 / ball.radius, _sub(p, ball.center))
    q = _scale(1 / ball.radius, _sub(q, ball.center))
    value = (1 - _dot(p, q)) / mp.sqrt((1 - _dot(p, p)) * (1 - _dot(q, q)))
    return mp.acosh(max(value, mp.mpf(1)))

def hyperbolic_distance(p, q, ball=None):
    """ Closed form of the Hilbert metric of a ball, the Klein model of H^m """
    with mp.workdps(pslab_settings.HILBERT_DPS):
        p, q = _coords(p), _coords(q)
        ball = ball or Ball([0] * len(p), 1)
        return float(_ball_distance(ball, p, q))

def _fast_distance(domain):
    if isinstance(domain, Ball):
        return lambda p, q: _ball_distance(domain, p, q)
    return lambda p, q: _distance(domain, p, q)

#===============================================================================
# Orbits

class HilbertOrbit(object):
    """ Orbit points gamma o in shortlex order of gamma's reduced word """
    def __init__(self, domain, basepoint, words, positions, max_word_length):
        self.domain = domain
        self.basepoint = basepoint
        self.words = list(words)
        self.positions = list(positions)
        self.lengths = np.array([len(word) for word in self.words], dtype=int)
        self.max_word_length = max_word_length

    def __len__(self):
        return len(self.words)

    def distances_from(self, point):
        with mp.workdps(pslab_settings.HILBERT_DPS):
            distance = _fast_distance(self.domain)
            point = _coords(point)
            return np.array([float(distance(point, position)) for position in self.positions])


def _letters(generators):
    """ mp rows of every generator and inverse, keyed by letter """
    letters = {}
    for label, matrix in sorted(generators.items()):
        matrix = matrix if isinstance(matrix, mp.matrix) else mp.matrix(_rows(matrix))
        letters[label] = _rows(matrix)
        letters[label.upper()] = _rows(mp.inverse(matrix))
    return letters

def check_preserved(domain, generators):
    """ Raise DomainNotPreserved unless every generator and inverse maps the
        sample points of the domain inside it.
    """
    with mp.workdps(pslab_settings.HILBERT_DPS):
        for letter, rows in sorted(_letters(generators).items()):
            for point in domain.samples():
                image = projective_apply(rows, point)
                if image is None or not domain.contains(image, margin=0):
                    raise DomainNotPreserved(letter, [float(value) for value in point])

def orbit_positions(domain, generators, basepoint, max_len):
    """ gamma o for all reduced words of length at most max_len.
        Each position is computed from the word without its first letter.
    """
    with mp.workdps(pslab_settings.HILBERT_DPS):
        letters = _letters(generators)
        alphabet = [letter for label in sorted(generators) for letter in (label, label.upper())]
        rank = dict((letter, index) for index, letter in enumerate(alphabet))
        positions = {'': _coords(basepoint) + [mp.mpf(1)]}
        sphere = ['']
        words = ['']
        for length in range(1, max_len + 1):
            sphere = sorted((letter + suffix for suffix in sphere for letter in alphabet
                             if not suffix or suffix[0] != letter.swapcase()),
                            key=lambda word: [rank[letter] for letter in word])
            for word in sphere:
                image = _matvec(letters[word[0]], positions[word[1:]])
                positions[word] = [value / image[-1] for value in image]
            words.extend(sphere)
        points = [positions[word][:-1] for word in words]
    return HilbertOrbit(domain, basepoint, words, points, max_len)

def hilbert_critical_exponent(domain, generators, basepoint, max_len, t_max=None):
    """ Growth rate of #{gamma : dist(o, gamma o) <= R} by count regression """
    check_preserved(domain, generators)
    orbit = orbit_positions(domain, generators, basepoint, max_len)
    distances = orbit.distances_from(basepoint)
    if t_max is None:
        t_max = float(distances[orbit.lengths == max_len].min())
    estimate = count_regression(distances, t_max)
    estimate.diagnostics['orbit_size'] = len(orbit)
    return estimate

#===============================================================================
# Measures on the group

class GammaMeasure(object):
    """ A probability measure on finitely many group elements, by word """
    def __init__(self, labels, weights):
        weights = np.asarray(weights, dtype=float)
        if len(labels) != weights.size:
            raise ValueError('%d labels for %d weights' % (len(labels), weights.size))
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError('Group measure weights must be non-negative and sum to 1')
        self.labels = list(labels)
        self.weights = weights

    def __len__(self):
        return len(self.labels)

    def total_variation(self, other):
        """ Sum over group elements of the absolute difference of masses """
        if self.labels == other.labels:
            return float(np.abs(self.weights - other.weights).sum())
        masses = dict(zip(self.labels, self.weights))
        for label, weight in zip(other.labels, other.weights):
            masses[label] = masses.get(label, 0.0) - weight
        return float(sum(abs(value) for value in masses.values()))

    def rows(self):
        return [[label, float(weight)] for label, weight in zip(self.labels, self.weights)]


def _normalized(log_weights):
    weights = np.exp(log_weights - logsumexp(log_weights))
    return weights / weights.sum()

def kaimanovich_nu(orbit, delta, p):
    """ nu_p proportional to exp(-delta dist(p, gamma o)) """
    return GammaMeasure(orbit.words, _normalized(-delta * orbit.distances_from(p)))

def _ray_point(domain, p, x, t):
    direction = _sub(x, p)
    forward = domain.exit_parameter(p, direction)
    backward = domain.exit_parameter(p, _scale(-1, direction))
    near, far = backward * _norm(direction), forward * _norm(direction)
    growth = mp.exp(2 * mp.mpf(t))
    fraction = near * (growth - 1) / (near * growth + far)
    point = _add(p, _scale(fraction * forward, direction))
    if not fraction * forward < forward or not domain.contains(point, margin=0):
        raise RayExitFailure(float(t))
    return point

def ray_point(domain, p, x, t):
    """ The point at Hilbert distance t from p on the ray toward x """
    with mp.workdps(pslab_settings.HILBERT_DPS):
        return [float(value) for value in _ray_point(domain, _coords(p), _vec(x), t)]

def lambda_n(orbit, delta, p, x, n, step=None):
    """ (1/n) times the integral over [0, n] of nu at the ray point r_t from p
        toward x, by the trapezoid rule.
    """
    step = step or pslab_settings.LAMBDA_STEP
    nodes = int(round(n / step))
    if nodes < 1:
        return kaimanovich_nu(orbit, delta, p)
    times = np.linspace(0.0, n, nodes + 1)
    quadrature = np.full(times.size, 1.0)
    quadrature[[0, -1]] = 0.5
    quadrature /= quadrature.sum()
    total = np.zeros(len(orbit))
    with mp.workdps(pslab_settings.HILBERT_DPS):
        origin, target = _coords(p), _vec(x)
        for time, weight in zip(times, quadrature):
            point = _ray_point(orbit.domain, origin, target, time)
            total += weight * kaimanovich_nu(orbit, delta, point).weights
    return GammaMeasure(orbit.words, total / total.sum())

def synchronization_offset(domain, p, q, x, time=30.0):
    """ Estimate of T_{p,q} = lim dist(q, r_t) - t along the ray r from p to x.
        Reported with its change since time / 2 as a convergence indicator.
    """
    with mp.workdps(pslab_settings.HILBERT_DPS):
        origin, other, target = _coords(p), _coords(q), _vec(x)
        values = []
        for t in (time / 2.0, time):
            values.append(float(_distance(domain, other, _ray_point(domain, origin, target, t)) - t))
    return {'offset': values[1], 'change': abs(values[1] - values[0]), 'time': time}
