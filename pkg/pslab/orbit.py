""" Orbits of finitely generated subgroups of SL(d, R): breadth-first
    enumeration of word balls, orbital counting functions, partial Poincare
    series and critical exponent estimators.
"""
import json
import logging
import warnings
import numpy as np
from django.core.serializers.json import DjangoJSONEncoder
from scipy.optimize import bisect
from scipy.special import logsumexp
from scipy.stats import linregress
from pslab.cartan import cartan_projection_stack, is_unimodular
from pslab.elements import GroupElement
from pslab.exceptions import DiscretenessSuspect, InsufficientRange, NegativeFunctionalWarning
from pslab.settings import pslab_settings
from pslab.utils import parallel_map

__all__ = (
    'FREE_REDUCED',
    'HASH_DEDUP',
    'COUNT_REGRESSION',
    'SERIES_ROOT',
    'GeneratorSet',
    'OrbitBall',
    'ExponentEstimate',
    'enumerate_orbit',
    'orbit_values',
    'counting_function',
    'poincare_partial',
    'sphere_log_sums',
    'completeness_radius',
    'count_regression',
    'series_root',
    'critical_exponent',
    'divergence_indicator',
)

logger = logging.getLogger(__name__)

FREE_REDUCED = 'FreeReduced'
HASH_DEDUP = 'HashDedup'
COUNT_REGRESSION = 'CountRegression'
SERIES_ROOT = 'SeriesRoot'

_POLICIES = (FREE_REDUCED, HASH_DEDUP)
_MAX_WINDOW_SAMPLES = 256
_CHUNK = 65536

#===============================================================================
# Generators

class GeneratorSet(object):
    """ Labelled generators; each label is one lower case letter and its
        upper case twin names the inverse, which is appended automatically.
    """
    def __init__(self, generators, policy=FREE_REDUCED):
        if policy not in _POLICIES:
            raise ValueError('Unknown enumeration policy %r' % policy)
        generators = list(generators.items() if isinstance(generators, dict) else generators)
        if not generators:
            raise ValueError('A generator set needs at least one generator')
        labels = [label for label, _ in generators]
        if len(set(labels)) != len(labels):
            raise ValueError('Generator labels must be unique, got %r' % labels)

        self.policy = policy
        self.generators = {}
        for label, matrix in generators:
            if len(label) != 1 or not label.islower():
                raise ValueError('Generator labels are single lower case letters, got %r' % label)
            element = matrix if isinstance(matrix, GroupElement) else GroupElement(matrix)
            if not is_unimodular(element.matrix):
                raise ValueError('Generator %r has determinant %r, expected 1'
                                 % (label, element.determinant))
            self.generators[label] = GroupElement(element.matrix, element.inverse, label)
        dims = set(element.dim for element in self.generators.values())
        if len(dims) != 1:
            raise ValueError('Generators have mixed dimensions %r' % sorted(dims))
        self.dim = dims.pop()

    @property
    def labels(self):
        return sorted(self.generators)

    @property
    def alphabet(self):
        """ Letters in enumeration order: a, A, b, B, ... """
        return [letter for label in self.labels for letter in (label, label.upper())]

    def letter(self, letter):
        element = self.generators[letter.lower()]
        return element if letter.islower() else element.inv()

    def evaluate(self, word):
        """ The group element named by a word """
        result = GroupElement.identity(self.dim)
        for letter in word:
            result = result * self.letter(letter)
        return result

    def conjugate(self, k):
        """ The generator set k S k^-1 """
        k = k if isinstance(k, GroupElement) else GroupElement(k)
        return GeneratorSet([(label, self.generators[label].conjugate(k)) for label in self.labels],
                            self.policy)

    def with_policy(self, policy):
        return GeneratorSet([(label, self.generators[label]) for label in self.labels], policy)

    def as_dict(self):
        return {
            'policy': self.policy,
            'generators': {label: self.generators[label].matrix.tolist() for label in self.labels},
        }

    def __len__(self):
        return len(self.generators)

    def __repr__(self):
        return '<GeneratorSet d=%d %s %s>' % (self.dim, ''.join(self.labels), self.policy)


#===============================================================================
# Orbit balls

class OrbitBall(object):
    """ The elements of word length at most max_word_length, in shortlex order
        over the alphabet a, A, b, B, ...: each generator comes before its
        inverse, so the order is not the character order of the words.
        Arrays are indexed alike: words, matrices, inverses, cartan, lengths.
    """
    def __init__(self, generators, words, matrices, inverses, cartan, max_word_length,
                 dedup_stats=None):
        self.generators = generators
        self.words = list(words)
        self.matrices = np.asarray(matrices, dtype=float)
        self.inverses = np.asarray(inverses, dtype=float)
        self.cartan = np.asarray(cartan, dtype=float)
        self.lengths = np.array([len(word) for word in self.words], dtype=int)
        self.max_word_length = int(max_word_length)
        self.dedup_stats = dedup_stats or {'candidates': len(self.words), 'collapsed': 0}
        for array in (self.matrices, self.inverses, self.cartan, self.lengths):
            array.setflags(write=False)

    @property
    def dim(self):
        return self.matrices.shape[-1]

    def __len__(self):
        return len(self.words)

    def element(self, index):
        return GroupElement(self.matrices[index], self.inverses[index], self.words[index])

    def __iter__(self):
        return (self.element(index) for index in range(len(self)))

    def index(self, word):
        return self.words.index(word)

    def sphere(self, length):
        """ Indices of the elements of word length exactly length """
        return np.flatnonzero(self.lengths == length)

    def truncate(self, max_word_length):
        """ The sub-ball of word length at most max_word_length """
        if max_word_length > self.max_word_length:
            raise ValueError('Cannot extend a ball of radius %d to %d'
                             % (self.max_word_length, max_word_length))
        keep = self.lengths <= max_word_length
        return OrbitBall(self.generators, [word for word, flag in zip(self.words, keep) if flag],
                         self.matrices[keep], self.inverses[keep], self.cartan[keep],
                         max_word_length, self.dedup_stats)

    def write_jsonl(self, path):
        """ One header line with the generators, then one line per element """
        with open(path, 'w', encoding='utf-8') as stream:
            header = {'max_word_length': self.max_word_length, 'dedup_stats': self.dedup_stats}
            header.update(self.generators.as_dict())
            stream.write(json.dumps(header, cls=DjangoJSONEncoder, sort_keys=True) + '\n')
            for index, word in enumerate(self.words):
                record = {
                    'word': word,
                    'matrix': self.matrices[index].tolist(),
                    'inverse': self.inverses[index].tolist(),
                    'kappa': self.cartan[index].tolist(),
                }
                stream.write(json.dumps(record, sort_keys=True) + '\n')

    @classmethod
    def read_jsonl(cls, path):
        with open(path, encoding='utf-8') as stream:
            header = json.loads(next(stream))
            records = [json.loads(line) for line in stream if line.strip()]
        generators = GeneratorSet(sorted(header['generators'].items()), header['policy'])
        return cls(generators,
                   [record['word'] for record in records],
                   [record['matrix'] for record in records],
                   [record['inverse'] for record in records],
                   [record['kappa'] for record in records],
                   header['max_word_length'], header['dedup_stats'])

    def __repr__(self):
        return '<OrbitBall %d elements radius %d>' % (len(self), self.max_word_length)


def _dedup_key(matrix, decimals):
    return (np.round(matrix, decimals) + 0.0).tobytes()

def _cartan_chunks(matrices, inverses, jobs):
    bounds = list(range(0, len(matrices), _CHUNK)) or [0]
    chunks = parallel_map(lambda start: cartan_projection_stack(matrices[start:start + _CHUNK],
                                                                inverses[start:start + _CHUNK]),
                          bounds, jobs)
    return np.concatenate(chunks, axis=0)

def enumerate_orbit(generators, max_len, jobs=1):
    """ Breadth-first expansion of reduced words up to length max_len.
        Spheres are built parent by parent, appending letters in the order
        a, A, b, B, ..., so the result comes out in shortlex order for that
        ranking of letters. Under HashDedup, words whose matrix was already
        met are dropped and not expanded further.
    """
    if max_len < 1:
        raise ValueError('max_len must be at least 1, got %r' % max_len)
    alphabet = generators.alphabet
    letters = np.stack([generators.letter(letter).matrix for letter in alphabet])
    letter_inverses = np.stack([generators.letter(letter).inverse for letter in alphabet])
    partner = np.array([alphabet.index(letter.swapcase()) for letter in alphabet])
    dim = generators.dim
    decimals = pslab_settings.DEDUP_DECIMALS
    dedup = generators.policy == HASH_DEDUP

    words = ['']
    matrices = [np.eye(dim)[None]]
    inverses = [np.eye(dim)[None]]
    seen = {_dedup_key(np.eye(dim), decimals)} if dedup else None
    candidates = collapsed = 0

    sphere_words = ['']
    sphere_matrices, sphere_inverses = np.eye(dim)[None], np.eye(dim)[None]
    last = np.array([-1])
    for length in range(1, max_len + 1):
        allowed = np.ones((len(sphere_words), len(alphabet)), dtype=bool)
        has_last = last >= 0
        allowed[np.flatnonzero(has_last), partner[last[has_last]]] = False
        parents, children = np.nonzero(allowed)

        new_matrices = sphere_matrices[parents] @ letters[children]
        new_inverses = letter_inverses[children] @ sphere_inverses[parents]
        new_words = [sphere_words[p] + alphabet[c] for p, c in zip(parents.tolist(), children.tolist())]
        candidates += len(new_words)

        if dedup:
            keep = np.zeros(len(new_words), dtype=bool)
            for position, matrix in enumerate(new_matrices):
                key = _dedup_key(matrix, decimals)
                if key not in seen:
                    seen.add(key)
                    keep[position] = True
            collapsed += int((~keep).sum())
            new_matrices, new_inverses = new_matrices[keep], new_inverses[keep]
            new_words = [word for word, flag in zip(new_words, keep) if flag]
            children = children[keep]

        logger.debug('Sphere %d: %d elements', length, len(new_words))
        words.extend(new_words)
        matrices.append(new_matrices)
        inverses.append(new_inverses)
        sphere_words, sphere_matrices, sphere_inverses, last = (new_words, new_matrices,
                                                                new_inverses, children)
        if not sphere_words:
            break

    if dedup and candidates and collapsed > pslab_settings.DISCRETENESS_COLLAPSE * candidates:
        raise DiscretenessSuspect(collapsed, candidates, pslab_settings.DISCRETENESS_COLLAPSE)

    matrices = np.concatenate(matrices, axis=0)
    inverses = np.concatenate(inverses, axis=0)
    cartan = _cartan_chunks(matrices, inverses, jobs)
    logger.info('Enumerated %d elements up to word length %d (%s)',
                len(words), max_len, generators.policy)
    return OrbitBall(generators, words, matrices, inverses, cartan, max_len,
                     {'candidates': candidates, 'collapsed': collapsed})

#===============================================================================
# Counting

def orbit_values(orbit, phi):
    """ phi(kappa(gamma)) over the ball """
    return np.atleast_1d(phi(orbit.cartan))

def _checked_values(orbit, phi):
    values = orbit_values(orbit, phi)
    if values.size and values.min() < -pslab_settings.SUM_TOLERANCE:
        warnings.warn('Functional %r takes the negative value %g on the orbit'
                      % (phi, values.min()), NegativeFunctionalWarning, stacklevel=3)
    return values

def counting_function(orbit, phi, T):
    """ N(T) = #{gamma in the ball : phi(kappa(gamma)) <= T} """
    return int((_checked_values(orbit, phi) <= T).sum())

def poincare_partial(orbit, phi, s):
    """ Sum over the ball of exp(-s phi(kappa(gamma))) """
    if s < 0:
        raise ValueError('Poincare series exponent must be non-negative, got %r' % s)
    return float(np.exp(-s * orbit_values(orbit, phi)).sum())

def sphere_log_sums(orbit, values, s):
    """ log S_n(s), S_n the series restricted to the word sphere of radius n """
    result = np.full(orbit.max_word_length + 1, -np.inf)
    for length in range(orbit.max_word_length + 1):
        indices = orbit.sphere(length)
        if indices.size:
            result[length] = logsumexp(-s * values[indices])
    return result

def completeness_radius(orbit, values):
    """ Smallest value over the outermost sphere; up to it the ball is taken as complete """
    outer = orbit.sphere(orbit.max_word_length)
    if not outer.size:
        return float(values.max())
    return float(values[outer].min())

#===============================================================================
# Exponent estimation

class ExponentEstimate(object):
    """ A critical exponent estimate with the diagnostics it was built from """
    def __init__(self, delta_hat, method, window, diagnostics=None):
        self.delta_hat = max(0.0, float(delta_hat))
        self.method = method
        self.window = tuple(float(bound) for bound in window)
        self.diagnostics = diagnostics or {}

    @property
    def stderr(self):
        return self.diagnostics.get('stderr', 0.0)

    def as_dict(self):
        return {
            'delta_hat': self.delta_hat,
            'method': self.method,
            'window': list(self.window),
            'diagnostics': self.diagnostics,
        }

    def __repr__(self):
        return '<ExponentEstimate %s %.4f>' % (self.method, self.delta_hat)


def count_regression(values, t_max, window=None):
    """ Least-squares slope of log N(T) against T over window * t_max.
        values is any orbit metric; T runs over its distinct values in the
        window, subsampled evenly when there are many.
    """
    low, high = window or pslab_settings.REGRESSION_WINDOW
    bounds = (low * t_max, high * t_max)
    ordered = np.sort(np.asarray(values, dtype=float))
    grid = np.unique(ordered[(ordered >= bounds[0]) & (ordered <= bounds[1])])
    required = pslab_settings.MIN_WINDOW_POINTS
    if grid.size < required:
        raise InsufficientRange(int(grid.size), required, bounds)
    if grid.size > _MAX_WINDOW_SAMPLES:
        grid = grid[np.linspace(0, grid.size - 1, _MAX_WINDOW_SAMPLES).round().astype(int)]
    counts = np.searchsorted(ordered, grid, side='right')
    fit = linregress(grid, np.log(counts))
    logger.debug('Count regression on [%g, %g]: %d points, slope %g', bounds[0], bounds[1],
                 grid.size, fit.slope)
    return ExponentEstimate(fit.slope, COUNT_REGRESSION, bounds, {
        'slope': float(fit.slope),
        'stderr': float(fit.stderr),
        'intercept': float(fit.intercept),
        'rvalue': float(fit.rvalue),
        'points': int(grid.size),
        't_max': float(t_max),
    })

def series_root(orbit, values):
    """ The s at which S_n(s) / S_{n-2}(s) crosses 1, n the ball radius """
    radius = orbit.max_word_length
    if radius < 3:
        raise InsufficientRange(radius, 3, (0, radius))

    def log_ratio(s):
        sums = sphere_log_sums(orbit, values, s)
        return float(sums[radius] - sums[radius - 2])

    window = (0.0, 0.0)
    start = log_ratio(0.0)
    if not np.isfinite(start):
        raise InsufficientRange(int(np.isfinite(sphere_log_sums(orbit, values, 0.0)).sum()),
                                radius + 1, (0, radius))
    if start <= 0:
        return ExponentEstimate(0.0, SERIES_ROOT, window, {'log_ratio_at_zero': start})
    upper = 1.0
    while log_ratio(upper) > 0:
        upper *= 2.0
        if upper > 1e6:
            raise InsufficientRange(0, 1, (0, upper))
    root = bisect(log_ratio, 0.0, upper, xtol=1e-10)
    return ExponentEstimate(root, SERIES_ROOT, (0.0, upper), {
        'log_ratio_at_zero': start,
        'bracket': [0.0, upper],
    })

def critical_exponent(orbit, phi, method=COUNT_REGRESSION, t_max=None):
    """ Estimate delta^phi from the ball by CountRegression or SeriesRoot.
        The other method is attempted too and their gap reported.
    """
    values = _checked_values(orbit, phi)
    if values.size == 0 or values.max() <= pslab_settings.SUM_TOLERANCE:
        return ExponentEstimate(0.0, method, (0.0, 0.0), {'bounded': True})

    def run(which):
        if which == COUNT_REGRESSION:
            radius = t_max if t_max is not None else completeness_radius(orbit, values)
            return count_regression(values, radius)
        if which == SERIES_ROOT:
            return series_root(orbit, values)
        raise ValueError('Unknown estimation method %r' % which)

    estimate = run(method)
    other = SERIES_ROOT if method == COUNT_REGRESSION else COUNT_REGRESSION
    try:
        estimate.diagnostics['cross_method_gap'] = abs(estimate.delta_hat - run(other).delta_hat)
    except InsufficientRange:
        estimate.diagnostics['cross_method_gap'] = None
    return estimate

def divergence_indicator(orbit, phi, s):
    """ Heuristic divergence check at s: slope of log S_n(s) over the outer
        half of the ball. A finite ball cannot decide divergence; a slope near
        zero or above suggests the series diverges at s.
    """
    sums = sphere_log_sums(orbit, orbit_values(orbit, phi), s)
    lengths = np.arange(sums.size)
    tail = (lengths >= max(1, sums.size // 2)) & np.isfinite(sums)
    if tail.sum() < 2:
        return {'slope': None, 'heuristic': True}
    slope = float(np.polyfit(lengths[tail], sums[tail], 1)[0])
    return {'slope': slope, 'heuristic': True, 'suggests_divergence': slope > -0.05}
