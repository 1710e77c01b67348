""" Shadows in flag manifolds, atomic Patterson measures built from orbit
    balls, and the experiments checking them: the Shadow Lemma band, the
    conformality of the measures, and conical tracking of geodesic words.
"""
from collections import namedtuple
import logging
import warnings
import numpy as np
from pslab.cartan import Functional, decompose_stack
from pslab.elements import GroupElement, as_element, reduce_word
from pslab.exceptions import (AllDegenerate, DegenerateGap, InsufficientMatchedMass,
                              SubcriticalExponentWarning)
from pslab.flags import (PartialFlag, cocycle_weights, decomposed_cocycle_weights,
                         flag_distance, partial_iwasawa, translate, u_theta_stack)
from pslab.orbit import orbit_values
from pslab.settings import pslab_settings

__all__ = (
    'ShadowSpec',
    'AtomicMeasure',
    'TrackingTrace',
    'shadow_contains',
    'shadow_mask',
    'translate_radius',
    'patterson_construct',
    'patterson_family',
    'shadow_lemma_report',
    'conformality_residual',
    'conical_tracking',
    'empirical_lift',
    'lift_equivariance',
)

logger = logging.getLogger(__name__)

_CHUNK = 4096

#===============================================================================
# Shadows

class ShadowSpec(object):
    """ The shadow O_R^theta(g) """
    __slots__ = ('g', 'R', 'theta')

    def __init__(self, g, R, theta):
        if not R > 0:
            raise ValueError('Shadow radius must be positive, got %r' % R)
        self.g = as_element(g)
        self.R = float(R)
        self.theta = theta

    def thresholds(self):
        """ omega_j(kappa(g)) - R for j in theta """
        cumulative = np.cumsum(np.asarray(self.g.cartan))
        return np.array([cumulative[j - 1] for j in self.theta]) - self.R

    def __repr__(self):
        return '<ShadowSpec %r R=%g theta=%s>' % (self.g, self.R, list(self.theta))


def _weights_in_theta(weights, theta):
    return weights[..., [j - 1 for j in theta]]

def shadow_mask(spec, frames):
    """ Membership of a stack of flag frames in the shadow.
        xi is inside when omega_j(B(g, g^-1 xi)) = -omega_j(B(g^-1, xi))
        exceeds omega_j(kappa(g)) - R for all j in theta; equality is outside.
    """
    frames = np.asarray(frames, dtype=float)
    weights = -cocycle_weights(spec.g.inv(), frames)
    return np.all(_weights_in_theta(weights, spec.theta) > spec.thresholds(), axis=-1)

def shadow_contains(spec, xi):
    if not set(spec.theta).issubset(xi.theta):
        raise ValueError('Shadow on %s tested against a flag on %s' % (spec.theta, xi.theta))
    return bool(shadow_mask(spec, xi.frame[None])[0])

def translate_radius(g, R):
    """ R' with g O_R(h) inside O_R'(g h) for every h """
    cumulative = np.cumsum(np.asarray(as_element(g).cartan))[:-1]
    return float(R + 2.0 * np.abs(cumulative).max())

#===============================================================================
# Atomic measures

# Orbit elements behind the atoms, used to test shadow membership without
# going through flags too close to each other to be told apart numerically.
Anchors = namedtuple('Anchors', ('matrices', 'inverses', 'cartan', 'right_frames', 'words'))


class AtomicMeasure(object):
    """ A probability measure on F_theta with finitely many atoms """
    def __init__(self, theta, frames, weights, provenance=None, anchors=None):
        frames = np.asarray(frames, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if frames.shape[0] != weights.shape[0]:
            raise ValueError('%d frames for %d weights' % (frames.shape[0], weights.shape[0]))
        if weights.size == 0 or np.any(weights <= 0):
            raise ValueError('Atomic measures need positive weights')
        if abs(weights.sum() - 1.0) > pslab_settings.SUM_TOLERANCE:
            raise ValueError('Atomic measure weights sum to %r, expected 1' % weights.sum())
        frames.setflags(write=False)
        weights.setflags(write=False)
        self.theta = theta
        self.frames = frames
        self.weights = weights
        self.provenance = provenance or {}
        self.anchors = anchors

    @classmethod
    def from_flags(cls, flags, weights, provenance=None):
        """ Normalized measure on the given flags """
        weights = np.asarray(weights, dtype=float)
        return cls(flags[0].theta, np.stack([flag.frame for flag in flags]),
                   weights / weights.sum(), provenance)

    def __len__(self):
        return self.weights.size

    @property
    def atoms(self):
        return [(PartialFlag(self.theta, frame, check=False), float(weight))
                for frame, weight in zip(self.frames, self.weights)]

    def mass(self, mask):
        return float(self.weights[np.asarray(mask, dtype=bool)].sum())

    def pulled_weights(self, g):
        """ -omega_j(B(g^-1, x)) for every atom x and j = 1 .. d-1.
            Anchored atoms go through their orbit elements.
        """
        g = as_element(g)
        if self.anchors is None:
            return -cocycle_weights(g.inv(), self.frames)
        anchors = self.anchors
        result = np.empty((len(self), self.theta.dim - 1))
        # U(gamma) = k P with k = gamma v exp(-H): B(g^-1, U(gamma)) = B(g^-1 gamma, v P) - H
        for start in range(0, len(self), _CHUNK):
            stop = start + _CHUNK
            products = g.inverse @ anchors.matrices[start:stop]
            product_inverses = anchors.inverses[start:stop] @ g.matrix
            _, logs, v = decompose_stack(products, product_inverses)
            weights = decomposed_cocycle_weights(logs, v, anchors.right_frames[start:stop])
            result[start:stop] = np.cumsum(anchors.cartan[start:stop], axis=-1)[..., :-1] - weights
        return result

    def shadow_mask(self, spec):
        """ Atoms inside the shadow """
        weights = _weights_in_theta(self.pulled_weights(spec.g), spec.theta)
        return np.all(weights > spec.thresholds(), axis=-1)

    def translated_mask(self, gamma, spec):
        """ Atoms inside gamma O_R(h) for spec = O_R(h), that is atoms x with
            gamma^-1 x in the shadow. By the cocycle law
            -B(h^-1, gamma^-1 x) = -B((gamma h)^-1, x) + B(gamma^-1, x).
        """
        gamma = as_element(gamma)
        weights = self.pulled_weights(gamma * spec.g) - self.pulled_weights(gamma)
        return np.all(_weights_in_theta(weights, spec.theta) > spec.thresholds(), axis=-1)

    def top(self, count):
        """ Indices of the heaviest atoms, heaviest first, ties by position """
        return np.argsort(-self.weights, kind='stable')[:count]

    def restrict(self, theta):
        """ Push-forward to F_theta for theta contained in ours """
        if not set(theta).issubset(self.theta):
            raise ValueError('Cannot push a measure on %s to %s' % (self.theta, theta))
        return AtomicMeasure(theta, self.frames, self.weights, self.provenance, self.anchors)

    def rows(self):
        """ Tabular export: weight then projector coordinates """
        return [[float(weight)] + flag.coordinates().tolist()
                for flag, weight in self.atoms]

    def as_dict(self):
        return {
            'theta': self.theta.tolist(),
            'atoms': len(self),
            'provenance': self.provenance,
        }

    def __repr__(self):
        return '<AtomicMeasure %d atoms theta=%s>' % (len(self), list(self.theta))


def patterson_construct(orbit, phi, s, theta, delta_hat=None):
    """ Atoms U_theta(gamma) weighted by exp(-s phi(kappa(gamma))), normalized.
        Elements without the theta gaps, the identity among them, are skipped.
        Given the estimated critical exponent, s <= delta_hat warns.
    """
    if delta_hat is not None and s <= delta_hat:
        warnings.warn('Patterson measure at s=%g, not above the critical exponent %g'
                      % (s, delta_hat), SubcriticalExponentWarning, stacklevel=2)
    frames, _, valid = u_theta_stack(orbit.matrices, orbit.inverses, theta)
    skipped = int((~valid).sum())
    if not valid.any():
        raise AllDegenerate(skipped)
    if skipped:
        logger.debug('Skipped %d elements with degenerate gaps', skipped)
    values = orbit_values(orbit, phi)[valid]
    weights = np.exp(-s * (values - values.min()))
    weights /= weights.sum()
    _, _, right = decompose_stack(orbit.matrices[valid], orbit.inverses[valid])
    anchors = Anchors(orbit.matrices[valid], orbit.inverses[valid], orbit.cartan[valid], right,
                      [word for word, flag in zip(orbit.words, valid) if flag])
    provenance = {
        'functional': phi.tolist(),
        's': float(s),
        'max_len': orbit.max_word_length,
        'skipped': skipped,
    }
    if delta_hat is not None:
        provenance['delta_hat'] = float(delta_hat)
    return AtomicMeasure(theta, frames[valid], weights, provenance, anchors)

def patterson_family(orbit, phi, delta_hat, theta, schedule=None):
    """ Measures at s = delta_hat + epsilon for epsilon in the schedule """
    schedule = schedule or pslab_settings.EPSILON_SCHEDULE
    return [(epsilon, patterson_construct(orbit, phi, delta_hat + epsilon, theta, delta_hat))
            for epsilon in schedule]

#===============================================================================
# Shadow Lemma and conformality

def shadow_lemma_report(measure, orbit, R, delta, phi, max_length=None, limit=400):
    """ Ratios mu(O_R(gamma)) exp(delta phi(kappa(gamma))) over orbit elements.
        Elements are tested up to max_length (default: two below the ball
        radius, whose shadows are still resolved by the atoms), at most limit
        of them, evenly spread in shortlex order. Empty shadows are recorded.
    """
    if max_length is None:
        max_length = max(0, orbit.max_word_length - 2)
    candidates = np.flatnonzero(orbit.lengths <= max_length)
    if candidates.size > limit:
        candidates = candidates[np.linspace(0, candidates.size - 1, limit).round().astype(int)]
    values = orbit_values(orbit, phi)

    entries, empty = [], []
    for index in candidates.tolist():
        spec = ShadowSpec(orbit.element(index), R, measure.theta)
        mass = measure.mass(measure.shadow_mask(spec))
        if mass <= 0:
            empty.append(orbit.words[index])
            continue
        entries.append({
            'word': orbit.words[index],
            'length': int(orbit.lengths[index]),
            'mass': mass,
            'ratio': float(mass * np.exp(delta * values[index])),
        })

    ratios = np.array([entry['ratio'] for entry in entries])
    profile = {}
    for length in sorted(set(entry['length'] for entry in entries)):
        selected = np.array([entry['ratio'] for entry in entries if entry['length'] == length])
        profile[str(length)] = {
            'min': float(selected.min()),
            'median': float(np.median(selected)),
            'max': float(selected.max()),
            'count': int(selected.size),
        }
    c_hat = float(ratios.max() / ratios.min()) if ratios.size else None
    logger.info('Shadow lemma at R=%g: %d shadows, %d empty, C_hat=%s',
                R, len(entries), len(empty), c_hat)
    return {
        'R': float(R),
        'delta': float(delta),
        'tested': len(entries) + len(empty),
        'entries': entries,
        'empty_shadows': empty,
        'profile': profile,
        'C_hat': c_hat,
    }

def conformality_residual(measure, gamma, samples=20, R=4.0, length=None, delta=None, phi=None):
    """ log(mu(gamma O) / mu(O)) + delta phi(B_theta(gamma, x_O)) over matched
        shadows O = O_R(h), h running over anchors of the given word length
        (default: half the ball radius) and x_O = U_theta(h) the atom of h.
        gamma O is tested exactly through the cocycle law, not through a
        larger shadow around gamma h.
    """
    if measure.anchors is None:
        raise ValueError('Conformality needs a measure anchored on orbit elements')
    gamma = as_element(gamma)
    delta = measure.provenance.get('s') if delta is None else delta
    if phi is None:
        phi = Functional(measure.provenance['functional'])
    anchors = measure.anchors
    if length is None:
        length = max(1, measure.provenance.get('max_len', 2) // 2)
    candidates = np.flatnonzero(np.array([len(word) for word in anchors.words]) == length)
    if candidates.size > samples:
        candidates = candidates[np.linspace(0, candidates.size - 1, samples).round().astype(int)]

    residuals = []
    for index in candidates.tolist():
        h = GroupElement(anchors.matrices[index], anchors.inverses[index], anchors.words[index])
        spec = ShadowSpec(h, R, measure.theta)
        mass = measure.mass(measure.shadow_mask(spec))
        image_mass = measure.mass(measure.translated_mask(gamma, spec))
        if mass <= 0 or image_mass <= 0:
            continue
        flag = PartialFlag(measure.theta, measure.frames[index], check=False)
        cocycle = partial_iwasawa(gamma, flag)
        residuals.append(float(np.log(image_mass / mass) + delta * phi(np.asarray(cocycle))))
    if not residuals:
        raise InsufficientMatchedMass(int(candidates.size))
    residuals = np.array(residuals)
    quartiles = np.percentile(residuals, [25, 75])
    return {
        'word': gamma.word,
        'R': float(R),
        'length': int(length),
        'residuals': residuals.tolist(),
        'median': float(np.median(residuals)),
        'median_abs': float(np.median(np.abs(residuals))),
        'iqr': float(quartiles[1] - quartiles[0]),
        'matched': int(residuals.size),
        'samples': int(candidates.size),
    }

#===============================================================================
# Conical tracking

class TrackingTrace(object):
    """ Prefix-by-prefix record of U_Theta along a geodesic word """
    def __init__(self, word, theta, big_theta):
        self.word = word
        self.theta = theta
        self.big_theta = big_theta
        self.steps = []
        self.limit = None

    @property
    def converged(self):
        if self.limit is None or len(self.steps) < 2:
            return False
        last = self.steps[-1]
        return (last['increment'] is not None and
                last['increment'] < pslab_settings.CONVERGENCE_INCREMENT and
                last['min_gap'] > pslab_settings.CONVERGENCE_GAP)

    def limit_point(self):
        """ The theta-flag the trace converges to, and its Theta lift """
        return self.limit.restrict(self.theta), self.limit

    def as_dict(self):
        return {
            'word': self.word,
            'theta': self.theta.tolist(),
            'Theta': self.big_theta.tolist(),
            'steps': self.steps,
            'converged': self.converged,
            'limit': None if self.limit is None else self.limit.frame.tolist(),
        }


def conical_tracking(generators, word, theta, big_theta):
    """ Follow U_Theta(gamma_n) for the prefixes gamma_n of a reduced word """
    if not set(theta).issubset(big_theta):
        raise ValueError('Tracking needs theta inside Theta, got %s and %s' % (theta, big_theta))
    if reduce_word(word) != word:
        raise ValueError('Tracking follows reduced words, %r is not' % word)
    trace = TrackingTrace(word, theta, big_theta)
    element = GroupElement.identity(generators.dim)
    previous = None
    for n, letter in enumerate(word, 1):
        element = element * generators.letter(letter)
        frames, logs, valid = u_theta_stack(element.matrix[None], element.inverse[None], big_theta)
        gaps = [(float(logs[0][j - 1] - logs[0][j]), j) for j in big_theta]
        min_gap, min_index = min(gaps)
        step = {'n': n, 'min_gap': min_gap, 'increment': None, 'degenerate': not valid[0]}
        if valid[0]:
            current = PartialFlag(big_theta, frames[0], check=False)
            if previous is not None:
                step['increment'] = flag_distance(previous, current)
            previous = current
        else:
            error = DegenerateGap(min_index, min_gap, pslab_settings.GAP_FLOOR)
            step['error'] = error.as_dict()
        trace.steps.append(step)
    trace.limit = previous
    return trace

def empirical_lift(generators, words, theta, big_theta):
    """ Pairs (x, f(x)) from the converged traces of the given words """
    traces = [conical_tracking(generators, word, theta, big_theta) for word in words]
    points = [trace.limit_point() for trace in traces if trace.converged]
    logger.info('Empirical lift: %d of %d traces converged', len(points), len(traces))
    return traces, points

def lift_equivariance(generators, word, letter, theta, big_theta):
    """ flag distance between f(gamma x) and gamma f(x) for gamma a generator letter """
    trace = conical_tracking(generators, word, theta, big_theta)
    shifted = reduce_word(letter + word)
    image = conical_tracking(generators, shifted, theta, big_theta)
    if trace.limit is None or image.limit is None:
        return None
    expected = translate(generators.letter(letter), trace.limit)
    return flag_distance(expected, image.limit)
