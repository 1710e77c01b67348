""" Pslab-specific exceptions
    Part of pslab public API.
"""

__all__ = (
    'PslabError',
    'SingularDecompositionFailure',
    'SingularSystem',
    'DegenerateGap',
    'NotTransverse',
    'NoWitness',
    'TransversalityLost',
    'DiscretenessSuspect',
    'InsufficientRange',
    'AllDegenerate',
    'InsufficientMatchedMass',
    'NoTransversePairs',
    'CoincidentPoints',
    'DomainNotPreserved',
    'RayExitFailure',
    'PremiseViolation',
    'NegativeFunctionalWarning',
    'SubcriticalExponentWarning',
)

class PslabError(Exception):
    """ Base class for every error raised by pslab modules.
        Subclasses keep the offending data as attributes; as_dict() gives
        the machine-readable form written by the command-line runner.
    """
    def as_dict(self):
        return {'error': self.__class__.__name__, 'message': str(self)}


class SingularDecompositionFailure(PslabError):
    """ Raised when the singular value decomposition of a matrix (or of a
        stack of matrices) does not converge.
    """
    def __init__(self, reason):
        self.reason = reason

    def __str__(self):
        return 'Singular value decomposition failed: %s' % self.reason


class SingularSystem(PslabError):
    """ Raised when the weight-matching system of pi_theta cannot be solved.
        The system is the inverse Cartan matrix restricted to theta, so this
        signals a basis bug rather than bad input.
    """
    def __init__(self, theta):
        self.theta = theta

    def __str__(self):
        return 'Weight-matching system is singular for theta=%s' % (self.theta,)


class DegenerateGap(PslabError):
    """ Raised when U_theta is undefined because a singular value gap
        required by theta vanishes.
    """
    def __init__(self, index, gap, floor):
        self.index = index
        self.gap = gap
        self.floor = floor

    def __str__(self):
        return ('Singular value gap alpha_{index} = {gap:.3g} does not exceed the '
                'gap floor {floor:.3g}').format(index=self.index, gap=self.gap, floor=self.floor)

    def as_dict(self):
        result = super(DegenerateGap, self).as_dict()
        result['index'] = self.index
        return result


class NotTransverse(PslabError):
    """ Raised when building a transverse pair from flags that are not. """
    def __init__(self, determinants, floor):
        self.determinants = determinants
        self.floor = floor

    def __str__(self):
        return ('Flags are not transverse: smallest determinant {value:.3g} '
                'is below {floor:.3g}').format(value=min(self.determinants), floor=self.floor)


class NoWitness(PslabError):
    """ Raised when a Gromov product is requested for a pair that carries no
        witness and none can be constructed.
    """
    def __str__(self):
        return ('Transverse pair has no witness g with g P = xi and g w0 P = eta, '
                'and the intersection basis construction failed')


class TransversalityLost(PslabError):
    """ Raised when translating a transverse pair produces a pair that is
        numerically not transverse anymore.
    """
    def __init__(self, determinant, floor):
        self.determinant = determinant
        self.floor = floor

    def __str__(self):
        return ('Translated pair lost transversality: determinant {value:.3g} is '
                'below {floor:.3g}').format(value=self.determinant, floor=self.floor)


class DiscretenessSuspect(PslabError):
    """ Raised when hash deduplication collapses too many candidate words,
        which signals a non-discrete or ill-conditioned generating set.
    """
    def __init__(self, collapsed, candidates, threshold):
        self.collapsed = collapsed
        self.candidates = candidates
        self.threshold = threshold

    def __str__(self):
        return ('Deduplication collapsed {collapsed} of {candidates} candidate words, '
                'above the {threshold:.0%} threshold: the group may not be discrete'
                ).format(collapsed=self.collapsed, candidates=self.candidates,
                         threshold=self.threshold)


class InsufficientRange(PslabError):
    """ Raised when an exponent estimator has too few distinct values. """
    def __init__(self, points, required, window):
        self.points = points
        self.required = required
        self.window = window

    def __str__(self):
        return ('Estimation window [{low:.4g}, {high:.4g}] holds {points} distinct values, '
                '{required} are required').format(low=self.window[0], high=self.window[1],
                                                  points=self.points, required=self.required)


class AllDegenerate(PslabError):
    """ Raised when no orbit element admits U_theta. """
    def __init__(self, skipped):
        self.skipped = skipped

    def __str__(self):
        return 'All %d orbit elements have a degenerate singular value gap' % self.skipped


class InsufficientMatchedMass(PslabError):
    """ Raised when no sampled shadow has positive mass on both sides
        of a conformality comparison.
    """
    def __init__(self, samples):
        self.samples = samples

    def __str__(self):
        return ('None of the %d sampled shadows has positive mass both before '
                'and after translation' % self.samples)


class NoTransversePairs(PslabError):
    """ Raised when no atom pair of two measures is transverse. """
    def __init__(self, checked):
        self.checked = checked

    def __str__(self):
        return 'None of the %d candidate atom pairs is transverse' % self.checked


class CoincidentPoints(PslabError):
    """ Raised when a chord is requested through two equal points. """
    def __init__(self, point):
        self.point = point

    def __str__(self):
        return 'Points coincide, no chord is defined through %r' % (self.point,)


class DomainNotPreserved(PslabError):
    """ Raised when a generator maps a sampled domain point outside the domain. """
    def __init__(self, label, point):
        self.label = label
        self.point = point

    def __str__(self):
        return ('Generator {label!r} maps the domain point {point!r} outside the domain'
                ).format(label=self.label, point=self.point)


class RayExitFailure(PslabError):
    """ Raised when a geodesic ray leaves the numerical interior before the
        requested time.
    """
    def __init__(self, time):
        self.time = time

    def __str__(self):
        return ('Geodesic ray reached the boundary numerically at t={time:.4g}; '
                'raise PSLAB["HILBERT_DPS"]').format(time=self.time)


class PremiseViolation(PslabError):
    """ Raised when the hypotheses of an inequality check do not hold. """
    def __init__(self, reason):
        self.reason = reason

    def __str__(self):
        return 'Premise violated: %s' % self.reason


class NegativeFunctionalWarning(UserWarning):
    """ Issued when a functional takes negative values on an orbit that is
        being counted.
    """


class SubcriticalExponentWarning(UserWarning):
    """ Issued when a Patterson measure is built at an exponent s not above
        the estimated critical exponent, where the Poincare series may diverge.
    """
