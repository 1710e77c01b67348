""" Entropy functionals and the convexity experiments built on critical
    exponents: the comparison of phi_H with phi_p, the harmonic-mean bound
    for combinations of functionals, the Holder step, the middle eigenvalue
    deviation and scans of the sub-level set {phi : delta^phi <= 1}.
"""
import itertools
import logging
import numpy as np
from pslab.cartan import Functional, jordan_projection_stack
from pslab.exceptions import InsufficientRange, PremiseViolation
from pslab.orbit import COUNT_REGRESSION, critical_exponent, orbit_values
from pslab.settings import pslab_settings
from pslab.utils import parallel_map

__all__ = (
    'EntropyReport',
    'hilbert_functional',
    'phi_p',
    'phi_bar_p',
    'functional_comparison',
    'comparison_closed_form',
    'convexity_gap',
    'holder_bound_check',
    'normalize_functional',
    'middle_eigenvalue_deviation',
    'simplex_grid',
    'q_levelset_scan',
)

logger = logging.getLogger(__name__)

#===============================================================================
# Functionals

def hilbert_functional(dim):
    """ phi_H = (omega_1 + omega_{d-1}) / 2, so phi_H(diag(t)) = (t_1 - t_d) / 2 """
    return (Functional.weight(dim, 1) + Functional.weight(dim, dim - 1)) * 0.5

def _check_p(dim, p):
    if not 1 <= p <= dim - 2:
        raise IndexError('p runs from 1 to %d for d=%d, got %r' % (dim - 2, dim, p))

def phi_p(dim, p):
    """ (p+1) omega_1 - omega_{p+1} """
    _check_p(dim, p)
    return Functional.weight(dim, 1) * (p + 1) - Functional.weight(dim, p + 1)

def phi_bar_p(dim, p):
    """ (p+1) omega_{d-1} - omega_{d-p-1} """
    _check_p(dim, p)
    return Functional.weight(dim, dim - 1) * (p + 1) - Functional.weight(dim, dim - p - 1)

def comparison_closed_form(X, p):
    """ (1/2) sum_{i=2}^{p+1} (t_i - t_{d+1-i}), terms past the middle cancel """
    entries = np.asarray(X, dtype=float)
    dim = entries.size
    return 0.5 * sum(entries[i - 1] - entries[dim - i] for i in range(2, p + 2))

def functional_comparison(X, dim, p):
    """ p phi_H(X) against (phi_p + phi_bar_p)(X) / 2 on a chamber point """
    entries = np.asarray(X, dtype=float)
    if entries.size != dim:
        raise ValueError('Expected a Cartan vector of length %d, got %d' % (dim, entries.size))
    if np.any(np.diff(entries) > pslab_settings.SUM_TOLERANCE):
        raise ValueError('functional_comparison needs a chamber-ordered vector')
    lhs = p * hilbert_functional(dim)(entries)
    rhs = 0.5 * (phi_p(dim, p) + phi_bar_p(dim, p))(entries)
    return {
        'lhs': float(lhs),
        'rhs': float(rhs),
        'slack': float(lhs - rhs),
        'closed_form': float(comparison_closed_form(entries, p)),
        'middle_equal': bool(abs(entries[1] - entries[dim - 2]) <= 1e-10),
    }

#===============================================================================
# Exponent comparisons

class EntropyReport(object):
    """ delta^phi against the harmonic bound 1 / (c1 / delta^phi1 + c2 / delta^phi2) """
    def __init__(self, phi, phi1, phi2, c1, c2, estimates, premise_margin):
        self.phi, self.phi1, self.phi2 = phi, phi1, phi2
        self.c1, self.c2 = float(c1), float(c2)
        self.estimates = estimates
        self.premise_margin = float(premise_margin)
        delta1, delta2 = estimates[1].delta_hat, estimates[2].delta_hat
        if delta1 <= 0 or delta2 <= 0:
            self.bound = 0.0
        else:
            self.bound = 1.0 / (self.c1 / delta1 + self.c2 / delta2)
        self.gap = self.bound - estimates[0].delta_hat

    @property
    def premise_holds(self):
        return self.premise_margin >= -pslab_settings.SUM_TOLERANCE

    @property
    def stderr(self):
        """ Combined standard error of the three estimates """
        return float(np.sqrt(sum(estimate.stderr ** 2 for estimate in self.estimates)))

    def as_dict(self):
        return {
            'functionals': {'phi': self.phi.tolist(), 'phi1': self.phi1.tolist(),
                            'phi2': self.phi2.tolist()},
            'c1': self.c1,
            'c2': self.c2,
            'delta_hat': [estimate.delta_hat for estimate in self.estimates],
            'windows': [list(estimate.window) for estimate in self.estimates],
            'bound': self.bound,
            'gap': self.gap,
            'stderr': self.stderr,
            'premise_margin': self.premise_margin,
            'premise_holds': self.premise_holds,
        }


def convexity_gap(orbit, phi, phi1, phi2, c1, c2, method=COUNT_REGRESSION):
    """ Estimates of delta for phi, phi1, phi2 and the gap to the harmonic bound.
        The premise phi >= c1 phi1 + c2 phi2 is evaluated on the ball and
        reported as its smallest margin.
    """
    margin = float((orbit_values(orbit, phi) - c1 * orbit_values(orbit, phi1)
                    - c2 * orbit_values(orbit, phi2)).min())
    estimates = [critical_exponent(orbit, functional, method) for functional in (phi, phi1, phi2)]
    report = EntropyReport(phi, phi1, phi2, c1, c2, estimates, margin)
    logger.info('Convexity gap %.4f (bound %.4f, stderr %.4f)', report.gap, report.bound,
                report.stderr)
    return report

def normalize_functional(orbit, phi, method=COUNT_REGRESSION):
    """ phi / delta^phi, whose exponent is 1 """
    estimate = critical_exponent(orbit, phi, method)
    if estimate.delta_hat <= 0:
        raise InsufficientRange(0, 1, estimate.window)
    return phi / estimate.delta_hat, estimate

def holder_bound_check(orbit, phi, phi1, phi2, t, method=COUNT_REGRESSION):
    """ With delta^phi1 = delta^phi2 = 1, confirm delta^phi <= 1.
        C is the smallest constant with phi >= t phi1 + (1-t) phi2 - C on the
        ball. A failed premise is reported and the check skipped.
    """
    noise = pslab_settings.ESTIMATOR_NOISE['agreement']
    first = critical_exponent(orbit, phi1, method)
    second = critical_exponent(orbit, phi2, method)
    report = {'t': float(t), 'delta_hat_phi1': first.delta_hat,
              'delta_hat_phi2': second.delta_hat}
    try:
        for estimate in (first, second):
            if abs(estimate.delta_hat - 1.0) > noise:
                raise PremiseViolation('critical exponent %.4f of a combined functional is not 1 '
                                       'within %g; rescale it first' % (estimate.delta_hat, noise))
    except PremiseViolation as exc:
        report.update({'skipped': True, 'passed': None, 'premise': exc.as_dict()})
        logger.info('Holder check skipped: %s', exc)
        return report

    combination = t * orbit_values(orbit, phi1) + (1 - t) * orbit_values(orbit, phi2)
    constant = float(max(0.0, (combination - orbit_values(orbit, phi)).max()))
    estimate = critical_exponent(orbit, phi, method)
    report.update({
        'skipped': False,
        'C': constant,
        'delta_hat': estimate.delta_hat,
        'margin': 1.0 - estimate.delta_hat,
        'passed': estimate.delta_hat <= 1.0 + noise,
    })
    return report

def middle_eigenvalue_deviation(orbit):
    """ Largest |log lambda_i(gamma)| over 2 <= i <= d-1 and the ball """
    if orbit.dim < 3:
        return {'deviation': 0.0, 'word': ''}
    spectra = jordan_projection_stack(orbit.matrices, orbit.inverses)
    middle = np.abs(spectra[:, 1:-1]).max(axis=-1)
    worst = int(np.argmax(middle))
    return {'deviation': float(middle[worst]), 'word': orbit.words[worst]}

#===============================================================================
# Sub-level set scans

def simplex_grid(dim, indices=None, points=21):
    """ Normalized non-negative combinations of the weights omega_j, j in indices.
        Only the two-weight case is laid out on a line of the given number of points;
        with more weights, the lattice of step 1/(points-1) on the simplex is used.
    """
    indices = list(indices or range(1, dim))
    steps = points - 1
    functionals = []
    for combination in itertools.product(range(steps + 1), repeat=len(indices)):
        if sum(combination) != steps:
            continue
        coeffs = np.zeros(dim - 1)
        for index, amount in zip(indices, combination):
            coeffs[index - 1] = amount / steps
        functionals.append(Functional(coeffs))
    return functionals

def _scan_cell(orbit, phi, method):
    try:
        estimate = critical_exponent(orbit, phi, method)
    except InsufficientRange as exc:
        return {'coefficients': phi.tolist(), 'status': 'InsufficientRange', 'error': exc.as_dict()}
    return {'coefficients': phi.tolist(), 'status': 'ok', 'delta_hat': estimate.delta_hat,
            'stderr': estimate.stderr}

def q_levelset_scan(orbit, grid=None, method=COUNT_REGRESSION, pairs=5, jobs=1):
    """ delta^phi over a grid of functionals, the boundary points phi/delta^phi
        of {delta <= 1}, the scaling law on one cell and midpoint convexity
        checks on neighbouring cells.
    """
    grid = grid if grid is not None else simplex_grid(orbit.dim)
    noise = pslab_settings.ESTIMATOR_NOISE
    cells = parallel_map(lambda phi: _scan_cell(orbit, phi, method), grid, jobs)
    good = [(phi, cell) for phi, cell in zip(grid, cells)
            if cell['status'] == 'ok' and cell['delta_hat'] > 0]

    levelset = [(phi / cell['delta_hat']).tolist() for phi, cell in good]
    scaling = []
    if good:
        phi, cell = good[len(good) // 2]
        for factor in (0.5, 2.0):
            scaled = critical_exponent(orbit, phi * factor, method).delta_hat
            expected = cell['delta_hat'] / factor
            scaling.append({'factor': factor, 'delta_hat': scaled, 'expected': expected,
                            'passed': abs(scaled - expected) <= noise['scaling']})

    midpoints = []
    for (phi, cell), (psi, other) in zip(good[:-1], good[1:]):
        middle = critical_exponent(orbit, (phi + psi) * 0.5, method).delta_hat
        midpoints.append({'delta_hat': middle,
                          'bound': max(cell['delta_hat'], other['delta_hat']),
                          'passed': middle <= max(cell['delta_hat'], other['delta_hat'])
                                              + noise['agreement']})

    strictness = []
    if len(good) >= 2:
        positions = np.linspace(0, len(good) - 1, pairs + 1).round().astype(int)
        for first, second in zip(positions[:-1], positions[1:]):
            if first == second:
                continue
            (phi, cell), (psi, other) = good[first], good[second]
            middle = (phi / cell['delta_hat'] + psi / other['delta_hat']) * 0.5
            estimate = critical_exponent(orbit, middle, method)
            strictness.append({'gap': 1.0 - estimate.delta_hat, 'stderr': estimate.stderr,
                               'strict': 1.0 - estimate.delta_hat > 2 * estimate.stderr})
    return {
        'cells': cells,
        'levelset': levelset,
        'scaling': scaling,
        'midpoints': midpoints,
        'strictness': strictness,
    }
