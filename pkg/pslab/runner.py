""" Experiment runner behind the pslab command.
    Each subcommand turns a validated ExperimentConfig into a result dict and
    CSV tables; run() wraps them with a report header and writes the files.
    Reports are a function of config, seed and version only.
"""
from django.utils.functional import cached_property
import logging
import numpy as np
from mpmath import mp
from pslab.bms import bms_sample, convention_check, hopf_action_check, invariance_residual
from pslab.cartan import Functional, RootSubset, istar, jordan_projection_stack, opposition
from pslab.convexity import (comparison_closed_form, convexity_gap, functional_comparison,
                             hilbert_functional, holder_bound_check, middle_eigenvalue_deviation,
                             normalize_functional, phi_bar_p, phi_p, q_levelset_scan)
from pslab.elements import random_reduced_word
from pslab.exceptions import (DegenerateGap, InsufficientMatchedMass, NotTransverse, PslabError,
                              TransversalityLost)
from pslab.fixtures import klein_generators, load_fixture
from pslab.flags import (TransversePair, construct_witness, gromov_product, iwasawa_cocycle,
                         north_south_trace, quint_residual, translate, u_theta_stack)
from pslab.forms import ExperimentConfig
from pslab.hilbert import (Ball, hilbert_critical_exponent, hilbert_distance, kaimanovich_nu,
                           lambda_n, orbit_positions, projective_apply, ray_point,
                           synchronization_offset)
from pslab.orbit import (COUNT_REGRESSION, completeness_radius, critical_exponent,
                         divergence_indicator, enumerate_orbit, orbit_values)
from pslab.reports import output_path, render_text, report_header, to_json, write_csv, write_json
from pslab.settings import pslab_settings
from pslab.shadows import (conformality_residual, empirical_lift, lift_equivariance,
                           patterson_construct, patterson_family, shadow_lemma_report)
from pslab.utils import make_rng, random_diagonal, random_flag, random_sl

__all__ = (
    'SUBCOMMANDS',
    'Experiment',
    'run',
)

logger = logging.getLogger(__name__)

SUBCOMMANDS = {}

def subcommand(name):
    def register(func):
        SUBCOMMANDS[name] = func
        return func
    return register

#===============================================================================

class Experiment(object):
    """ A validated config with the objects every subcommand shares """
    def __init__(self, name, form, jobs=1, out='.'):
        self.name = name
        self.config = form.cleaned_data
        self.description = form.describe()
        self.seed = self.config.get('seed')
        self.jobs = jobs
        self.out = out
        self.group = self.config['group']
        self.theta = self.config['theta']
        self.big_theta = self.config['big_theta']
        self.functionals = self.config['functionals']
        self.tables = {}

    @cached_property
    def rng(self):
        return make_rng(self.seed)

    @cached_property
    def orbit(self):
        return enumerate_orbit(self.group, self.config['max_len'], self.jobs)

    @property
    def method(self):
        return self.config['method']

    def random_word(self, low=1, high=4):
        return random_reduced_word(self.rng, self.group.alphabet, int(self.rng.integers(low, high + 1)))

    def table(self, name, header, rows):
        self.tables[name] = (header, rows)


def _check(name, errors, tolerance, **extra):
    errors = np.asarray(errors, dtype=float)
    worst = float(errors.max()) if errors.size else 0.0
    result = {'name': name, 'samples': int(errors.size), 'max_error': worst,
              'tolerance': tolerance, 'passed': bool(worst <= tolerance)}
    result.update(extra)
    return result

def _index_header(prefix, dim):
    return ['%s_%d' % (prefix, index) for index in range(1, dim + 1)]

#===============================================================================
# Subcommands

@subcommand('kappa')
def run_kappa(experiment):
    orbit = experiment.orbit
    jordan = jordan_projection_stack(orbit.matrices, orbit.inverses)
    experiment.table('kappa', ['word', 'length'] + _index_header('kappa', orbit.dim)
                     + _index_header('lambda', orbit.dim),
                     [[word, len(word)] + kappa.tolist() + spectrum.tolist()
                      for word, kappa, spectrum in zip(orbit.words, orbit.cartan, jordan)])
    orbit.write_jsonl(output_path(experiment.out, 'orbit.jsonl'))
    gaps = -np.diff(orbit.cartan, axis=-1)
    min_gaps = {}
    for length in range(1, orbit.max_word_length + 1):
        sphere = orbit.sphere(length)
        if sphere.size:
            min_gaps[str(length)] = gaps[sphere].min(axis=0).tolist()
    return {
        'elements': len(orbit),
        'max_word_length': orbit.max_word_length,
        'sphere_sizes': np.bincount(orbit.lengths).tolist(),
        'dedup': orbit.dedup_stats,
        'orbit_file': 'orbit.jsonl',
        'min_gaps': min_gaps,
    }

@subcommand('exponent')
def run_exponent(experiment):
    orbit = experiment.orbit
    estimates, rows = [], []
    for phi in experiment.functionals:
        estimate = critical_exponent(orbit, phi, experiment.method)
        values = orbit_values(orbit, phi)
        entry = estimate.as_dict()
        entry['functional'] = phi.tolist()
        entry['completeness_radius'] = completeness_radius(orbit, values)
        entry['divergence'] = divergence_indicator(orbit, phi, estimate.delta_hat)
        estimates.append(entry)
        ordered = np.sort(values)
        grid = np.linspace(0.0, ordered[-1], 64)
        counts = np.searchsorted(ordered, grid, side='right')
        rows.extend([' '.join(map(repr, phi.tolist())), T, int(N)] for T, N in zip(grid, counts))
    experiment.table('counting', ['functional', 'T', 'N'], rows)
    return {'elements': len(orbit), 'estimates': estimates}

@subcommand('limitset')
def run_limitset(experiment):
    orbit, theta = experiment.orbit, experiment.theta
    frames, logs, valid = u_theta_stack(orbit.matrices, orbit.inverses, theta)
    outer = valid & (orbit.lengths == orbit.max_word_length)
    rows = []
    for index in np.flatnonzero(outer).tolist():
        columns = frames[index][:, :max(theta)]
        rows.append([orbit.words[index]] + columns.T.ravel().tolist())
    header = ['word'] + ['u%d_%d' % (j, i) for j in range(1, max(theta) + 1)
                         for i in range(1, orbit.dim + 1)]
    experiment.table('limitset', header, rows)
    gaps = np.stack([logs[:, j - 1] - logs[:, j] for j in theta], axis=-1)[outer]
    return {
        'theta': theta.tolist(),
        'atoms': int(outer.sum()),
        'skipped': int((~valid).sum()),
        'min_gap': float(gaps.min()) if gaps.size else None,
    }

@subcommand('ps')
def run_ps(experiment):
    orbit, theta = experiment.orbit, experiment.theta
    phi = experiment.functionals[0]
    estimate = critical_exponent(orbit, phi, experiment.method)
    family = patterson_family(orbit, phi, estimate.delta_hat, theta, experiment.config['epsilons'])
    epsilon, measure = min(family, key=lambda item: item[0])
    delta = measure.provenance['s']

    shadows, rows = [], []
    for R in experiment.config['radii']:
        report = shadow_lemma_report(measure, orbit, R, delta, phi)
        rows.extend([R, entry['word'], entry['length'], entry['mass'], entry['ratio']]
                    for entry in report.pop('entries'))
        shadows.append(report)
    experiment.table('shadows', ['R', 'word', 'length', 'mass', 'ratio'], rows)
    atoms = measure.rows()
    width = len(atoms[0]) - 1 if atoms else 0
    experiment.table('atoms', ['weight'] + ['x_%d' % i for i in range(1, width + 1)], atoms)

    conformality = {}
    for label in experiment.group.labels:
        try:
            conformality[label] = conformality_residual(measure, experiment.group.letter(label),
                                                        R=experiment.config['radii'][0])
        except InsufficientMatchedMass as exc:
            conformality[label] = exc.as_dict()
    return {
        'estimate': estimate.as_dict(),
        'measures': [dict(measure.as_dict(), epsilon=eps) for eps, measure in family],
        'epsilon': epsilon,
        'shadow_lemma': shadows,
        'conformality': conformality,
    }

@subcommand('track')
def run_track(experiment):
    group, rng = experiment.group, experiment.rng
    length = experiment.config['track_length']
    words = [random_reduced_word(rng, group.alphabet, length)
             for _ in range(experiment.config['samples'])]
    traces, points = empirical_lift(group, words, experiment.theta, experiment.big_theta)
    rows = [[trace.word, step['n'], step['min_gap'], step['increment'], step['degenerate']]
            for trace in traces for step in trace.steps]
    experiment.table('traces', ['word', 'n', 'min_gap', 'increment', 'degenerate'], rows)

    converged = [trace for trace in traces if trace.converged][:10]
    equivariance = []
    for trace in converged:
        letter = str(rng.choice(group.alphabet))
        distance = lift_equivariance(group, trace.word, letter, experiment.theta,
                                     experiment.big_theta)
        equivariance.append({'word': trace.word, 'letter': letter, 'distance': distance})
    distances = [entry['distance'] for entry in equivariance if entry['distance'] is not None]

    # kappa(g^-1 gamma_n) - kappa(gamma_n) against the cocycle at the tracked flag
    quint = []
    if converged:
        elements = [group.evaluate(trace.word) for trace in converged]
        for letter in group.alphabet:
            residuals = quint_residual(group.letter(letter), elements, experiment.theta)
            quint.extend([trace.word, letter, None if np.isnan(value) else float(value)]
                         for trace, value in zip(converged, residuals))
    experiment.table('quint', ['word', 'letter', 'residual'], quint)
    resolved = [row[2] for row in quint if row[2] is not None]

    north_south = {}
    for label in group.labels:
        x = random_flag(rng, group.dim, experiment.theta)
        try:
            north_south[label] = north_south_trace(group.letter(label), x, length)
        except (DegenerateGap, NotTransverse) as exc:
            north_south[label] = exc.as_dict()
    return {
        'traces': len(traces),
        'converged': len(points),
        'theta': experiment.theta.tolist(),
        'Theta': experiment.big_theta.tolist(),
        'equivariance': equivariance,
        'max_equivariance_error': max(distances) if distances else None,
        'max_quint_residual': max(resolved) if resolved else None,
        'north_south': north_south,
    }

@subcommand('bms')
def run_bms(experiment):
    orbit, rng = experiment.orbit, experiment.rng
    phi = experiment.functionals[0]
    full = RootSubset.full(orbit.dim)
    estimate = critical_exponent(orbit, phi, experiment.method)
    s = estimate.delta_hat + min(experiment.config['epsilons'])
    mu_phi = patterson_construct(orbit, phi, s, full, estimate.delta_hat)
    mu_istar = patterson_construct(orbit, istar(phi), s, full)
    sample = bms_sample(mu_phi, mu_istar, experiment.config['samples'], phi, estimate.delta_hat)

    residuals, lost, convention = [], 0, None
    for pair in sample.pairs:
        g = experiment.group.evaluate(experiment.random_word())
        try:
            residuals.append(invariance_residual(g, pair, phi))
            if convention is None:
                convention = convention_check(g, pair, phi)
        except TransversalityLost:
            lost += 1
    exponents = np.log10(np.maximum(residuals, 1e-18)) if residuals else np.array([])
    counts, edges = np.histogram(exponents, bins=np.arange(-18, 2))
    experiment.table('residuals', ['log10_low', 'log10_high', 'count'],
                     [[low, high, int(count)] for low, high, count in zip(edges[:-1], edges[1:], counts)])

    hopf_errors = [hopf_action_check(random_sl(rng, orbit.dim), random_sl(rng, orbit.dim))
                   for _ in range(experiment.config['samples'])]
    return {
        'sample': sample.as_dict(),
        'convention': convention,
        'max_residual': max(residuals) if residuals else None,
        'transversality_lost': lost,
        'hopf_max_error': max(hopf_errors),
    }

def _boundary_point(rng, dim):
    direction = rng.standard_normal(dim)
    return (direction / np.linalg.norm(direction)).tolist()

def _chamber_point(rng, dim):
    point = np.sort(rng.normal(size=dim))[::-1]
    return point - point.mean()

def _disk_point(rng, dim, radius):
    return (np.asarray(_boundary_point(rng, dim)) * radius * rng.uniform()).tolist()

@subcommand('hilbert')
def run_hilbert(experiment):
    group, rng = experiment.group, experiment.rng
    samples, dim = experiment.config['samples'], group.dim - 1
    domain = Ball([0] * dim, 1)
    basepoint = [0.0] * dim
    with mp.workdps(pslab_settings.HILBERT_DPS):
        if experiment.config.get('fixture') == 'F2':
            generators = klein_generators()
        else:
            generators = dict((label, group.generators[label].matrix) for label in group.labels)
        estimate = hilbert_critical_exponent(domain, generators, basepoint,
                                             experiment.config['hilbert_len'])
        orbit = orbit_positions(domain, generators, basepoint, experiment.config['hilbert_len'])
    delta = estimate.delta_hat

    radial, triangle, invariance = [], [], []
    for _ in range(samples):
        x = _disk_point(rng, dim, 0.95)
        radial.append(abs(hilbert_distance(domain, basepoint, x) - np.arctanh(np.linalg.norm(x))))
        p, q, r = (_disk_point(rng, dim, 0.9) for _ in range(3))
        triangle.append(max(0.0, hilbert_distance(domain, p, r) - hilbert_distance(domain, p, q)
                            - hilbert_distance(domain, q, r)))
        matrix = generators[str(rng.choice(group.labels))]
        with mp.workdps(pslab_settings.HILBERT_DPS):
            image_p, image_q = projective_apply(matrix, p), projective_apply(matrix, q)
        invariance.append(abs(hilbert_distance(domain, image_p, image_q)
                              - hilbert_distance(domain, p, q)))

    constant = 2 * delta * np.exp(2 * delta)
    rows = []
    for _ in range(samples):
        p = _disk_point(rng, dim, 0.5)
        q = ray_point(domain, p, _boundary_point(rng, dim), rng.uniform(0.05, 1.0))
        distance = hilbert_distance(domain, p, q)
        variation = kaimanovich_nu(orbit, delta, p).total_variation(kaimanovich_nu(orbit, delta, q))
        rows.append([distance, variation, constant * distance])
    experiment.table('kaimanovich', ['distance', 'total_variation', 'bound'], rows)

    p, q, x = basepoint, [0.3] + [0.1] * (dim - 1), [1.0] + [0.0] * (dim - 1)
    lambdas = dict((str(n), lambda_n(orbit, delta, p, x, n).total_variation(
                    lambda_n(orbit, delta, q, x, n))) for n in experiment.config['lambda_lengths'])
    result = {
        'estimate': estimate.as_dict(),
        'orbit_points': len(orbit),
        'radial_max_error': max(radial),
        'triangle_max_violation': max(triangle),
        'invariance_max_error': max(invariance),
        'kaimanovich_violations': sum(1 for row in rows if row[1] > row[2] + 1e-12),
        'lambda_cross_distance': lambdas,
        'synchronization': synchronization_offset(domain, p, q, x),
    }
    if group.dim == 3:
        matched = critical_exponent(experiment.orbit, hilbert_functional(3), experiment.method)
        result['cartan_estimate'] = matched.as_dict()
        result['cross_method_gap'] = abs(matched.delta_hat - delta)
    return result

@subcommand('convexity')
def run_convexity(experiment):
    orbit = experiment.orbit
    dim = orbit.dim
    functionals = list(experiment.functionals)
    if len(functionals) < 3:
        functionals = functionals[:1] + [Functional.weight(dim, 1), Functional.weight(dim, dim - 1)]
    phi, phi1, phi2 = functionals[:3]
    c1, c2 = experiment.config['coefficients']
    report = convexity_gap(orbit, phi, phi1, phi2, c1, c2, experiment.method)

    scaled1, _ = normalize_functional(orbit, phi1, experiment.method)
    scaled2, _ = normalize_functional(orbit, phi2, experiment.method)
    holder = holder_bound_check(orbit, (scaled1 + scaled2) * 0.5, scaled1, scaled2, 0.5,
                                experiment.method)

    comparison = {}
    if dim >= 3:
        for p in range(1, dim - 1):
            slack = [functional_comparison(kappa, dim, p)['slack'] - comparison_closed_form(kappa, p)
                     for kappa in orbit.cartan]
            symmetric = np.abs(orbit_values(orbit, phi_p(dim, p))
                               - orbit_values(orbit, phi_bar_p(dim, p)))
            comparison[str(p)] = {'closed_form_max_error': float(np.abs(slack).max()),
                                  'phi_p_asymmetry': float(symmetric.max())}

    scan = q_levelset_scan(orbit, jobs=experiment.jobs)
    experiment.table('levelset', _index_header('omega', dim - 1) + ['delta_hat', 'stderr', 'status'],
                     [cell['coefficients'] + [cell.get('delta_hat'), cell.get('stderr'), cell['status']]
                      for cell in scan['cells']])
    experiment.table('boundary', _index_header('omega', dim - 1), scan.pop('levelset'))
    scan.pop('cells')
    return {
        'entropy': report.as_dict(),
        'holder': holder,
        'comparison': comparison,
        'middle_eigenvalues': middle_eigenvalue_deviation(orbit),
        'scan': scan,
    }

def _dynamics_checks(rng, samples, length):
    """ Conical convergence, lift equivariance, the limit of kappa differences
        and north-south dynamics on F3
    """
    f3, theta, full = load_fixture('F3'), RootSubset(3, [1]), RootSubset.full(3)
    words = [random_reduced_word(rng, f3.alphabet, length) for _ in range(samples)]
    traces, _ = empirical_lift(f3, words, theta, full)
    misses = [0.0 if trace.converged else 1.0 for trace in traces]
    ping_pong = ('ab' * length)[:length]
    equivariance = [lift_equivariance(f3, ping_pong, 'b', theta, full)]
    for trace in traces:
        if trace.converged:
            distance = lift_equivariance(f3, trace.word, str(rng.choice(f3.alphabet)), theta, full)
            equivariance.append(distance)
    equivariance = [np.inf if distance is None else distance for distance in equivariance]

    element = f3.evaluate('ab' * 6)
    quint = [float(quint_residual(f3.letter(letter), [element], full)[0])
             for letter in f3.alphabet]
    contraction, rates = [], {}
    for label in f3.labels:
        try:
            trace = north_south_trace(f3.letter(label), random_flag(rng, 3), 12)
        except NotTransverse:
            continue
        contraction.append(trace['distances'][-1])
        rates[label] = {'rate': trace['rate'], 'expected': trace['expected_rate']}
    return [
        _check('conical_convergence_F3', misses, 0.0),
        _check('lift_equivariance_F3', equivariance, 1e-6),
        _check('quint_limit_F3', np.nan_to_num(quint, nan=np.inf), 1e-3),
        _check('north_south_F3', contraction, 1e-8, rates=rates),
    ]

def _shadow_checks(f2, max_len, epsilon, R, method):
    """ Stability of the Shadow Lemma constant from the ball of radius
        max_len - 2 to max_len, and conformality of the Patterson measure
    """
    orbit, phi, full = enumerate_orbit(f2, max_len), hilbert_functional(3), RootSubset.full(3)
    estimate = critical_exponent(orbit, phi, method)
    s = estimate.delta_hat + epsilon
    constants = []
    for length in (max_len - 2, max_len):
        ball = orbit.truncate(length)
        measure = patterson_construct(ball, phi, s, full, estimate.delta_hat)
        constants.append(shadow_lemma_report(measure, ball, R, s, phi, limit=100)['C_hat'])
    growth = np.inf if None in constants else constants[1] / constants[0]

    residuals = []
    for label in f2.labels:
        try:
            report = conformality_residual(measure, f2.letter(label), R=R)
        except InsufficientMatchedMass:
            residuals.append(np.inf)
            continue
        residuals.append(report['median_abs'])
    return [
        _check('shadow_lemma_growth_F2', [growth], 2.0, constants=constants),
        _check('conformality_F2', residuals, 0.5),
    ]

def _exponent_checks(rng, samples, max_len, hilbert_len, method):
    """ Hilbert geometry of the Klein disk against the Cartan side of F2, and
        the middle eigenvalues and convexity gap of F3
    """
    agreement = pslab_settings.ESTIMATOR_NOISE['agreement']
    domain, basepoint, phi = Ball([0, 0], 1), [0.0, 0.0], hilbert_functional(3)
    with mp.workdps(pslab_settings.HILBERT_DPS):
        klein = klein_generators()
        estimate = hilbert_critical_exponent(domain, klein, basepoint, hilbert_len)
        positions = orbit_positions(domain, klein, basepoint, hilbert_len)
    delta = estimate.delta_hat

    constant = 2 * delta * np.exp(2 * delta)
    violations = []
    for _ in range(min(samples, 5)):
        p = _disk_point(rng, 2, 0.5)
        q = ray_point(domain, p, _boundary_point(rng, 2), rng.uniform(0.05, 1.0))
        variation = kaimanovich_nu(positions, delta, p).total_variation(
            kaimanovich_nu(positions, delta, q))
        violations.append(max(0.0, variation - constant * hilbert_distance(domain, p, q)))

    f2 = load_fixture('F2')
    # the Klein disk distance from the centre is phi_H(kappa), so both regressions see one set
    hilbert_orbit = enumerate_orbit(f2, hilbert_len)
    cartan = critical_exponent(hilbert_orbit, phi, COUNT_REGRESSION)
    f2_orbit = enumerate_orbit(f2, max_len)
    sl2_orbit = enumerate_orbit(load_fixture('F2-SL2'), max_len)
    adjoint = critical_exponent(f2_orbit, phi, method).delta_hat
    doubled = critical_exponent(sl2_orbit, Functional.weight(2, 1) * 2, method).delta_hat

    f3_orbit = enumerate_orbit(load_fixture('F3'), max_len)
    entropy = convexity_gap(f3_orbit, phi, Functional.weight(3, 1), Functional.weight(3, 2),
                            0.5, 0.5, method)
    return [
        _check('hilbert_entropy_bound_F2', [max(0.0, delta - 1.0)], agreement, delta_hat=delta),
        _check('kaimanovich_bound_F2', violations, 1e-12),
        _check('hilbert_cartan_exponent_F2', [abs(cartan.delta_hat - delta)], agreement),
        _check('sl2_so21_exponent', [abs(adjoint - doubled)], agreement),
        _check('middle_eigenvalues_F2', [middle_eigenvalue_deviation(f2_orbit)['deviation']], 1e-6),
        _check('middle_eigenvalues_F3',
               [max(0.0, 0.1 - middle_eigenvalue_deviation(f3_orbit)['deviation'])], 0.0),
        _check('convexity_harmonic_F3', [max(0.0, -entropy.gap)], agreement, gap=entropy.gap),
        _check('convexity_strict_F3', [max(0.0, 2 * entropy.stderr - entropy.gap)], 0.0,
               gap=entropy.gap, stderr=entropy.stderr),
    ]

@subcommand('selftest')
def run_selftest(experiment):
    rng, samples = experiment.rng, experiment.config['samples']
    checks = []
    for dim in (3, 4):
        errors, additivity, factorizations, hopf_errors, witness = [], [], [], [], []
        for _ in range(samples):
            g, h = random_sl(rng, dim), random_sl(rng, dim)
            errors.append((g.inv().cartan - opposition(g.cartan)).sup_norm())
            x = random_flag(rng, dim)
            additivity.append((iwasawa_cocycle(g * h, x) - iwasawa_cocycle(g, translate(h, x))
                               - iwasawa_cocycle(h, x)).sup_norm())
            factorizations.append((iwasawa_cocycle(g, x)
                                   - iwasawa_cocycle(g, x, method='qr')).sup_norm())
            hopf_errors.append(hopf_action_check(g, h))
            xi, eta = random_flag(rng, dim), random_flag(rng, dim)
            base = construct_witness(xi, eta)
            first = TransversePair(xi, eta, base)
            second = TransversePair(xi, eta, base * random_diagonal(rng, dim))
            witness.append((gromov_product(first) - gromov_product(second)).sup_norm())
        identity = pslab_settings.IDENTITY_TOLERANCE
        checks.append(_check('kappa_inverse_d%d' % dim, errors, identity))
        checks.append(_check('cocycle_additivity_d%d' % dim, additivity,
                             pslab_settings.SUM_TOLERANCE))
        checks.append(_check('cocycle_qr_d%d' % dim, factorizations,
                             pslab_settings.COMPOUND_TOLERANCE))
        checks.append(_check('hopf_action_d%d' % dim, hopf_errors, identity))
        checks.append(_check('gromov_witness_d%d' % dim, witness, identity))

    f3 = load_fixture('F3')
    phi = hilbert_functional(3)
    residuals = []
    for _ in range(samples):
        pair = TransversePair(random_flag(rng, 3), random_flag(rng, 3))
        word = random_reduced_word(rng, f3.alphabet, int(rng.integers(1, 4)))
        try:
            residuals.append(invariance_residual(f3.evaluate(word), pair, phi))
        except TransversalityLost:
            continue
    checks.append(_check('bms_invariance_F3', residuals, 1e-7))

    slack, duality, overlap = [], [], []
    for _ in range(samples):
        dim = int(rng.integers(4, 8))
        point = _chamber_point(rng, dim)
        p = int(rng.integers(1, dim - 1))
        slack.append(abs(functional_comparison(point, dim, p)['slack']
                         - comparison_closed_form(point, p)))
        duality.append(0.0 if istar(phi_p(dim, p)) == phi_bar_p(dim, p) else 1.0)
        overlap.append(abs(functional_comparison(_chamber_point(rng, 4), 4, 2)['slack']))
    checks.append(_check('functional_comparison', slack, 1e-10))
    checks.append(_check('functional_comparison_d4_p2', overlap, 1e-10))
    checks.append(_check('istar_phi_p', duality, 0.0))

    ball = Ball([0, 0], 1)
    radial = []
    for _ in range(samples):
        x = _disk_point(rng, 2, 0.99)
        radial.append(abs(hilbert_distance(ball, [0, 0], x) - np.arctanh(np.linalg.norm(x))))
    checks.append(_check('hilbert_radial', radial, 1e-10))

    config = experiment.config
    checks.extend(_dynamics_checks(rng, samples, config['track_length']))
    checks.extend(_shadow_checks(load_fixture('F2'), config['max_len'], min(config['epsilons']),
                                 config['radii'][0], experiment.method))
    checks.extend(_exponent_checks(rng, samples, config['max_len'], config['hilbert_len'],
                                   experiment.method))

    failed = [check['name'] for check in checks if not check['passed']]
    if failed:
        logger.warning('Self test failures: %s', ', '.join(failed))
    return {'checks': checks, 'passed': not failed, 'failed': failed}

#===============================================================================

def run(name, config, out='.', output_format='json', jobs=1, stdout=None):
    """ Validate config, run a subcommand and write its reports into out.
        Returns the exit status: 0 on success, 1 when a selftest check fails,
        2 on an invalid config and 3 on a pslab error.
    """
    if name not in SUBCOMMANDS:
        raise ValueError('Unknown subcommand %r, choose among %s' % (name, ', '.join(sorted(SUBCOMMANDS))))
    form = ExperimentConfig(config, subcommand=name)
    if not form.is_valid():
        error = {'error': 'InvalidConfig', 'fields': form.errors.get_json_data()}
        write_json(error, output_path(out, 'error.json'))
        logger.error('Invalid config: %s', form.errors.as_text())
        return 2

    experiment = Experiment(name, form, jobs, out)
    header = report_header(name, experiment.description, experiment.seed)
    try:
        result = SUBCOMMANDS[name](experiment)
    except PslabError as exc:
        write_json(dict(exc.as_dict(), header=header), output_path(out, 'error.json'))
        logger.error('%s failed: %s', name, exc)
        return 3

    report = {'header': header, 'result': result}
    write_json(report, output_path(out, '%s.json' % name))
    paths = [write_csv(columns, rows, output_path(out, '%s-%s.csv' % (name, table)))
             for table, (columns, rows) in sorted(experiment.tables.items())]
    if stdout is not None:
        if output_format == 'text':
            stdout.write(render_text(report) + '\n')
        elif output_format == 'csv':
            stdout.write('\n'.join(paths) + '\n')
        else:
            stdout.write(to_json(report) + '\n')
    return 1 if result.get('passed') is False else 0
