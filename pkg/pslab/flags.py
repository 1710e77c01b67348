""" Flag manifolds F_theta of SL(d, R).

    A flag is stored as an orthonormal frame; the span of its first j columns
    is the j-dimensional subspace of the flag, and only the dimensions listed
    in theta are meaningful. Frames are canonicalized column by column (the
    entry of largest magnitude is made positive), which picks one
    representative per coset of the diagonal sign group M.

    The Iwasawa cocycle is computed from the Cartan decomposition of g through
    exterior powers: omega_j(B(g, x)) is the log of the j-volume of g applied
    to the first j columns of the frame, expanded with Cauchy-Binet over the
    singular directions of g. This stays accurate when the singular values of
    g spread far beyond double precision, where a QR of g times the frame
    does not.
"""
import itertools
import logging
import numpy as np
from scipy.special import logsumexp
from pslab.cartan import CartanVector, RootSubset, decompose_stack, opposition, pi_theta
from pslab.elements import GroupElement, as_element
from pslab.exceptions import DegenerateGap, NotTransverse, NoWitness, TransversalityLost
from pslab.settings import pslab_settings

__all__ = (
    'PartialFlag',
    'TransversePair',
    'canonicalize',
    'longest_element',
    'standard_flag',
    'opposite_flag',
    'u_theta',
    'u_theta_stack',
    'translate',
    'translate_frames',
    'transversality_determinants',
    'transversality_stack',
    'transverse',
    'cocycle_weights',
    'decomposed_cocycle_weights',
    'iwasawa_cocycle',
    'iwasawa_cocycle_stack',
    'partial_iwasawa',
    'construct_witness',
    'gromov_product',
    'hopf',
    'flag_distance',
    'flag_distance_stack',
    'attracting_flag',
    'quint_residual',
    'north_south_trace',
)

logger = logging.getLogger(__name__)

# Below this spread of log singular values, translations use a plain QR.
_QR_SPREAD = 8.0

#===============================================================================
# Domain types

def canonicalize(frames):
    """ Flip column signs so each column's first entry of largest magnitude is positive """
    frames = np.array(frames, dtype=float)
    pivots = np.take_along_axis(frames, np.argmax(np.abs(frames), axis=-2)[..., None, :], axis=-2)
    return frames * np.where(pivots < 0, -1.0, 1.0)


class PartialFlag(object):
    """ A point of F_theta, represented by a canonical orthonormal frame """
    __slots__ = ('theta', 'frame')

    def __init__(self, theta, frame, check=True):
        frame = canonicalize(frame)
        if frame.shape != (theta.dim, theta.dim):
            raise ValueError('Flag frame of shape %r does not match d=%d'
                             % (frame.shape, theta.dim))
        if check and np.abs(frame.T @ frame - np.eye(theta.dim)).max() > pslab_settings.SUM_TOLERANCE:
            raise ValueError('Flag frames must be orthonormal')
        frame.setflags(write=False)
        self.theta = theta
        self.frame = frame

    @property
    def dim(self):
        return self.theta.dim

    @property
    def is_full(self):
        return self.theta.is_full

    def subspace(self, index):
        """ Orthonormal basis of the index-dimensional subspace """
        return self.frame[:, :index]

    def projector(self, index):
        basis = self.frame[:, :index]
        return basis @ basis.T

    def restrict(self, theta):
        """ Forget the subspaces outside theta, which must be a subset of ours """
        if not set(theta).issubset(self.theta):
            raise ValueError('Cannot restrict a flag on %s to %s' % (self.theta, theta))
        return PartialFlag(theta, self.frame, check=False)

    def lift(self, rng=None):
        """ A full flag refining this one.
            Without rng, the stored frame itself; with rng, each block of
            columns between consecutive theta dimensions is rotated randomly.
        """
        frame = np.array(self.frame)
        if rng is not None:
            bounds = [0] + list(self.theta) + [self.dim]
            for low, high in zip(bounds[:-1], bounds[1:]):
                if high - low > 1:
                    rotation, _ = np.linalg.qr(rng.standard_normal((high - low, high - low)))
                    frame[:, low:high] = frame[:, low:high] @ rotation
        return PartialFlag(RootSubset.full(self.dim), frame, check=False)

    def __eq__(self, other):
        if not isinstance(other, PartialFlag):
            return NotImplemented
        if self.theta != other.theta:
            return False
        return flag_distance(self, other) <= pslab_settings.FLAG_TOLERANCE

    __hash__ = None

    def as_dict(self):
        return {'theta': self.theta.tolist(), 'frame': self.frame.tolist()}

    @classmethod
    def from_dict(cls, data):
        frame = np.asarray(data['frame'], dtype=float)
        return cls(RootSubset(frame.shape[0], data['theta']), frame)

    def coordinates(self):
        """ Upper triangles of the span projectors for j in theta, for tabular export """
        rows, cols = np.triu_indices(self.dim)
        return np.concatenate([self.projector(j)[rows, cols] for j in self.theta])

    def __repr__(self):
        return '<PartialFlag d=%d theta=%s>' % (self.dim, list(self.theta))


class TransversePair(object):
    """ A transverse pair (xi, eta) in F_theta x F_{i* theta}, optionally with
        a witness g such that g P_theta = xi and g w0 P_{i* theta} = eta.
    """
    __slots__ = ('xi', 'eta', 'witness')

    def __init__(self, xi, eta, witness=None):
        if eta.theta != xi.theta.istar():
            raise ValueError('Transverse pairs live in F_theta x F_{i* theta}, got %s and %s'
                             % (xi.theta, eta.theta))
        determinants = transversality_determinants(xi, eta)
        floor = pslab_settings.TRANSVERSALITY_FLOOR
        if min(abs(value) for value in determinants) <= floor:
            raise NotTransverse([abs(value) for value in determinants], floor)
        self.xi = xi
        self.eta = eta
        self.witness = None if witness is None else as_element(witness)

    @classmethod
    def standard(cls, dim):
        return cls(standard_flag(dim), opposite_flag(dim), GroupElement.identity(dim))

    def swap(self):
        """ (eta, xi), with witness g w0 """
        witness = None
        if self.witness is not None:
            w0 = longest_element(self.xi.dim)
            witness = self.witness * GroupElement(w0, np.linalg.inv(w0))
        return TransversePair(self.eta, self.xi, witness)

    def translate(self, g):
        g = as_element(g)
        xi, eta = translate(g, self.xi), translate(g, self.eta)
        determinant = min(abs(value) for value in transversality_determinants(xi, eta))
        if determinant <= pslab_settings.TRANSVERSALITY_FLOOR:
            raise TransversalityLost(determinant, pslab_settings.TRANSVERSALITY_FLOOR)
        witness = None if self.witness is None else g * self.witness
        return TransversePair(xi, eta, witness)

    def as_dict(self):
        return {'xi': self.xi.as_dict(), 'eta': self.eta.as_dict()}

    def __repr__(self):
        return '<TransversePair d=%d theta=%s>' % (self.xi.dim, list(self.xi.theta))

#===============================================================================
# Standard flags

def longest_element(dim):
    """ Antidiagonal representative of w0 in SO(d).
        Signs satisfy s_i = s_{d+1-i} so that w0 squares to the identity; for
        d = 2 mod 4 no such choice has determinant 1 and the representative
        squares to -I instead.
    """
    signs = np.ones(dim)
    if dim % 2:
        half = dim // 2
        if (dim * (dim - 1) // 2) % 2:
            signs[half] = -1.0
    elif (dim * (dim - 1) // 2) % 2:
        signs = (-1.0) ** np.arange(dim)
    w0 = np.zeros((dim, dim))
    w0[np.arange(dim), np.arange(dim)[::-1]] = signs
    return w0

def standard_flag(dim, theta=None):
    """ P_theta, the coordinate flag <e1> < <e1, e2> < ... """
    return PartialFlag(theta or RootSubset.full(dim), np.eye(dim), check=False)

def opposite_flag(dim, theta=None):
    """ w0 P_theta, the coordinate flag <ed> < <ed, ed-1> < ... """
    return PartialFlag(theta or RootSubset.full(dim), longest_element(dim), check=False)

#===============================================================================
# U_theta and translation

def _check_gaps(logs, theta):
    floor = pslab_settings.GAP_FLOOR
    gaps = np.stack([logs[..., j - 1] - logs[..., j] for j in theta], axis=-1)
    return gaps, np.all(gaps > floor, axis=-1)

def u_theta_stack(matrices, inverses, theta):
    """ Frames of U_theta for a stack of matrices.
        Returns (frames, logs, valid) where valid flags the matrices whose
        singular value gaps in theta exceed the gap floor.
    """
    k, logs, _ = decompose_stack(matrices, inverses)
    _, valid = _check_gaps(logs, theta)
    return canonicalize(k), logs, valid

def u_theta(g, theta):
    """ U_theta(g) = k P_theta for a Cartan decomposition g = k exp(H) l """
    g = as_element(g)
    frames, logs, valid = u_theta_stack(g.matrix[None], g.inverse[None], theta)
    if not valid[0]:
        gaps, _ = _check_gaps(logs[0], theta)
        position = int(np.argmax(gaps <= pslab_settings.GAP_FLOOR))
        raise DegenerateGap(list(theta)[position], float(gaps[position]),
                            pslab_settings.GAP_FLOOR)
    return PartialFlag(theta, frames[0], check=False)

def _unit_lower(matrices):
    """ Unit lower triangular L and pivots of an unpivoted LU factorization """
    upper = np.array(matrices, dtype=float)
    dim = upper.shape[-1]
    lower = np.broadcast_to(np.eye(dim), upper.shape).copy()
    for column in range(dim - 1):
        factors = upper[..., column + 1:, column] / upper[..., column, None, column]
        lower[..., column + 1:, column] = factors
        upper[..., column + 1:, :] -= factors[..., :, None] * upper[..., column, None, :]
    return lower, np.diagonal(upper, axis1=-2, axis2=-1)

def translate_frames(g, frames):
    """ Frames of g x for a stack of flag frames x """
    g = as_element(g)
    frames = np.asarray(frames, dtype=float)
    k, logs, v = decompose_stack(g.matrix[None], g.inverse[None])
    k, logs, v = k[0], logs[0], v[0]
    if logs[0] - logs[-1] <= _QR_SPREAD:
        q, _ = np.linalg.qr(g.matrix @ frames)
        return canonicalize(q)

    # g F = k exp(H) L U; the spans of k exp(H) L exp(-H) are those of g F
    with np.errstate(divide='ignore', invalid='ignore'):
        lower, pivots = _unit_lower(v.T @ frames)
    dim = logs.size
    below = np.tril(np.ones((dim, dim), dtype=bool))
    scaling = np.exp(np.where(below, logs[:, None] - logs[None, :], 0.0))
    scaled = lower * scaling
    good = np.all(np.isfinite(scaled), axis=(-2, -1)) & np.all(np.abs(pivots) > 0, axis=-1)
    q, _ = np.linalg.qr(k @ np.where(good[..., None, None], scaled, np.eye(dim)))
    if not np.all(good):
        logger.debug('Falling back to plain QR for %d non-generic frames', int((~good).sum()))
        fallback, _ = np.linalg.qr(g.matrix @ frames)
        q = np.where(good[..., None, None], q, fallback)
    return canonicalize(q)

def translate(g, x):
    """ g x for a partial flag x """
    return PartialFlag(x.theta, translate_frames(g, x.frame[None])[0], check=False)

#===============================================================================
# Transversality

def transversality_stack(frames_x, frames_y, theta):
    """ Smallest |det| over j in theta of [x_j | y_{d-j}] """
    frames_x = np.asarray(frames_x, dtype=float)
    frames_y = np.asarray(frames_y, dtype=float)
    frames_x, frames_y = np.broadcast_arrays(frames_x, frames_y)
    dim = theta.dim
    values = [np.abs(np.linalg.det(np.concatenate([frames_x[..., :, :j],
                                                   frames_y[..., :, :dim - j]], axis=-1)))
              for j in theta]
    return np.min(values, axis=0)

def transversality_determinants(x, y):
    dim = x.dim
    return [float(np.linalg.det(np.hstack([x.frame[:, :j], y.frame[:, :dim - j]])))
            for j in x.theta]

def transverse(x, y):
    """ True iff x in F_theta and y in F_{i* theta} are in general position """
    if y.theta != x.theta.istar():
        raise ValueError('Transversality compares F_theta with F_{i* theta}, got %s and %s'
                         % (x.theta, y.theta))
    floor = pslab_settings.TRANSVERSALITY_FLOOR
    return all(abs(value) > floor for value in transversality_determinants(x, y))

#===============================================================================
# Iwasawa cocycle

def decomposed_cocycle_weights(logs, v, frames):
    """ omega_j(B(g, x)) for j = 1 .. d-1, g = k exp(logs) v^T, x given by frames """
    dim = logs.shape[-1]
    y = np.swapaxes(v, -1, -2) @ frames
    weights = []
    with np.errstate(divide='ignore'):
        for j in range(1, dim):
            terms = []
            for subset in itertools.combinations(range(dim), j):
                rows = list(subset)
                minor = np.linalg.det(y[..., rows, :j])
                terms.append(2.0 * logs[..., rows].sum(axis=-1) + np.log(minor * minor))
            weights.append(0.5 * logsumexp(np.stack(terms), axis=0))
    return np.stack(weights, axis=-1)

def cocycle_weights(g, frames):
    """ omega_j(B(g, x)) for a stack of full flag frames, shape (..., d-1) """
    g = as_element(g)
    _, logs, v = decompose_stack(g.matrix[None], g.inverse[None])
    return decomposed_cocycle_weights(logs[0], v[0], np.asarray(frames, dtype=float))

def _weights_to_entries(weights):
    zeros = np.zeros(weights.shape[:-1] + (1,))
    return np.diff(np.concatenate([zeros, weights, zeros], axis=-1), axis=-1)

def iwasawa_cocycle_stack(g, frames):
    """ B(g, x) for a stack of full flag frames, shape (..., d) """
    return _weights_to_entries(cocycle_weights(g, frames))

def iwasawa_cocycle(g, x, method='exterior'):
    """ B(g, x), the A-part of g k in KAN where x = k P.
        method='qr' reads it off the triangular factor of g k directly, which
        is only accurate for well-conditioned g.
    """
    if not x.is_full:
        raise ValueError('The Iwasawa cocycle is defined on full flags, use partial_iwasawa')
    if method == 'qr':
        _, r = np.linalg.qr(np.asarray(getattr(g, 'matrix', g), dtype=float) @ x.frame)
        entries = np.log(np.abs(np.diag(r)))
        return CartanVector(entries - entries.mean())
    if method != 'exterior':
        raise ValueError('Unknown Iwasawa method %r' % method)
    return CartanVector(iwasawa_cocycle_stack(g, x.frame[None])[0])

def partial_iwasawa(g, x, theta=None, rng=None):
    """ B_theta(g, x) = pi_theta B(g, x~) for any full flag x~ refining x """
    theta = theta or x.theta
    return pi_theta(iwasawa_cocycle(g, x.lift(rng)), theta)

#===============================================================================
# Gromov product and Hopf coordinates

def construct_witness(xi, eta):
    """ g with g P = xi and g w0 P = eta, columns spanning xi_i meet eta_{d-i+1} """
    dim = xi.dim
    columns = []
    for i in range(1, dim + 1):
        system = np.hstack([xi.frame[:, :i], -eta.frame[:, :dim - i + 1]])
        _, values, vt = np.linalg.svd(system)
        # full rank d leaves a one-dimensional kernel
        if values[-1] <= pslab_settings.TRANSVERSALITY_FLOOR:
            raise NoWitness()
        columns.append(xi.frame[:, :i] @ vt[-1, :i])
    witness = np.column_stack(columns)
    determinant = np.linalg.det(witness)
    if not np.isfinite(determinant) or abs(determinant) <= pslab_settings.TRANSVERSALITY_FLOOR:
        raise NoWitness()
    witness[:, 0] /= determinant
    return GroupElement(witness)

def gromov_product(pair):
    """ G(xi, eta) = -(B(g^-1, xi) + i B(g^-1, eta)) for a witness g """
    if not pair.xi.is_full:
        raise ValueError('Gromov products are defined on full flags')
    witness = pair.witness if pair.witness is not None else construct_witness(pair.xi, pair.eta)
    inverse = witness.inv()
    frames = np.stack([pair.xi.frame, pair.eta.frame])
    b_xi, b_eta = iwasawa_cocycle_stack(inverse, frames)
    return CartanVector(-(b_xi + np.asarray(opposition(CartanVector(b_eta)))))

def hopf(g):
    """ Hopf coordinates (g P, g w0 P, B(g, P)) of g M """
    g = as_element(g)
    dim = g.dim
    frames = translate_frames(g, np.stack([np.eye(dim), longest_element(dim)]))
    full = RootSubset.full(dim)
    return (PartialFlag(full, frames[0], check=False),
            PartialFlag(full, frames[1], check=False),
            CartanVector(iwasawa_cocycle_stack(g, np.eye(dim)[None])[0]))

#===============================================================================
# Distances

def flag_distance_stack(frames_x, frames_y, theta):
    """ max over j in theta of the Frobenius distance of rank-j projectors """
    frames_x = np.asarray(frames_x, dtype=float)
    frames_y = np.asarray(frames_y, dtype=float)
    distances = []
    for j in theta:
        px = frames_x[..., :, :j] @ np.swapaxes(frames_x[..., :, :j], -1, -2)
        py = frames_y[..., :, :j] @ np.swapaxes(frames_y[..., :, :j], -1, -2)
        distances.append(np.sqrt(((px - py) ** 2).sum(axis=(-2, -1))))
    return np.max(distances, axis=0)

def flag_distance(x, y):
    if x.theta != y.theta:
        raise ValueError('Flag distance compares flags of the same type')
    return float(flag_distance_stack(x.frame, y.frame, x.theta))

#===============================================================================
# Dynamics

def _nested_frame(subspaces, dim):
    """ Orthonormal frame whose first j columns span each given j-dimensional subspace """
    frame = np.zeros((dim, 0))
    for basis in list(subspaces) + [np.eye(dim)]:
        remainder = basis - frame @ (frame.T @ basis)
        u, _, _ = np.linalg.svd(remainder)
        frame = np.hstack([frame, u[:, :basis.shape[1] - frame.shape[1]]])
    return frame

def attracting_flag(g, theta):
    """ The flag of F_theta spanned by the leading generalized eigenspaces of g.
        Raises DegenerateGap unless the eigenvalue moduli of g have a gap at
        every j in theta; the repelling flag is attracting_flag(g^-1, i* theta).
    """
    g = as_element(g)
    values, vectors = np.linalg.eig(g.matrix)
    order = np.argsort(-np.abs(values), kind='stable')
    values, vectors = values[order], vectors[:, order]
    logs = np.log(np.abs(values))
    for j in theta:
        if logs[j - 1] - logs[j] <= pslab_settings.GAP_FLOOR:
            raise DegenerateGap(j, float(logs[j - 1] - logs[j]), pslab_settings.GAP_FLOOR)
    duals = np.linalg.inv(vectors)
    subspaces = []
    for j in theta:
        # spectral projector onto the top j eigenvalues, real once the gap splits conjugates
        projector = np.real(vectors[:, :j] @ duals[:j, :])
        u, _, _ = np.linalg.svd(projector)
        subspaces.append(u[:, :j])
    return PartialFlag(theta, _nested_frame(subspaces, theta.dim), check=False)

def quint_residual(g, elements, theta):
    """ For each h in elements, the largest over j in theta of
        |omega_j(kappa(g^-1 h)) - omega_j(kappa(h)) - omega_j(B(g^-1, U_theta(h)))|.
        Along a conical sequence h_n the residual tends to zero. Entries are
        nan where U_theta(h) is undefined.
    """
    g = as_element(g)
    elements = [as_element(h) for h in elements]
    matrices = np.stack([h.matrix for h in elements])
    inverses = np.stack([h.inverse for h in elements])
    frames, logs, valid = u_theta_stack(matrices, inverses, theta)
    _, moved, _ = decompose_stack(g.inverse @ matrices, inverses @ g.matrix)
    columns = [j - 1 for j in theta]
    change = (np.cumsum(moved, axis=-1) - np.cumsum(logs, axis=-1))[..., columns]
    cocycle = cocycle_weights(g.inv(), frames)[..., columns]
    residuals = np.abs(change - cocycle).max(axis=-1)
    return np.where(valid, residuals, np.nan)

def north_south_trace(g, x, steps):
    """ flag_distance(g^n x, x+) for n = 0 .. steps, x+ the attracting flag of g.
        x must be transverse to the repelling flag. The contraction rate is
        fitted on the distances still above rounding and compared with
        exp(-min alpha_j(lambda(g))) over j in theta.
    """
    g = as_element(g)
    theta = x.theta
    attracting = attracting_flag(g, theta)
    repelling = attracting_flag(g.inv(), theta.istar())
    determinants = transversality_determinants(x, repelling)
    floor = pslab_settings.TRANSVERSALITY_FLOOR
    if min(abs(value) for value in determinants) <= floor:
        raise NotTransverse([abs(value) for value in determinants], floor)

    distances, current = [flag_distance(x, attracting)], x
    for _ in range(steps):
        current = translate(g, current)
        distances.append(flag_distance(current, attracting))
    distances = np.array(distances)
    resolved = np.flatnonzero(distances > pslab_settings.FLAG_TOLERANCE)
    rate = None
    if resolved.size >= 2:
        rate = float(np.exp(np.polyfit(resolved, np.log(distances[resolved]), 1)[0]))
    spectrum = np.asarray(g.jordan)
    expected = float(np.exp(-min(spectrum[j - 1] - spectrum[j] for j in theta)))
    logger.debug('North-south trace of %r: rate %s, expected %.3g', g, rate, expected)
    return {
        'word': g.word,
        'distances': distances.tolist(),
        'rate': rate,
        'expected_rate': expected,
        'attracting': attracting.as_dict(),
    }
