""" Lie-theoretic coordinates for SL(d, R): Cartan and Jordan projections,
    roots, fundamental weights, the opposition involution and the projection
    pi_theta onto the face a_theta of the Cartan subspace.

    Every operation accepts either a plain matrix or any object exposing
    ``matrix`` and ``inverse`` attributes (see pslab.elements.GroupElement).
    When the inverse is known, the lower half of the singular spectrum and
    the trailing singular directions are read from it: products of many
    generators reach condition numbers far beyond double precision, and the
    inverse product is the only accurate source for the small singular values.
"""
import logging
import numpy as np
import scipy.linalg
from pslab.exceptions import SingularDecompositionFailure, SingularSystem
from pslab.settings import pslab_settings

__all__ = (
    'CartanVector',
    'Functional',
    'RootSubset',
    'decompose_stack',
    'cartan_decomposition',
    'cartan_projection',
    'cartan_projection_stack',
    'jordan_projection',
    'jordan_projection_stack',
    'opposition',
    'istar',
    'coweight',
    'pi_theta',
    'root_eval',
    'weight_eval',
    'functional_eval',
    'is_unimodular',
)

logger = logging.getLogger(__name__)

#===============================================================================
# Domain types

class CartanVector(object):
    """ A point diag(t1, ..., td) of the Cartan subspace, entries summing to 0.
        Tagged ``chamber`` when entries are non-increasing, which is what
        projections produce.
    """
    __slots__ = ('entries', 'chamber')

    def __init__(self, entries, chamber=False):
        entries = np.array(entries, dtype=float)
        if entries.ndim != 1 or entries.size < 2:
            raise ValueError('A Cartan vector needs at least two entries, got shape %r'
                             % (entries.shape,))
        scale = max(1.0, float(np.abs(entries).max()))
        if abs(entries.sum()) > pslab_settings.SUM_TOLERANCE * scale:
            raise ValueError('Entries of a Cartan vector must sum to zero, sum is %r'
                             % float(entries.sum()))
        if chamber and np.any(np.diff(entries) > pslab_settings.SUM_TOLERANCE * scale):
            raise ValueError('Chamber vectors must have non-increasing entries, got %r'
                             % entries.tolist())
        entries.setflags(write=False)
        self.entries = entries
        self.chamber = bool(chamber)

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros(dim), chamber=True)

    @property
    def dim(self):
        return self.entries.size

    def __len__(self):
        return self.entries.size

    def __iter__(self):
        return iter(self.entries.tolist())

    def __getitem__(self, index):
        return self.entries[index]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def __add__(self, other):
        return CartanVector(self.entries + np.asarray(other, dtype=float))
    __radd__ = __add__

    def __sub__(self, other):
        return CartanVector(self.entries - np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return CartanVector(np.asarray(other, dtype=float) - self.entries)

    def __neg__(self):
        return CartanVector(-self.entries)

    def __mul__(self, scalar):
        return CartanVector(self.entries * float(scalar), chamber=self.chamber and scalar >= 0)
    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return CartanVector(self.entries / float(scalar), chamber=self.chamber and scalar > 0)

    def __eq__(self, other):
        if not isinstance(other, CartanVector):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(tuple(self.entries.tolist()))

    def sup_norm(self):
        """ Norm used on the Cartan subspace throughout reports """
        return float(np.abs(self.entries).max())

    def distance(self, other):
        return float(np.abs(self.entries - np.asarray(other, dtype=float)).max())

    def tolist(self):
        return self.entries.tolist()

    def __repr__(self):
        return '<CartanVector%s %s>' % (' chamber' if self.chamber else '',
                                        np.array2string(self.entries, precision=6))


class Functional(object):
    """ A linear functional on the Cartan subspace, stored by its coefficients
        over the fundamental weights omega_1 ... omega_{d-1}.
    """
    __slots__ = ('weight_coeffs',)

    def __init__(self, weight_coeffs):
        coeffs = np.array(weight_coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ValueError('A functional needs at least one weight coefficient')
        coeffs.setflags(write=False)
        self.weight_coeffs = coeffs

    @classmethod
    def weight(cls, dim, index):
        """ The fundamental weight omega_index """
        _check_index(dim, index)
        coeffs = np.zeros(dim - 1)
        coeffs[index - 1] = 1.0
        return cls(coeffs)

    @classmethod
    def root(cls, dim, index):
        """ The simple root alpha_index = 2 omega_j - omega_{j-1} - omega_{j+1} """
        _check_index(dim, index)
        coeffs = np.zeros(dim - 1)
        coeffs[index - 1] = 2.0
        if index > 1:
            coeffs[index - 2] = -1.0
        if index < dim - 1:
            coeffs[index] = -1.0
        return cls(coeffs)

    @classmethod
    def from_diagonal(cls, coeffs):
        """ The functional diag(t) -> sum a_i t_i, defined modulo constants """
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(coeffs[:-1] - coeffs[1:])

    @property
    def dim(self):
        return self.weight_coeffs.size + 1

    def diagonal(self):
        """ Coefficients a with phi(diag(t)) = sum a_i t_i and a_d = 0 """
        return np.append(np.cumsum(self.weight_coeffs[::-1])[::-1], 0.0)

    def __call__(self, H):
        """ Evaluate on a Cartan vector, or row-wise on an array of them """
        values = np.asarray(H, dtype=float)
        if values.shape[-1] != self.dim:
            raise ValueError('Functional on a_%d evaluated on a vector of length %d'
                             % (self.dim, values.shape[-1]))
        result = np.cumsum(values, axis=-1)[..., :-1] @ self.weight_coeffs
        return float(result) if result.ndim == 0 else result

    def __add__(self, other):
        return Functional(self.weight_coeffs + other.weight_coeffs)

    def __sub__(self, other):
        return Functional(self.weight_coeffs - other.weight_coeffs)

    def __neg__(self):
        return Functional(-self.weight_coeffs)

    def __mul__(self, scalar):
        return Functional(self.weight_coeffs * float(scalar))
    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Functional(self.weight_coeffs / float(scalar))

    def __eq__(self, other):
        if not isinstance(other, Functional):
            return NotImplemented
        return np.array_equal(self.weight_coeffs, other.weight_coeffs)

    def __hash__(self):
        return hash(tuple(self.weight_coeffs.tolist()))

    def istar(self):
        return istar(self)

    def tolist(self):
        return self.weight_coeffs.tolist()

    def __repr__(self):
        return '<Functional %s>' % ' + '.join('%g w%d' % (c, j) for j, c in
                                             enumerate(self.weight_coeffs.tolist(), 1) if c)


class RootSubset(object):
    """ A non-empty subset theta of the simple roots {alpha_1, ..., alpha_{d-1}},
        stored as sorted indices.
    """
    __slots__ = ('dim', 'indices')

    def __init__(self, dim, indices):
        indices = tuple(sorted(set(int(j) for j in indices)))
        if not indices:
            raise ValueError('A root subset must not be empty')
        for index in indices:
            _check_index(dim, index)
        self.dim = int(dim)
        self.indices = indices

    @classmethod
    def full(cls, dim):
        return cls(dim, range(1, dim))

    @property
    def is_full(self):
        return len(self.indices) == self.dim - 1

    def istar(self):
        """ The opposite subset i*theta, alpha_j -> alpha_{d-j} """
        return RootSubset(self.dim, (self.dim - j for j in self.indices))

    def __contains__(self, index):
        return index in self.indices

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __eq__(self, other):
        if not isinstance(other, RootSubset):
            return NotImplemented
        return self.dim == other.dim and self.indices == other.indices

    def __hash__(self):
        return hash((self.dim, self.indices))

    def tolist(self):
        return list(self.indices)

    def __repr__(self):
        return '<RootSubset d=%d %s>' % (self.dim, list(self.indices))

#===============================================================================
# Factorizations

def _check_index(dim, index):
    if not 1 <= index <= dim - 1:
        raise IndexError('Root and weight indices run from 1 to %d, got %r' % (dim - 1, index))

def _matrix_pair(g):
    """ Return (matrix, inverse-or-None) for a matrix or a group element """
    matrix = np.asarray(getattr(g, 'matrix', g), dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError('Expected a square matrix, got shape %r' % (matrix.shape,))
    inverse = getattr(g, 'inverse', None)
    return matrix, (None if inverse is None else np.asarray(inverse, dtype=float))

def _svd(matrices):
    try:
        u, s, vt = np.linalg.svd(matrices)
    except np.linalg.LinAlgError as exc:
        raise SingularDecompositionFailure(str(exc))
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise SingularDecompositionFailure('singular or non-finite matrix')
    return u, s, vt

def _merge_frames(top, bottom):
    """ Orthonormal frame whose leading columns span ``top`` and whose trailing
        columns span ``bottom``; for odd d the middle column completes it.
    """
    d, h = top.shape[-2], top.shape[-1]
    bottom = bottom - top @ (np.swapaxes(top, -1, -2) @ bottom)
    q, _ = np.linalg.qr(bottom[..., ::-1])
    bottom = q[..., ::-1]
    columns = [top]
    if d > 2 * h:
        known = np.concatenate([top, bottom], axis=-1)
        _, _, wt = np.linalg.svd(np.swapaxes(known, -1, -2))
        columns.append(wt[..., -1, :, None])
    columns.append(bottom)
    return np.concatenate(columns, axis=-1)

def _merge_spectrum(top, inverse_top, d):
    """ Log-spectrum from the leading values of g and of g^-1 """
    h = d // 2
    logs = np.empty(top.shape[:-1] + (d,))
    logs[..., :h] = np.log(top[..., :h])
    logs[..., d - h:] = -np.log(inverse_top[..., :h])[..., ::-1]
    if d % 2:
        logs[..., h] = -(logs[..., :h].sum(axis=-1) + logs[..., d - h:].sum(axis=-1))
    return logs

def _chamber_sort(logs, *frames):
    logs = logs - logs.mean(axis=-1, keepdims=True)
    order = np.argsort(-logs, axis=-1, kind='stable')
    logs = np.take_along_axis(logs, order, axis=-1)
    frames = tuple(np.take_along_axis(frame, order[..., None, :], axis=-1) for frame in frames)
    return (logs,) + frames

def decompose_stack(matrices, inverses=None):
    """ Cartan decomposition of a stack of matrices.
        Returns (K, H, V) with matrices = K @ diag(exp(H)) @ V^T, K and V
        orthogonal, H chamber-ordered and summing to zero.
    """
    matrices = np.asarray(matrices, dtype=float)
    d = matrices.shape[-1]
    u, s, vt = _svd(matrices)
    if inverses is None:
        logs, k, v = _chamber_sort(np.log(s), u, np.swapaxes(vt, -1, -2))
        return k, logs, v

    inverses = np.asarray(inverses, dtype=float)
    iu, is_, ivt = _svd(inverses)
    h = d // 2
    logs = _merge_spectrum(s, is_, d)
    k = _merge_frames(u[..., :, :h], np.swapaxes(ivt[..., :h, :], -1, -2)[..., ::-1])
    v = _merge_frames(np.swapaxes(vt[..., :h, :], -1, -2), iu[..., :, :h][..., ::-1])
    v = _align_signs(matrices, inverses, k, v)
    logs, k, v = _chamber_sort(logs, k, v)
    return k, logs, v

def _align_signs(matrices, inverses, k, v):
    """ Flip columns of v so that k_i^T g v_i > 0, read from g or from g^-1,
        whichever resolves column i better.
    """
    forward = np.einsum('...ji,...jl,...li->...i', k, matrices, v)
    backward = np.einsum('...ji,...jl,...li->...i', v, inverses, k)
    forward_scale = np.abs(matrices).max(axis=(-2, -1))[..., None]
    backward_scale = np.abs(inverses).max(axis=(-2, -1))[..., None]
    use_forward = np.abs(forward) * backward_scale >= np.abs(backward) * forward_scale
    signs = np.sign(np.where(use_forward, forward, backward))
    signs[signs == 0] = 1.0
    return v * signs[..., None, :]

def cartan_decomposition(g):
    """ Return (k, H, l) with g = k exp(H) l, k and l orthogonal """
    matrix, inverse = _matrix_pair(g)
    k, logs, v = decompose_stack(matrix[None], None if inverse is None else inverse[None])
    return k[0], CartanVector(logs[0], chamber=True), v[0].T

def cartan_projection_stack(matrices, inverses=None):
    return decompose_stack(matrices, inverses)[1]

def cartan_projection(g):
    """ kappa(g): descending logs of the singular values of g """
    matrix, inverse = _matrix_pair(g)
    logs = cartan_projection_stack(matrix[None], None if inverse is None else inverse[None])
    return CartanVector(logs[0], chamber=True)

def jordan_projection_stack(matrices, inverses=None):
    matrices = np.asarray(matrices, dtype=float)
    d = matrices.shape[-1]
    try:
        moduli = -np.sort(-np.abs(np.linalg.eigvals(matrices)), axis=-1)
        if inverses is None:
            logs = np.log(moduli)
        else:
            inverse_moduli = -np.sort(-np.abs(np.linalg.eigvals(np.asarray(inverses, float))),
                                      axis=-1)
            logs = _merge_spectrum(moduli, inverse_moduli, d)
    except np.linalg.LinAlgError as exc:
        raise SingularDecompositionFailure(str(exc))
    logs = logs - logs.mean(axis=-1, keepdims=True)
    return -np.sort(-logs, axis=-1)

def jordan_projection(g):
    """ lambda(g): descending logs of the eigenvalue moduli of g """
    matrix, inverse = _matrix_pair(g)
    logs = jordan_projection_stack(matrix[None], None if inverse is None else inverse[None])
    return CartanVector(logs[0], chamber=True)

def is_unimodular(matrix, tolerance=None):
    if tolerance is None:
        tolerance = pslab_settings.DETERMINANT_TOLERANCE
    return abs(np.linalg.det(np.asarray(matrix, dtype=float)) - 1.0) <= tolerance

#===============================================================================
# Roots, weights and functionals

def opposition(H):
    """ i(diag(t1, ..., td)) = diag(-td, ..., -t1) """
    entries = np.asarray(H, dtype=float)
    chamber = isinstance(H, CartanVector) and H.chamber
    return CartanVector(-entries[::-1], chamber=chamber)

def istar(phi):
    """ (i* phi)(H) = phi(i H); reverses the weight coefficients """
    return Functional(phi.weight_coeffs[::-1])

def root_eval(index, H):
    """ alpha_j(diag(t)) = t_j - t_{j+1} """
    entries = np.asarray(H, dtype=float)
    _check_index(entries.shape[-1], index)
    return entries[..., index - 1] - entries[..., index]

def weight_eval(index, H):
    """ omega_j(diag(t)) = t_1 + ... + t_j """
    entries = np.asarray(H, dtype=float)
    _check_index(entries.shape[-1], index)
    return entries[..., :index].sum(axis=-1)

def functional_eval(phi, H):
    return phi(H)

def coweight(dim, index):
    """ Fundamental coweight H_j, the vector with alpha_i(H_j) = delta_ij """
    _check_index(dim, index)
    vector = np.full(dim, -index / dim)
    vector[:index] = (dim - index) / dim
    return vector

def pi_theta(H, theta):
    """ Projection onto a_theta matching omega_j for j in theta.
        Solved in the coweight basis of a_theta, where the system matrix is the
        inverse Cartan matrix restricted to theta.
        A stack of vectors gives a plain array of projections.
    """
    entries = np.asarray(H, dtype=float)
    dim = entries.shape[-1]
    if theta.dim != dim:
        raise ValueError('Root subset for d=%d applied to a vector of length %d'
                         % (theta.dim, dim))
    indices = list(theta)
    basis = np.array([coweight(dim, j) for j in indices])
    system = np.array([[weight_eval(j, row) for row in basis] for j in indices])
    rhs = np.stack([weight_eval(j, entries) for j in indices], axis=-1)
    try:
        solution = scipy.linalg.solve(system, rhs.reshape(-1, len(indices)).T, assume_a='pos')
    except (np.linalg.LinAlgError, ValueError):
        raise SingularSystem(theta.tolist())
    projected = np.einsum('...i,ij->...j', solution.T.reshape(rhs.shape), basis)
    return CartanVector(projected) if projected.ndim == 1 else projected
