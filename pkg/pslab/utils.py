""" Miscellaneous standalone helpers: seeded randomness, random samples of
    SL(d, R) and flags, and the worker pool used by experiments.
"""
from concurrent.futures import ThreadPoolExecutor
import numpy as np
from scipy.stats import ortho_group
from pslab.cartan import RootSubset
from pslab.elements import GroupElement
from pslab.flags import PartialFlag

__all__ = (
    'make_rng',
    'random_orthogonal',
    'random_sl',
    'random_diagonal',
    'random_flag',
    'parallel_map',
)

#=============================================================================
# Random samples

def make_rng(seed):
    """ The only source of randomness; every random helper takes its output """
    return np.random.default_rng(seed)

def random_orthogonal(rng, dim):
    """ Haar-random element of SO(d) """
    matrix = ortho_group.rvs(dim, random_state=rng)
    if np.linalg.det(matrix) < 0:
        matrix[:, 0] = -matrix[:, 0]
    return matrix

def random_diagonal(rng, dim, scale=1.0):
    """ exp(H) for a random H in the Cartan subspace with entries of size ~scale """
    entries = rng.normal(scale=scale, size=dim)
    entries -= entries.mean()
    return GroupElement(np.diag(np.exp(entries)), np.diag(np.exp(-entries)))

def random_sl(rng, dim, scale=1.0):
    """ k exp(H) l with Haar k, l and Gaussian H, as a GroupElement """
    k, l = random_orthogonal(rng, dim), random_orthogonal(rng, dim)
    diagonal = random_diagonal(rng, dim, scale)
    return GroupElement(k @ diagonal.matrix @ l, l.T @ diagonal.inverse @ k.T)

def random_flag(rng, dim, theta=None):
    return PartialFlag(theta or RootSubset.full(dim), random_orthogonal(rng, dim))

#=============================================================================

def parallel_map(func, items, jobs=1):
    """ Ordered map over items, spread over a thread pool when jobs > 1.
        numpy releases the GIL inside its linear algebra kernels.
    """
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(func, items))
