""" Gromov-product densities of the Bowen-Margulis-Sullivan measure, the
    invariance identity they satisfy, and Hopf-coordinate checks.
"""
import logging
import numpy as np
from pslab.cartan import istar
from pslab.elements import as_element
from pslab.exceptions import NoTransversePairs
from pslab.flags import (PartialFlag, TransversePair, flag_distance, gromov_product, hopf,
                         iwasawa_cocycle, translate, transversality_stack)
from pslab.settings import pslab_settings

__all__ = (
    'BmsSample',
    'gromov_density',
    'invariance_residual',
    'convention_check',
    'bms_sample',
    'hopf_action_check',
)

logger = logging.getLogger(__name__)

#===============================================================================

class BmsSample(object):
    """ Transverse atom pairs of mu_phi x mu_{i* phi} with their densities """
    def __init__(self, pairs, weights, densities, transverse_fraction, provenance=None):
        self.pairs = list(pairs)
        self.weights = np.asarray(weights, dtype=float)
        self.densities = np.asarray(densities, dtype=float)
        self.transverse_fraction = float(transverse_fraction)
        self.provenance = provenance or {}

    def __len__(self):
        return len(self.pairs)

    def as_dict(self):
        return {
            'pairs': len(self.pairs),
            'weights': self.weights.tolist(),
            'densities': self.densities.tolist(),
            'transverse_fraction': self.transverse_fraction,
            'finite': bool(np.all(np.isfinite(self.densities))),
            'provenance': self.provenance,
        }

    def __repr__(self):
        return '<BmsSample %d pairs>' % len(self.pairs)


def gromov_density(pair, phi, delta):
    """ exp(delta phi(G(xi, eta))) """
    return float(np.exp(delta * phi(np.asarray(gromov_product(pair)))))

def _invariance_terms(g, pair, phi):
    g = as_element(g)
    moved = pair.translate(g)
    before = phi(np.asarray(gromov_product(pair)))
    after = phi(np.asarray(gromov_product(moved)))
    on_xi = np.asarray(iwasawa_cocycle(g, pair.xi))
    on_eta = np.asarray(iwasawa_cocycle(g, pair.eta))
    return before, after, on_xi, on_eta

def invariance_residual(g, pair, phi):
    """ |phi G(g xi, g eta) - phi G(xi, eta) - phi B(g, xi) - (i* phi) B(g, eta)| """
    before, after, on_xi, on_eta = _invariance_terms(g, pair, phi)
    return float(abs(after - before - phi(on_xi) - istar(phi)(on_eta)))

def convention_check(g, pair, phi):
    """ Residuals of the invariance identity with i* on the eta term, as used
        by invariance_residual, and with i* on the xi term instead.
    """
    before, after, on_xi, on_eta = _invariance_terms(g, pair, phi)
    dual = istar(phi)
    residuals = {
        'istar_on_eta': float(abs(after - before - phi(on_xi) - dual(on_eta))),
        'istar_on_xi': float(abs(after - before - dual(on_xi) - phi(on_eta))),
    }
    residuals['selected'] = min(('istar_on_eta', 'istar_on_xi'), key=residuals.get)
    return residuals

def bms_sample(mu_phi, mu_istar, count, phi, delta, pool=None):
    """ The count transverse atom pairs of highest product weight.
        Candidates are the pool heaviest atoms of each measure; the reported
        transverse fraction is the product mass of transverse candidates.
    """
    if not (mu_phi.theta.is_full and mu_istar.theta.is_full):
        raise ValueError('BMS samples pair measures on full flags')
    pool = pool or max(count, 32)
    left, right = mu_phi.top(pool), mu_istar.top(pool)
    products = mu_phi.weights[left][:, None] * mu_istar.weights[right][None, :]
    determinants = transversality_stack(mu_phi.frames[left][:, None], mu_istar.frames[right][None, :],
                                        mu_phi.theta)
    transverse = determinants > pslab_settings.TRANSVERSALITY_FLOOR
    checked = int(transverse.size)
    if not transverse.any():
        raise NoTransversePairs(checked)
    fraction = float(products[transverse].sum() / products.sum())

    order = np.argsort(-np.where(transverse, products, -1.0), axis=None, kind='stable')
    order = order[:min(count, int(transverse.sum()))]
    rows, cols = np.unravel_index(order, products.shape)
    pairs, weights, densities = [], [], []
    for row, col in zip(rows.tolist(), cols.tolist()):
        pair = TransversePair(PartialFlag(mu_phi.theta, mu_phi.frames[left[row]], check=False),
                              PartialFlag(mu_istar.theta, mu_istar.frames[right[col]], check=False))
        pairs.append(pair)
        weights.append(products[row, col])
        densities.append(gromov_density(pair, phi, delta))
    logger.info('BMS sample: %d pairs, transverse fraction %.4f', len(pairs), fraction)
    return BmsSample(pairs, weights, densities, fraction, {
        'delta': float(delta),
        'functional': phi.tolist(),
        'checked': checked,
    })

def hopf_action_check(g, h):
    """ Distance between hopf(g h) and g . hopf(h) = (g x, g y, u + B(g, x)) """
    g, h = as_element(g), as_element(h)
    x, y, u = hopf(h)
    image_x, image_y, image_u = hopf(g * h)
    expected_u = np.asarray(u) + np.asarray(iwasawa_cocycle(g, x))
    return max(flag_distance(translate(g, x), image_x),
               flag_distance(translate(g, y), image_y),
               float(np.abs(np.asarray(image_u) - expected_u).max()))
