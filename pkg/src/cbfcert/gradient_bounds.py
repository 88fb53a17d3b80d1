"""Affine enclosures of the network gradient over a simplex.

The gradient of a layered network is the ordered product of per-layer
Jacobians ``diag(sigma'(y_i)) W_i``. Working from the last layer backwards,
the running partial product is kept affine in the current layer's
pre-activation vector: each step re-expresses the product one layer earlier
(substituting the interlayer value relaxation) and folds in that layer's own
Jacobian relaxation through a McCormick product. A final exact substitution
``y_1 = W_1 x + b_1`` delivers bounds that are affine in the state, so their
extrema over a simplex sit at its vertices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affine import AffineEnclosure, IntervalMatrix, exact_enclosure, pos_neg_split, substitute
from .mccormick import mccormick_product
from .mesh import Simplex
from .network import NetworkDef
from .relaxation import LinearRelaxation
from .value_bounds import LayerBounds, interlayer_enclosure


@dataclass(frozen=True)
class JacobianEnclosure:
    """Affine bounds on a product of layer Jacobians.

    ``reference_layer`` names the pre-activation vector the bounds are affine
    in (1-based; 0 means the state x itself after the final substitution).
    """

    enclosure: AffineEnclosure
    reference_layer: int


def layer_jacobian_relaxation(layer_index: int, deriv_relax: LinearRelaxation,
                              weight: np.ndarray) -> JacobianEnclosure:
    """Bounds on ``diag(sigma'(y_i)) W_i`` as affine functions of y_i.

    Entry (p, k) depends on ``y_{i,p}`` alone; the weight's sign decides
    which derivative line bounds it from which side.
    """
    wp, wn = pos_neg_split(weight)
    rows, cols = weight.shape
    eye = np.eye(rows)
    low_diag = deriv_relax.lower_slope[:, None] * wp + deriv_relax.upper_slope[:, None] * wn
    up_diag = deriv_relax.upper_slope[:, None] * wp + deriv_relax.lower_slope[:, None] * wn
    lower_coeffs = np.einsum("pk,pm->pkm", low_diag, eye)
    upper_coeffs = np.einsum("pk,pm->pkm", up_diag, eye)
    lower_offset = deriv_relax.lower_offset[:, None] * wp + deriv_relax.upper_offset[:, None] * wn
    upper_offset = deriv_relax.upper_offset[:, None] * wp + deriv_relax.lower_offset[:, None] * wn
    enc = AffineEnclosure(lower_coeffs, lower_offset, upper_coeffs, upper_offset)
    return JacobianEnclosure(enc, layer_index)


def next_layer_jacobian_in_prev_coords(
    jac: JacobianEnclosure,
    value_relax: LinearRelaxation,
    weight: np.ndarray,
    bias: np.ndarray,
) -> JacobianEnclosure:
    """Re-express bounds affine in ``y_{i+1}`` as bounds affine in ``y_i``.

    Substitutes ``y_{i+1} = W sigma(y_i) + b`` through the stored value
    relaxation of layer i, the same bounds the forward pass used.
    """
    trans = interlayer_enclosure(value_relax, weight, bias)
    return JacobianEnclosure(substitute(jac.enclosure, trans), jac.reference_layer - 1)


def jacobian_intervals(jac: JacobianEnclosure, per_layer: list[LayerBounds],
                       simplex: Simplex) -> IntervalMatrix:
    """Interval bounds of the enclosed product over the simplex.

    Bounds affine in ``y_i`` are first composed with that layer's state-affine
    enclosure and then projected onto the simplex vertices.
    """
    if jac.reference_layer == 0:
        return jac.enclosure.interval_over(simplex.vertices)
    inner = per_layer[jac.reference_layer - 1].preact_enclosure
    return substitute(jac.enclosure, inner).interval_over(simplex.vertices)


def _layer_jacobian_intervals(rel: JacobianEnclosure,
                              interval: IntervalMatrix) -> IntervalMatrix:
    """Intervals of a single-layer Jacobian relaxation over the neuron intervals.

    Each entry's bounding lines depend on one pre-activation only, so
    endpoint evaluation of the lines is exact.
    """
    enc = rel.enclosure
    lo_neuron, hi_neuron = interval.lo[:, None], interval.hi[:, None]
    diag_low = np.einsum("pkp->pk", enc.lower_coeffs)
    diag_up = np.einsum("pkp->pk", enc.upper_coeffs)
    lo = np.minimum(diag_low * lo_neuron, diag_low * hi_neuron) + enc.lower_offset
    hi = np.maximum(diag_up * lo_neuron, diag_up * hi_neuron) + enc.upper_offset
    return IntervalMatrix(lo, hi)


def propagate_jacobian_bounds(
    net: NetworkDef,
    per_layer: list[LayerBounds],
    simplex: Simplex,
    eta: float,
) -> AffineEnclosure:
    """State-affine bounds on the network gradient over ``simplex``.

    Reuses the relaxations computed by :func:`propagate_value_bounds`; no
    additional forward pass is performed. Returns an enclosure of index shape
    ``(output_dim, input_dim)``.
    """
    depth = net.depth
    current = layer_jacobian_relaxation(depth, per_layer[-1].deriv_relax,
                                        net.layers[-1].weight)
    for i in range(depth - 1, 0, -1):
        layer = net.layers[i - 1]
        bounds = per_layer[i - 1]
        product = next_layer_jacobian_in_prev_coords(
            current, bounds.value_relax, net.layers[i].weight, net.layers[i].bias
        )
        product_iv = jacobian_intervals(product, per_layer, simplex)
        factor = layer_jacobian_relaxation(i, bounds.deriv_relax, layer.weight)
        factor_iv = _layer_jacobian_intervals(factor, bounds.preact_interval)
        merged = mccormick_product(product.enclosure, product_iv,
                                   factor.enclosure, factor_iv, eta)
        current = JacobianEnclosure(merged, i)
    first = net.layers[0]
    final = substitute(current.enclosure,
                       exact_enclosure(first.weight, first.bias, simplex.id))
    return final
