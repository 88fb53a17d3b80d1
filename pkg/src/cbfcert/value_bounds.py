"""Forward linear bound propagation of network values over a simplex.

Every pre-activation vector y_i is bracketed by affine functions of the
state x. Iterating from the input layer, each activation is replaced by its
linear relaxation over the neuron's pre-activation interval (obtained by
projecting the running enclosure onto the simplex vertices) and folded into
the next layer's affine map. The final layer is linear, so the last
enclosure bounds the network output itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affine import AffineEnclosure, IntervalMatrix, exact_enclosure, pos_neg_split, substitute
from .mesh import Simplex
from .network import NetworkDef
from .relaxation import LinearRelaxation, relax_derivative, relax_value


@dataclass(frozen=True)
class LayerBounds:
    """Per-layer artifacts of the forward pass over one simplex."""

    preact_enclosure: AffineEnclosure  # y_i as affine in x
    preact_interval: IntervalMatrix    # per-neuron [l, u] over the simplex
    value_relax: LinearRelaxation      # bounds on sigma_i over the interval
    deriv_relax: LinearRelaxation      # bounds on sigma_i' over the interval


def interlayer_enclosure(value_relax: LinearRelaxation, weight: np.ndarray,
                         bias: np.ndarray) -> AffineEnclosure:
    """Enclosure of ``y_next = W sigma(y) + b`` as an affine function of y.

    The positive part of each weight multiplies the matching-side relaxation
    line, the negative part the opposite one.
    """
    wp, wn = pos_neg_split(weight)
    low_coeffs = wp * value_relax.lower_slope + wn * value_relax.upper_slope
    low_offset = bias + wp @ value_relax.lower_offset + wn @ value_relax.upper_offset
    up_coeffs = wp * value_relax.upper_slope + wn * value_relax.lower_slope
    up_offset = bias + wp @ value_relax.upper_offset + wn @ value_relax.lower_offset
    return AffineEnclosure(low_coeffs, low_offset, up_coeffs, up_offset)


def propagate_value_bounds(
    net: NetworkDef, simplex: Simplex
) -> tuple[AffineEnclosure, list[LayerBounds]]:
    """Affine enclosure of the network output over ``simplex``.

    Returns the output enclosure (index shape ``(output_dim,)``, affine in x)
    together with the per-layer bounds reused by the Jacobian propagation.
    """
    if net.input_dim != simplex.dim:
        raise ValueError(
            f"network expects {net.input_dim}-d inputs, simplex is {simplex.dim}-d"
        )
    per_layer: list[LayerBounds] = []
    enclosure = exact_enclosure(net.layers[0].weight, net.layers[0].bias,
                                region_id=simplex.id)
    for i, layer in enumerate(net.layers):
        interval = enclosure.interval_over(simplex.vertices)
        value_relax = relax_value(layer.activation, interval.lo, interval.hi)
        deriv_relax = relax_derivative(layer.activation, interval.lo, interval.hi)
        per_layer.append(LayerBounds(enclosure, interval, value_relax, deriv_relax))
        if i + 1 < len(net.layers):
            nxt = net.layers[i + 1]
            trans = interlayer_enclosure(value_relax, nxt.weight, nxt.bias)
            enclosure = substitute(trans, enclosure)
    return per_layer[-1].preact_enclosure, per_layer


def preactivation_intervals(per_layer: list[LayerBounds],
                            simplex: Simplex) -> list[IntervalMatrix]:
    """Vertex-projection intervals of every layer's pre-activations."""
    return [lb.preact_enclosure.interval_over(simplex.vertices) for lb in per_layer]
