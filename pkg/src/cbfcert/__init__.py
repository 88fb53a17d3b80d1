"""Certification of neural control barrier functions on simplicial meshes."""

from .affine import (AffineEnclosure, AffineForm, IntervalMatrix,
                     eval_affine_extrema, pos_neg_split)
from .condition import (ConditionSurrogate, Decision, ExactEvaluator,
                        assemble_surrogates, build_surrogate, control_bound,
                        decide_simplex, drift_bound)
from .dynamics import (DynamicsModel, TaylorEnclosure, bernstein_remainder,
                       taylor_enclosure)
from .gradient_bounds import (JacobianEnclosure, jacobian_intervals,
                              layer_jacobian_relaxation,
                              next_layer_jacobian_in_prev_coords,
                              propagate_jacobian_bounds)
from .mccormick import mccormick_product
from .mesh import (Simplex, bisect_longest_edge, classify_safe, longest_edge,
                   triangulate_box)
from .network import (Activation, LayerDef, NetworkDef, analytic_gradient,
                      forward, forward_trace, load_network, save_network)
from .relaxation import (LinearRelaxation, relax_derivative, relax_value,
                         solve_tangent_cubic)
from .safesets import (AxisBox, Disk, PolyHalfspace, SafeSetDef, INSIDE,
                       OUTSIDE, STRADDLE)
from .systems import BUILTIN_NAMES, builtin_safe_set, builtin_system
from .value_bounds import (LayerBounds, preactivation_intervals,
                           propagate_value_bounds)
from .verifier import (VerdictReport, VerifierConfig, verify, verify_batch,
                       write_mesh_csv, write_report)

__version__ = "0.1.0"
