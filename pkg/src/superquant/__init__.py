"""Grassmann calculus, super Kahler forms and unitary occurrence classification
for products of tori, flat factors and odd affine superspaces."""

from .bergman import (ConvergenceVerdict, NewtonParams, Occurrence,
                      SectionCoefficient, TruncationSchedule, classify_weight,
                      legendre_attainment, metric_axioms_check, section_norm,
                      weighted_norm_integral)
from .grassmann import (Blade, ExactComplex, GrassmannElement, Parity,
                        berezin_top, blade_product, derivation,
                        filtration_degree, format_element,
                        joint_derivation_kernel, multiply, parse_element, star,
                        star_element)
from .kahler import (MomentValue, SuperKahlerData, build_form, dolbeault_check,
                     moment_map, verify_axioms, verify_moment_identity)
from .potential import (ConvexPotential, ConvexityRefutation, Jet2, ParseError,
                        certify_strict_convexity, eval_jet2, parse,
                        quadratic_potential, tilted_hyperbolic_potential)
from .reporting import CONVENTIONS, VERSION
from .reps import (IrrepLabel, OccurrenceReport, SuperHilbertSample, Weight,
                   WeightBox, character_eval, gelfand_model_check,
                   lambda_module_checks, occurrences, odd_triviality_check,
                   pi_switch, sample_unitary_algebra, tensor, u_B_membership)

__version__ = VERSION
