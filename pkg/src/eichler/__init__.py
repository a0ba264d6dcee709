"""Quaternion orders, binary quadratic forms, and oriented supersingular curves."""

from .numth import PrimeParams, QRTriple, Variant, find_q, is_prime, kronecker, represent
from .qform import (
    BQForm,
    QuadIdeal,
    ambiguous_in_genus,
    class_group,
    class_number,
    compose,
    form_order,
    form_to_ideal,
    genus_class,
    genus_vector,
    ideal_to_form,
    identity,
    inverse,
    isogeny_action,
    prime_splitting_form,
    reduce,
    represented_prime,
)
from .quat import (
    QuatAlgebra,
    QuatElement,
    QuatOrder,
    eichler_O,
    eichler_Oprime,
    embedded_discs,
    embeds_quadratic,
    index,
    intersect,
    is_order,
    order_to_form,
)
from .ff import Poly, fp2_ctx, fp4_ctx, fp_ctx, poly_gcd, roots
from .classpoly import ClassPolynomial, hilbert, hilbert_mod, resultant_vp
from .ec import (
    Curve,
    SubgroupKernel,
    c_epsilon_test,
    conjugate,
    division_poly,
    from_j,
    is_supersingular,
    isogeny_count,
    j_invariant,
    order_c_kernels,
    oriented_graph,
    phi_poly,
    velu,
)

__version__ = "0.1.0"
