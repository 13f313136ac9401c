"""Ready-made embedding instances at desk scale.

Single-cell markers keep the marker-ball overhead minimal, which is what
makes an end-to-end run on windows of a few hundred cells feasible: the
strict block-injection inequality forces tiles to outweigh the marker ball
by a factor tied to the entropy gap.
"""

from __future__ import annotations

from fractions import Fraction

from .embedding import BlockMap, EmbeddingMachine, one_block_map
from .groups import subset
from .library import forbid_symbols, full_shift, golden_mean
from .markers import build_marker_kit
from .quasitiling import ShapeSet
from .subshift import Sft, chebyshev_ball


def centered_interval(radius: int):
    return subset([(i,) for i in range(-radius, radius + 1)], role="S-tile-shape")


def golden_to_full3(
    shape_radius: int = 10,
    l_radius: int = 9,
    eps=Fraction(3, 20),
    order_radius: int = 2,
    injection_mode: str = "auto",
) -> EmbeddingMachine:
    """Golden mean shift into the full 3-shift, one tile shape.

    The target chain is Y0 = Y1 = the 2-symbol subshift of the 3-shift; the
    single marker is the third symbol at the origin, so marker recovery is
    structurally exact (no other write can produce that symbol).
    """
    X = golden_mean()
    Y = full_shift(("0", "1", "2"), name="full-3")
    Y1 = forbid_symbols(("0", "1", "2"), ("2",), name="two-of-three")
    Y0 = Y1
    K = subset([(0,)])
    kit = build_marker_kit(Y, Y1, Y0, r=1, k=K, window=chebyshev_ball(6, 1))
    shapes = ShapeSet((centered_interval(shape_radius),))
    L = centered_interval(l_radius).with_role("L-separator")
    phi = one_block_map({"0": "0", "1": "1"})
    return EmbeddingMachine(
        X,
        Y,
        Y1,
        Y0,
        kit,
        shapes,
        K,
        L,
        eps,
        phi,
        order_radius=order_radius,
        injection_mode=injection_mode,
    )


def golden_to_full4_two_shapes(
    radii: tuple = (8, 10),
    l_radius: int = 8,
    eps=Fraction(13, 100),
    order_radius: int = 2,
    injection_mode: str = "auto",
) -> EmbeddingMachine:
    """Two tile shapes into the full 4-shift, with genuine tile overlap.

    Two spare symbols give one single-cell marker per shape; the separator
    is sized so smaller tiles may overlap larger ones within the eps budget,
    exercising a nontrivial retraction inside the embedding pipeline.
    """
    X = golden_mean()
    syms = ("0", "1", "2", "3")
    Y = full_shift(syms, name="full-4")
    Y1 = forbid_symbols(syms, ("2", "3"), name="two-of-four")
    Y0 = Y1
    K = subset([(0,)])
    kit = build_marker_kit(Y, Y1, Y0, r=2, k=K, window=chebyshev_ball(6, 1))
    shapes = ShapeSet(tuple(centered_interval(r) for r in radii))
    L = centered_interval(l_radius).with_role("L-separator")
    phi = one_block_map({"0": "0", "1": "1"})
    return EmbeddingMachine(
        X,
        Y,
        Y1,
        Y0,
        kit,
        shapes,
        K,
        L,
        eps,
        phi,
        order_radius=order_radius,
        injection_mode=injection_mode,
    )


BUILTIN_MACHINES = {
    "golden-to-full3": golden_to_full3,
    "golden-to-full4-two-shapes": golden_to_full4_two_shapes,
}
