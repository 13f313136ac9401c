"""Stock subshift instances used across tests, pipelines, and the CLI."""

from __future__ import annotations

from itertools import product as _iproduct
from math import gcd

from .groups import FiniteSubset, interval, subset
from .subshift import Alphabet, Pattern, Sft


def full_shift(symbols, dim: int = 1, name: str = "") -> Sft:
    """Full shift: no forbidden patterns, trivial witness windows."""
    alph = Alphabet(tuple(symbols), zero=symbols[0], one=symbols[1] if len(symbols) > 1 else None)
    e = subset([(0,) * dim], dim=dim)
    return Sft(alph, (), e, e, name or f"full-{len(alph)}")


def golden_mean(name: str = "golden-mean") -> Sft:
    """Binary Z-SFT forbidding adjacent 1s ("11")."""
    alph = Alphabet(("0", "1"), zero="0", one="1")
    k = subset([(-1,), (0,), (1,)])
    forb = (Pattern(interval(0, 2), {(0,): "1", (1,): "1"}),)
    return Sft(alph, forb, k, k, name)


def forbid_word(word: str, symbols=("0", "1"), name: str = "") -> Sft:
    """Z-SFT forbidding one contiguous word."""
    alph = Alphabet(tuple(symbols), zero=symbols[0], one=symbols[1] if len(symbols) > 1 else None)
    w = len(word)
    r = max(w - 1, 1)
    k = subset([(i,) for i in range(-r, r + 1)])
    forb = (Pattern(interval(0, w), {(i,): word[i] for i in range(w)}),)
    return Sft(alph, forb, k, k, name or f"forbid-{word}")


def forbid_symbols(symbols, banned, name: str = "") -> Sft:
    """SFT over ``symbols`` forbidding each symbol in ``banned`` everywhere.

    Stands in for a full shift over the reduced alphabet while staying a
    subshift of the larger one (same alphabet, single-cell forbidden list).
    """
    alph_syms = tuple(symbols)
    keep = [s for s in alph_syms if s not in banned]
    alph = Alphabet(alph_syms, zero=keep[0], one=keep[1] if len(keep) > 1 else None)
    e = subset([(0,)])
    forb = tuple(Pattern(subset([(0,)]), {(0,): b}) for b in banned)
    return Sft(alph, forb, e, e, name or f"drop-{''.join(banned)}")


def hard_square(name: str = "hard-square") -> Sft:
    """Z^2 independent-set SFT: no two adjacent 1s (horizontally/vertically)."""
    alph = Alphabet(("0", "1"), zero="0", one="1")
    k = subset(_iproduct((-1, 0, 1), (-1, 0, 1)), dim=2)
    forb = (
        Pattern(subset([(0, 0), (1, 0)], dim=2), {(0, 0): "1", (1, 0): "1"}),
        Pattern(subset([(0, 0), (0, 1)], dim=2), {(0, 0): "1", (0, 1): "1"}),
    )
    return Sft(alph, forb, k, k, name)


def vertical_equality(name: str = "strip-equal") -> Sft:
    """Z^2 SFT forcing x(a, b) = x(a, b+1): columns are constant.

    Models a strongly irreducible system that fails to simply separate the
    vertical unit; used as the separation counterexample fixture.
    """
    alph = Alphabet(("0", "1"), zero="0", one="1")
    k = subset(_iproduct((-1, 0, 1), (-1, 0, 1)), dim=2)
    shape = subset([(0, 0), (0, 1)], dim=2)
    forb = tuple(
        Pattern(shape, {(0, 0): a, (0, 1): b})
        for a in ("0", "1")
        for b in ("0", "1")
        if a != b
    )
    return Sft(alph, forb, k, k, name)


EMPTY_TILE = "-"


def tile_symbol(length: int) -> str:
    return f"S{length}"


def interval_tiling_sft(lengths, name: str = "") -> Sft:
    """Z-SFT whose points are exactly the tilings of Z by the given interval
    lengths (encoded by marking each tile's left endpoint with its length).

    Local rules: after a start of length L come L-1 empty cells and then a
    new start, and no window of max(lengths) cells may be entirely empty.
    With at least two coprime lengths the system is mixing.
    """
    lengths = sorted(set(int(v) for v in lengths))
    if len(lengths) < 2:
        raise ValueError("need at least two tile lengths")
    g = 0
    for v in lengths:
        g = gcd(g, v)
    if g != 1:
        raise ValueError("tile lengths must be coprime")
    syms = (EMPTY_TILE,) + tuple(tile_symbol(v) for v in lengths)
    alph = Alphabet(syms)
    forb = []
    starts = [tile_symbol(v) for v in lengths]
    for v in lengths:
        sv = tile_symbol(v)
        for k in range(1, v):
            for other in starts:
                forb.append(
                    Pattern(subset([(0,), (k,)]), {(0,): sv, (k,): other})
                )
        forb.append(Pattern(subset([(0,), (v,)]), {(0,): sv, (v,): EMPTY_TILE}))
    longest = max(lengths)
    forb.append(
        Pattern(interval(0, longest), {(i,): EMPTY_TILE for i in range(longest)})
    )
    r = longest
    k_sft = subset([(i,) for i in range(-r, r + 1)])
    # mixing gap: any integer >= (frobenius number + 1) is a sum of lengths
    frob = lengths[0] * lengths[1] - lengths[0] - lengths[1] if len(lengths) == 2 else 0
    gap = 2 * longest + max(frob, 0) + 2
    k_mix = subset([(i,) for i in range(-gap, gap + 1)])
    return Sft(alph, tuple(forb), k_sft, k_mix, name or f"tiling-{'-'.join(map(str, lengths))}")
