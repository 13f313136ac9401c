"""Intermediate target construction on Z: product with an interval-tiling
system, witness blocks, and the descending block-forbidding chain.

The tiling system is the SFT of exact tilings of Z by intervals of two (or
more) coprime lengths; its strong irreducibility is verified empirically
rather than assumed.  The chain forbids one eligible aligned block per
stage; stage counts strictly decrease, so the chain terminates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

from .counting import count_projected, spectral_entropy
from .groups import (
    FiniteSubset,
    PreconditionError,
    add,
    boundary_interior,
    interval,
    power,
    subset,
    sumset,
    zero,
)
from .library import EMPTY_TILE, interval_tiling_sft, tile_symbol
from .quasitiling import ShapeSet
from .subshift import (
    Configuration,
    Mode,
    Pattern,
    Sft,
    check_admissible,
    check_strong_irreducibility,
    count_patterns,
    enumerate_patterns,
    entropy_estimate,
    extendable,
    product_system,
    resolve_mode,
)


@dataclass
class TilingSystemSpec:
    """Interval-tiling SFT over Lambda(S) together with its tile shapes."""

    lengths: tuple
    sft: Sft
    shapes: ShapeSet

    @classmethod
    def build(cls, lengths) -> "TilingSystemSpec":
        sft = interval_tiling_sft(lengths)
        shapes = ShapeSet(tuple(interval(0, v, role="S-tile-shape") for v in sorted(set(lengths))))
        return cls(tuple(sorted(set(lengths))), sft, shapes)

    def shape_of_symbol(self, sym) -> FiniteSubset | None:
        for v in self.lengths:
            if sym == tile_symbol(v):
                return interval(0, v)
        return None

    def verify_exactness(self, n: int = 14) -> bool:
        """Every admissible window configuration tiles its interior exactly:
        each interior cell is covered by exactly one fitting tile."""
        longest = max(self.lengths)
        F = interval(0, n)
        for p in enumerate_patterns(self.sft, F, Mode("locally_admissible")):
            cover = {i: 0 for i in range(n)}
            for i in range(n):
                sym = p.labels[(i,)]
                if sym == EMPTY_TILE:
                    continue
                v = int(sym[1:])
                for j in range(i, min(i + v, n)):
                    cover[j] += 1
            # interior cells: those whose covering tile must start inside
            for i in range(longest - 1, n):
                if cover[i] > 1:
                    return False
                if cover[i] == 0 and all(
                    p.labels[(j,)] == EMPTY_TILE for j in range(max(0, i - longest + 1), i + 1)
                ):
                    return False
        return True

    def verify_irreducible(self, r_chk: int = 2):
        return check_strong_irreducibility(self.sft, self.sft.k_mix, r_chk)

    def entropy_below(self, eps: float, n: int = 18) -> tuple:
        est = entropy_estimate(self.sft, interval(0, n), Mode("locally_admissible"))
        return est.h < eps, est


def aligned_t_pattern(T: TilingSystemSpec, length: int) -> Pattern:
    """The tiling-component of an aligned block: a tile start at the origin."""
    S = interval(0, length)
    labels = {(0,): tile_symbol(length)}
    for i in range(1, length):
        labels[(i,)] = EMPTY_TILE
    return Pattern(S, labels)


def is_aligned(block: Pattern, T: TilingSystemSpec) -> bool:
    length = len(block.shape)
    sym = block.labels[zero(1)][1]
    return sym == tile_symbol(length)


def aligned_blocks(
    z: Sft, T: TilingSystemSpec, length: int, mode=None, cap: int = 500_000
) -> list:
    """Aligned blocks of the product system on the shape [0, length)."""
    S = interval(0, length)
    t_part = aligned_t_pattern(T, length)
    pats = enumerate_patterns(z, S, mode, cap)
    out = []
    for p in pats:
        if all(p.labels[c][1] == t_part.labels[c] for c in S):
            out.append(p)
    return out


def y_part(block: Pattern) -> Pattern:
    return Pattern(block.shape, {c: s[0] for c, s in block.labels.items()})


def t_part(block: Pattern) -> Pattern:
    return Pattern(block.shape, {c: s[1] for c, s in block.labels.items()})


# ---------------------------------------------------------------------------
# shape conditions


@dataclass
class ShapeConditionReport:
    ok: bool
    results: dict
    failures: tuple
    mode_tags: dict


def validate_y0_shape_conditions(
    S: FiniteSubset, K: FiniteSubset, eps, Y1: Sft, h_y1: float | None = None
) -> ShapeConditionReport:
    """The four target-shape conditions, exactly where possible.

    S1: K inside the K^2-interior of S.   S2: |S| > 1/eps and 2|S| < e^{eps|S|}.
    S3: |K^2-boundary of S| < eps |S|.    S4: h(S, Y1) < h(Y1) + eps, with the
    entropy limit taken from the transfer-spectral oracle unless supplied.
    """
    eps = float(eps)
    k2 = power(K, 2)
    bnd, inn = boundary_interior(S, k2)
    res = {}
    tags = {}
    res["S1"] = K.as_set() <= inn.as_set()
    size = len(S)
    res["S2"] = (size > 1.0 / eps) and (2 * size < math.exp(eps * size))
    res["S3"] = len(bnd) < eps * size
    est = entropy_estimate(Y1, S)
    tags["h(S,Y1)"] = est.mode
    if h_y1 is None:
        h_y1 = spectral_entropy(Y1)
        tags["h(Y1)"] = "transfer-spectral"
    else:
        tags["h(Y1)"] = "supplied"
    res["S4"] = est.h < h_y1 + eps
    failures = tuple(k for k, v in res.items() if not v)
    return ShapeConditionReport(not failures, res, failures, tags)


# ---------------------------------------------------------------------------
# witness blocks


@dataclass
class WitnessSet:
    """Reserved aligned blocks per shape, with their purpose tags."""

    blocks: dict  # length -> tuple of (tag, Pattern)
    k: FiniteSubset

    def patterns(self, length: int) -> set:
        return {p for _, p in self.blocks.get(length, ())}

    def count(self) -> int:
        return sum(len(v) for v in self.blocks.values())

    def bound_ok(self, alphabet_size: int, k: FiniteSubset) -> bool:
        """|W(S)| <= 2|S| + |A|^{|boundary^2 S|} per shape."""
        for length, entries in self.blocks.items():
            S = interval(0, length)
            bnd, _ = boundary_interior(S, power(k, 2))
            if len(entries) > 2 * length + alphabet_size ** len(bnd):
                return False
        return True


class WitnessConstructionError(RuntimeError):
    pass


def build_witness_set(
    z0: Sft,
    T: TilingSystemSpec,
    Y: Sft,
    K: FiniteSubset,
    mode=None,
    cap: int = 500_000,
) -> WitnessSet:
    """Reserve aligned blocks of three kinds for every tile shape.

    Type 1 separates the origin from each other cell of the shape; type 2
    fixes the distinguished zero symbol at the origin for every realized
    boundary collar; type 3 realizes the distinguished one symbol at each
    cell.  Selection is lexicographic among the enumerated aligned blocks.
    """
    zero_sym = Y.alphabet.zero
    one_sym = Y.alphabet.one
    if zero_sym is None or one_sym is None:
        raise WitnessConstructionError("Y needs distinguished zero/one symbols")
    blocks = {}
    k2 = power(K, 2)
    for length in T.lengths:
        S = interval(0, length)
        cands = aligned_blocks(z0, T, length, mode, cap)
        chosen = []
        for s in S:
            if s == (0,):
                continue
            pick = next(
                (b for b in cands if y_part(b).labels[(0,)] != y_part(b).labels[s]),
                None,
            )
            if pick is None:
                raise WitnessConstructionError(
                    f"no aligned block separates the origin from {s}"
                )
            chosen.append(("separating", pick))
        bnd, _ = boundary_interior(S, k2)
        if bnd:
            collars = enumerate_patterns(Y, bnd, mode, cap)
        else:
            collars = [None]
        for collar in collars:
            pick = next(
                (
                    b
                    for b in cands
                    if y_part(b).labels[(0,)] == zero_sym
                    and (
                        collar is None
                        or all(y_part(b).labels[c] == collar.labels[c] for c in bnd)
                    )
                ),
                None,
            )
            if pick is None:
                raise WitnessConstructionError("no zero-at-origin block for a collar")
            chosen.append(("zero-collar", pick))
        for s in S:
            pick = next(
                (b for b in cands if y_part(b).labels[s] == one_sym), None
            )
            if pick is None:
                raise WitnessConstructionError(f"no block carries one at {s}")
            chosen.append(("one-at", pick))
        # deduplicate while keeping tags of first appearance
        seen = set()
        uniq = []
        for tag, b in chosen:
            if b not in seen:
                seen.add(b)
                uniq.append((tag, b))
        blocks[length] = tuple(uniq)
    return WitnessSet(blocks, K)


# ---------------------------------------------------------------------------
# the forbidding chain


@dataclass
class StageRecord:
    index: int
    beta: Pattern | None
    shape_length: int | None
    counts_by_shape: dict
    total_count: int
    projection_count: int
    projection_h: float
    in_band: bool


@dataclass
class ForbidChain:
    stages: tuple
    terminal: bool

    def counts_trajectory(self) -> list:
        return [s.total_count for s in self.stages]


class ProjectionSampler:
    """Pattern sampler for the projection of a product subshift to its first
    component, with mode-tagged counts and pattern sets."""

    def __init__(self, z: Sft, margin: int):
        self.z = z
        self.margin = margin

    def project_symbol(self, index: int):
        return self.z.alphabet.symbols[index][0]

    def count(self, n: int) -> int:
        return count_projected(self.z, n, self.margin, self.project_symbol)

    def h(self, n: int) -> float:
        return math.log(self.count(n)) / n

    def pattern_keys(self, F: FiniteSubset, mode=None) -> set:
        pats = enumerate_patterns(self.z, F, mode)
        return {tuple(p.labels[c][0] for c in F) for p in pats}

    @property
    def mode_tag(self) -> str:
        return f"projected-extendable({self.margin})"


@dataclass
class ChainResult:
    chain: ForbidChain
    z_stages: tuple  # Sft per stage (z_stages[n] = Z_n)
    sampler: ProjectionSampler  # for the selected stage (or terminal)
    n_selected: int | None
    status: str  # "hit-band" | "terminal" | "terminal-missed-band"
    eval_length: int
    margin: int


def _lift_block(block: Pattern) -> Pattern:
    return block


def eligible_blocks(
    z_n: Sft,
    T: TilingSystemSpec,
    Y1: Sft,
    witness: WitnessSet,
    K: FiniteSubset,
    mode=None,
    y1_sets: dict | None = None,
    aligned: dict | None = None,
):
    """Aligned blocks passing (B1) not-in-Y1, (B2) not-a-witness, (B3)
    another aligned block shares the boundary collar; lex order."""
    k2 = power(K, 2)
    out = []
    for length in T.lengths:
        S = interval(0, length)
        bnd, _ = boundary_interior(S, k2)
        cands = aligned[length] if aligned is not None else aligned_blocks(z_n, T, length, mode)
        if y1_sets is None:
            y1_keys = {p.key() for p in enumerate_patterns(Y1, S, mode)}
        else:
            y1_keys = y1_sets[length]
        by_collar = {}
        for b in cands:
            collar_key = tuple(b.labels[c] for c in bnd)
            by_collar.setdefault(collar_key, []).append(b)
        wset = witness.patterns(length)
        for b in cands:
            if y_part(b).key() in y1_keys:
                continue  # (B1)
            if b in wset:
                continue  # (B2)
            collar_key = tuple(b.labels[c] for c in bnd)
            if len(by_collar[collar_key]) < 2:
                continue  # (B3)
            out.append((length, b))
    return out


def run_forbid_chain(
    Y: Sft,
    Y1: Sft,
    T: TilingSystemSpec,
    eps: float,
    witness: WitnessSet | None = None,
    entropy_target: tuple | None = None,
    K: FiniteSubset | None = None,
    eval_length: int = 15,
    mode=None,
    max_stages: int = 2000,
) -> ChainResult:
    """Iterate the block-forbidding chain from the product system.

    Per stage: forbid the lexicographically least eligible aligned block,
    recount, and record the projection's entropy estimate.  Stops at the
    terminal stage (no eligible block) or as soon as the estimate enters the
    target band (a, b) when one is given.
    """
    if Y.alphabet.symbols != Y1.alphabet.symbols:
        raise PreconditionError("Y and Y1 must share an alphabet")
    if K is None:
        K = Y.k_mix if Y.k_mix is not None else subset([zero(1)])
    z0 = product_system(Y, T.sft)
    if witness is None:
        witness = build_witness_set(z0, T, Y, K, mode)
    margin = resolve_mode(z0, mode).margin if resolve_mode(z0, mode).kind == "extendable" else 0
    mode_r = resolve_mode(z0, mode)
    y1_sets = {
        length: {p.key() for p in enumerate_patterns(Y1, interval(0, length), mode_r)}
        for length in T.lengths
    }

    stages = []
    z_list = [z0]
    z_n = z0
    n_selected = None
    status = "terminal"
    band = entropy_target

    def record(idx, beta, length, z_cur, aligned) -> StageRecord:
        counts = {L: len(aligned[L]) for L in T.lengths}
        sampler = ProjectionSampler(z_cur, margin)
        pc = sampler.count(eval_length)
        ph = math.log(pc) / eval_length if pc else float("-inf")
        in_band = bool(band and band[0] < ph < band[1])
        return StageRecord(idx, beta, length, counts, sum(counts.values()), pc, ph, in_band)

    aligned = {L: aligned_blocks(z_n, T, L, mode_r) for L in T.lengths}
    rec = record(0, None, None, z_n, aligned)
    stages.append(rec)
    if rec.in_band:
        n_selected, status = 0, "hit-band"
    stage = 0
    while n_selected is None and stage < max_stages:
        elig = eligible_blocks(z_n, T, Y1, witness, K, mode_r, y1_sets, aligned)
        if not elig:
            status = "terminal-missed-band" if band else "terminal"
            break
        length, beta = elig[0]
        z_n = Sft(
            z_n.alphabet,
            z_n.forbidden + (beta,),
            z_n.k_sft,
            z_n.k_mix,
            z_n.name,
        )
        z_list.append(z_n)
        stage += 1
        aligned = {L: aligned_blocks(z_n, T, L, mode_r) for L in T.lengths}
        rec = record(stage, beta, length, z_n, aligned)
        stages.append(rec)
        if rec.in_band:
            n_selected, status = stage, "hit-band"
    sel = n_selected if n_selected is not None else len(z_list) - 1
    return ChainResult(
        chain=ForbidChain(tuple(stages), status != "hit-band"),
        z_stages=tuple(z_list),
        sampler=ProjectionSampler(z_list[sel], margin),
        n_selected=n_selected,
        status=status,
        eval_length=eval_length,
        margin=margin,
    )


# ---------------------------------------------------------------------------
# point surgery (block replacement)


def replace_block(
    z: Sft,
    config: Configuration,
    beta: Pattern,
    sibling: Pattern,
) -> Configuration:
    """Replace every appearance of the forbidden block with its sibling.

    The sibling must share the shape and boundary collar; appearances sit on
    disjoint tiles, so the rewrite is well defined.  The caller re-scans for
    admissibility and for the absence of earlier forbidden blocks.
    """
    if beta.shape != sibling.shape:
        raise PreconditionError("sibling must share the block shape")
    S = beta.shape
    wset = config.window.as_set()
    hits = []
    for g in config.window:
        if all(add(c, g) in wset for c in S) and all(
            config.labels[add(c, g)] == beta.labels[c] for c in S
        ):
            hits.append(g)
    touched = set()
    labels = dict(config.labels)
    for g in hits:
        cells = {add(c, g) for c in S}
        if cells & touched:
            raise RuntimeError("overlapping block appearances (bug)")
        touched |= cells
        for c in S:
            labels[add(c, g)] = sibling.labels[c]
    return Configuration(config.window, labels, config.boundary_mode)
