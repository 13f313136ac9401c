"""Alphabets, patterns, SFTs, and the symbolic operations on finite windows.

Pattern sets of a subshift are not computable from a forbidden list in
general; every enumeration here is tagged with the mode that produced it:

* ``locally_admissible`` -- no forbidden translate fully inside the window;
* ``extendable(m)`` -- additionally extendable to a locally admissible
  labeling of the window fattened by the Chebyshev ball of radius m.

Enumeration is depth-first in canonical (lexicographic) cell order with
forbidden-pattern pruning, so results are deterministic and sorted.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _iproduct
import math

import numpy as np

from . import kernels
from .groups import (
    FiniteSubset,
    PreconditionError,
    add,
    as_element,
    boundary_interior,
    subset,
    sumset,
    zero,
)

DEFAULT_CAP = 2_000_000


class ResourceCapError(RuntimeError):
    """An enumeration exceeded its configured cap."""


class HypothesisError(ValueError):
    """A lemma-backed operation was called with its hypothesis violated."""


class AdmissibilityError(RuntimeError):
    """An output that a lemma guarantees admissible failed the scan (bug trap)."""


class GapViolationError(ValueError):
    """glue() called with shapes violating the K_mix separation gap."""


class NoSolutionError(RuntimeError):
    """glue() found no joint configuration; the gap does not witness mixing here."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered symbol list; symbols are strings (or tuples for products)."""

    symbols: tuple
    zero: object = None
    one: object = None

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols")
        if len(self.symbols) < 1:
            raise ValueError("alphabet must have at least one symbol")
        if self.zero is not None and self.zero not in self.symbols:
            raise ValueError("zero symbol not in alphabet")
        if self.one is not None and self.one not in self.symbols:
            raise ValueError("one symbol not in alphabet")
        if self.zero is not None and self.zero == self.one:
            raise ValueError("zero and one must differ")

    def __len__(self):
        return len(self.symbols)

    def index(self, sym) -> int:
        return self.symbols.index(sym)

    @property
    def index_map(self) -> dict:
        return {s: i for i, s in enumerate(self.symbols)}


@dataclass(frozen=True)
class Pattern:
    """A finite partial labeling: shape plus a total symbol assignment on it."""

    shape: FiniteSubset
    labels: dict

    def __post_init__(self):
        labs = {as_element(g): s for g, s in self.labels.items()}
        if set(labs) != set(self.shape.elements):
            raise ValueError("labels must be total on the shape")
        object.__setattr__(self, "labels", labs)

    def __eq__(self, other):
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.shape.elements == other.shape.elements and self.labels == other.labels

    def __hash__(self):
        return hash((self.shape.elements, self.key()))

    def key(self) -> tuple:
        """Label tuple in canonical shape order."""
        return tuple(self.labels[c] for c in self.shape)

    def restrict(self, sub: FiniteSubset) -> "Pattern":
        if not sub.as_set() <= self.shape.as_set():
            raise ValueError("restriction target not inside shape")
        return Pattern(sub, {c: self.labels[c] for c in sub})

    def translate(self, g) -> "Pattern":
        g = as_element(g)
        return Pattern(self.shape.translate(g), {add(c, g): s for c, s in self.labels.items()})


def _fits_in_translate(shape: FiniteSubset, K: FiniteSubset) -> bool:
    span_s = shape.hull()
    span_k = K.hull()
    return all(hs - ls <= hk - lk for (ls, hs), (lk, hk) in zip(span_s, span_k))


@dataclass(frozen=True)
class Sft:
    """Alphabet plus a finite forbidden-pattern list with its witness windows."""

    alphabet: Alphabet
    forbidden: tuple
    k_sft: FiniteSubset
    k_mix: FiniteSubset | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "forbidden", tuple(self.forbidden))
        if not self.k_sft or zero(self.k_sft.dim) not in self.k_sft:
            raise ValueError("K_sft must contain the identity")
        if not self.k_sft.is_symmetric():
            raise ValueError("K_sft must be symmetric")
        for p in self.forbidden:
            if not p.shape:
                raise ValueError("forbidden pattern with empty shape")
            if not _fits_in_translate(p.shape, self.k_sft):
                raise ValueError("forbidden shape larger than the K_sft window")
            for s in p.labels.values():
                if s not in self.alphabet.symbols:
                    raise ValueError(f"forbidden pattern uses unknown symbol {s!r}")

    @property
    def dim(self) -> int:
        return self.k_sft.dim

    def radius(self) -> int:
        return max((max(abs(c) for c in e) for e in self.k_sft), default=0)

    def default_margin(self) -> int:
        return 2 * self.radius()

    def with_mix(self, K: FiniteSubset) -> "Sft":
        return Sft(self.alphabet, self.forbidden, self.k_sft, K, self.name)


@dataclass(frozen=True)
class Mode:
    """Enumeration mode tag carried by every pattern-count result."""

    kind: str
    margin: int = 0

    @property
    def tag(self) -> str:
        if self.kind == "locally_admissible":
            return "locally_admissible"
        return f"extendable({self.margin})"


LOCAL = Mode("locally_admissible")


def extendable(margin: int) -> Mode:
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    return Mode("extendable", margin)


def resolve_mode(sft: Sft, mode) -> Mode:
    if mode is None or mode == "extendable":
        return extendable(sft.default_margin())
    if mode == "locally_admissible":
        return LOCAL
    if isinstance(mode, Mode):
        return mode
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class Configuration:
    """Finite-window stand-in for a point: window, labels, boundary mode."""

    window: FiniteSubset
    labels: dict
    boundary_mode: str = "free"

    def __post_init__(self):
        labs = {as_element(g): s for g, s in self.labels.items()}
        if set(labs) != set(self.window.elements):
            raise ValueError("labels must be total on the window")
        if self.boundary_mode not in ("free", "periodic"):
            raise ValueError("boundary_mode must be free or periodic")
        object.__setattr__(self, "labels", labs)

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.window.elements == other.window.elements
            and self.labels == other.labels
            and self.boundary_mode == other.boundary_mode
        )

    def get(self, g):
        return self.labels[as_element(g)]

    def restrict(self, shape: FiniteSubset) -> Pattern:
        return Pattern(shape, {c: self.labels[c] for c in shape})

    def pattern_at(self, shape: FiniteSubset, g) -> Pattern:
        """The shifted pattern sigma^g(y)(shape); requires shape+g in window."""
        g = as_element(g)
        return Pattern(shape, {c: self.labels[add(c, g)] for c in shape})


def chebyshev_ball(r: int, dim: int) -> FiniteSubset:
    return subset(_iproduct(*([range(-r, r + 1)] * dim)), dim=dim)


def fattened(F: FiniteSubset, margin: int) -> FiniteSubset:
    if margin == 0:
        return F
    return sumset(chebyshev_ball(margin, F.dim), F)


def _compile_clauses(sft: Sft, cells: list, index: dict, periodic_box=None) -> list:
    """All translates of forbidden patterns lying fully inside the cell set.

    Returns clauses as [(cell index, symbol index), ...] lists.  With a
    periodic box, translates wrap around it instead.
    """
    sym_index = sft.alphabet.index_map
    clauses = []
    cellset = set(cells)
    for p in sft.forbidden:
        rel = [(e, sym_index[p.labels[e]]) for e in p.shape]
        if periodic_box is not None:
            dims = [hi - lo for lo, hi in periodic_box]
            los = [lo for lo, _ in periodic_box]
            for g in cells:
                clause = []
                for off, lab in rel:
                    cell = tuple(
                        los[i] + (g[i] + off[i] - los[i]) % dims[i]
                        for i in range(len(dims))
                    )
                    clause.append((index[cell], lab))
                clauses.append(clause)
        else:
            base = p.shape.elements[0]
            anchors = {
                tuple(ci - bi for ci, bi in zip(c, base)) for c in cells
            }
            for g in sorted(anchors):
                cls = []
                ok = True
                for off, lab in rel:
                    cell = add(off, g)
                    if cell not in cellset:
                        ok = False
                        break
                    cls.append((index[cell], lab))
                if ok:
                    clauses.append(cls)
    return clauses


def _ground(clauses: list, fixed: dict) -> list:
    """Substitute fixed cells; a fully-satisfied clause means inadmissible."""
    out = []
    for clause in clauses:
        reduced = []
        alive = True
        for pos, lab in clause:
            if pos in fixed:
                if fixed[pos] != lab:
                    alive = False
                    break
            else:
                reduced.append((pos, lab))
        if not alive:
            continue
        if not reduced:
            raise HypothesisError("pinned cells already contain a forbidden pattern")
        out.append(reduced)
    return out


def _search(
    sft: Sft,
    core_cells: list,
    margin_cells: list,
    pinned: dict,
    cap: int,
    want_rows: bool,
    stop_after=None,
):
    """Shared DFS driver over core + margin + pinned cells.

    Core and margin cells are free; clauses may also touch pinned cells,
    which are substituted away before the search.  Returns the count of
    admissible core assignments (existence-quantified over the margin) and,
    if requested, their rows in canonical order.
    """
    cells = list(core_cells) + list(margin_cells) + sorted(pinned)
    index = {c: i for i, c in enumerate(cells)}
    if len(index) != len(cells):
        raise ValueError("overlapping cell groups in search")
    clauses = _compile_clauses(sft, cells, index)
    fixed_ix = {index[c]: sft.alphabet.index_map[s] for c, s in pinned.items()}
    grounded = _ground(clauses, fixed_ix)
    n_free = len(core_cells) + len(margin_cells)
    count, rows = kernels.dfs_search(
        n_free,
        len(core_cells),
        len(sft.alphabet),
        grounded,
        cap,
        want_rows=want_rows,
        stop_after=stop_after,
    )
    if count == kernels.CAPPED:
        raise ResourceCapError(f"enumeration exceeded cap {cap}")
    return count, rows


def _split_extendable(sft: Sft, F: FiniteSubset, mode: Mode):
    core = list(F.elements)
    margin = []
    if mode.kind == "extendable":
        fat = fattened(F, mode.margin)
        fset = F.as_set()
        margin = [c for c in fat if c not in fset]
    return core, margin


def enumerate_patterns(sft: Sft, F: FiniteSubset, mode=None, cap: int = DEFAULT_CAP):
    """All mode-admissible patterns of shape F, sorted canonically."""
    if not F:
        raise PreconditionError("enumeration window must be nonempty")
    mode = resolve_mode(sft, mode)
    core, margin = _split_extendable(sft, F, mode)
    count, rows = _search(sft, core, margin, {}, cap, want_rows=True)
    syms = sft.alphabet.symbols
    return [
        Pattern(F, {c: syms[rows[r, i]] for i, c in enumerate(core)})
        for r in range(count)
    ]


def count_patterns(sft: Sft, F: FiniteSubset, mode=None, cap: int = DEFAULT_CAP) -> int:
    if not F:
        raise PreconditionError("enumeration window must be nonempty")
    mode = resolve_mode(sft, mode)
    core, margin = _split_extendable(sft, F, mode)
    count, _ = _search(sft, core, margin, {}, cap, want_rows=False)
    return count


@dataclass(frozen=True)
class EntropyEstimate:
    count: int
    h: float
    mode: str
    window_size: int
    method: str = "dfs"


def entropy_estimate(sft: Sft, F: FiniteSubset, mode=None, cap: int = DEFAULT_CAP) -> EntropyEstimate:
    """(1/|F|) ln of the mode-tagged pattern count; natural log throughout."""
    mode = resolve_mode(sft, mode)
    n = count_patterns(sft, F, mode, cap)
    return EntropyEstimate(n, math.log(n) / len(F), mode.tag, len(F))


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    anchor: tuple | None = None
    forbidden_index: int | None = None


def check_admissible(sft: Sft, config: Configuration) -> AdmissibilityReport:
    """Scan every forbidden translate fully inside the window (or wrapped)."""
    cells = list(config.window.elements)
    index = {c: i for i, c in enumerate(cells)}
    pbox = None
    if config.boundary_mode == "periodic":
        pbox = _require_box(config.window)
    clauses = _compile_clauses(sft, cells, index, pbox)
    labels = np.asarray(
        [sft.alphabet.index_map[config.labels[c]] for c in cells], dtype=np.int8
    )
    bad = kernels.check_clauses(labels, len(cells), clauses)
    if bad < 0:
        return AdmissibilityReport(True)
    pos = [p for p, _ in clauses[bad]]
    return AdmissibilityReport(False, anchor=cells[min(pos)], forbidden_index=bad)


def _require_box(window: FiniteSubset):
    spans = window.hull()
    size = 1
    for lo, hi in spans:
        size *= hi - lo + 1
    if size != len(window):
        raise ValueError("periodic boundary mode requires a box window")
    return tuple((lo, hi + 1) for lo, hi in spans)


def excise(sft: Sft, y1: Configuration, y2: Configuration, F: FiniteSubset) -> Configuration:
    """Swap y1's labels onto F inside y2, under boundary agreement.

    Requires both configurations locally admissible on a common window
    containing the KK^-1-fattening of F, and agreement on the KK^-1-boundary
    of F.  The output is scanned; a violation is an implementation bug.
    """
    if y1.window != y2.window:
        raise PreconditionError("excise requires a common window")
    W = y1.window
    kk = sumset(sft.k_sft, sft.k_sft.inverse())
    needed = sumset(kk, F)
    if not needed.as_set() <= W.as_set():
        raise PreconditionError("window must contain the KK^-1-fattening of F")
    for cfg in (y1, y2):
        rep = check_admissible(sft, cfg)
        if not rep.ok:
            raise PreconditionError("excise inputs must be locally admissible")
    bnd, _ = boundary_interior(F, kk)
    for c in bnd:
        if y1.labels[c] != y2.labels[c]:
            raise HypothesisError(f"boundary labels differ at {c}")
    labels = dict(y2.labels)
    for c in F:
        labels[c] = y1.labels[c]
    out = Configuration(W, labels, y1.boundary_mode)
    rep = check_admissible(sft, out)
    if not rep.ok:
        raise AdmissibilityError(f"excision produced a violation at {rep.anchor}")
    return out


def complete_lex_least(
    sft: Sft, W: FiniteSubset, pins: dict, cap: int = DEFAULT_CAP
) -> Configuration:
    """Lexicographically least admissible configuration on W extending pins."""
    pins = {as_element(c): s for c, s in pins.items()}
    free = [c for c in W if c not in pins]
    try:
        count, rows = _search(sft, free, [], pins, cap, want_rows=True, stop_after=1)
    except HypothesisError as exc:
        raise NoSolutionError(str(exc)) from exc
    if count == 0:
        raise NoSolutionError("no admissible completion on this window")
    syms = sft.alphabet.symbols
    labels = dict(pins)
    for i, c in enumerate(free):
        labels[c] = syms[rows[0, i]]
    return Configuration(W, labels)


def glue(sft: Sft, p1: Pattern, p2: Pattern, W: FiniteSubset, cap: int = DEFAULT_CAP) -> Configuration:
    """Joint admissible configuration on W through the K_mix gap.

    Returns the lexicographically least locally admissible configuration on W
    restricting to p1 and p2.  Requires K_mix * shape(p1) disjoint from
    shape(p2).  A NoSolution outcome flags that K_mix does not witness strong
    irreducibility for this instance.
    """
    if sft.k_mix is None:
        raise PreconditionError("glue requires an irreducibility gap K_mix")
    guard = sumset(sft.k_mix, p1.shape).as_set()
    if guard & p2.shape.as_set():
        raise GapViolationError("K_mix * shape(p1) intersects shape(p2)")
    pins = dict(p1.labels)
    pins.update(p2.labels)
    if not set(pins) <= W.as_set():
        raise PreconditionError("pattern shapes must lie inside the window")
    return complete_lex_least(sft, W, pins, cap)


@dataclass(frozen=True)
class SeparationResult:
    separates: bool
    witness: Configuration | None
    window_size: int


def simply_separates(sft: Sft, g, W: FiniteSubset) -> SeparationResult:
    """Search for an admissible configuration on W with y(g) != y(e).

    A negative answer is scoped to this window: the report carries |W|.
    """
    g = as_element(g)
    eid = zero(W.dim)
    if eid not in W or g not in W:
        raise PreconditionError("window must contain both e and g")
    for a in sft.alphabet.symbols:
        for b in sft.alphabet.symbols:
            if a == b:
                continue
            try:
                witness = complete_lex_least(sft, W, {eid: a, g: b})
            except NoSolutionError:
                continue
            return SeparationResult(True, witness, len(W))
    return SeparationResult(False, None, len(W))


@dataclass
class IrreducibilityReport:
    passed: bool
    radius: int
    gap: FiniteSubset
    pairs_tested: int
    counterexample: tuple | None = None

    def summary(self) -> str:
        verdict = "verified" if self.passed else "refuted"
        return f"strong irreducibility {verdict} up to radius {self.radius}"


def check_strong_irreducibility(
    sft: Sft, K: FiniteSubset, r_chk: int, cap: int = DEFAULT_CAP
) -> IrreducibilityReport:
    """Bounded verification that K witnesses strong irreducibility.

    Tests every pair of extendable patterns on box shapes of side up to
    r_chk, with the second shape placed at the least offset clearing the
    K-gap.  A pass is evidence up to this radius, not a proof.
    """
    dim = sft.dim
    probe = sft.with_mix(K)
    tested = 0
    sides = range(1, r_chk + 1)
    if dim == 1:
        shapes = [subset(((i,) for i in range(w)), dim=1) for w in sides]
    else:
        shapes = [
            subset(_iproduct(range(w1), range(w2)), dim=2)
            for w1 in sides
            for w2 in sides
        ]
    mode = extendable(sft.default_margin())
    for F1 in shapes:
        pats1 = enumerate_patterns(sft, F1, mode, cap)
        for F2base in shapes:
            offset = _least_gap_offset(K, F1, F2base)
            pats2 = [p.translate(offset) for p in enumerate_patterns(sft, F2base, mode, cap)]
            both = subset(F1.elements + F2base.translate(offset).elements, dim=dim)
            W = fattened(both, max(sft.radius(), 1))
            for p1 in pats1:
                for p2 in pats2:
                    tested += 1
                    if tested > cap:
                        raise ResourceCapError("irreducibility sweep exceeded cap")
                    try:
                        glue(probe, p1, p2, W)
                    except NoSolutionError:
                        return IrreducibilityReport(False, r_chk, K, tested, (p1, p2))
    return IrreducibilityReport(True, r_chk, K, tested)


def _least_gap_offset(K: FiniteSubset, F1: FiniteSubset, F2: FiniteSubset):
    """Least nonnegative shift along the first axis clearing the K-gap."""
    guard = sumset(K, F1).as_set()
    dim = F1.dim
    step = 0
    while True:
        g = (step,) + (0,) * (dim - 1)
        if not ({add(c, g) for c in F2} & guard):
            return g
        step += 1


def product_system(X: Sft, T: Sft, alphabet_cap: int = 64) -> Sft:
    """Product SFT over the pair alphabet; forbidden lists lift componentwise.

    Pattern counts factor exactly at every window, so entropy estimates add.
    """
    if X.dim != T.dim:
        raise ValueError("factors must share a dimension")
    if len(X.alphabet) * len(T.alphabet) > alphabet_cap:
        raise ResourceCapError("product alphabet exceeds cap")
    symbols = tuple((a, b) for a in X.alphabet.symbols for b in T.alphabet.symbols)
    alph = Alphabet(symbols)
    forbidden = []
    for p in X.forbidden:
        for q in _iproduct(T.alphabet.symbols, repeat=len(p.shape)):
            forbidden.append(
                Pattern(p.shape, {c: (p.labels[c], q[i]) for i, c in enumerate(p.shape)})
            )
    for p in T.forbidden:
        for q in _iproduct(X.alphabet.symbols, repeat=len(p.shape)):
            forbidden.append(
                Pattern(p.shape, {c: (q[i], p.labels[c]) for i, c in enumerate(p.shape)})
            )
    k_sft = subset(set(X.k_sft.elements) | set(T.k_sft.elements), dim=X.dim)
    k_mix = None
    if X.k_mix is not None and T.k_mix is not None:
        k_mix = subset(set(X.k_mix.elements) | set(T.k_mix.elements), dim=X.dim)
    name = f"({X.name} x {T.name})" if X.name and T.name else ""
    return Sft(alph, tuple(forbidden), k_sft, k_mix, name)


def random_admissible_configuration(sft: Sft, W: FiniteSubset, seed: int) -> Configuration:
    """Deterministic pseudorandom admissible configuration on W."""
    import random as _random

    rng = _random.Random(seed)
    cells = list(W.elements)
    index = {c: i for i, c in enumerate(cells)}
    clauses = _compile_clauses(sft, cells, index)
    by_last = [[] for _ in cells]
    for clause in clauses:
        by_last[max(p for p, _ in clause)].append(clause)
    nsym = len(sft.alphabet)
    orders = [rng.sample(range(nsym), nsym) for _ in cells]
    sym = [-1] * len(cells)
    tried = [0] * len(cells)
    depth = 0
    while depth >= 0:
        if tried[depth] >= nsym:
            tried[depth] = 0
            sym[depth] = -1
            depth -= 1
            continue
        sym[depth] = orders[depth][tried[depth]]
        tried[depth] += 1
        if any(all(sym[p] == l for p, l in clause) for clause in by_last[depth]):
            continue
        if depth == len(cells) - 1:
            syms = sft.alphabet.symbols
            return Configuration(W, {c: syms[sym[i]] for i, c in enumerate(cells)})
        depth += 1
    raise NoSolutionError("subshift admits no configuration on this window")
