"""Marker shapes and marker patterns, with exhaustive occurrence scanning.

A marker kit consists of a shape M, patterns m_1..m_r drawn from carriers
y_1..y_r, and the substrate point the carriers agree with off M.  The kit's
contract, checked by :func:`verify_marker_kit` on a scan window:

1. m_i occurs in y_i exactly at the identity,
2. m_i does not occur in y_j for j != i,
3. y_i agrees with the substrate off M.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .groups import (
    FiniteSubset,
    PreconditionError,
    add,
    as_element,
    neg,
    subset,
    sumset,
    zero,
)
from .subshift import (
    Configuration,
    NoSolutionError,
    Pattern,
    Sft,
    complete_lex_least,
    enumerate_patterns,
    resolve_mode,
)


class SurplusError(RuntimeError):
    """No window produced enough patterns of Y absent from Y1."""


class KitConstructionError(RuntimeError):
    """Marker kit construction ran out of room or witnesses."""


@dataclass
class MarkerKit:
    shape: FiniteSubset  # M, symmetric, contains K
    surplus_window: FiniteSubset  # F
    surplus: tuple  # patterns a_1..a_r on F
    anchors: tuple  # ((h_n, h_n g_n), ...)
    substrate: Configuration  # y^(m)
    markers: tuple  # m_i = y_i(M)
    carriers: tuple  # y_i
    k: FiniteSubset
    r: int
    mode_tag: str = ""

    @property
    def window(self) -> FiniteSubset:
        return self.substrate.window


def find_surplus_patterns(
    Y: Sft,
    Y1: Sft,
    r: int,
    mode=None,
    max_cells: int = 14,
):
    """Grow a window F until at least r patterns of Y are absent from Y1.

    Returns (F, lexicographically least r surplus patterns, mode tag).
    """
    if Y.alphabet.symbols != Y1.alphabet.symbols:
        raise PreconditionError("Y and Y1 must share an alphabet")
    mode = resolve_mode(Y, mode)
    dim = Y.dim
    for n in range(1, max_cells + 1):
        if dim == 1:
            F = subset([(i,) for i in range(n)])
        else:
            side = n
            F = subset(
                [(i, j) for i in range(side) for j in range(side)], dim=2
            )
            if side * side > max_cells:
                break
        big = enumerate_patterns(Y, F, mode)
        small = {p.key() for p in enumerate_patterns(Y1, F, mode)}
        surplus = [p for p in big if p.key() not in small]
        if len(surplus) >= r:
            index = Y.alphabet.index_map
            surplus.sort(key=lambda p: tuple(index[s] for s in p.key()))
            return F, tuple(surplus[:r]), mode.tag
    raise SurplusError(
        f"no window of up to {max_cells} cells yields {r} surplus patterns"
    )


def _near_origin_order(window: FiniteSubset):
    """Window elements by (Chebyshev norm, lex): keeps anchors compact."""
    return sorted(window, key=lambda g: (max(abs(c) for c in g), g))


def default_kit_window(Y: Sft, reach: int) -> FiniteSubset:
    from .subshift import chebyshev_ball

    return chebyshev_ball(reach, Y.dim)


def build_marker_kit(
    Y: Sft,
    Y1: Sft,
    Y0: Sft,
    r: int,
    y0_substrate: Configuration | None = None,
    k: FiniteSubset | None = None,
    window: FiniteSubset | None = None,
    surplus_override: tuple | None = None,
) -> MarkerKit:
    """Construct the marker shape and patterns.

    The shape is M = KF joined with disjoint anchor pairs K{h, hg} for every
    g in F^-1 K F other than the identity, closed under symmetry and union
    with K afterwards.  Carriers stamp the surplus patterns onto F inside a
    substrate of Y0, after pair-cells along every potential period have been
    mixed to differ.

    ``surplus_override`` substitutes the surplus patterns (negative controls
    in tests); everything else proceeds identically.
    """
    if not (Y.alphabet.symbols == Y1.alphabet.symbols == Y0.alphabet.symbols):
        raise PreconditionError("Y, Y1, Y0 must share an alphabet")
    if k is None:
        cells = set(Y.k_mix.elements if Y.k_mix else ())
        cells |= set(Y0.k_mix.elements if Y0.k_mix else ())
        cells |= {zero(Y.dim)}
        cells |= {neg(c) for c in cells}
        k = subset(cells, dim=Y.dim)
    if zero(Y.dim) not in k or not k.is_symmetric():
        raise PreconditionError("kit witness K must be symmetric and contain e")

    if r > 0:
        F, surplus, mode_tag = find_surplus_patterns(Y, Y1, r)
    else:
        F, surplus, mode_tag = subset([zero(Y.dim)], dim=Y.dim), (), "n/a"
    if surplus_override is not None:
        if len(surplus_override) != r:
            raise PreconditionError("override must supply r patterns")
        surplus = tuple(surplus_override)
        F = surplus[0].shape if surplus else F

    KF = sumset(k, F)
    gs = sorted(sumset(F.inverse(), KF).as_set() - {zero(Y.dim)})
    M_cells = set(KF.as_set())
    anchors = []
    if window is None:
        reach = 2 * (len(gs) + 1) * (max(_radius(k), 1) + _radius(F) + 1) + 2
        window = default_kit_window(Y, reach)
    worder = _near_origin_order(window)
    wset = window.as_set()
    for g in gs:
        placed = False
        for h in worder:
            blob = {add(kk, h) for kk in k} | {add(kk, add(h, g)) for kk in k}
            if not (blob <= wset):
                continue
            if not (blob & M_cells):
                anchors.append((h, add(h, g)))
                M_cells |= blob
                placed = True
                break
        if not placed:
            raise KitConstructionError(
                f"no anchor pair for displacement {g} fits in the window"
            )
    # closure required downstream: K inside M and M symmetric
    M_cells |= {neg(c) for c in M_cells}
    M_cells |= k.as_set()
    M = subset(M_cells, role="M-marker-shape", dim=Y.dim)
    if not M.as_set() <= window.as_set():
        raise KitConstructionError("marker shape exceeds the working window")

    if y0_substrate is None:
        substrate = complete_lex_least(Y0, window, {})
    else:
        substrate = y0_substrate
        if substrate.window != window:
            raise PreconditionError("substrate must live on the working window")

    # mix differing symbols onto every anchor pair, within Y0
    current = substrate
    for h, hg in anchors:
        pair_value = None
        for a in Y0.alphabet.symbols:
            for b in Y0.alphabet.symbols:
                if a == b:
                    continue
                try:
                    complete_lex_least(Y0, window, {h: a, hg: b})
                except NoSolutionError:
                    continue
                pair_value = (a, b)
                break
            if pair_value:
                break
        if pair_value is None:
            raise KitConstructionError(
                f"Y0 cannot separate the pair {h}, {hg} on this window"
            )
        blob = {add(kk, h) for kk in k} | {add(kk, hg) for kk in k}
        pins = {c: current.labels[c] for c in window if c not in blob}
        pins[h], pins[hg] = pair_value
        try:
            current = complete_lex_least(Y0, window, pins)
        except NoSolutionError as exc:
            raise KitConstructionError(
                f"cannot mix the separating pair at {h}, {hg}: {exc}"
            ) from exc

    carriers = []
    markers = []
    KF_set = KF.as_set()
    for a_i in surplus:
        pins = {c: current.labels[c] for c in window if c not in KF_set}
        for c, s in a_i.labels.items():
            pins[c] = s
        try:
            carrier = complete_lex_least(Y, window, pins)
        except NoSolutionError as exc:
            raise KitConstructionError(
                f"cannot stamp surplus pattern into the carrier: {exc}"
            ) from exc
        carriers.append(carrier)
        markers.append(carrier.restrict(M))
    return MarkerKit(
        shape=M,
        surplus_window=F,
        surplus=surplus,
        anchors=tuple(anchors),
        substrate=current,
        markers=tuple(markers),
        carriers=tuple(carriers),
        k=k,
        r=r,
        mode_tag=mode_tag,
    )


def _radius(S: FiniteSubset) -> int:
    return max((max(abs(c) for c in e) for e in S), default=0)


def occurrences(config: Configuration, pattern: Pattern, scan: FiniteSubset) -> tuple:
    """All g in the scan window with the full translate inside the
    configuration and sigma^g(config)(shape) = pattern."""
    wset = config.window.as_set()
    hits = []
    for g in scan:
        g = as_element(g)
        ok = True
        for c, s in pattern.labels.items():
            cell = add(c, g)
            if cell not in wset:
                ok = False
                break
            if config.labels[cell] != s:
                ok = False
                break
        if ok:
            hits.append(g)
    return tuple(hits)


@dataclass
class KitReport:
    ok: bool
    failures: tuple = ()
    scanned: int = 0

    def named_counterexample(self) -> str:
        if not self.failures:
            return ""
        kind, i, j, g = self.failures[0]
        return f"{kind}: marker {i} vs carrier {j} at {g}"


def verify_marker_kit(kit: MarkerKit, scan_window: FiniteSubset) -> KitReport:
    """Exhaustive occurrence scan of every marker over every carrier.

    Failures name (kind, marker index, carrier index, position); a failure
    refutes the kit (wrong budgets or radii), not the construction scheme.
    """
    failures = []
    scanned = 0
    e = zero(kit.shape.dim)
    scan_cells = [
        g
        for g in scan_window
        if all(add(m, g) in kit.window.as_set() for m in kit.shape)
    ]
    scan = subset(scan_cells, dim=kit.shape.dim) if scan_cells else None
    if scan is None:
        return KitReport(True, (), 0)
    for i, m_i in enumerate(kit.markers):
        for j, carrier in enumerate(kit.carriers):
            hits = occurrences(carrier, m_i, scan)
            scanned += len(scan)
            if i == j:
                if tuple(hits) != (e,):
                    extra = [h for h in hits if h != e]
                    if e not in hits:
                        failures.append(("marker-missing-at-identity", i, j, e))
                    for h in extra:
                        failures.append(("marker-reoccurs", i, j, h))
            else:
                for h in hits:
                    failures.append(("marker-crosstalk", i, j, h))
    m_set = kit.shape.as_set()
    for i, carrier in enumerate(kit.carriers):
        for g in carrier.window:
            if g in m_set:
                continue
            if carrier.labels[g] != kit.substrate.labels[g]:
                failures.append(("substrate-mismatch", i, i, g))
                break
    return KitReport(not failures, tuple(failures), scanned)
