"""Finite-set geometry over Z^d for d in {1, 2}.

Group elements are integer tuples under componentwise addition; the identity
is the zero tuple.  All arithmetic here is exact (ints and Fractions), and
every operation is a pure function of immutable values.

Infinite subsets (arithmetic progressions and the like) are represented by a
finite stored element list together with an explicit ``extent`` box.  Any
operation that would need to read the set outside its extent raises
:class:`ExtentError` instead of extrapolating.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as _iproduct

ROLE_TAGS = (
    "K-window",
    "L-separator",
    "M-marker-shape",
    "S-tile-shape",
    "F-test-window",
    "generic",
)

Element = tuple


class ExtentError(ValueError):
    """A computation would read a stored set outside its declared extent."""


class PreconditionError(ValueError):
    """An operation received inputs violating its stated preconditions."""


def as_element(x) -> Element:
    if isinstance(x, tuple):
        return tuple(int(c) for c in x)
    if isinstance(x, (list,)):
        return tuple(int(c) for c in x)
    return (int(x),)


def zero(dim: int) -> Element:
    return (0,) * dim


def add(a: Element, b: Element) -> Element:
    return tuple(x + y for x, y in zip(a, b))


def neg(a: Element) -> Element:
    return tuple(-x for x in a)


@dataclass(frozen=True)
class FiniteSubset:
    """An ordered finite subset of Z^d.

    ``elements`` is kept sorted lexicographically, which is the canonical
    order every deterministic "choose one" in the package defers to.
    ``extent`` is an optional inclusive bounding box ((lo, hi), ...) per
    coordinate, used when the subset stands in for an infinite set.
    """

    elements: tuple = ()
    role: str = "generic"
    extent: tuple | None = None
    dim: int = field(default=0, compare=False)

    def __post_init__(self):
        elems = tuple(sorted({as_element(e) for e in self.elements}))
        object.__setattr__(self, "elements", elems)
        if elems:
            d = len(elems[0])
            if any(len(e) != d for e in elems):
                raise ValueError("mixed dimensions in subset")
        else:
            d = self.dim or 1
        object.__setattr__(self, "dim", d)
        if self.role not in ROLE_TAGS:
            raise ValueError(f"unknown role tag {self.role!r}")
        if self.extent is not None:
            ext = tuple((int(lo), int(hi)) for lo, hi in self.extent)
            if len(ext) != d:
                raise ValueError("extent dimension mismatch")
            object.__setattr__(self, "extent", ext)
            for e in elems:
                if not all(lo <= c <= hi for c, (lo, hi) in zip(e, ext)):
                    raise ValueError(f"element {e} outside declared extent")

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return as_element(g) in set(self.elements)

    def __eq__(self, other):
        if not isinstance(other, FiniteSubset):
            return NotImplemented
        return self.elements == other.elements

    def __hash__(self):
        return hash(self.elements)

    def as_set(self) -> frozenset:
        return frozenset(self.elements)

    def with_role(self, role: str) -> "FiniteSubset":
        return FiniteSubset(self.elements, role, self.extent, self.dim)

    def with_extent(self, extent) -> "FiniteSubset":
        return FiniteSubset(self.elements, self.role, tuple(extent), self.dim)

    def translate(self, g) -> "FiniteSubset":
        g = as_element(g)
        return FiniteSubset(tuple(add(e, g) for e in self.elements), self.role, dim=self.dim)

    def inverse(self) -> "FiniteSubset":
        return FiniteSubset(tuple(neg(e) for e in self.elements), self.role, dim=self.dim)

    def is_symmetric(self) -> bool:
        return self.as_set() == self.inverse().as_set()

    def hull(self) -> tuple:
        """Inclusive bounding box of the stored elements."""
        if not self.elements:
            raise ValueError("hull of empty subset")
        los = [min(e[i] for e in self.elements) for i in range(self.dim)]
        his = [max(e[i] for e in self.elements) for i in range(self.dim)]
        return tuple(zip(los, his))

    def effective_extent(self) -> tuple:
        return self.extent if self.extent is not None else self.hull()


def subset(elems, role: str = "generic", extent=None, dim: int = 0) -> FiniteSubset:
    return FiniteSubset(tuple(elems), role, extent, dim)


def interval(lo: int, hi: int, role: str = "generic") -> FiniteSubset:
    """The 1-d interval [lo, hi) as a subset of Z."""
    return FiniteSubset(tuple((i,) for i in range(lo, hi)), role, dim=1)


def box(spans, role: str = "generic") -> FiniteSubset:
    """Product of half-open intervals: box([(a,b),(c,d)]) = [a,b) x [c,d)."""
    ranges = [range(lo, hi) for lo, hi in spans]
    return FiniteSubset(tuple(_iproduct(*ranges)), role, dim=len(spans))


def folner_box(n: int, dim: int) -> FiniteSubset:
    """The centered cube of side 2n+1: symmetric, ascending, exhausting."""
    if n < 0:
        raise ValueError("index must be nonnegative")
    return box([(-n, n + 1)] * dim, role="F-test-window")


def sumset(A: FiniteSubset, B: FiniteSubset) -> FiniteSubset:
    """The product set AB = {a + b} (written additively)."""
    out = {add(a, b) for a in A for b in B}
    return FiniteSubset(tuple(out), dim=A.dim or B.dim)


def power(A: FiniteSubset, n: int) -> FiniteSubset:
    """A^n: the n-fold product set; A^0 = {e}."""
    if n < 0:
        raise ValueError("negative power")
    acc = FiniteSubset((zero(A.dim),), dim=A.dim)
    for _ in range(n):
        acc = sumset(acc, A)
    return acc


def boundary_interior(F: FiniteSubset, K: FiniteSubset):
    """Split F into its K-boundary {f : Kf not within F} and K-interior."""
    if not F or not K:
        raise PreconditionError("boundary_interior requires nonempty F and K")
    fset = F.as_set()
    bnd, inn = [], []
    for f in F:
        if all(add(k, f) in fset for k in K):
            inn.append(f)
        else:
            bnd.append(f)
    return (
        FiniteSubset(tuple(bnd), dim=F.dim),
        FiniteSubset(tuple(inn), dim=F.dim),
    )


def interior(F: FiniteSubset, K: FiniteSubset) -> FiniteSubset:
    return boundary_interior(F, K)[1]


def boundary(F: FiniteSubset, K: FiniteSubset) -> FiniteSubset:
    return boundary_interior(F, K)[0]


def invariance_defect(F: FiniteSubset, K: FiniteSubset) -> Fraction:
    """|KF symmetric-difference F| / |F|, exactly.

    F is (K, eps)-invariant iff this ratio is < eps.
    """
    if not F:
        raise PreconditionError("invariance_defect requires nonempty F")
    KF = sumset(K, F).as_set()
    return Fraction(len(KF ^ F.as_set()), len(F))


@dataclass(frozen=True)
class CheckReport:
    """Exact evaluation of one inequality; ``holds`` false flags a bug."""

    name: str
    lhs: Fraction
    rhs: Fraction
    holds: bool
    details: dict = field(default_factory=dict, compare=False)


def check_invariance_transfer(K: FiniteSubset, F0: FiniteSubset, F1: FiniteSubset) -> CheckReport:
    """|KF1 \\ F1| <= |KF0 \\ F0| + |K| |F0 triangle F1|; needs e in K."""
    if zero(K.dim) not in K:
        raise PreconditionError("invariance transfer requires the identity in K")
    f0, f1 = F0.as_set(), F1.as_set()
    lhs = len(sumset(K, F1).as_set() - f1) if f1 else 0
    base = len(sumset(K, F0).as_set() - f0) if f0 else 0
    rhs = base + len(K) * len(f0 ^ f1)
    return CheckReport("invariance-transfer", Fraction(lhs), Fraction(rhs), lhs <= rhs)


def check_boundary_bound(F: FiniteSubset, K: FiniteSubset) -> CheckReport:
    """|boundary_K F| <= |K| |KF triangle F|."""
    bnd, _ = boundary_interior(F, K)
    lhs = len(bnd)
    rhs = len(K) * len(sumset(K, F).as_set() ^ F.as_set())
    return CheckReport("boundary-bound", Fraction(lhs), Fraction(rhs), lhs <= rhs)


def check_interior_containment(F: FiniteSubset, K: FiniteSubset, g) -> CheckReport:
    """If Kg meets the KK^-1-interior of F then Kg lies inside F."""
    g = as_element(g)
    KKinv = sumset(K, K.inverse())
    _, inn = boundary_interior(F, KKinv)
    Kg = {add(k, g) for k in K}
    meets = bool(Kg & inn.as_set())
    inside = Kg <= F.as_set()
    holds = (not meets) or inside
    return CheckReport(
        "interior-containment",
        Fraction(int(meets)),
        Fraction(int(inside)),
        holds,
        details={"meets": meets, "inside": inside},
    )


def is_separated(C, L: FiniteSubset) -> bool:
    """True iff the translates Lc, c in C, are pairwise disjoint."""
    seen = set()
    for c in C:
        c = as_element(c)
        for l in L:
            cell = add(l, c)
            if cell in seen:
                return False
            seen.add(cell)
    return True


def density_on_window(C: FiniteSubset, F: FiniteSubset) -> Fraction:
    """|F intersect C| / |F|."""
    if not F:
        raise PreconditionError("density window must be nonempty")
    return Fraction(len(F.as_set() & C.as_set()), len(F))


def upper_density_profile(C: FiniteSubset, n_max: int) -> list[Fraction]:
    """Window estimates of the upper density of C.

    Entry n-1 is the max of |F_n intersect Cg| / |F_n| over all shifts g
    that keep the window F_n g^-1 inside C's stored extent.  The true upper
    density is a limit; the profile only reports window values.
    """
    dim = C.dim
    ext = C.effective_extent()
    out = []
    cset = C.as_set()
    for n in range(1, n_max + 1):
        spans = []
        for lo, hi in ext:
            # windows [g-n, g+n] per axis must fit inside [lo, hi]
            if hi - lo + 1 < 2 * n + 1:
                raise ExtentError(
                    f"stored extent of C too small for window index {n}"
                )
            spans.append(range(lo + n, hi - n + 1))
        size = (2 * n + 1) ** dim
        best = Fraction(0)
        for center in _iproduct(*spans):
            cnt = 0
            for off in _iproduct(*([range(-n, n + 1)] * dim)):
                if add(center, off) in cset:
                    cnt += 1
            best = max(best, Fraction(cnt, size))
        out.append(best)
    return out


def check_density_bound(
    F: FiniteSubset, M: FiniteSubset, L: FiniteSubset, C: FiniteSubset
) -> CheckReport:
    """Window form of the separated-set density bound.

    |F n MC|/|F| <= |M|/|L| + |M| |bd_L F|/|F| + |M| |M^-1 F \\ F|/|F|,
    for e in M subset L and C an L-separated set.
    """
    if zero(M.dim) not in M:
        raise PreconditionError("density bound requires the identity in M")
    if not M.as_set() <= L.as_set():
        raise PreconditionError("density bound requires M inside L")
    if not is_separated(C, L):
        raise PreconditionError("density bound requires an L-separated C")
    # every center whose M-translate could meet F must be stored
    need = sumset(M.inverse(), F)
    ext = C.effective_extent()
    for g in need:
        if not all(lo <= c <= hi for c, (lo, hi) in zip(g, ext)):
            raise ExtentError("C's stored extent does not cover M^-1 F")
    MC = {add(m, c) for m in M for c in C}
    lhs = Fraction(len(F.as_set() & MC), len(F))
    bd_L = len(boundary_interior(F, L)[0])
    MinvF = sumset(M.inverse(), F).as_set()
    rhs = (
        Fraction(len(M), len(L))
        + Fraction(len(M) * bd_L, len(F))
        + Fraction(len(M) * len(MinvF - F.as_set()), len(F))
    )
    return CheckReport("separated-density-bound", lhs, rhs, lhs <= rhs)
