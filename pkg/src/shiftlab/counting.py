"""Exact one-dimensional pattern counting via suffix-state dynamic programming.

For Z-SFTs the pattern counts on intervals are path counts in a de Bruijn-style
automaton whose states are admissible suffix words.  This module provides

* exact locally-admissible counts (arbitrary-precision ints),
* exact extendable-mode counts via lazy subset determinization,
* exact counts of *projected* pattern sets (images of a symbol map), which is
  what entropy gating of a projected product system needs, and
* a spectral estimate of the entropy limit (power iteration).

All counts agree with the depth-first enumerator; the DP is the fast path,
not an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

from .subshift import Sft


@dataclass
class _EndChecker:
    """Forbidden patterns re-anchored to their last cell, for suffix checks.

    Patterns are kept with per-cell symbol *sets* and losslessly compressed:
    same-shape patterns differing at one cell merge their sets there, and a
    cell whose set covers the whole alphabet is dropped.  This undoes the
    blowup of componentwise lifts in product systems.
    """

    rel: list  # per pattern: (offsets from the end <= 0, per-cell frozensets)
    dead: bool = False  # some pattern compressed to nothing: all words bad

    @classmethod
    def build(cls, sft: Sft) -> "_EndChecker":
        if sft.dim != 1:
            raise ValueError("suffix DP requires a 1-d SFT")
        sym = sft.alphabet.index_map
        full = frozenset(range(len(sft.alphabet)))
        pats = set()
        for p in sft.forbidden:
            cells = tuple(sorted(c[0] for c in p.shape))
            labs = tuple(frozenset((sym[p.labels[(c,)]],)) for c in cells)
            pats.add((cells, labs))
        pats = _compress(pats, full)
        dead = any(not cells for cells, _ in pats)
        rel = []
        for cells, labs in pats:
            if not cells:
                continue
            top = max(cells)
            rel.append((tuple(c - top for c in cells), labs))
        return cls(rel, dead)

    def ok(self, word: tuple, a: int) -> bool:
        """May ``word + (a,)`` end with symbol a without completing a
        forbidden translate that contains the last cell?"""
        if self.dead:
            return False
        n = len(word)
        for offs, labs in self.rel:
            if -offs[0] > n:
                continue
            hit = True
            for off, lab in zip(offs, labs):
                cur = a if off == 0 else word[n + off]
                if cur not in lab:
                    hit = False
                    break
            if hit:
                return False
        return True


def _compress(pats: set, full: frozenset) -> set:
    """Merge same-shape patterns cell by cell; drop full-alphabet cells."""
    changed = True
    while changed:
        changed = False
        for i in range(max((len(c) for c, _ in pats), default=0)):
            groups = {}
            for cells, labs in pats:
                if i >= len(cells):
                    groups.setdefault((cells, labs, None), []).append((cells, labs))
                    continue
                key = (cells, labs[:i], labs[i + 1 :])
                groups.setdefault(key, []).append((cells, labs))
            new = set()
            for key, members in groups.items():
                if key[2] is None or len(members) == 1:
                    new.update(members)
                    continue
                cells, before, after = key
                union = frozenset().union(*(m[1][i] for m in members))
                if union == full:
                    reduced_cells = cells[:i] + cells[i + 1 :]
                    reduced_labs = before + after
                    new.add((reduced_cells, reduced_labs))
                else:
                    new.add((cells, before + (union,) + after))
                if len(members) > 1 or union != members[0][1][i]:
                    changed = True
            if new != pats:
                pats = new
                changed = True
    return pats


def _memory(sft: Sft) -> int:
    m = 0
    for p in sft.forbidden:
        cells = [c[0] for c in p.shape]
        m = max(m, max(cells) - min(cells))
    return m


class _Stepper:
    """Memoized suffix-automaton step: (state, symbol) -> state or None."""

    def __init__(self, sft: Sft):
        self.chk = _EndChecker.build(sft)
        self.m = _memory(sft)
        self.alph = len(sft.alphabet)
        self.memo: dict = {}

    def step(self, s: tuple, a: int):
        key = (s, a)
        if key in self.memo:
            return self.memo[key]
        if self.chk.ok(s, a):
            out = (s + (a,))[-self.m :] if self.m else ()
        else:
            out = None
        self.memo[key] = out
        return out


def count_words(sft: Sft, n: int) -> int:
    """Exact number of locally admissible words on [0, n)."""
    if n == 0:
        return 1
    st = _Stepper(sft)
    layer = {(): 1}
    for _ in range(n):
        new = {}
        for s, cnt in layer.items():
            for a in range(st.alph):
                t = st.step(s, a)
                if t is not None:
                    new[t] = new.get(t, 0) + cnt
        layer = new
    return sum(layer.values())


def _free_step(states: set, st: _Stepper) -> set:
    out = set()
    for s in states:
        for a in range(st.alph):
            t = st.step(s, a)
            if t is not None:
                out.add(t)
    return out


def count_projected(
    sft: Sft,
    n: int,
    margin: int,
    project=None,
) -> int:
    """Distinct projected words of length n with an admissible preimage
    extending ``margin`` cells on both sides.

    ``project`` maps a symbol index of ``sft`` to an output token; the
    identity gives the extendable-mode pattern count of the SFT itself.
    """
    if n == 0:
        return 1
    st = _Stepper(sft)
    if project is None:
        project = lambda a: a
    preimages = {}
    for a in range(st.alph):
        preimages.setdefault(project(a), []).append(a)
    start = {()}
    for _ in range(margin):
        start = _free_step(start, st)
        if not start:
            return 0
    # right-liveness: state -> can it extend `margin` more steps
    live_memo = {}

    def live(s, k):
        if k == 0:
            return True
        key = (s, k)
        got = live_memo.get(key)
        if got is not None:
            return got
        ans = False
        for a in range(st.alph):
            t = st.step(s, a)
            if t is not None and live(t, k - 1):
                ans = True
                break
        live_memo[key] = ans
        return ans

    layer = {frozenset(start): 1}
    tokens = sorted(preimages)
    for _ in range(n):
        new = {}
        for A, cnt in layer.items():
            for tok in tokens:
                B = set()
                for s in A:
                    for a in preimages[tok]:
                        t = st.step(s, a)
                        if t is not None:
                            B.add(t)
                if B:
                    key = frozenset(B)
                    new[key] = new.get(key, 0) + cnt
        layer = new
        if not layer:
            return 0
    total = 0
    for A, cnt in layer.items():
        if any(live(s, margin) for s in A):
            total += cnt
    return total


def count_extendable(sft: Sft, n: int, margin: int) -> int:
    """Exact extendable-mode word count on [0, n) (d = 1 fast path)."""
    return count_projected(sft, n, margin, project=None)


def spectral_entropy(sft: Sft, tol: float = 1e-12, max_iter: int = 20000) -> float:
    """Entropy limit estimate: ln of the transfer spectral radius.

    Power iteration over the suffix automaton.  Intended as the oracle for
    small mixing Z-SFTs; the enumerative estimates remain the ground truth
    at finite windows.
    """
    st = _Stepper(sft)
    m = st.m
    alph = st.alph
    if m == 0:
        allowed = sum(1 for a in range(alph) if st.step((), a) is not None)
        return math.log(allowed)
    states = {()}
    for _ in range(m):
        states = _free_step(states, st)
    states = sorted(states)
    index = {s: i for i, s in enumerate(states)}
    succ = [[] for _ in states]
    for s in states:
        for a in range(alph):
            t = st.step(s, a)
            if t is not None and t in index:
                succ[index[s]].append(index[t])
    vec = [1.0] * len(states)
    lam = 0.0
    for _ in range(max_iter):
        new = [0.0] * len(states)
        for i, outs in enumerate(succ):
            vi = vec[i]
            for j in outs:
                new[j] += vi
        norm = max(new)
        if norm == 0.0:
            return float("-inf")
        new = [x / norm for x in new]
        if abs(norm - lam) < tol * max(1.0, norm):
            lam = norm
            break
        lam = norm
        vec = new
    return math.log(lam)
