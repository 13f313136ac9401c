"""Line-based text formats for subsets, patterns, SFTs, configurations,
tilings, and marker kits.

Every file starts with a kind tag line; metadata lines are ``key: value``;
element lists are one element per line, space-separated integer
coordinates.  Compound objects nest named ``begin <name>`` / ``end <name>``
blocks.  Writers are deterministic, so files are byte-stable.
"""

from __future__ import annotations

from fractions import Fraction

from .groups import FiniteSubset, subset
from .markers import MarkerKit
from .quasitiling import QuasiTiling, ShapeSet
from .subshift import Alphabet, Configuration, Pattern, Sft


class FormatError(ValueError):
    pass


def _fmt_elem(e) -> str:
    return " ".join(str(c) for c in e)


def _parse_elem(line: str) -> tuple:
    return tuple(int(tok) for tok in line.split())


def _check_symbol(s):
    if not isinstance(s, str) or not s or any(ch.isspace() for ch in s):
        raise FormatError(
            f"symbol {s!r} is not serializable (plain non-blank strings only)"
        )
    return s


# ---------------------------------------------------------------------------
# block splitting


def _split_blocks(lines: list, i: int = 0, end_at: str | None = None):
    """Parse lines into (meta dict, body rows, named blocks) until ``end``."""
    meta = {}
    rows = []
    blocks = []
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("#"):
            continue
        if line.startswith("begin "):
            name = line[len("begin ") :].strip()
            inner, i = _split_blocks(lines, i, end_at=name)
            blocks.append((name, inner))
            continue
        if line.startswith("end"):
            tag = line[3:].strip()
            if end_at is None:
                raise FormatError("unexpected end outside a block")
            if tag and tag != end_at:
                raise FormatError(f"mismatched end: expected {end_at}, got {tag}")
            return (meta, rows, blocks), i
        if ":" in line and not line[0].isdigit() and not line.startswith("-"):
            key, _, val = line.partition(":")
            meta[key.strip()] = val.strip()
            continue
        rows.append(line)
    if end_at is not None:
        raise FormatError(f"unterminated block {end_at}")
    return (meta, rows, blocks), i


def _parse_document(text: str, kind: str):
    lines = text.splitlines()
    body = None
    for i, line in enumerate(lines):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if s != kind:
            raise FormatError(f"expected a {kind} file, found {s!r}")
        body, _ = _split_blocks(lines, i + 1)
        break
    if body is None:
        raise FormatError("empty file")
    return body


# ---------------------------------------------------------------------------
# subsets


def dump_subset(S: FiniteSubset, kind: str = "subset") -> str:
    out = [kind, f"role: {S.role}", f"dim: {S.dim}"]
    if S.extent is not None:
        out.append(
            "extent: " + " ".join(f"{lo}..{hi}" for lo, hi in S.extent)
        )
    out.extend(_fmt_elem(e) for e in S.elements)
    return "\n".join(out) + "\n"


def _subset_from_body(body, default_role="generic") -> FiniteSubset:
    meta, rows, _ = body
    role = meta.get("role", default_role)
    dim = int(meta.get("dim", "1"))
    extent = None
    if "extent" in meta:
        extent = tuple(
            tuple(int(x) for x in span.split("..")) for span in meta["extent"].split()
        )
    return FiniteSubset(tuple(_parse_elem(r) for r in rows), role, extent, dim)


def load_subset(text: str) -> FiniteSubset:
    return _subset_from_body(_parse_document(text, "subset"))


# ---------------------------------------------------------------------------
# patterns


def dump_pattern(p: Pattern, kind: str = "pattern") -> str:
    out = [kind, f"dim: {p.shape.dim}"]
    for c in p.shape:
        out.append(f"{_fmt_elem(c)} {_check_symbol(p.labels[c])}")
    return "\n".join(out) + "\n"


def _pattern_from_body(body) -> Pattern:
    meta, rows, _ = body
    dim = int(meta.get("dim", "1"))
    labels = {}
    for r in rows:
        toks = r.split()
        labels[tuple(int(t) for t in toks[:-1])] = toks[-1]
    return Pattern(subset(labels.keys(), dim=dim), labels)


def load_pattern(text: str) -> Pattern:
    return _pattern_from_body(_parse_document(text, "pattern"))


# ---------------------------------------------------------------------------
# SFTs


def dump_sft(sft: Sft) -> str:
    for s in sft.alphabet.symbols:
        _check_symbol(s)
    out = ["sft"]
    if sft.name:
        out.append(f"name: {sft.name}")
    out.append("alphabet: " + " ".join(sft.alphabet.symbols))
    if sft.alphabet.zero is not None:
        out.append(f"zero: {sft.alphabet.zero}")
    if sft.alphabet.one is not None:
        out.append(f"one: {sft.alphabet.one}")
    out.append("begin ksft")
    out.append(dump_subset(sft.k_sft).rstrip())
    out.append("end ksft")
    if sft.k_mix is not None:
        out.append("begin kmix")
        out.append(dump_subset(sft.k_mix).rstrip())
        out.append("end kmix")
    for i, p in enumerate(sft.forbidden):
        out.append(f"begin forbidden{i}")
        out.append(dump_pattern(p).rstrip())
        out.append(f"end forbidden{i}")
    return "\n".join(out) + "\n"


def load_sft(text: str) -> Sft:
    meta, rows, blocks = _parse_document(text, "sft")
    if rows:
        raise FormatError(f"unexpected rows in sft file: {rows[:1]}")
    alphabet = Alphabet(
        tuple(meta["alphabet"].split()),
        zero=meta.get("zero"),
        one=meta.get("one"),
    )
    k_sft = None
    k_mix = None
    forbidden = []
    for name, body in blocks:
        inner_meta, inner_rows, inner_blocks = body
        if name == "ksft":
            k_sft = _nested_subset(body)
        elif name == "kmix":
            k_mix = _nested_subset(body)
        elif name.startswith("forbidden"):
            forbidden.append(_nested_pattern(body))
        else:
            raise FormatError(f"unknown sft block {name}")
    if k_sft is None:
        raise FormatError("sft file lacks a ksft block")
    return Sft(alphabet, tuple(forbidden), k_sft, k_mix, meta.get("name", ""))


def _nested_subset(body) -> FiniteSubset:
    meta, rows, _ = body
    if rows and rows[0] == "subset":
        rows = rows[1:]
    return _subset_from_body((meta, rows, ()))


def _nested_pattern(body) -> Pattern:
    meta, rows, _ = body
    if rows and rows[0] == "pattern":
        rows = rows[1:]
    return _pattern_from_body((meta, rows, ()))


# ---------------------------------------------------------------------------
# configurations


def dump_configuration(cfg: Configuration) -> str:
    out = ["configuration", f"dim: {cfg.window.dim}", f"boundary: {cfg.boundary_mode}"]
    for c in cfg.window:
        out.append(f"{_fmt_elem(c)} {_check_symbol(cfg.labels[c])}")
    return "\n".join(out) + "\n"


def load_configuration(text: str) -> Configuration:
    meta, rows, _ = _parse_document(text, "configuration")
    dim = int(meta.get("dim", "1"))
    labels = {}
    for r in rows:
        toks = r.split()
        labels[tuple(int(t) for t in toks[:-1])] = toks[-1]
    return Configuration(
        subset(labels.keys(), dim=dim), labels, meta.get("boundary", "free")
    )


# ---------------------------------------------------------------------------
# tilings


def dump_tiling(t: QuasiTiling) -> str:
    out = ["tiling", f"shapes: {len(t.shape_set.shapes)}"]
    out.append("begin window")
    out.append(dump_subset(t.window).rstrip())
    out.append("end window")
    for i, s in enumerate(t.shape_set.shapes):
        out.append(f"begin shape{i}")
        out.append(dump_subset(s).rstrip())
        out.append(f"end shape{i}")
    out.append("begin centers")
    for c in sorted(t.centers):
        out.append(f"{_fmt_elem(c)} {t.centers[c]}")
    out.append("end centers")
    out.append("begin placement")
    for c in t.placement_order:
        out.append(_fmt_elem(c))
    out.append("end placement")
    return "\n".join(out) + "\n"


def load_tiling(text: str) -> QuasiTiling:
    meta, rows, blocks = _parse_document(text, "tiling")
    nshapes = int(meta["shapes"])
    window = None
    shapes = [None] * nshapes
    centers = {}
    placement = []
    for name, body in blocks:
        if name == "window":
            window = _nested_subset(body)
        elif name.startswith("shape"):
            shapes[int(name[len("shape") :])] = _nested_subset(body)
        elif name == "centers":
            _, rws, _ = body
            for r in rws:
                toks = r.split()
                centers[tuple(int(x) for x in toks[:-1])] = int(toks[-1])
        elif name == "placement":
            _, rws, _ = body
            placement = [_parse_elem(r) for r in rws]
        else:
            raise FormatError(f"unknown tiling block {name}")
    if window is None or any(s is None for s in shapes):
        raise FormatError("tiling file missing window or shapes")
    return QuasiTiling(ShapeSet(tuple(shapes)), centers, window, tuple(placement))


# ---------------------------------------------------------------------------
# marker kits


def dump_marker_kit(kit: MarkerKit) -> str:
    out = ["markerkit", f"r: {kit.r}", f"mode: {kit.mode_tag or 'n/a'}"]

    def block(name, payload):
        out.append(f"begin {name}")
        out.append(payload.rstrip())
        out.append(f"end {name}")

    block("M", dump_subset(kit.shape))
    block("F", dump_subset(kit.surplus_window))
    block("K", dump_subset(kit.k))
    out.append("begin anchors")
    for h, hg in kit.anchors:
        out.append(f"{_fmt_elem(h)} ; {_fmt_elem(hg)}")
    out.append("end anchors")
    for i, p in enumerate(kit.surplus):
        block(f"surplus{i}", dump_pattern(p))
    for i, p in enumerate(kit.markers):
        block(f"marker{i}", dump_pattern(p))
    block("substrate", dump_configuration(kit.substrate))
    for i, c in enumerate(kit.carriers):
        block(f"carrier{i}", dump_configuration(c))
    return "\n".join(out) + "\n"


def load_marker_kit(text: str) -> MarkerKit:
    meta, rows, blocks = _parse_document(text, "markerkit")
    r = int(meta["r"])
    named = dict()
    for name, body in blocks:
        named[name] = body
    anchors = []
    if "anchors" in named:
        _, rws, _ = named["anchors"]
        for line in rws:
            left, _, right = line.partition(";")
            anchors.append((_parse_elem(left), _parse_elem(right)))

    def cfg_from(body) -> Configuration:
        m, rws, _ = body
        if rws and rws[0] == "configuration":
            rws = rws[1:]
        dim = int(m.get("dim", "1"))
        labels = {}
        for rr in rws:
            toks = rr.split()
            labels[tuple(int(x) for x in toks[:-1])] = toks[-1]
        return Configuration(subset(labels.keys(), dim=dim), labels, m.get("boundary", "free"))

    return MarkerKit(
        shape=_nested_subset(named["M"]).with_role("M-marker-shape"),
        surplus_window=_nested_subset(named["F"]),
        surplus=tuple(_nested_pattern(named[f"surplus{i}"]) for i in range(r)),
        anchors=tuple(anchors),
        substrate=cfg_from(named["substrate"]),
        markers=tuple(_nested_pattern(named[f"marker{i}"]) for i in range(r)),
        carriers=tuple(cfg_from(named[f"carrier{i}"]) for i in range(r)),
        k=_nested_subset(named["K"]),
        r=r,
        mode_tag=meta.get("mode", ""),
    )


# ---------------------------------------------------------------------------
# path helpers


def save(path, text: str):
    with open(path, "w") as fh:
        fh.write(text)


def load(path) -> str:
    with open(path) as fh:
        return fh.read()
