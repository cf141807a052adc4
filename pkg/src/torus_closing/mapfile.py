"""Plain-text map descriptions.

One stanza per line, ``kind key=value ...``, with ``#`` comments::

    order=right-to-left
    disk name=U0 cx=0.5 cy=0.5 r=0.05
    band name=low lo=0.0 hi=0.1
    hshear eps=0.02 band=low inner=0.3 outer=0.7
    disktwist disk=U0 t=1.0
    translate a=0.37 b=0.18

The ``order`` header is mandatory. With ``right-to-left`` the stanzas read
like function composition (the last one acts first); ``left-to-right`` lists
them in application order. ``band=`` and ``disk=`` accept either a declared
name or inline numbers (``band=0.0,0.1``).
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources

from .core import (
    SHEAR_PROFILE, BumpProfile, Disk, DiskTwist, HorizontalShear, Point2, TorusMap,
    Translation, VerticalShear,
)
from .errors import DiskTooLarge, MapFileError

__all__ = ["MapFile", "parse_map", "load_map", "serialize_map", "builtin_maps", "map_digest"]

ORDERS = ("right-to-left", "left-to-right")
_TOKEN = re.compile(r"\S+")

_SCHEMA = {
    "translate": ({"a", "b"}, set()),
    "hshear": ({"eps"}, {"band", "inner", "outer"}),
    "vshear": ({"eps"}, {"band", "inner", "outer"}),
    "disktwist": ({"t"}, {"disk", "cx", "cy", "r", "inner", "outer"}),
    "disk": ({"name", "cx", "cy", "r"}, set()),
    "band": ({"name", "lo", "hi"}, set()),
}


@dataclass
class MapFile:
    chain: TorusMap
    disks: dict = field(default_factory=dict)
    bands: dict = field(default_factory=dict)
    source: str = "<string>"

    @property
    def digest(self):
        return map_digest(self)


class _Stanza:
    def __init__(self, lineno, kind, kind_col, items):
        self.lineno = lineno
        self.kind = kind
        self.kind_col = kind_col
        self.items = items  # key -> (value, key_col, value_col)

    def fail(self, msg, key=None, at_value=False):
        col = self.kind_col
        if key is not None and key in self.items:
            col = self.items[key][2 if at_value else 1]
        raise MapFileError(msg, self.lineno, col)

    def number(self, key, default=None):
        if key not in self.items:
            if default is None:
                self.fail(f"{self.kind}: missing '{key}'")
            return default
        text = self.items[key][0]
        try:
            return float(text)
        except ValueError:
            self.fail(f"{key}: not a number: {text!r}", key, at_value=True)

    def text(self, key):
        return self.items[key][0] if key in self.items else None


def _tokenize(line, lineno):
    body = line.split("#", 1)[0]
    tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]
    if not tokens:
        return None
    (kind, kind_col), rest = tokens[0], tokens[1:]
    items = {}
    for tok, col in rest:
        if "=" not in tok:
            raise MapFileError(f"expected key=value, got {tok!r}", lineno, col)
        key, value = tok.split("=", 1)
        if not key or not value:
            raise MapFileError(f"empty key or value in {tok!r}", lineno, col)
        if key in items:
            raise MapFileError(f"duplicate key '{key}'", lineno, col)
        items[key] = (value, col, col + len(key) + 1)
    return _Stanza(lineno, kind, kind_col, items)


def _profile(st, default):
    inner = st.number("inner", default.inner)
    outer = st.number("outer", default.outer)
    try:
        return BumpProfile(inner, outer)
    except ValueError as exc:
        st.fail(str(exc), "inner" if "inner" in st.items else "outer", at_value=True)


def _band(st, bands, default):
    raw = st.text("band")
    if raw is None:
        return default
    if raw in bands:
        return bands[raw]
    parts = raw.split(",")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        st.fail(f"band: expected a declared name or 'lo,hi', got {raw!r}", "band", at_value=True)
    if not (0.0 <= lo < hi <= 1.0):
        st.fail(f"band must satisfy 0 <= lo < hi <= 1, got {raw}", "band", at_value=True)
    return lo, hi


def _build(st, disks, bands):
    kind = st.kind
    if kind == "translate":
        return Translation(st.number("a"), st.number("b"))
    if kind in ("hshear", "vshear"):
        cls = HorizontalShear if kind == "hshear" else VerticalShear
        default_band = cls.__dataclass_fields__["band"].default
        return cls(st.number("eps"), _band(st, bands, default_band), _profile(st, SHEAR_PROFILE))
    if kind == "disktwist":
        ref = st.text("disk")
        if ref is not None:
            if any(k in st.items for k in ("cx", "cy", "r")):
                st.fail("give either disk= or cx/cy/r, not both", "disk")
            if ref not in disks:
                st.fail(f"unknown disk {ref!r}", "disk", at_value=True)
            disk = disks[ref]
        else:
            r = st.number("r")
            if not (0.0 < r < 0.5):
                st.fail(f"radius must lie in (0, 1/2), got {r}", "r", at_value=True)
            disk = Disk(Point2(st.number("cx"), st.number("cy")), r)
        return DiskTwist(disk.center, disk.radius, st.number("t"), _profile(st, BumpProfile()))
    raise AssertionError(kind)


def parse_map(text, source="<string>"):
    """Parse a map description; raises :class:`MapFileError` with line/column."""
    order = None
    gens, disks, bands = [], {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        st = _tokenize(line, lineno)
        if st is None:
            continue
        if st.kind.startswith("order="):
            if order is not None:
                raise MapFileError("duplicate order header", lineno, st.kind_col)
            if gens or disks or bands:
                raise MapFileError("order header must precede all stanzas", lineno, st.kind_col)
            order = st.kind.split("=", 1)[1]
            if order not in ORDERS:
                raise MapFileError(f"order must be one of {', '.join(ORDERS)}", lineno,
                                   st.kind_col + len("order="))
            if st.items:
                raise MapFileError("unexpected tokens after order header", lineno,
                                   min(v[1] for v in st.items.values()))
            continue
        if order is None:
            raise MapFileError("missing 'order=right-to-left' header", lineno, st.kind_col)
        if st.kind not in _SCHEMA:
            raise MapFileError(f"unknown stanza kind {st.kind!r}", lineno, st.kind_col)
        required, optional = _SCHEMA[st.kind]
        for key in st.items:
            if key not in required | optional:
                st.fail(f"{st.kind}: unknown key '{key}'", key)
        if st.kind == "disktwist" and "disk" not in st.items:
            required = required | {"cx", "cy", "r"}
        for key in sorted(required):
            if key not in st.items:
                st.fail(f"{st.kind}: missing '{key}'")
        if st.kind == "disk":
            name = st.text("name")
            if name in disks:
                st.fail(f"disk {name!r} already declared", "name", at_value=True)
            try:
                disks[name] = Disk.make(st.number("cx"), st.number("cy"), st.number("r"))
            except DiskTooLarge as exc:
                st.fail(str(exc), "r", at_value=True)
        elif st.kind == "band":
            name = st.text("name")
            if name in bands:
                st.fail(f"band {name!r} already declared", "name", at_value=True)
            lo, hi = st.number("lo"), st.number("hi")
            if not (0.0 <= lo < hi <= 1.0):
                st.fail(f"band must satisfy 0 <= lo < hi <= 1, got {lo}, {hi}", "lo", at_value=True)
            bands[name] = (lo, hi)
        else:
            gens.append(_build(st, disks, bands))
    if order is None:
        raise MapFileError("missing 'order=right-to-left' header", 1, 1)
    if order == "left-to-right":
        gens.reverse()
    return MapFile(TorusMap(tuple(gens)), disks, bands, source)


def _f(v):
    return repr(float(v))


def _stanza(g):
    if isinstance(g, Translation):
        return f"translate a={_f(g.a)} b={_f(g.b)}"
    if isinstance(g, (HorizontalShear, VerticalShear)):
        lo, hi = g.band
        return (f"{g.kind} eps={_f(g.eps)} band={_f(lo)},{_f(hi)} "
                f"inner={_f(g.profile.inner)} outer={_f(g.profile.outer)}")
    return (f"disktwist cx={_f(g.center[0])} cy={_f(g.center[1])} r={_f(g.radius)} t={_f(g.t)} "
            f"inner={_f(g.profile.inner)} outer={_f(g.profile.outer)}")


def serialize_map(mf):
    """Canonical text for ``mf`` (a :class:`MapFile` or a bare TorusMap)."""
    if isinstance(mf, TorusMap):
        mf = MapFile(mf)
    lines = ["order=right-to-left"]
    for name, d in mf.disks.items():
        lines.append(f"disk name={name} cx={_f(d.center[0])} cy={_f(d.center[1])} r={_f(d.radius)}")
    for name, (lo, hi) in mf.bands.items():
        lines.append(f"band name={name} lo={_f(lo)} hi={_f(hi)}")
    lines.extend(_stanza(g) for g in mf.chain.chain)
    return "\n".join(lines) + "\n"


def map_digest(mf):
    return hashlib.sha256(serialize_map(mf).encode()).hexdigest()


def builtin_maps():
    """Names of the maps shipped in the package data."""
    root = resources.files("torus_closing") / "data"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".map"))


def load_map(path):
    """Load a file, or a shipped map given as ``builtin:NAME``."""
    path = str(path)
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        res = resources.files("torus_closing") / "data" / f"{name}.map"
        if not res.is_file():
            raise MapFileError(f"no built-in map {name!r} (have: {', '.join(builtin_maps())})", 0, 0)
        return parse_map(res.read_text(), path)
    with open(path, encoding="utf-8") as fh:
        return parse_map(fh.read(), path)
