"""Line-oriented text formats for potentials, loops and frame fields.

All three formats share a header of ``key value...`` lines; ``#`` starts a
comment.  Complex numbers are written as Python literals (``1.5-2j``).

Potential file::

    family so
    dim 8
    signature 1 7
    h -1 -1 -1 -1 1 1 1 1
    basepoint 0 0
    canonical 2
    mode normalized
    grid 0 0 1 0.05          # center re, center im, radius, spacing
    lambda 0 90 180          # degrees
    entry -1 1 5 | 0 1j      # lam power, row, col (1-based) | numerator | denominator
    entry -1 6 3 | 1 | 1 -2  # 1 / (1 - 2z)

Loop file: header (family, dim, signature, h) then ``coeff k`` blocks of
``dim`` rows.  Frame file: header plus ``point i j status`` records, each
followed by its ``coeff k`` blocks.
"""
from __future__ import annotations

import shlex
from dataclasses import dataclass, field

import numpy as np

from .dpw import FrameField, Grid, PotentialSpec
from .errors import ParseError
from .laurent import LaurentMatrix, RationalFn, RationalMatrix
from .liectx import lorentz, orthogonal, special_unitary
from .numfmt import fmt, fmt_complex
from .roots import cartan_data, grading

__all__ = [
    "PotentialFile",
    "parse_potential",
    "read_potential",
    "write_potential",
    "parse_loop",
    "read_loop",
    "write_loop",
    "write_frames",
    "read_frames",
    "fmt",
    "fmt_complex",
]


@dataclass
class PotentialFile:
    spec: PotentialSpec
    grid: tuple = (0j, 1.0, 0.05)
    lambdas_deg: list = field(default_factory=lambda: [0.0, 90.0, 180.0])
    index_set: tuple = None
    source: str = "<string>"


class _Lines:
    def __init__(self, text, source):
        self.source = source
        self.items = []
        for no, raw in enumerate(text.splitlines(), 1):
            body = raw.split("#", 1)[0]
            if body.strip():
                self.items.append((no, raw, body))

    def error(self, no, raw, token, msg):
        col = raw.find(token) + 1 if token and token in raw else 1
        return ParseError(msg, no, col, self.source)


def _complex(tok, lines, no, raw):
    try:
        return complex(tok.replace("i", "j") if tok.endswith("i") else tok)
    except ValueError:
        raise lines.error(no, raw, tok, f"not a number: {tok!r}") from None


def _float(tok, lines, no, raw):
    try:
        return float(tok)
    except ValueError:
        raise lines.error(no, raw, tok, f"not a real number: {tok!r}") from None


def _int(tok, lines, no, raw):
    try:
        return int(tok)
    except ValueError:
        raise lines.error(no, raw, tok, f"not an integer: {tok!r}") from None


_HEADER = ("family", "dim", "signature", "h")


def _read_header(lines, allowed):
    head, rest = {}, []
    for no, raw, body in lines.items:
        toks = body.split()
        key = toks[0]
        if key in allowed:
            if key in head and key not in ("entry",):
                raise lines.error(no, raw, key, f"duplicate key {key!r}")
            head[key] = (toks[1:], no, raw)
        else:
            rest.append((no, raw, toks))
    return head, rest


def _context(head, lines):
    def need(key):
        if key not in head:
            raise ParseError(f"missing key {key!r}", 1, 1, lines.source)
        return head[key]

    toks, no, raw = need("family")
    fam = toks[0] if toks else ""
    if fam not in ("so", "sl", "su"):
        raise lines.error(no, raw, fam or "family", f"unknown family {fam!r} (so or sl)")
    dt, dno, draw = need("dim")
    if len(dt) != 1:
        raise lines.error(dno, draw, "dim", "dim takes one integer")
    n = _int(dt[0], lines, dno, draw)
    sig = None
    if "signature" in head:
        st, sno, sraw = head["signature"]
        if len(st) != 2:
            raise lines.error(sno, sraw, "signature", "signature takes two integers p q")
        sig = (_int(st[0], lines, sno, sraw), _int(st[1], lines, sno, sraw))
        if sum(sig) != n:
            raise lines.error(sno, sraw, st[0], "signature does not add up to dim")
    h = None
    if "h" in head:
        ht, hno, hraw = head["h"]
        if len(ht) != n:
            raise lines.error(hno, hraw, "h", f"h needs {n} diagonal entries")
        h = np.array([_float(t, lines, hno, hraw) for t in ht])
        if not np.all(np.abs(np.abs(h) - 1) < 1e-12):
            raise lines.error(hno, hraw, ht[0], "h entries must be +1 or -1")
    if fam == "so":
        if sig is not None and sig[0] == 1:
            return lorentz(n, h=h)
        return orthogonal(n, h=h, signature=sig)
    return special_unitary(n, h=h, signature=sig or (0, n))


def _ce_for(ctx, index_set):
    if index_set is None:
        return None
    cd = cartan_data(ctx)
    bad = [i for i in index_set if not 1 <= i <= cd.rank]
    if bad or not index_set:
        raise ValueError(f"indices must lie in 1..{cd.rank}")
    mult = [1 if (i + 1) in index_set else 0 for i in range(cd.rank)]
    xi = sum(m * v for m, v in zip(mult, cd.dual_basis))
    if not isinstance(xi, np.ndarray):
        xi = np.zeros((ctx.n, ctx.n), dtype=complex)
    return grading(xi, ctx, cd, tuple(index_set))


def parse_potential(text, source="<string>"):
    """Parse a potential file; errors carry line and column."""
    lines = _Lines(text, source)
    head, rest = _read_header(lines, _HEADER + ("basepoint", "canonical", "mode", "grid", "lambda", "name"))
    ctx = _context(head, lines)
    n = ctx.n
    z0 = 0j
    if "basepoint" in head:
        t, no, raw = head["basepoint"]
        if len(t) == 1:
            z0 = _complex(t[0], lines, no, raw)
        elif len(t) == 2:
            z0 = complex(_float(t[0], lines, no, raw), _float(t[1], lines, no, raw))
        else:
            raise lines.error(no, raw, "basepoint", "basepoint takes re im or one complex")
    index_set = None
    if "canonical" in head:
        t, no, raw = head["canonical"]
        if t and t[0] != "none":
            index_set = tuple(sorted(_int(x, lines, no, raw) for x in t))
    mode = "normalized"
    if "mode" in head:
        t, no, raw = head["mode"]
        if not t or t[0] not in ("normalized", "extended-solution"):
            raise lines.error(no, raw, t[0] if t else "mode", "mode is normalized or extended-solution")
        mode = t[0]
    grid = (0j, 1.0, 0.05)
    if "grid" in head:
        t, no, raw = head["grid"]
        if len(t) != 4:
            raise lines.error(no, raw, "grid", "grid takes center_re center_im radius spacing")
        v = [_float(x, lines, no, raw) for x in t]
        if v[2] <= 0 or v[3] <= 0:
            raise lines.error(no, raw, t[2], "radius and spacing must be positive")
        grid = (complex(v[0], v[1]), v[2], v[3])
    lams = [0.0, 90.0, 180.0]
    if "lambda" in head:
        t, no, raw = head["lambda"]
        lams = [_float(x, lines, no, raw) for x in t]
    name = head["name"][0][0] if "name" in head and head["name"][0] else "potential"

    entries = {}
    for no, raw, toks in rest:
        if toks[0] != "entry":
            raise lines.error(no, raw, toks[0], f"unknown key {toks[0]!r}")
        parts = raw.split("#", 1)[0].split("|")
        lead = parts[0].split()
        if len(lead) != 4 or len(parts) not in (2, 3):
            raise lines.error(no, raw, "entry", "entry needs: power row col | numerator [| denominator]")
        power = _int(lead[1], lines, no, raw)
        i, j = _int(lead[2], lines, no, raw), _int(lead[3], lines, no, raw)
        if not (1 <= i <= n and 1 <= j <= n):
            raise lines.error(no, raw, lead[2], f"entry index outside 1..{n}")
        num = [_complex(x, lines, no, raw) for x in parts[1].split()]
        den = [_complex(x, lines, no, raw) for x in parts[2].split()] if len(parts) == 3 else [1.0]
        if not num or not den:
            raise lines.error(no, raw, "|", "empty coefficient list")
        if all(d == 0 for d in den):
            raise lines.error(no, raw, parts[2].strip(), "zero denominator")
        f = RationalFn(num, den)
        key = (i - 1, j - 1)
        bucket = entries.setdefault(power, {})
        bucket[key] = bucket[key] + f if key in bucket else f
    if not entries:
        entries = {-1: {}}
    terms = {p: RationalMatrix(n, e) for p, e in entries.items()}
    try:
        ce = _ce_for(ctx, index_set)
    except Exception as exc:  # index set outside the rank, etc.
        t, no, raw = head["canonical"]
        raise lines.error(no, raw, t[0], f"bad canonical index set: {exc}") from None
    spec = PotentialSpec(ctx, terms, z0, ce, mode, None, None, name)
    return PotentialFile(spec, grid, lams, index_set, source)


def read_potential(path):
    with open(path) as fh:
        return parse_potential(fh.read(), str(path))


def _ctx_header(ctx):
    out = [f"family {ctx.family}", f"dim {ctx.n}"]
    neg = int(np.sum(ctx.hdiag < 0)) if ctx.family == "sl" else int(np.sum(ctx.jdiag < 0))
    out.append(f"signature {neg} {ctx.n - neg}")
    out.append("h " + " ".join(fmt(s) for s in ctx.sdiag))
    return out


def write_potential(pf: PotentialFile):
    p = pf.spec
    out = _ctx_header(p.ctx)
    out.append(f"name {p.name}")
    out.append(f"basepoint {fmt(p.basepoint.real)} {fmt(p.basepoint.imag)}")
    out.append("canonical " + (" ".join(str(i) for i in pf.index_set) if pf.index_set else "none"))
    out.append(f"mode {p.mode}")
    c, r, s = pf.grid
    out.append(f"grid {fmt(c.real)} {fmt(c.imag)} {fmt(r)} {fmt(s)}")
    out.append("lambda " + " ".join(fmt(x) for x in pf.lambdas_deg))
    for power in sorted(p.terms):
        M = p.terms[power]
        for (i, j) in sorted(M.entries):
            f = M.entries[(i, j)]
            num = " ".join(fmt_complex(c) for c in f.num)
            den = " ".join(fmt_complex(c) for c in f.den)
            line = f"entry {power} {i + 1} {j + 1} | {num}"
            if not (len(f.den) == 1 and f.den[0] == 1):
                line += f" | {den}"
            out.append(line)
    return "\n".join(out) + "\n"


def _read_blocks(lines, rest, n, start=0):
    """coeff blocks from rest[start:], stopping at the first non coeff/row line."""
    coeffs = {}
    k = start
    while k < len(rest):
        no, raw, toks = rest[k]
        if toks[0] != "coeff":
            break
        if len(toks) != 2:
            raise lines.error(no, raw, "coeff", "coeff takes one integer power")
        power = _int(toks[1], lines, no, raw)
        if power in coeffs:
            raise lines.error(no, raw, toks[1], f"duplicate coeff {power}")
        rows = []
        for r in range(n):
            if k + 1 + r >= len(rest):
                raise lines.error(no, raw, "coeff", f"coeff {power} needs {n} rows")
            rno, rraw, rtoks = rest[k + 1 + r]
            if rtoks[0] != "row" or len(rtoks) != n + 1:
                raise lines.error(rno, rraw, rtoks[0], f"expected 'row' with {n} entries")
            rows.append([_complex(t, lines, rno, rraw) for t in rtoks[1:]])
        coeffs[power] = np.array(rows, dtype=complex)
        k += n + 1
    return coeffs, k


def parse_loop(text, source="<string>"):
    """(ctx, LaurentMatrix) from a loop file."""
    lines = _Lines(text, source)
    head, rest = _read_header(lines, _HEADER)
    ctx = _context(head, lines)
    coeffs, k = _read_blocks(lines, rest, ctx.n)
    if k < len(rest):
        no, raw, toks = rest[k]
        raise lines.error(no, raw, toks[0], f"unexpected {toks[0]!r}")
    if not coeffs:
        raise ParseError("no coeff blocks", 1, 1, source)
    return ctx, LaurentMatrix(coeffs)


def read_loop(path):
    with open(path) as fh:
        return parse_loop(fh.read(), str(path))


def _blocks_text(g: LaurentMatrix):
    out = []
    for k in range(g.kmin, g.kmax + 1):
        out.append(f"coeff {k}")
        for row in g.coeff(k):
            out.append("row " + " ".join(fmt_complex(v) for v in row))
    return out


def write_loop(ctx, g: LaurentMatrix):
    return "\n".join(_ctx_header(ctx) + _blocks_text(g)) + "\n"


def write_frames(F: FrameField, index_set=None, extra_header=()):
    """Frame field as text: context, grid, canonical index set, per-point loops."""
    ctx = F.ctx
    out = [f"# {line}" for line in extra_header]
    out += ["kind frames"] + _ctx_header(ctx)
    out.append("hdiag " + " ".join(fmt(v) for v in ctx.hdiag))
    out.append(f"which {F.which}")
    g = F.grid
    out.append(f"lattice {fmt(g.center.real)} {fmt(g.center.imag)} {fmt(g.spacing)}")
    out.append(f"basepoint {fmt(F.basepoint.real)} {fmt(F.basepoint.imag)}")
    out.append("canonical " + (" ".join(str(i) for i in index_set) if index_set else "none"))
    for k, (i, j) in enumerate(g.index):
        Fk = F.frames[k]
        if Fk is None:
            out.append(f"point {i} {j} failed {shlex.quote(F.failures.get(k, 'failed'))}")
            continue
        out.append(f"point {i} {j} ok")
        out += _blocks_text(Fk)
    return "\n".join(out) + "\n"


def read_frames(text, source="<string>"):
    """(FrameField, index_set) from write_frames output."""
    lines = _Lines(text, source)
    keys = _HEADER + ("kind", "hdiag", "which", "lattice", "basepoint", "canonical")
    head, rest = {}, []
    for no, raw, body in lines.items:
        toks = body.split()
        if toks[0] in keys and not rest:
            head[toks[0]] = (toks[1:], no, raw)
        else:
            rest.append((no, raw, toks))
    if "kind" not in head or head["kind"][0][:1] != ["frames"]:
        raise ParseError("not a frame file (missing 'kind frames')", 1, 1, source)
    ctx = _context(head, lines)
    if "hdiag" in head:
        t, no, raw = head["hdiag"]
        hd = np.array([_float(x, lines, no, raw) for x in t])
        if hd.shape != (ctx.n,):
            raise lines.error(no, raw, "hdiag", "hdiag length must equal dim")
        from dataclasses import replace
        other = ctx.hdiag.copy() if np.all(hd > 0) and not np.all(ctx.hdiag > 0) else None
        ctx = replace(ctx, hdiag=hd, other_h=other,
                      name=ctx.name + ("^U" if other is not None else ""))
    if "lattice" not in head:
        raise ParseError("missing key 'lattice'", 1, 1, source)
    t, no, raw = head["lattice"]
    if len(t) != 3:
        raise lines.error(no, raw, "lattice", "lattice takes center_re center_im spacing")
    c = complex(_float(t[0], lines, no, raw), _float(t[1], lines, no, raw))
    h = _float(t[2], lines, no, raw)
    z0 = 0j
    if "basepoint" in head:
        t, no, raw = head["basepoint"]
        z0 = complex(_float(t[0], lines, no, raw), _float(t[1], lines, no, raw))
    index_set = None
    if "canonical" in head:
        t, no, raw = head["canonical"]
        if t and t[0] != "none":
            index_set = tuple(_int(x, lines, no, raw) for x in t)
    which = head["which"][0][0] if "which" in head else "noncompact"
    idx, frames, failures = [], [], {}
    k = 0
    while k < len(rest):
        no, raw, toks = rest[k]
        if toks[0] != "point" or len(toks) < 4:
            raise lines.error(no, raw, toks[0], "expected 'point i j status'")
        i, j = _int(toks[1], lines, no, raw), _int(toks[2], lines, no, raw)
        idx.append((i, j))
        if toks[3] == "ok":
            coeffs, k = _read_blocks(lines, rest, ctx.n, k + 1)
            if not coeffs:
                raise lines.error(no, raw, "point", "point without coeff blocks")
            frames.append(LaurentMatrix(coeffs))
        else:
            failures[len(frames)] = " ".join(toks[4:]) or toks[3]
            frames.append(None)
            k += 1
    grid = Grid(c, h, np.array(idx, dtype=int).reshape(-1, 2))
    base = None
    for m, zz in enumerate(grid.points):
        if abs(zz - z0) < 1e-12 * max(1.0, abs(z0)) and frames[m] is not None:
            base = m
    F = FrameField(grid, ctx, frames, [None] * len(frames), [None] * len(frames), z0, base,
                   failures, which)
    return F, index_set
