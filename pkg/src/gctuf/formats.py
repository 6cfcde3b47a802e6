"""Line-oriented text formats for instances; grammar in docs/format.md.

Group elements are written as bracketed residue lists, e.g. ``[1,0]``; the
trivial group has the single element ``[]``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .base_lattice import GclfInstance, LatticeDag
from .base_network import CirculationInstance
from .groups import AbelianGroup, GroupElement, TargetSet
from .instances import GctufInstance
from .ip_reduction import IpInstance
from .tu_structure import StructureError, tree_from_text, tree_to_text


class FormatError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass
class _Lines:
    rows: list  # (line number, stripped text)
    pos: int = 0

    @classmethod
    def of(cls, text: str) -> _Lines:
        out = []
        for i, raw in enumerate(text.splitlines(), start=1):
            s = raw.split("#", 1)[0].rstrip()
            if s.strip():
                out.append((i, s))
        return cls(out)

    def done(self) -> bool:
        return self.pos >= len(self.rows)

    def take(self):
        if self.done():
            last = self.rows[-1][0] if self.rows else 0
            raise FormatError(last + 1, "unexpected end of input")
        self.pos += 1
        return self.rows[self.pos - 1]


def _ints(ln: int, words) -> list[int]:
    try:
        return [int(w) for w in words]
    except ValueError as exc:
        raise FormatError(ln, f"expected integers: {exc}") from None


def parse_element(ln: int, G: AbelianGroup, word: str) -> GroupElement:
    w = word.strip()
    if not (w.startswith("[") and w.endswith("]")):
        raise FormatError(ln, f"group element must be bracketed, got {word!r}")
    body = w[1:-1].strip()
    res = _ints(ln, body.split(",")) if body else []
    if len(res) != G.rank:
        raise FormatError(ln, f"element {word} does not match group {G}")
    return G.element(res)


def format_element(g: GroupElement) -> str:
    return "[" + ",".join(str(r) for r in g.residues) + "]"


def _elements(ln: int, G: AbelianGroup, words) -> list[GroupElement]:
    return [parse_element(ln, G, w) for w in words]


def _group(ln: int, words) -> AbelianGroup:
    mods = _ints(ln, words)
    if any(m < 1 for m in mods):
        raise FormatError(ln, "moduli must be positive")
    return AbelianGroup(tuple(mods))


def _matrix(lines: _Lines, ln: int, words) -> list[list[int]]:
    if len(words) != 2:
        raise FormatError(ln, "expected 'matrix <rows> <cols>'")
    k, n = _ints(ln, words)
    M = []
    for _ in range(k):
        rl, text = lines.take()
        row = _ints(rl, text.split())
        if len(row) != n:
            raise FormatError(rl, f"row has {len(row)} entries, expected {n}")
        M.append(row)
    return M


# ---------------------------------------------------------------- GCTUF instances


def parse_instance(text: str) -> GctufInstance:
    lines = _Lines.of(text)
    sec: dict = {}
    tree_text = None
    while not lines.done():
        ln, s = lines.take()
        head, *words = s.split()
        if head in sec:
            raise FormatError(ln, f"duplicate section {head!r}")
        if head == "matrix":
            sec["matrix"] = (ln, _matrix(lines, ln, words))
        elif head in ("rhs", "objective", "box"):
            sec[head] = (ln, _ints(ln, words))
        elif head == "group":
            sec["group"] = (ln, _group(ln, words))
        elif head in ("labels", "targets"):
            sec[head] = (ln, words)
        elif head == "decomposition":
            body = []
            while not lines.done():
                body.append(lines.take()[1])
            tree_text = "\n".join(body)
            sec["decomposition"] = (ln, None)
        else:
            raise FormatError(ln, f"unknown section {head!r}")
    for need in ("matrix", "rhs", "group", "labels", "targets"):
        if need not in sec:
            raise FormatError((lines.rows[-1][0] if lines.rows else 0) + 1, f"missing section {need!r}")
    T = sec["matrix"][1]
    n = len(T[0]) if T else len(sec["labels"][1])
    G = sec["group"][1]
    ln, b = sec["rhs"]
    if len(b) != len(T):
        raise FormatError(ln, f"rhs has {len(b)} entries for {len(T)} rows")
    ln, words = sec["labels"]
    gamma = _elements(ln, G, words)
    if len(gamma) != n:
        raise FormatError(ln, f"{len(gamma)} labels for {n} variables")
    ln, words = sec["targets"]
    R = TargetSet.of(G, _elements(ln, G, words))
    box = None
    if "box" in sec:
        ln, vals = sec["box"]
        if len(vals) != 2 * n:
            raise FormatError(ln, "box needs a lower and an upper bound per variable")
        box = tuple((vals[2 * i], vals[2 * i + 1]) for i in range(n))
    objective = None
    if "objective" in sec:
        ln, objective = sec["objective"]
        if len(objective) != n:
            raise FormatError(ln, f"objective has {len(objective)} entries for {n} variables")
        objective = tuple(objective)
    decomposition = None
    if tree_text is not None:
        try:
            decomposition = tree_from_text(_dedent(tree_text))
        except (StructureError, ValueError, KeyError) as exc:
            raise FormatError(sec["decomposition"][0], f"bad decomposition tree: {exc}") from None
    return GctufInstance(T, b, G, gamma, R, box=box, objective=objective, decomposition=decomposition)


def _dedent(text: str) -> str:
    rows = text.splitlines()
    pad = min(len(r) - len(r.lstrip(" ")) for r in rows) if rows else 0
    return "\n".join(r[pad:] for r in rows)


def format_instance(inst: GctufInstance) -> str:
    out = [f"matrix {inst.k} {inst.n}"]
    out += [" ".join(str(v) for v in r) for r in inst.T]
    out.append("rhs " + " ".join(str(v) for v in inst.b) if inst.b else "rhs")
    out.append(("group " + " ".join(str(m) for m in inst.G.moduli)).rstrip())
    out.append(("labels " + " ".join(format_element(g) for g in inst.gamma)).rstrip())
    out.append(("targets " + " ".join(format_element(r) for r in inst.R)).rstrip())
    if inst.box is not None:
        out.append("box " + " ".join(f"{lo} {hi}" for lo, hi in inst.box))
    if inst.objective is not None:
        out.append("objective " + " ".join(str(v) for v in inst.objective))
    if inst.decomposition is not None:
        out.append("decomposition")
        out += ["  " + ln for ln in tree_to_text(inst.decomposition).splitlines()]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- IPs


def parse_ip(text: str) -> IpInstance:
    lines = _Lines.of(text)
    A = b = c = None
    while not lines.done():
        ln, s = lines.take()
        head, *words = s.split()
        if head == "matrix":
            A = _matrix(lines, ln, words)
        elif head == "rhs":
            b = _ints(ln, words)
        elif head == "objective":
            c = _ints(ln, words)
        else:
            raise FormatError(ln, f"unknown section {head!r} in an IP file")
    if A is None or b is None:
        raise FormatError(len(lines.rows) + 1, "IP file needs 'matrix' and 'rhs'")
    return IpInstance(A, b, c)


def format_ip(ip: IpInstance) -> str:
    out = [f"matrix {len(ip.A)} {ip.n}"] + [" ".join(map(str, r)) for r in ip.A]
    out.append("rhs " + " ".join(map(str, ip.b)))
    if ip.c is not None:
        out.append("objective " + " ".join(map(str, ip.c)))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- lattices and circulations


def parse_gclf(text: str) -> GclfInstance:
    """``n`` then ``u v`` arc lines, then ``group``, ``labels`` and ``target``."""
    lines = _Lines.of(text)
    ln, s = lines.take()
    n = _ints(ln, s.split())
    if len(n) != 1:
        raise FormatError(ln, "first line must be the ground set size")
    n = n[0]
    arcs = []
    G = gamma = r = None
    while not lines.done():
        ln, s = lines.take()
        head, *words = s.split()
        if head == "group":
            G = _group(ln, words)
        elif head == "labels":
            gamma = words
            gl = ln
        elif head == "target":
            r = words
            rl = ln
        else:
            uv = _ints(ln, s.split())
            if len(uv) != 2:
                raise FormatError(ln, "arc lines hold two vertices")
            arcs.append(tuple(uv))
    if G is None or gamma is None or r is None:
        raise FormatError(len(lines.rows) + 1, "GCLF file needs 'group', 'labels' and 'target'")
    labels = _elements(gl, G, gamma)
    if len(labels) != n:
        raise FormatError(gl, f"{len(labels)} labels for {n} ground elements")
    if len(r) != 1:
        raise FormatError(rl, "exactly one target element")
    try:
        dag = LatticeDag(n, tuple(arcs))
    except ValueError as exc:
        raise FormatError(1, str(exc)) from None
    return GclfInstance(dag, G, tuple(labels), parse_element(rl, G, r[0]))


def format_gclf(inst: GclfInstance) -> str:
    out = [str(inst.lattice.n)] + [f"{u} {v}" for u, v in inst.lattice.arcs]
    out.append(("group " + " ".join(map(str, inst.G.moduli))).rstrip())
    out.append(("labels " + " ".join(format_element(g) for g in inst.gamma)).rstrip())
    out.append("target " + format_element(inst.r))
    return "\n".join(out) + "\n"


def parse_gcc(text: str) -> CirculationInstance:
    """``vertices n``, ``group``, ``arc tail head cap length label`` lines, ``target``, optional ``cycle-bound``."""
    lines = _Lines.of(text)
    nv = G = target = cycle_bound = None
    arcs = []
    while not lines.done():
        ln, s = lines.take()
        head, *words = s.split()
        if head == "vertices":
            nv = _ints(ln, words)[0]
        elif head == "group":
            G = _group(ln, words)
        elif head == "arc":
            if G is None:
                raise FormatError(ln, "'group' must precede the arcs")
            if len(words) != 5:
                raise FormatError(ln, "expected 'arc tail head cap length label'")
            t, h, u, l = _ints(ln, words[:4])
            arcs.append((t, h, u, l, parse_element(ln, G, words[4])))
        elif head == "target":
            if G is None:
                raise FormatError(ln, "'group' must precede the target")
            target = parse_element(ln, G, words[0])
        elif head == "cycle-bound":
            cycle_bound = _ints(ln, words)[0]
        else:
            raise FormatError(ln, f"unknown section {head!r} in a GCC file")
    if nv is None or G is None or target is None:
        raise FormatError(len(lines.rows) + 1, "GCC file needs 'vertices', 'group' and 'target'")
    return CirculationInstance(
        nv,
        tuple((a[0], a[1]) for a in arcs),
        tuple(a[2] for a in arcs),
        tuple(a[3] for a in arcs),
        tuple(a[4] for a in arcs),
        target,
        G,
        cycle_bound,
    )


def format_gcc(gcc: CirculationInstance) -> str:
    out = [f"vertices {gcc.n_vertices}", ("group " + " ".join(map(str, gcc.G.moduli))).rstrip()]
    for (t, h), u, l, g in zip(gcc.arcs, gcc.caps, gcc.lengths, gcc.labels):
        out.append(f"arc {t} {h} {u} {l} {format_element(g)}")
    out.append("target " + format_element(gcc.target))
    if gcc.cycle_bound is not None:
        out.append(f"cycle-bound {gcc.cycle_bound}")
    return "\n".join(out) + "\n"


def parse_matrix(text: str) -> list[list[int]]:
    """The first ``matrix`` section of any of the formats above; other sections are ignored."""
    lines = _Lines.of(text)
    while not lines.done():
        ln, s = lines.take()
        head, *words = s.split()
        if head == "matrix":
            return _matrix(lines, ln, words)
    raise FormatError(len(lines.rows) + 1, "no 'matrix' section")
