"""Command-line front end: ``gctuf <command> [options]``.

Reports are ``key: value`` lines on stdout; ``--json-like`` prints one JSON
object instead.  Exit codes: 0 feasible (or success), 1 infeasible, 2 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import formats
from .base_lattice import c_set, solve_gclf
from .base_network import CirculationError, solve_gcc
from .exact_linalg import LinalgError, delta_modularity, integer_vertex, tu_check
from .generators import (
    GeneratorError,
    core_derived,
    decomposable_instance,
    pivoted_matrix,
    planted_instance,
    random_network,
    random_transposed,
    three_sum_matrix,
    _rng,
)
from .groups import AbelianGroup, TargetSet
from .instances import GctufInstance
from .ip_reduction import ReductionError, congruencies_to_group, reduce_ip
from .oracle import OracleError, brute_gcc, brute_gclf, brute_gctuf, brute_pattern
from .rgctuf import Pattern, SolverError, Solver, _normalize_rows, _orient, call_bound, classify_pairs, compute_pattern_shape, split_node, split_three_sum
from .tu_structure import NetworkLeaf, StructureError, ThreeSumNode, TransposedNetworkLeaf, decompose, tree_to_text, verify_tree

EXIT_FEASIBLE, EXIT_INFEASIBLE, EXIT_ERROR = 0, 1, 2
GEN_KINDS = ("network", "transposed", "core", "threesum", "pivot", "planted", "decomposable")


class CliError(Exception):
    pass


def _emit(rows: list[tuple[str, object]], json_like: bool, out=None) -> None:
    out = out or sys.stdout
    if json_like:
        d: dict = {}
        for k, v in rows:
            d.setdefault(k, []).append(v)
        print(json.dumps({k: v[0] if len(v) == 1 else v for k, v in d.items()}, sort_keys=False), file=out)
        return
    for k, v in rows:
        print(f"{k}: {_fmt(v)}", file=out)


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _elem(g) -> str:
    return formats.format_element(g)


# ---------------------------------------------------------------- commands


def cmd_check_tu(args) -> int:
    T = formats.parse_matrix(_read(args.file))
    rep = tu_check(T, seed=args.seed)
    rows = [("tu", rep.is_tu), ("method", rep.mode)]
    if rep.witness is not None:
        rows.append(("witness_rows", list(rep.witness[0])))
        rows.append(("witness_cols", list(rep.witness[1])))
    _emit(rows, args.json_like)
    return EXIT_FEASIBLE


def cmd_check_delta(args) -> int:
    A = formats.parse_matrix(_read(args.file))
    delta, strict = delta_modularity(A)
    if args.json_like:
        _emit([("delta", delta), ("strict", strict)], True)
    else:
        print(f"Δ={delta} strict={str(strict).lower()}")
    return EXIT_FEASIBLE


def cmd_reduce(args) -> int:
    ip = formats.parse_ip(_read(args.file))
    mcctu, H = reduce_ip(ip)
    inst = congruencies_to_group(mcctu)
    text = formats.format_instance(inst)
    hdr = [f"# bijection y = H x, H is {len(H)}x{len(H)}"] + ["# H " + " ".join(map(str, r)) for r in H]
    if args.out:
        _write(args.out, text)
        rows = [("delta", inst.G.order), ("moduli", list(inst.G.moduli))]
        rows += [("H", list(r)) for r in H]
        _emit(rows, args.json_like)
    else:
        sys.stdout.write(text + "\n".join(hdr) + "\n")
    return EXIT_FEASIBLE


def _solve_rows(inst: GctufInstance, args) -> tuple[list, bool]:
    t0 = time.perf_counter()
    if args.oracle:
        res = brute_gctuf(inst)
        x = res.witness
        rows = [
            ("verdict", "feasible" if x is not None else "infeasible"),
            ("witness", x),
            ("verified", inst.is_solution(x) if x is not None else False),
            ("mode", "oracle"),
            ("seed", args.seed),
            ("points", res.points),
        ]
    else:
        rep = Solver(args.mode, args.seed).run(inst)
        x = rep.witness
        rows = [tuple(ln.split(": ", 1)) for ln in rep.lines()]
        rows = [(k, _unfmt(k, v, rep)) for k, v in rows]
    rows.append(("time_s", round(time.perf_counter() - t0, 4)))
    return rows, x is not None


def _unfmt(k, v, rep):
    # keep native values for the JSON form
    if k.startswith("calls_level_"):
        return int(v)
    return {"witness": rep.witness, "verified": rep.verified, "calls": rep.calls, "seed": rep.seed, "bound": rep.bound}.get(k, v)


def cmd_solve(args) -> int:
    inst = formats.parse_instance(_read(args.file))
    if inst.depth == 0 and not args.oracle:
        x = integer_vertex(inst.T, inst.b) if inst.T else tuple([0] * inst.n)
        rows = [
            ("verdict", "feasible" if x is not None else "infeasible"),
            ("witness", x),
            ("verified", inst.is_solution(x) if x is not None else False),
            ("mode", "vertex"),
            ("seed", args.seed),
            ("calls", 0),
        ]
        _emit(rows, args.json_like)
        return EXIT_FEASIBLE if x is not None else EXIT_INFEASIBLE
    rows, ok = _solve_rows(inst, args)
    _emit(rows, args.json_like)
    return EXIT_FEASIBLE if ok else EXIT_INFEASIBLE


def cmd_decompose(args) -> int:
    T = formats.parse_matrix(_read(args.file))
    tree = decompose(T)
    ok = verify_tree(T, tree)
    if args.json_like:
        _emit([("verified", ok), ("tree", tree_to_text(tree))], True)
    else:
        print(f"verified: {str(ok).lower()}")
        sys.stdout.write(tree_to_text(tree))
    return EXIT_FEASIBLE if ok else EXIT_ERROR


def cmd_pattern(args) -> int:
    inst = formats.parse_instance(_read(args.file))
    node = inst.decomposition
    while node is not None and not isinstance(node, ThreeSumNode):
        node = getattr(node, "child", None)
    if node is None:
        norm = _normalize_rows(inst.T, inst.b)
        if norm is None:
            raise CliError("a zero row has a negative right-hand side")
        inst = GctufInstance(norm[0], norm[1], inst.G, inst.gamma, inst.R, box=inst.box)
        node = split_node(inst.T)
    if not isinstance(node, ThreeSumNode):
        raise CliError("the matrix has no 3-sum split at the top level")
    node = _orient(node)
    shape, pairs = compute_pattern_shape(inst, node, args.mode)
    rows: list = [("pairs", len(pairs))]
    if shape is not None:
        rows.append(("shape", list(shape.bounds())))
    if args.oracle:
        bp = brute_pattern(inst, node)
        pa = {p: bp.pi_A.get(p, {}) for p in pairs}
        pb = {p: bp.pi_B.get(p, {}) for p in pairs}
    else:
        s = Solver(args.mode, args.seed)
        d = inst.depth
        pa, pb = {}, {}
        for p in pairs:
            sub_A, sub_B = split_three_sum(inst, node, *p)
            pb[p] = s.pi_bar("B", sub_B, d + 1, 0)
            pa[p] = s.pi_bar("A", sub_A, d, 0)
    cls = classify_pairs(pairs, Pattern.of("B", pb)) if pairs else None
    if cls is not None:
        rows.append(("structure", cls.structure))
    for p in pairs:
        kind = cls.kinds.get(p, "-") if cls is not None else "-"
        rows.append((f"pair {p[0]} {p[1]}", f"{kind} A={' '.join(sorted(map(_elem, pa[p])))} B={' '.join(sorted(map(_elem, pb[p])))}"))
    _emit(rows, args.json_like)
    return EXIT_FEASIBLE


def cmd_gclf(args) -> int:
    inst = formats.parse_gclf(_read(args.file))
    if args.oracle:
        sols = brute_gclf(inst)
        X = min(sols, key=lambda s: (len(c_set(s, inst.lattice)), sorted(s))) if sols else None
    else:
        X = solve_gclf(inst)
    rows = [("verdict", "feasible" if X is not None else "infeasible")]
    if X is not None:
        rows += [("member", sorted(X)), ("code", sorted(c_set(X, inst.lattice))), ("value", _elem(inst.value(X)))]
    _emit(rows, args.json_like)
    return EXIT_FEASIBLE if X is not None else EXIT_INFEASIBLE


def cmd_gcc(args) -> int:
    gcc = formats.parse_gcc(_read(args.file))
    if args.oracle:
        res = brute_gcc(gcc)
        f = res.flow
    else:
        f = solve_gcc(gcc)
    rows = [("verdict", "feasible" if f is not None else "infeasible")]
    if f is not None:
        rows += [("flow", list(f)), ("length", gcc.length(f)), ("value", _elem(gcc.group_value(f)))]
    _emit(rows, args.json_like)
    return EXIT_FEASIBLE if f is not None else EXIT_INFEASIBLE


def generate(kind: str, seed: int, n: int = 4, max_n: int = 12) -> GctufInstance | list:
    """Instance (or bare matrix) for `gen`; the same seed gives the same output."""
    if kind == "decomposable":
        return decomposable_instance(seed, max_n=max_n).instance
    if kind == "planted":
        return planted_instance(seed, "threesum", max(n, 2)).instance
    rng = _rng(seed)
    if kind == "network":
        T, real = random_network(rng, n + 1, n)
        return _bare(T, NetworkLeaf(real))
    if kind == "transposed":
        T, real = random_transposed(rng, n + 1, n)
        return _bare(T, TransposedNetworkLeaf(real))
    if kind == "core":
        return _bare(core_derived(rng), None)
    if kind == "threesum":
        return _bare(three_sum_matrix(rng, n - n // 2, max(2, n // 2)), None)
    if kind == "pivot":
        return _bare(pivoted_matrix(rng, n - n // 2, max(2, n // 2)), None)
    raise CliError(f"unknown kind {kind!r}; choose from {', '.join(GEN_KINDS)}")


def _bare(T, leaf) -> GctufInstance:
    """Trivial-group instance around a matrix, with zero rhs, so every kind shares one file format."""
    G = AbelianGroup(())
    return GctufInstance(T, [0] * len(T), G, [G.zero] * len(T[0]), TargetSet.full(G), decomposition=leaf)


def cmd_gen(args) -> int:
    inst = generate(args.kind, args.seed, args.n, args.max_n)
    _write(args.out, formats.format_instance(inst))
    return EXIT_FEASIBLE


def _bench_one(job) -> dict:
    seed, mode, max_n = job
    inst = decomposable_instance(seed, max_n=max_n).instance
    t0 = time.perf_counter()
    rep = Solver(mode, seed).run(inst)
    return {
        "seed": seed,
        "n": inst.n,
        "d": inst.depth,
        "calls": rep.calls,
        "bound": call_bound(inst.n, inst.depth),
        "feasible": rep.feasible,
        "time": time.perf_counter() - t0,
    }


def bench_rows(seeds, mode: str = "safe", jobs: int = 1, max_n: int = 12) -> list[dict]:
    work = [(s, mode, max_n) for s in seeds]
    if jobs <= 1:
        return [_bench_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_bench_one, work))  # map keeps the seed order


def cmd_bench(args) -> int:
    rows = bench_rows(range(args.start, args.start + args.count), args.mode, args.jobs, args.max_n)
    if args.json_like:
        print(json.dumps({"mode": args.mode, "rows": rows}))
    else:
        print(f"{'seed':>6} {'n':>3} {'d':>2} {'calls':>7} {'bound':>12} {'ok':>3} {'feasible':>9} {'time_s':>8}")
        for r in rows:
            ok = r["calls"] <= r["bound"] or (r["d"] == 0 and r["calls"] == 0)
            print(f"{r['seed']:>6} {r['n']:>3} {r['d']:>2} {r['calls']:>7} {r['bound']:>12.4g} {('yes' if ok else 'NO'):>3} {str(r['feasible']).lower():>9} {r['time']:>8.3f}")
        worst = max((r["calls"] / r["bound"] for r in rows if r["bound"]), default=0.0)
        print(f"instances: {len(rows)}")
        print(f"max_calls_over_bound: {worst:.3g}")
    return EXIT_FEASIBLE


# ---------------------------------------------------------------- argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gctuf", description="Group-constrained TU feasibility solver.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver fallbacks to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, file_arg=True):
        sp = sub.add_parser(name, help=help_)
        if file_arg:
            sp.add_argument("file", help="input file, or - for stdin")
        sp.add_argument("--json-like", action="store_true", help="print one JSON object instead of key: value lines")
        sp.add_argument("--seed", type=int, default=0)
        sp.set_defaults(fn=fn)
        return sp

    add("check-tu", cmd_check_tu, "test total unimodularity of the matrix section")
    add("check-delta", cmd_check_delta, "largest absolute full minor and strictness")
    sp = add("reduce", cmd_reduce, "strictly Delta-modular IP to a group-constrained TU instance")
    sp.add_argument("-o", "--out", help="write the reduced instance here")
    for name, fn, help_ in (("solve", cmd_solve, "solve an instance"), ("pattern", cmd_pattern, "pattern tables at the top 3-sum")):
        sp = add(name, fn, help_)
        sp.add_argument("--mode", choices=("safe", "window"), default="safe")
        sp.add_argument("--oracle", action="store_true", help="use bounded enumeration instead of the recursion")
    add("decompose", cmd_decompose, "decomposition tree of the matrix section")
    for name, fn in (("gclf", cmd_gclf), ("gcc", cmd_gcc)):
        sp = add(name, fn, f"solve a {name.upper()} instance")
        sp.add_argument("--oracle", action="store_true")
    sp = add("gen", cmd_gen, "generate a seeded instance", file_arg=False)
    sp.add_argument("kind", choices=GEN_KINDS)
    sp.add_argument("--n", type=int, default=4, help="column count hint")
    sp.add_argument("--max-n", type=int, default=12)
    sp.add_argument("-o", "--out")
    sp = add("bench", cmd_bench, "call counts against the recursion bound", file_arg=False)
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--start", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--mode", choices=("safe", "window"), default="safe")
    sp.add_argument("--max-n", type=int, default=12)
    return p


ERRORS = (
    CliError,
    formats.FormatError,
    ReductionError,
    SolverError,
    StructureError,
    CirculationError,
    OracleError,
    LinalgError,
    GeneratorError,
    ValueError,
)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # keep exit code 1 reserved for infeasibility
        logging.getLogger(__name__).exception("internal error")
        print(f"error: internal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
