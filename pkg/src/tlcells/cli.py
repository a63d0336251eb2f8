"""
Command-line front end.

    tlcells fc --type A --rank 3 --count
    tlcells kl 1.2.1 --type A --rank 3
    tlcells verify --type D --rank 4 --condition vi

Elements are written as dotted generator indices (`2.3.1`) or `e`. For
dihedral groups pass `--type I2 --rank m`. Exit status is 0 on success, 1
when a verification fails (the witness is printed) and 2 on usage errors.

JSON output has the shape
`{"command", "config", "results": [...], "witnesses": [...], "timings": {...}}`;
timings are the only part that varies between identical runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from .cells import compute_cells, fc_cell_report
from .coxeter import CoxeterGraph, build_graph, group_of, parse_element
from .tl import CanonicalTable, TLElt, b_elt, t_elt, theta_T, tl_of, to_b_basis
from .verify import (CONDITIONS, Caches, EquivalenceFault, Verdict, check_condition,
                     corollary_table, intersection_rule_B)

CACHE_ENV = "TLCELLS_CACHE_DIR"
# groups above this order need --long-run or an explicit --max-order
DEFAULT_CAPACITY = 2000
LONG_RUN_CAPACITY = 20000

COROLLARY_GRAPHS = [("A", 2), ("A", 3), ("A", 4), ("B", 2), ("B", 3), ("B", 4)] + \
    [("I2", m) for m in range(3, 9)] + [("H", 3), ("F", 4), ("D", 4), ("D", 5)]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    type_tag: str
    rank: int
    command: str
    output_format: str
    cache_dir: str | None
    long_run: bool
    max_order: int | None
    threads: int

    @property
    def capacity(self) -> int:
        if self.max_order is not None:
            return self.max_order
        return LONG_RUN_CAPACITY if self.long_run else DEFAULT_CAPACITY

    def graph(self) -> CoxeterGraph:
        return checked_graph(self.type_tag, self.rank, self.capacity)


def checked_graph(type_tag: str, rank: int, capacity: int) -> CoxeterGraph:
    try:
        graph = build_graph(type_tag, rank)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if graph.order() > capacity:
        raise UsageError(f"{graph.name} has {graph.order()} elements, over the capacity "
                         f"{capacity}; pass --long-run or --max-order")
    return graph


class Output:
    """Collects results and witnesses, then renders them in one format."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.results: list = []
        self.witnesses: list = []
        self.timings: dict = {}
        self.lines: list[str] = []

    def text(self, line: str) -> None:
        self.lines.append(line)

    def render(self) -> str:
        fmt = self.config.output_format
        if fmt == "text":
            return "".join(line + "\n" for line in self.lines)
        if fmt == "json":
            cfg = asdict(self.config)
            return json.dumps({"command": self.config.command, "config": cfg,
                               "results": self.results, "witnesses": self.witnesses,
                               "timings": self.timings}, indent=2, sort_keys=True) + "\n"
        rows = [_flatten(r) if isinstance(r, dict) else {"value": r} for r in self.results]
        keys: list[str] = []
        for r in rows:
            keys += [k for k in r if k not in keys]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()


def _flatten(d: dict) -> dict:
    return {k: (json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v) for k, v in d.items()}


def _tl_text(u: TLElt, name: str = "tt") -> str:
    if not u:
        return "0"
    return " + ".join(f"{c} * {name}({w.text})" for w, c in u.items_by_element())


def _element(text: str, graph: CoxeterGraph):
    try:
        return parse_element(text, graph)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fc_element(text: str, graph: CoxeterGraph):
    w = _element(text, graph)
    g = group_of(graph)
    if not g.fc_flags()[g.idx(w)]:
        raise UsageError(f"{w.text} is not fully commutative")
    return w


# --- commands ---------------------------------------------------------------

def cmd_enumerate(args, cfg: RunConfig, out: Output) -> int:
    g = group_of(cfg.graph(), cfg.capacity)
    for i in range(g.order):
        if args.max_length is not None and g.length[i] > args.max_length:
            break
        w = g.element(i)
        out.results.append({"index": i, "element": w.text, "length": w.length})
        out.text(f"{i} {w.text} {w.length}")
    return 0


def cmd_fc(args, cfg: RunConfig, out: Output) -> int:
    g = group_of(cfg.graph(), cfg.capacity)
    fc = [i for i in range(g.order) if g.fc_flags()[i]]
    if args.count:
        out.results.append({"graph": g.graph.name, "fully_commutative": len(fc)})
        out.text(str(len(fc)))
    else:
        for i in fc:
            out.results.append({"element": g.element(i).text, "length": g.length[i]})
            out.text(g.element(i).text)
    return 0


def cmd_kl(args, cfg: RunConfig, out: Output) -> int:
    graph = cfg.graph()
    w = _element(args.w, graph)
    cx = Caches(graph, cfg.cache_dir, cfg.capacity)
    h = cx.kl.element(w.index)
    terms = [(x, c) for x, c in h.items_by_element()]
    out.results.append({"w": w.text, "coords": {x.text: str(c) for x, c in terms}})
    out.text(f"C'({w.text}) = " + " + ".join(f"{c} * Tt({x.text})" for x, c in terms))
    return 0


def cmd_mu(args, cfg: RunConfig, out: Output) -> int:
    graph = cfg.graph()
    x, w = _element(args.x, graph), _element(args.w, graph)
    cx = Caches(graph, cfg.cache_dir, cfg.capacity)
    m = cx.kl.mu(x.index, w.index)
    out.results.append({"x": x.text, "w": w.text, "mu": m})
    out.text(str(m))
    return 0


def cmd_cells(args, cfg: RunConfig, out: Output) -> int:
    graph = cfg.graph()
    cx = Caches(graph, cfg.cache_dir, cfg.capacity)
    part = compute_cells(cx.preorder(args.side))
    for k, cell in enumerate(part.cells):
        words = [cx.text(w) for w in cell]
        below = sorted(j for i, j in part.order_edges if i == k)
        out.results.append({"cell": k, "side": args.side, "elements": words, "below": below})
        out.text(f"{k}: " + " ".join(words))
    return 0


def cmd_theta(args, cfg: RunConfig, out: Output) -> int:
    graph = cfg.graph()
    w = _element(args.w, graph)
    if args.clprime:
        cx = Caches(graph, cfg.cache_dir, cfg.capacity)
        img = tl_of(graph).theta_hecke(cx.kl.element(w.index))
        label = f"theta(C'({w.text}))"
    else:
        img = theta_T(w)
        label = f"theta(Tt({w.text}))"
    out.results.append({"w": w.text, "image": {x.text: str(c) for x, c in img.items_by_element()}})
    out.text(f"{label} = {_tl_text(img)}")
    return 0


def cmd_canonical(args, cfg: RunConfig, out: Output) -> int:
    graph = cfg.graph()
    table = CanonicalTable(graph).build()
    g = group_of(graph)
    for w in sorted(table.entries):
        c = table.entries[w]
        out.results.append({"w": g.element(w).text,
                            "coords": {x.text: str(p) for x, p in c.items_by_element()}})
    for line in table.dump().splitlines():
        out.text(line)
    return 0


def cmd_tl_mult(args, cfg: RunConfig, out: Output) -> int:
    graph = cfg.graph()
    u, v = _fc_element(args.u, graph), _fc_element(args.v, graph)
    make = t_elt if args.basis == "t" else b_elt
    prod = make(u) * make(v)
    if args.basis == "t":
        coords = {x.text: str(c) for x, c in prod.items_by_element()}
        body = _tl_text(prod)
    else:
        bc = sorted(to_b_basis(prod).items())
        coords = {x.text: str(c) for x, c in bc}
        body = " + ".join(f"{c} * b({x.text})" for x, c in bc) or "0"
    name = "tt" if args.basis == "t" else "b"
    out.results.append({"u": u.text, "v": v.text, "basis": args.basis, "product": coords})
    out.text(f"{name}({u.text}) * {name}({v.text}) = {body}")
    return 0


def _report_verdict(v: Verdict, out: Output, timing_key: str) -> None:
    rec = {"condition": v.condition_id, "holds": v.holds,
           "graph": v.stats.get("graph"), "witness": v.witness}
    out.results.append(rec)
    out.timings[timing_key] = v.stats.get("seconds")
    status = "holds" if v.holds else "fails"
    out.text(f"{v.stats.get('graph')} ({v.condition_id}): {status}")
    if v.witness is not None:
        out.witnesses.append({"condition": v.condition_id, **v.witness})
        w = v.witness
        if w.get("elements"):
            out.text("  witness: " + " ".join(w["elements"]))
        for key in ("generator", "coefficient"):
            if w.get(key) is not None:
                out.text(f"  {key}: {w[key]}")
        out.text(f"  reason: {w.get('reason')}")


def cmd_verify(args, cfg: RunConfig, out: Output) -> int:
    graph = cfg.graph()
    cx = Caches(graph, cfg.cache_dir, cfg.capacity)
    ids = list(CONDITIONS) if args.condition == "all" else [args.condition]
    if cfg.threads > 1 and len(ids) > 1:
        # warm the shared data once; the checks then only read it
        cx.theta_kl
        cx.canonical
        for side in ("left", "two-sided"):
            cx.preorder(side)
        with ThreadPoolExecutor(cfg.threads) as pool:
            verdicts = list(pool.map(lambda c: check_condition(graph, c, cx), ids))
    else:
        verdicts = [check_condition(graph, c, cx) for c in ids]
    for v in verdicts:
        _report_verdict(v, out, f"{graph.name}:{v.condition_id}")
    if len({v.holds for v in verdicts}) > 1:
        fault = EquivalenceFault(graph, verdicts)
        out.text(f"implementation fault: {fault}")
        out.witnesses.append({"condition": "equivalence", "reason": str(fault)})
        return 1
    return 0 if all(v.holds for v in verdicts) else 1


def cmd_corollary_table(args, cfg: RunConfig, out: Output) -> int:
    if args.type is not None:
        graphs = [cfg.graph()]
    else:
        pairs = COROLLARY_GRAPHS + ([("H", 4)] if cfg.long_run else [])
        graphs = [checked_graph(t, n, cfg.capacity) for t, n in pairs]
    ok = True
    for row in corollary_table(graphs, cfg.cache_dir):
        out.timings[row["graph"]] = row.pop("seconds")
        out.results.append(row)
        out.text(f"{row['graph']:8} union_of_cells={row['fc_union_of_two_sided_cells']!s:5} "
                 f"contains_D4={row['contains_d4']!s:5} agrees={row['agrees']}")
        if not row["agrees"]:
            ok = False
            out.witnesses.append({"condition": "corollary", "elements": [row["graph"]],
                                  "reason": "cell verdict disagrees with the D4-subgraph predicate"})
    return 0 if ok else 1


def cmd_report_b(args, cfg: RunConfig, out: Output) -> int:
    if cfg.type_tag != "B":
        raise UsageError("report-b-intersections needs --type B")
    graph = cfg.graph()
    cx = Caches(graph, cfg.cache_dir, cfg.capacity)
    report = fc_cell_report(graph, cx.kl)
    out.results.append(report)
    for cell in report["cells"]:
        out.text(f"two-sided cell {cell['two_sided_cell']} (size {cell['size']}, a = {cell['a']})")
        for e in cell["intersections"]:
            out.text(f"  R({e['right_cell']}) & L({e['left_cell']}): k = {e['k']}"
                     f" d = {e.get('d')} d' = {e.get('d_prime')} predicted = {e.get('predicted_k')}")
    verdict = intersection_rule_B(graph.rank, cx) if 2 <= graph.rank <= 4 else None
    if verdict is not None:
        _report_verdict(verdict, out, f"{graph.name}:intersection-rule")
        return 0 if verdict.holds else 1
    return 0


COMMANDS = {
    "enumerate": cmd_enumerate, "fc": cmd_fc, "kl": cmd_kl, "mu": cmd_mu,
    "cells": cmd_cells, "theta": cmd_theta, "canonical": cmd_canonical,
    "tl-mult": cmd_tl_mult, "verify": cmd_verify,
    "corollary-table": cmd_corollary_table, "report-b-intersections": cmd_report_b,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--type", help="Coxeter type: A, B, D, E, F, H or I2 (default A)")
    common.add_argument("--rank", type=int, help="rank, or m for I2 (default 2)")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--cache-dir", default=os.environ.get(CACHE_ENV),
                        help=f"directory for KL cache files (default ${CACHE_ENV})")
    common.add_argument("--long-run", action="store_true",
                        help=f"allow groups of up to {LONG_RUN_CAPACITY} elements")
    common.add_argument("--max-order", type=int, help="explicit capacity override")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--output", help="write output to this file instead of stdout")

    p = argparse.ArgumentParser(prog="tlcells", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    e = sub.add_parser("enumerate", parents=[common], help="list group elements")
    e.add_argument("--max-length", type=int)
    f = sub.add_parser("fc", parents=[common], help="fully commutative elements")
    f.add_argument("--count", action="store_true")
    k = sub.add_parser("kl", parents=[common], help="print C'_w in the Tt basis")
    k.add_argument("w")
    m = sub.add_parser("mu", parents=[common], help="print mu(x, w)")
    m.add_argument("x")
    m.add_argument("w")
    c = sub.add_parser("cells", parents=[common], help="KL cells")
    c.add_argument("--side", choices=("left", "right", "two-sided"), default="left")
    t = sub.add_parser("theta", parents=[common], help="image of Tt_w (or C'_w) in TL")
    t.add_argument("w")
    t.add_argument("--clprime", action="store_true", help="map C'_w instead of Tt_w")
    sub.add_parser("canonical", parents=[common], help="dump the canonical basis of TL")
    tm = sub.add_parser("tl-mult", parents=[common], help="product of two basis elements of TL")
    tm.add_argument("u")
    tm.add_argument("v")
    tm.add_argument("--basis", choices=("t", "b"), default="t")
    v = sub.add_parser("verify", parents=[common], help="check conditions i..viii")
    v.add_argument("--condition", choices=CONDITIONS + ("all",), default="all")
    sub.add_parser("corollary-table", parents=[common],
                   help="W_c versus two-sided cells, against the D4-subgraph test")
    sub.add_parser("report-b-intersections", parents=[common],
                   help="fully commutative cell intersections in type B")
    return p


def _write_atomic(path: str, data: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(data)
    os.replace(tmp, target)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    type_tag = args.type if args.type is not None else "A"
    rank = args.rank if args.rank is not None else 2
    cfg = RunConfig(type_tag, rank, args.command, args.format, args.cache_dir,
                    args.long_run, args.max_order, max(1, args.threads))
    out = Output(cfg)
    t0 = time.perf_counter()
    try:
        cfg.graph()
        status = COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        print(f"tlcells: error: {exc}", file=sys.stderr)
        return 2
    out.timings["total"] = round(time.perf_counter() - t0, 3)
    data = out.render()
    if args.output:
        _write_atomic(args.output, data)
    else:
        sys.stdout.write(data)
    return status


if __name__ == "__main__":
    sys.exit(main())
