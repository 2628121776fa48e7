"""Formula graphs: formulas as explicit node stores so subformulas can be shared.

A pure copy expansion is a tree; a shared directory reference makes the
referenced node the child of several parents (in-degree > 1), which is how
cirquent-style sharing is represented.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import formulas as F
from .errors import ColiError


@dataclass(frozen=True)
class GNode:
    op: str  # atom | neg | and | or | implies | all | exists | recur
    children: tuple = ()
    pred: str | None = None
    args: tuple = ()
    var: str | None = None

    def label(self) -> str:
        if self.op == "atom":
            return F.pretty(F.Atom(self.pred, self.args))
        if self.op in ("all", "exists"):
            glyph = "@" if self.op == "all" else "#"
            return f"{glyph}{self.var}"
        return {"neg": "~", "and": "/\\", "or": "\\/", "implies": "->",
                "recur": "$"}[self.op]


@dataclass
class FormulaGraph:
    nodes: dict = field(default_factory=dict)
    root: int = -1
    next_id: int = 0

    def add(self, node: GNode) -> int:
        nid = self.next_id
        self.next_id += 1
        self.nodes[nid] = node
        return nid

    def to_formula(self, nid: int | None = None) -> F.Formula:
        """Unfold the graph below nid (default: root) into a formula tree."""
        node = self.nodes[self.root if nid is None else nid]
        if node.op == "atom":
            return F.Atom(node.pred, node.args)
        kids = tuple(self.to_formula(c) for c in node.children)
        if node.op == "neg":
            return F.Neg(kids[0])
        if node.op == "and":
            return F.And(kids[0], kids[1])
        if node.op == "or":
            return F.Or(kids[0], kids[1])
        if node.op == "implies":
            return F.Implies(kids[0], kids[1])
        if node.op == "all":
            return F.All(node.var, kids[0])
        if node.op == "exists":
            return F.Exists(node.var, kids[0])
        if node.op == "recur":
            return F.Recur(kids[0])
        raise ColiError(f"unknown node op {node.op!r}")

    def reachable(self, roots=None) -> list:
        """Node ids reachable from the given roots (default: the root), preorder,
        visiting each shared node once."""
        if roots is None:
            roots = [self.root]
        seen: list[int] = []
        seen_set: set[int] = set()

        def walk(nid):
            if nid in seen_set:
                return
            seen_set.add(nid)
            seen.append(nid)
            for c in self.nodes[nid].children:
                walk(c)

        for r in roots:
            walk(r)
        return seen

    def in_degrees(self, roots=None) -> dict:
        degrees = {nid: 0 for nid in self.reachable(roots)}
        for nid in list(degrees):
            for c in self.nodes[nid].children:
                degrees[c] += 1
        return degrees

    def depth(self, nid: int | None = None) -> int:
        """Longest root-to-leaf edge count below nid."""
        node = self.nodes[self.root if nid is None else nid]
        if not node.children:
            return 0
        return 1 + max(self.depth(c) for c in node.children)

    def listing(self) -> str:
        """Stable plain-text rendering with node ids and in-degrees."""
        degrees = self.in_degrees()
        lines = [f"root n{self.root}"]
        for nid in self.reachable():
            node = self.nodes[nid]
            kids = ",".join(f"n{c}" for c in node.children)
            suffix = f" children=[{kids}]" if kids else ""
            lines.append(f"n{nid}: {node.label()} in={degrees[nid]}{suffix}")
        return "\n".join(lines)
