"""Ground-truth concepts: small gate circuits (AND/OR/NOT over literals) and named families.

Inputs and outputs use the +-1 convention with true = +1.  NOT gates do not
count toward depth (only AND/OR levels do); size counts every internal gate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .hypercube import DimensionMismatchError, all_points

AND, OR, NOT, LITERAL, CONST = "and", "or", "not", "lit", "const"


@dataclass(frozen=True)
class Gate:
    """One node of a circuit DAG.

    ``children`` holds node ids for and/or/not; literals carry a 1-based
    variable index and a negation flag; constants carry a boolean value.
    """

    kind: str
    children: tuple[int, ...] = ()
    var: int = 0
    negated: bool = False
    value: bool = True


class Circuit:
    """A gate DAG over {-1,+1}^d evaluating to +-1 (true = +1).

    ``size`` and ``depth`` are computed at construction: size is the number of
    and/or/not gates, depth the largest number of and/or gates on any
    leaf-to-output path.
    """

    def __init__(self, gates: list[Gate], output: int, dimension: int):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not 0 <= output < len(gates):
            raise ValueError(f"output id {output} out of range")
        self.gates = list(gates)
        self.output = output
        self.dimension = dimension
        self._order = self._toposort()
        self.size, self.depth = self._measure()

    def _toposort(self) -> list[int]:
        n = len(self.gates)
        state = [0] * n  # 0 unseen, 1 in progress, 2 done
        order: list[int] = []
        for root in range(n):
            if state[root]:
                continue
            stack = [(root, 0)]
            while stack:
                node, child_pos = stack.pop()
                if child_pos == 0:
                    if state[node] == 1:
                        raise ValueError("circuit graph contains a cycle")
                    if state[node] == 2:
                        continue
                    state[node] = 1
                gate = self.gates[node]
                if child_pos < len(gate.children):
                    stack.append((node, child_pos + 1))
                    child = gate.children[child_pos]
                    if not 0 <= child < n:
                        raise ValueError(f"gate {node} references unknown child {child}")
                    if state[child] == 1:
                        raise ValueError("circuit graph contains a cycle")
                    if state[child] == 0:
                        stack.append((child, 0))
                else:
                    state[node] = 2
                    order.append(node)
        return order

    def _measure(self) -> tuple[int, int]:
        size = 0
        depth = [0] * len(self.gates)
        for node in self._order:
            gate = self.gates[node]
            if gate.kind == LITERAL:
                if not 1 <= gate.var <= self.dimension:
                    raise DimensionMismatchError(
                        f"literal variable {gate.var} out of range for dimension {self.dimension}"
                    )
                continue
            if gate.kind == CONST:
                continue
            if gate.kind not in (AND, OR, NOT):
                raise ValueError(f"unknown gate kind {gate.kind!r}")
            if not gate.children:
                raise ValueError(f"{gate.kind} gate needs fan-in >= 1")
            if gate.kind == NOT and len(gate.children) != 1:
                raise ValueError("not gate must have fan-in 1")
            size += 1
            below = max(depth[c] for c in gate.children)
            depth[node] = below + (1 if gate.kind in (AND, OR) else 0)
        return size, depth[self.output]

    def evaluate(self, points: np.ndarray) -> np.ndarray | int:
        """Evaluate at one point or a batch; returns +-1 (int8 array for batches)."""
        pts = np.asarray(points)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if pts.shape[1] < self.dimension:
            raise DimensionMismatchError(
                f"circuit needs dimension {self.dimension}, points have {pts.shape[1]}"
            )
        vals: dict[int, np.ndarray] = {}
        n = pts.shape[0]
        for node in self._order:
            gate = self.gates[node]
            if gate.kind == LITERAL:
                v = pts[:, gate.var - 1] == 1
                vals[node] = ~v if gate.negated else v
            elif gate.kind == CONST:
                vals[node] = np.full(n, gate.value, dtype=bool)
            elif gate.kind == NOT:
                vals[node] = ~vals[gate.children[0]]
            elif gate.kind == AND:
                acc = vals[gate.children[0]].copy()
                for c in gate.children[1:]:
                    acc &= vals[c]
                vals[node] = acc
            else:
                acc = vals[gate.children[0]].copy()
                for c in gate.children[1:]:
                    acc |= vals[c]
                vals[node] = acc
        out = np.where(vals[self.output], 1, -1).astype(np.int8)
        return int(out[0]) if single else out

    __call__ = evaluate

    def truth_table(self) -> np.ndarray:
        """f over all_points(dimension) row order; dimension <= 20."""
        if self.dimension > 20:
            raise ValueError("truth_table enumerates 2^d points; d <= 20 required")
        return self.evaluate(all_points(self.dimension))

    def to_json_obj(self) -> dict:
        nodes = []
        for i, g in enumerate(self.gates):
            node = {"id": i, "kind": g.kind}
            if g.kind in (AND, OR, NOT):
                node["children"] = list(g.children)
            elif g.kind == LITERAL:
                node["var"] = g.var
                node["negated"] = g.negated
            else:
                node["value"] = g.value
            nodes.append(node)
        return {"dimension": self.dimension, "output": self.output, "nodes": nodes}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Circuit":
        gates = []
        for node in obj["nodes"]:
            kind = node["kind"]
            gates.append(
                Gate(
                    kind,
                    children=tuple(node.get("children", ())),
                    var=node.get("var", 0),
                    negated=node.get("negated", False),
                    value=node.get("value", True),
                )
            )
        return cls(gates, obj["output"], obj["dimension"])

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_json_obj(json.loads(text))


# ---------------------------------------------------------------------------
# Named families


def constant_circuit(value: bool, d: int) -> Circuit:
    return Circuit([Gate(CONST, value=bool(value))], 0, d)


def literal_circuit(var: int, d: int, negated: bool = False) -> Circuit:
    return Circuit([Gate(LITERAL, var=var, negated=negated)], 0, d)


def and_circuit(variables: list[int], d: int) -> Circuit:
    return _junction(AND, variables, d)


def or_circuit(variables: list[int], d: int) -> Circuit:
    return _junction(OR, variables, d)


def _junction(kind: str, variables: list[int], d: int) -> Circuit:
    if not variables:
        raise ValueError("need at least one variable")
    gates = [Gate(LITERAL, var=v) for v in variables]
    gates.append(Gate(kind, children=tuple(range(len(variables)))))
    return Circuit(gates, len(variables), d)


def parity_circuit(variables: list[int], d: int) -> Circuit:
    """XOR over the listed coordinates (true = +1), built as a chain of XOR gadgets.

    Each gadget is OR(AND(a, not b), AND(not a, b)), so depth is 2 per chain
    link; a single variable degenerates to that literal.
    """
    if not variables:
        raise ValueError("parity needs at least one variable")
    gates: list[Gate] = [Gate(LITERAL, var=variables[0])]
    acc = 0
    for v in variables[1:]:
        lit = len(gates)
        gates.append(Gate(LITERAL, var=v))
        not_acc = len(gates)
        gates.append(Gate(NOT, children=(acc,)))
        not_lit = len(gates)
        gates.append(Gate(NOT, children=(lit,)))
        left = len(gates)
        gates.append(Gate(AND, children=(acc, not_lit)))
        right = len(gates)
        gates.append(Gate(AND, children=(not_acc, lit)))
        acc = len(gates)
        gates.append(Gate(OR, children=(left, right)))
    return Circuit(gates, acc, d)


def dnf_circuit(terms: list[list[int]], d: int) -> Circuit:
    """OR of AND-terms; each term lists signed 1-based literals (-i means not x_i)."""
    if not terms:
        raise ValueError("dnf needs at least one term")
    gates: list[Gate] = []
    term_ids = []
    for term in terms:
        if not term:
            raise ValueError("dnf terms need at least one literal")
        lit_ids = []
        for lit in term:
            if lit == 0:
                raise ValueError("literals are signed 1-based indices, 0 is invalid")
            gates.append(Gate(LITERAL, var=abs(lit), negated=lit < 0))
            lit_ids.append(len(gates) - 1)
        gates.append(Gate(AND, children=tuple(lit_ids)))
        term_ids.append(len(gates) - 1)
    gates.append(Gate(OR, children=tuple(term_ids)))
    return Circuit(gates, len(gates) - 1, d)


def tribes_circuit(width: int, tribes: int, d: int) -> Circuit:
    """OR of ``tribes`` disjoint ANDs of ``width`` consecutive coordinates."""
    if width < 1 or tribes < 1:
        raise ValueError("width and tribes must be >= 1")
    if width * tribes > d:
        raise ValueError(f"tribes({width},{tribes}) needs {width * tribes} coordinates, d={d}")
    terms = [[width * t + j + 1 for j in range(width)] for t in range(tribes)]
    return dnf_circuit(terms, d)


def junta_circuit(table: list[int] | np.ndarray, variables: list[int], d: int) -> Circuit:
    """Arbitrary function of the listed coordinates, given by its +-1 truth table.

    ``table`` follows all_points(len(variables)) row order.  Realized as a DNF
    over the satisfying rows (or a constant when the table is constant).
    """
    table = np.asarray(table)
    m = len(variables)
    if table.shape != (1 << m,):
        raise ValueError(f"junta table must have length 2^{m}")
    rows = all_points(m)
    true_rows = [r for r in range(len(table)) if table[r] == 1]
    if not true_rows:
        return constant_circuit(False, d)
    if len(true_rows) == len(table):
        return constant_circuit(True, d)
    terms = []
    for r in true_rows:
        terms.append([variables[j] if rows[r, j] == 1 else -variables[j] for j in range(m)])
    return dnf_circuit(terms, d)


def named_circuit(spec: str, d: int) -> Circuit:
    """Parse a compact family spec into a circuit.

    Grammar (all indices 1-based):
      parity:1,2,5        and:1,2      or:3,4
      dnf:1,-3|2,4        tribes:w=2,m=3
      junta:1,3;+--+      const:+1 / const:-1
    """
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "const":
        if arg not in ("+1", "-1", "1"):
            raise ValueError(f"const takes +1 or -1, got {arg!r}")
        return constant_circuit(arg != "-1", d)
    if name in ("parity", "and", "or"):
        variables = [int(tok) for tok in arg.split(",") if tok.strip()]
        builder = {"parity": parity_circuit, "and": and_circuit, "or": or_circuit}[name]
        return builder(variables, d)
    if name == "dnf":
        terms = [[int(tok) for tok in term.split(",") if tok.strip()] for term in arg.split("|")]
        return dnf_circuit(terms, d)
    if name == "tribes":
        params = dict(kv.split("=") for kv in arg.split(","))
        return tribes_circuit(int(params["w"]), int(params["m"]), d)
    if name == "junta":
        var_part, _, table_part = arg.partition(";")
        variables = [int(tok) for tok in var_part.split(",") if tok.strip()]
        table = [1 if ch == "+" else -1 for ch in table_part.strip()]
        return junta_circuit(table, variables, d)
    raise ValueError(f"unknown circuit family {name!r}")
