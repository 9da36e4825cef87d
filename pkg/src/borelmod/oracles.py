"""Independent cross-check oracles built on external solvers.

``z3_model_of_size`` grounds a first-order sentence over a fixed finite
domain into propositional logic and asks z3 for a model.  ``graphs_isomorphic``
delegates to networkx's VF2 matcher.
"""
from __future__ import annotations

import itertools

from .formulas import (
    And, Atom, Eq, Exists, FiniteStructure, Formula, Implies, Not, Or, Vocabulary,
    free_vars,
)


def z3_model_of_size(f: Formula, v: Vocabulary, n: int) -> FiniteStructure | None:
    import z3

    if free_vars(f):
        raise ValueError("z3 grounding needs a sentence")
    facts = {(name, args): z3.Bool(f"{name}_{'_'.join(map(str, args))}")
             for name, k in v for args in itertools.product(range(n), repeat=k)}

    def ground(g: Formula, asg: dict[int, int]):
        if isinstance(g, Atom):
            return facts[(g.rel, tuple(asg[a] for a in g.args))]
        if isinstance(g, Eq):
            return z3.BoolVal(asg[g.left] == asg[g.right])
        if isinstance(g, Not):
            return z3.Not(ground(g.body, asg))
        if isinstance(g, And):
            return z3.And([ground(p, asg) for p in g.parts])
        if isinstance(g, Or):
            return z3.Or([ground(p, asg) for p in g.parts])
        if isinstance(g, Implies):
            return z3.Implies(ground(g.left, asg), ground(g.right, asg))
        parts = [ground(g.body, {**asg, g.var: e}) for e in range(n)]
        return z3.Or(parts) if isinstance(g, Exists) else z3.And(parts)

    solver = z3.Solver()
    solver.add(ground(f, {}))
    if solver.check() != z3.sat:
        return None
    m = solver.model()
    rels: dict[str, set] = {name: set() for name in v.names}
    for (name, args), var in facts.items():
        if z3.is_true(m.eval(var, model_completion=True)):
            rels[name].add(args)
    return FiniteStructure(v, n, rels)


def z3_smallest_model(f: Formula, v: Vocabulary, max_size: int) -> FiniteStructure | None:
    for n in range(1, max_size + 1):
        s = z3_model_of_size(f, v, n)
        if s is not None:
            return s
    return None


def to_networkx(s: FiniteStructure, rel: str = "E"):
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(range(s.size))
    g.add_edges_from((a, b) for a, b in s.relations[rel] if a != b)
    return g


def graphs_isomorphic(a: FiniteStructure, b: FiniteStructure, rel: str = "E") -> bool:
    import networkx as nx

    return nx.is_isomorphic(to_networkx(a, rel), to_networkx(b, rel))


def structures_isomorphic(a: FiniteStructure, b: FiniteStructure) -> bool:
    """Isomorphism of finite structures via a coloured directed incidence graph."""
    import networkx as nx
    from networkx.algorithms.isomorphism import DiGraphMatcher, categorical_node_match

    def encode(s: FiniteStructure):
        g = nx.DiGraph()
        for e in range(s.size):
            g.add_node(("e", e), kind="element")
        for name, ts in sorted(s.relations.items()):
            for t in ts:
                node = ("t", name, t)
                g.add_node(node, kind=name)
                for pos, e in enumerate(t):
                    g.add_node(("p", name, t, pos), kind=f"{name}#{pos}")
                    g.add_edge(node, ("p", name, t, pos))
                    g.add_edge(("p", name, t, pos), ("e", e))
        return g

    if a.vocabulary != b.vocabulary or a.size != b.size:
        return False
    m = DiGraphMatcher(encode(a), encode(b), node_match=categorical_node_match("kind", None))
    return m.is_isomorphic()
