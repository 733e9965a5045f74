"""
Explaining a prediction with minimal generators
===============================================

A leaf of the tree corresponds to a concept of the tree-predicate view.
Its minimal generators are the shortest predicate sets that single the
leaf out, which gives alternative explanations and lets us classify
rows with a missing value.
"""

from treefca.datasets import load_tennis, tennis_tree
from treefca.fclattice import minimal_generators
from treefca.fclattice.bits import from_bits
from treefca.treemodel import decision_path
from treefca.views import classify_via_view, leaf_intents, row_of, tree_predicate_view

data = load_tennis()
tree = tennis_tree()
view = tree_predicate_view(data, None, tree)
ctx = view.context

leaf = decision_path(tree, data, "13")[-1]
print(f"object 13 reaches leaf n{leaf} labelled {tree[leaf].label!r}")
print("path:", sorted(p.label for p in tree.path_predicates(leaf)))

for gen in minimal_generators(ctx, from_bits(leaf_intents(view)[(0, leaf)])):
    print("  generator:", sorted(ctx.attributes[a].label for a in gen))

# drop the overlook value; the windy/humidity generator still applies
row = row_of(data, "13", drop=("overlook",))
res = classify_via_view(view, data, row)
print(f"without overlook: leaves {res.leaves}, label {res.label!r}, ambiguous={res.ambiguous}")
