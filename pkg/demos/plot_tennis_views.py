"""
Four views of one decision tree
===============================

Scale the tennis table, then build the leaf, tree, tree-predicate and
interordinal-predicate views of a small tree trained on it and compare
their concept lattices.
"""

from treefca.datasets import load_tennis, tennis_tree
from treefca.fclattice import count_concepts, enumerate_concepts, to_dot
from treefca.mvcontext import interordinal_scale_context
from treefca.views import ViewKind, build_view

data = load_tennis()
print(f"{len(data)} objects, attributes {[d.name for d in data.domains]}")

# interordinal scaling keeps every threshold of every attribute
scaled = interordinal_scale_context(data)
print(f"interordinal scale: {scaled.n_attributes} columns, {count_concepts(scaled)} concepts")

tree = tennis_tree()
for node in tree.nodes:
    print(f"  n{node.id}: parent={node.parent} test={node.annotation} label={node.label}")

# the tree only sees a few thresholds, so its views are much smaller
for kind in ViewKind:
    view = build_view(data, None, tree, kind)
    lat = enumerate_concepts(view.context)
    print(f"{kind.value:>24}: {view.context.n_attributes:2d} columns, {len(lat):3d} concepts")

view = build_view(data, None, tree, ViewKind.TREE_PREDICATE)
print(to_dot(enumerate_concepts(view.context), labels=data.labels, positive="yes", name="tree_predicate"))
