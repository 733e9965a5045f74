"""
Views of a random forest
========================

Leaf and tree views of a forest place the per-tree contexts side by
side.  Predicate views merge columns that test the same threshold, so
they stay small as trees are added.
"""

from treefca.datasets import load_car
from treefca.fclattice import count_concepts
from treefca.treemodel import TrainConfig, evaluate, train_forest
from treefca.views import ViewKind, forest_view

car = load_car()
for nt in (1, 2, 4):
    forest = train_forest(car, TrainConfig(n_trees=nt, max_depth=6, rng_seed=0))
    acc = evaluate(forest, car)["accuracy"]
    counts = {k.value: count_concepts(forest_view(car, None, forest, k).context) for k in ViewKind}
    print(f"nt={nt} training accuracy {acc:.3f}", counts)
