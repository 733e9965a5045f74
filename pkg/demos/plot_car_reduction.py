"""
Reducing a large view
=====================

The interordinal-predicate view of a forest on the car data has
thousands of concepts.  Pick representative objects with k-medoids,
keep the most important attributes, then look at the iceberg and the
one-directional factor.
"""

from treefca.datasets import load_car
from treefca.fclattice import count_concepts, iceberg
from treefca.mvcontext import GEQ
from treefca.reduce import kmedoids_select, ordinal_factor, rank_attributes, select_attributes, select_objects
from treefca.treemodel import TrainConfig, permutation_importance, train_forest
from treefca.views import ViewKind, forest_view

car = load_car()
forest = train_forest(car, TrainConfig(n_trees=4, max_depth=7, rng_seed=0))
view = forest_view(car, None, forest, ViewKind.INTERORDINAL_PREDICATE)
print(f"full view: {len(view.objects)} objects, {len(view.attributes)} columns, {count_concepts(view.context)} concepts")

scores = permutation_importance(forest, car, n_repeats=3, rng_seed=0)
print("importance ranking:", rank_attributes(scores))

medoids = kmedoids_select(car, 19, rng_seed=0)
small = select_attributes(select_objects(view, medoids), scores, 3)
print(f"19 medoids, top 3 attributes: {len(small.attributes)} columns, {count_concepts(small.context)} concepts")

for theta in (2, 5, 10):
    print(f"  iceberg support >= {theta}: {len(iceberg(small.context, theta))} concepts")

geq = ordinal_factor(small, GEQ)
print(f">= factor: {len(geq.attributes)} columns, {count_concepts(geq.context)} concepts")
