"""Random instance generators and brute-force oracles shared by the tests."""

import itertools

import numpy as np

from treefca.fclattice import FormalContext
from treefca.mvcontext import ManyValuedContext, ValueDomain


def random_context(rng, n_objects, n_attributes, density=0.5):
    m = rng.random((n_objects, n_attributes)) < density
    return FormalContext.from_matrix(m, objects=[f"g{i}" for i in range(n_objects)], attributes=[f"m{j}" for j in range(n_attributes)])


def random_mv_context(rng, n_objects, n_attributes, value_counts, n_classes=2):
    """Complete labelled many-valued context; value counts may be an int or a (lo, hi) range."""
    domains = []
    for j in range(n_attributes):
        k = value_counts if isinstance(value_counts, int) else int(rng.integers(value_counts[0], value_counts[1] + 1))
        domains.append(ValueDomain(f"a{j}", [f"v{i}" for i in range(k)]))
    codes = np.stack([rng.integers(0, len(d), size=n_objects) for d in domains], axis=1)
    labels = [f"c{int(x)}" for x in rng.integers(0, n_classes, size=n_objects)]
    return ManyValuedContext([f"o{i}" for i in range(n_objects)], domains, codes, labels)


def extents_bruteforce(ctx):
    """Every closed object set, by closing all attribute subsets."""
    out = set()
    n_attr = ctx.n_attributes
    for r in range(n_attr + 1):
        for combo in itertools.combinations(range(n_attr), r):
            ext = frozenset(g for g in range(ctx.n_objects) if all(a in ctx.row(g) for a in combo))
            out.add(ext)
    return out


def extent_family(lattice):
    return {c.extent for c in lattice}


def named_extents(lattice):
    objs = lattice.context.objects
    return {frozenset(objs[g] for g in c.extent) for c in lattice}


def intersection_closure(sets, universe):
    """Smallest family containing ``universe`` and closed under pairwise intersection."""
    family = {frozenset(universe)} | {frozenset(s) for s in sets}
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(list(family), 2):
            c = a & b
            if c not in family:
                family.add(c)
                changed = True
    return family


def transitive_reduction(lattice):
    """Cover pairs by the definition: i < j with nothing strictly between."""
    exts = [c.extent for c in lattice]
    out = set()
    for i, a in enumerate(exts):
        for j, b in enumerate(exts):
            if i != j and a < b and not any(a < c < b for c in exts):
                out.add((i, j))
    return out


def subset_sweep_generators(ctx, intent):
    """Minimal generators by testing every subset of the intent."""
    intent = sorted(intent)
    gens = []
    for r in range(len(intent) + 1):
        for combo in itertools.combinations(intent, r):
            s = frozenset(combo)
            ext = [g for g in range(ctx.n_objects) if s <= ctx.row(g)]
            closed = frozenset(range(ctx.n_attributes)) if not ext else frozenset.intersection(*(ctx.row(g) for g in ext))
            if closed == frozenset(intent) and not any(g <= s for g in gens):
                gens.append(s)
    return set(gens)


def object_extent(ctx, g):
    """Named extent of the object concept of ``g`` computed directly from rows."""
    row = ctx.row(g)
    return frozenset(ctx.objects[h] for h in range(ctx.n_objects) if row <= ctx.row(h))


def object_concepts_are_atoms(ctx):
    """Every object concept is a minimal concept with nonempty extent, and the bottom is empty."""
    exts = extents_bruteforce(ctx) if ctx.n_attributes <= 12 else None
    if exts is None:
        from treefca.fclattice import enumerate_concepts

        exts = {frozenset(c.extent) for c in enumerate_concepts(ctx)}
    nonempty = [e for e in exts if e]
    if len(nonempty) == len(exts):
        return False
    minimal = {e for e in nonempty if not any(f < e for f in nonempty)}
    objs = {frozenset(h for h in range(ctx.n_objects) if ctx.row(g) <= ctx.row(h)) for g in range(ctx.n_objects)}
    return objs == minimal


def incidence_pairs(ctx):
    return {(ctx.objects[g], ctx.attributes[a]) for g in range(ctx.n_objects) for a in ctx.row(g)}


def view_relation_violations(mvctx, tree):
    """Names of the view relations that fail for ``tree`` trained on ``mvctx``."""
    from treefca.fclattice import enumerate_concepts
    from treefca.mvcontext import interordinal_scale_context
    from treefca.views import interordinal_predicate_view, leaf_view, tree_predicate_view, tree_view

    views = {
        "leaf": leaf_view(mvctx, None, tree).context,
        "tree": tree_view(mvctx, None, tree).context,
        "treepred": tree_predicate_view(mvctx, None, tree).context,
        "interpred": interordinal_predicate_view(mvctx, None, tree).context,
    }
    scaled = interordinal_scale_context(mvctx)
    ext = {k: named_extents(enumerate_concepts(v)) for k, v in views.items()}
    bad = []
    for k, v in views.items():
        if not object_concepts_are_atoms(v):
            bad.append(f"atoms:{k}")
    if not ext["leaf"] <= ext["tree"] <= ext["treepred"]:
        bad.append("extents:leaf-tree-treepred")
    if not ext["tree"] <= ext["interpred"]:
        bad.append("extents:tree-interpred")
    if not incidence_pairs(views["treepred"]) <= incidence_pairs(views["interpred"]):
        bad.append("incidence")
    for g in range(len(mvctx)):
        if len({object_extent(views[k], g) for k in ("leaf", "tree", "treepred")}) != 1:
            bad.append("object-extents")
            break
    if not ext["interpred"] <= named_extents(enumerate_concepts(scaled)):
        bad.append("scale:extents")
    if not object_concepts_are_atoms(scaled):
        bad.append("scale:atoms")
    return bad


def random_view_relation_case(rng):
    """A random complete context in the documented size ranges and a tree trained on it."""
    from treefca.treemodel import TrainConfig, train_tree

    n = int(rng.integers(8, 21))
    m = int(rng.integers(3, 7))
    ctx = random_mv_context(rng, n, m, (2, 4), n_classes=int(rng.integers(2, 4)))
    md = [None, 2, 3][int(rng.integers(0, 3))]
    return ctx, train_tree(ctx, TrainConfig(max_depth=md, bagging=False), np.random.default_rng(int(rng.integers(1 << 31))))
