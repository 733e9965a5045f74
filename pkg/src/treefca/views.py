"""Conceptual views of trees and forests as formal contexts.

Four views are built over an object set taken from a many-valued context:

* leaf view: objects x leaves, each object crossed with its leaf;
* tree view: objects x nodes, crossed along the decision path;
* tree-predicate view: objects x predicates annotated along the path;
* interordinal-predicate view: objects x predicates, crossed wherever the
  object's values satisfy the predicate.

Leaf and tree columns are named ``n{id}`` (``t{i}.n{id}`` inside a forest
view); predicate columns are :class:`~treefca.mvcontext.Predicate` objects,
so identical predicates from different trees coincide.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import EmptyForest, MissingValue, Unclassifiable
from .fclattice.bits import from_bits, to_bits
from .fclattice.context import FormalContext
from .fclattice.lattice import minimal_generators
from .mvcontext import LEQ, MISSING, Predicate
from .treemodel import Forest, leaf_assignment, majority


class ViewKind(str, enum.Enum):
    LEAF = "leaf"
    TREE = "tree"
    TREE_PREDICATE = "tree_predicate"
    INTERORDINAL_PREDICATE = "interordinal_predicate"

    @property
    def is_predicate(self):
        return self in (ViewKind.TREE_PREDICATE, ViewKind.INTERORDINAL_PREDICATE)


@dataclass(frozen=True)
class Column:
    """Where a view column comes from: tree indices, node id and/or predicate."""

    trees: tuple = ()
    node: int = None
    predicate: Predicate = None


@dataclass(frozen=True)
class ViewContext:
    kind: ViewKind
    source: object
    context: FormalContext
    columns: tuple

    @property
    def objects(self):
        return self.context.objects

    @property
    def attributes(self):
        return self.context.attributes

    def restrict(self, objects=None, attributes=None):
        """Induced sub-view on object / column indices, provenance kept."""
        sub = self.context.subcontext(objects, attributes)
        cols = self.columns if attributes is None else tuple(self.columns[a] for a in attributes)
        return ViewContext(self.kind, self.source, sub, cols)

    @property
    def trees(self):
        return self.source.trees if isinstance(self.source, Forest) else (self.source,)


def node_name(node, tree_index=None):
    return f"n{node}" if tree_index is None else f"t{tree_index}.n{node}"


def predicate_key(domains):
    """Sort key ordering predicates by attribute, then ``<=`` before ``>=``, then value."""
    pos = {d.name: i for i, d in enumerate(domains)}
    doms = {d.name: d for d in domains}

    def key(p):
        d = doms.get(p.attribute)
        v = d.index(p.threshold) if d is not None and p.threshold in d else p.threshold
        return (pos.get(p.attribute, len(pos)), p.attribute, 0 if p.direction is LEQ else 1, v)

    return key


def _objects(ctx, objects):
    return list(ctx.objects) if objects is None else [str(g) for g in objects]


def _from_masks(objects, attributes, masks):
    rows = [0] * len(objects)
    for a, mk in enumerate(masks):
        for r in np.flatnonzero(mk):
            rows[r] |= 1 << a
    return FormalContext.from_bitrows(objects, attributes, rows)


# -- single-tree views ---------------------------------------------------


def leaf_view(ctx, objects, tree, tree_index=None):
    """Objects x leaves; each object is crossed with the leaf it reaches.

    Raises
    ------
    MissingValueAtNode
        An object lacks a value tested on its path.
    """
    objs = _objects(ctx, objects)
    leaf = leaf_assignment(tree, ctx, objs)
    leaves = tree.leaves
    col = {k: a for a, k in enumerate(leaves)}
    rows = [1 << col[k] for k in leaf]
    names = [node_name(k, tree_index) for k in leaves]
    trees = () if tree_index is None else (tree_index,)
    cols = tuple(Column(trees, k, None) for k in leaves)
    return ViewContext(ViewKind.LEAF, tree, FormalContext.from_bitrows(objs, names, rows), cols)


def tree_view(ctx, objects, tree, tree_index=None):
    """Objects x all nodes (root included); each row is the object's decision path."""
    objs = _objects(ctx, objects)
    leaf = leaf_assignment(tree, ctx, objs)
    paths = {k: to_bits(tree.path_to(k)) for k in tree.leaves}
    rows = [paths[k] for k in leaf]
    names = [node_name(n.id, tree_index) for n in tree.nodes]
    trees = () if tree_index is None else (tree_index,)
    cols = tuple(Column(trees, n.id, n.annotation) for n in tree.nodes)
    return ViewContext(ViewKind.TREE, tree, FormalContext.from_bitrows(objs, names, rows), cols)


def tree_predicates(tree, domains=None):
    """The tree's predicate alphabet as a sorted list."""
    preds = {n.annotation for n in tree.nodes if n.annotation is not None}
    return sorted(preds, key=predicate_key(domains)) if domains else sorted(preds)


def predicate_context(tree, domains=None):
    """Nodes x predicates: node ``n`` is crossed with every annotation on its root path."""
    preds = tree_predicates(tree, domains)
    col = {p: a for a, p in enumerate(preds)}
    rows = []
    for n in tree.nodes:
        rows.append(to_bits(col[tree.nodes[h].annotation] for h in tree.path_to(n.id)[1:]))
    return FormalContext.from_bitrows([node_name(n.id) for n in tree.nodes], preds, rows)


def _path_predicate_rows(tree, leaf, col):
    cache = {}
    rows = []
    for k in leaf:
        if k not in cache:
            cache[k] = to_bits(col[p] for p in tree.path_predicates(k))
        rows.append(cache[k])
    return rows


def tree_predicate_view(ctx, objects, tree):
    """Objects x predicates; an object is crossed with the predicates annotated along its path.

    This is the relation product of the tree view with :func:`predicate_context`.
    """
    objs = _objects(ctx, objects)
    preds = tree_predicates(tree, ctx.domains)
    col = {p: a for a, p in enumerate(preds)}
    rows = _path_predicate_rows(tree, leaf_assignment(tree, ctx, objs), col)
    cols = tuple(Column((), None, p) for p in preds)
    return ViewContext(ViewKind.TREE_PREDICATE, tree, FormalContext.from_bitrows(objs, preds, rows), cols)


def _model_masks(ctx, objs, preds):
    idx = [ctx.object_index(g) for g in objs]
    masks = []
    for p in preds:
        holds, known = ctx.predicate_mask(p)
        if not known[idx].all():
            bad = next(g for g, i in zip(objs, idx) if not known[i])
            raise MissingValue(p.attribute, bad)
        masks.append(holds[idx])
    return masks


def interordinal_predicate_view(ctx, objects, tree):
    """Objects x the tree's predicates, crossed wherever the object satisfies the predicate.

    Raises
    ------
    MissingValue
        An object lacks a value for an attribute the tree tests.
    """
    objs = _objects(ctx, objects)
    preds = tree_predicates(tree, ctx.domains)
    masks = _model_masks(ctx, objs, preds)
    cols = tuple(Column((), None, p) for p in preds)
    return ViewContext(ViewKind.INTERORDINAL_PREDICATE, tree, _from_masks(objs, preds, masks), cols)


_SINGLE = {
    ViewKind.LEAF: leaf_view,
    ViewKind.TREE: tree_view,
    ViewKind.TREE_PREDICATE: tree_predicate_view,
    ViewKind.INTERORDINAL_PREDICATE: interordinal_predicate_view,
}


def build_view(ctx, objects, model, kind):
    """Dispatch on ``kind`` for a tree or a forest."""
    kind = ViewKind(kind)
    if isinstance(model, Forest):
        return forest_view(ctx, objects, model, kind)
    return _SINGLE[kind](ctx, objects, model)


# -- forest views ----------------------------------------------------------


def forest_view(ctx, objects, forest, kind):
    """Union of the per-tree views over a shared object set.

    Leaf and tree columns stay disjoint (prefixed ``t{i}.``), so the result
    is the apposition of the per-tree contexts.  Predicate columns merge by
    identity: a tree-predicate cross is present when some tree's view has
    it, and interordinal-predicate columns are evaluated once over the
    union alphabet.  A one-tree forest gives exactly the single-tree view.

    Raises
    ------
    EmptyForest
    """
    kind = ViewKind(kind)
    trees = forest.trees if isinstance(forest, Forest) else tuple(forest)
    if not trees:
        raise EmptyForest("forest has no trees")
    if len(trees) == 1:
        v = _SINGLE[kind](ctx, objects, trees[0])
        return ViewContext(kind, forest, v.context, v.columns)
    objs = _objects(ctx, objects)
    if kind in (ViewKind.LEAF, ViewKind.TREE):
        build = leaf_view if kind is ViewKind.LEAF else tree_view
        parts = [build(ctx, objs, t, i) for i, t in enumerate(trees)]
        out = parts[0].context
        for p in parts[1:]:
            out = out.apposition(p.context)
        cols = tuple(c for p in parts for c in p.columns)
        return ViewContext(kind, forest, out, cols)

    owners = {}
    for i, t in enumerate(trees):
        for n in t.nodes:
            if n.annotation is not None:
                owners.setdefault(n.annotation, set()).add(i)
    preds = sorted(owners, key=predicate_key(ctx.domains))
    cols = tuple(Column(tuple(sorted(owners[p])), None, p) for p in preds)
    if kind is ViewKind.INTERORDINAL_PREDICATE:
        return ViewContext(kind, forest, _from_masks(objs, preds, _model_masks(ctx, objs, preds)), cols)
    col = {p: a for a, p in enumerate(preds)}
    rows = [0] * len(objs)
    for t in trees:
        for r, bits in enumerate(_path_predicate_rows(t, leaf_assignment(t, ctx, objs), col)):
            rows[r] |= bits
    return ViewContext(kind, forest, FormalContext.from_bitrows(objs, preds, rows), cols)


# -- classification with absent values ------------------------------------


@dataclass(frozen=True)
class Classification:
    """Outcome of :func:`classify_via_view`.

    ``leaves`` holds ``(tree index, leaf id)`` pairs; ``ambiguous`` is set
    when candidate leaves carry different labels.
    """

    leaves: tuple
    label: str
    ambiguous: bool


def leaf_intents(view):
    """``{(tree index, leaf id): intent bitset}`` of each leaf's concept in the view.

    A leaf's concept is the closure of the predicates on its path.
    """
    ctx = view.context
    col = {p: a for a, p in enumerate(ctx.attributes)}
    out = {}
    for i, t in enumerate(view.trees):
        for k in t.leaves:
            b = to_bits(col[p] for p in t.path_predicates(k))
            out[(i, k)] = ctx.intent_bits(ctx.extent_bits(b))
    return out


def satisfied_predicates(mvctx, row, predicates):
    """Indices of ``predicates`` that a partial row (attribute -> token or None) provably satisfies,
    and indices it provably violates."""
    yes, no = set(), set()
    for a, p in enumerate(predicates):
        tok = row.get(p.attribute)
        if tok is None or tok == "":
            continue
        if p.holds(mvctx.domain(p.attribute), tok):
            yes.add(a)
        else:
            no.add(a)
    return yes, no


def classify_via_view(view, mvctx, row):
    """Classify a row that may lack values, using minimal generators of leaf concepts.

    ``S`` is the set of view predicates the row provably satisfies.  A leaf
    is a candidate when some minimal generator of its concept lies inside
    ``S`` and none of the predicates on its path is provably violated.  The
    label is the majority over candidate leaves.

    Parameters
    ----------
    view : ViewContext
        A tree-predicate or interordinal-predicate view over labelled data.
    mvctx : ManyValuedContext
        Supplies the value domains; tokens in ``row`` must belong to them.
    row : mapping
        Attribute -> token, with ``None`` or a missing key for absent cells.

    Raises
    ------
    Unclassifiable
        No leaf qualifies.
    """
    if not view.kind.is_predicate:
        raise ValueError("classification needs a predicate view")
    for m, tok in row.items():
        if tok is not None and tok != "" and tok not in mvctx.domain(m):
            raise ValueError(f"{tok!r} is not a value of {m!r}")
    ctx = view.context
    yes, no = satisfied_predicates(mvctx, row, ctx.attributes)
    s_bits, no_bits = to_bits(yes), to_bits(no)
    col = {p: a for a, p in enumerate(ctx.attributes)}
    candidates = []
    for (i, k), intent in leaf_intents(view).items():
        t = view.trees[i]
        path = to_bits(col[p] for p in t.path_predicates(k))
        if path & no_bits:
            continue
        gens = minimal_generators(ctx, from_bits(intent))
        if any(to_bits(gen) & ~s_bits == 0 for gen in gens):
            candidates.append((i, k))
    if not candidates:
        raise Unclassifiable(f"no leaf is implied by the known values {sorted(yes)}")
    labels = [view.trees[i].nodes[k].label for i, k in candidates]
    return Classification(tuple(candidates), majority(labels), len(set(labels)) > 1)


def row_of(mvctx, g, drop=()):
    """Object ``g``'s row as a dict, with attributes in ``drop`` left absent."""
    i = mvctx.object_index(g)
    out = {}
    for d, c in zip(mvctx.domains, mvctx.codes[i]):
        out[d.name] = None if c == MISSING or d.name in drop else d.values[c]
    return out
