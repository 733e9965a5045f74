"""Reductions that bring views down to a readable size.

Object selection picks medoids (PAM under Hamming distance); attribute
selection keeps the columns of the most important data attributes;
composition splits a view by class or by threshold direction; aggregation
re-scales predicates over coarser graded domains.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGrades, MissingLabel, SilhouetteUndefined, TooManyClusters
from .fclattice.context import FormalContext
from .mvcontext import GEQ, LEQ, Direction, Predicate
from .views import Column, ViewContext, ViewKind, predicate_key

MAX_SWAPS = 100


# -- distances and clustering ------------------------------------------------


def hamming_matrix(ctx):
    """Pairwise count of attributes on which two objects' values differ."""
    codes = ctx.codes
    n = len(codes)
    d = np.zeros((n, n), dtype=np.int16)
    for j in range(codes.shape[1]):
        col = codes[:, j]
        d += col[:, None] != col[None, :]
    return d


@dataclass(frozen=True)
class KMedoidsResult:
    medoids: tuple
    assignment: dict
    cost: int
    swaps: int


def _canonical_order(ctx):
    # value tokens first, id second: reordering the input cannot change the result
    rows = [tuple(r) for r in ctx.codes.tolist()]
    return sorted(range(len(ctx)), key=lambda i: (rows[i], ctx.objects[i]))


def _nearest_two(d, medoids):
    sub = d[:, medoids]
    order = np.argsort(sub, axis=1, kind="stable")
    first = sub[np.arange(len(d)), order[:, 0]]
    second = sub[np.arange(len(d)), order[:, 1]] if len(medoids) > 1 else np.full(len(d), np.iinfo(np.int32).max)
    return order[:, 0], first.astype(np.int64), second.astype(np.int64)


def kmedoids(ctx, k, rng_seed=0, distances=None):
    """PAM (greedy build, then best-improvement swaps) under Hamming distance.

    Objects are put in a canonical order first.  The seed only decides
    between equally good candidates, through a fixed random priority per
    object; at most ``MAX_SWAPS`` swaps are made.

    Raises
    ------
    TooManyClusters
        ``k`` exceeds the number of objects.
    """
    n = len(ctx)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n:
        raise TooManyClusters(f"k={k} exceeds {n} objects")
    perm = _canonical_order(ctx)
    d = hamming_matrix(ctx) if distances is None else np.asarray(distances)
    d = d[np.ix_(perm, perm)].astype(np.int64)
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    priority = rng.permutation(n)

    def pick(scores, allowed):
        # lowest score, then lowest random priority
        cand = np.flatnonzero(allowed)
        s = scores[cand]
        best = cand[s == s.min()]
        return int(best[np.argmin(priority[best])])

    medoids = []
    is_med = np.zeros(n, dtype=bool)
    current = np.full(n, np.iinfo(np.int64).max // 4, dtype=np.int64)
    for _ in range(k):
        totals = np.minimum(d, current[:, None]).sum(axis=0)
        m = pick(totals, ~is_med)
        medoids.append(m)
        is_med[m] = True
        current = np.minimum(current, d[:, m])

    swaps = 0
    cost = int(current.sum())
    while swaps < MAX_SWAPS and k < n:
        near, first, second = _nearest_two(d, medoids)
        best = (cost, None, None)
        for slot in range(k):
            alt = np.where(near == slot, second, first)
            totals = np.minimum(d, alt[:, None]).sum(axis=0)
            totals[is_med] = np.iinfo(np.int64).max
            h = pick(totals, ~is_med)
            if totals[h] < best[0]:
                best = (int(totals[h]), slot, h)
        if best[1] is None:
            break
        _, slot, h = best
        is_med[medoids[slot]] = False
        medoids[slot] = h
        is_med[h] = True
        cost = best[0]
        swaps += 1

    near, _, _ = _nearest_two(d, medoids)
    med_ids = [ctx.objects[perm[m]] for m in medoids]
    assignment = {ctx.objects[perm[i]]: med_ids[near[i]] for i in range(n)}
    return KMedoidsResult(tuple(sorted(med_ids)), assignment, cost, swaps)


def kmedoids_select(ctx, k, rng_seed=0):
    """Ids of the ``k`` center objects."""
    return frozenset(kmedoids(ctx, k, rng_seed).medoids)


def silhouette(ctx, assignment, distances=None):
    """Mean silhouette width under Hamming distance.

    ``assignment`` maps object id -> cluster key (or is a sequence aligned
    with ``ctx.objects``).  A point in a singleton cluster scores 0, and so
    does a point with ``a = b = 0``.

    Raises
    ------
    SilhouetteUndefined
        Fewer than two clusters.
    """
    if isinstance(assignment, dict):
        keys = [assignment[g] for g in ctx.objects]
    else:
        keys = list(assignment)
    d = hamming_matrix(ctx) if distances is None else np.asarray(distances)
    return silhouette_from_distances(d, keys)


def silhouette_from_distances(d, keys):
    clusters = sorted(set(keys), key=str)
    if len(clusters) < 2:
        raise SilhouetteUndefined("silhouette needs at least two clusters")
    lab = np.array([clusters.index(c) for c in keys])
    d = np.asarray(d, dtype=float)
    n = len(lab)
    sums = np.stack([d[:, lab == c].sum(axis=1) for c in range(len(clusters))], axis=1)
    sizes = np.bincount(lab, minlength=len(clusters)).astype(float)
    own = sizes[lab]
    a = np.where(own > 1, sums[np.arange(n), lab] / np.maximum(own - 1, 1), 0.0)
    other = sums / sizes
    other[np.arange(n), lab] = np.inf
    b = other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1), 0.0)
    s[own == 1] = 0.0
    return float(s.mean())


def silhouette_sweep(ctx, ks, rng_seed=0):
    """Silhouette score per ``k``; returns ``(scores, best k)`` with the lowest k winning ties."""
    d = hamming_matrix(ctx)
    scores = {}
    for k in ks:
        res = kmedoids(ctx, k, rng_seed, distances=d)
        scores[k] = silhouette(ctx, res.assignment, distances=d)
    best = min(scores, key=lambda k: (-scores[k], k))
    return scores, best


# -- attribute selection and composition -------------------------------------


def _data_attribute(col):
    if col.predicate is not None:
        return col.predicate.attribute
    return None


def rank_attributes(scores):
    """Attribute names by decreasing score, ties in name order."""
    return sorted(scores, key=lambda m: (-scores[m], m))


def select_attributes(view, scores, top_k):
    """Keep the columns whose data attribute is among the ``top_k`` by score."""
    ranked = rank_attributes(scores)
    if top_k > len(ranked):
        warnings.warn(f"top_k={top_k} exceeds the {len(ranked)} scored attributes; view kept as is")
        return view
    keep_attrs = set(ranked[:top_k])
    missing = {_data_attribute(c) for c in view.columns} - set(scores) - {None}
    if missing:
        raise KeyError(f"no importance score for {sorted(missing)}")
    keep = [a for a, c in enumerate(view.columns) if _data_attribute(c) in keep_attrs]
    return view.restrict(attributes=keep)


def select_objects(view, objects):
    """Induced sub-view on the given object ids, in view order."""
    wanted = {str(g) for g in objects}
    idx = [i for i, g in enumerate(view.objects) if g in wanted]
    if len(idx) != len(wanted):
        missing = wanted - {view.objects[i] for i in idx}
        raise KeyError(f"objects not in view: {sorted(missing)}")
    return view.restrict(objects=idx)


def _label_lookup(labels):
    if hasattr(labels, "labels") and hasattr(labels, "objects"):
        return dict(zip(labels.objects, labels.labels or ()))
    return dict(labels)


def partition_by_class(view, labels):
    """``{class label: sub-view}`` over the objects of each class.

    ``labels`` is a mapping object id -> label or a labelled many-valued context.

    Raises
    ------
    MissingLabel
    """
    lookup = _label_lookup(labels)
    parts = {}
    for i, g in enumerate(view.objects):
        if g not in lookup or lookup[g] is None:
            raise MissingLabel(f"object {g!r} has no class label")
        parts.setdefault(lookup[g], []).append(i)
    return {c: view.restrict(objects=idx) for c, idx in sorted(parts.items())}


def ordinal_factor(view, direction):
    """Keep only the predicate columns of one threshold direction."""
    direction = Direction(direction)
    keep = [
        a for a, c in enumerate(view.columns) if c.predicate is not None and c.predicate.direction is direction
    ]
    return view.restrict(attributes=keep)


# -- aggregation ----------------------------------------------------------------


def _grade_order(domain, mapping):
    """Grades of one attribute in order, validated against the domain order."""
    missing = [v for v in domain.values if v not in mapping]
    if missing:
        raise InvalidGrades(f"{domain.name}: no grade for {missing}")
    seq = [mapping[v] for v in domain.values]
    order = []
    for gr in seq:
        if not order or order[-1] != gr:
            if gr in order:
                raise InvalidGrades(f"{domain.name}: grades are not order preserving")
            order.append(gr)
    if all(isinstance(g, (int, np.integer)) for g in order) and order != sorted(order):
        raise InvalidGrades(f"{domain.name}: numeric grades decrease along the domain")
    return order


def aggregate_attributes(view, mvctx, grade_map):
    """Re-scale predicate columns over graded domains.

    ``grade_map`` maps attribute -> {value: grade}.  A column ``m <= v``
    becomes ``m <= grade(v)`` and ``m >= v`` becomes ``m >= grade(v)``;
    columns that coincide after grading merge, and columns that become
    true for every value (``<=`` the top grade, ``>=`` the bottom grade)
    are dropped.  For interordinal-predicate views the merged incidence is
    re-derived from the raw values; for tree-predicate views it is the
    union of the member columns.  Columns of ungraded attributes pass
    through unchanged.

    Raises
    ------
    InvalidGrades
        A grade map is not order preserving or misses a value.
    """
    if not view.kind.is_predicate:
        raise ValueError("aggregation applies to predicate views")
    orders = {m: _grade_order(mvctx.domain(m), gm) for m, gm in grade_map.items()}
    ctx = view.context
    idx = [mvctx.object_index(g) for g in ctx.objects]
    merged = {}
    for a, c in enumerate(view.columns):
        p = c.predicate
        if p.attribute not in grade_map:
            key = p
        else:
            gm, order = grade_map[p.attribute], orders[p.attribute]
            gr = gm[p.threshold]
            if (p.direction is LEQ and gr == order[-1]) or (p.direction is GEQ and gr == order[0]):
                continue
            key = Predicate(p.attribute, p.direction, str(gr))
        merged.setdefault(key, []).append(a)

    domains = list(mvctx.domains)
    key_fn = predicate_key(domains)

    def sort_key(p):
        if p.attribute in grade_map:
            order = [str(g) for g in orders[p.attribute]]
            base = key_fn(Predicate(p.attribute, p.direction, mvctx.domain(p.attribute).values[0]))
            return base[:3] + (order.index(p.threshold),)
        return key_fn(p)

    preds = sorted(merged, key=sort_key)
    rows = [0] * len(ctx.objects)
    for b, p in enumerate(preds):
        if view.kind is ViewKind.INTERORDINAL_PREDICATE and p.attribute in grade_map:
            gm, order = grade_map[p.attribute], [str(g) for g in orders[p.attribute]]
            dom = mvctx.domain(p.attribute)
            j = mvctx.attribute_index(p.attribute)
            t = order.index(p.threshold)
            graded = np.array([order.index(str(gm[v])) for v in dom.values])
            col = mvctx.codes[idx, j]
            ok = graded[col] <= t if p.direction is LEQ else graded[col] >= t
            members = np.flatnonzero(ok)
        else:
            bits = 0
            for a in merged[p]:
                bits |= ctx.cols[a]
            members = [r for r in range(len(rows)) if bits >> r & 1]
        for r in members:
            rows[r] |= 1 << b
    owners = tuple(
        tuple(sorted({t for a in merged[p] for t in view.columns[a].trees})) for p in preds
    )
    cols = tuple(Column(o, None, p) for o, p in zip(owners, preds))
    return ViewContext(view.kind, view.source, FormalContext.from_bitrows(ctx.objects, preds, rows), cols)


# -- plans --------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionPlan:
    """Which reductions to apply, in the order objects, attributes, aggregation, composition.

    ``object_selector``: ``("kmedoids", k)`` or ``("explicit", [ids])``;
    ``attribute_selector``: ``("top_k", k)`` or ``("explicit", [predicate strings])``;
    ``composition``: ``"by_class"``, ``"<="`` or ``">="``;
    ``aggregation``: attribute -> {value: grade}.
    """

    object_selector: tuple = None
    attribute_selector: tuple = None
    composition: str = None
    aggregation: dict = field(default=None, hash=False)
    min_support: int = None
    rng_seed: int = 0

    def __post_init__(self):
        for sel in (self.object_selector, self.attribute_selector):
            if sel is not None and sel[0] in ("kmedoids", "top_k") and int(sel[1]) < 1:
                raise ValueError("k must be at least 1")

    @classmethod
    def from_dict(cls, d):
        d = dict(d or {})
        obj = d.get("object_selector")
        att = d.get("attribute_selector")
        return cls(
            object_selector=None if obj is None else (obj["kind"], obj.get("k", obj.get("ids"))),
            attribute_selector=None if att is None else (att["kind"], att.get("k", att.get("predicates"))),
            composition=d.get("composition"),
            aggregation=d.get("aggregation"),
            min_support=d.get("min_support"),
            rng_seed=d.get("rng_seed", 0),
        )


def apply_plan(view, mvctx, plan, importance=None):
    """Run a :class:`ReductionPlan` on a view.

    Returns ``{part name: ViewContext}``; without composition the single
    part is named ``"all"``.  ``importance`` (attribute -> score) is needed
    for a ``top_k`` attribute selector.
    """
    if plan.object_selector is not None:
        kind, arg = plan.object_selector
        if kind == "kmedoids":
            ids = kmedoids_select(mvctx.select(view.objects), int(arg), plan.rng_seed)
        elif kind == "explicit":
            ids = arg
        else:
            raise ValueError(f"unknown object selector {kind!r}")
        view = select_objects(view, ids)
    if plan.attribute_selector is not None:
        kind, arg = plan.attribute_selector
        if kind == "top_k":
            if importance is None:
                raise ValueError("top_k attribute selection needs importance scores")
            view = select_attributes(view, importance, int(arg))
        elif kind == "explicit":
            wanted = {str(p) for p in arg}
            view = view.restrict(attributes=[a for a, p in enumerate(view.attributes) if str(p) in wanted])
        else:
            raise ValueError(f"unknown attribute selector {kind!r}")
    if plan.aggregation:
        view = aggregate_attributes(view, mvctx, plan.aggregation)
    if plan.composition is None:
        return {"all": view}
    if plan.composition == "by_class":
        return partition_by_class(view, mvctx)
    direction = Direction(plan.composition)
    return {direction.value: ordinal_factor(view, direction)}
