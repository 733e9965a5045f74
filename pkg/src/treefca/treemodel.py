"""Binary decision trees annotated with threshold predicates, and bagged forests.

Every non-root node carries the predicate its objects satisfy; siblings
carry complementary predicates ``m <= v`` / ``m >= succ(v)``.  Trees are
grown greedily by entropy information gain and are immutable once built.
Node ids are assigned breadth first with the ``<=`` child before its
``>=`` sibling.
"""

import json
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTraining, MissingValueAtNode, ParseError
from .mvcontext import GEQ, LEQ, MISSING, Predicate

WORKERS_ENV = "TREEFCA_WORKERS"


def worker_count():
    """Worker processes to use, from ``TREEFCA_WORKERS`` (default 1)."""
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class TreeNode:
    id: int
    parent: int = None
    annotation: Predicate = None
    children: tuple = ()
    label: str = None

    @property
    def is_leaf(self):
        return not self.children


class DecisionTree:
    """A proper binary tree whose non-root nodes are annotated by predicates.

    Parameters
    ----------
    nodes : sequence of TreeNode
        ``nodes[i].id == i`` is required.
    root : int
    degenerate : bool
        Set on the placeholder stump emitted when training data admits no
        split (both leaves carry the same label).
    """

    def __init__(self, nodes, root=0, degenerate=False):
        self.nodes = tuple(nodes)
        self.root = root
        self.degenerate = degenerate
        self._validate()

    def _validate(self):
        n = len(self.nodes)
        if n == 0:
            raise ValueError("a tree needs at least one node")
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ValueError(f"node at position {i} has id {node.id}")
        if not 0 <= self.root < n or self.nodes[self.root].parent is not None:
            raise ValueError("root must exist and have no parent")
        if self.nodes[self.root].annotation is not None:
            raise ValueError("root carries no predicate")
        if not self.nodes[self.root].children:
            raise ValueError("a tree needs at least one split")
        seen = set()
        stack = [self.root]
        while stack:
            k = stack.pop()
            if k in seen:
                raise ValueError("tree contains a cycle")
            seen.add(k)
            node = self.nodes[k]
            if node.children:
                if len(node.children) != 2:
                    raise ValueError(f"node {k} must have zero or two children")
                if node.label is not None:
                    raise ValueError(f"inner node {k} carries a label")
                a, b = (self.nodes[c] for c in node.children)
                for c in (a, b):
                    if c.parent != k or c.annotation is None:
                        raise ValueError(f"child {c.id} of node {k} is malformed")
                pa, pb = a.annotation, b.annotation
                if pa.attribute != pb.attribute or pa.direction == pb.direction:
                    raise ValueError(f"children of node {k} are not complementary")
                stack.extend(node.children)
            elif node.label is None:
                raise ValueError(f"leaf {k} has no label")
        if len(seen) != n:
            raise ValueError("tree has unreachable nodes")

    # -- structure -----------------------------------------------------

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, k):
        return self.nodes[k]

    @property
    def leaves(self):
        return tuple(n.id for n in self.nodes if n.is_leaf)

    @property
    def depth(self):
        return max(len(self.path_to(k)) for k in self.leaves) - 1

    def path_to(self, k):
        """Node ids from the root down to ``k``."""
        out = [k]
        while self.nodes[out[-1]].parent is not None:
            out.append(self.nodes[out[-1]].parent)
        return out[::-1]

    def ancestors(self, k):
        """``k`` and every node above it (the up-set of ``k``)."""
        return frozenset(self.path_to(k))

    def path_predicates(self, k):
        return frozenset(self.nodes[n].annotation for n in self.path_to(k)[1:])

    def check_negations(self, domains):
        """True iff every sibling pair is ``m <= v`` / ``m >= succ(v)`` under ``domains``."""
        doms = {d.name: d for d in domains}
        for node in self.nodes:
            if node.children:
                a, b = (self.nodes[c].annotation for c in node.children)
                if a.negation(doms[a.attribute]) != b:
                    return False
        return True

    def __eq__(self, other):
        if not isinstance(other, DecisionTree):
            return NotImplemented
        return (self.nodes, self.root, self.degenerate) == (other.nodes, other.root, other.degenerate)

    def __hash__(self):
        return hash((self.nodes, self.root))

    def __repr__(self):
        return f"DecisionTree({len(self.nodes)} nodes, {len(self.leaves)} leaves, depth {self.depth})"


@dataclass(frozen=True)
class Forest:
    trees: tuple
    bags: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "bags", tuple(tuple(b) for b in self.bags))

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters: ``n_trees`` (nt), ``max_depth`` (md), seed, bagging, features per split."""

    n_trees: int = 1
    max_depth: int = None
    rng_seed: int = 0
    bagging: bool = True
    features_per_split: int = None

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be at least 1")

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


# -- training ----------------------------------------------------------------


def _entropy(counts):
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / np.where(total > 0, total, 1), 0.0)
        h = -np.sum(np.where(p > 0, p * np.log2(np.where(p > 0, p, 1)), 0.0), axis=-1)
    return h


def majority(labels):
    """Most frequent label; ties go to the lexicographically least one."""
    counts = Counter(labels)
    best = max(counts.values())
    return min(lab for lab, c in counts.items() if c == best)


def split_gains(codes, y, n_classes, sizes):
    """Information gain of every candidate split ``(m, <=, v)``.

    Returns a list, one float array per attribute, holding the gain for
    each non-maximal value position ``v`` (0 where a side would be empty).
    """
    n = len(y)
    parent = _entropy(np.bincount(y, minlength=n_classes).astype(float))
    out = []
    for j, size in enumerate(sizes):
        table = np.bincount(codes[:, j] * n_classes + y, minlength=size * n_classes)
        table = table.reshape(size, n_classes).astype(float)
        left = np.cumsum(table, axis=0)[:-1]
        right = table.sum(axis=0) - left
        nl, nr = left.sum(axis=1), right.sum(axis=1)
        gain = parent - (nl * _entropy(left) + nr * _entropy(right)) / n
        gain[(nl == 0) | (nr == 0)] = 0.0
        out.append(gain)
    return out


def best_split(codes, y, n_classes, sizes, features=None):
    """``(attribute index, value index, gain)`` of the best split, or ``None`` without positive gain.

    Ties go to the lowest attribute index, then the lowest value index.
    """
    gains = split_gains(codes, y, n_classes, sizes)
    best = None
    allowed = range(len(sizes)) if features is None else sorted(features)
    for j in allowed:
        g = gains[j]
        if len(g) == 0:
            continue
        v = int(np.argmax(g))
        if g[v] > 1e-12 and (best is None or g[v] > best[2] + 1e-12):
            best = (j, v, float(g[v]))
    return best


def train_tree(ctx, config=None, rng=None):
    """Grow a tree on a complete labelled many-valued context.

    Splits maximise entropy information gain over candidates ``m <= v``
    for every non-maximal domain value ``v``.  A node becomes a leaf when
    it is pure, sits at ``max_depth``, or no split has positive gain; its
    label is the majority label of its objects.

    When the root itself cannot be split the result is a stump on the
    first available threshold with both leaves carrying the root label,
    flagged ``degenerate``.

    Raises
    ------
    EmptyTraining
        The context has no objects.
    """
    config = config or TrainConfig()
    if len(ctx) == 0:
        raise EmptyTraining("cannot train on an empty context")
    if ctx.labels is None:
        raise ValueError("training needs class labels")
    if not ctx.complete:
        raise ValueError("training needs a complete context")
    if config.features_per_split is not None and rng is None:
        rng = np.random.Generator(np.random.PCG64(config.rng_seed))
    classes = sorted(set(ctx.labels))
    y_all = np.array([classes.index(lab) for lab in ctx.labels], dtype=np.int64)
    codes_all = ctx.codes.astype(np.int64)
    sizes = [len(d) for d in ctx.domains]
    n_attr = len(sizes)

    nodes = [dict(id=0, parent=None, annotation=None, children=(), label=None)]
    queue = [(0, np.arange(len(ctx)), 0)]
    while queue:
        nid, idx, depth = queue.pop(0)
        y = y_all[idx]
        lab = majority(classes[c] for c in y)
        can_split = len(set(y.tolist())) > 1 and (config.max_depth is None or depth < config.max_depth)
        split = None
        if can_split:
            feats = None
            if config.features_per_split is not None and config.features_per_split < n_attr:
                feats = rng.choice(n_attr, size=config.features_per_split, replace=False).tolist()
            split = best_split(codes_all[idx], y, len(classes), sizes, feats)
        if split is None:
            nodes[nid]["label"] = lab
            continue
        j, v, _ = split
        d = ctx.domains[j]
        left = Predicate(d.name, LEQ, d.values[v])
        right = Predicate(d.name, GEQ, d.values[v + 1])
        mask = codes_all[idx, j] <= v
        kids = []
        for pred, sub in ((left, idx[mask]), (right, idx[~mask])):
            cid = len(nodes)
            nodes.append(dict(id=cid, parent=nid, annotation=pred, children=(), label=None))
            queue.append((cid, sub, depth + 1))
            kids.append(cid)
        nodes[nid]["children"] = tuple(kids)

    if len(nodes) == 1:
        return _stump(ctx, nodes[0]["label"])
    return DecisionTree([TreeNode(**n) for n in nodes])


def _stump(ctx, label):
    for d in ctx.domains:
        if len(d) > 1:
            left = Predicate(d.name, LEQ, d.values[0])
            right = Predicate(d.name, GEQ, d.values[1])
            return DecisionTree(
                [
                    TreeNode(0, None, None, (1, 2), None),
                    TreeNode(1, 0, left, (), label),
                    TreeNode(2, 0, right, (), label),
                ],
                degenerate=True,
            )
    raise ValueError("no attribute has two values; a tree needs at least one split")


def draw_bags(n_objects, n_trees, seed):
    """Bootstrap index arrays, drawn one tree after the other from a PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return [rng.integers(0, n_objects, size=n_objects) for _ in range(n_trees)]


def _bag_context(ctx, draws):
    """Training context for one bag: repeated draws become distinct object copies."""
    seen = Counter()
    names = []
    for i in draws:
        g = ctx.objects[i]
        k = seen[g]
        seen[g] += 1
        names.append(g if k == 0 else f"{g}#{k}")
    return ctx.take(draws, objects=names)


def _train_one(args):
    ctx, config, seed = args
    rng = np.random.Generator(np.random.PCG64(seed)) if config.features_per_split else None
    return train_tree(ctx, config, rng)


def train_forest(ctx, config):
    """Train ``config.n_trees`` trees, each on a bootstrap bag of ``|G|`` draws when bagging is on.

    Bags and per-tree seeds are fixed before any tree is trained, so the
    result does not depend on ``TREEFCA_WORKERS``.
    """
    if len(ctx) == 0:
        raise EmptyTraining("cannot train on an empty context")
    n = len(ctx)
    if config.bagging:
        bags = draw_bags(n, config.n_trees, config.rng_seed)
    else:
        bags = [np.arange(n)] * config.n_trees
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(config.rng_seed).spawn(config.n_trees)]
    jobs = []
    for t, draws in enumerate(bags):
        sub = _bag_context(ctx, draws) if config.bagging else ctx
        # a single unbagged tree must equal train_tree(ctx, config)
        seed = config.rng_seed if config.n_trees == 1 else seeds[t]
        jobs.append((sub, config, seed))
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            trees = list(pool.map(_train_one, jobs))
    else:
        trees = [_train_one(j) for j in jobs]
    bag_ids = [tuple(ctx.objects[i] for i in draws) for draws in bags]
    return Forest(trees, bag_ids)


# -- prediction --------------------------------------------------------------


def decision_path(tree, ctx, g):
    """Node ids from the root to the leaf that classifies object ``g``.

    Raises
    ------
    MissingValueAtNode
        ``g`` lacks the value tested below the reported node.
    """
    i = ctx.object_index(g)
    path = [tree.root]
    node = tree.nodes[tree.root]
    while node.children:
        a = tree.nodes[node.children[0]]
        p = a.annotation
        j = ctx.attribute_index(p.attribute)
        c = ctx.codes[i, j]
        if c == MISSING:
            raise MissingValueAtNode(node.id, g)
        t = ctx.domains[j].index(p.threshold)
        ok = c <= t if p.direction is LEQ else c >= t
        node = a if ok else tree.nodes[node.children[1]]
        path.append(node.id)
    return path


def leaf_assignment(tree, ctx, objects=None):
    """Leaf id per object (array aligned with ``objects``, default all of ``ctx``)."""
    idx = np.arange(len(ctx)) if objects is None else np.array([ctx.object_index(g) for g in objects], dtype=int)
    out = np.full(len(idx), -1, dtype=int)
    stack = [(tree.root, np.arange(len(idx)))]
    while stack:
        k, pos = stack.pop()
        node = tree.nodes[k]
        if not node.children:
            out[pos] = k
            continue
        if len(pos) == 0:
            continue
        a = tree.nodes[node.children[0]]
        holds, known = ctx.predicate_mask(a.annotation)
        rows = idx[pos]
        if not known[rows].all():
            bad = pos[~known[rows]][0]
            raise MissingValueAtNode(k, ctx.objects[idx[bad]])
        h = holds[rows]
        stack.append((a.id, pos[h]))
        stack.append((node.children[1], pos[~h]))
    return out


def node_incidence(tree, ctx, objects=None):
    """Boolean matrix objects x nodes marking each object's decision path."""
    leaves = leaf_assignment(tree, ctx, objects)
    out = np.zeros((len(leaves), len(tree)), dtype=bool)
    paths = {k: tree.path_to(k) for k in tree.leaves}
    for r, k in enumerate(leaves):
        out[r, paths[k]] = True
    return out


def predict(model, ctx):
    """Class labels for every object of ``ctx`` (tuple)."""
    trees = model.trees if isinstance(model, Forest) else (model,)
    votes = []
    for t in trees:
        leaf = leaf_assignment(t, ctx)
        votes.append([t.nodes[k].label for k in leaf])
    if len(votes) == 1:
        return tuple(votes[0])
    return tuple(majority(col) for col in zip(*votes))


def evaluate(model, ctx):
    """``{"accuracy": float, "per_object": {object: predicted label}}`` against ``ctx.labels``."""
    pred = predict(model, ctx)
    per_object = dict(zip(ctx.objects, pred))
    if len(ctx) == 0:
        return {"accuracy": 0.0, "per_object": per_object}
    acc = float(np.mean([p == t for p, t in zip(pred, ctx.labels)]))
    return {"accuracy": acc, "per_object": per_object}


def predicates_of(model):
    """All non-root annotations of a tree or of every tree in a forest."""
    trees = model.trees if isinstance(model, Forest) else (model,)
    return {n.annotation for t in trees for n in t.nodes if n.annotation is not None}


def generalization_error(acc_train, acc_test):
    """Training accuracy minus test accuracy."""
    return acc_train - acc_test


def permutation_importance(model, ctx, n_repeats=5, rng_seed=0):
    """Mean accuracy drop when one attribute's column is shuffled.

    Attributes are visited in context order and each permutation is drawn
    from a single PCG64 stream seeded with ``rng_seed``.
    """
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    base = evaluate(model, ctx)["accuracy"]
    scores = {}
    for j, m in enumerate(ctx.attributes):
        drops = []
        for _ in range(n_repeats):
            codes = ctx.codes.copy()
            codes[:, j] = codes[rng.permutation(len(ctx)), j]
            shuffled = type(ctx)(ctx.objects, ctx.domains, codes, ctx.labels)
            drops.append(base - evaluate(model, shuffled)["accuracy"])
        scores[m] = float(np.mean(drops)) if drops else 0.0
    return scores


def stratified_folds(labels, k, seed=0):
    """Assign each position a fold in ``range(k)`` keeping class ratios.

    Objects of each class (classes in sorted order) are shuffled with a
    PCG64 stream and dealt round robin; the dealing offset carries over
    between classes so fold sizes differ by at most one.
    """
    if k < 2:
        raise ValueError("need at least two folds")
    rng = np.random.Generator(np.random.PCG64(seed))
    labels = list(labels)
    fold = np.empty(len(labels), dtype=int)
    offset = 0
    for c in sorted(set(labels)):
        members = np.array([i for i, lab in enumerate(labels) if lab == c])
        members = members[rng.permutation(len(members))]
        fold[members] = (np.arange(len(members)) + offset) % k
        offset = (offset + len(members)) % k
    return fold


# -- JSON --------------------------------------------------------------------


def tree_to_dict(tree):
    nodes = []
    for n in tree.nodes:
        nodes.append(
            {
                "id": n.id,
                "parent": n.parent,
                "predicate": None if n.annotation is None else n.annotation.to_dict(),
                "label": n.label,
            }
        )
    doc = {"root": tree.root, "nodes": nodes}
    if tree.degenerate:
        doc["degenerate"] = True
    return doc


def tree_from_dict(doc):
    try:
        raw = sorted(doc["nodes"], key=lambda d: d["id"])
        kids = {d["id"]: [] for d in raw}
        for d in raw:
            if d["parent"] is not None:
                kids[d["parent"]].append(d["id"])
        nodes = [
            TreeNode(
                id=int(d["id"]),
                parent=d["parent"],
                annotation=None if d.get("predicate") is None else Predicate.from_dict(d["predicate"]),
                children=tuple(sorted(kids[d["id"]])),
                label=d.get("label"),
            )
            for d in raw
        ]
        return DecisionTree(nodes, int(doc["root"]), bool(doc.get("degenerate", False)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed tree document: {exc}") from exc


def forest_to_dict(forest):
    return {"trees": [tree_to_dict(t) for t in forest.trees], "bags": [list(b) for b in forest.bags]}


def forest_from_dict(doc):
    try:
        return Forest([tree_from_dict(t) for t in doc["trees"]], doc.get("bags", ()))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed forest document: {exc}") from exc


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _write_json(doc, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def save_tree(tree, path):
    _write_json(tree_to_dict(tree), path)


def load_tree(path):
    return tree_from_dict(_read_json(path))


def save_forest(forest, path):
    _write_json(forest_to_dict(forest), path)


def load_forest(path):
    """Load a forest document, or a single tree document as a one-tree forest."""
    doc = _read_json(path)
    if isinstance(doc, dict) and "nodes" in doc:
        return Forest([tree_from_dict(doc)])
    return forest_from_dict(doc)
