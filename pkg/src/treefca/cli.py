"""Command-line interface: ``treefca <verb> CONFIG [options]``.

Every verb reads one JSON configuration document.  Relative paths inside
it are resolved against the document's directory; ``builtin:tennis`` and
``builtin:car`` name the bundled datasets.  A minimal document::

    {"data": "builtin:tennis",
     "train": {"n_trees": 1, "max_depth": 4},
     "view": "tree_predicate",
     "output": {"lattice": "lattice.json", "dot": "lattice.dot"}}
"""

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import datasets
from .errors import NoSuchTarget, TreeFCAError
from .fclattice import (
    count_concepts,
    enumerate_concepts,
    iceberg,
    leaf_coverage,
    load_context,
    local_view,
    minimal_generators,
    save_context,
)
from .fclattice.bits import from_bits
from .fclattice.export import lattice_to_dict, to_dot
from .mvcontext import (
    Predicate,
    interordinal_scale_context,
    load_csv,
    load_domain_spec,
    nominal_scale,
    plain_scale,
)
from .reduce import ReductionPlan, apply_plan
from .treemodel import (
    TrainConfig,
    evaluate,
    generalization_error,
    leaf_assignment,
    load_forest,
    permutation_importance,
    save_forest,
    stratified_folds,
    train_forest,
    worker_count,
)
from .views import ViewKind, forest_view, leaf_intents, node_name

REPORT_COLUMNS = [
    "nt",
    "md",
    "seed",
    "fold",
    "acc_train",
    "acc_test",
    "gen_error",
    "n_concepts_leaf",
    "n_concepts_tree",
    "n_concepts_treepred",
    "n_concepts_interpred",
]


@dataclass
class RunConfig:
    base: Path
    data: str
    domains: str = None
    label_column: str = None
    train: TrainConfig = field(default_factory=TrainConfig)
    model: str = None
    view: ViewKind = ViewKind.TREE_PREDICATE
    scaling: str = "interordinal"
    plan: ReductionPlan = field(default_factory=ReductionPlan)
    importance: dict = field(default_factory=dict)
    positive_label: str = None
    output: dict = field(default_factory=dict)
    cv_folds: int = 4
    grid: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls.from_dict(doc, path.parent)

    @classmethod
    def from_dict(cls, doc, base="."):
        cfg = cls(
            base=Path(base),
            data=doc["data"],
            domains=doc.get("domains"),
            label_column=doc.get("label_column"),
            train=TrainConfig.from_dict(doc.get("train", {})),
            model=doc.get("model"),
            view=ViewKind(doc.get("view", "tree_predicate")),
            scaling=doc.get("scaling", "interordinal"),
            plan=ReductionPlan.from_dict(doc.get("plan")),
            importance=doc.get("importance", {}),
            positive_label=doc.get("positive_label"),
            output=doc.get("output", {}),
            cv_folds=int(doc.get("cv_folds", 4)),
            grid=doc.get("grid", {}),
        )
        if cfg.cv_folds < 2:
            raise ValueError("cv_folds must be at least 2")
        return cfg

    def path(self, p):
        return None if p is None else self.base / p

    def out(self, key):
        p = self.output.get(key)
        return None if p is None else self.path(p)

    def load_data(self):
        if self.data.startswith("builtin:"):
            name = self.data.split(":", 1)[1]
            loaders = {"tennis": datasets.load_tennis, "car": datasets.load_car}
            if name not in loaders:
                raise ValueError(f"unknown builtin dataset {name!r}")
            return loaders[name]()
        if self.domains is None:
            raise ValueError("a 'domains' file is required for CSV data")
        spec = load_domain_spec(self.path(self.domains))
        return load_csv(self.path(self.data), spec, self.label_column)


# -- helpers -----------------------------------------------------------------


def _write_json(doc, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=False)
        fh.write("\n")


def _write_text(text, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _suffixed(path, part):
    return path if part is None else path.with_name(f"{path.stem}.{part}{path.suffix}")


def _model(cfg, ctx):
    if cfg.model is not None and cfg.path(cfg.model).exists():
        return load_forest(cfg.path(cfg.model))
    return train_forest(ctx, cfg.train)


def _lattice(context, min_support):
    if min_support:
        return iceberg(context, int(min_support))
    return enumerate_concepts(context)


def _label(a):
    return a.label if isinstance(a, Predicate) else str(a)


# -- verbs ---------------------------------------------------------------------


def cmd_scale(cfg, count=False, out=print):
    """Scale the many-valued data into a formal context and write it as JSON."""
    ctx = cfg.load_data()
    if cfg.scaling == "interordinal":
        fctx = interordinal_scale_context(ctx)
    elif cfg.scaling == "nominal":
        fctx = plain_scale(ctx, {d.name: nominal_scale(d) for d in ctx.domains})
    else:
        raise ValueError(f"unknown scaling {cfg.scaling!r}")
    fctx = type(fctx).from_bitrows(fctx.objects, [str(a) for a in fctx.attributes], fctx.rows)
    target = cfg.out("context")
    if target is not None:
        target.parent.mkdir(parents=True, exist_ok=True)
        save_context(fctx, target)
    out(f"objects: {fctx.n_objects}")
    out(f"attributes: {fctx.n_attributes}")
    if count:
        out(f"concepts: {count_concepts(fctx)}")
    return fctx


def cmd_train(cfg, out=print):
    ctx = cfg.load_data()
    forest = train_forest(ctx, cfg.train)
    target = cfg.out("model") or cfg.path(cfg.model)
    if target is not None:
        target.parent.mkdir(parents=True, exist_ok=True)
        save_forest(forest, target)
    out(f"trees: {len(forest)}")
    out(f"nodes: {sum(len(t) for t in forest.trees)}")
    out(f"training accuracy: {evaluate(forest, ctx)['accuracy']:.4f}")
    return forest


def cmd_views(cfg, out=print):
    """Build the configured view, apply the reduction plan, write lattice JSON and DOT per part."""
    ctx = cfg.load_data()
    forest = _model(cfg, ctx)
    view = forest_view(ctx, None, forest, cfg.view)
    importance = None
    if cfg.plan.attribute_selector and cfg.plan.attribute_selector[0] == "top_k":
        importance = permutation_importance(
            forest, ctx, cfg.importance.get("n_repeats", 5), cfg.importance.get("rng_seed", 0)
        )
    parts = apply_plan(view, ctx, cfg.plan, importance)
    labels = dict(zip(ctx.objects, ctx.labels or ()))
    positive = cfg.positive_label or (sorted(set(ctx.labels))[-1] if ctx.labels else None)
    results = {}
    for name, part in parts.items():
        lat = _lattice(part.context, cfg.plan.min_support)
        results[name] = lat
        suffix = None if len(parts) == 1 else name
        if cfg.out("lattice") is not None:
            _write_json(lattice_to_dict(lat), _suffixed(cfg.out("lattice"), suffix))
        if cfg.out("dot") is not None:
            row_labels = [labels.get(g) for g in part.objects] if labels else None
            dot = to_dot(lat, labels=row_labels, positive=positive, name=f"{cfg.view.value}:{name}")
            _write_text(dot, _suffixed(cfg.out("dot"), suffix))
        out(f"{name}: objects {len(part.objects)}, attributes {len(part.attributes)}, concepts {len(lat)}")
    return parts, results


def _leaf_lookup(view):
    out = {}
    for i, t in enumerate(view.trees):
        for k in t.leaves:
            out[node_name(k, None if len(view.trees) == 1 else i)] = (i, k)
    return out


def _names(ctx, bits):
    return [_label(ctx.attributes[a]) for a in from_bits(bits)]


def explain(cfg, target, kind="auto"):
    """Explanation report (a dict) for a leaf, an object, the top concept, a leaf set or a predicate pair.

    ``target`` is a leaf name (``n12``, ``t0.n12``), an object id, ``top``,
    a list of leaf names (joined) or a pair of predicate strings.

    Raises
    ------
    NoSuchTarget
    """
    ctx = cfg.load_data()
    forest = _model(cfg, ctx)
    kind_ = cfg.view if cfg.view.is_predicate else ViewKind.TREE_PREDICATE
    view = forest_view(ctx, None, forest, kind_)
    fctx = view.context
    intents = leaf_intents(view)
    leaves = _leaf_lookup(view)
    col = {str(p): a for a, p in enumerate(fctx.attributes)}

    def leaf_report(name):
        i, k = leaves[name]
        b = intents[(i, k)]
        gens = sorted(sorted(_label(fctx.attributes[a]) for a in g) for g in minimal_generators(fctx, from_bits(b)))
        leaf_sets = [[fctx.attributes[a] for a in from_bits(x)] for x in intents.values()]
        coverage = {_label(fctx.attributes[a]): leaf_coverage(fctx, fctx.attributes[a], leaf_sets) for a in from_bits(b)}
        return {
            "leaf": name,
            "label": view.trees[i].nodes[k].label,
            "support": fctx.extent_bits(b).bit_count(),
            "relative_support": fctx.extent_bits(b).bit_count() / max(fctx.n_objects, 1),
            "intent": _names(fctx, b),
            "minimal_generators": gens,
            "coverage": coverage,
        }

    if isinstance(target, (list, tuple)) and kind == "predicates":
        p, q = target
        if p not in col or q not in col:
            raise NoSuchTarget(f"unknown predicate in {target}")
        pa, qa = fctx.cols[col[p]], fctx.cols[col[q]]
        return {
            "predicates": [p, q],
            "dominated": {f"{p} <= {q}": pa & qa == pa, f"{q} <= {p}": pa & qa == qa},
        }
    if isinstance(target, (list, tuple)):
        missing = [t for t in target if t not in leaves]
        if missing:
            raise NoSuchTarget(f"unknown leaves {missing}")
        shared = -1
        for t in target:
            shared &= intents[leaves[t]]
        shared &= (1 << fctx.n_attributes) - 1
        closed = fctx.intent_bits(fctx.extent_bits(shared))
        n = fctx.extent_bits(closed).bit_count()
        return {
            "leaves": list(target),
            "join_intent": _names(fctx, closed),
            "support": n,
            "relative_support": n / max(fctx.n_objects, 1),
        }
    if target == "top":
        b = fctx.intent_bits((1 << fctx.n_objects) - 1)
        gens = sorted(sorted(_label(fctx.attributes[a]) for a in g) for g in minimal_generators(fctx, from_bits(b)))
        return {"concept": "top", "intent": _names(fctx, b), "minimal_generators": gens}
    if target in leaves:
        return leaf_report(target)
    if target in ctx.objects:
        lat = enumerate_concepts(fctx)
        filt = local_view(lat, target)
        reached = []
        for i, t in enumerate(view.trees):
            k = int(leaf_assignment(t, ctx, [target])[0])
            reached.append(node_name(k, None if len(view.trees) == 1 else i))
        return {
            "object": target,
            "label": ctx.label(target),
            "leaves": reached,
            "local_view": sorted(
                (sorted(_label(fctx.attributes[a]) for a in c.intent) for c in filt), key=lambda x: (len(x), x)
            ),
            "alternative_descriptions": {name: leaf_report(name)["minimal_generators"] for name in reached},
        }
    raise NoSuchTarget(f"{target!r} is neither a leaf, an object nor 'top'")


def _cell(args):
    ctx, nt, md, seed, cell_seed, folds = args
    config = TrainConfig(n_trees=nt, max_depth=md, rng_seed=cell_seed)
    full = train_forest(ctx, config)
    counts = [count_concepts(forest_view(ctx, None, full, k).context) for k in ViewKind]
    # folds depend on the run seed only, so cells with the same seed share splits
    assign = stratified_folds(ctx.labels, folds, seed)
    rows = []
    for f in range(folds):
        train_idx = np.flatnonzero(assign != f)
        test_idx = np.flatnonzero(assign == f)
        train, test = ctx.take(train_idx), ctx.take(test_idx)
        model = train_forest(train, config)
        acc_train = evaluate(model, train)["accuracy"]
        acc_test = evaluate(model, test)["accuracy"]
        rows.append([nt, md, seed, f, acc_train, acc_test, generalization_error(acc_train, acc_test), *counts])
    return rows


def run_experiment(ctx, nts, mds, seeds, folds=4, workers=None):
    """Parameter study: per (nt, md, seed) cell, k-fold accuracies and full-data concept counts.

    Each cell trains with seed ``seed XOR cell index`` (cells numbered over
    the (nt, md) grid).  Returns report rows sorted by (nt, md, seed, fold).
    """
    jobs = []
    for c, (nt, md) in enumerate((nt, md) for nt in nts for md in mds):
        for seed in seeds:
            jobs.append((ctx, nt, md, seed, seed ^ c, folds))
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(workers, len(jobs))) as pool:
            chunks = list(pool.map(_cell, jobs))
    else:
        chunks = [_cell(j) for j in jobs]
    rows = [r for ch in chunks for r in ch]
    rows.sort(key=lambda r: tuple(r[:4]))
    return rows


def write_report(rows, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in rows:
            w.writerow([f"{x:.6f}" if isinstance(x, float) else x for x in r])


def cmd_experiment(cfg, out=print):
    ctx = cfg.load_data()
    g = cfg.grid
    nts = g.get("nt", [cfg.train.n_trees])
    mds = g.get("md", [cfg.train.max_depth])
    seeds = g.get("seeds", [cfg.train.rng_seed])
    folds = int(g.get("folds", cfg.cv_folds))
    rows = run_experiment(ctx, nts, mds, seeds, folds)
    target = cfg.out("report")
    if target is not None:
        write_report(rows, target)
    out(f"rows: {len(rows)}")
    return rows


def cmd_export(context_path, lattice_path=None, dot_path=None, min_support=None, out=print):
    """Enumerate the lattice of a context JSON file and export it."""
    fctx = load_context(context_path)
    lat = _lattice(fctx, min_support)
    if lattice_path:
        _write_json(lattice_to_dict(lat), Path(lattice_path))
    if dot_path:
        _write_text(to_dot(lat), Path(dot_path))
    out(f"concepts: {len(lat)}")
    return lat


# -- entry point ---------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="treefca", description="Conceptual views of decision trees and forests.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("scale", help="scale the data into a formal context")
    s.add_argument("config")
    s.add_argument("--count", action="store_true", help="print the number of concepts")

    s = sub.add_parser("train", help="train a tree or forest and save it")
    s.add_argument("config")

    s = sub.add_parser("views", help="build a view, reduce it and export its lattice")
    s.add_argument("config")

    s = sub.add_parser("explain", help="explain a leaf, an object, a leaf set or a predicate pair")
    s.add_argument("config")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--target", help="leaf name (n12, t0.n12), object id, or 'top'")
    g.add_argument("--leaves", nargs="+", help="leaf names whose join to report")
    g.add_argument("--predicates", nargs=2, metavar=("P", "Q"), help="predicates as attr:<=:value")

    s = sub.add_parser("experiment", help="run the parameter study and write a CSV report")
    s.add_argument("config")

    s = sub.add_parser("export", help="export the lattice of a context JSON file")
    s.add_argument("context")
    s.add_argument("--lattice")
    s.add_argument("--dot")
    s.add_argument("--min-support", type=int)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "export":
            cmd_export(args.context, args.lattice, args.dot, args.min_support)
            return 0
        cfg = RunConfig.load(args.config)
        if args.verb == "scale":
            cmd_scale(cfg, count=args.count)
        elif args.verb == "train":
            cmd_train(cfg)
        elif args.verb == "views":
            cmd_views(cfg)
        elif args.verb == "experiment":
            cmd_experiment(cfg)
        elif args.verb == "explain":
            if args.predicates:
                report = explain(cfg, args.predicates, kind="predicates")
            elif args.leaves:
                report = explain(cfg, args.leaves)
            else:
                report = explain(cfg, args.target)
            text = json.dumps(report, indent=1)
            target = cfg.out("explanation")
            if target is not None:
                _write_text(text + "\n", target)
            print(text)
    except (TreeFCAError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"treefca: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
