"""Bundled data: the tennis table with its fixture tree, and the car evaluation table."""

from importlib import resources

from .mvcontext import load_csv, load_domain_spec


def data_path(name):
    return resources.files("treefca") / "data" / name


def fixture_path(name):
    return resources.files("treefca") / "fixtures" / name


def load_tennis():
    """The 14-object tennis table; labels are the ``play`` column."""
    return load_csv(data_path("tennis.csv"), load_domain_spec(data_path("tennis_domains.json")))


def load_car():
    """UCI car evaluation (1728 objects), labels binarised to ``positive`` (unacc) / ``negative``."""
    return load_csv(data_path("car.csv"), load_domain_spec(data_path("car_domains.json")))


def tennis_tree():
    from .treemodel import load_tree

    return load_tree(fixture_path("tennis_tree.json"))
