"""Exception types raised across the package."""


class TreeFCAError(Exception):
    """Base class for all errors raised by treefca."""


class DomainViolation(TreeFCAError, ValueError):
    def __init__(self, row, column, token):
        self.row = row
        self.column = column
        self.token = token
        super().__init__(f"row {row}, column {column!r}: value {token!r} not in declared domain")


class DuplicateObject(TreeFCAError, ValueError):
    pass


class NoSuchObject(TreeFCAError, KeyError):
    pass


class UnknownAttribute(TreeFCAError, KeyError):
    pass


class IncompleteContext(TreeFCAError, ValueError):
    pass


class ScaleDomainViolation(TreeFCAError, ValueError):
    pass


class CapacityExceeded(TreeFCAError, ValueError):
    def __init__(self, measured, limit):
        self.measured = measured
        self.limit = limit
        super().__init__(f"context has {measured} attributes, limit is {limit}")


class NotClosed(TreeFCAError, ValueError):
    pass


class EmptyTraining(TreeFCAError, ValueError):
    pass


class MissingValueAtNode(TreeFCAError, ValueError):
    def __init__(self, node, obj=None):
        self.node = node
        self.obj = obj
        super().__init__(f"object {obj!r} has no value for the attribute tested at node {node}")


class MissingValue(TreeFCAError, ValueError):
    def __init__(self, attribute, obj=None):
        self.attribute = attribute
        self.obj = obj
        super().__init__(f"object {obj!r} has no value for attribute {attribute!r}")


class ParseError(TreeFCAError, ValueError):
    pass


class EmptyForest(TreeFCAError, ValueError):
    pass


class Unclassifiable(TreeFCAError, ValueError):
    pass


class TooManyClusters(TreeFCAError, ValueError):
    pass


class SilhouetteUndefined(TreeFCAError, ValueError):
    pass


class MissingLabel(TreeFCAError, ValueError):
    pass


class InvalidGrades(TreeFCAError, ValueError):
    pass


class NoSuchTarget(TreeFCAError, KeyError):
    pass
