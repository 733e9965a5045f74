"""Conceptual views of decision trees and random forests."""

__version__ = "0.1.0"
