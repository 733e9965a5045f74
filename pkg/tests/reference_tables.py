"""Cross tables of the tennis running example, transcribed column by column.

Each entry maps object id to the set of crossed column names.  Column
names use the package's readable predicate labels and ``n{id}`` node names.
"""

# interordinal scaling of the full table
SCALED_COLUMNS = [
    "overlook<=rainy", "overlook<=overcast", "overlook>=overcast", "overlook>=sunny",
    "temperature<=cool", "temperature<=mild", "temperature>=mild", "temperature>=hot",
    "humidity<=normal", "humidity>=high", "windy", "not windy",
]
SCALED_ROWS = """
0  ..xx ..xx .x .x
1  ..xx ..xx .x x.
2  .xx. ..xx .x .x
3  xx.. .xx. .x .x
4  xx.. xx.. x. .x
5  xx.. xx.. x. x.
6  .xx. xx.. x. x.
7  ..xx .xx. .x .x
8  ..xx xx.. x. .x
9  xx.. .xx. x. .x
10 ..xx .xx. x. x.
11 .xx. .xx. .x x.
12 .xx. ..xx x. .x
13 xx.. .xx. .x x.
"""

# leaf view, reference leaf names l0..l6
LEAF_ROWS = {
    "0": "l0", "1": "l0", "2": "l1", "3": "l2", "4": "l5", "5": "l6", "6": "l4",
    "7": "l0", "8": "l4", "9": "l5", "10": "l4", "11": "l1", "12": "l4", "13": "l3",
}
# reference leaf name -> node id of the fixture
LEAF_NODE = {"l0": 6, "l1": 10, "l2": 11, "l3": 12, "l4": 4, "l5": 7, "l6": 8}

# tree view without the root column; the reference table has no row for object 12
TREE_ROWS = {
    "0": {2, 6}, "1": {2, 6}, "2": {2, 5, 10}, "3": {2, 5, 9, 11}, "4": {1, 3, 7},
    "5": {1, 3, 8}, "6": {1, 4}, "7": {2, 6}, "8": {1, 4}, "9": {1, 3, 7},
    "10": {1, 4}, "11": {2, 5, 10}, "13": {2, 5, 9, 12},
}

PRED_COLUMNS = [
    "humidity<=normal", "overlook<=overcast", "overlook<=rainy", "windy",
    "humidity>=high", "overlook>=sunny", "overlook>=overcast", "not windy",
]
TREE_PREDICATE_ROWS = """
0  ....xx..
1  ....xx..
2  .x..x.x.
3  .xx.x..x
4  x.x....x
5  x.xx....
6  x.....x.
7  ....xx..
8  x.....x.
9  x.x....x
10 x.....x.
11 .x..x.x.
12 x.....x.
13 .xxxx...
"""
INTERORDINAL_PREDICATE_ROWS = """
0  ....xxxx
1  ...xxxx.
2  .x..x.xx
3  .xx.x..x
4  xxx....x
5  xxxx....
6  xx.x..x.
7  ....xxxx
8  x....xxx
9  xxx....x
10 x..x.xx.
11 .x.xx.x.
12 xx....xx
13 .xxxx...
"""


def parse_rows(text, columns):
    out = {}
    for line in text.strip().splitlines():
        g, *cells = line.split()
        marks = "".join(cells)
        assert len(marks) == len(columns)
        out[g] = {c for c, m in zip(columns, marks) if m == "x"}
    return out
