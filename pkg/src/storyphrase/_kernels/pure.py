"""Pure-Python counting kernels (fallback for the compiled extension)."""


def window_counts(items, order):
    """Count every contiguous window of `order` items. Returns {tuple: count}."""
    counts = {}
    for i in range(len(items) - order + 1):
        key = tuple(items[i : i + order])
        counts[key] = counts.get(key, 0) + 1
    return counts


def window_groups(keys, values, order):
    """Group windows of `values` by the parallel window of `keys`.

    Returns {key-window tuple: set of value-window tuples}.  `keys` and
    `values` must have equal length.
    """
    if len(keys) != len(values):
        raise ValueError("keys and values must be parallel sequences")
    groups = {}
    for i in range(len(keys) - order + 1):
        k = tuple(keys[i : i + order])
        v = tuple(values[i : i + order])
        bucket = groups.get(k)
        if bucket is None:
            groups[k] = {v}
        else:
            bucket.add(v)
    return groups
