# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled counting kernels: tuple-window counting over Python sequences.

Same contract as storyphrase._kernels.pure; the win comes from doing the
window-tuple construction and dict bookkeeping without bytecode dispatch.
"""

from cpython.list cimport PyList_GET_ITEM, PyList_GET_SIZE
from cpython.tuple cimport PyTuple_New, PyTuple_SET_ITEM
from cpython.ref cimport Py_INCREF


cdef inline tuple _window(list items, Py_ssize_t start, Py_ssize_t order):
    cdef tuple key = PyTuple_New(order)
    cdef Py_ssize_t j
    cdef object o
    for j in range(order):
        o = <object>PyList_GET_ITEM(items, start + j)
        Py_INCREF(o)
        PyTuple_SET_ITEM(key, j, o)
    return key


def window_counts(items, order):
    """Count every contiguous window of `order` items. Returns {tuple: count}."""
    cdef list seq = items if type(items) is list else list(items)
    cdef Py_ssize_t n = PyList_GET_SIZE(seq)
    cdef Py_ssize_t w = order
    cdef Py_ssize_t i
    cdef dict counts = {}
    cdef tuple key
    cdef object prev
    for i in range(n - w + 1):
        key = _window(seq, i, w)
        prev = counts.get(key)
        if prev is None:
            counts[key] = 1
        else:
            counts[key] = <object>(prev + 1)
    return counts


def window_groups(keys, values, order):
    """Group windows of `values` by the parallel window of `keys`."""
    cdef list kseq = keys if type(keys) is list else list(keys)
    cdef list vseq = values if type(values) is list else list(values)
    if PyList_GET_SIZE(kseq) != PyList_GET_SIZE(vseq):
        raise ValueError("keys and values must be parallel sequences")
    cdef Py_ssize_t n = PyList_GET_SIZE(kseq)
    cdef Py_ssize_t w = order
    cdef Py_ssize_t i
    cdef dict groups = {}
    cdef tuple k, v
    cdef object bucket
    for i in range(n - w + 1):
        k = _window(kseq, i, w)
        v = _window(vseq, i, w)
        bucket = groups.get(k)
        if bucket is None:
            groups[k] = {v}
        else:
            (<set>bucket).add(v)
    return groups
