"""Densities sampled at host nodes, and their CSV forms.

A ``SampledDensity`` is complex values aligned one-to-one with the nodes of
a ``ClosedContour`` or ``ArcSystem``.  All operators in this package consume
and produce node-aligned samples.

Two CSV layouts are used: the density interchange table (index, re_f, im_f),
and the full solution table (index, s, re_z, im_z, re_f, im_f) written by
the command-line tool.  Both carry 17 significant digits so that round trips
are bit-exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError

__all__ = [
    "SampledDensity",
    "write_density_csv",
    "read_density_csv",
    "write_solution_csv",
    "read_solution_csv",
]

_DENSITY_HEADER = ["index", "re_f", "im_f"]
_SOLUTION_HEADER = ["index", "s", "re_z", "im_z", "re_f", "im_f"]


@dataclass
class SampledDensity:
    """Complex samples f(t_k) at the nodes of a host curve."""

    host: object
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size != self.host.n_nodes:
            raise AlignmentError(
                f"expected {self.host.n_nodes} samples, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise AlignmentError("samples must be finite")
        self.values = vals

    @classmethod
    def from_function(cls, host, f):
        return cls(host, np.asarray(f(host.nodes), dtype=complex))

    def arc_values(self, k):
        """Slice of the samples living on arc k of an arc-system host."""
        off = self.host.arc_offsets
        return self.values[off[k]:off[k + 1]]

    def __add__(self, other):
        return SampledDensity(self.host, self.values + other.values)

    def __sub__(self, other):
        return SampledDensity(self.host, self.values - other.values)

    def __mul__(self, c):
        return SampledDensity(self.host, self.values * c)

    __rmul__ = __mul__

    def to_csv(self, path):
        write_density_csv(path, self.values)

    @classmethod
    def from_csv(cls, path, host):
        return cls(host, read_density_csv(path, expect=host.n_nodes))


def write_density_csv(path, values):
    """Density interchange table: index, re_f, im_f."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_DENSITY_HEADER)
        for k, v in enumerate(values):
            w.writerow([k, f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_density_csv(path, expect=None):
    idx, vals = [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if [h.strip() for h in header] != _DENSITY_HEADER:
            raise AlignmentError(f"unexpected density header {header!r}")
        for row in r:
            idx.append(int(row[0]))
            vals.append(complex(float(row[1]), float(row[2])))
    if idx != list(range(len(idx))):
        raise AlignmentError("density rows are not a contiguous index range")
    if expect is not None and len(vals) != expect:
        raise AlignmentError(f"host has {expect} nodes but file has {len(vals)} rows")
    return np.array(vals, dtype=complex)


def write_solution_csv(path, host, values):
    """Full node table plus samples: index, s, re_z, im_z, re_f, im_f."""
    nodes = host.nodes
    s = host.arclength
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_SOLUTION_HEADER)
        for k in range(nodes.size):
            w.writerow([
                k, f"{s[k]:.17g}",
                f"{nodes[k].real:.17g}", f"{nodes[k].imag:.17g}",
                f"{values[k].real:.17g}", f"{values[k].imag:.17g}",
            ])


def read_solution_csv(path, host=None):
    """Read samples from a solution table, checking node alignment if a host
    is supplied (positions must match to ~1e-12 of the host diameter)."""
    idx, zs, fs = [], [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if [h.strip() for h in header] != _SOLUTION_HEADER:
            raise AlignmentError(f"unexpected solution header {header!r}")
        for row in r:
            idx.append(int(row[0]))
            zs.append(complex(float(row[2]), float(row[3])))
            fs.append(complex(float(row[4]), float(row[5])))
    if idx != list(range(len(idx))):
        raise AlignmentError("solution rows are not a contiguous index range")
    zs = np.array(zs)
    fs = np.array(fs)
    if host is not None:
        if zs.size != host.n_nodes:
            raise AlignmentError(
                f"host has {host.n_nodes} nodes but file has {zs.size} rows"
            )
        tol = 1e-12 * max(host.diameter(), 1.0)
        err = np.max(np.abs(zs - host.nodes))
        if err > tol:
            raise AlignmentError(
                f"sample positions deviate from host nodes by {err:.3g}"
            )
    return fs
