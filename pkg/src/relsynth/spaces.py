"""Bit-vector encodings of continuous intervals and discrete value sets.

A continuous dimension `[lo, hi)` with `b` bits is split into `2**b`
half-open cells of equal width, indexed msb-first by their bit codes.  A
discrete dimension enumerates its values in order.  Periodic dimensions
wrap: the cell partition always has a power-of-two bin count, so
wrap-around lands on cell boundaries.

Conventions used throughout the package:

- cells are half-open `[c, c + w)`; a point on a boundary belongs to the
  cell on its right, and the top endpoint of a non-periodic domain
  belongs to the last cell;
- `inner` set encodings keep the cells entirely inside an interval,
  `outer` encodings keep every cell the interval meets.
"""

import math
from dataclasses import dataclass

from relsynth.bdd import BDD, BddError
from relsynth.interfaces import Interface


def _ifloor(t, eps=1e-9):
    r = round(t)
    if abs(t - r) <= eps * max(1.0, abs(t)):
        return int(r)
    return math.floor(t)


def _iceil(t, eps=1e-9):
    r = round(t)
    if abs(t - r) <= eps * max(1.0, abs(t)):
        return int(r)
    return math.ceil(t)


@dataclass(frozen=True)
class Dimension:
    """One coordinate of a space, continuous or discrete."""

    name: str
    bits: int
    lo: float = None
    hi: float = None
    periodic: bool = False
    values: tuple = None

    def __post_init__(self):
        if self.bits < 0:
            raise BddError("bits must be nonnegative")
        if self.values is None:
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise BddError(
                    "continuous dimension %r needs lo < hi" % self.name)
        else:
            if self.periodic:
                raise BddError("discrete dimensions cannot be periodic")
            if len(set(self.values)) != len(self.values):
                raise BddError("discrete values must be distinct")
            if not 1 <= len(self.values) <= (1 << self.bits):
                raise BddError(
                    "%d values do not fit in %d bits"
                    % (len(self.values), self.bits))

    @classmethod
    def continuous(cls, name, lo, hi, bits, periodic=False):
        return cls(name, bits, float(lo), float(hi), periodic)

    @classmethod
    def discrete(cls, name, values, bits=None):
        values = tuple(values)
        if bits is None:
            bits = max(1, math.ceil(math.log2(len(values)))) if len(values) > 1 else 0
        return cls(name, bits, values=values)

    @property
    def is_discrete(self):
        return self.values is not None

    @property
    def cells(self):
        """Number of valid cell indices."""
        if self.is_discrete:
            return len(self.values)
        return 1 << self.bits

    @property
    def width(self):
        if self.is_discrete:
            raise BddError("discrete dimensions have no cell width")
        return (self.hi - self.lo) / (1 << self.bits)

    @property
    def period(self):
        return self.hi - self.lo


def cell_box(dim, idx):
    """Closed lower / open upper bounds of cell `idx` of a continuous dim."""
    if dim.is_discrete:
        raise BddError("cell_box needs a continuous dimension")
    if not 0 <= idx < dim.cells:
        raise BddError("cell index %d out of range" % idx)
    w = dim.width
    return (dim.lo + idx * w, dim.lo + (idx + 1) * w)


def point_cell(dim, x):
    """Cell index containing point `x` (half-open cells)."""
    if dim.is_discrete:
        for i, v in enumerate(dim.values):
            if abs(x - v) <= 1e-9 * max(1.0, abs(v)):
                return i
        raise BddError("%r is not a value of %s" % (x, dim.name))
    if dim.periodic:
        x = dim.lo + (x - dim.lo) % dim.period
    elif not dim.lo <= x <= dim.hi:
        raise BddError("point %r outside [%r, %r]" % (x, dim.lo, dim.hi))
    return min(int((x - dim.lo) / dim.width), dim.cells - 1)


def value_cell(dim, v):
    """Index of an exact discrete value."""
    if not dim.is_discrete:
        raise BddError("value_cell needs a discrete dimension")
    return point_cell(dim, v)


def encode_cell(m, dim, idx, bit_vars):
    """Minterm of cell `idx` over `bit_vars` (msb first)."""
    if not 0 <= idx < dim.cells:
        raise BddError("cell index %d out of range for %s" % (idx, dim.name))
    if len(bit_vars) != dim.bits:
        raise BddError("%s needs %d bit variables, got %d"
                       % (dim.name, dim.bits, len(bit_vars)))
    b = dim.bits
    return m.cube({v: bool((idx >> (b - 1 - k)) & 1)
                   for k, v in enumerate(bit_vars)})


def _code_geq(m, bit_vars, k):
    """Predicate `code >= k` over msb-first bit variables."""
    if k <= 0:
        return m.true
    if k >= (1 << len(bit_vars)):
        return m.false
    v = m.var(bit_vars[0])
    half = 1 << (len(bit_vars) - 1)
    if k >= half:
        return m.apply("and", v, _code_geq(m, bit_vars[1:], k - half))
    return m.apply("or", v, _code_geq(m, bit_vars[1:], k))


def _code_leq(m, bit_vars, k):
    """Predicate `code <= k` over msb-first bit variables."""
    if k < 0:
        return m.false
    if k >= (1 << len(bit_vars)) - 1:
        return m.true
    v = m.var(bit_vars[0])
    half = 1 << (len(bit_vars) - 1)
    if k < half:
        return m.apply("and", m.apply("not", v), _code_leq(m, bit_vars[1:], k))
    return m.apply("or", m.apply("not", v),
                   _code_leq(m, bit_vars[1:], k - half))


def code_range(m, bit_vars, a, b):
    """Predicate `a <= code <= b` over msb-first bit variables."""
    if a > b:
        return m.false
    return m.apply("and", _code_geq(m, bit_vars, a), _code_leq(m, bit_vars, b))


def encode_set(m, dim, interval, bit_vars, mode="inner"):
    """Cells of `dim` covered by (`inner`) or touching (`outer`) `interval`.

    The interval is closed.  On periodic dimensions `a > b` wraps around
    the seam; on plain ones it is an error, as are endpoints outside the
    domain.  A degenerate interval has no inner cells but still has an
    outer cell.
    """
    if mode not in ("inner", "outer"):
        raise BddError("mode must be 'inner' or 'outer'")
    a, b = interval
    if dim.is_discrete:
        f = m.false
        for i, v in enumerate(dim.values):
            if a <= v <= b:
                f = m.apply("or", f, encode_cell(m, dim, i, bit_vars))
        return f
    if math.isnan(a) or math.isnan(b):
        raise BddError("interval endpoint is NaN")
    if dim.periodic:
        lo, period = dim.lo, dim.period
        if b - a >= period:
            return m.true
        a = lo + (a - lo) % period
        b = lo + (b - lo) % period
        if a > b:
            # interval crosses the seam; bins align with it, so no cell does
            w = dim.width
            ta = (a - lo) / w
            tb = (b - lo) / w
            if mode == "inner":
                upper = code_range(m, bit_vars, _iceil(ta), dim.cells - 1)
                lower = code_range(m, bit_vars, 0, _ifloor(tb) - 1)
            else:
                upper = code_range(m, bit_vars, _ifloor(ta), dim.cells - 1)
                lower = code_range(m, bit_vars, 0,
                                   min(_ifloor(tb), dim.cells - 1))
            return m.apply("or", upper, lower)
    else:
        if a > b:
            raise BddError("interval %r is inverted" % ((a, b),))
        if a < dim.lo - 1e-9 or b > dim.hi + 1e-9:
            raise BddError("interval %r outside the domain" % ((a, b),))
    w = dim.width
    ta = (a - dim.lo) / w
    tb = (b - dim.lo) / w
    if mode == "inner":
        i_lo = _iceil(ta)
        i_hi = _ifloor(tb) - 1
    else:
        i_lo = _ifloor(ta)
        i_hi = _ifloor(tb)
    i_lo = max(i_lo, 0)
    i_hi = min(i_hi, dim.cells - 1)
    return code_range(m, bit_vars, i_lo, i_hi)


def discrete_domain_predicate(m, dim, bit_vars):
    """Codes that name actual values of a discrete dimension."""
    if not dim.is_discrete:
        raise BddError("domain predicate needs a discrete dimension")
    return _code_leq(m, bit_vars, len(dim.values) - 1)


def quantizer(m, fine_vars, coarse_vars, keep, input_side="coarse"):
    """Interface tying the top `keep` bits of two equal-width vectors.

    The predicate is `AND_k<keep (fine_k == coarse_k)`; the remaining
    bits float free, so with `keep == 0` the quantizer is the all-true
    interface and with `keep == len(fine_vars)` it is the identity.
    `input_side` picks which vector is the input ('coarse' or 'fine').
    """
    if len(fine_vars) != len(coarse_vars):
        raise BddError("quantizer vectors must have equal width")
    if not 0 <= keep <= len(fine_vars):
        raise BddError("keep=%d out of range" % keep)
    pred = m.true
    for k in range(keep - 1, -1, -1):
        eq = m.apply("not",
                     m.apply("xor", m.var(fine_vars[k]),
                             m.var(coarse_vars[k])))
        pred = m.apply("and", eq, pred)
    if input_side == "coarse":
        return Interface(m, coarse_vars, fine_vars, pred)
    if input_side == "fine":
        return Interface(m, fine_vars, coarse_vars, pred)
    raise BddError("input_side must be 'coarse' or 'fine'")


class Encoding:
    """Variable layout for a control system over one manager.

    Each state dimension owns an interleaved block: current bit k sits
    right above next-state bit k (`px_0, px+_0, px_1, px+_1, ...`), so
    transition relations and current/next renaming stay small.  Control
    dimension bits come after every state block.  The layout, and hence
    the manager's variable order, is fixed by the dimension lists.
    """

    def __init__(self, state_dims, control_dims=(), cap=None):
        self.state_dims = list(state_dims)
        self.control_dims = list(control_dims)
        self.dims = {}
        order = []
        self._state_vars = {}
        self._next_vars = {}
        self._control_vars = {}
        for d in self.state_dims:
            if d.name in self.dims:
                raise BddError("duplicate dimension name %r" % d.name)
            self.dims[d.name] = d
            cur, nxt = [], []
            for k in range(d.bits):
                cur.append("%s_%d" % (d.name, k))
                nxt.append("%s+_%d" % (d.name, k))
                order.append(cur[-1])
                order.append(nxt[-1])
            self._state_vars[d.name] = cur
            self._next_vars[d.name] = nxt
        for d in self.control_dims:
            if d.name in self.dims:
                raise BddError("duplicate dimension name %r" % d.name)
            self.dims[d.name] = d
            vs = ["%s_%d" % (d.name, k) for k in range(d.bits)]
            self._control_vars[d.name] = vs
            order.extend(vs)
        self.m = BDD(order, cap=cap)
        self.prime_map = {}
        for d in self.state_dims:
            for c, n in zip(self._state_vars[d.name], self._next_vars[d.name]):
                self.prime_map[c] = n
        self.unprime_map = {n: c for c, n in self.prime_map.items()}
        self._u_domain = None
        self._state_domain = None

    def state_vars(self, name):
        return list(self._state_vars[name])

    def next_vars(self, name):
        return list(self._next_vars[name])

    def control_vars(self, name):
        return list(self._control_vars[name])

    @property
    def all_state_vars(self):
        return [v for d in self.state_dims for v in self._state_vars[d.name]]

    @property
    def all_next_vars(self):
        return [v for d in self.state_dims for v in self._next_vars[d.name]]

    @property
    def all_control_vars(self):
        return [v for d in self.control_dims
                for v in self._control_vars[d.name]]

    def control_domain(self):
        """Codes naming actual control values (discrete dims constrain)."""
        if self._u_domain is None:
            f = self.m.true
            for d in self.control_dims:
                if d.is_discrete:
                    f = self.m.apply("and", f, discrete_domain_predicate(
                        self.m, d, self._control_vars[d.name]))
            self._u_domain = self.m.protect(f)
        return self._u_domain

    def state_domain(self):
        """Codes naming actual state cells (discrete dims constrain)."""
        if self._state_domain is None:
            f = self.m.true
            for d in self.state_dims:
                if d.is_discrete:
                    f = self.m.apply("and", f, discrete_domain_predicate(
                        self.m, d, self._state_vars[d.name]))
            self._state_domain = self.m.protect(f)
        return self._state_domain

    def state_box(self, box, mode="inner", role="state"):
        """Conjunction of per-dimension set encodings over state bits.

        `box` maps dimension names to closed intervals; missing
        dimensions are unconstrained.  `role` is 'state' or 'next'.
        """
        vars_of = self._state_vars if role == "state" else self._next_vars
        f = self.m.true
        for name, iv in box.items():
            d = self.dims.get(name)
            if d is None or name not in vars_of:
                raise BddError("unknown state dimension %r" % name)
            f = self.m.apply(
                "and", f, encode_set(self.m, d, iv, vars_of[name], mode))
        return f

    def state_assignment(self, point, role="state"):
        """Bit assignment (name -> bool) of the cell containing `point`."""
        vars_of = self._state_vars if role == "state" else self._next_vars
        asg = {}
        for name, x in point.items():
            d = self.dims[name]
            idx = point_cell(d, x)
            vs = vars_of[name]
            for k, v in enumerate(vs):
                asg[v] = bool((idx >> (d.bits - 1 - k)) & 1)
        return asg

    def control_assignment(self, point):
        asg = {}
        for name, x in point.items():
            d = self.dims[name]
            idx = point_cell(d, x)
            vs = self._control_vars[name]
            for k, v in enumerate(vs):
                asg[v] = bool((idx >> (d.bits - 1 - k)) & 1)
        return asg

    def count_states(self, pred):
        """Number of state cells in a predicate over current-state bits."""
        return self.m.sat_count(pred, self.all_state_vars)
