"""Finite interface abstractions of continuous dynamics.

A dynamics component is sampled over boxes of its input space; interval
arithmetic produces a guaranteed superset of the successors, and both
sides are coarsened onto the bit grid.  Boxes and grid cells share
half-open `[lo, hi)` semantics: the input predicate covers exactly the
cells a box intersects, the evaluator runs on the closure of those
cells (so every accepted cell's concrete points are accounted for),
and the successor interval is read back as right-open.  Treating the
evaluator's upper bound as excluded is sound whenever no covered point
attains it exactly on a cell boundary; the built-in vehicle components
guarantee this because each is strictly increasing in its own state
coordinate, so the supremum over a half-open input range is never
reached.  Samples merge through shared refinement starting from the
universal abstraction; because each sample soundly over-approximates
the same concrete map, overlapping or misaligned boxes always satisfy
the shared-refinability condition.

For input-output samples `I_k and O_k` the refinement fold has the
closed form

    (OR_k I_k) and AND_k (I_k -> O_k)

which `traverse` accumulates with balanced trees instead of folding
`refine` one sample at a time; the tests pin the equality.

Samples whose successor interval escapes a non-periodic state domain
yield the bottom interface: the abstraction blocks those inputs, which
keeps every synthesized controller inside the modeled region.
"""

import itertools
import math
import random
from dataclasses import dataclass

from relsynth.bdd import BddError
from relsynth.interfaces import Interface
from relsynth.spaces import (Dimension, _iceil, _ifloor, cell_box,
                             code_range, encode_set)

DUBINS_LENGTH = 1.4

_TWO_PI = 2.0 * math.pi


# -- interval arithmetic ---------------------------------------------------

def _as_interval(x):
    if isinstance(x, (tuple, list)):
        lo, hi = float(x[0]), float(x[1])
    else:
        lo = hi = float(x)
    if math.isnan(lo) or math.isnan(hi) or lo > hi:
        raise BddError("bad interval: %r" % (x,))
    return lo, hi


def iadd(a, b):
    a, b = _as_interval(a), _as_interval(b)
    return a[0] + b[0], a[1] + b[1]


def imul(a, b):
    a, b = _as_interval(a), _as_interval(b)
    ps = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(ps), max(ps)


def _contains_multiple(lo, hi, offset, period=_TWO_PI):
    """Does [lo, hi] contain offset + period * k for some integer k?"""
    return (math.ceil((lo - offset) / period)
            <= math.floor((hi - offset) / period))


def icos(lo, hi):
    """Exact range of cos over [lo, hi]."""
    (lo, hi) = _as_interval((lo, hi))
    if hi - lo >= _TWO_PI:
        return -1.0, 1.0
    vals = [math.cos(lo), math.cos(hi)]
    if _contains_multiple(lo, hi, 0.0):
        vals.append(1.0)
    if _contains_multiple(lo, hi, math.pi):
        vals.append(-1.0)
    return min(vals), max(vals)


def isin(lo, hi):
    """Exact range of sin over [lo, hi]."""
    return icos(lo - math.pi / 2.0, hi - math.pi / 2.0)


def wrap_interval(lo, hi, dom_lo, dom_hi):
    """Shift an interval so its left end lies inside a periodic domain.

    Keeps the width; the right end may stick past `dom_hi`, which the
    set encoder interprets as crossing the seam.  Widths of a full
    period or more cover the whole domain.
    """
    period = dom_hi - dom_lo
    if hi - lo >= period:
        return dom_lo, dom_hi
    s = math.fmod(lo - dom_lo, period)
    if s < 0:
        s += period
    return dom_lo + s, dom_lo + s + (hi - lo)


# -- dynamics components ---------------------------------------------------

@dataclass(frozen=True)
class DynamicsComponent:
    """One block of a factored transition map.

    `evaluator` maps a dict of input intervals (scalars for discrete
    controls) to a superset interval of the output dimension's next
    value, and must be inclusion-monotone.  `view` optionally lowers
    the bit precision used for named dimensions; kept bits are the most
    significant ones and default to full precision.
    """

    name: str
    state_inputs: tuple
    control_inputs: tuple
    output: str
    evaluator: object
    view: dict = None

    def input_names(self):
        return tuple(self.state_inputs) + tuple(self.control_inputs)

    def view_bits(self, dim):
        k = (self.view or {}).get(dim.name, dim.bits)
        if not 0 <= k <= dim.bits:
            raise BddError("view %r out of range for %s" % (k, dim.name))
        return k


def _dubins_px(box, length):
    return iadd(box["px"], imul(box["v"], icos(*_as_interval(box["theta"]))))


def _dubins_py(box, length):
    return iadd(box["py"], imul(box["v"], isin(*_as_interval(box["theta"]))))


def _dubins_theta(box, length):
    v = _as_interval(box["v"])
    turn = imul((v[0] / length, v[1] / length),
                isin(*_as_interval(box["omega"])))
    lo, hi = iadd(box["theta"], turn)
    return wrap_interval(lo, hi, -math.pi, math.pi)


_DUBINS = {
    "px": (_dubins_px, ("px", "theta"), ("v",)),
    "py": (_dubins_py, ("py", "theta"), ("v",)),
    "theta": (_dubins_theta, ("theta",), ("v", "omega")),
}


def interval_eval_dubins(name, box, length=DUBINS_LENGTH):
    """Interval extension of one planar-vehicle component.

    `name` is 'px', 'py' or 'theta'; `box` maps that component's inputs
    to intervals or scalars.  The heading result is wrapped so its left
    end lies in [-pi, pi).
    """
    try:
        fn = _DUBINS[name][0]
    except KeyError:
        raise BddError("unknown component %r" % (name,)) from None
    return fn(box, length)


def dubins_components(length=DUBINS_LENGTH, view=None):
    """The three planar-vehicle blocks: position pair and heading."""
    out = []
    for name, (fn, sin, cin) in _DUBINS.items():
        out.append(DynamicsComponent(
            name, sin, cin, name,
            (lambda b, _fn=fn: _fn(b, length)), view))
    return out


# -- sampling --------------------------------------------------------------

def _view_dim(d, k):
    if k == d.bits:
        return d
    return Dimension(d.name, k, d.lo, d.hi, d.periodic, d.values)


def _dim_vars(enc, name, role):
    if role == "control":
        return enc.control_vars(name)
    return enc.state_vars(name)


def _signature(comp, enc):
    ins = []
    for n in comp.state_inputs:
        ins.extend(enc.state_vars(n))
    for n in comp.control_inputs:
        ins.extend(enc.control_vars(n))
    return ins, enc.next_vars(comp.output)


def _input_cells(m, d, k, interval, bit_vars):
    """Grid cells a box intersects, plus their snapped closure.

    Boxes are half-open like the cells themselves, so a box ending on a
    boundary does not touch the cell to its right.  Returns (predicate,
    (lo, hi)) where the interval is the union of the covered cells -
    the box the evaluator must run on for every accepted cell's points
    to be covered - or None when the box misses the grid entirely.
    """
    vd = _view_dim(d, k)
    w = vd.width
    a, b = interval
    if d.periodic:
        period = d.period
        if b - a >= period:
            return m.true, (d.lo, d.hi)
        width = b - a
        a = d.lo + (a - d.lo) % period
        b = a + width
        ia = _ifloor((a - d.lo) / w)
        ib = _iceil((b - d.lo) / w) - 1
        if ib < ia:
            return None
        if ib - ia + 1 >= vd.cells:
            return m.true, (d.lo, d.hi)
        snapped = (d.lo + ia * w, d.lo + (ib + 1) * w)
        if ib < vd.cells:
            return code_range(m, bit_vars, ia, ib), snapped
        wrapped = m.apply("or",
                          code_range(m, bit_vars, ia, vd.cells - 1),
                          code_range(m, bit_vars, 0, ib - vd.cells))
        return wrapped, snapped
    if a < d.lo - 1e-9 or b > d.hi + 1e-9:
        raise BddError("input box for %s is outside its domain" % d.name)
    ia = max(_ifloor((a - d.lo) / w), 0)
    ib = min(_iceil((b - d.lo) / w) - 1, vd.cells - 1)
    if ib < ia:
        return None
    snapped = (d.lo + ia * w, min(d.lo + (ib + 1) * w, d.hi))
    return code_range(m, bit_vars, ia, ib), snapped


def _output_cells(m, d, k, interval, bit_vars):
    """Grid cells covered by a right-open successor interval.

    The interval is read as `[lo, hi)` on the same half-open grid as
    the cells, except that a degenerate point interval keeps the cell
    containing its value.  Successors leaving a non-periodic domain
    make the sample blocking: returns None.
    """
    vd = _view_dim(d, k)
    w = vd.width
    a, b = interval
    if d.periodic:
        period = d.period
        if b - a >= period:
            return m.true
        width = b - a
        a = d.lo + (a - d.lo) % period
        b = a + width
        ia = _ifloor((a - d.lo) / w)
        ib = max(_iceil((b - d.lo) / w) - 1, ia)
        if ib - ia + 1 >= vd.cells:
            return m.true
        if ib < vd.cells:
            return code_range(m, bit_vars, ia, ib)
        return m.apply("or",
                       code_range(m, bit_vars, ia, vd.cells - 1),
                       code_range(m, bit_vars, 0, ib - vd.cells))
    if a < d.lo or b > d.hi:
        return None
    ia = max(_ifloor((a - d.lo) / w), 0)
    ib = min(_iceil((b - d.lo) / w) - 1, vd.cells - 1)
    ib = max(ib, ia)
    return code_range(m, bit_vars, ia, ib)


def _sample_parts(comp, box, enc):
    """(input predicate, output predicate) of one sample, None if the
    box covers no cell or the successors escape the output domain."""
    m = enc.m
    if set(box) != set(comp.input_names()):
        raise BddError("sample box must cover exactly %s"
                       % sorted(comp.input_names()))
    ipred = m.true
    ev_box = {}
    for role, names in (("state", comp.state_inputs),
                        ("control", comp.control_inputs)):
        for name in names:
            d = enc.dims[name]
            bit_vars = _dim_vars(enc, name, role)
            lo, hi = _as_interval(box[name])
            if d.is_discrete:
                if lo != hi or lo not in d.values:
                    raise BddError(
                        "discrete input %s needs a single valid value"
                        % name)
                ev_box[name] = lo
                cells = encode_set(m, d, (lo, hi), bit_vars, "outer")
            else:
                k = comp.view_bits(d)
                got = _input_cells(m, d, k, (lo, hi), bit_vars[:k])
                if got is None:
                    return None
                cells, ev_box[name] = got
            ipred = m.apply("and", ipred, cells)
    out = _as_interval(comp.evaluator(ev_box))
    d = enc.dims[comp.output]
    k = comp.view_bits(d)
    opred = _output_cells(m, d, k, out, enc.next_vars(comp.output)[:k])
    if opred is None:
        return None
    return ipred, opred


def sample_to_interface(comp, box, enc):
    """Abstract one input box into an interface.

    The predicate is `I and O`: `I` covers the grid cells the half-open
    box intersects and `O` the cells of the evaluator's successor
    interval, both at the component's view precision.  Inputs outside
    `I` block, and the whole sample blocks (bottom) when the successor
    interval leaves a non-periodic domain.
    """
    m = enc.m
    ins, outs = _signature(comp, enc)
    parts = _sample_parts(comp, box, enc)
    if parts is None:
        return Interface(m, ins, outs, m.false)
    return Interface(m, ins, outs, m.apply("and", *parts))


# -- traversal plans -------------------------------------------------------

@dataclass(frozen=True)
class Exhaustive:
    """Every grid cell of every input dimension, once.

    `bits` optionally coarsens the sampling grid per dimension; the
    default samples at each dimension's view precision.  Discrete
    controls enumerate their values.
    """

    bits: dict = None


@dataclass(frozen=True)
class RandomRects:
    """`count` random boxes with uniform widths and offsets, clipped to
    the domain; discrete controls pick a uniform value.  Deterministic
    for a fixed seed."""

    count: int
    seed: int = 0


@dataclass(frozen=True)
class ShiftedGrids:
    """One aligned pass per entry of `sizes`, partitioning every
    continuous input dimension into that many equal slices."""

    sizes: tuple


def _exhaustive_axes(comp, plan, enc):
    unknown = set(plan.bits or ()) - set(comp.input_names())
    if unknown:
        raise BddError("plan bits name no input of %s: %s"
                       % (comp.name, sorted(unknown)))
    axes = []
    for role, names in (("state", comp.state_inputs),
                        ("control", comp.control_inputs)):
        for name in names:
            d = enc.dims[name]
            if d.is_discrete:
                axes.append([(v, v) for v in d.values])
                continue
            k = comp.view_bits(d)
            if plan.bits and name in plan.bits:
                k = plan.bits[name]
                if not 0 <= k <= d.bits:
                    raise BddError("plan bits %r out of range for %s"
                                   % (k, name))
            vd = _view_dim(d, k)
            axes.append([cell_box(vd, i) for i in range(vd.cells)])
    return axes


def _grid_axes(comp, size, enc):
    if size < 1:
        raise BddError("grid size must be positive")
    axes = []
    for role, names in (("state", comp.state_inputs),
                        ("control", comp.control_inputs)):
        for name in names:
            d = enc.dims[name]
            if d.is_discrete:
                axes.append([(v, v) for v in d.values])
                continue
            step = (d.hi - d.lo) / size
            axes.append([(d.lo + i * step, d.lo + (i + 1) * step)
                         for i in range(size)])
    return axes


def _plan_boxes(comp, plan, enc):
    names = comp.input_names()
    if isinstance(plan, Exhaustive):
        for combo in itertools.product(*_exhaustive_axes(comp, plan, enc)):
            yield dict(zip(names, combo))
        return
    if isinstance(plan, ShiftedGrids):
        if not plan.sizes:
            raise BddError("shifted grids need at least one size")
        for size in plan.sizes:
            for combo in itertools.product(*_grid_axes(comp, size, enc)):
                yield dict(zip(names, combo))
        return
    if isinstance(plan, RandomRects):
        if plan.count < 0:
            raise BddError("sample count must be nonnegative")
        rng = random.Random(plan.seed)
        for _ in range(plan.count):
            box = {}
            for name in names:
                d = enc.dims[name]
                if d.is_discrete:
                    box[name] = rng.choice(d.values)
                    continue
                width = rng.uniform(0.0, d.hi - d.lo)
                off = rng.uniform(d.lo, d.hi)
                if d.periodic:
                    box[name] = (off, off + width)
                else:
                    box[name] = (off, min(off + width, d.hi))
            yield box
        return
    raise BddError("unknown traversal plan %r" % (plan,))


def _tree(m, op, parts, unit):
    if not parts:
        return unit
    while len(parts) > 1:
        parts = [parts[i] if i + 1 == len(parts)
                 else m.apply(op, parts[i], parts[i + 1])
                 for i in range(0, len(parts), 2)]
    return parts[0]


def traverse(comp, plan, enc):
    """Merge every sample of `plan` through shared refinement.

    Equivalent to folding `refine` over the samples starting from the
    universal abstraction, so the result abstracts the concrete map and
    grows in the refinement order as samples are added.
    """
    m = enc.m
    ins, outs = _signature(comp, enc)
    nb_parts, io_parts = [], []
    for box in _plan_boxes(comp, plan, enc):
        parts = _sample_parts(comp, box, enc)
        if parts is None:
            continue
        nb_parts.append(parts[0])
        io_parts.append(m.apply("implies", parts[0], parts[1]))
    pred = m.apply("and", _tree(m, "or", nb_parts, m.false),
                   _tree(m, "and", io_parts, m.true))
    return Interface(m, ins, outs, pred)
