"""Abstraction sampler checks against dense numeric oracles."""

import math
import random

import pytest

from relsynth.abstraction import (DynamicsComponent, Exhaustive, RandomRects,
                                  ShiftedGrids, dubins_components, iadd,
                                  icos, imul, interval_eval_dubins, isin,
                                  sample_to_interface, traverse,
                                  wrap_interval)
from relsynth.bdd import BddError
from relsynth.interfaces import Interface, is_refinement, nb, refine
from relsynth.spaces import Dimension, Encoding, cell_box, code_range, point_cell

TWO_PI = 2.0 * math.pi


def idx_assign(bit_vars, idx):
    """Assignment of `idx` over an msb-first bit vector."""
    return {v: bool((idx >> (len(bit_vars) - 1 - k)) & 1)
            for k, v in enumerate(bit_vars)}


def dubins_encoding(bits, cap=None):
    dims = [Dimension.continuous("px", -2.0, 2.0, bits),
            Dimension.continuous("py", -2.0, 2.0, bits),
            Dimension.continuous("theta", -math.pi, math.pi, bits,
                                 periodic=True)]
    ctrl = [Dimension.discrete("v", (0.25, 0.5)),
            Dimension.discrete("omega", (-1.5, 0.0, 1.5))]
    return Encoding(dims, ctrl, cap=cap)


def dubins_point_step(name, point, length=1.4):
    """Exact successor of one component at a concrete point."""
    if name == "px":
        return point["px"] + point["v"] * math.cos(point["theta"])
    if name == "py":
        return point["py"] + point["v"] * math.sin(point["theta"])
    nxt = point["theta"] + point["v"] / length * math.sin(point["omega"])
    return -math.pi + (nxt + math.pi) % TWO_PI


def dense_range(fn, lo, hi, n=2001):
    vals = [fn(lo + (hi - lo) * i / (n - 1)) for i in range(n)]
    return min(vals), max(vals)


def rand_box(rng, comp, enc):
    """A random in-domain input box for `comp`."""
    box = {}
    for name in comp.input_names():
        d = enc.dims[name]
        if d.is_discrete:
            box[name] = rng.choice(d.values)
            continue
        a = rng.uniform(d.lo, d.hi)
        b = rng.uniform(d.lo, d.hi)
        box[name] = (min(a, b), max(a, b))
    return box


# -- interval arithmetic ----------------------------------------------------

def test_interval_primitives():
    assert iadd((1.0, 2.0), (-0.5, 3.0)) == (0.5, 5.0)
    assert imul((-1.0, 2.0), (3.0, 4.0)) == (-4.0, 8.0)
    assert imul((-2.0, -1.0), (-3.0, 5.0)) == (-10.0, 6.0)
    assert iadd(1.5, (0.0, 1.0)) == (1.5, 2.5)
    with pytest.raises(BddError):
        iadd((2.0, 1.0), (0.0, 0.0))
    with pytest.raises(BddError):
        imul((0.0, float("nan")), (0.0, 1.0))


def test_trig_ranges_examples():
    lo, hi = icos(-0.1, 0.1)
    assert hi == 1.0 and lo == pytest.approx(math.cos(0.1), abs=1e-12)
    lo, hi = isin(-1.5, 1.5)
    assert lo == pytest.approx(math.sin(-1.5), abs=1e-12)
    assert hi == pytest.approx(math.sin(1.5), abs=1e-12)
    assert icos(0.0, 7.0) == (-1.0, 1.0)
    assert icos(3.0, 3.5) == (-1.0, math.cos(3.5))
    assert icos(2.0, 3.0) == (math.cos(3.0), math.cos(2.0))
    assert isin(1.0, 2.0) == (min(math.sin(1.0), math.sin(2.0)), 1.0)


def test_trig_ranges_match_dense_sampling():
    rng = random.Random(4)
    for _ in range(200):
        lo = rng.uniform(-10.0, 10.0)
        hi = lo + rng.uniform(0.0, 8.0)
        for ifn, fn in ((icos, math.cos), (isin, math.sin)):
            got = ifn(lo, hi)
            ref = dense_range(fn, lo, hi)
            assert got[0] <= ref[0] + 1e-12 and ref[1] <= got[1] + 1e-12
            assert got[0] == pytest.approx(ref[0], abs=1e-5)
            assert got[1] == pytest.approx(ref[1], abs=1e-5)


def test_wrap_interval():
    assert wrap_interval(0.5, 1.0, -math.pi, math.pi) == (0.5, 1.0)
    # a left end inside the domain is kept even if the right end sticks out
    assert wrap_interval(3.0, 4.0, -math.pi, math.pi) == (3.0, 4.0)
    lo, hi = wrap_interval(4.0, 5.0, -math.pi, math.pi)
    assert lo == pytest.approx(4.0 - TWO_PI) and hi - lo == pytest.approx(1.0)
    assert wrap_interval(0.0, 9.0, -math.pi, math.pi) == (-math.pi, math.pi)
    lo, hi = wrap_interval(-10.0, -9.5, -math.pi, math.pi)
    assert -math.pi <= lo < math.pi and hi - lo == pytest.approx(0.5)


def test_vehicle_interval_examples():
    out = interval_eval_dubins(
        "px", {"px": (0.0, 0.03125), "theta": (-math.pi, math.pi),
               "v": 0.5})
    assert out == (-0.5, 0.53125)
    out = interval_eval_dubins(
        "px", {"px": (0.0, 0.5), "theta": (0.0, math.pi / 2), "v": 0.25})
    assert out[0] == pytest.approx(0.0, abs=1e-12)
    assert out[1] == pytest.approx(0.75, abs=1e-12)
    out = interval_eval_dubins(
        "theta", {"theta": (0.2, 0.3), "v": 0.25, "omega": 0.0})
    assert out[0] == pytest.approx(0.2, abs=1e-12)
    assert out[1] == pytest.approx(0.3, abs=1e-12)
    with pytest.raises(BddError):
        interval_eval_dubins("pz", {"pz": (0.0, 1.0)})


def test_vehicle_interval_against_point_sweep():
    """The interval extension bounds a dense sweep of exact successors."""
    rng = random.Random(9)
    enc = dubins_encoding(3)
    comps = {c.name: c for c in dubins_components()}
    for _ in range(60):
        name = rng.choice(("px", "py", "theta"))
        box = rand_box(rng, comps[name], enc)
        lo, hi = interval_eval_dubins(name, box)
        for _ in range(40):
            point = {k: (v if not isinstance(v, tuple)
                         else rng.uniform(v[0], v[1]))
                     for k, v in box.items()}
            succ = dubins_point_step(name, point)
            if name == "theta":
                # member of the wrapped interval, modulo one period
                off = (succ - lo) % TWO_PI
                assert off <= hi - lo + 1e-9
            else:
                assert lo - 1e-9 <= succ <= hi + 1e-9


def test_evaluators_inclusion_monotone():
    """Nested input boxes give nested output intervals."""
    rng = random.Random(21)
    enc = dubins_encoding(3)
    comps = {c.name: c for c in dubins_components()}
    for _ in range(120):
        name = rng.choice(("px", "py", "theta"))
        outer_box = rand_box(rng, comps[name], enc)
        inner_box = {}
        for k, v in outer_box.items():
            if isinstance(v, tuple):
                a = rng.uniform(v[0], v[1])
                b = rng.uniform(v[0], v[1])
                inner_box[k] = (min(a, b), max(a, b))
            else:
                inner_box[k] = v
        lo_o, hi_o = interval_eval_dubins(name, outer_box)
        lo_i, hi_i = interval_eval_dubins(name, inner_box)
        if name == "theta":
            # wrapped intervals: containment modulo the period
            if hi_o - lo_o >= TWO_PI - 1e-9:
                continue
            off = (lo_i - lo_o) % TWO_PI
            assert off + (hi_i - lo_i) <= hi_o - lo_o + 1e-9
        else:
            assert lo_o - 1e-12 <= lo_i and hi_i <= hi_o + 1e-12


# -- single samples ---------------------------------------------------------

def test_zero_turn_sample_is_identity_on_cells():
    enc = dubins_encoding(3)
    m = enc.m
    comp = {c.name: c for c in dubins_components()}["theta"]
    d = enc.dims["theta"]
    for i in range(d.cells):
        box = cell_box(d, i)
        f = sample_to_interface(
            comp, {"theta": box, "v": 0.25, "omega": 0.0}, enc)
        here = code_range(m, enc.state_vars("theta"), i, i)
        got = m.exists(enc.state_vars("theta") + enc.all_control_vars,
                       m.apply("and", f.pred, here))
        assert got == code_range(m, enc.next_vars("theta"), i, i)


def test_sample_signature_and_blocking():
    enc = dubins_encoding(3)
    m = enc.m
    comp = {c.name: c for c in dubins_components()}["px"]
    f = sample_to_interface(
        comp, {"px": (0.0, 0.5), "theta": (0.0, 0.5), "v": 0.25}, enc)
    assert set(f.inputs) == set(enc.state_vars("px")
                                + enc.state_vars("theta")
                                + enc.control_vars("v"))
    assert set(f.outputs) == set(enc.next_vars("px"))
    # inputs outside the box block
    outside = idx_assign(enc.state_vars("px"), enc.dims["px"].cells - 1)
    assert m.apply("and", m.cube(outside), nb(f).pred) == m.false


def test_sample_box_validation():
    enc = dubins_encoding(3)
    comp = {c.name: c for c in dubins_components()}["px"]
    with pytest.raises(BddError):
        sample_to_interface(
            comp, {"px": (2.5, 3.0), "theta": (0.0, 0.5), "v": 0.25}, enc)
    with pytest.raises(BddError):
        sample_to_interface(comp, {"px": (0.0, 0.5), "v": 0.25}, enc)
    with pytest.raises(BddError):
        sample_to_interface(
            comp, {"px": (0.0, 0.5), "theta": (0.0, 0.5), "py": (0.0, 0.5),
                   "v": 0.25}, enc)
    with pytest.raises(BddError):
        sample_to_interface(
            comp, {"px": (0.0, 0.5), "theta": (0.0, 0.5), "v": 0.3}, enc)
    with pytest.raises(BddError):
        sample_to_interface(
            comp, {"px": (0.0, 0.5), "theta": (0.0, 0.5),
                   "v": (0.25, 0.5)}, enc)


def test_escaping_successors_block_the_sample():
    """A box whose successors leave the position domain maps to bottom."""
    enc = dubins_encoding(3)
    m = enc.m
    comp = {c.name: c for c in dubins_components()}["px"]
    d = enc.dims["px"]
    box = cell_box(d, d.cells - 1)
    f = sample_to_interface(
        comp, {"px": box, "theta": (-0.1, 0.1), "v": 0.5}, enc)
    assert f.pred == m.false
    # the same berth pointed inward stays nonblocking
    f = sample_to_interface(
        comp, {"px": box, "theta": (math.pi - 0.1, math.pi + 0.1),
               "v": 0.5}, enc)
    assert f.pred != m.false


def test_periodic_input_box_wraps_the_seam():
    enc = dubins_encoding(3)
    m = enc.m
    comp = {c.name: c for c in dubins_components()}["theta"]
    d = enc.dims["theta"]
    # one cell width on each side of the seam at pi == -pi
    w = d.width
    f = sample_to_interface(
        comp, {"theta": (math.pi - w, math.pi + w), "v": 0.25, "omega": 0.0},
        enc)
    accepted = m.exists(enc.next_vars("theta") + enc.all_control_vars,
                        f.pred)
    assert accepted == m.apply(
        "or",
        code_range(m, enc.state_vars("theta"), 0, 0),
        code_range(m, enc.state_vars("theta"), d.cells - 1, d.cells - 1))


def test_sample_soundness_random_points():
    """Concrete points in the box reach cells the sample's output allows."""
    rng = random.Random(33)
    enc = dubins_encoding(4)
    m = enc.m
    comps = {c.name: c for c in dubins_components()}
    checked = 0
    for _ in range(80):
        name = rng.choice(("px", "py", "theta"))
        comp = comps[name]
        box = rand_box(rng, comp, enc)
        f = sample_to_interface(comp, box, enc)
        if f.pred == m.false:
            continue
        for _ in range(15):
            point = {k: (v if not isinstance(v, tuple)
                         else rng.uniform(v[0], v[1]))
                     for k, v in box.items()}
            succ = dubins_point_step(name, point)
            asg = {}
            for k, v in point.items():
                d = enc.dims[k]
                role = "control" if k in comp.control_inputs else "state"
                bit_vars = (enc.control_vars(k) if role == "control"
                            else enc.state_vars(k))
                asg.update(idx_assign(bit_vars, point_cell(d, v)))
            asg.update(idx_assign(enc.next_vars(name),
                                  point_cell(enc.dims[name], succ)))
            assert m.eval(f.pred, asg)
            checked += 1
    assert checked > 500


# -- traversal plans --------------------------------------------------------

def toy_identity_setup(bits=2):
    enc = Encoding([Dimension.continuous("x", 0.0, 4.0, bits)])
    comp = DynamicsComponent("move", ("x",), (), "x",
                             lambda box: box["x"])
    return enc, comp


def test_exhaustive_identity_toy():
    enc, comp = toy_identity_setup()
    m = enc.m
    f = traverse(comp, Exhaustive(), enc)
    want = m.false
    for i in range(enc.dims["x"].cells):
        want = m.apply("or", want, m.apply(
            "and",
            code_range(m, enc.state_vars("x"), i, i),
            code_range(m, enc.next_vars("x"), i, i)))
    assert f.pred == want


def test_empty_plan_is_bottom():
    enc = dubins_encoding(3)
    m = enc.m
    comp = {c.name: c for c in dubins_components()}["py"]
    f = traverse(comp, RandomRects(0, seed=5), enc)
    assert f.pred == m.false
    assert set(f.outputs) == set(enc.next_vars("py"))


def test_plan_validation():
    enc, comp = toy_identity_setup()
    with pytest.raises(BddError):
        traverse(comp, RandomRects(-1), enc)
    with pytest.raises(BddError):
        traverse(comp, ShiftedGrids(()), enc)
    with pytest.raises(BddError):
        traverse(comp, ShiftedGrids((0,)), enc)
    with pytest.raises(BddError):
        traverse(comp, Exhaustive(bits={"x": 9}), enc)
    with pytest.raises(BddError):
        traverse(comp, Exhaustive(bits={"y": 1}), enc)


def test_traverse_equals_refine_fold():
    """The closed-form accumulation matches folding refine sample by
    sample from the universal abstraction."""
    enc = dubins_encoding(3)
    m = enc.m
    comp = {c.name: c for c in dubins_components()}["theta"]
    from relsynth.abstraction import _plan_boxes
    for plan in (RandomRects(25, seed=7), ShiftedGrids((3,)),
                 Exhaustive()):
        folded = Interface(m,
                           enc.state_vars("theta") + enc.all_control_vars,
                           enc.next_vars("theta"), m.false)
        for box in _plan_boxes(comp, plan, enc):
            folded = refine(folded,
                            sample_to_interface(comp, box, enc))
        closed = traverse(comp, plan, enc)
        assert closed.pred == folded.pred
        assert closed.inputs == folded.inputs
        assert closed.outputs == folded.outputs


def test_overlapping_samples_stay_consistent():
    """The merged abstraction refines every constituent sample, however
    the random boxes overlap or misalign."""
    enc = dubins_encoding(3)
    m = enc.m
    comps = {c.name: c for c in dubins_components()}
    from relsynth.abstraction import _plan_boxes
    for name, seed in (("px", 2), ("py", 3), ("theta", 4)):
        comp = comps[name]
        plan = RandomRects(35, seed=seed)
        merged = traverse(comp, plan, enc)
        for box in _plan_boxes(comp, plan, enc):
            f = sample_to_interface(comp, box, enc)
            if f.pred == m.false:
                continue
            assert is_refinement(f, merged)


def test_random_and_shifted_below_exhaustive():
    enc = dubins_encoding(4)
    comps = {c.name: c for c in dubins_components()}
    for name in ("px", "py", "theta"):
        ex = traverse(comps[name], Exhaustive(), enc)
        rnd = traverse(comps[name], RandomRects(120, seed=17), enc)
        grid = traverse(comps[name], ShiftedGrids((4, 5)), enc)
        assert is_refinement(rnd, ex)
        assert is_refinement(grid, ex)


def test_more_samples_refine_fewer():
    """Extending the sample set moves the result up the refinement
    order; a fixed seed makes the shorter run a prefix of the longer."""
    enc = dubins_encoding(3)
    comps = {c.name: c for c in dubins_components()}
    for name in ("px", "theta"):
        comp = comps[name]
        small = traverse(comp, RandomRects(20, seed=29), enc)
        large = traverse(comp, RandomRects(60, seed=29), enc)
        assert is_refinement(small, large)
        one_pass = traverse(comp, ShiftedGrids((4,)), enc)
        two_pass = traverse(comp, ShiftedGrids((4, 5)), enc)
        assert is_refinement(one_pass, two_pass)


def test_shifted_grids_cover_with_fewer_samples():
    """4x4 plus 5x5 passes accept the whole 8x8 grid from 41 boxes."""
    enc = Encoding([Dimension.continuous("x", 0.0, 8.0, 3),
                    Dimension.continuous("y", 0.0, 8.0, 3)])
    m = enc.m
    comp = DynamicsComponent("hold", ("x", "y"), (), "x",
                             lambda box: box["x"])
    from relsynth.abstraction import _plan_boxes
    plan = ShiftedGrids((4, 5))
    assert sum(1 for _ in _plan_boxes(comp, plan, enc)) == 41
    f = traverse(comp, plan, enc)
    assert nb(f).pred == m.true


def test_exhaustive_with_coarser_bits():
    """Plan-level bit overrides sample bigger aligned boxes."""
    enc, comp = toy_identity_setup(bits=3)
    m = enc.m
    from relsynth.abstraction import _plan_boxes
    plan = Exhaustive(bits={"x": 1})
    assert sum(1 for _ in _plan_boxes(comp, plan, enc)) == 2
    f = traverse(comp, plan, enc)
    # half-domain boxes still land on full-precision output cells
    lowhalf = code_range(m, enc.state_vars("x"), 0, 3)
    got = m.exists(enc.state_vars("x"), m.apply("and", f.pred, lowhalf))
    assert got == code_range(m, enc.next_vars("x"), 0, 3)
    assert nb(f).pred == m.true


def test_component_views_use_leading_bits():
    """A coarse view constrains only the most significant bits."""
    enc = dubins_encoding(5)
    m = enc.m
    comp = {c.name: c for c in dubins_components(
        view={"px": 3, "py": 3, "theta": 3})}["px"]
    f = traverse(comp, Exhaustive(), enc)
    kept = set(enc.state_vars("px")[:3] + enc.state_vars("theta")[:3]
               + enc.next_vars("px")[:3] + enc.control_vars("v"))
    assert set(m.support(f.pred)) <= kept
    with pytest.raises(BddError):
        bad = {c.name: c for c in dubins_components(
            view={"px": 9})}["px"]
        traverse(bad, Exhaustive(), enc)


def test_saved_abstraction_round_trips():
    import io
    from relsynth.interfaces import load_interface, save_interface
    enc = dubins_encoding(3)
    m = enc.m
    comp = {c.name: c for c in dubins_components()}["px"]
    f = traverse(comp, RandomRects(10, seed=1), enc)
    buf = io.StringIO()
    save_interface(f, buf, meta={"plan": "random_rects", "count": 10,
                                 "seed": 1})
    buf.seek(0)
    g, meta = load_interface(m, buf)
    assert g.pred == f.pred and meta["seed"] == 1
