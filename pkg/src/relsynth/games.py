"""Reach and safe games over interface-encoded control systems.

The controlled predecessor of a state set Z is computed by the
hide-compose pipeline

    cpre(F, Z) = ihide(u, ohide(x+, comp(F, Z+)))

where Z+ is the sink over next-state bits.  For a sink W the composite
`ohide(o, comp(F, W))` collapses to

    NB F  and  forall o . (F -> W)

because the robustness term of the composition already forces every
output into W, making the existential projection equal to the
nonblocking set.  With several components owning disjoint next-state
blocks, folding them one at a time through that collapsed step visits
each block with a quantifier over its own bits only; unfolding the
conjunctions shows the fold equals the single monolithic quantification,
so both paths produce the same predicate and the tests pin that down.

Coarsening degrades precision in place: the winning region or the
dynamics keep their variables, with low bits projected out so the
predicate is constant on coarse cells.  The coarsened object always
abstracts (sits below) the original in the refinement order.
"""

import logging
import time
from dataclasses import dataclass, field

from relsynth.bdd import BddError
from relsynth.interfaces import Interface, comp, refine, sink

log = logging.getLogger(__name__)

# sweep the node store once this much garbage piles up
SWEEP_SLACK = 2_000_000


class Game:
    """A reach or safe game on one encoding.

    Parameters
    ----------
    enc : spaces.Encoding
        Variable layout; supplies control-domain guards and renaming.
    components : list of Interface
        Dynamics with current-state and control inputs.  Their output
        blocks must be disjoint and together cover every next-state bit.
        A single entry makes the game monolithic.
    objective : str
        'reach' or 'safe'.
    goal : int
        Predicate over current-state bits: target set for reach games,
        safe set for safe games.
    """

    def __init__(self, enc, components, objective, goal):
        if objective not in ("reach", "safe"):
            raise BddError("objective must be 'reach' or 'safe'")
        m = enc.m
        covered = set()
        state_and_control = set(enc.all_state_vars) | set(
            enc.all_control_vars)
        for f in components:
            if f.m is not m:
                raise BddError("component managers differ from the encoding")
            if f.outputs & covered:
                raise BddError("components share output bits: %s"
                               % sorted(f.outputs & covered))
            covered |= f.outputs
            if not f.inputs <= state_and_control:
                raise BddError(
                    "component inputs must be state or control bits")
        if covered != set(enc.all_next_vars):
            raise BddError("component outputs must cover every "
                           "next-state bit")
        m._check(goal)
        if not m.support(goal) <= set(enc.all_state_vars):
            raise BddError("goal must be a current-state predicate")
        self.enc = enc
        self.m = m
        self.objective = objective
        self.components = list(components)
        self.goal = goal
        # per-component nonblocking inputs, cached for the cpre fold
        self._nb = [m.exists(f.outputs, f.pred) for f in components]

    def roots(self):
        hs = [f.pred for f in self.components]
        hs.extend(self._nb)
        hs.append(self.goal)
        hs.append(self.enc.control_domain())
        hs.append(self.enc.state_domain())
        return hs


def _cpre_stage(game, z):
    """The (state, control) sink before hiding the control bits."""
    m = game.m
    w = m.rename(z, game.enc.prime_map)
    for f, nbf in zip(reversed(game.components),
                      reversed(game._nb)):
        outs = sorted(f.outputs, key=m.level_of)
        w = m.apply("and", nbf, m.implies_forall(outs, f.pred, w))
    return m.apply("and", w, game.enc.control_domain())


def cpre(game, z):
    """States with a control choice that cannot miss `z`.

    Equals `ihide(u, ohide(x+, comp(F, Z+)))` and the direct form
    `exists u . (exists x+ . F) and (forall x+ . F -> Z+)`.
    """
    m = game.m
    stage = _cpre_stage(game, z)
    return m.exists(game.enc.all_control_vars, stage)


def cpre_with_controller(game, z):
    """cpre plus the (state, control) sink it projects from."""
    m = game.m
    stage = _cpre_stage(game, z)
    return m.exists(game.enc.all_control_vars, stage), stage


def reach_step(game, z):
    """One reach iteration: fuse the predecessor set with the target."""
    m = game.m
    xs = game.enc.all_state_vars
    pre = sink(m, xs, cpre(game, z))
    return refine(pre, sink(m, xs, game.goal)).pred


def safe_step(game, z):
    """One safe iteration: predecessor set inside the safe set."""
    m = game.m
    xs = game.enc.all_state_vars
    pre = sink(m, xs, cpre(game, z))
    return comp(pre, sink(m, xs, game.goal)).pred


@dataclass
class TraceRow:
    iteration: int
    z: int
    nodes: int
    states: int
    seconds: float
    coarsen_events: int


@dataclass
class GameTrace:
    rows: list = field(default_factory=list)
    stop_reason: str = "budget"

    def write_csv(self, stream):
        stream.write("iter,nodes,states,seconds,coarsen_events\n")
        for r in self.rows:
            stream.write("%d,%d,%d,%.6f,%d\n"
                         % (r.iteration, r.nodes, r.states, r.seconds,
                            r.coarsen_events))


@dataclass
class GameResult:
    """Outcome of a game iteration.

    `winning` is a sink over current-state bits.  `controller` is the
    (state, control) sink of the last iteration: pairs that are
    nonblocking and whose every successor stays inside the winning
    region; hiding its control bits gives back `cpre(winning)`.  When
    the trace stops on 'budget' the last iterate is returned as is; for
    reach games every iterate under-approximates the true basin, but a
    safe iterate interrupted before the fixed point still contains
    states that later rounds would have removed.
    """

    winning: Interface
    controller: Interface
    trace: GameTrace

    @property
    def iterations(self):
        return len(self.trace.rows)


def greedy_coarsen(game, z, node_threshold):
    """Shrink `z`'s node count by dropping precision one bit at a time.

    Each step universally quantifies the least significant state bit the
    predicate still depends on, per dimension (so a coarse cell wins
    only when all its fine cells did), and keeps the dimension losing
    the fewest states, ties to the earliest dimension.  Stops once the
    node count is within `node_threshold` or the predicate no longer
    depends on any state bit.  Returns (z, events).
    """
    m = game.m
    enc = game.enc
    events = 0
    xs = enc.all_state_vars
    while m.node_count(z) > node_threshold:
        sup = m.support(z)
        best = None
        for i, d in enumerate(enc.state_dims):
            used = [v for v in enc.state_vars(d.name) if v in sup]
            if not used:
                continue
            trial = m.forall([used[-1]], z)
            reward = m.sat_count(trial, xs)
            if best is None or reward > best[0]:
                best = (reward, i, used[-1], trial)
        if best is None:
            break
        _, _, bit, trial = best
        z = trial
        events += 1
        log.debug("coarsened away %s, %d nodes left", bit,
                  m.node_count(z))
    return z, events


class _Sweeper:
    """Sweeps the store once it outgrows the last live count by a slack."""

    def __init__(self, game, slack=SWEEP_SLACK):
        self.game = game
        self.slack = slack
        self.level = game.m.size + slack

    def step(self, extra):
        m = self.game.m
        if m.size > self.level:
            live, freed = m.sweep(self.game.roots() + list(extra))
            log.debug("sweep kept %d nodes, freed %d", live, freed)
            self.level = live + self.slack


def solve(game, max_iters=1_000_000, coarsen_threshold=None):
    """Iterate the game to a fixed point and extract a controller.

    Reach games grow `Z` from the empty set by `cpre(Z) or goal`; safe
    games shrink it from the safe set by `cpre(Z) and goal`.  With a
    coarsening threshold the winning region is greedily downsampled
    whenever it outgrows the node budget.  Coarsening keeps every
    iterate inside the exact winning region but can drop states an
    earlier iterate had, so the iteration is no longer monotone; it
    stops when a step leaves the set unchanged, or on the budget.

    Returns a `GameResult`; its trace rows record every iteration and
    `stop_reason` is 'fixed_point' or 'budget'.  The winning and
    controller predicates are pinned so that later solves on the same
    manager cannot sweep them away; `m.unprotect` releases them once a
    caller is done comparing results.
    """
    m = game.m
    enc = game.enc
    xs = enc.all_state_vars
    reach = game.objective == "reach"
    z = m.false if reach else game.goal
    controller = m.false
    trace = GameTrace()
    zs = [z]
    sweeper = _Sweeper(game)
    for it in range(1, max_iters + 1):
        t0 = time.perf_counter()
        pre, stage = cpre_with_controller(game, z)
        if reach:
            zn = m.apply("or", pre, game.goal)
        else:
            zn = m.apply("and", pre, game.goal)
        events = 0
        if coarsen_threshold is not None \
                and m.node_count(zn) > coarsen_threshold:
            zn, events = greedy_coarsen(game, zn, coarsen_threshold)
        controller = stage
        dt = time.perf_counter() - t0
        trace.rows.append(TraceRow(it, zn, m.node_count(zn),
                                   m.sat_count(zn, xs), dt, events))
        log.debug("iter %d: %d nodes, %d states, %.3fs, %d coarsenings",
                  it, trace.rows[-1].nodes, trace.rows[-1].states, dt,
                  events)
        if zn == z:
            trace.stop_reason = "fixed_point"
            break
        z = zn
        zs.append(z)
        sweeper.step(zs + [controller])
    xu = xs + enc.all_control_vars
    m.protect(z)
    m.protect(controller)
    return GameResult(sink(m, xs, z), sink(m, xu, controller), trace)


def coarsen_component(game, f, level):
    """Project a dynamics component onto a coarser grid, in place.

    `level` maps state dimension names to the bit counts to keep.  Kept
    bits are the most significant ones.  Output blocks lose their low
    bits by existential projection; input blocks additionally demand
    that every dropped input cell is nonblocking, so the result is a
    sound abstraction (it refines upward to `f`).  Control bits always
    keep full precision.
    """
    m = game.m
    enc = game.enc
    unknown = set(level) - {d.name for d in enc.state_dims}
    if unknown:
        raise BddError("unknown state dimensions in level: %s"
                       % sorted(unknown))
    drop_in, drop_out = [], []
    for d in enc.state_dims:
        keep = level.get(d.name, d.bits)
        if not 0 <= keep <= d.bits:
            raise BddError("level %r out of range for %s" % (keep, d.name))
        cur = enc.state_vars(d.name)[keep:]
        nxt = enc.next_vars(d.name)[keep:]
        drop_in.extend(v for v in cur if v in f.inputs)
        drop_out.extend(v for v in nxt if v in f.outputs)
    pred = f.pred
    if drop_out:
        pred = m.exists(drop_out, pred)
    if drop_in:
        nbf = m.exists(f.outputs, pred)
        pred = m.apply("and", m.exists(drop_in, pred),
                       m.forall(drop_in, nbf))
    return Interface(m, f.inputs, f.outputs, pred)


def downsample_schedule(game, levels, max_iters=1_000_000):
    """Solve through a coarse-to-fine precision schedule.

    Each entry of `levels` maps state dimensions to kept bits (missing
    names keep full precision); a bare integer caps every dimension at
    that many bits.  The game runs at each level until the winning
    region stalls, then seeds the next level with it.  Because each
    level's basin under-approximates the next one's and the reach
    iteration is monotone, seeding never changes the final fixed point,
    only how fast it is found.  Safe games shrink toward their fixed
    point, so seeding them from below is unsound and is rejected.
    Returns a `GameResult` over the final level.
    """
    if game.objective != "reach":
        raise BddError("downsample_schedule requires a reach game")
    m = game.m
    enc = game.enc
    xs = enc.all_state_vars
    z = m.false
    trace = GameTrace()
    controller = m.false
    it = 0
    zs = [z]
    for level in levels:
        if isinstance(level, int):
            level = {d.name: min(level, d.bits) for d in enc.state_dims}
        comps = [coarsen_component(game, f, level) for f in game.components]
        sub = Game(enc, comps, game.objective, game.goal)
        sweeper = _Sweeper(sub)
        while it < max_iters:
            it += 1
            t0 = time.perf_counter()
            pre, stage = cpre_with_controller(sub, z)
            zn = m.apply("or", pre, game.goal)
            controller = stage
            dt = time.perf_counter() - t0
            trace.rows.append(TraceRow(it, zn, m.node_count(zn),
                                       m.sat_count(zn, xs), dt, 0))
            if zn == z:
                break
            z = zn
            zs.append(z)
            sweeper.step(zs + [controller] + game.roots())
        else:
            trace.stop_reason = "budget"
            xu = xs + enc.all_control_vars
            m.protect(z)
            m.protect(controller)
            return GameResult(sink(m, xs, z), sink(m, xu, controller), trace)
    trace.stop_reason = "fixed_point"
    xu = xs + enc.all_control_vars
    m.protect(z)
    m.protect(controller)
    return GameResult(sink(m, xs, z), sink(m, xu, controller), trace)


def dump_cell_runs(enc, pred, stream):
    """Write maximal runs of winning cell codes as `start,length` lines.

    Cell codes concatenate the state dimensions' bits msb-first in
    declaration order.
    """
    stream.write("start,length\n")
    for start, length in enc.m.sat_runs(pred, enc.all_state_vars):
        stream.write("%d,%d\n" % (start, length))
