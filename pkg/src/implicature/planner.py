"""Partial-order causal-link planner over belief-state operators.

States are sets of ground terms; negation is explicit not(...) plus delete
effects.  The search is systematic: open conditions are closed by causal
links from existing or freshly instantiated steps, and any step whose add
or delete effect matches a protected condition is a threat, resolved by
promotion or demotion only (threats are forced when the match is necessary
under the current bindings, with a final sweep once bindings settle).
Iterative deepening on step count makes the returned plan cost-minimal;
among equal-cost plans the lexicographically least operator-name sequence
wins, so identical inputs yield identical plans.

Besides plan construction this module provides the plan-comparison
machinery the goal-ascription rules need: simulation, asserted states,
exclusive states, and completion search (a shortest ordered action sequence
entered from a designated state).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace

from .terms import (
    Atom,
    Compound,
    EMPTY_SUBST,
    Substitution,
    Term,
    Var,
    apply,
    is_ground,
    render,
    rename_apart,
    unify,
    variables,
)
from .trace import Trace

INIT_ID = 0
GOAL_ID = 1
FIRST_STEP_ID = 2

#: Default search bound on plan steps; CLI-overridable.
DEFAULT_BOUND = 8

#: Cap on complete plans collected per depth before tie-breaking.
_MAX_COLLECTED = 512


class PlannerError(ValueError):
    pass


class IncompletePlanError(PlannerError):
    """Operation requires a complete plan."""


class CycleError(RuntimeError):
    """Ordering constraints are cyclic: internal invariant violation."""


class PreconditionFailure(RuntimeError):
    """Simulation hit an operator whose preconditions do not hold."""

    def __init__(self, index: int, condition: Term) -> None:
        super().__init__(f"step {index}: unmet precondition {render(condition)}")
        self.index = index
        self.condition = condition


@dataclass(frozen=True)
class Operator:
    """An action schema or instance.

    ``args`` may contain variables (schema) or be ground (instance); every
    variable in preconditions and effects must appear in the args, be bound
    by a topic constraint, or be anonymous.  ``actor`` names the agent that
    performs the action (used by the causality side-condition).
    ``topic_constraints`` are (proposition, topic) pairs where the topic
    term must equal the proposition's root functor, looking through not().
    ``positive_constraints`` are terms that may not instantiate to a
    negation (dialogue acts carry positive content; denial is its own act).
    """

    name: str
    args: tuple[Term, ...] = ()
    preconditions: tuple[Term, ...] = ()
    add: tuple[Term, ...] = ()
    delete: tuple[Term, ...] = ()
    actor: Term | None = None
    topic_constraints: tuple[tuple[Term, Term], ...] = ()
    positive_constraints: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        allowed = variables(self.head())
        for _, t in self.topic_constraints:
            allowed |= variables(t)
        for group in (self.preconditions, self.add, self.delete):
            for t in group:
                for v in variables(t):
                    if v not in allowed and not v.startswith("_a"):
                        raise PlannerError(
                            f"operator {self.name}: variable ?{v} not among parameters"
                        )
        overlap = {render(t) for t in self.add} & {render(t) for t in self.delete}
        if overlap:
            raise PlannerError(f"operator {self.name}: add/delete overlap {overlap}")

    def head(self) -> Term:
        if self.args:
            return Compound(self.name, self.args)
        return Atom(self.name)

    def substituted(self, s: Substitution) -> "Operator":
        return Operator(
            name=self.name,
            args=tuple(apply(s, a) for a in self.args),
            preconditions=tuple(apply(s, p) for p in self.preconditions),
            add=tuple(apply(s, e) for e in self.add),
            delete=tuple(apply(s, e) for e in self.delete),
            actor=apply(s, self.actor) if self.actor is not None else None,
            topic_constraints=tuple(
                (apply(s, p), apply(s, t)) for p, t in self.topic_constraints
            ),
            positive_constraints=tuple(
                apply(s, p) for p in self.positive_constraints
            ),
        )


def rename_operator(op: Operator, counter: int) -> tuple[Operator, int]:
    """Fresh-variable copy of an operator schema."""
    packed: Term = Compound(
        "op",
        (
            op.head(),
            _pack(op.preconditions),
            _pack(op.add),
            _pack(op.delete),
            op.actor if op.actor is not None else Atom("nil"),
            _pack(tuple(Compound("c", (p, t)) for p, t in op.topic_constraints)),
            _pack(op.positive_constraints),
        ),
    )
    renamed, counter = rename_apart(packed, counter)
    assert isinstance(renamed, Compound)
    head, pre, add, dele, actor, cons, positive = renamed.args
    args = head.args if isinstance(head, Compound) else ()
    constraints = tuple(
        (c.args[0], c.args[1]) for c in _unpack(cons) if isinstance(c, Compound)
    )
    return (
        Operator(
            name=op.name,
            args=tuple(args),
            preconditions=_unpack(pre),
            add=_unpack(add),
            delete=_unpack(dele),
            actor=None if op.actor is None else actor,
            topic_constraints=constraints,
            positive_constraints=_unpack(positive),
        ),
        counter,
    )


def _pack(ts: tuple[Term, ...]) -> Term:
    if not ts:
        return Atom("nil")
    return Compound("l", ts)


def _unpack(t: Term) -> tuple[Term, ...]:
    if isinstance(t, Atom) and t.name == "nil":
        return ()
    assert isinstance(t, Compound)
    return t.args


@dataclass(frozen=True)
class CausalLink:
    producer: int
    condition: Term
    consumer: int


@dataclass(frozen=True)
class Plan:
    """A complete partial-order plan. Steps exclude the init/goal pseudo-steps."""

    steps: dict[int, Operator]
    initial: tuple[Term, ...]
    goal_conditions: tuple[Term, ...]
    orderings: frozenset[tuple[int, int]]
    links: frozenset[CausalLink]
    open: tuple[tuple[int, Term], ...] = ()

    def is_complete(self) -> bool:
        return not self.open

    def step_ids(self) -> list[int]:
        return sorted(self.steps)


def cost(p: Plan) -> int:
    """Number of plan steps, pseudo-steps excluded."""
    if not p.is_complete():
        raise IncompletePlanError("cost is defined for complete plans only")
    return len(p.steps)


def _reachable(orderings: frozenset[tuple[int, int]], start: int) -> set[int]:
    succ: dict[int, list[int]] = {}
    for a, b in orderings:
        succ.setdefault(a, []).append(b)
    seen: set[int] = set()
    stack = [start]
    while stack:
        node = stack.pop()
        for nxt in succ.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _ordered_before(orderings: frozenset[tuple[int, int]], a: int, b: int) -> bool:
    return b in _reachable(orderings, a)


def linearize(p: Plan) -> list[int]:
    """Total order of step ids consistent with the ordering constraints.

    Deterministic: among ready steps the smallest id goes first.
    """
    if not p.is_complete():
        raise IncompletePlanError("linearize is defined for complete plans only")
    ids = set(p.steps)
    indeg: dict[int, int] = {i: 0 for i in ids}
    succ: dict[int, list[int]] = {i: [] for i in ids}
    for a, b in p.orderings:
        if a in ids and b in ids:
            succ[a].append(b)
            indeg[b] += 1
    ready = [i for i in sorted(ids) if indeg[i] == 0]
    heapq.heapify(ready)
    out: list[int] = []
    while ready:
        node = heapq.heappop(ready)
        out.append(node)
        for nxt in sorted(succ[node]):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(out) != len(ids):
        raise CycleError("ordering constraints contain a cycle")
    return out


def simulate(initial: list[Term] | tuple[Term, ...], seq: list[Operator]) -> set[Term]:
    """Run a ground operator sequence forward; error at the first unmet precondition."""
    state = set(initial)
    for i, op in enumerate(seq):
        if not is_ground(op.head()):
            raise PlannerError(f"simulate needs ground operators, got {render(op.head())}")
        for cond in op.preconditions:
            if cond not in state:
                raise PreconditionFailure(i, cond)
        state -= set(op.delete)
        state |= set(op.add)
    return state


def asserted_states(p: Plan) -> list[tuple[int, Term]]:
    """Initial facts and every step's add-effects, tagged with the producer.

    Order: init facts first, then steps in linearization order; the first
    producer of a repeated term wins.
    """
    if not p.is_complete():
        raise IncompletePlanError("asserted_states is defined for complete plans only")
    out: list[tuple[int, Term]] = []
    seen: set[Term] = set()
    for f in p.initial:
        if f not in seen:
            seen.add(f)
            out.append((INIT_ID, f))
    for sid in linearize(p):
        for e in p.steps[sid].add:
            if e not in seen:
                seen.add(e)
                out.append((sid, e))
    return out


def exclusive_states(a: Plan, b: Plan) -> list[Term]:
    """States asserted in a that unify with no state asserted in b."""
    b_states = [t for _, t in asserted_states(b)]
    out: list[Term] = []
    for _, t in asserted_states(a):
        if any(unify(t, bt) is not None for bt in b_states):
            continue
        if t not in out:
            out.append(t)
    return out


@dataclass(frozen=True)
class Completion:
    """An ordered sub-plan grafted from an entry state to an extra goal."""

    actions: tuple[Operator, ...]
    entry_state: Term
    achieved_goal: Term

    def __post_init__(self) -> None:
        if not self.actions:
            raise PlannerError("a completion has at least one action")


# ---------------------------------------------------------------------------
# Systematic causal-link search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Node:
    steps: tuple[tuple[int, Operator], ...]
    agenda: tuple[tuple[int, Term], ...]
    orderings: frozenset[tuple[int, int]]
    links: tuple[CausalLink, ...]
    subst: Substitution
    threats: tuple[tuple[CausalLink, int], ...]
    constraints: tuple["Constraint", ...]
    counter: int


@dataclass
class _Problem:
    initial: tuple[Term, ...]
    goal: tuple[Term, ...]
    ops: tuple[Operator, ...]
    limit: int
    hit_limit: bool = field(default=False)

    def add_effects(self, node: _Node, sid: int) -> tuple[Term, ...]:
        if sid == INIT_ID:
            return self.initial
        for i, op in node.steps:
            if i == sid:
                return op.add
        return ()

    def step_op(self, node: _Node, sid: int) -> Operator | None:
        for i, op in node.steps:
            if i == sid:
                return op
        return None


def _strip_not(t: Term, s: Substitution) -> Term:
    t = s.walk(t)
    while isinstance(t, Compound) and t.functor == "not" and len(t.args) == 1:
        t = s.walk(t.args[0])
    return t


Constraint = tuple[str, Term, "Term | None"]


def _constraints_of(op: Operator) -> tuple[Constraint, ...]:
    out: list[Constraint] = [("topic", p, t) for p, t in op.topic_constraints]
    out.extend(("positive", p, None) for p in op.positive_constraints)
    return tuple(out)


def _propagate_constraints(
    subst: Substitution, constraints: tuple[Constraint, ...]
) -> tuple[Substitution, tuple[Constraint, ...]] | None:
    """Resolve topic/positivity constraints as bindings land; None on clash."""
    pending = list(constraints)
    changed = True
    while changed:
        changed = False
        rest: list[Constraint] = []
        for kind, p, t in pending:
            if kind == "positive":
                w = subst.walk(p)
                if isinstance(w, Var):
                    rest.append((kind, p, t))
                    continue
                if isinstance(w, Compound) and w.functor == "not" and len(w.args) == 1:
                    return None
                continue
            w = _strip_not(p, subst)
            if isinstance(w, Var):
                rest.append((kind, p, t))
                continue
            functor = w.functor if isinstance(w, Compound) else w.name
            assert t is not None
            u = unify(t, Atom(functor), subst)
            if u is None:
                return None
            if u is not subst:
                subst = u
                changed = True
        pending = rest
    return subst, tuple(pending)


def _is_threat(
    prob: _Problem, node: _Node, link: CausalLink, sid: int
) -> bool:
    """Necessary threat: the step's effect equals the protected condition
    under the current bindings and the step could come between.

    Possibly-unifying pairs are left alone (promotion/demotion without
    separation would over-commit); they are re-checked by the final sweep
    once bindings are settled.
    """
    if sid in (link.producer, link.consumer, INIT_ID, GOAL_ID):
        return False
    if _ordered_before(node.orderings, sid, link.producer):
        return False
    if _ordered_before(node.orderings, link.consumer, sid):
        return False
    op = prob.step_op(node, sid)
    if op is None:
        return False
    cond = apply(node.subst, link.condition)
    for e in op.add + op.delete:
        if apply(node.subst, e) == cond:
            return True
    return False


def _new_threats(prob: _Problem, node: _Node) -> tuple[tuple[CausalLink, int], ...]:
    found: list[tuple[CausalLink, int]] = []
    for link in node.links:
        for sid, _ in node.steps:
            if _is_threat(prob, node, link, sid):
                found.append((link, sid))
    return tuple(found)


def _add_ordering(
    orderings: frozenset[tuple[int, int]], a: int, b: int
) -> frozenset[tuple[int, int]] | None:
    if a == b:
        return None
    if (a, b) in orderings:
        return orderings
    if _ordered_before(orderings, b, a):
        return None
    return orderings | {(a, b)}


def _with_link(
    prob: _Problem, node: _Node, producer: int, cond: Term, consumer: int, subst: Substitution
) -> _Node | None:
    propagated = _propagate_constraints(subst, node.constraints)
    if propagated is None:
        return None
    subst, constraints = propagated
    orderings = node.orderings
    if producer != INIT_ID:
        maybe = _add_ordering(orderings, producer, consumer)
        if maybe is None:
            return None
        orderings = maybe
    link = CausalLink(producer, cond, consumer)
    candidate = replace(
        node,
        orderings=orderings,
        links=node.links + (link,),
        subst=subst,
        constraints=constraints,
    )
    threats = candidate.threats + _new_threats(prob, candidate)
    # queued plus freshly detected, deduped; stale entries drop at pop time
    seen: set[tuple[int, str, int, int]] = set()
    unique: list[tuple[CausalLink, int]] = []
    for t_link, t_sid in threats:
        key = (t_link.producer, render(t_link.condition), t_link.consumer, t_sid)
        if key not in seen:
            seen.add(key)
            unique.append((t_link, t_sid))
    return replace(candidate, threats=tuple(unique))


def _expand(prob: _Problem, node: _Node) -> list[_Node] | None:
    """Children of a search node; None when the node is complete."""
    # resolve threats first
    while node.threats:
        (link, sid), rest = node.threats[0], node.threats[1:]
        node = replace(node, threats=rest)
        if not _is_threat(prob, node, link, sid):
            continue
        children = []
        promoted = _add_ordering(node.orderings, sid, link.producer)
        if promoted is not None:
            children.append(replace(node, orderings=promoted))
        demoted = _add_ordering(node.orderings, link.consumer, sid)
        if demoted is not None:
            children.append(replace(node, orderings=demoted))
        return children
    if not node.agenda:
        # final sweep: with bindings settled, catch threats that were only
        # possible (not necessary) when their link or step appeared
        swept = _new_threats(prob, node)
        if swept:
            return [replace(node, threats=swept)]
        return None
    (consumer, cond), agenda = node.agenda[0], node.agenda[1:]
    node = replace(node, agenda=agenda)
    children: list[_Node] = []
    producers = [INIT_ID] + [sid for sid, _ in node.steps]
    for pid in producers:
        if pid == consumer:
            continue
        if _ordered_before(node.orderings, consumer, pid):
            continue
        for e in prob.add_effects(node, pid):
            u = unify(e, cond, node.subst)
            if u is None:
                continue
            child = _with_link(prob, node, pid, cond, consumer, u)
            if child is not None:
                children.append(child)
    if len(node.steps) < prob.limit:
        for op in prob.ops:
            renamed, counter = rename_operator(op, node.counter)
            for e in renamed.add:
                u = unify(e, cond, node.subst)
                if u is None:
                    continue
                sid = FIRST_STEP_ID + len(node.steps)
                orderings = node.orderings | {(INIT_ID, sid), (sid, GOAL_ID)}
                base = replace(
                    node,
                    steps=node.steps + ((sid, renamed),),
                    agenda=node.agenda + tuple((sid, p) for p in renamed.preconditions),
                    orderings=orderings,
                    constraints=node.constraints + _constraints_of(renamed),
                    counter=counter,
                )
                child = _with_link(prob, base, sid, cond, consumer, u)
                if child is not None:
                    children.append(child)
    else:
        prob.hit_limit = True
    return children


def _finish(prob: _Problem, node: _Node) -> Plan | None:
    s = node.subst
    if node.constraints:
        resolved = _propagate_constraints(s, node.constraints)
        if resolved is None or resolved[1]:
            return None
        s = resolved[0]
    steps: dict[int, Operator] = {}
    for sid, op in node.steps:
        ground_op = op.substituted(s)
        parts = (ground_op.head(),) + ground_op.preconditions + ground_op.add + ground_op.delete
        if not all(is_ground(part) for part in parts):
            return None
        steps[sid] = ground_op
    links = frozenset(
        CausalLink(l.producer, apply(s, l.condition), l.consumer) for l in node.links
    )
    return Plan(
        steps=steps,
        initial=prob.initial,
        goal_conditions=tuple(apply(s, g) for g in prob.goal),
        orderings=node.orderings,
        links=links,
    )


def _search_depth(
    prob: _Problem, root: _Node, required: int | None, require_connected: bool
) -> list[Plan]:
    plans: list[Plan] = []
    stack = [root]
    while stack and len(plans) < _MAX_COLLECTED:
        node = stack.pop()
        children = _expand(prob, node)
        if children is None:
            plan = _finish(prob, node)
            if plan is None:
                continue
            if require_connected and required is not None:
                if not _supports_goal(plan, required):
                    continue
            plans.append(plan)
            continue
        stack.extend(reversed(children))
    return plans


def _supports_goal(plan: Plan, sid: int) -> bool:
    succ: dict[int, list[int]] = {}
    for link in plan.links:
        succ.setdefault(link.producer, []).append(link.consumer)
    seen: set[int] = set()
    stack = [sid]
    while stack:
        node = stack.pop()
        if node == GOAL_ID:
            return True
        for nxt in succ.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def _plan_key(p: Plan) -> tuple:
    order = linearize(p)
    names = tuple(p.steps[sid].name for sid in order)
    heads = tuple(render(p.steps[sid].head()) for sid in order)
    links = tuple(
        sorted(
            (l.producer, render(l.condition), l.consumer) for l in p.links
        )
    )
    return (names, heads, links, tuple(sorted(p.orderings)))


def plan(
    initial: list[Term] | tuple[Term, ...],
    goal: Term | list[Term] | tuple[Term, ...],
    ops: list[Operator] | tuple[Operator, ...],
    bound: int = DEFAULT_BOUND,
    required_step: Operator | None = None,
    require_connected: bool = False,
    trace: Trace | None = None,
) -> Plan | None:
    """Minimal-cost complete plan within the step bound, or None.

    ``required_step`` pre-seeds a mandatory (ground) step; with
    ``require_connected`` the plan must also route a causal-link path from
    that step to the goal.  Iterative deepening on step count guarantees
    minimality; ties break lexicographically on the operator name sequence.
    """
    if bound < 1:
        raise PlannerError("bound must be >= 1")
    initial = tuple(initial)
    for f in initial:
        if not is_ground(f):
            raise PlannerError(f"initial facts must be ground, got {render(f)}")
    goals = tuple(goal) if isinstance(goal, (list, tuple)) else (goal,)
    ops = tuple(ops)

    steps: tuple[tuple[int, Operator], ...] = ()
    agenda: list[tuple[int, Term]] = [(GOAL_ID, g) for g in goals]
    orderings: frozenset[tuple[int, int]] = frozenset({(INIT_ID, GOAL_ID)})
    constraints: tuple[Constraint, ...] = ()
    if required_step is not None:
        if not is_ground(required_step.head()):
            raise PlannerError("required step must be ground")
        steps = ((FIRST_STEP_ID, required_step),)
        orderings = orderings | {(INIT_ID, FIRST_STEP_ID), (FIRST_STEP_ID, GOAL_ID)}
        agenda.extend((FIRST_STEP_ID, p) for p in required_step.preconditions)
        constraints = _constraints_of(required_step)

    root = _Node(
        steps=steps,
        agenda=tuple(agenda),
        orderings=orderings,
        links=(),
        subst=EMPTY_SUBST,
        threats=(),
        constraints=constraints,
        counter=0,
    )
    start = len(steps)
    prob = _Problem(initial=initial, goal=goals, ops=ops, limit=start)
    for limit in range(start, bound + 1):
        prob.limit = limit
        prob.hit_limit = False
        plans = _search_depth(
            prob,
            root,
            FIRST_STEP_ID if required_step is not None else None,
            require_connected,
        )
        if plans:
            best = min(plans, key=_plan_key)
            if trace:
                trace.emit(
                    "planner",
                    "plan-found",
                    cost=cost(best),
                    steps=[render(best.steps[s].head()) for s in linearize(best)],
                )
            return best
    if trace:
        trace.emit(
            "planner",
            "plan-none",
            cause="bound-exceeded" if prob.hit_limit else "unsolvable",
            bound=bound,
        )
    return None


# ---------------------------------------------------------------------------
# Completion search
# ---------------------------------------------------------------------------


def _ground_instances(
    op: Operator, state: frozenset[Term]
) -> list[Operator]:
    """All ground instantiations of op whose preconditions hold in state."""
    facts = sorted(state, key=render)
    results: list[Operator] = []

    def match(i: int, s: Substitution) -> None:
        if i == len(op.preconditions):
            propagated = _propagate_constraints(s, _constraints_of(op))
            if propagated is None or propagated[1]:
                return
            inst = op.substituted(propagated[0])
            if is_ground(inst.head()) and inst not in results:
                results.append(inst)
            return
        for f in facts:
            u = unify(op.preconditions[i], f, s)
            if u is not None:
                match(i + 1, u)

    renamed, _ = rename_operator(op, 0)
    op = renamed
    match(0, EMPTY_SUBST)
    return results


def complete_from(
    state: Term,
    goal: Term,
    ops: list[Operator] | tuple[Operator, ...],
    bound: int,
    ambient: set[Term] | frozenset[Term],
) -> Completion | None:
    """Shortest nonempty action sequence from `state` to `goal`.

    The first action must have a precondition unifying with `state`; every
    action executes in the ambient context (breadth-first, deterministic
    expansion order).  `goal` may contain variables; it is satisfied when it
    unifies with a fact of the reached state.
    """
    if bound < 1:
        raise PlannerError("bound must be >= 1")
    start = frozenset(ambient)
    frontier: list[tuple[frozenset[Term], tuple[Operator, ...]]] = [(start, ())]
    visited: set[frozenset[Term]] = {start}
    for depth in range(bound):
        nxt: list[tuple[frozenset[Term], tuple[Operator, ...]]] = []
        for current, seq in frontier:
            for op in ops:
                for inst in _ground_instances(op, current):
                    if not seq:
                        entry = None
                        for pre in inst.preconditions:
                            u = unify(pre, state)
                            if u is not None:
                                entry = apply(u, state)
                                break
                        if entry is None:
                            continue
                    new_state = frozenset((current - set(inst.delete)) | set(inst.add))
                    new_seq = seq + (inst,)
                    for f in sorted(new_state, key=render):
                        u = unify(goal, f)
                        if u is not None:
                            return Completion(
                                actions=new_seq,
                                entry_state=state,
                                achieved_goal=apply(u, goal),
                            )
                    if new_state not in visited:
                        visited.add(new_state)
                        nxt.append((new_state, new_seq))
        frontier = nxt
        if not frontier:
            break
    return None


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def _dot_escape(s: str) -> str:
    return s.replace('"', '\\"')


def to_dot(p: Plan, overlay: Completion | None = None) -> str:
    """DOT digraph of a plan: one node per step, solid edges for causal
    links labeled with the condition, dashed edges for pure ordering, and a
    dashed overlay for a completion."""
    if not p.is_complete():
        raise IncompletePlanError("to_dot is defined for complete plans only")
    lines = ["digraph plan {", "  rankdir=TB;", '  init [shape=box, label="init"];']
    goal_label = " & ".join(render(g) for g in p.goal_conditions)
    lines.append(f'  goal [shape=box, label="{_dot_escape(goal_label)}"];')
    for sid in linearize(p):
        label = _dot_escape(render(p.steps[sid].head()))
        lines.append(f'  s{sid} [label="{label}"];')

    def node(sid: int) -> str:
        if sid == INIT_ID:
            return "init"
        if sid == GOAL_ID:
            return "goal"
        return f"s{sid}"

    linked: set[tuple[int, int]] = set()
    for link in sorted(
        p.links, key=lambda l: (l.producer, l.consumer, render(l.condition))
    ):
        linked.add((link.producer, link.consumer))
        lines.append(
            f'  {node(link.producer)} -> {node(link.consumer)} '
            f'[label="{_dot_escape(render(link.condition))}"];'
        )
    for a, b in sorted(p.orderings):
        if (a, b) in linked or a == INIT_ID or b == GOAL_ID:
            continue
        lines.append(f"  {node(a)} -> {node(b)} [style=dashed];")
    if overlay is not None:
        producer = "init"
        for sid, t in asserted_states(p):
            if t == overlay.entry_state:
                producer = node(sid)
                break
        prev = producer
        for i, action in enumerate(overlay.actions):
            name = f"c{i}"
            label = _dot_escape(render(action.head()))
            lines.append(f'  {name} [label="{label}", style=dashed];')
            edge_label = (
                _dot_escape(render(overlay.entry_state)) if i == 0 else ""
            )
            lines.append(f'  {prev} -> {name} [style=dashed, label="{edge_label}"];')
            prev = name
        lines.append(
            f'  cgoal [shape=box, style=dashed, '
            f'label="{_dot_escape(render(overlay.achieved_goal))}"];'
        )
        lines.append(f"  {prev} -> cgoal [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
