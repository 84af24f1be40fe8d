"""Implicature inference: plan recognition, efficiency audit, goal ascription.

Given an utterance, the hearer recognizes the cheapest plan that routes the
utterance to one of the candidate goals ascribable to the speaker.  The
recognized plan is then audited by re-planning the same goal without the
utterance; if the re-planned optimum is strictly cheaper, the speaker's
choice needs explaining and the engine tries to ascribe either

* a conjunctive goal: an extra goal reachable by a completion from a state
  only the recognized plan asserts, such that the recognized plan plus the
  completion is the optimal way to satisfy both goals together; or
* an avoidance goal: a state reachable from a state only the bypassed
  optimal plan asserts, by a completion in which the speaker plays no part,
  ascribed negated.

Successful ascriptions land in the hearer's view of the speaker.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count

from .acts import (
    ActInstance,
    ActSchema,
    CONTENT,
    HEARER,
    SPEAKER,
    accommodate_preconditions,
    apply_hearer_update,
    apply_speaker_update,
    check_expectation,
)
from .beliefs import (
    Attitude,
    BeliefStore,
    Stereotype,
    default_ascribe,
    render_store,
)
from .planner import (
    Completion,
    Operator,
    Plan,
    asserted_states,
    complete_from,
    cost,
    exclusive_states,
    linearize,
    plan,
    rename_operator,
    simulate,
)
from .terms import (
    Atom,
    Compound,
    Substitution,
    Term,
    apply,
    is_ground,
    rename_apart,
    render,
    struct,
    unify,
    var,
)
from .trace import Trace

_MODULE = "implicature"


class InferenceError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Compiling dialogue machinery into planner operators
# ---------------------------------------------------------------------------


def act_operator(schema: ActSchema) -> Operator:
    """Planner operator for a speech act.

    Preconditions are the speaker's attitudes (plus the pending-question
    fact for answer acts); add-effects are the hearer-side belief updates.
    """
    pre: list[Term] = [
        Compound(c.kind, (SPEAKER, c.content)) for c in schema.preconditions
    ]
    add: list[Term] = list(schema.effects)
    if schema.needs_expectation:
        pre.append(struct("answer_expected", SPEAKER, HEARER, CONTENT))
    if schema.registers_expectation:
        add.append(struct("answer_expected", HEARER, SPEAKER, CONTENT))
    return Operator(
        name=schema.name,
        args=(SPEAKER, HEARER, CONTENT),
        preconditions=tuple(pre),
        add=tuple(add),
        actor=SPEAKER,
        positive_constraints=(CONTENT,),
    )


def accept_belief_operator() -> Operator:
    """The hearer adopts a communicated proposition from a reliable source."""
    h, s, p, t = var("h"), var("s"), var("p"), var("t")
    return Operator(
        name="accept_belief",
        args=(h, s, p),
        preconditions=(
            struct("bel", h, struct("bel", s, p)),
            struct("reliable", s, t),
        ),
        add=(struct("bel", h, p),),
        actor=h,
        topic_constraints=((p, t),),
    )


def utterance_operator(act: ActInstance, schemas: dict[str, ActSchema]) -> Operator:
    """Ground planner step for one performed act."""
    if act.schema not in schemas:
        raise InferenceError(f"unknown act schema {act.schema!r}")
    template = act_operator(schemas[act.schema])
    s = Substitution(
        {
            SPEAKER.name: Atom(act.speaker),
            HEARER.name: Atom(act.hearer),
            CONTENT.name: act.content,
        }
    )
    return template.substituted(s)


def build_operators(
    schemas: dict[str, ActSchema], extra: tuple[Operator, ...] = ()
) -> tuple[Operator, ...]:
    """The full, deterministically ordered planner operator set."""
    ops = [accept_belief_operator()]
    ops.extend(act_operator(schemas[name]) for name in sorted(schemas))
    ops.extend(extra)
    return tuple(ops)


@dataclass(frozen=True)
class Domain:
    """Everything inference needs beyond the store: schemas, compiled
    operators, stereotypes, declared goal libraries and search settings."""

    schemas: dict[str, ActSchema]
    operators: tuple[Operator, ...]
    stereotypes: tuple[Stereotype, ...] = ()
    declared_goals: tuple[Term, ...] = ()
    avoid_goals: tuple[Term, ...] = ()
    bound: int = 8
    ascription_order: tuple[str, ...] = ("conjunctive", "avoidance")


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecognitionResult:
    utterance: ActInstance
    ascribed_goal: Term
    plan_r: Plan
    candidate_rank: int
    #: Planning state the recognition ran from (pre-utterance snapshot plus
    #: goal-hypothesis seeds); the audit replans from the same state.
    initial: tuple[Term, ...]


@dataclass(frozen=True)
class EfficiencyVerdict:
    kind: str  # "optimal" | "inefficient"
    plan_o: Plan | None
    cost_r: int
    cost_o: int | None

    def __post_init__(self) -> None:
        if self.kind == "inefficient":
            assert self.cost_o is not None and self.cost_o < self.cost_r


@dataclass(frozen=True)
class AscriptionReport:
    kind: str  # "conjunctive" | "avoidance" | "none"
    goal: Term | None = None
    intentions: tuple[Term, ...] = ()
    exclusive_state: Term | None = None
    completion: Completion | None = None
    conditions: tuple[tuple[str, bool], ...] = ()

    def __post_init__(self) -> None:
        checked = dict(self.conditions)
        if self.kind == "conjunctive":
            assert self.intentions, "conjunctive ascription carries intentions"
            assert checked.get("exclusiveness") and checked.get("efficiency")
        if self.kind == "avoidance":
            assert not self.intentions
            assert checked.get("exclusiveness") and checked.get("causality")


@dataclass(frozen=True)
class InferenceOutcome:
    store: BeliefStore
    recognition: RecognitionResult | None
    verdict: EfficiencyVerdict | None
    report: AscriptionReport


# ---------------------------------------------------------------------------
# Candidate goals
# ---------------------------------------------------------------------------


def _goal_parts(g: Term) -> tuple[str, Term] | None:
    if isinstance(g, Compound) and g.functor == "goal" and len(g.args) == 2:
        agent = g.args[0]
        if isinstance(agent, Atom):
            return agent.name, g.args[1]
    return None


def candidate_goals(
    store: BeliefStore, hearer: str, speaker: str, domain: Domain
) -> list[Term]:
    """Goals ascribable to the speaker, most likely first.

    Discourse-expectation goals (the yes/no goals of a pending question the
    speaker owes an answer to) come first, then stereotype goal libraries
    for stereotypes the speaker belongs to, then scenario-declared goals.
    """
    out: list[Term] = []

    def push(g: Term) -> None:
        if g not in out:
            out.append(g)

    for exp in store.expectations:
        if exp.answerer != speaker or exp.asker != hearer:
            continue
        p = exp.content
        push(struct("goal", Atom(speaker), struct("bel", Atom(exp.asker), p)))
        push(
            struct(
                "goal", Atom(speaker), struct("bel", Atom(exp.asker), struct("not", p))
            )
        )
    for st in domain.stereotypes:
        if speaker not in st.members:
            continue
        for g in st.goal_library:
            parts = _goal_parts(g)
            if parts and parts[0] == speaker:
                push(g)
    for g in domain.declared_goals:
        parts = _goal_parts(g)
        if parts and parts[0] == speaker:
            push(g)
    return out


# ---------------------------------------------------------------------------
# Recognition
# ---------------------------------------------------------------------------


def _seeds_for(goal_term: Term) -> list[Term]:
    """Hypothesis facts granted when testing a candidate goal.

    Ascribing goal G to the speaker licenses assuming the speaker holds G,
    and (sincerity) believes whatever G wants someone else to believe.
    Non-ground seeds are dropped.
    """
    seeds: list[Term] = []
    parts = _goal_parts(goal_term)
    if parts is None:
        return seeds
    agent, content = parts
    if is_ground(goal_term):
        seeds.append(goal_term)
    if (
        isinstance(content, Compound)
        and content.functor == "bel"
        and len(content.args) == 2
        and isinstance(content.args[0], Atom)
        and content.args[0].name != agent
    ):
        sincere = struct("bel", Atom(agent), content.args[1])
        if is_ground(sincere):
            seeds.append(sincere)
    return seeds


def _dedupe(terms: list[Term]) -> tuple[Term, ...]:
    out: list[Term] = []
    for t in terms:
        if t not in out:
            out.append(t)
    return tuple(out)


def _canonical(t: Term) -> str:
    renamed, _ = rename_apart(t, 0)
    return render(renamed)


def _utterance_relevant(
    u_op: Operator, goal_conds: tuple[Term, ...], ops: tuple[Operator, ...]
) -> bool:
    """Backward-reachability prefilter: can any utterance effect feed the goal?

    Regression fixpoint over operator add-effects, over-approximating the
    conditions a plan for the goal could ever need; a candidate is only
    searched when some utterance add-effect unifies with one of them.
    """
    relevant: list[Term] = list(goal_conds)
    seen = {_canonical(t) for t in relevant}
    counter = count(1)
    frontier = list(relevant)
    while frontier and len(relevant) < 400:
        cond = frontier.pop(0)
        for op in ops:
            renamed, _ = rename_operator(op, 10_000 * next(counter))
            for e in renamed.add:
                u = unify(e, cond)
                if u is None:
                    continue
                for pre in renamed.preconditions:
                    inst = apply(u, pre)
                    key = _canonical(inst)
                    if key not in seen:
                        seen.add(key)
                        relevant.append(inst)
                        frontier.append(inst)
    return any(
        unify(e, r) is not None for e in u_op.add for r in relevant
    )


def recognize(
    store: BeliefStore,
    utterance: ActInstance,
    candidates: list[Term],
    domain: Domain,
    bound: int | None = None,
    snapshot: tuple[Term, ...] | None = None,
    trace: Trace | None = None,
) -> RecognitionResult | None:
    """Cheapest plan containing the utterance that reaches a candidate goal.

    Candidates are tried in order; the first reachable one wins.  The plan
    must route a causal-link path from the utterance step to the goal, not
    merely contain it.
    """
    bound = bound if bound is not None else domain.bound
    if snapshot is None:
        snapshot = tuple(render_store(store))
    u_op = utterance_operator(utterance, domain.schemas)
    base = _dedupe(list(snapshot) + list(u_op.preconditions))
    for rank, g in enumerate(candidates):
        parts = _goal_parts(g)
        if parts is None:
            continue
        _, content = parts
        initial = _dedupe(list(base) + _seeds_for(g))
        if not _utterance_relevant(u_op, (content,), domain.operators):
            if trace:
                trace.emit(
                    _MODULE, "candidate-skipped", goal=render(g), cause="irrelevant-utterance"
                )
            continue
        p = plan(
            initial,
            content,
            domain.operators,
            bound=bound,
            required_step=u_op,
            require_connected=True,
        )
        if p is not None:
            if trace:
                trace.emit(
                    _MODULE,
                    "plan-found",
                    goal=render(g),
                    cost=cost(p),
                    rank=rank,
                    steps=[render(p.steps[s].head()) for s in linearize(p)],
                )
            return RecognitionResult(
                utterance=utterance,
                ascribed_goal=g,
                plan_r=p,
                candidate_rank=rank,
                initial=initial,
            )
        if trace:
            trace.emit(_MODULE, "candidate-skipped", goal=render(g), cause="unreachable")
    return None


def efficiency_audit(
    r: RecognitionResult, domain: Domain, bound: int | None = None, trace: Trace | None = None
) -> EfficiencyVerdict:
    """Re-plan the recognized goal without requiring the utterance."""
    bound = bound if bound is not None else domain.bound
    parts = _goal_parts(r.ascribed_goal)
    assert parts is not None
    _, content = parts
    po = plan(r.initial, content, domain.operators, bound=bound)
    cr = cost(r.plan_r)
    if po is None or cost(po) >= cr:
        verdict = EfficiencyVerdict(
            kind="optimal", plan_o=po, cost_r=cr, cost_o=cost(po) if po else None
        )
    else:
        verdict = EfficiencyVerdict(
            kind="inefficient", plan_o=po, cost_r=cr, cost_o=cost(po)
        )
    if trace:
        trace.emit(
            _MODULE,
            "audit",
            verdict=verdict.kind,
            cost_recognized=verdict.cost_r,
            cost_optimal=verdict.cost_o,
        )
    return verdict


# ---------------------------------------------------------------------------
# Goal ascription rules
# ---------------------------------------------------------------------------


def _terminal_state(initial: tuple[Term, ...], p: Plan) -> set[Term]:
    return simulate(initial, [p.steps[sid] for sid in linearize(p)])


def _goal_library(domain: Domain, speaker: str, exclude: Term) -> list[Term]:
    out: list[Term] = []
    for st in domain.stereotypes:
        if speaker not in st.members:
            continue
        for g in st.goal_library:
            parts = _goal_parts(g)
            if parts and parts[0] == speaker and g not in out:
                out.append(g)
    for g in domain.declared_goals:
        parts = _goal_parts(g)
        if parts and parts[0] == speaker and g not in out:
            out.append(g)
    return [g for g in out if unify(g, exclude) is None]


def ascribe_conjunctive(
    store: BeliefStore,
    r: RecognitionResult,
    verdict: EfficiencyVerdict,
    domain: Domain,
    bound: int | None = None,
    trace: Trace | None = None,
) -> tuple[BeliefStore, AscriptionReport | None]:
    """Try to explain the inefficiency as an extra goal served en route.

    Searches (exclusive state of the recognized plan) x (goal library) for a
    completion; checks exclusiveness by recomputation and the efficiency
    condition by planning the goal conjunction.  On success the goal and the
    completion's actions (as intentions) are ascribed into the hearer's view
    of the speaker.  Later candidates that also pass are traced as
    alternatives.
    """
    if verdict.kind != "inefficient":
        raise InferenceError("conjunctive ascription needs an inefficient verdict")
    assert verdict.plan_o is not None
    bound = bound if bound is not None else domain.bound
    speaker, hearer = r.utterance.speaker, r.utterance.hearer
    pr, po = r.plan_r, verdict.plan_o
    library = _goal_library(domain, speaker, exclude=r.ascribed_goal)
    if not library:
        return store, None
    parts = _goal_parts(r.ascribed_goal)
    assert parts is not None
    _, g1_content = parts
    ambient = _terminal_state(r.initial, pr)
    po_states = [t for _, t in asserted_states(po)]
    winner: AscriptionReport | None = None
    for s_state in exclusive_states(pr, po):
        for g2 in library:
            g2_parts = _goal_parts(g2)
            assert g2_parts is not None
            agent, g2_content = g2_parts
            comp = complete_from(s_state, g2_content, domain.operators, bound, ambient)
            if comp is None:
                continue
            exclusive_ok = all(unify(s_state, t) is None for t in po_states)
            joint_initial = _dedupe(
                list(r.initial)
                + _seeds_for(struct("goal", Atom(agent), comp.achieved_goal))
            )
            joint = plan(
                joint_initial,
                (g1_content, comp.achieved_goal),
                domain.operators,
                bound=bound,
            )
            extended_cost = cost(pr) + len(comp.actions)
            efficiency_ok = joint is not None and cost(joint) == extended_cost
            if trace:
                # both sides of the efficiency condition: the unconstrained
                # joint optimum and the recognized plan plus this completion
                trace.emit(
                    _MODULE,
                    "efficiency-check",
                    goal=render(g2),
                    exclusive_state=render(s_state),
                    joint_optimum=cost(joint) if joint is not None else None,
                    recognized_plus_completion=extended_cost,
                    passed=efficiency_ok,
                )
            if not (exclusive_ok and efficiency_ok):
                if trace:
                    trace.emit(
                        _MODULE,
                        "candidate-skipped",
                        goal=render(g2),
                        exclusive_state=render(s_state),
                        cause="efficiency-condition"
                        if exclusive_ok
                        else "exclusiveness-condition",
                    )
                continue
            g2_inst = struct("goal", Atom(agent), comp.achieved_goal)
            if winner is not None:
                if trace:
                    trace.emit(
                        _MODULE,
                        "alternative",
                        goal=render(g2_inst),
                        exclusive_state=render(s_state),
                    )
                continue
            store = default_ascribe(
                store,
                (hearer,),
                (hearer, speaker),
                Attitude("goal", comp.achieved_goal),
                trace=trace,
                cause="conjunctive-goal",
            ).store
            intentions = tuple(a.head() for a in comp.actions)
            for action_term in intentions:
                store = default_ascribe(
                    store,
                    (hearer,),
                    (hearer, speaker),
                    Attitude("int", action_term),
                    trace=trace,
                    cause="conjunctive-intention",
                ).store
            winner = AscriptionReport(
                kind="conjunctive",
                goal=g2_inst,
                intentions=intentions,
                exclusive_state=s_state,
                completion=comp,
                conditions=(("exclusiveness", True), ("efficiency", True)),
            )
    return store, winner


def ascribe_avoidance(
    store: BeliefStore,
    r: RecognitionResult,
    verdict: EfficiencyVerdict,
    domain: Domain,
    bound: int | None = None,
    trace: Trace | None = None,
) -> tuple[BeliefStore, AscriptionReport | None]:
    """Try to explain the inefficiency as a state the speaker is avoiding.

    Searches (exclusive state of the optimal plan) x (avoidance library) for
    a completion in which the speaker is never the actor; on success the
    negated goal is ascribed into the hearer's view of the speaker.
    """
    if verdict.kind != "inefficient":
        raise InferenceError("avoidance ascription needs an inefficient verdict")
    assert verdict.plan_o is not None
    bound = bound if bound is not None else domain.bound
    speaker, hearer = r.utterance.speaker, r.utterance.hearer
    pr, po = r.plan_r, verdict.plan_o
    if not domain.avoid_goals:
        return store, None
    ambient = _terminal_state(r.initial, po)
    pr_states = [t for _, t in asserted_states(pr)]
    for s_state in exclusive_states(po, pr):
        for ag in domain.avoid_goals:
            comp = complete_from(s_state, ag, domain.operators, bound, ambient)
            if comp is None:
                continue
            causality_ok = all(
                isinstance(a.actor, Atom) and a.actor.name != speaker
                for a in comp.actions
            )
            exclusive_ok = all(unify(s_state, t) is None for t in pr_states)
            if not (causality_ok and exclusive_ok):
                if trace:
                    trace.emit(
                        _MODULE,
                        "candidate-skipped",
                        goal=render(ag),
                        exclusive_state=render(s_state),
                        cause="causality-condition"
                        if exclusive_ok
                        else "exclusiveness-condition",
                    )
                continue
            avoided = struct("not", comp.achieved_goal)
            store = default_ascribe(
                store,
                (hearer,),
                (hearer, speaker),
                Attitude("goal", avoided),
                trace=trace,
                cause="avoidance-goal",
            ).store
            return store, AscriptionReport(
                kind="avoidance",
                goal=avoided,
                intentions=(),
                exclusive_state=s_state,
                completion=comp,
                conditions=(("exclusiveness", True), ("causality", True)),
            )
    return store, None


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------


def infer(
    store: BeliefStore,
    utterance: ActInstance,
    domain: Domain,
    trace: Trace | None = None,
) -> InferenceOutcome:
    """Process one utterance end to end.

    Applies the act-level belief updates, recognizes the dialogue plan,
    audits it against the re-planned optimum, and on an inefficient verdict
    tries the ascription rules in the configured order.  Recognition failure
    is reported but act-level ascriptions stay applied.
    """
    snapshot = tuple(render_store(store))
    check_expectation(store, utterance, domain.schemas)
    candidates = candidate_goals(store, utterance.hearer, utterance.speaker, domain)
    store = accommodate_preconditions(store, utterance, domain.schemas, trace=trace)
    store = apply_speaker_update(store, utterance, domain.schemas, trace=trace)
    store = apply_hearer_update(store, utterance, domain.schemas, trace=trace)
    recognition = recognize(
        store, utterance, candidates, domain, snapshot=snapshot, trace=trace
    )
    if recognition is None:
        if trace:
            trace.emit(
                _MODULE,
                "error",
                cause="recognition-failure",
                utterance=str(utterance),
                candidates=[render(g) for g in candidates],
            )
        return InferenceOutcome(
            store=store,
            recognition=None,
            verdict=None,
            report=AscriptionReport(kind="none"),
        )
    verdict = efficiency_audit(recognition, domain, trace=trace)
    report: AscriptionReport | None = None
    if verdict.kind == "inefficient":
        for rule in domain.ascription_order:
            if rule == "conjunctive":
                store, report = ascribe_conjunctive(
                    store, recognition, verdict, domain, trace=trace
                )
            elif rule == "avoidance":
                store, report = ascribe_avoidance(
                    store, recognition, verdict, domain, trace=trace
                )
            else:
                raise InferenceError(f"unknown ascription rule {rule!r}")
            if report is not None:
                break
    if report is None:
        report = AscriptionReport(kind="none")
    if trace:
        trace.emit(
            _MODULE,
            "ascription-report",
            report=report.kind,
            goal=render(report.goal) if report.goal is not None else None,
            intentions=[render(t) for t in report.intentions],
            exclusive_state=render(report.exclusive_state)
            if report.exclusive_state is not None
            else None,
            completion=[render(a.head()) for a in report.completion.actions]
            if report.completion is not None
            else None,
            conditions={k: v for k, v in report.conditions},
        )
    return InferenceOutcome(
        store=store, recognition=recognition, verdict=verdict, report=report
    )
