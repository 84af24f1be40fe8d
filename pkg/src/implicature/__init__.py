"""Conversational-implicature inference from dialogue-plan inefficiency.

The pipeline: recognize the plan behind a speech act, audit it against a
re-planned optimum that bypasses the utterance, and when the recognized
plan is strictly costlier, ascribe the conjunctive or avoidance goal that
explains the speaker's choice.
"""

from .acts import (
    ActInstance,
    ActSchema,
    accept_belief,
    apply_hearer_update,
    apply_speaker_update,
    builtin_schemas,
)
from .beliefs import (
    Attitude,
    BeliefStore,
    Stereotype,
    assert_attitude,
    contrary_evidence,
    default_ascribe,
    holds,
    stereotype_ascribe,
)
from .inference import (
    AscriptionReport,
    Domain,
    EfficiencyVerdict,
    InferenceOutcome,
    RecognitionResult,
    ascribe_avoidance,
    ascribe_conjunctive,
    candidate_goals,
    efficiency_audit,
    infer,
    recognize,
)
from .planner import (
    CausalLink,
    Completion,
    Operator,
    Plan,
    asserted_states,
    complete_from,
    cost,
    exclusive_states,
    linearize,
    plan,
    simulate,
    to_dot,
)
from .scenario import Scenario, emit_dot, emit_json, load_scenario, parse_trace, run
from .terms import Atom, Compound, Substitution, Term, Var, apply, parse_term, render, unify
from .trace import Trace

__version__ = "0.1.0"

__all__ = [
    "ActInstance",
    "ActSchema",
    "AscriptionReport",
    "Atom",
    "Attitude",
    "BeliefStore",
    "CausalLink",
    "Completion",
    "Compound",
    "Domain",
    "EfficiencyVerdict",
    "InferenceOutcome",
    "Operator",
    "Plan",
    "RecognitionResult",
    "Scenario",
    "Stereotype",
    "Substitution",
    "Term",
    "Trace",
    "Var",
    "accept_belief",
    "apply",
    "apply_hearer_update",
    "apply_speaker_update",
    "ascribe_avoidance",
    "ascribe_conjunctive",
    "assert_attitude",
    "asserted_states",
    "builtin_schemas",
    "candidate_goals",
    "complete_from",
    "contrary_evidence",
    "cost",
    "default_ascribe",
    "efficiency_audit",
    "emit_dot",
    "emit_json",
    "exclusive_states",
    "holds",
    "infer",
    "linearize",
    "load_scenario",
    "parse_term",
    "parse_trace",
    "plan",
    "recognize",
    "render",
    "run",
    "simulate",
    "stereotype_ascribe",
    "to_dot",
    "unify",
]
