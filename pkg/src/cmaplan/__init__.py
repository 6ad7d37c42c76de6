"""Sound projection and abstraction of actions with interval probabilities.

Worlds are sets of distributions encoded as interval-weighted trees over
state sets; actions map each state to such a tree. Projection grows the
tree one action at a time and abstraction operators merge actions while
keeping projection sound.
"""

from .abstraction import Derivation, HNode, Hierarchy, inter_abstract, intra_abstract, \
    plan_instantiations, seq_abstract
from .actions import ABSTRACT, CONCRETE, Action, ActionBranch, Plan, identity_action, \
    instantiate_ima, make_action, validate_action
from .cma import Branch, Cma, Node, UtilityFn, check_witness, contains_ma, depth, \
    eu_interval, flatten, flatten_witness, internal, leaf, node_count, sample_ma, to_dot, \
    validate_cma
from .errors import CmaError, CompileError, InvalidModelError, MappingError, ParseError, \
    SpaceMismatchError, WitnessError
from .intervals import ProbInterval
from .mass import MassAssignment, Pd, is_consistent, lower_prob, sample_consistent_pd
from .oracle import ExecTrace, SoundnessReport, check_soundness, sample_exec_plan, spd_project
from .projection import LooseProb, loose_cond_prob, predicted_node_count, project_action, \
    project_plan
from .state_model import Effect, EffectRule, StateSet, StateSpace, compile_condition, \
    compile_effect, parse_condition

__version__ = "0.1.0"

__all__ = [
    "ABSTRACT", "CONCRETE", "Action", "ActionBranch", "Branch", "Cma", "CmaError",
    "CompileError", "Derivation", "Effect", "EffectRule", "ExecTrace", "HNode", "Hierarchy",
    "InvalidModelError", "LooseProb", "MappingError", "MassAssignment", "Node", "ParseError",
    "Pd", "Plan", "ProbInterval", "SoundnessReport", "SpaceMismatchError", "StateSet",
    "StateSpace", "UtilityFn", "WitnessError", "check_soundness", "check_witness",
    "compile_condition", "compile_effect", "contains_ma", "depth", "eu_interval", "flatten",
    "flatten_witness", "identity_action", "instantiate_ima", "inter_abstract", "internal",
    "intra_abstract", "is_consistent", "leaf", "lower_prob", "loose_cond_prob", "make_action",
    "node_count", "parse_condition", "plan_instantiations", "predicted_node_count",
    "project_action", "project_plan", "sample_consistent_pd", "sample_exec_plan", "sample_ma",
    "seq_abstract", "spd_project", "to_dot", "validate_action", "validate_cma",
]
