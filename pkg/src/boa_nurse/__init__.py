"""Rule-string estimation-of-distribution solver for weekly nurse scheduling."""

from .bayesnet import ChainModel, learn, sample, sample_many, string_probability
from .engine import Mode, RunConfig, RunReport, run
from .fitness import Roster, fitness
from .generator import GeneratorSpec, generate
from .instance import (Instance, Nurse, PatternKind, ShiftPattern, coverage_of, feasible_set,
                       load_instance, save_instance, validate)
from .rules import ContributionWeights, DecodeParams, RuleId, decode

__version__ = "0.1.0"
