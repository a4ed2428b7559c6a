"""Control-flow refinement of constrained Horn clause programs by polyvariant
specialization over a property-based abstract domain."""

from .equiv import EquivReport, differential, sample_goals
from .interp import Outcome, Status, Trace, check_property_soundness, solve
from .linear import FALSE, TRUE, Store, conjoin, entails, project, satisfiable, simplify, substitute
from .properties import (
    AbstractState,
    Property,
    PropertySet,
    abstract,
    delta_D,
    derive_properties,
    gamma,
    parse_properties,
)
from .specialize import Entry, ResidualProgram, SpecConfig, Version, emit, residualize_clause, specialize
from .syntax import (
    AtomicConstraint,
    BodyAtom,
    Clause,
    Goal,
    LinExpr,
    ParseError,
    Program,
    ValidationError,
    parse_goal,
    parse_program,
    print_program,
)

__version__ = "0.1.0"
