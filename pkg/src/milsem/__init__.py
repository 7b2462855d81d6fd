"""Learning small-step evaluation rules from example runs.

A depth-bounded definite-clause solver doubles as a meta-interpreter:
proving the example evaluations forces it to instantiate rule templates,
and the instantiations are the induced semantics.  The rest of the
package is the object language the rules describe (terms, substitution,
a reference interpreter) and the plumbing around the loop (scenario
files, corpora, conformance checking, a command line).
"""

from .terms import (
    Atom,
    Clause,
    Compound,
    Int,
    Program,
    Symbol,
    Term,
    Var,
    atom,
    const,
    fact,
    mk,
    symbol,
    var,
)
from .textio import (
    ParseError,
    parse_atom,
    parse_clause,
    parse_clauses,
    parse_metarule,
    parse_metarules,
    parse_program,
    parse_term,
    print_atom,
    print_clause,
    print_metarule,
    print_program,
    print_term,
)
from .metarules import Metarule, Metasub, Pools, apply_metasub
from .solver import (
    Answers,
    BuiltinError,
    BuiltinTable,
    Outcome,
    SolveConfig,
    Verdict,
    solve,
    solve_all,
)
from .scenario import (
    Example,
    Options,
    ScenarioError,
    ScenarioSpec,
    builtin_scenario,
    builtin_scenario_names,
    load_scenario,
    parse_scenario,
    print_scenario,
)
from .objectlang import (
    ConformanceReport,
    OracleConfig,
    StuckTermError,
    alpha_equal,
    base_bk,
    base_clauses,
    conformance_check,
    default_builtins,
    eval_chain,
    free_vars,
    is_value,
    reference_eval,
    step_once,
    substitute,
)
from .learn import (
    Hypothesis,
    LearnResult,
    LearnStats,
    SeqResult,
    check_example,
    learn,
    learn_seq,
    meta_prove,
)
from .corpus import (
    builtin_corpus,
    builtin_corpus_names,
    generate_corpus,
    load_corpus,
    save_corpus,
)

__version__ = "0.1.0"

__all__ = [
    "Answers",
    "Atom",
    "BuiltinError",
    "BuiltinTable",
    "Clause",
    "Compound",
    "ConformanceReport",
    "Example",
    "Hypothesis",
    "Int",
    "LearnResult",
    "LearnStats",
    "Metarule",
    "Metasub",
    "Options",
    "OracleConfig",
    "Outcome",
    "ParseError",
    "Pools",
    "Program",
    "ScenarioError",
    "ScenarioSpec",
    "SeqResult",
    "SolveConfig",
    "StuckTermError",
    "Symbol",
    "Term",
    "Var",
    "Verdict",
    "alpha_equal",
    "apply_metasub",
    "atom",
    "base_bk",
    "base_clauses",
    "builtin_corpus",
    "builtin_corpus_names",
    "builtin_scenario",
    "builtin_scenario_names",
    "check_example",
    "conformance_check",
    "const",
    "default_builtins",
    "eval_chain",
    "fact",
    "free_vars",
    "generate_corpus",
    "is_value",
    "learn",
    "learn_seq",
    "load_corpus",
    "load_scenario",
    "meta_prove",
    "mk",
    "parse_atom",
    "parse_clause",
    "parse_clauses",
    "parse_metarule",
    "parse_metarules",
    "parse_program",
    "parse_scenario",
    "parse_term",
    "print_atom",
    "print_clause",
    "print_metarule",
    "print_program",
    "print_scenario",
    "print_term",
    "reference_eval",
    "save_corpus",
    "solve",
    "solve_all",
    "step_once",
    "substitute",
    "symbol",
    "var",
]
