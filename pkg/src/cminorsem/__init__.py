"""Executable-semantics workbench for sequential Cminor."""

from .values import (
    Chunk,
    VUNDEF,
    Value,
    Vfloat,
    Vint,
    Vptr,
    Vundef,
    chunk_size,
    is_false,
    is_true,
)
from .memory import Memory, alloc, empty_memory, free, load, store
from .footprint import Footprint, allows, fp_empty, fp_grant, fp_join, fp_revoke
from .syntax import (
    Eload,
    Eop,
    Eval,
    Evar,
    Expr,
    FunDef,
    Program,
    Stmt,
    pure,
    strip_annotations,
)
from .eval import GlobalEnv, State, eval_expr, eval_expr_erased, eval_exprlist, eval_operation
from .smallstep import (
    AtLeastBound,
    Continuation,
    Control,
    Finished,
    Kblock,
    Kcall,
    Kseq,
    Kstop,
    KSTOP,
    OutOfFuel,
    Stuck,
    absorbs,
    cat,
    entry_continuation,
    initial_footprint,
    initial_memory,
    is_stuck,
    max_absorb,
    run,
    step,
    step_once,
    unfold_loop,
)
from .assertions import (
    Assertion,
    CheckResult,
    HOLDS,
    LogicVar,
    assertion_free_vars,
    satisfies,
    witness_candidates,
)
from .parser import ParseError, parse_assertion, parse_expr, parse_program
from .pretty import pretty_print, show_assertion, show_expr, show_value
from .bigstep import BigOutcome, bigstep_exec, bigstep_run
from .proggen import GenConfig, gen_program
from .hoare import CheckReport, check_frame_side_condition, check_function, check_gamma, modified_vars

__all__ = [name for name in dir() if not name.startswith("_")]
