from .nodes import (AndE, ArrLoad, ArrStore, Alloc, Assert, AssertKind,
                    Assign, Assume, BinExpr, BinOp, Block, BoolAssign,
                    BoolLit, BoolRef, Branch, Cmp, Cond, Deref, Free,
                    Function, Goto, Havoc, LinExpr, NotE, OrE, Program,
                    Return, Stmt, Terminator, cell_var, cond_variables,
                    eval_cond, len_var, lin, lin_const, lin_var, negate,
                    program_to_text, status_var, stmt_to_text, tdiv, tmod)
from .parser import ParseError, parse_program
from .instrument import count_risky, instrument
from .concrete import ConcreteVerdictSet, ExecutionBudgetError, concrete_run_all

__all__ = [
    "AndE", "ArrLoad", "ArrStore", "Alloc", "Assert", "AssertKind", "Assign",
    "Assume", "BinExpr", "BinOp", "Block", "BoolAssign", "BoolLit", "BoolRef",
    "Branch", "Cmp", "Cond", "ConcreteVerdictSet", "Deref",
    "ExecutionBudgetError", "Free", "Function", "Goto", "Havoc", "LinExpr",
    "NotE", "OrE", "ParseError", "Program", "Return", "Stmt", "Terminator",
    "cell_var", "concrete_run_all", "cond_variables", "count_risky",
    "eval_cond", "instrument", "len_var", "lin", "lin_const", "lin_var",
    "negate", "parse_program", "program_to_text", "status_var",
    "stmt_to_text", "tdiv", "tmod",
]
