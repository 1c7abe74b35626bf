from .diagnostics import Diagnostic, has_errors, render_diagnostics
from .parser import ObjectRef, ParseResult, ShapeProgram, Statement, parse
from .interpreter import (Builtin, ExecutionResult, SceneObjects, builtin_registry,
                          execute, library_documentation, run_source)

__all__ = [
    "Diagnostic", "has_errors", "render_diagnostics",
    "ObjectRef", "ParseResult", "ShapeProgram", "Statement", "parse",
    "Builtin", "ExecutionResult", "SceneObjects", "builtin_registry",
    "execute", "library_documentation", "run_source",
]
