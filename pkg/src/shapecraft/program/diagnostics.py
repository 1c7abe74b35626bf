"""Line-numbered diagnostics emitted by the DSL parser and interpreter."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List


@dataclass(frozen=True)
class Diagnostic:
    line: int
    severity: str  # "error" | "warning"
    message: str

    def __post_init__(self):
        if self.severity not in ("error", "warning"):
            raise ValueError(f"bad severity {self.severity!r}")
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")

    def render(self) -> str:
        return f"line {self.line}: {self.severity}: {self.message}"


def render_diagnostics(diags: Iterable[Diagnostic]) -> str:
    """The exact text embedded into Coder feedback prompts."""
    return "\n".join(d.render() for d in diags)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)
