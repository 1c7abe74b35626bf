"""Prompt templates for the three agent roles.

The coder prompts embed the DSL reference generated from the interpreter's
builtin registry, so documentation and implementation cannot drift. All
templates are plain functions returning strings; placeholders are filled by
the orchestrator.
"""
from __future__ import annotations

from typing import Dict, Optional, Sequence, Tuple

from ..gps import GpsGraph, GpsNode, graph_overview
from ..program import library_documentation

JSONL_NODE_FORMAT = (
    'One JSON object per line with exactly these keys:\n'
    '  "node": short snake_case identifier (lowercase letters, digits, '
    'underscore; must not start with a digit)\n'
    '  "shape_description": what the part looks like geometrically\n'
    '  "bounding_volume": where the part sits and how big it is, in words\n'
)


def parser_prompt(shape_description: str) -> str:
    return f"""You are a 3D shape analyst. Decompose the object below into its
physically meaningful parts.

Object: {shape_description}

Work top-down: start from the whole object, split it into coarse groups,
and keep splitting until every part is a simple solid that one primitive or
a short procedure could model. Merge repeated identical parts (e.g. four
identical legs) into a single part only if they form one connected piece;
otherwise list them separately.

Reply with:
1. A line starting with `root: ` giving a one-sentence summary of the whole
   object.
2. Your intermediate grouping layers as indented bullet lines (for the
   reader only; they are not machine-parsed).
3. One fenced code block tagged `jsonl` listing ONLY the final leaf parts.
{JSONL_NODE_FORMAT}
The coordinate frame is right-handed with the z-axis pointing upward."""


def reparse_prompt(shape_description: str, feedback: str,
                   current_graph_jsonl: str) -> str:
    return f"""You are a 3D shape analyst revising a part decomposition.

Object: {shape_description}

Current part list (JSONL):
```jsonl
{current_graph_jsonl.rstrip()}
```

Review feedback on the current part layout:
{feedback}

Update the decomposition to address the feedback. You may add, remove,
rename, or re-describe parts. Return the FULL updated part list — not a
diff — as:
1. A line starting with `root: ` (one-sentence summary).
2. One fenced code block tagged `jsonl` with one object per leaf part.
{JSONL_NODE_FORMAT}
The coordinate frame is right-handed with the z-axis pointing upward."""


def dsl_reference() -> str:
    return library_documentation()


def bbox_coder_prompt(node: GpsNode, graph: GpsGraph) -> str:
    return f"""You are a 3D layout coder. Place an axis-aligned bounding box
for ONE part of an object.

{graph_overview(graph)}
Target part: {node.name}
Part geometry: {node.geometric_desc}
Part placement: {node.positional_desc}

Write a one-line program in the shape DSL that creates the part's bounding
box:

    cube_bounding_box(name="{node.name}_bbox", position=(x, y, z), scale=(sx, sy, sz))

Rules:
- Generate exactly ONE bounding box — a single cube_bounding_box call.
- position is the box center; scale gives half-extents per axis, so the box
  spans position ± scale.
- The coordinate frame is right-handed and the z-axis points upward; the
  object rests around the origin.
- Make the box proportions and placement consistent with the other parts'
  placements listed above.

Reply with one fenced code block tagged `dsl` containing only the program."""


def bbox_refine_prompt(node: GpsNode, graph: GpsGraph, program: str,
                       feedback: str) -> str:
    return f"""You are a 3D layout coder refining a bounding-box program.

{graph_overview(graph)}
Target part: {node.name}

Current program:
```dsl
{program.rstrip()}
```

Feedback:
{feedback}

Fix the program. Keep exactly ONE cube_bounding_box call (position = center,
scale = half-extents, z up). Reply with one fenced code block tagged `dsl`
containing only the corrected program."""


def bbox_eval_context(graph: GpsGraph, node: GpsNode,
                      legend: Dict[str, Tuple[int, int, int]]) -> str:
    legend_lines = "\n".join(
        f"- {name}: RGB{tuple(color)}" for name, color in legend.items())
    return f"""The images show color-coded part bounding boxes for this object:

{graph_overview(graph)}
Box colors:
{legend_lines}

Focus on the box for part '{node.name}'. Judge the layout on these criteria:
1. Position: is the box where the part belongs relative to the others?
2. Proportions: do the box extents match the part's described shape?
3. Scale: is the box sized sensibly relative to the other parts?
4. Coverage: would the part fit the box without large gaps or overflow?"""


def coder_prompt(node: GpsNode, graph: GpsGraph) -> str:
    return f"""You are a 3D procedural modeling coder. Write a program in the
shape DSL below that models ONE part of an object.

{graph_overview(graph)}
Target part: {node.name}
Part geometry: {node.geometric_desc}
Part placement: {node.positional_desc}

DSL reference:
{dsl_reference()}
Notes:
- One call per line; no loops, conditionals, or arithmetic.
- Model the part's shape only. The result is automatically scaled and
  translated into the part's bounding volume afterwards, so overall
  position/size need not be exact — relative proportions matter.
- The coordinate frame is right-handed with the z-axis pointing upward.

Reply with one fenced code block tagged `dsl` containing only the program."""


def refine_prompt(node: GpsNode, graph: GpsGraph, program: str,
                  feedback: str) -> str:
    return f"""You are a 3D procedural modeling coder improving a part program.

{graph_overview(graph)}
Target part: {node.name}
Part geometry: {node.geometric_desc}

Current program:
```dsl
{program.rstrip()}
```

Feedback:
{feedback}

Rewrite the program to address the feedback, keeping the same DSL (one call
per line, no loops or expressions). Reply with one fenced code block tagged
`dsl` containing only the improved program."""


def shape_eval_context(node: GpsNode, graph: GpsGraph) -> str:
    return f"""The images show a 3D part modeled procedurally: the part alone
from three viewpoints, plus the part in the context of the whole object.

Whole object: {graph.root_summary}
Part: {node.name}
Intended geometry: {node.geometric_desc}
Intended placement: {node.positional_desc}

Judge the part on these criteria:
1. Shape fidelity: does the geometry match the intended description?
2. Proportions: are the dimensions plausible for this part?
3. Structure: are sub-features present and correctly arranged?
4. Placement: does the part sit correctly within the whole object?
5. Visual quality: is the surface clean (no stray or broken geometry)?"""


EVAL_ENVELOPE = """Reply with a single JSON object and nothing else:
{"score": <integer 0-10 overall score>, "feedback": "<what to improve, referencing the criteria>"}"""


def evaluator_prompt(context: str) -> str:
    return f"""You are a meticulous 3D quality evaluator.

{context}

{EVAL_ENVELOPE}"""


def bootstrap_feedback_prompt(graph: GpsGraph,
                              legend: Dict[str, Tuple[int, int, int]]) -> str:
    legend_lines = "\n".join(
        f"- {name}: RGB{tuple(color)}" for name, color in legend.items())
    return f"""You are a 3D layout reviewer. The images show color-coded part
bounding boxes for this object from three viewpoints:

{graph_overview(graph)}
Box colors:
{legend_lines}

Critique the part decomposition and layout in free text: missing or
redundant parts, wrong relative placement, implausible proportions. Be
specific and actionable; do not return JSON or code."""


def edit_prompt(graph: GpsGraph, instruction: str) -> str:
    sections = []
    for n in graph.nodes:
        if n.code:
            sections.append(f"# node {n.name}\n{n.code.rstrip()}")
    programs = "\n\n".join(sections)
    return f"""You are a 3D procedural modeling coder editing an existing model.

{graph_overview(graph)}
Current part programs (shape DSL, one section per part):
```dsl
{programs}
```

Edit instruction: {instruction}

Apply the instruction. Return ALL part programs (changed and unchanged) in
one fenced code block tagged `dsl`, keeping the `# node <name>` section
headers exactly. Do not add or remove parts. Use the same DSL: one call per
line, no loops or expressions.

DSL reference:
{dsl_reference()}"""


def vqa_prompt(question: str) -> str:
    return f"""Look at the attached renders of a 3D object and answer the
question with exactly one word: yes, no, or unclear.

Question: {question}"""
