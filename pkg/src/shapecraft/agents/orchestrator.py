"""Agent control loops: parse, bounding-box layout, bootstrap rounds,
multi-path shape modeling, evaluation, and post-hoc editing.

Three roles share one backend contract: a parser that decomposes the text
prompt into a part graph, a coder that writes shape-DSL programs, and a
vision evaluator that scores renders and returns feedback. Scores are
integers 0-10; a path stops refining once its score reaches the early-stop
threshold, and the best-scoring path (ties: lowest path index) wins.
"""
from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from ..backend import Backend, BackendConfig, ChatMessage, extract_code_block
from ..errors import (MissingBounds, UnparseableEvaluation, UnparseableGraph)
from ..executor import NodeExecutionError, assemble, execute_node
from ..gps import (BoundingVolume, GpsGraph, GpsNode, graph_overview,
                   parse_graph_jsonl, serialize_graph)
from ..program import parse, execute
from ..program.diagnostics import Diagnostic, render_diagnostics
from ..render import preset_cameras, render, render_bboxes
from . import prompts

MAX_PROMPT_ATTEMPTS = 3
BBOX_REFINE_ITERATIONS = 3  # the bbox loop is a fixed single-path refinement


@dataclass(frozen=True)
class EvalReport:
    score: int
    feedback: str

    def __post_init__(self):
        if not 0 <= self.score <= 10:
            raise ValueError("score must be in [0, 10]")


@dataclass(frozen=True)
class SamplingConfig:
    m_paths: int = 3
    t_iterations: int = 3
    s_tau: int = 9
    n_bootstrap: int = 2
    temperature: float = 0.5
    img_size: int = 512
    uniform_fit: bool = False

    def __post_init__(self):
        if self.m_paths < 1 or self.t_iterations < 1:
            raise ValueError("m_paths and t_iterations must be >= 1")
        if not 0 <= self.s_tau <= 10:
            raise ValueError("s_tau must be in [0, 10]")
        if self.n_bootstrap < 0:
            raise ValueError("n_bootstrap must be >= 0")


@dataclass
class Session:
    """Backend plus per-role request configs and run options."""

    backend: Backend
    sampling: SamplingConfig = SamplingConfig()
    parser_cfg: Optional[BackendConfig] = None
    coder_cfg: Optional[BackendConfig] = None
    evaluator_cfg: Optional[BackendConfig] = None
    out_dir: Optional[Path] = None

    def __post_init__(self):
        default = BackendConfig(temperature=self.sampling.temperature)
        self.parser_cfg = self.parser_cfg or default
        self.coder_cfg = self.coder_cfg or default
        self.evaluator_cfg = self.evaluator_cfg or default
        if self.out_dir is not None:
            self.out_dir = Path(self.out_dir)
        self._log: List[dict] = []

    def log(self, event: str, **fields) -> None:
        entry = {"event": event, **fields}
        self._log.append(entry)
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            with open(self.out_dir / "run_log.jsonl", "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def chat(self, cfg: BackendConfig, text: str,
             images: Sequence[bytes] = ()) -> str:
        return self.backend.complete(
            [ChatMessage("user", text, tuple(images))], cfg)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_ROOT_RE = re.compile(r"^\s*root:\s*(.+)$", re.MULTILINE)


def _extract_root(reply: str, fallback: str) -> str:
    m = _ROOT_RE.search(reply)
    return m.group(1).strip() if m else fallback


def parse_shape(x: str, session: Session) -> GpsGraph:
    """Decompose the text prompt into a flat part graph (with retries)."""
    if not x or not x.strip():
        raise ValueError("empty shape description")
    messages = [ChatMessage("user", prompts.parser_prompt(x))]
    last_diags: List[Diagnostic] = []
    for attempt in range(MAX_PROMPT_ATTEMPTS):
        reply = session.backend.complete(messages, session.parser_cfg)
        block, warns = extract_code_block(reply, "jsonl")
        graph, diags = parse_graph_jsonl(block, _extract_root(reply, x.strip()))
        session.log("parse_shape_attempt", attempt=attempt,
                    ok=graph is not None)
        if graph is not None:
            return graph
        last_diags = diags
        messages = messages + [
            ChatMessage("assistant", reply),
            ChatMessage("user",
                        "Your part list could not be parsed:\n"
                        + render_diagnostics(diags)
                        + "\nReply again with the full corrected answer in "
                          "the same format (root line + fenced jsonl block)."),
        ]
    raise UnparseableGraph(
        "part list still unparseable after "
        f"{MAX_PROMPT_ATTEMPTS} attempts: " + render_diagnostics(last_diags))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _parse_eval_json(reply: str) -> Tuple[float, str]:
    candidates = []
    block, _ = extract_code_block(reply, "json")
    candidates.append(block)
    start = reply.find("{")
    if start >= 0:
        candidates.append(reply[start:])
    for text in candidates:
        try:
            obj, _ = json.JSONDecoder().raw_decode(text.strip())
        except (json.JSONDecodeError, ValueError):
            continue
        if isinstance(obj, dict) and isinstance(obj.get("score"), (int, float)):
            return float(obj["score"]), str(obj.get("feedback", ""))
    raise UnparseableEvaluation(f"no score JSON in reply: {reply[:200]!r}")


def evaluate(images: Sequence, context: str, session: Session) -> EvalReport:
    """Ask the vision evaluator for {"score", "feedback"}; re-asks on
    malformed replies, clamps the score into [0, 10]."""
    if not images:
        raise ValueError("evaluate needs at least one image")
    payloads = tuple(img.to_png() if hasattr(img, "to_png") else img
                     for img in images)
    messages = [ChatMessage("user", prompts.evaluator_prompt(context), payloads)]
    last_exc: Optional[Exception] = None
    for attempt in range(MAX_PROMPT_ATTEMPTS):
        reply = session.backend.complete(messages, session.evaluator_cfg)
        try:
            raw_score, feedback = _parse_eval_json(reply)
        except UnparseableEvaluation as exc:
            last_exc = exc
            messages = messages + [
                ChatMessage("assistant", reply),
                ChatMessage("user",
                            'Reply with a single JSON object only: '
                            '{"score": <integer 0-10>, "feedback": "<text>"}'),
            ]
            continue
        score = int(round(raw_score))
        if not 0 <= score <= 10:
            warnings.warn(f"evaluator score {raw_score} clamped into [0, 10]")
            score = min(10, max(0, score))
        return EvalReport(score=score, feedback=feedback)
    raise last_exc


# ---------------------------------------------------------------------------
# bounding boxes
# ---------------------------------------------------------------------------

def _coder_program(session: Session, prompt: str) -> str:
    reply = session.chat(session.coder_cfg, prompt)
    block, _ = extract_code_block(reply, "dsl")
    return block


def _run_bbox_program(source: str) -> Tuple[Optional[BoundingVolume],
                                            List[Diagnostic]]:
    result = parse(source)
    if not result.ok:
        return None, result.diagnostics
    run = execute(result.program)
    if not run.ok:
        return None, run.diagnostics
    count = len(run.scene.objects)
    if count != 1:
        return None, [Diagnostic(
            1, "error",
            f"the program must create exactly one bounding box with a single "
            f"cube_bounding_box call; it created {count} objects")]
    from ..geometry.core import compute_aabb
    aabb = compute_aabb(run.scene.result)
    size = tuple(max(s, 1e-9) for s in aabb.size)
    return BoundingVolume(center=aabb.center, size=size), []


def _bboxes_images(graph: GpsGraph, size: int):
    images = []
    legend = None
    for cam in preset_cameras():
        img, legend = render_bboxes(graph, cam, size)
        images.append(img)
    return images, legend


def generate_bboxes(graph: GpsGraph, session: Session,
                    only_missing: bool = True) -> GpsGraph:
    """Resolve a numeric bounding volume for every node.

    Phase 1 collects one initial layout program per node; phase 2 refines
    each program in a fixed single-path loop with rendered-layout feedback.
    Nodes that never produce a usable box fall back to a unit cube at the
    origin with a warning.
    """
    todo = [n.name for n in graph.nodes
            if not only_missing or n.bounds is None]
    programs: Dict[str, str] = {}
    for name in todo:
        programs[name] = _coder_program(
            session, prompts.bbox_coder_prompt(graph.node(name), graph))
    for name in todo:
        node = graph.node(name)
        program = programs[name]
        best: Optional[Tuple[int, BoundingVolume]] = None
        for t in range(BBOX_REFINE_ITERATIONS):
            bounds, diags = _run_bbox_program(program)
            if bounds is None:
                feedback = render_diagnostics(diags)
                score = None
            else:
                candidate = graph.with_node(node.with_(bounds=bounds))
                visible = GpsGraph(candidate.root_summary, tuple(
                    n for n in candidate.nodes if n.bounds is not None))
                images, legend = _bboxes_images(visible, session.sampling.img_size)
                report = evaluate(
                    images,
                    prompts.bbox_eval_context(visible, node, legend),
                    session)
                score = report.score
                feedback = report.feedback
                if best is None or score > best[0]:
                    best = (score, bounds)
                if score >= session.sampling.s_tau:
                    break
            session.log("bbox_iteration", node=name, iteration=t, score=score)
            if t < BBOX_REFINE_ITERATIONS - 1:
                program = _coder_program(
                    session,
                    prompts.bbox_refine_prompt(node, graph, program, feedback))
        if best is None:
            warnings.warn(f"node '{name}': no usable bounding box after "
                          f"{BBOX_REFINE_ITERATIONS} rounds; using a unit cube")
            bounds = BoundingVolume((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        else:
            bounds = best[1]
        graph = graph.with_node(graph.node(name).with_(bounds=bounds))
    return graph


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------

def bootstrap(graph: GpsGraph, x: str, session: Session,
              n: Optional[int] = None) -> GpsGraph:
    """n rounds of: render the box layout, collect reviewer feedback,
    re-parse the prompt conditioned on it, and re-box changed nodes."""
    rounds = session.sampling.n_bootstrap if n is None else n
    for i in range(rounds):
        images, legend = _bboxes_images(graph, session.sampling.img_size)
        feedback = session.chat(
            session.evaluator_cfg,
            prompts.bootstrap_feedback_prompt(graph, legend),
            [img.to_png() for img in images])
        reply = session.chat(
            session.parser_cfg,
            prompts.reparse_prompt(x, feedback, serialize_graph(graph)))
        block, _ = extract_code_block(reply, "jsonl")
        updated, diags = parse_graph_jsonl(
            block, _extract_root(reply, graph.root_summary))
        session.log("bootstrap_round", round=i, ok=updated is not None)
        if updated is None:
            warnings.warn(f"bootstrap round {i + 1}: updated part list "
                          "unparseable; keeping the previous graph")
            continue
        nodes = []
        for node in updated.nodes:
            if graph.has_node(node.name):
                old = graph.node(node.name)
                if (old.geometric_desc == node.geometric_desc
                        and old.positional_desc == node.positional_desc):
                    node = node.with_(bounds=old.bounds, code=old.code,
                                      best_score=old.best_score)
            nodes.append(node)
        graph = GpsGraph(updated.root_summary, tuple(nodes))
        if any(node.bounds is None for node in graph.nodes):
            graph = generate_bboxes(graph, session, only_missing=True)
    return graph


# ---------------------------------------------------------------------------
# shape modeling (multi-path sampling)
# ---------------------------------------------------------------------------

def _shape_images(node: GpsNode, candidate: GpsNode, graph: GpsGraph,
                  size: int):
    mesh = execute_node(candidate, uniform=False)
    images = [render([mesh], cam, size) for cam in preset_cameras()]
    global_mesh, _ = assemble(graph.with_node(candidate))
    if global_mesh.num_triangles > 0:
        images.append(render([global_mesh], preset_cameras()[0], size))
    return mesh, images


def _artifact_dir(session: Session, node: str, m: int, t: int) -> Optional[Path]:
    if session.out_dir is None:
        return None
    d = session.out_dir / "node" / node / f"path{m + 1}" / f"iter{t + 1}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def model_shape(graph: GpsGraph, session: Session) -> GpsGraph:
    """Write a shape program for every node via multi-path sampling.

    Per node: M independent coder/evaluator paths, each up to T iterations,
    stopping early at score >= s_tau; the node takes the program of the
    best-scoring path (ties break to the lowest path index). Interpreter
    diagnostics from failed programs are fed verbatim into the next refine
    prompt instead of an evaluator score.
    """
    cfg = session.sampling
    for node in graph.nodes:
        if node.bounds is None:
            raise MissingBounds(f"node '{node.name}' has no bounding volume")
    for node in graph.nodes:
        path_bests: List[Tuple[int, Optional[str]]] = []
        for m in range(cfg.m_paths):
            program = _coder_program(session, prompts.coder_prompt(node, graph))
            best_score = 0
            best_code: Optional[str] = None
            for t in range(cfg.t_iterations):
                candidate = node.with_(code=program)
                score: Optional[int] = None
                try:
                    mesh, images = _shape_images(
                        node, candidate, graph, cfg.img_size)
                except NodeExecutionError as exc:
                    feedback = ("The program failed to run. Interpreter "
                                "diagnostics:\n"
                                + render_diagnostics(exc.diagnostics))
                else:
                    report = evaluate(
                        images, prompts.shape_eval_context(node, graph),
                        session)
                    score = report.score
                    feedback = report.feedback
                    if score > best_score:
                        best_score, best_code = score, program
                art = _artifact_dir(session, node.name, m, t)
                if art is not None:
                    (art / "program.dsl").write_text(program, encoding="utf-8")
                    if score is not None:
                        for ci, img in enumerate(images):
                            img.save(art / f"render_{ci}.png")
                        (art / "eval.json").write_text(json.dumps(
                            {"score": score, "feedback": feedback}),
                            encoding="utf-8")
                session.log("model_iteration", node=node.name, path=m,
                            iteration=t, score=score)
                if score is not None and score >= cfg.s_tau:
                    break
                if t < cfg.t_iterations - 1:
                    program = _coder_program(
                        session,
                        prompts.refine_prompt(node, graph, program, feedback))
            path_bests.append((best_score, best_code))
        best_m = max(range(len(path_bests)), key=lambda i: path_bests[i][0])
        score, code = path_bests[best_m]
        if code is None:
            warnings.warn(f"node '{node.name}': no path produced a scoring "
                          "program; falling back to the default cube")
            graph = graph.with_node(node.with_(code=None, best_score=0))
        else:
            graph = graph.with_node(node.with_(code=code, best_score=score))
        session.log("model_node", node=node.name, selected_path=best_m,
                    score=score)
    return graph


# ---------------------------------------------------------------------------
# editing
# ---------------------------------------------------------------------------

_SECTION_RE = re.compile(r"^#\s*node\s+([a-z_][a-z0-9_]*)\s*$", re.MULTILINE)


def split_node_sections(block: str) -> Dict[str, str]:
    """Split a multi-program block on `# node <name>` headers."""
    sections: Dict[str, str] = {}
    matches = list(_SECTION_RE.finditer(block))
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(block)
        sections[m.group(1)] = block[m.end():end].strip() + "\n"
    return sections


def edit_shape(graph: GpsGraph, instruction: str, session: Session
               ) -> Tuple[GpsGraph, Dict[str, List[Diagnostic]]]:
    """Apply a natural-language edit to the node programs.

    Returns the updated graph and a map of node name -> diagnostics for
    nodes whose edited program failed (those keep their pre-edit code).
    """
    if not any(n.code for n in graph.nodes):
        raise ValueError("graph has no node programs to edit")
    reply = session.chat(session.coder_cfg,
                         prompts.edit_prompt(graph, instruction))
    block, _ = extract_code_block(reply, "dsl")
    sections = split_node_sections(block)
    failures: Dict[str, List[Diagnostic]] = {}
    for name, source in sections.items():
        if not graph.has_node(name):
            warnings.warn(f"edit reply names unknown node '{name}'; ignored")
            continue
        node = graph.node(name)
        if node.code is not None and source.strip() == node.code.strip():
            continue
        try:
            execute_node(node.with_(code=source),
                         uniform=session.sampling.uniform_fit)
        except NodeExecutionError as exc:
            failures[name] = exc.diagnostics
            continue
        graph = graph.with_node(node.with_(code=source, best_score=None))
    session.log("edit_shape", failed=sorted(failures))
    return graph, failures
