"""Command-line entry point.

Subcommands cover the full pipeline (generate), its individual stages
(bboxes, model, assemble, render), metrics, and post-hoc editing. Settings
resolve as: command-line flags > `shapecraft.json` config file > built-in
defaults. Credentials come from the SHAPECRAFT_API_KEY environment
variable; `--scripted transcript.jsonl` replaces all backends with a
deterministic replay queue for offline runs.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from .agents import (SamplingConfig, Session, bootstrap, edit_shape,
                     generate_bboxes, model_shape, parse_shape)
from .backend import (AuthError, BackendConfig, HttpBackend, ScriptedBackend)
from .errors import ShapecraftError
from .executor import assemble
from .geometry.io import load_obj, load_obj_merged, save_obj
from .gps import GpsGraph, load_graph, save_graph
from .metrics import (DEFAULT_SAMPLE_POINTS, DEFAULT_VOXEL_RESOLUTION,
                      hausdorff, iogt, sample_points, vqa_pass_rate)
from .render import preset_cameras, render, render_bboxes

DEFAULTS = {
    "m": 3,
    "t": 3,
    "s_tau": 9,
    "n_bootstrap": 2,
    "temperature": 0.5,
    "img_size": 512,
    "sample_points": DEFAULT_SAMPLE_POINTS,
    "voxel_res": DEFAULT_VOXEL_RESOLUTION,
}

CONFIG_FILENAME = "shapecraft.json"


class StageFailure(Exception):
    def __init__(self, stage: str, cause: Exception, exit_code: int = 1):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.exit_code = exit_code


def _load_config(path: Optional[str]) -> dict:
    candidate = Path(path) if path else Path(CONFIG_FILENAME)
    if candidate.is_file():
        return json.loads(candidate.read_text(encoding="utf-8"))
    if path:
        raise FileNotFoundError(f"config file not found: {path}")
    return {}


def _setting(name: str, args: argparse.Namespace, config: dict):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return DEFAULTS[name]


def _backend_cfg(config: dict, role: str, temperature: float) -> BackendConfig:
    role_cfg = config.get("backends", {}).get(role, {})
    return BackendConfig(
        endpoint=role_cfg.get("endpoint",
                              BackendConfig.__dataclass_fields__["endpoint"].default),
        model=role_cfg.get("model",
                           BackendConfig.__dataclass_fields__["model"].default),
        temperature=role_cfg.get("temperature", temperature),
        retries=role_cfg.get("retries", 3),
        timeout=role_cfg.get("timeout", 120.0),
    )


def _make_session(args: argparse.Namespace, config: dict,
                  out_dir: Optional[Path]) -> Session:
    sampling = SamplingConfig(
        m_paths=int(_setting("m", args, config)),
        t_iterations=int(_setting("t", args, config)),
        s_tau=int(_setting("s_tau", args, config)),
        n_bootstrap=int(_setting("n_bootstrap", args, config)),
        temperature=float(_setting("temperature", args, config)),
        img_size=int(_setting("img_size", args, config)),
        uniform_fit=bool(getattr(args, "uniform_fit", False)),
    )
    if getattr(args, "scripted", None):
        backend = ScriptedBackend.from_jsonl(args.scripted)
    else:
        backend = HttpBackend(trace=bool(getattr(args, "trace", False)))
    return Session(
        backend=backend,
        sampling=sampling,
        parser_cfg=_backend_cfg(config, "parser", sampling.temperature),
        coder_cfg=_backend_cfg(config, "coder", sampling.temperature),
        evaluator_cfg=_backend_cfg(config, "evaluator", sampling.temperature),
        out_dir=out_dir,
    )


def _out_dir(args: argparse.Namespace) -> Path:
    if getattr(args, "out", None):
        out = Path(args.out)
    else:
        out = Path(f"run-{time.strftime('%Y%m%d-%H%M%S')}")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_outputs(graph: GpsGraph, session: Session, out: Path,
                   obj_name: str = "assembled.obj") -> bool:
    save_graph(out / "graph.gps.jsonl", graph)
    mesh, report = assemble(graph, uniform=session.sampling.uniform_fit)
    parts = list(report.meshes.values())
    if parts:
        save_obj(out / obj_name, parts)
        for cam in preset_cameras():
            img = render(parts, cam, session.sampling.img_size)
            img.save(out / f"render_global_{cam.name}.png")
    if report.failures:
        (out / "failures.json").write_text(json.dumps(
            {name: [d.render() for d in diags]
             for name, diags in report.failures.items()}, indent=2),
            encoding="utf-8")
    return report.ok and mesh.num_vertices > 0


def cmd_generate(args: argparse.Namespace, config: dict) -> int:
    out = _out_dir(args)
    session = _make_session(args, config, out)
    stage = "parse"
    try:
        graph = parse_shape(args.prompt, session)
        stage = "bboxes"
        graph = generate_bboxes(graph, session)
        stage = "bootstrap"
        graph = bootstrap(graph, args.prompt, session)
        stage = "model"
        graph = model_shape(graph, session)
        stage = "assemble"
        ok = _write_outputs(graph, session, out)
    except AuthError as exc:
        raise StageFailure(stage, exc, exit_code=2)
    except (ShapecraftError, OSError, ValueError) as exc:
        raise StageFailure(stage, exc)
    print(f"run directory: {out}")
    return 0 if ok else 1


def cmd_bboxes(args: argparse.Namespace, config: dict) -> int:
    out = _out_dir(args)
    session = _make_session(args, config, out)
    stage = "parse"
    try:
        if getattr(args, "graph", None):
            graph = load_graph(args.graph)
        else:
            graph = parse_shape(args.prompt, session)
        stage = "bboxes"
        graph = generate_bboxes(graph, session)
        save_graph(out / "graph.gps.jsonl", graph)
        for cam in preset_cameras():
            img, _ = render_bboxes(graph, cam, session.sampling.img_size)
            img.save(out / f"bboxes_{cam.name}.png")
    except AuthError as exc:
        raise StageFailure(stage, exc, exit_code=2)
    except (ShapecraftError, OSError, ValueError) as exc:
        raise StageFailure(stage, exc)
    print(f"run directory: {out}")
    return 0


def cmd_model(args: argparse.Namespace, config: dict) -> int:
    out = _out_dir(args)
    session = _make_session(args, config, out)
    try:
        graph = load_graph(args.graph)
        graph = model_shape(graph, session)
        ok = _write_outputs(graph, session, out)
    except AuthError as exc:
        raise StageFailure("model", exc, exit_code=2)
    except (ShapecraftError, OSError, ValueError) as exc:
        raise StageFailure("model", exc)
    print(f"run directory: {out}")
    return 0 if ok else 1


def cmd_assemble(args: argparse.Namespace, config: dict) -> int:
    out = _out_dir(args)
    session = _make_session(args, config, out)
    try:
        graph = load_graph(args.graph)
        ok = _write_outputs(graph, session, out)
    except (ShapecraftError, OSError, ValueError) as exc:
        raise StageFailure("assemble", exc)
    return 0 if ok else 1


def cmd_render(args: argparse.Namespace, config: dict) -> int:
    out = _out_dir(args)
    size = int(_setting("img_size", args, config))
    try:
        meshes = load_obj(args.mesh)
        for cam in preset_cameras():
            render(meshes, cam, size).save(out / f"render_{cam.name}.png")
    except (ShapecraftError, OSError, ValueError) as exc:
        raise StageFailure("render", exc)
    print(f"renders written to: {out}")
    return 0


def cmd_metrics(args: argparse.Namespace, config: dict) -> int:
    n = int(_setting("sample_points", args, config))
    res = int(_setting("voxel_res", args, config))
    seed = int(getattr(args, "seed", None) or 0)
    try:
        gen = load_obj_merged(args.generated)
        gt = load_obj_merged(args.ground_truth)
        report = {
            "hausdorff": hausdorff(sample_points(gen, n, seed),
                                   sample_points(gt, n, seed)),
            "iogt": iogt(gen, gt, res),
            "clip": "unavailable",
        }
        if getattr(args, "questions", None):
            questions = [q for q in Path(args.questions).read_text(
                encoding="utf-8").splitlines() if q.strip()]
            session = _make_session(args, config, None)
            imgs = [render([gen], cam, int(_setting("img_size", args, config)))
                    for cam in preset_cameras()]
            report["vqa"] = vqa_pass_rate(imgs, questions, session.backend,
                                          session.evaluator_cfg)
    except FileNotFoundError as exc:
        raise StageFailure("metrics", exc, exit_code=2)
    except AuthError as exc:
        raise StageFailure("metrics", exc, exit_code=2)
    except (ShapecraftError, OSError, ValueError) as exc:
        raise StageFailure("metrics", exc)
    print(json.dumps(report, indent=2))
    return 0


def cmd_edit(args: argparse.Namespace, config: dict) -> int:
    run_dir = Path(args.run_dir)
    graph_path = run_dir / "graph.gps.jsonl"
    try:
        if not graph_path.is_file():
            raise FileNotFoundError(f"no graph in run dir: {graph_path}")
        graph = load_graph(graph_path)
        if not any(n.code for n in graph.nodes):
            raise ValueError("run dir graph has no node programs to edit")
    except (OSError, ValueError, ShapecraftError) as exc:
        raise StageFailure("edit", exc, exit_code=2)
    session = _make_session(args, config, run_dir)
    try:
        graph, failures = edit_shape(graph, args.instruction, session)
        version = 2
        while (run_dir / f"assembled_v{version}.obj").exists():
            version += 1
        save_graph(run_dir / f"graph_v{version}.gps.jsonl", graph)
        mesh, report = assemble(graph, uniform=session.sampling.uniform_fit)
        parts = list(report.meshes.values())
        if parts:
            save_obj(run_dir / f"assembled_v{version}.obj", parts)
        for name, diags in failures.items():
            for d in diags:
                print(f"{name}: {d.render()}", file=sys.stderr)
    except AuthError as exc:
        raise StageFailure("edit", exc, exit_code=2)
    except (ShapecraftError, OSError, ValueError) as exc:
        raise StageFailure("edit", exc)
    return 0 if not failures else 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, help="number of sampling paths per part")
    p.add_argument("--t", type=int, help="max refinement iterations per path")
    p.add_argument("--s-tau", dest="s_tau", type=int,
                   help="early-stop score threshold (0-10)")
    p.add_argument("--n-bootstrap", dest="n_bootstrap", type=int,
                   help="bounding-box bootstrap rounds")
    p.add_argument("--temperature", type=float)
    p.add_argument("--out", help="output/run directory")
    p.add_argument("--scripted", help="scripted transcript JSONL (offline)")
    p.add_argument("--trace", action="store_true",
                   help="log backend requests/responses")
    p.add_argument("--seed", type=int)
    p.add_argument("--img-size", dest="img_size", type=int)
    p.add_argument("--voxel-res", dest="voxel_res", type=int)
    p.add_argument("--sample-points", dest="sample_points", type=int)
    p.add_argument("--uniform-fit", dest="uniform_fit", action="store_true",
                   help="fit parts with a uniform scale instead of per-axis")
    p.add_argument("--config", help=f"config file (default {CONFIG_FILENAME})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shapecraft",
        description="Text-to-3D shape generation via agent-written shape "
                    "programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="full pipeline from a text prompt")
    p.add_argument("prompt")
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bboxes", help="parse a prompt and lay out part boxes")
    p.add_argument("prompt", nargs="?")
    p.add_argument("--graph", help="existing graph JSONL (skip parsing)")
    _add_common(p)
    p.set_defaults(func=cmd_bboxes)

    p = sub.add_parser("model", help="write part programs for a boxed graph")
    p.add_argument("graph", help="graph JSONL with bounds")
    _add_common(p)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("assemble", help="execute a graph and export the mesh")
    p.add_argument("graph", help="graph JSONL with code")
    _add_common(p)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("render", help="render a mesh file from preset views")
    p.add_argument("mesh", help="OBJ file")
    _add_common(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("metrics", help="compare a generated mesh to a "
                                       "ground-truth mesh")
    p.add_argument("generated")
    p.add_argument("ground_truth")
    p.add_argument("--questions", help="file with one yes/no question per line")
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("edit", help="apply a text edit to an existing run")
    p.add_argument("run_dir")
    p.add_argument("instruction")
    _add_common(p)
    p.set_defaults(func=cmd_edit)

    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trace", False):
        logging.basicConfig(level=logging.INFO)
    try:
        config = _load_config(getattr(args, "config", None))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args, config)
    except StageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
