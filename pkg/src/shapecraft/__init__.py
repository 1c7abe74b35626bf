"""Shapecraft: agentic text-to-3D shape modeling on a procedural DSL."""

from .gps import (BoundingVolume, GpsGraph, GpsNode, graph_overview,
                  load_graph, parse_graph_jsonl, save_graph, serialize_graph)
from .executor import (AssemblyReport, NodeExecutionError, assemble,
                       execute_node, fit_to_bounds, partial_geometry)
from .backend import (BackendConfig, ChatMessage, HttpBackend,
                      ScriptedBackend, extract_code_block)
from .agents import (EvalReport, SamplingConfig, Session, bootstrap,
                     edit_shape, evaluate, generate_bboxes, model_shape,
                     parse_shape)
from .metrics import (compile_rate, hausdorff, iogt, sample_points,
                      vqa_pass_rate)

__version__ = "0.1.0"
