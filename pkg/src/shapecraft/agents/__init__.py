from .orchestrator import (EvalReport, SamplingConfig, Session, bootstrap,
                           edit_shape, evaluate, generate_bboxes, model_shape,
                           parse_shape, split_node_sections)
from . import prompts

__all__ = ["EvalReport", "SamplingConfig", "Session", "bootstrap",
           "edit_shape", "evaluate", "generate_bboxes", "model_shape",
           "parse_shape", "split_node_sections", "prompts"]
