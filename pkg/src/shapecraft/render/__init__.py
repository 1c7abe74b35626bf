from .core import (Camera, Image, palette, preset_cameras, render,
                   render_bboxes)

__all__ = ["Camera", "Image", "palette", "preset_cameras", "render",
           "render_bboxes"]
