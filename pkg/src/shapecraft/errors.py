"""Exception and warning types shared across the package."""


class ShapecraftError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(ShapecraftError):
    pass


class UnknownPrimitive(GeometryError):
    def __init__(self, kind: str):
        super().__init__(f"unknown primitive kind '{kind}'")
        self.kind = kind


class InvalidParam(GeometryError):
    def __init__(self, name: str, reason: str):
        super().__init__(f"invalid parameter '{name}': {reason}")
        self.name = name
        self.reason = reason


class DegenerateCurve(GeometryError):
    pass


class MissingAuxMesh(GeometryError):
    pass


class NonManifoldOperand(GeometryError):
    pass


class EmptyMesh(GeometryError):
    pass


class EmptyScene(GeometryError):
    pass


class MissingBounds(GeometryError):
    pass


class UnknownNode(ShapecraftError):
    def __init__(self, name: str):
        super().__init__(f"unknown node '{name}'")
        self.name = name


class OpenMesh(GeometryError):
    pass


class EmptyVoxelization(GeometryError):
    pass


class BackendError(ShapecraftError):
    pass


class TransportError(BackendError):
    pass


class AuthError(BackendError):
    pass


class MalformedResponse(BackendError):
    pass


class UnparseableGraph(ShapecraftError):
    pass


class UnparseableEvaluation(ShapecraftError):
    pass


class GeometryWarning(UserWarning):
    """Non-fatal geometric condition (degenerate scale, perturbed CSG input, ...).

    The shape-program interpreter captures these and converts them into
    line-numbered warning diagnostics.
    """
