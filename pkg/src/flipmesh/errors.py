"""Exception hierarchy shared by all flipmesh modules."""


class FlipMeshError(Exception):
    """Base class for every error raised by flipmesh."""


class DegenerateInput(FlipMeshError):
    pass


class PreconditionViolated(FlipMeshError):
    pass


class NotCoplanar(FlipMeshError):
    pass


class NotFlippable(FlipMeshError):
    pass


class ParseError(FlipMeshError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonTriangularFace(ParseError):
    pass


class NonManifoldInput(FlipMeshError):
    pass


class EmptyPatch(FlipMeshError):
    pass


class NoProxy(FlipMeshError):
    pass


class TooManyPoints(FlipMeshError):
    pass


class DegenerateConfiguration(FlipMeshError):
    pass


class VertexSetMismatch(FlipMeshError):
    pass


class JitterBrokeMesh(FlipMeshError):
    pass


class SpecInvariantViolated(FlipMeshError):
    pass
