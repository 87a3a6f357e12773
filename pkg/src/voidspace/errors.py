"""Exception hierarchy shared by all pipeline stages."""


class VoidSpaceError(Exception):
    """Base class for everything this package raises on purpose."""


class MeshFormatError(VoidSpaceError):
    """Unparseable or inconsistent mesh / attribute sidecar input."""


class DepthFormatError(VoidSpaceError):
    """Unparseable or unsupported depth-map input."""


class EmptySceneError(VoidSpaceError):
    """No foreground pixel survived ingestion; nothing to normalize."""


class ParameterError(VoidSpaceError):
    """A numeric parameter is outside its documented domain."""


class ConfigError(VoidSpaceError):
    """Config file rejected; `path` is the offending JSON path."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class StageError(VoidSpaceError):
    """Wraps a failure with the name of the pipeline stage it came from."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.__cause__ = cause
