class ExporterError(Exception):
    """Base for every error this package raises on purpose."""


class EncoderLoadError(ExporterError):
    """The requested encoder backend cannot be constructed (unknown name,
    missing ecosystem package, or unavailable weights)."""


class CorruptInput(ExporterError):
    """A manifest or referenced input file is unusable."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{path}: {reason}")
