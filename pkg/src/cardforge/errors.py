"""Exception types raised across the pipeline."""


class CardForgeError(Exception):
    """Base class for all pipeline errors."""


class InvalidClassCode(CardForgeError, ValueError):
    pass


class AnnotationParseError(CardForgeError, ValueError):
    pass


class DegenerateQuad(CardForgeError, ValueError):
    pass


class SingularHomography(CardForgeError, ValueError):
    pass


class EmptySequence(CardForgeError):
    pass


class FrameSizeMismatch(CardForgeError):
    pass


class MissingSequence(CardForgeError):
    pass


class NoValidPlacement(CardForgeError):
    pass


class CanvasTooSmall(CardForgeError):
    pass


class MissingAsset(CardForgeError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class MissingClassAssets(CardForgeError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__("no assets for classes: " + ", ".join(self.missing))


class EmptyBackgrounds(CardForgeError):
    pass


class InvalidFraction(CardForgeError, ValueError):
    pass


class MalformedLabel(CardForgeError, ValueError):
    pass


class ConfigError(CardForgeError, ValueError):
    pass
