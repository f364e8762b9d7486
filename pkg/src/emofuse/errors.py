"""Exception hierarchy shared by all emofuse modules."""


class EmofuseError(Exception):
    """Base class for all errors raised by this package."""


# --- dataset ingestion ---

class ParseError(EmofuseError):
    pass


class MissingFile(EmofuseError):
    def __init__(self, path):
        super().__init__(f"referenced file does not exist: {path}")
        self.path = path


class DuplicateTrial(EmofuseError):
    pass


class UnknownChannel(EmofuseError):
    pass


class ChannelCountMismatch(EmofuseError):
    pass


class NonNumericSample(EmofuseError):
    pass


class UnsupportedEncoding(EmofuseError):
    pass


class CorruptHeader(EmofuseError):
    pass


class EmptyStream(EmofuseError):
    pass


class WindowLongerThanTrial(EmofuseError):
    pass


# --- feature extraction ---

class DegenerateSignal(EmofuseError):
    pass


class TooShort(EmofuseError):
    pass


class InvalidBand(EmofuseError):
    pass


class TooFewFrames(EmofuseError):
    pass


# --- classification / fusion / evaluation ---

class SingleClass(EmofuseError):
    pass


class MismatchedWindows(EmofuseError):
    pass


class DimensionMismatch(EmofuseError):
    pass


class EmptyInput(EmofuseError):
    pass


class NotEnoughSubjects(EmofuseError):
    pass
