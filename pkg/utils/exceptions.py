from pathlib import Path
from typing import Optional, Union


class AnalysisError(Exception):
    """Base error for every failure the analysis reports to its caller"""

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class IngestError(AnalysisError):
    """I/O failure or format violation in an input file"""

    def __init__(self, path: Union[str, Path], detail: str, line: Optional[int] = None):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {detail}")


class ParamsError(AnalysisError):
    """Invalid parameter combination"""


class ScenarioError(AnalysisError):
    """Invalid synthetic scenario"""


class DataError(AnalysisError):
    """A stage precondition does not hold for the data it was given"""
