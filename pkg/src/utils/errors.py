"""
Exception types shared across the pipeline
"""
from typing import Optional


class ConfigError(ValueError):
    """Invalid run configuration (schema, business rule or catalog)"""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class DatasetFormatError(ValueError):
    """Malformed dataset or checkpoint file"""

    def __init__(self, message: str, file_path: Optional[str] = None, line: Optional[int] = None):
        self.file_path = file_path
        self.line = line
        location = ""
        if file_path:
            location = str(file_path)
        if line is not None:
            location = f"{location}:{line}" if location else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)


class UndefinedMetricError(ValueError):
    """Metric cannot be computed because a class is missing from the samples"""
