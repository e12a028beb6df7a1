"""
Exception hierarchy for the pipeline.
Input problems exit with status 2, computation problems with status 1.
"""

from typing import Optional


class RecombinationError(Exception):
    """Base error for every failure the pipeline reports to the user"""

    exit_code = 1


class InputError(RecombinationError):
    exit_code = 2


class ConfigError(InputError):
    pass


class MalformedRecordError(InputError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"malformed record at line {line}: {reason}")


class DuplicatePatentError(InputError):
    def __init__(self, patent_id: str, line: Optional[int] = None):
        self.patent_id = patent_id
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate patent id '{patent_id}'{where}")


class DateParseError(InputError):
    def __init__(self, line: int, value: str):
        self.line = line
        self.value = value
        super().__init__(f"unparseable date '{value}' at line {line}")


class MissingArtifactError(InputError):
    def __init__(self, path, stage: str):
        self.path = path
        self.stage = stage
        super().__init__(f"missing artifact {path}; run the '{stage}' stage first")


class OrderingError(RecombinationError):
    def __init__(self, patent_id: str, date, previous):
        self.patent_id = patent_id
        super().__init__(f"record '{patent_id}' dated {date} follows a record dated {previous}")


class UnseenPairError(RecombinationError):
    pass


class EmptyPairSetError(RecombinationError):
    pass


class UndefinedDifferentiationError(RecombinationError):
    pass


class NestingViolationError(RecombinationError):
    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j
        super().__init__(f"knowledge sets {i} and {j} are not nested")


class ConvergenceError(RecombinationError):
    def __init__(self, what: str, iterations: int, last_delta: float):
        self.iterations = iterations
        self.last_delta = last_delta
        super().__init__(f"{what} did not converge after {iterations} iterations (last delta {last_delta:.3e})")


class RankDeficiencyError(RecombinationError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"design matrix is rank deficient: column '{column}' is collinear")


class ClusterError(RecombinationError):
    pass


class DomainError(RecombinationError):
    pass


class InfeasibleError(RecombinationError):
    pass


class MatchingError(RecombinationError):
    pass


class SizeMismatchError(RecombinationError):
    pass


class SingleInventorError(RecombinationError):
    pass
