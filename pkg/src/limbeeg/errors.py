"""Exception and warning types shared across the pipeline.

Every error carries an ``exit_code`` so the CLI can map failures to the
documented process status (2 config, 3 data, 4 numerical).
"""


class PipelineError(Exception):
    exit_code = 3


class ConfigInvalid(PipelineError):
    exit_code = 2


class StageInputMissing(PipelineError):
    exit_code = 3


# ingest
class MalformedHeader(PipelineError):
    pass


class RowCountMismatch(PipelineError):
    pass


class NonNumericCell(PipelineError):
    def __init__(self, path, row, column, value):
        self.path, self.row, self.column, self.value = path, row, column, value
        super().__init__(f"{path}: non-numeric cell {value!r} at row {row}, column {column}")


class EmptyDataset(PipelineError):
    pass


class UnlabeledTrial(PipelineError):
    pass


# signal processing
class TooShort(PipelineError):
    pass


class SegmentTooLong(PipelineError):
    pass


class LevelTooDeep(PipelineError):
    pass


class LengthMismatch(PipelineError):
    pass


# cases / selection
class InvalidCaseId(PipelineError):
    pass


class SingleClassCase(PipelineError):
    pass


class SchemaMismatch(PipelineError):
    pass


class KTooLarge(PipelineError):
    pass


class DegenerateCovariance(PipelineError):
    exit_code = 4


# classifiers / evaluation
class SingularCovariance(PipelineError):
    exit_code = 4


class TooFewSamples(PipelineError):
    pass


class EmptyMatrix(PipelineError):
    pass


class PipelineWarning(UserWarning):
    """Base for recoverable conditions; the value falls back to a documented default."""


class AllZeroChannel(PipelineWarning):
    pass


class ZeroVariance(PipelineWarning):
    pass


class DegenerateRange(PipelineWarning):
    pass


class EmptyBand(PipelineWarning):
    pass


class DegenerateFeature(PipelineWarning):
    pass


class UnlabeledFile(PipelineWarning):
    pass


class FeatureFailed(PipelineWarning):
    pass


class NoConvergence(PipelineWarning):
    pass


class FoldsReduced(PipelineWarning):
    pass
