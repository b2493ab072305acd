"""Exception hierarchy.

Every error carries a module-qualified ``code`` (``"dataset.HeaderMismatch"``)
so the CLI can emit one machine-parsable line per failure.
"""


class ImpactLearnError(Exception):
    module = "impactlearn"

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


# dataset
class DatasetError(ImpactLearnError):
    module = "dataset"


class MissingFile(DatasetError):
    pass


class HeaderMismatch(DatasetError):
    def __init__(self, offending, message=None):
        self.offending = list(offending)
        super().__init__(message or f"header mismatch in columns: {', '.join(self.offending)}")


class UnparseableCell(DatasetError):
    def __init__(self, row: int, column: str, token: str):
        self.row, self.column, self.token = row, column, token
        super().__init__(f"row {row}, column {column!r}: cannot parse {token!r}")


class SchemaError(DatasetError):
    pass


class AllMissingColumn(DatasetError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"column {column!r} has no non-missing values")


class MissingValues(DatasetError):
    pass


class DegenerateSplit(DatasetError):
    pass


# scaler
class ScalerError(ImpactLearnError):
    module = "scaler"


class EmptyDataset(ScalerError):
    pass


class ColumnLayoutMismatch(ScalerError):
    pass


# impact_model
class ModelError(ImpactLearnError):
    module = "impact_model"


class DimensionMismatch(ModelError):
    def __init__(self, message: str, module: str | None = None):
        if module is not None:
            self.module = module
        super().__init__(message)


class PoleViolation(ModelError):
    pass


class IndexOutOfRange(ModelError):
    pass


class InvalidModel(ModelError):
    pass


# trainer
class TrainerError(ImpactLearnError):
    module = "trainer"


class ConfigError(TrainerError):
    pass


class NonPositiveTarget(TrainerError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"target value {value!r} is not positive; log-ratio undefined")


class SingleSample(TrainerError):
    pass


class DivergenceDetected(TrainerError):
    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"loss became non-finite at epoch {epoch}")


class RankDeficient(TrainerError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"design matrix is rank deficient; collinear columns: {', '.join(self.columns)}")


# growth_sim
class GrowthError(ImpactLearnError):
    module = "growth_sim"


class NonFiniteState(GrowthError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"state became non-finite at step {step}")


# baselines
class BaselineError(ImpactLearnError):
    module = "baselines"


class SingleClassTraining(BaselineError):
    pass


# metrics
class MetricsError(ImpactLearnError):
    module = "metrics"


class LengthMismatch(MetricsError):
    pass


class SingleClass(MetricsError):
    pass


class TooFewRows(MetricsError):
    pass


# cli
class UsageError(ImpactLearnError):
    module = "cli"
