"""Request/response models shared by the HTTP service and the CLI."""

from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from ..harness import AggregateRow, CheckReport, SimConfig

ModeName = Literal["dd", "aba", "full-training", "training-only", "ls", "perfect-csi"]


class SimRequest(BaseModel):
    """Mirror of SimConfig; sweeps may pass lists for ebn0_db and mode."""

    model_config = ConfigDict(extra="forbid")

    n_tx: int = 2
    n_rx: int = 4
    n_subcarriers: int = 512
    cp_len: int = 16
    n_paths: int = 8
    decay: float = 2.0
    doppler_rho: float = 1.0
    training_len: int = 128
    modulation: Literal["bpsk", "qpsk"] = "bpsk"
    ebn0_db: Union[float, List[float]] = 10.0
    mode: Union[ModeName, List[ModeName]] = "dd"
    n_blind_passes: int = 3
    mu_train: Optional[float] = None
    mu_blind: Optional[float] = None
    anneal_factor: float = 0.15
    mu_alpha: float = 1e-4
    mu_beta: float = 1e-4
    n_frames: int = 1
    n_trials: int = 100
    seed: int = 0
    noise_var: Optional[float] = None

    def to_config(self) -> SimConfig:
        return SimConfig(**self.model_dump())


class MetricsRow(BaseModel):
    """One aggregated (mode, Eb/N0, frame, pass) result."""

    model_config = ConfigDict(populate_by_name=True)

    mode: str
    n_tx: int
    n_rx: int
    ebn0_db: float
    frame: int
    pass_index: int = Field(alias="pass")
    channel_mse: float
    mse_stderr: float
    ber: float
    ber_stderr: float
    bits_total: int
    trials: int

    @classmethod
    def from_row(cls, row: AggregateRow) -> "MetricsRow":
        return cls(mode=row.mode, n_tx=row.n_tx, n_rx=row.n_rx, ebn0_db=row.ebn0_db,
                   frame=row.frame, pass_index=row.pass_idx,
                   channel_mse=row.channel_mse, mse_stderr=row.mse_stderr,
                   ber=row.ber, ber_stderr=row.ber_stderr,
                   bits_total=row.bits_total, trials=row.trials)


class RunResponse(BaseModel):
    rows: List[MetricsRow]
    csv: str


class CheckItem(BaseModel):
    name: str
    max_error: float
    tolerance: float
    passed: bool


class CheckResponse(BaseModel):
    passed: bool
    runtime_s: float
    checks: List[CheckItem]

    @classmethod
    def from_report(cls, report: CheckReport) -> "CheckResponse":
        return cls(passed=report.passed, runtime_s=report.runtime_s,
                   checks=[CheckItem(name=c.name, max_error=c.max_error,
                                     tolerance=c.tolerance, passed=c.passed)
                           for c in report.checks])
