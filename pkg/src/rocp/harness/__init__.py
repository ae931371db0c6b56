"""Training loop, evaluation, diagnostics and the command line."""
from .config import RunConfig, parse_kv_lines, read_config_file
from .diagnostics import UndefinedValueError, pca_project, pearson_r, twin_q_diagnostic
from .evaluation import (EpisodeRecord, evaluate, run_episode, run_episodes, success_rate,
                         summarize, upright_fraction)
from .runlog import COLUMNS, RunLog
from .train import seed_streams, train_run, write_checkpoint

__all__ = [
    "COLUMNS", "EpisodeRecord", "RunConfig", "RunLog", "UndefinedValueError", "evaluate",
    "parse_kv_lines", "pca_project", "pearson_r", "read_config_file", "run_episode",
    "run_episodes", "seed_streams", "success_rate", "summarize", "train_run",
    "twin_q_diagnostic", "upright_fraction", "write_checkpoint",
]
